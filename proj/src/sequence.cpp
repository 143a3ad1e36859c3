#include "omac/sequence.hpp"

#include <algorithm>
#include <string>

#include "omac/error.hpp"

namespace omac {

std::string_view ToString(Modality modality) {
  switch (modality) {
    case Modality::kAudio:
      return "audio";
    case Modality::kVideo:
      return "video";
    case Modality::kVideoMemory:
      return "video-memory";
  }
  return "video";
}

CompressedSequence Assemble(const VisualCompressionResult& visual,
                            const AudioCompressionResult& audio,
                            std::size_t frames, std::size_t positions,
                            std::span<const std::size_t> alignment) {
  if (visual.frames != frames || visual.positions_per_frame != positions ||
      visual.retained_per_frame.size() != frames ||
      visual.selected_frames.size() != visual.frame_memories.size()) {
    Fail(ErrorCode::kInvalidInput,
         "visual result does not come from a " + std::to_string(frames) +
             "x" + std::to_string(positions) + " grid");
  }
  if (audio.per_frame_budget.size() != frames) {
    Fail(ErrorCode::kInvalidInput,
         "audio budgets cover " + std::to_string(audio.per_frame_budget.size()) +
             " frames, expected " + std::to_string(frames));
  }
  std::vector<std::vector<const AudioAnchor*>> audio_by_frame(frames);
  for (const auto& anchor : audio.anchors) {
    if (anchor.original_index >= alignment.size() ||
        alignment[anchor.original_index] >= frames) {
      Fail(ErrorCode::kInvalidInput,
           "audio anchor " + std::to_string(anchor.original_index + 1) +
               " does not match the stream alignment");
    }
    audio_by_frame[alignment[anchor.original_index]].push_back(&anchor);
  }
  for (std::size_t t = 0; t < frames; ++t) {
    if (audio_by_frame[t].size() != audio.per_frame_budget[t]) {
      Fail(ErrorCode::kInvalidInput,
           "frame " + std::to_string(t + 1) +
               " anchor count disagrees with its audio budget");
    }
  }

  CompressedSequence sequence;
  auto& tokens = sequence.tokens;
  std::size_t next_selected = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (const AudioAnchor* anchor : audio_by_frame[t]) {
      tokens.push_back(
          {Modality::kAudio, t, anchor->original_index, anchor->feature});
    }
    if (next_selected >= visual.selected_frames.size() ||
        visual.selected_frames[next_selected] != t) {
      continue;
    }
    const SelectedFrame& frame = visual.frame_memories[next_selected++];
    const std::size_t first = tokens.size();
    for (std::size_t j = 0; j < frame.kept_positions.size(); ++j) {
      tokens.push_back({Modality::kVideo, t, frame.kept_positions[j],
                        frame.kept_tokens[j]});
    }
    if (frame.memory) {
      tokens.push_back({Modality::kVideoMemory, t, frame.memory->slot,
                        frame.memory->feature});
    }
    std::stable_sort(tokens.begin() + first, tokens.end(),
                     [](const CompressedToken& a, const CompressedToken& b) {
                       return a.index < b.index;
                     });
  }

  auto& stats = sequence.stats;
  stats.original_video_tokens = frames * positions;
  stats.original_audio_tokens = alignment.size();
  stats.retained_video = visual.retained_total();
  stats.retained_audio = audio.anchors.size();
  stats.discarded_zero_budget_audio = audio.discarded_zero_budget;
  const std::size_t original =
      stats.original_video_tokens + stats.original_audio_tokens;
  stats.retained_ratio_overall =
      static_cast<double>(stats.retained_video + stats.retained_audio) /
      static_cast<double>(original);
  return sequence;
}

}  // namespace omac
