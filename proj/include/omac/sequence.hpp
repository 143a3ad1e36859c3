#ifndef OMAC_SEQUENCE_HPP_
#define OMAC_SEQUENCE_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "omac/audio_memory.hpp"
#include "omac/geometry.hpp"
#include "omac/visual_memory.hpp"

namespace omac {

enum class Modality { kAudio, kVideo, kVideoMemory };

std::string_view ToString(Modality modality);

struct CompressedToken {
  Modality modality;
  // Frame the token belongs to. For audio this is the aligned frame.
  std::size_t frame;
  // Within-frame position for video tokens, stream index for audio.
  std::size_t index;
  Embedding feature;
};

struct SequenceStats {
  std::size_t original_video_tokens = 0;
  std::size_t original_audio_tokens = 0;
  std::size_t retained_video = 0;
  std::size_t retained_audio = 0;
  double retained_ratio_overall = 0.0;
  std::size_t discarded_zero_budget_audio = 0;
};

struct CompressedSequence {
  std::vector<CompressedToken> tokens;
  SequenceStats stats;
};

// Frame by frame: the frame's audio anchors by stream index, then its video
// items by position (the memory token sits at the slot it replaced).
CompressedSequence Assemble(const VisualCompressionResult& visual,
                            const AudioCompressionResult& audio,
                            std::size_t frames, std::size_t positions,
                            std::span<const std::size_t> alignment);

}  // namespace omac

#endif  // OMAC_SEQUENCE_HPP_
