#ifndef OMAC_VISUAL_MEMORY_HPP_
#define OMAC_VISUAL_MEMORY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "omac/geometry.hpp"

namespace omac {

struct FrameScore {
  std::size_t frame_index;  // zero-based
  double score;             // cosine of the frame summary with the query
};

// The pooled summary z_t and the dropped position whose slot it occupies.
struct FrameMemory {
  std::size_t slot;
  Embedding feature;
};

struct SelectedFrame {
  std::size_t frame_index;
  // Strictly increasing positions of the explicitly kept tokens.
  std::vector<std::size_t> kept_positions;
  std::vector<Embedding> kept_tokens;
  // Absent only when the frame has a single position.
  std::optional<FrameMemory> memory;
};

struct VisualCompressionResult {
  std::size_t frames = 0;
  std::size_t positions_per_frame = 0;
  std::vector<FrameScore> frame_scores;
  // Ascending.
  std::vector<std::size_t> selected_frames;
  // One entry per selected frame, same order as selected_frames.
  std::vector<SelectedFrame> frame_memories;
  // Kept tokens plus memory token for selected frames, 0 elsewhere.
  std::vector<std::size_t> retained_per_frame;

  std::size_t retained_total() const;
};

std::vector<Embedding> FrameSummaries(const VideoTokenGrid& grid);

std::vector<FrameScore> ScoreFrames(std::span<const Embedding> summaries,
                                    EmbeddingView query);

// Number of key frames kept for T frames: max(1, round(retain * T)).
std::size_t KeyFrameCount(std::size_t frames, double retain_video);

// Frames are split into contiguous bins of ceil(T / coverage_bins) frames.
// Each non-empty bin contributes its best frame first; the remaining budget
// goes to the best unselected frames overall. When the budget is smaller than
// the number of non-empty bins, the best bin leaders win. Ties favour the
// earlier frame everywhere.
std::vector<std::size_t> SelectKeyFrames(std::span<const FrameScore> scores,
                                         double retain_video,
                                         std::size_t coverage_bins);

// 1 - cos(token, centroid) for every token of one frame.
std::vector<double> ContrastScores(std::span<const EmbeddingView> frame_tokens);

// Min-max to [0, 1]; a constant input maps to all zeros.
std::vector<double> NormalizeContrast(std::span<const double> alpha);

// Positions of the k largest scores (ties to the smaller position), ascending.
std::vector<std::size_t> SelectFrameTokens(std::span<const double> alpha_hat,
                                           std::size_t k);

// Softmax(alpha_hat restricted to kept) weighted sum of the kept tokens.
Embedding FrameMemoryToken(std::span<const EmbeddingView> frame_tokens,
                           std::span<const std::size_t> kept,
                           std::span<const double> alpha_hat);

// Explicit tokens kept per selected frame. An explicit config value is capped
// at P - 1; otherwise the count is derived so that selected frames together
// carry round(retain_video * T * P) items including their memory tokens.
std::size_t EffectiveTokensPerFrame(const CompressionConfig& config,
                                    std::size_t frames, std::size_t positions);

VisualCompressionResult CompressVideo(const VideoTokenGrid& grid,
                                      EmbeddingView query,
                                      const CompressionConfig& config);

}  // namespace omac

#endif  // OMAC_VISUAL_MEMORY_HPP_
