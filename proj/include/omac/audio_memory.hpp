#ifndef OMAC_AUDIO_MEMORY_HPP_
#define OMAC_AUDIO_MEMORY_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "omac/geometry.hpp"
#include "omac/visual_memory.hpp"

namespace omac {

struct AudioAnchor {
  std::size_t original_index;
  // Anchor feature after merging its group.
  Embedding feature;
  // Dropped tokens folded into this anchor, ascending, with their weights.
  std::vector<std::size_t> merged_from;
  std::vector<double> merge_weights;
};

struct AudioCompressionResult {
  // Ordered by original_index.
  std::vector<AudioAnchor> anchors;
  std::vector<std::size_t> per_frame_budget;
  std::size_t total_budget = 0;
  // Dropped tokens of zero-budget frames; these are not merged anywhere.
  std::size_t discarded_zero_budget = 0;
  // Set when every n_t * w_t was zero and budgets fell back to n_t alone.
  bool used_fallback_weights = false;
};

struct BudgetAllocation {
  std::vector<std::size_t> budgets;
  bool used_fallback_weights = false;
};

struct WeightedToken {
  EmbeddingView token;
  double weight;
};

// l_i = cos(a_i, q).
std::vector<double> AudioImportance(const AudioTokenStream& stream,
                                    EmbeddingView query);

// Retained visual items for selected frames, epsilon_w for the others.
std::vector<double> VisualWeights(const VisualCompressionResult& visual,
                                  double epsilon_w);

// Per-frame weights the audio budget is spread with under each guidance mode.
std::vector<double> GuidanceWeights(const VisualCompressionResult& visual,
                                    const CompressionConfig& config);

// Real-valued targets total * n_t w_t / sum(n w), or proportional to n_t when
// every n_t w_t is zero.
std::vector<double> BudgetTargets(std::span<const std::size_t> counts,
                                  std::span<const double> weights,
                                  std::size_t total);

// Apportions `total` units over frames in proportion to n_t * w_t.
//
// Each frame first receives floor of its real-valued target, capped at n_t.
// Leftover units go one each to the uncapped frames in order of decreasing
// fractional remainder, then to the frames with the most spare capacity.
// Ties always favour the earlier frame. If every n_t * w_t is zero the
// targets are taken proportional to n_t and the fallback flag is raised.
BudgetAllocation AllocateBudget(std::span<const std::size_t> counts,
                                std::span<const double> weights,
                                std::size_t total);

// Within each frame's segment, the budget-many most important tokens (ties to
// the smaller index). Returned per frame, ascending stream indices.
std::vector<std::vector<std::size_t>> SelectAnchorsPerFrame(
    const AudioTokenStream& stream, std::span<const double> importance,
    std::span<const std::size_t> budgets);

// max(0, cos(dropped, anchor)).
double MergeWeight(EmbeddingView dropped, EmbeddingView anchor);

// (a_j + sum w_i a_i) / (1 + sum w_i).
Embedding MergeAnchor(EmbeddingView anchor,
                      std::span<const WeightedToken> group);

AudioCompressionResult CompressAudio(const AudioTokenStream& stream,
                                     std::span<const double> importance,
                                     const VisualCompressionResult& visual,
                                     const CompressionConfig& config);

}  // namespace omac

#endif  // OMAC_AUDIO_MEMORY_HPP_
