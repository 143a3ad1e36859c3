#include "omac/visual_memory.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "omac/error.hpp"

namespace omac {
namespace {

// True when (score_a, a) ranks ahead of (score_b, b).
bool RanksAhead(double score_a, std::size_t a, double score_b, std::size_t b) {
  return score_a > score_b || (score_a == score_b && a < b);
}

}  // namespace

std::size_t VisualCompressionResult::retained_total() const {
  return std::accumulate(retained_per_frame.begin(), retained_per_frame.end(),
                         std::size_t{0});
}

std::vector<Embedding> FrameSummaries(const VideoTokenGrid& grid) {
  std::vector<Embedding> summaries;
  summaries.reserve(grid.frames());
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    const auto tokens = grid.frame(t);
    summaries.push_back(MeanPool(std::span<const EmbeddingView>(tokens)));
  }
  return summaries;
}

std::vector<FrameScore> ScoreFrames(std::span<const Embedding> summaries,
                                    EmbeddingView query) {
  std::vector<FrameScore> scores;
  scores.reserve(summaries.size());
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    scores.push_back({t, Cosine(summaries[t], query)});
  }
  return scores;
}

std::size_t KeyFrameCount(std::size_t frames, double retain_video) {
  const std::size_t k = RoundHalfUp(retain_video * static_cast<double>(frames));
  return std::clamp<std::size_t>(k, 1, frames);
}

std::vector<std::size_t> SelectKeyFrames(std::span<const FrameScore> scores,
                                         double retain_video,
                                         std::size_t coverage_bins) {
  const std::size_t frames = scores.size();
  if (frames == 0) Fail(ErrorCode::kInvalidInput, "no frames to select from");
  if (!(retain_video > 0.0 && retain_video <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "retain_video must lie in (0, 1]");
  }
  if (coverage_bins == 0 || coverage_bins > frames) {
    Fail(ErrorCode::kInvalidInput,
         "coverage_bins must lie in [1, T]; got " +
             std::to_string(coverage_bins) + " for T = " +
             std::to_string(frames));
  }
  const std::size_t budget = KeyFrameCount(frames, retain_video);
  const auto ahead = [&](std::size_t a, std::size_t b) {
    return RanksAhead(scores[a].score, a, scores[b].score, b);
  };

  const std::size_t bin_size = (frames + coverage_bins - 1) / coverage_bins;
  std::vector<std::size_t> leaders;
  for (std::size_t begin = 0; begin < frames; begin += bin_size) {
    const std::size_t end = std::min(begin + bin_size, frames);
    std::size_t best = begin;
    for (std::size_t t = begin + 1; t < end; ++t) {
      if (ahead(t, best)) best = t;
    }
    leaders.push_back(best);
  }

  std::vector<bool> taken(frames, false);
  std::vector<std::size_t> selected;
  if (budget < leaders.size()) {
    std::sort(leaders.begin(), leaders.end(), ahead);
    leaders.resize(budget);
  }
  for (std::size_t t : leaders) {
    taken[t] = true;
    selected.push_back(t);
  }

  std::vector<std::size_t> rest;
  for (std::size_t t = 0; t < frames; ++t) {
    if (!taken[t]) rest.push_back(t);
  }
  const std::size_t fill = budget - selected.size();
  std::partial_sort(rest.begin(), rest.begin() + fill, rest.end(), ahead);
  selected.insert(selected.end(), rest.begin(), rest.begin() + fill);
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<double> ContrastScores(
    std::span<const EmbeddingView> frame_tokens) {
  const Embedding centroid = MeanPool(frame_tokens);
  std::vector<double> alpha;
  alpha.reserve(frame_tokens.size());
  for (const auto& token : frame_tokens) {
    alpha.push_back(1.0 - Cosine(token, centroid));
  }
  return alpha;
}

std::vector<double> NormalizeContrast(std::span<const double> alpha) {
  if (alpha.empty()) Fail(ErrorCode::kInvalidInput, "no contrast scores");
  const auto [lo, hi] = std::minmax_element(alpha.begin(), alpha.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> normalized(alpha.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      normalized[i] = (alpha[i] - min) / range;
    }
  }
  return normalized;
}

std::vector<std::size_t> SelectFrameTokens(std::span<const double> alpha_hat,
                                           std::size_t k) {
  if (k == 0 || k > alpha_hat.size()) {
    Fail(ErrorCode::kInvalidInput,
         "cannot keep " + std::to_string(k) + " of " +
             std::to_string(alpha_hat.size()) + " tokens");
  }
  std::vector<std::size_t> order(alpha_hat.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return RanksAhead(alpha_hat[a], a, alpha_hat[b], b);
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Embedding FrameMemoryToken(std::span<const EmbeddingView> frame_tokens,
                           std::span<const std::size_t> kept,
                           std::span<const double> alpha_hat) {
  if (kept.empty()) {
    Fail(ErrorCode::kInvalidInput, "frame memory token needs kept tokens");
  }
  std::vector<double> kept_scores;
  kept_scores.reserve(kept.size());
  for (std::size_t p : kept) {
    if (p >= frame_tokens.size() || p >= alpha_hat.size()) {
      Fail(ErrorCode::kInvalidInput,
           "kept position " + std::to_string(p) + " out of range");
    }
    kept_scores.push_back(alpha_hat[p]);
  }
  const auto weights = SoftmaxWeights(kept_scores);
  Embedding memory(frame_tokens[kept.front()].size(), 0.0);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto token = frame_tokens[kept[j]];
    for (std::size_t i = 0; i < memory.size(); ++i) {
      memory[i] += weights[j] * token[i];
    }
  }
  return memory;
}

std::size_t EffectiveTokensPerFrame(const CompressionConfig& config,
                                    std::size_t frames,
                                    std::size_t positions) {
  if (positions <= 1) return positions;
  if (config.tokens_per_selected_frame) {
    return std::min(*config.tokens_per_selected_frame, positions - 1);
  }
  const double target = config.retain_video * static_cast<double>(frames) *
                        static_cast<double>(positions);
  const double key_frames =
      static_cast<double>(KeyFrameCount(frames, config.retain_video));
  const std::size_t per_frame = RoundHalfUp(target / key_frames);
  return std::clamp<std::size_t>(per_frame, 2, positions) - 1;
}

VisualCompressionResult CompressVideo(const VideoTokenGrid& grid,
                                      EmbeddingView query,
                                      const CompressionConfig& config) {
  config.Validate();
  if (query.size() != grid.dim()) {
    Fail(ErrorCode::kInvalidInput, "query dimension does not match the grid");
  }
  VisualCompressionResult result;
  result.frames = grid.frames();
  result.positions_per_frame = grid.positions();

  const auto summaries = FrameSummaries(grid);
  result.frame_scores = ScoreFrames(summaries, query);
  const std::size_t bins = std::min(config.coverage_bins, grid.frames());
  result.selected_frames =
      SelectKeyFrames(result.frame_scores, config.retain_video, bins);

  const std::size_t positions = grid.positions();
  const std::size_t keep =
      EffectiveTokensPerFrame(config, grid.frames(), positions);
  result.retained_per_frame.assign(grid.frames(), 0);

  for (std::size_t t : result.selected_frames) {
    const auto tokens = grid.frame(t);
    SelectedFrame frame;
    frame.frame_index = t;
    if (positions == 1) {
      frame.kept_positions = {0};
      frame.kept_tokens.emplace_back(tokens[0].begin(), tokens[0].end());
      result.retained_per_frame[t] = 1;
      result.frame_memories.push_back(std::move(frame));
      continue;
    }
    const auto alpha_hat = NormalizeContrast(ContrastScores(tokens));
    frame.kept_positions = SelectFrameTokens(alpha_hat, keep);
    for (std::size_t p : frame.kept_positions) {
      frame.kept_tokens.emplace_back(tokens[p].begin(), tokens[p].end());
    }
    // The memory token takes the lowest-scoring dropped slot.
    std::optional<std::size_t> slot;
    for (std::size_t p = 0, j = 0; p < positions; ++p) {
      if (j < frame.kept_positions.size() && frame.kept_positions[j] == p) {
        ++j;
        continue;
      }
      if (!slot || alpha_hat[p] < alpha_hat[*slot]) slot = p;
    }
    frame.memory = FrameMemory{
        *slot, FrameMemoryToken(tokens, frame.kept_positions, alpha_hat)};
    result.retained_per_frame[t] = frame.kept_positions.size() + 1;
    result.frame_memories.push_back(std::move(frame));
  }
  return result;
}

}  // namespace omac
