#include "omac/audio_memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "omac/error.hpp"

namespace omac {
namespace {

bool MassIsZero(std::span<const std::size_t> counts,
                std::span<const double> weights) {
  for (std::size_t t = 0; t < counts.size(); ++t) {
    if (static_cast<double>(counts[t]) * weights[t] != 0.0) return false;
  }
  return true;
}

}  // namespace

std::vector<double> AudioImportance(const AudioTokenStream& stream,
                                    EmbeddingView query) {
  if (stream.dim() != query.size()) {
    Fail(ErrorCode::kInvalidInput, "query dimension does not match audio");
  }
  std::vector<double> importance(stream.count());
  for (std::size_t i = 0; i < stream.count(); ++i) {
    importance[i] = Cosine(stream.token(i), query);
  }
  return importance;
}

std::vector<double> VisualWeights(const VisualCompressionResult& visual,
                                  double epsilon_w) {
  std::vector<double> weights(visual.retained_per_frame.size(), epsilon_w);
  for (std::size_t t : visual.selected_frames) {
    weights[t] = static_cast<double>(visual.retained_per_frame[t]);
  }
  return weights;
}

std::vector<double> GuidanceWeights(const VisualCompressionResult& visual,
                                    const CompressionConfig& config) {
  switch (config.guidance_mode) {
    case GuidanceMode::kAudioGuided:
      return std::vector<double>(visual.frames, 1.0);
    case GuidanceMode::kVisualGuided: {
      std::vector<double> weights;
      weights.reserve(visual.frame_scores.size());
      for (const auto& s : visual.frame_scores) {
        weights.push_back(std::max(0.0, s.score));
      }
      return weights;
    }
    case GuidanceMode::kFullOmac:
      break;
  }
  return VisualWeights(visual, config.unselected_frame_weight);
}

std::vector<double> BudgetTargets(std::span<const std::size_t> counts,
                                  std::span<const double> weights,
                                  std::size_t total) {
  if (weights.size() != counts.size()) {
    Fail(ErrorCode::kInvalidInput, "budget counts and weights differ in size");
  }
  const bool fallback = MassIsZero(counts, weights);
  std::vector<double> mass(counts.size());
  double mass_total = 0.0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    mass[t] = static_cast<double>(counts[t]) * (fallback ? 1.0 : weights[t]);
    mass_total += mass[t];
  }
  std::vector<double> targets(counts.size(), 0.0);
  if (mass_total == 0.0) return targets;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    targets[t] = static_cast<double>(total) * mass[t] / mass_total;
  }
  return targets;
}

BudgetAllocation AllocateBudget(std::span<const std::size_t> counts,
                                std::span<const double> weights,
                                std::size_t total) {
  const std::size_t frames = counts.size();
  if (weights.size() != frames) {
    Fail(ErrorCode::kInvalidInput, "budget counts and weights differ in size");
  }
  const std::size_t available =
      std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0 || total > available) {
    Fail(ErrorCode::kInvalidInput,
         "audio budget " + std::to_string(total) + " outside [1, " +
             std::to_string(available) + "]");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      Fail(ErrorCode::kInvalidInput, "budget weights must be finite and >= 0");
    }
  }

  BudgetAllocation result;
  const auto targets = BudgetTargets(counts, weights, total);
  result.used_fallback_weights = MassIsZero(counts, weights);

  auto& budgets = result.budgets;
  budgets.assign(frames, 0);
  std::vector<double> remainder(frames, 0.0);
  std::vector<bool> capped(frames, false);
  std::size_t assigned = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    const double target = targets[t];
    const double whole = std::floor(target);
    remainder[t] = target - whole;
    if (whole >= static_cast<double>(counts[t])) {
      budgets[t] = counts[t];
      capped[t] = true;
    } else {
      budgets[t] = static_cast<std::size_t>(whole);
    }
    assigned += budgets[t];
  }

  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < frames; ++t) {
    if (!capped[t]) order.push_back(t);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return remainder[a] > remainder[b];
                   });
  for (std::size_t t : order) {
    if (assigned == total) break;
    ++budgets[t];
    ++assigned;
  }

  while (assigned < total) {
    std::size_t best = frames;
    for (std::size_t t = 0; t < frames; ++t) {
      if (budgets[t] < counts[t] &&
          (best == frames ||
           counts[t] - budgets[t] > counts[best] - budgets[best])) {
        best = t;
      }
    }
    ++budgets[best];
    ++assigned;
  }
  return result;
}

std::vector<std::vector<std::size_t>> SelectAnchorsPerFrame(
    const AudioTokenStream& stream, std::span<const double> importance,
    std::span<const std::size_t> budgets) {
  if (importance.size() != stream.count()) {
    Fail(ErrorCode::kInvalidInput, "one importance score per audio token");
  }
  const std::size_t frames = budgets.size();
  const auto counts = stream.TokensPerFrame(frames);
  std::vector<std::vector<std::size_t>> anchors(frames);
  std::size_t begin = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (budgets[t] > counts[t]) {
      Fail(ErrorCode::kInvalidInput,
           "frame " + std::to_string(t + 1) + " budget exceeds its tokens");
    }
    std::vector<std::size_t> segment(counts[t]);
    std::iota(segment.begin(), segment.end(), begin);
    begin += counts[t];
    std::partial_sort(segment.begin(), segment.begin() + budgets[t],
                      segment.end(), [&](std::size_t a, std::size_t b) {
                        return importance[a] > importance[b] ||
                               (importance[a] == importance[b] && a < b);
                      });
    segment.resize(budgets[t]);
    std::sort(segment.begin(), segment.end());
    anchors[t] = std::move(segment);
  }
  return anchors;
}

double MergeWeight(EmbeddingView dropped, EmbeddingView anchor) {
  return std::max(0.0, Cosine(dropped, anchor));
}

Embedding MergeAnchor(EmbeddingView anchor,
                      std::span<const WeightedToken> group) {
  Embedding merged(anchor.begin(), anchor.end());
  double norm = 1.0;
  for (const auto& member : group) {
    if (member.token.size() != anchor.size()) {
      Fail(ErrorCode::kInvalidInput, "merged token dimension mismatch");
    }
    if (!(member.weight >= 0.0)) {
      Fail(ErrorCode::kInvalidInput, "merge weights must be non-negative");
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
      merged[i] += member.weight * member.token[i];
    }
    norm += member.weight;
  }
  for (double& x : merged) x /= norm;
  return merged;
}

AudioCompressionResult CompressAudio(const AudioTokenStream& stream,
                                     std::span<const double> importance,
                                     const VisualCompressionResult& visual,
                                     const CompressionConfig& config) {
  config.Validate();
  AudioCompressionResult result;
  const std::size_t frames = visual.frames;
  const auto counts = stream.TokensPerFrame(frames);
  result.per_frame_budget.assign(frames, 0);
  if (stream.count() == 0) return result;

  result.total_budget = std::max<std::size_t>(
      1, RoundHalfUp(config.retain_audio * static_cast<double>(stream.count())));
  result.total_budget = std::min(result.total_budget, stream.count());
  auto allocation = AllocateBudget(counts, GuidanceWeights(visual, config),
                                   result.total_budget);
  result.used_fallback_weights = allocation.used_fallback_weights;
  result.per_frame_budget = std::move(allocation.budgets);

  const auto per_frame =
      SelectAnchorsPerFrame(stream, importance, result.per_frame_budget);
  // Alignment is non-decreasing, so each frame's tokens form one run.
  std::size_t begin = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t end = begin + counts[t];
    const auto& anchors = per_frame[t];
    if (anchors.empty()) {
      result.discarded_zero_budget += counts[t];
      begin = end;
      continue;
    }
    // Assign each dropped token to the anchor nearest by index; on equal
    // distance the earlier anchor wins.
    std::vector<std::vector<std::size_t>> groups(anchors.size());
    std::size_t next = 0;
    for (std::size_t i = begin; i < end; ++i) {
      while (next < anchors.size() && anchors[next] < i) ++next;
      if (next < anchors.size() && anchors[next] == i) continue;
      std::size_t owner;
      if (next == 0) {
        owner = 0;
      } else if (next == anchors.size()) {
        owner = anchors.size() - 1;
      } else {
        owner = (i - anchors[next - 1] <= anchors[next] - i) ? next - 1 : next;
      }
      groups[owner].push_back(i);
    }
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      AudioAnchor anchor;
      anchor.original_index = anchors[j];
      const auto anchor_token = stream.token(anchors[j]);
      std::vector<WeightedToken> group;
      for (std::size_t i : groups[j]) {
        const double w = MergeWeight(stream.token(i), anchor_token);
        group.push_back({stream.token(i), w});
        anchor.merged_from.push_back(i);
        anchor.merge_weights.push_back(w);
      }
      anchor.feature = MergeAnchor(anchor_token, group);
      result.anchors.push_back(std::move(anchor));
    }
    begin = end;
  }
  return result;
}

}  // namespace omac
