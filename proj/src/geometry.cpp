#include "omac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "omac/error.hpp"

namespace omac {

VideoTokenGrid::VideoTokenGrid(std::size_t frames, std::size_t positions,
                               std::size_t dim, std::vector<double> values)
    : frames_(frames), positions_(positions), dim_(dim),
      values_(std::move(values)) {
  if (frames_ == 0 || positions_ == 0 || dim_ == 0) {
    Fail(ErrorCode::kInvalidInput, "video grid needs T >= 1, P >= 1, d >= 1");
  }
  if (values_.size() != frames_ * positions_ * dim_) {
    Fail(ErrorCode::kSizeMismatch,
         "video grid holds " + std::to_string(values_.size()) +
             " values, expected T*P*d = " +
             std::to_string(frames_ * positions_ * dim_));
  }
}

EmbeddingView VideoTokenGrid::token(std::size_t frame,
                                    std::size_t position) const {
  return EmbeddingView(values_).subspan((frame * positions_ + position) * dim_,
                                        dim_);
}

std::vector<EmbeddingView> VideoTokenGrid::frame(std::size_t frame) const {
  std::vector<EmbeddingView> tokens;
  tokens.reserve(positions_);
  for (std::size_t p = 0; p < positions_; ++p) tokens.push_back(token(frame, p));
  return tokens;
}

AudioTokenStream::AudioTokenStream(std::size_t dim, std::vector<double> values,
                                   std::vector<std::size_t> alignment)
    : dim_(dim), values_(std::move(values)), alignment_(std::move(alignment)) {
  if (dim_ == 0) Fail(ErrorCode::kInvalidInput, "audio stream needs d >= 1");
  if (values_.size() != alignment_.size() * dim_) {
    Fail(ErrorCode::kSizeMismatch,
         "audio stream holds " + std::to_string(values_.size()) +
             " values, expected N_a*d = " +
             std::to_string(alignment_.size() * dim_));
  }
  if (!std::is_sorted(alignment_.begin(), alignment_.end())) {
    Fail(ErrorCode::kAlignmentViolation,
         "audio alignment must be non-decreasing");
  }
}

EmbeddingView AudioTokenStream::token(std::size_t index) const {
  return EmbeddingView(values_).subspan(index * dim_, dim_);
}

std::vector<std::size_t> AudioTokenStream::TokensPerFrame(
    std::size_t frames) const {
  std::vector<std::size_t> counts(frames, 0);
  for (std::size_t t : alignment_) {
    if (t >= frames) {
      Fail(ErrorCode::kAlignmentViolation,
           "audio token aligned to frame " + std::to_string(t + 1) +
               " but the grid has " + std::to_string(frames) + " frames");
    }
    ++counts[t];
  }
  return counts;
}

std::string_view ToString(GuidanceMode mode) {
  switch (mode) {
    case GuidanceMode::kAudioGuided:
      return "audio-guided";
    case GuidanceMode::kVisualGuided:
      return "visual-guided";
    case GuidanceMode::kFullOmac:
      return "full-omac";
  }
  return "full-omac";
}

GuidanceMode ParseGuidanceMode(std::string_view name) {
  if (name == "audio-guided") return GuidanceMode::kAudioGuided;
  if (name == "visual-guided") return GuidanceMode::kVisualGuided;
  if (name == "full-omac") return GuidanceMode::kFullOmac;
  Fail(ErrorCode::kInvalidInput,
       "unknown guidance mode '" + std::string(name) + "'");
}

void CompressionConfig::Validate() const {
  if (!(retain_video > 0.0 && retain_video <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "retain_video must lie in (0, 1]");
  }
  if (!(retain_audio > 0.0 && retain_audio <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "retain_audio must lie in (0, 1]");
  }
  if (coverage_bins == 0) {
    Fail(ErrorCode::kInvalidInput, "coverage_bins must be positive");
  }
  if (tokens_per_selected_frame && *tokens_per_selected_frame == 0) {
    Fail(ErrorCode::kInvalidInput,
         "tokens_per_selected_frame must be positive");
  }
  if (!(unselected_frame_weight >= 0.0) ||
      !std::isfinite(unselected_frame_weight)) {
    Fail(ErrorCode::kInvalidInput,
         "unselected_frame_weight must be finite and non-negative");
  }
}

std::size_t RoundHalfUp(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

double Cosine(EmbeddingView u, EmbeddingView v) {
  if (u.size() != v.size()) {
    Fail(ErrorCode::kInvalidInput,
         "cosine of vectors with dimensions " + std::to_string(u.size()) +
             " and " + std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

Embedding MeanPool(std::span<const EmbeddingView> tokens) {
  if (tokens.empty()) Fail(ErrorCode::kInvalidInput, "mean_pool of nothing");
  const std::size_t dim = tokens.front().size();
  Embedding mean(dim, 0.0);
  for (const auto& token : tokens) {
    if (token.size() != dim) {
      Fail(ErrorCode::kInvalidInput, "mean_pool over mixed dimensions");
    }
    for (std::size_t i = 0; i < dim; ++i) mean[i] += token[i];
  }
  const double n = static_cast<double>(tokens.size());
  for (double& x : mean) x /= n;
  return mean;
}

Embedding MeanPool(const std::vector<Embedding>& tokens) {
  std::vector<EmbeddingView> views(tokens.begin(), tokens.end());
  return MeanPool(std::span<const EmbeddingView>(views));
}

std::vector<double> SoftmaxWeights(std::span<const double> scores) {
  if (scores.empty()) Fail(ErrorCode::kInvalidInput, "softmax of nothing");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> weights(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(scores[i] - top);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

bool AllFinite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace omac
