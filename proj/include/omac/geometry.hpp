#ifndef OMAC_GEOMETRY_HPP_
#define OMAC_GEOMETRY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace omac {

// Token features are stored as float32 on disk and promoted to double for
// every computation.
using Embedding = std::vector<double>;
using EmbeddingView = std::span<const double>;

// T frames of P tokens each, d-dimensional, frame-major. Frame and position
// indices are zero-based in the C++ API.
class VideoTokenGrid {
 public:
  VideoTokenGrid(std::size_t frames, std::size_t positions, std::size_t dim,
                 std::vector<double> values);

  std::size_t frames() const { return frames_; }
  std::size_t positions() const { return positions_; }
  std::size_t dim() const { return dim_; }
  std::size_t token_count() const { return frames_ * positions_; }

  EmbeddingView token(std::size_t frame, std::size_t position) const;
  std::vector<EmbeddingView> frame(std::size_t frame) const;
  std::span<const double> values() const { return values_; }

 private:
  std::size_t frames_;
  std::size_t positions_;
  std::size_t dim_;
  std::vector<double> values_;
};

// N_a audio tokens in temporal order, each aligned to a zero-based frame.
class AudioTokenStream {
 public:
  AudioTokenStream(std::size_t dim, std::vector<double> values,
                   std::vector<std::size_t> alignment);

  std::size_t count() const { return alignment_.size(); }
  std::size_t dim() const { return dim_; }
  EmbeddingView token(std::size_t index) const;
  std::span<const std::size_t> alignment() const { return alignment_; }
  std::span<const double> values() const { return values_; }

  // Number of tokens aligned to each of `frames` frames. Throws if any
  // alignment entry falls outside [0, frames).
  std::vector<std::size_t> TokensPerFrame(std::size_t frames) const;

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<std::size_t> alignment_;
};

enum class GuidanceMode { kAudioGuided, kVisualGuided, kFullOmac };

std::string_view ToString(GuidanceMode mode);
GuidanceMode ParseGuidanceMode(std::string_view name);

struct CompressionConfig {
  double retain_video = 0.3;
  double retain_audio = 0.3;
  std::size_t coverage_bins = 4;
  // Explicit tokens kept per selected frame, on top of the memory token.
  // Unset means "derive from retain_video" (see EffectiveTokensPerFrame).
  std::optional<std::size_t> tokens_per_selected_frame;
  GuidanceMode guidance_mode = GuidanceMode::kFullOmac;
  double unselected_frame_weight = 1.0;

  void Validate() const;
};

// round(x) with halves going up, e.g. 2.5 -> 3.
std::size_t RoundHalfUp(double x);

// Returns 0 when either vector has zero norm.
double Cosine(EmbeddingView u, EmbeddingView v);

Embedding MeanPool(std::span<const EmbeddingView> tokens);
Embedding MeanPool(const std::vector<Embedding>& tokens);

// Max-subtracted exponential normalization.
std::vector<double> SoftmaxWeights(std::span<const double> scores);

bool AllFinite(std::span<const double> values);

}  // namespace omac

#endif  // OMAC_GEOMETRY_HPP_
