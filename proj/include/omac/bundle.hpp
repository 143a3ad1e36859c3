#ifndef OMAC_BUNDLE_HPP_
#define OMAC_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "omac/geometry.hpp"
#include "omac/marc.hpp"
#include "omac/sequence.hpp"

namespace omac {

// On-disk layout of a bundle directory. The manifest is JSON; blobs are raw
// little-endian float32. Alignment entries in the manifest are one-based.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kVideoBlob = "video.f32";
inline constexpr const char* kAudioBlob = "audio.f32";
inline constexpr const char* kQueryBlob = "query.f32";

// Compressed output directory.
inline constexpr const char* kSequenceFile = "sequence.json";
inline constexpr const char* kFeaturesBlob = "features.f32";
inline constexpr const char* kReportFile = "report.json";

// Largest accepted tokens-per-frame count.
inline constexpr std::size_t kMaxFrameTokens = 50174;

struct Bundle {
  VideoTokenGrid grid;
  AudioTokenStream audio;
  Embedding query;
};

Bundle LoadBundle(const std::filesystem::path& dir);
void SaveBundle(const Bundle& bundle, const std::filesystem::path& dir);

// Float32 blob helpers. Values are narrowed to float on write.
std::vector<double> ReadFloatBlob(const std::filesystem::path& path);
void WriteFloatBlob(const std::filesystem::path& path,
                    std::span<const double> values);

struct SyntheticOptions {
  std::size_t frames = 32;
  std::size_t positions = 196;
  std::size_t dim = 64;
  std::size_t audio_tokens = 800;
  std::uint64_t seed = 0;
};

// Audio tokens spread evenly over frames; earlier frames take the remainder.
// Returned zero-based.
std::vector<std::size_t> EvenAlignment(std::size_t frames,
                                       std::size_t audio_tokens);

// Deterministic features uniform in [-1, 1), already rounded to float32.
Bundle GenerateSynthetic(const SyntheticOptions& options);

std::vector<marc::RolloutGroup> ParseRollouts(std::istream& in);
std::vector<marc::RolloutGroup> LoadRollouts(const std::filesystem::path& path);

}  // namespace omac

#endif  // OMAC_BUNDLE_HPP_
