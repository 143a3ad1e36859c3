#include "omac/bundle.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "omac/error.hpp"

namespace omac {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t RequireCount(const json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end() || !it->is_number_unsigned()) {
    Fail(ErrorCode::kParse,
         std::string("manifest field '") + key +
             "' is missing or not a non-negative integer");
  }
  return it->get<std::size_t>();
}

std::string RequireString(const json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end() || !it->is_string()) {
    Fail(ErrorCode::kParse,
         std::string("manifest field '") + key + "' is missing or not a string");
  }
  return it->get<std::string>();
}

std::vector<double> ReadSizedBlob(const fs::path& path, std::size_t expected,
                                  const char* what) {
  if (!fs::exists(path)) {
    Fail(ErrorCode::kMissingFile, "missing " + std::string(what) +
                                      " blob " + path.string());
  }
  const auto bytes = fs::file_size(path);
  if (bytes != expected * sizeof(float)) {
    Fail(ErrorCode::kSizeMismatch,
         path.string() + " holds " + std::to_string(bytes) +
             " bytes, expected " + std::to_string(expected * sizeof(float)));
  }
  auto values = ReadFloatBlob(path);
  if (!AllFinite(values)) {
    Fail(ErrorCode::kNonFinite, path.string() + " contains NaN or Inf");
  }
  return values;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) Fail(ErrorCode::kIo, "failed to write " + path.string());
}

double RequireNumber(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_number()) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": field '" +
                                key + "' is missing or not a number");
  }
  const double value = it->get<double>();
  if (!std::isfinite(value)) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": field '" +
                                key + "' is not finite");
  }
  return value;
}

}  // namespace

std::vector<double> ReadFloatBlob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    Fail(ErrorCode::kSizeMismatch,
         path.string() + " is not a whole number of float32 values");
  }
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const unsigned char* b = &bytes[4 * i];
    const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
                               (std::uint32_t{b[2]} << 16) |
                               (std::uint32_t{b[3]} << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

void WriteFloatBlob(const fs::path& path, std::span<const double> values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int k = 0; k < 4; ++k) {
      bytes[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    }
  }
  WriteText(path, bytes);
}

Bundle LoadBundle(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  std::ifstream in(manifest_path);
  if (!in) {
    Fail(ErrorCode::kMissingFile, "missing manifest " + manifest_path.string());
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, manifest_path.string() + ": " + e.what());
  }
  const std::size_t dim = RequireCount(manifest, "dim");
  const std::size_t frames = RequireCount(manifest, "frames");
  const std::size_t positions = RequireCount(manifest, "positions_per_frame");
  const std::size_t audio_tokens = RequireCount(manifest, "audio_tokens");
  if (dim == 0 || frames == 0 || positions == 0) {
    Fail(ErrorCode::kInvalidInput, "bundle needs d, T, P >= 1");
  }
  if (positions > kMaxFrameTokens) {
    Fail(ErrorCode::kInvalidInput,
         "frame of " + std::to_string(positions) + " tokens exceeds the " +
             std::to_string(kMaxFrameTokens) + " token limit");
  }

  const auto alignment_it = manifest.find("alignment");
  if (alignment_it == manifest.end() || !alignment_it->is_array()) {
    Fail(ErrorCode::kParse, "manifest field 'alignment' must be an array");
  }
  if (alignment_it->size() != audio_tokens) {
    Fail(ErrorCode::kAlignmentViolation,
         "alignment lists " + std::to_string(alignment_it->size()) +
             " entries for " + std::to_string(audio_tokens) + " audio tokens");
  }
  std::vector<std::size_t> alignment;
  alignment.reserve(audio_tokens);
  for (const auto& entry : *alignment_it) {
    if (!entry.is_number_unsigned()) {
      Fail(ErrorCode::kAlignmentViolation, "alignment entries must be integers");
    }
    const auto t = entry.get<std::size_t>();
    if (t < 1 || t > frames) {
      Fail(ErrorCode::kAlignmentViolation,
           "alignment entry " + std::to_string(t) + " outside [1, " +
               std::to_string(frames) + "]");
    }
    alignment.push_back(t - 1);
  }

  auto video = ReadSizedBlob(dir / RequireString(manifest, "video"),
                             frames * positions * dim, "video");
  auto audio = ReadSizedBlob(dir / RequireString(manifest, "audio"),
                             audio_tokens * dim, "audio");
  auto query = ReadSizedBlob(dir / RequireString(manifest, "query"), dim,
                             "query");
  return Bundle{VideoTokenGrid(frames, positions, dim, std::move(video)),
                AudioTokenStream(dim, std::move(audio), std::move(alignment)),
                std::move(query)};
}

void SaveBundle(const Bundle& bundle, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  json alignment = json::array();
  for (std::size_t t : bundle.audio.alignment()) alignment.push_back(t + 1);
  const json manifest = {
      {"dim", bundle.grid.dim()},
      {"frames", bundle.grid.frames()},
      {"positions_per_frame", bundle.grid.positions()},
      {"audio_tokens", bundle.audio.count()},
      {"alignment", alignment},
      {"video", kVideoBlob},
      {"audio", kAudioBlob},
      {"query", kQueryBlob},
  };
  WriteText(dir / kManifestFile, manifest.dump(2) + "\n");
  WriteFloatBlob(dir / kVideoBlob, bundle.grid.values());
  WriteFloatBlob(dir / kAudioBlob, bundle.audio.values());
  WriteFloatBlob(dir / kQueryBlob, bundle.query);
}

std::vector<std::size_t> EvenAlignment(std::size_t frames,
                                       std::size_t audio_tokens) {
  std::vector<std::size_t> alignment;
  alignment.reserve(audio_tokens);
  const std::size_t base = audio_tokens / frames;
  const std::size_t extra = audio_tokens % frames;
  for (std::size_t t = 0; t < frames; ++t) {
    alignment.insert(alignment.end(), base + (t < extra ? 1 : 0), t);
  }
  return alignment;
}

Bundle GenerateSynthetic(const SyntheticOptions& options) {
  if (options.frames == 0 || options.positions == 0 || options.dim == 0) {
    Fail(ErrorCode::kInvalidInput, "synthetic bundle sizes must be positive");
  }
  std::mt19937_64 rng(options.seed);
  // Top 24 bits of each draw, mapped to [-1, 1); exactly representable in
  // float32 so a save/load round trip is lossless.
  const auto draw = [&rng](std::size_t n) {
    std::vector<double> values(n);
    for (double& v : values) {
      v = static_cast<double>(rng() >> 40) * 0x1p-23 - 1.0;
    }
    return values;
  };
  const std::size_t d = options.dim;
  auto video = draw(options.frames * options.positions * d);
  auto audio = draw(options.audio_tokens * d);
  auto query = draw(d);
  return Bundle{
      VideoTokenGrid(options.frames, options.positions, d, std::move(video)),
      AudioTokenStream(d, std::move(audio),
                       EvenAlignment(options.frames, options.audio_tokens)),
      std::move(query)};
}

std::vector<marc::RolloutGroup> ParseRollouts(std::istream& in) {
  std::vector<marc::RolloutGroup> groups;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, "line " + std::to_string(number) + ": " + e.what());
    }
    const auto it = record.is_object() ? record.find("rollouts") : record.end();
    if (it == record.end() || !it->is_array()) {
      Fail(ErrorCode::kParse, "line " + std::to_string(number) +
                                  ": expected an object with a 'rollouts' array");
    }
    marc::RolloutGroup group;
    for (const auto& r : *it) {
      if (!r.is_object()) {
        Fail(ErrorCode::kParse, "line " + std::to_string(number) +
                                    ": each rollout must be an object");
      }
      group.rollouts.push_back({RequireNumber(r, "reward_full", number),
                                RequireNumber(r, "reward_comp", number),
                                RequireNumber(r, "logprob_new", number),
                                RequireNumber(r, "logprob_old", number),
                                RequireNumber(r, "logprob_ref", number)});
    }
    if (group.rollouts.size() < 2) {
      Fail(ErrorCode::kParse, "line " + std::to_string(number) +
                                  ": a group needs at least 2 rollouts");
    }
    groups.push_back(std::move(group));
  }
  if (groups.empty()) Fail(ErrorCode::kParse, "rollout file holds no groups");
  return groups;
}

std::vector<marc::RolloutGroup> LoadRollouts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return ParseRollouts(in);
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace omac
