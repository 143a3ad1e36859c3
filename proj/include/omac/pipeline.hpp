#ifndef OMAC_PIPELINE_HPP_
#define OMAC_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "omac/audio_memory.hpp"
#include "omac/bundle.hpp"
#include "omac/geometry.hpp"
#include "omac/marc.hpp"
#include "omac/sequence.hpp"
#include "omac/visual_memory.hpp"

namespace omac {

struct CompressionReport {
  SequenceStats stats;
  double compression_ratio = 0.0;
  std::vector<std::size_t> per_frame_budgets;
  // Zero-based here; serialized one-based.
  std::vector<std::size_t> selected_frames;
  std::size_t tokens_per_selected_frame = 0;
  std::size_t total_audio_budget = 0;
  bool used_fallback_weights = false;
  double wall_time_ms = 0.0;
  CompressionConfig config;
};

struct PipelineOutput {
  VisualCompressionResult visual;
  AudioCompressionResult audio;
  CompressedSequence sequence;
  CompressionReport report;
};

// Video compression, audio budgeting and assembly. Only this is timed.
PipelineOutput Compress(const Bundle& bundle, const CompressionConfig& config);

// JSON text with sorted keys. `include_timing` false drops wall_time_ms.
std::string FormatReport(const CompressionReport& report,
                         bool include_timing = true);

void SaveCompressed(const CompressedSequence& sequence,
                    const CompressionReport& report,
                    const std::filesystem::path& dir);
CompressedSequence LoadCompressed(const std::filesystem::path& dir);

std::string FormatMarcReport(const std::vector<marc::RolloutGroup>& groups,
                             const marc::MarcConfig& config);

}  // namespace omac

#endif  // OMAC_PIPELINE_HPP_
