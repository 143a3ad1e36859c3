#include "omac/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "json.hpp"
#include "omac/error.hpp"

namespace omac {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::size_t> OneBased(const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> out(indices);
  for (auto& i : out) ++i;
  return out;
}

json StatsToJson(const SequenceStats& s) {
  return {
      {"original_video_tokens", s.original_video_tokens},
      {"original_audio_tokens", s.original_audio_tokens},
      {"retained_video", s.retained_video},
      {"retained_audio", s.retained_audio},
      {"retained_ratio_overall", s.retained_ratio_overall},
      {"discarded_zero_budget_audio", s.discarded_zero_budget_audio},
  };
}

void WriteJson(const fs::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << value.dump(2) << "\n";
  if (!out) Fail(ErrorCode::kIo, "failed to write " + path.string());
}

}  // namespace

PipelineOutput Compress(const Bundle& bundle, const CompressionConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();

  PipelineOutput out;
  out.visual = CompressVideo(bundle.grid, bundle.query, config);
  const auto importance = AudioImportance(bundle.audio, bundle.query);
  out.audio = CompressAudio(bundle.audio, importance, out.visual, config);
  out.sequence = Assemble(out.visual, out.audio, bundle.grid.frames(),
                          bundle.grid.positions(), bundle.audio.alignment());

  const auto stop = std::chrono::steady_clock::now();
  auto& report = out.report;
  report.stats = out.sequence.stats;
  report.compression_ratio = 1.0 - report.stats.retained_ratio_overall;
  report.per_frame_budgets = out.audio.per_frame_budget;
  report.selected_frames = out.visual.selected_frames;
  report.tokens_per_selected_frame = EffectiveTokensPerFrame(
      config, bundle.grid.frames(), bundle.grid.positions());
  report.total_audio_budget = out.audio.total_budget;
  report.used_fallback_weights = out.audio.used_fallback_weights;
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  report.config = config;
  return out;
}

std::string FormatReport(const CompressionReport& report, bool include_timing) {
  const auto& c = report.config;
  json config = {
      {"retain_video", c.retain_video},
      {"retain_audio", c.retain_audio},
      {"coverage_bins", c.coverage_bins},
      {"guidance_mode", std::string(ToString(c.guidance_mode))},
      {"epsilon_w", c.unselected_frame_weight},
      {"tokens_per_frame", c.tokens_per_selected_frame
                               ? json(*c.tokens_per_selected_frame)
                               : json(nullptr)},
  };
  json out = StatsToJson(report.stats);
  out["compression_ratio"] = report.compression_ratio;
  out["per_frame_budgets"] = report.per_frame_budgets;
  out["selected_frames"] = OneBased(report.selected_frames);
  out["tokens_per_selected_frame"] = report.tokens_per_selected_frame;
  out["total_audio_budget"] = report.total_audio_budget;
  out["used_fallback_weights"] = report.used_fallback_weights;
  out["guidance_mode"] = std::string(ToString(c.guidance_mode));
  out["config"] = std::move(config);
  if (include_timing) out["wall_time_ms"] = report.wall_time_ms;
  return out.dump(2) + "\n";
}

void SaveCompressed(const CompressedSequence& sequence,
                    const CompressionReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    Fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  const std::size_t dim =
      sequence.tokens.empty() ? 0 : sequence.tokens.front().feature.size();
  json tokens = json::array();
  std::vector<double> features;
  features.reserve(sequence.tokens.size() * dim);
  for (const auto& token : sequence.tokens) {
    tokens.push_back({{"modality", std::string(ToString(token.modality))},
                      {"frame", token.frame + 1},
                      {"index", token.index + 1}});
    features.insert(features.end(), token.feature.begin(), token.feature.end());
  }
  WriteJson(dir / kSequenceFile, {{"dim", dim},
                                  {"count", sequence.tokens.size()},
                                  {"features", kFeaturesBlob},
                                  {"stats", StatsToJson(sequence.stats)},
                                  {"tokens", std::move(tokens)}});
  WriteFloatBlob(dir / kFeaturesBlob, features);
  std::ofstream out(dir / kReportFile, std::ios::binary | std::ios::trunc);
  out << FormatReport(report);
  if (!out) Fail(ErrorCode::kIo, "failed to write " + (dir / kReportFile).string());
}

CompressedSequence LoadCompressed(const fs::path& dir) {
  const fs::path path = dir / kSequenceFile;
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kMissingFile, "missing " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto features = ReadFloatBlob(dir / doc.at("features").get<std::string>());
    const auto& tokens = doc.at("tokens");
    if (features.size() != tokens.size() * dim) {
      Fail(ErrorCode::kSizeMismatch, path.string() + ": feature blob size");
    }
    CompressedSequence sequence;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      const auto name = t.at("modality").get<std::string>();
      Modality modality = name == "audio"   ? Modality::kAudio
                          : name == "video" ? Modality::kVideo
                                            : Modality::kVideoMemory;
      sequence.tokens.push_back(
          {modality, t.at("frame").get<std::size_t>() - 1,
           t.at("index").get<std::size_t>() - 1,
           Embedding(features.begin() + i * dim,
                     features.begin() + (i + 1) * dim)});
    }
    const auto& s = doc.at("stats");
    auto& stats = sequence.stats;
    stats.original_video_tokens = s.at("original_video_tokens");
    stats.original_audio_tokens = s.at("original_audio_tokens");
    stats.retained_video = s.at("retained_video");
    stats.retained_audio = s.at("retained_audio");
    stats.retained_ratio_overall = s.at("retained_ratio_overall");
    stats.discarded_zero_budget_audio = s.at("discarded_zero_budget_audio");
    return sequence;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string FormatMarcReport(const std::vector<marc::RolloutGroup>& groups,
                             const marc::MarcConfig& config) {
  json out_groups = json::array();
  for (const auto& group : groups) {
    const auto result = marc::CgrpoLoss(group, config);
    json rollouts = json::array();
    for (const auto& d : result.rollouts) {
      rollouts.push_back({{"advantage", d.advantage},
                          {"degradation", d.degradation},
                          {"weight", d.weight},
                          {"shaped_advantage", d.shaped_advantage},
                          {"ratio", d.ratio},
                          {"kl", d.kl}});
    }
    out_groups.push_back({{"loss", result.loss}, {"rollouts", rollouts}});
  }
  const json out = {{"config",
                     {{"tau", config.tau},
                      {"lambda", config.lambda_shape},
                      {"epsilon", config.epsilon_clip},
                      {"beta", config.beta_kl}}},
                    {"groups", out_groups}};
  return out.dump(2) + "\n";
}

}  // namespace omac
