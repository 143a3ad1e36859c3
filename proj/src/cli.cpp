#include "omac/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "omac/bundle.hpp"
#include "omac/pipeline.hpp"

namespace omac {
namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
      return kExitUsage;
    case ErrorCode::kMissingFile:
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kInvalidInput:
    case ErrorCode::kSizeMismatch:
    case ErrorCode::kNonFinite:
    case ErrorCode::kAlignmentViolation:
    case ErrorCode::kParse:
      return kExitValidation;
  }
  return kExitValidation;
}

namespace {

struct CompressArgs {
  std::vector<std::string> inputs;
  std::string output;
  double retain = 0.3;
  double retain_video = 0.3;
  double retain_audio = 0.3;
  std::size_t coverage_bins = 4;
  std::size_t tokens_per_frame = 0;
  std::string mode = "full-omac";
  double epsilon_w = 1.0;
  unsigned jobs = 1;
};

struct GenerateArgs {
  std::string output;
  SyntheticOptions options;
  std::size_t audio_tokens = 0;
};

struct MarcArgs {
  std::string rollouts;
  std::string output;
  marc::MarcConfig config;
};

// Audio tokens per second of a 16 kHz stream at 640 samples per token,
// sampled alongside video at one frame per second.
constexpr std::size_t kSampleRate = 16000;
constexpr std::size_t kSamplesPerAudioToken = 640;
constexpr std::size_t kAudioTokensPerFrame = kSampleRate / kSamplesPerAudioToken;

int RunGenerate(const GenerateArgs& args, std::ostream& out) {
  SyntheticOptions options = args.options;
  options.audio_tokens = args.audio_tokens != 0
                             ? args.audio_tokens
                             : options.frames * kAudioTokensPerFrame;
  SaveBundle(GenerateSynthetic(options), args.output);
  out << "wrote " << args.output << ": T=" << options.frames
      << " P=" << options.positions << " d=" << options.dim
      << " N_a=" << options.audio_tokens << " seed=" << options.seed << "\n";
  return kExitOk;
}

int CompressOne(const fs::path& input, const fs::path& output,
                const CompressionConfig& config, std::string& summary) {
  const Bundle bundle = LoadBundle(input);
  const auto result = Compress(bundle, config);
  SaveCompressed(result.sequence, result.report, output);
  if (result.report.used_fallback_weights) {
    summary = "warning: " + input.string() +
              ": every frame had zero audio weight; budgets follow token "
              "counts alone\n";
  }
  const auto& s = result.report.stats;
  std::ostringstream line;
  line << input.string() << " -> " << output.string() << ": retained "
       << s.retained_video + s.retained_audio << "/"
       << s.original_video_tokens + s.original_audio_tokens
       << " tokens (video " << s.retained_video << ", audio "
       << s.retained_audio << ", ratio " << s.retained_ratio_overall << ")\n";
  summary += line.str();
  return kExitOk;
}

int RunCompress(const CompressArgs& args, bool retain_given,
                bool tokens_given, std::ostream& out, std::ostream& err) {
  CompressionConfig config;
  config.retain_video = retain_given ? args.retain : args.retain_video;
  config.retain_audio = retain_given ? args.retain : args.retain_audio;
  config.coverage_bins = args.coverage_bins;
  if (tokens_given) config.tokens_per_selected_frame = args.tokens_per_frame;
  config.guidance_mode = ParseGuidanceMode(args.mode);
  config.unselected_frame_weight = args.epsilon_w;
  config.Validate();

  const std::size_t count = args.inputs.size();
  std::vector<fs::path> outputs;
  for (const auto& input : args.inputs) {
    outputs.push_back(count == 1 ? fs::path(args.output)
                                 : fs::path(args.output) /
                                       fs::path(input).filename());
  }

  std::vector<int> codes(count, kExitOk);
  std::vector<std::string> summaries(count), errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        codes[i] = CompressOne(args.inputs[i], outputs[i], config, summaries[i]);
      } catch (const Error& e) {
        codes[i] = ExitCodeFor(e.code());
        errors[i] = args.inputs[i] + ": " + ToString(e.code()) + ": " + e.what();
      } catch (const std::exception& e) {
        codes[i] = kExitIo;
        errors[i] = args.inputs[i] + ": " + e.what();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, args.jobs), count));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t i = 0; i < count; ++i) {
    out << summaries[i];
    if (!errors[i].empty()) err << "error: " << errors[i] << "\n";
    code = std::max(code, codes[i]);
  }
  return code;
}

int RunMarc(const MarcArgs& args, std::ostream& out) {
  args.config.Validate();
  const auto groups = LoadRollouts(args.rollouts);
  const std::string report = FormatMarcReport(groups, args.config);
  if (args.output.empty()) {
    out << report;
  } else {
    std::ofstream file(args.output, std::ios::binary | std::ios::trunc);
    file << report;
    if (!file) Fail(ErrorCode::kIo, "failed to write " + args.output);
  }
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Audiovisual token compression and compression-aware advantage "
               "shaping over token-embedding bundles"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic bundle");
  generate->add_option("--output,-o", gen.output, "Bundle directory")->required();
  generate->add_option("--frames", gen.options.frames)->check(CLI::PositiveNumber);
  generate->add_option("--positions", gen.options.positions)
      ->check(CLI::PositiveNumber);
  generate->add_option("--dim", gen.options.dim)->check(CLI::PositiveNumber);
  generate->add_option("--audio-tokens", gen.audio_tokens,
                       "Defaults to 25 tokens per frame (16 kHz audio)");
  generate->add_option("--seed", gen.options.seed);

  CompressArgs comp;
  auto* compress = app.add_subcommand("compress", "Compress one or more bundles");
  compress->add_option("--input,-i", comp.inputs, "Bundle directories")
      ->required();
  compress->add_option("--output,-o", comp.output,
                       "Output directory (parent directory for several inputs)")
      ->required();
  auto* retain = compress->add_option("--retain", comp.retain,
                                      "Retained fraction for both modalities");
  auto* retain_video = compress->add_option("--retain-video", comp.retain_video);
  auto* retain_audio = compress->add_option("--retain-audio", comp.retain_audio);
  retain->excludes(retain_video)->excludes(retain_audio);
  compress->add_option("--coverage-bins", comp.coverage_bins)
      ->check(CLI::PositiveNumber);
  auto* tokens = compress->add_option("--tokens-per-frame", comp.tokens_per_frame,
                                      "Explicit tokens kept per selected frame")
                     ->check(CLI::PositiveNumber);
  compress->add_option("--mode", comp.mode)
      ->check(CLI::IsMember({"audio-guided", "visual-guided", "full-omac"}));
  compress->add_option("--epsilon-w", comp.epsilon_w,
                       "Audio weight of unselected frames");
  compress->add_option("--jobs,-j", comp.jobs, "Bundles compressed in parallel")
      ->check(CLI::PositiveNumber);

  MarcArgs marc_args;
  auto* marc = app.add_subcommand("marc", "Evaluate shaped advantages and loss");
  marc->add_option("--rollouts", marc_args.rollouts, "JSON-lines rollout file")
      ->required();
  marc->add_option("--tau", marc_args.config.tau);
  marc->add_option("--lambda", marc_args.config.lambda_shape);
  marc->add_option("--epsilon", marc_args.config.epsilon_clip);
  marc->add_option("--beta", marc_args.config.beta_kl);
  marc->add_option("--output,-o", marc_args.output, "Write JSON here, not stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*generate) return RunGenerate(gen, out);
    if (*compress) {
      return RunCompress(comp, retain->count() > 0, tokens->count() > 0, out,
                         err);
    }
    return RunMarc(marc_args, out);
  } catch (const Error& e) {
    err << "error: " << ToString(e.code()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace omac
