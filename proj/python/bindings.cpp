#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "omac/audio_memory.hpp"
#include "omac/bundle.hpp"
#include "omac/error.hpp"
#include "omac/marc.hpp"
#include "omac/pipeline.hpp"
#include "omac/visual_memory.hpp"

namespace py = pybind11;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

std::vector<double> Flat(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

omac::VideoTokenGrid ToGrid(const Array& video) {
  if (video.ndim() != 3) {
    throw py::value_error("video must have shape (frames, positions, dim)");
  }
  return omac::VideoTokenGrid(video.shape(0), video.shape(1), video.shape(2),
                              Flat(video));
}

omac::AudioTokenStream ToStream(const Array& audio,
                                std::vector<std::size_t> alignment,
                                std::size_t dim) {
  if (audio.ndim() != 2 || (audio.shape(0) > 0 && audio.shape(1) != dim)) {
    throw py::value_error("audio must have shape (tokens, dim)");
  }
  return omac::AudioTokenStream(dim, Flat(audio), std::move(alignment));
}

std::vector<omac::EmbeddingView> Rows(const Array& tokens,
                                     std::vector<double>& storage) {
  if (tokens.ndim() != 2) throw py::value_error("expected a 2-D array");
  storage = Flat(tokens);
  const std::size_t dim = tokens.shape(1);
  std::vector<omac::EmbeddingView> rows;
  for (py::ssize_t i = 0; i < tokens.shape(0); ++i) {
    rows.emplace_back(storage.data() + i * dim, dim);
  }
  return rows;
}

Array Matrix(const std::vector<omac::Embedding>& rows, std::size_t dim) {
  Array out({rows.size(), dim});
  auto* data = out.mutable_data();
  for (const auto& row : rows) data = std::copy(row.begin(), row.end(), data);
  return out;
}

py::dict VisualToDict(const omac::VisualCompressionResult& v) {
  py::list frames;
  for (const auto& f : v.frame_memories) {
    py::dict d;
    d["frame_index"] = f.frame_index;
    d["kept_positions"] = f.kept_positions;
    if (f.memory) {
      d["memory_slot"] = f.memory->slot;
      d["memory_token"] = Array(f.memory->feature.size(), f.memory->feature.data());
    } else {
      d["memory_slot"] = py::none();
      d["memory_token"] = py::none();
    }
    frames.append(d);
  }
  std::vector<double> scores;
  for (const auto& s : v.frame_scores) scores.push_back(s.score);
  py::dict out;
  out["frame_scores"] = scores;
  out["selected_frames"] = v.selected_frames;
  out["frames"] = frames;
  out["retained_per_frame"] = v.retained_per_frame;
  return out;
}

py::dict CompressToDict(const omac::PipelineOutput& result, std::size_t dim) {
  const auto& seq = result.sequence;
  std::vector<std::string> modality;
  std::vector<std::size_t> frame, index;
  std::vector<omac::Embedding> features;
  for (const auto& t : seq.tokens) {
    modality.emplace_back(omac::ToString(t.modality));
    frame.push_back(t.frame);
    index.push_back(t.index);
    features.push_back(t.feature);
  }
  py::dict stats;
  stats["original_video_tokens"] = seq.stats.original_video_tokens;
  stats["original_audio_tokens"] = seq.stats.original_audio_tokens;
  stats["retained_video"] = seq.stats.retained_video;
  stats["retained_audio"] = seq.stats.retained_audio;
  stats["retained_ratio_overall"] = seq.stats.retained_ratio_overall;
  stats["discarded_zero_budget_audio"] = seq.stats.discarded_zero_budget_audio;
  py::dict out;
  out["modality"] = modality;
  out["frame"] = frame;
  out["index"] = index;
  out["features"] = Matrix(features, dim);
  out["stats"] = stats;
  out["selected_frames"] = result.visual.selected_frames;
  out["per_frame_budget"] = result.audio.per_frame_budget;
  out["report"] = omac::FormatReport(result.report, /*include_timing=*/false);
  return out;
}

py::dict BundleToDict(const omac::Bundle& b) {
  py::dict out;
  out["video"] = Array({b.grid.frames(), b.grid.positions(), b.grid.dim()},
                       b.grid.values().data());
  out["audio"] = Array({b.audio.count(), b.audio.dim()}, b.audio.values().data());
  out["alignment"] = std::vector<std::size_t>(b.audio.alignment().begin(),
                                              b.audio.alignment().end());
  out["query"] = Array(b.query.size(), b.query.data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_omac, m) {
  m.doc() = "Training-free audiovisual token compression and "
            "compression-aware GRPO advantage shaping.";

  py::register_exception<omac::Error>(m, "OmacError", PyExc_ValueError);

  py::enum_<omac::GuidanceMode>(m, "GuidanceMode")
      .value("AUDIO_GUIDED", omac::GuidanceMode::kAudioGuided)
      .value("VISUAL_GUIDED", omac::GuidanceMode::kVisualGuided)
      .value("FULL_OMAC", omac::GuidanceMode::kFullOmac);

  py::class_<omac::CompressionConfig>(m, "CompressionConfig")
      .def(py::init<>())
      .def_readwrite("retain_video", &omac::CompressionConfig::retain_video)
      .def_readwrite("retain_audio", &omac::CompressionConfig::retain_audio)
      .def_readwrite("coverage_bins", &omac::CompressionConfig::coverage_bins)
      .def_readwrite("tokens_per_selected_frame",
                     &omac::CompressionConfig::tokens_per_selected_frame)
      .def_readwrite("guidance_mode", &omac::CompressionConfig::guidance_mode)
      .def_readwrite("unselected_frame_weight",
                     &omac::CompressionConfig::unselected_frame_weight);

  py::class_<omac::marc::MarcConfig>(m, "MarcConfig")
      .def(py::init<>())
      .def_readwrite("tau", &omac::marc::MarcConfig::tau)
      .def_readwrite("lambda_shape", &omac::marc::MarcConfig::lambda_shape)
      .def_readwrite("epsilon_clip", &omac::marc::MarcConfig::epsilon_clip)
      .def_readwrite("beta_kl", &omac::marc::MarcConfig::beta_kl);

  // Geometry.
  m.def("cosine", [](const Array& u, const Array& v) {
    return omac::Cosine(Flat(u), Flat(v));
  });
  m.def("mean_pool", [](const Array& tokens) {
    std::vector<double> storage;
    const auto rows = Rows(tokens, storage);
    return omac::MeanPool(std::span<const omac::EmbeddingView>(rows));
  });
  m.def("softmax_weights", [](const std::vector<double>& scores) {
    return omac::SoftmaxWeights(scores);
  });

  // Visual memory.
  m.def("frame_summaries", [](const Array& video) {
    const auto grid = ToGrid(video);
    return Matrix(omac::FrameSummaries(grid), grid.dim());
  });
  m.def("frame_scores", [](const Array& summaries, const Array& query) {
    std::vector<double> storage;
    const auto rows = Rows(summaries, storage);
    std::vector<omac::Embedding> owned;
    for (const auto& r : rows) owned.emplace_back(r.begin(), r.end());
    std::vector<double> scores;
    for (const auto& s : omac::ScoreFrames(owned, Flat(query))) {
      scores.push_back(s.score);
    }
    return scores;
  });
  m.def("select_key_frames",
        [](const std::vector<double>& scores, double retain_video,
           std::size_t coverage_bins) {
          std::vector<omac::FrameScore> fs;
          for (std::size_t t = 0; t < scores.size(); ++t) fs.push_back({t, scores[t]});
          return omac::SelectKeyFrames(fs, retain_video, coverage_bins);
        },
        py::arg("scores"), py::arg("retain_video"), py::arg("coverage_bins"));
  m.def("contrast_scores", [](const Array& frame_tokens) {
    std::vector<double> storage;
    const auto rows = Rows(frame_tokens, storage);
    return omac::ContrastScores(rows);
  });
  m.def("normalize_contrast", [](const std::vector<double>& alpha) {
    return omac::NormalizeContrast(alpha);
  });
  m.def("select_frame_tokens", [](const std::vector<double>& alpha_hat,
                                  std::size_t k) {
    return omac::SelectFrameTokens(alpha_hat, k);
  });
  m.def("frame_memory_token",
        [](const Array& frame_tokens, const std::vector<std::size_t>& kept,
           const std::vector<double>& alpha_hat) {
          std::vector<double> storage;
          const auto rows = Rows(frame_tokens, storage);
          return omac::FrameMemoryToken(rows, kept, alpha_hat);
        });
  m.def("compress_video",
        [](const Array& video, const Array& query,
           const omac::CompressionConfig& config) {
          return VisualToDict(omac::CompressVideo(ToGrid(video), Flat(query), config));
        },
        py::arg("video"), py::arg("query"),
        py::arg("config") = omac::CompressionConfig{});

  // Audio memory.
  m.def("allocate_budget",
        [](const std::vector<std::size_t>& counts,
           const std::vector<double>& weights, std::size_t total) {
          const auto a = omac::AllocateBudget(counts, weights, total);
          return py::make_tuple(a.budgets, a.used_fallback_weights);
        });
  m.def("merge_weight", [](const Array& dropped, const Array& anchor) {
    return omac::MergeWeight(Flat(dropped), Flat(anchor));
  });
  m.def("merge_anchor", [](const Array& anchor, const Array& group,
                           const std::vector<double>& weights) {
    std::vector<double> storage;
    const auto rows = Rows(group, storage);
    if (rows.size() != weights.size()) {
      throw py::value_error("one weight per group member");
    }
    std::vector<omac::WeightedToken> members;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      members.push_back({rows[i], weights[i]});
    }
    return omac::MergeAnchor(Flat(anchor), members);
  });

  m.def("compress",
        [](const Array& video, const Array& audio,
           std::vector<std::size_t> alignment, const Array& query,
           const omac::CompressionConfig& config) {
          auto grid = ToGrid(video);
          const std::size_t dim = grid.dim();
          omac::Bundle bundle{std::move(grid),
                              ToStream(audio, std::move(alignment), dim),
                              Flat(query)};
          return CompressToDict(omac::Compress(bundle, config), dim);
        },
        py::arg("video"), py::arg("audio"), py::arg("alignment"),
        py::arg("query"), py::arg("config") = omac::CompressionConfig{},
        "Alignment entries are zero-based frame indices.");

  // Bundles.
  m.def("load_bundle", [](const std::filesystem::path& dir) {
    return BundleToDict(omac::LoadBundle(dir));
  });
  m.def("generate_synthetic",
        [](std::size_t frames, std::size_t positions, std::size_t dim,
           std::size_t audio_tokens, std::uint64_t seed) {
          return BundleToDict(omac::GenerateSynthetic(
              {frames, positions, dim, audio_tokens, seed}));
        },
        py::arg("frames") = 32, py::arg("positions") = 196,
        py::arg("dim") = 64, py::arg("audio_tokens") = 800,
        py::arg("seed") = 0);
  m.def("save_synthetic",
        [](const std::filesystem::path& dir, std::size_t frames,
           std::size_t positions, std::size_t dim, std::size_t audio_tokens,
           std::uint64_t seed) {
          omac::SaveBundle(omac::GenerateSynthetic(
                               {frames, positions, dim, audio_tokens, seed}),
                           dir);
        },
        py::arg("dir"), py::arg("frames") = 32, py::arg("positions") = 196,
        py::arg("dim") = 64, py::arg("audio_tokens") = 800,
        py::arg("seed") = 0);

  // Advantage shaping.
  m.def("degradation", &omac::marc::Degradation, py::arg("reward_full"),
        py::arg("reward_comp"), py::arg("tau"));
  m.def("grpo_advantages", [](const std::vector<double>& rewards) {
    return omac::marc::GrpoAdvantages(rewards);
  });
  m.def("distill_weight", &omac::marc::DistillWeight);
  m.def("shaped_advantage", &omac::marc::ShapedAdvantage);
  m.def("clipped_ratio", &omac::marc::ClippedRatio);
  m.def("kl_estimate", &omac::marc::KlEstimate);
  m.def("cgrpo_loss",
        [](const std::vector<py::dict>& rollouts,
           const omac::marc::MarcConfig& config) {
          omac::marc::RolloutGroup group;
          for (const auto& r : rollouts) {
            group.rollouts.push_back({r["reward_full"].cast<double>(),
                                      r["reward_comp"].cast<double>(),
                                      r["logprob_new"].cast<double>(),
                                      r["logprob_old"].cast<double>(),
                                      r["logprob_ref"].cast<double>()});
          }
          const auto result = omac::marc::CgrpoLoss(group, config);
          py::list diagnostics;
          for (const auto& d : result.rollouts) {
            py::dict row;
            row["advantage"] = d.advantage;
            row["degradation"] = d.degradation;
            row["weight"] = d.weight;
            row["shaped_advantage"] = d.shaped_advantage;
            row["ratio"] = d.ratio;
            row["kl"] = d.kl;
            diagnostics.append(row);
          }
          return py::make_tuple(result.loss, diagnostics);
        },
        py::arg("rollouts"), py::arg("config") = omac::marc::MarcConfig{});
}
