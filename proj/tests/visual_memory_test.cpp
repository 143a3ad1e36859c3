#include "omac/visual_memory.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "omac/error.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

namespace omac {
namespace {

using ::omac::testing::MakeGrid;

constexpr double kInvSqrt2 = 0.70710678118654752;

std::vector<FrameScore> Scores(std::vector<double> s) {
  std::vector<FrameScore> out;
  for (std::size_t t = 0; t < s.size(); ++t) out.push_back({t, s[t]});
  return out;
}

TEST(FrameSummariesTest, Examples) {
  EXPECT_EQ(FrameSummaries(MakeGrid({{{1, 0}, {0, 1}}})),
            (std::vector<Embedding>{{0.5, 0.5}}));
  EXPECT_EQ(FrameSummaries(MakeGrid({{{1, 1}, {3, 3}}, {{0, 2}, {4, 2}}})),
            (std::vector<Embedding>{{2, 2}, {2, 2}}));
  const auto same = FrameSummaries(MakeGrid({{{0.5, -1}, {0.5, -1}},
                                             {{0.5, -1}, {0.5, -1}}}));
  for (const auto& s : same) EXPECT_EQ(s, (Embedding{0.5, -1}));
}

TEST(ScoreFramesTest, Examples) {
  const std::vector<Embedding> summaries{{1, 0}, {1, 1}};
  const auto scores = ScoreFrames(summaries, Embedding{1, 0});
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_DOUBLE_EQ(scores[0].score, 1.0);
  EXPECT_NEAR(scores[1].score, kInvSqrt2, 1e-9);
  EXPECT_EQ(scores[1].frame_index, 1u);

  const std::vector<Embedding> orthogonal{{0, 1}, {0, -2}};
  for (const auto& s : ScoreFrames(orthogonal, Embedding{3, 0})) {
    EXPECT_EQ(s.score, 0.0);
  }
  EXPECT_THROW(ScoreFrames(summaries, Embedding{1, 0, 0}), Error);
}

TEST(SelectKeyFramesTest, Examples) {
  EXPECT_EQ(SelectKeyFrames(Scores({0.3, 0.1, 0.2}), 1.0, 2),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(SelectKeyFrames(Scores({0.9, 0.1, 0.2, 0.8}), 0.5, 2),
            (std::vector<std::size_t>{0, 3}));
  // Frame 2 outscores frame 4 globally but bin 2's leader is frame 4.
  EXPECT_EQ(SelectKeyFrames(Scores({0.9, 0.8, 0.1, 0.2}), 0.5, 2),
            (std::vector<std::size_t>{0, 3}));
}

TEST(SelectKeyFramesTest, BudgetBelowBinCountTakesBestLeaders) {
  // Bins {0,1} {2,3} {4,5}; leaders 1, 2, 5; K = round(0.3 * 6) = 2.
  EXPECT_EQ(SelectKeyFrames(Scores({0.1, 0.5, 0.7, 0.2, 0.0, 0.6}), 0.3, 3),
            (std::vector<std::size_t>{2, 5}));
}

TEST(SelectKeyFramesTest, FillsWithGlobalBestAfterLeaders) {
  // Bins {0,1,2} {3,4,5}; leaders 0 and 5, then 1 and 2 (tie -> earlier).
  EXPECT_EQ(SelectKeyFrames(Scores({0.9, 0.5, 0.5, 0.4, 0.1, 0.5}), 0.6, 2),
            (std::vector<std::size_t>{0, 1, 2, 5}));
}

TEST(SelectKeyFramesTest, RejectsTooManyBins) {
  EXPECT_THROW(SelectKeyFrames(Scores({0.1, 0.2}), 0.5, 3), Error);
  EXPECT_THROW(SelectKeyFrames(Scores({0.1, 0.2}), 0.0, 1), Error);
}

TEST(SelectKeyFramesTest, CountMatchesBudget) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int iter = 0; iter < 2000; ++iter) {
    const std::size_t T = 1 + iter % 40;
    std::vector<double> s(T);
    for (auto& x : s) x = std::round(u(rng) * 4) / 4;  // plenty of ties
    const double retain = (1 + iter % 20) / 20.0;
    const std::size_t bins = 1 + iter % T;
    const auto sel = SelectKeyFrames(Scores(s), retain, bins);
    EXPECT_EQ(sel.size(), KeyFrameCount(T, retain));
    EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));
    EXPECT_EQ(std::adjacent_find(sel.begin(), sel.end()), sel.end());
    // Every non-empty bin contributes when the budget allows it.
    const std::size_t size = (T + bins - 1) / bins;
    const std::size_t nonempty = (T + size - 1) / size;
    if (sel.size() >= nonempty) {
      for (std::size_t b = 0; b < nonempty; ++b) {
        EXPECT_TRUE(std::any_of(sel.begin(), sel.end(), [&](std::size_t t) {
          return t / size == b;
        })) << "bin " << b;
      }
    }
  }
}

TEST(ContrastScoresTest, Examples) {
  const Embedding x{0.3, -2.0, 1.0};
  for (double a : ContrastScores(std::vector<EmbeddingView>(4, x))) {
    EXPECT_NEAR(a, 0.0, 1e-12);
  }
  const Embedding e1{1, 0}, e2{0, 1};
  const auto alpha = ContrastScores(std::vector<EmbeddingView>{e1, e2});
  EXPECT_NEAR(alpha[0], 1.0 - kInvSqrt2, 1e-9);
  EXPECT_NEAR(alpha[1], 1.0 - kInvSqrt2, 1e-9);
  EXPECT_EQ(ContrastScores(std::vector<EmbeddingView>{x}),
            (std::vector<double>{0.0}));
}

TEST(NormalizeContrastTest, Examples) {
  EXPECT_EQ(NormalizeContrast(std::vector<double>{0.2, 0.2, 0.2}),
            (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(NormalizeContrast(std::vector<double>{0, 1}),
            (std::vector<double>{0, 1}));
  EXPECT_EQ(NormalizeContrast(std::vector<double>{1, 3, 5}),
            (std::vector<double>{0, 0.5, 1}));
}

TEST(SelectFrameTokensTest, Examples) {
  EXPECT_EQ(SelectFrameTokens(std::vector<double>{0.4, 0.1, 0.9}, 3),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(SelectFrameTokens(std::vector<double>{0.9, 0.1, 0.5}, 2),
            (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(SelectFrameTokens(std::vector<double>{0.5, 0.5, 0.1}, 1),
            (std::vector<std::size_t>{0}));
  EXPECT_THROW(SelectFrameTokens(std::vector<double>{0.5, 0.5}, 3), Error);
  EXPECT_THROW(SelectFrameTokens(std::vector<double>{0.5, 0.5}, 0), Error);
}

TEST(FrameMemoryTokenTest, Examples) {
  const Embedding a{1, 0}, b{0, 1}, c{5, 5};
  const std::vector<EmbeddingView> frame{a, b, c};
  const std::vector<double> hat{0.0, std::log(3.0), 0.7};

  EXPECT_EQ(FrameMemoryToken(frame, std::vector<std::size_t>{2}, hat), c);
  const auto mean = FrameMemoryToken(frame, std::vector<std::size_t>{0, 1},
                                     std::vector<double>{0.3, 0.3, 0.0});
  EXPECT_NEAR(mean[0], 0.5, 1e-12);
  EXPECT_NEAR(mean[1], 0.5, 1e-12);
  const auto z = FrameMemoryToken(frame, std::vector<std::size_t>{0, 1}, hat);
  EXPECT_NEAR(z[0], 0.25, 1e-12);
  EXPECT_NEAR(z[1], 0.75, 1e-12);
  EXPECT_THROW(FrameMemoryToken(frame, std::vector<std::size_t>{}, hat), Error);
}

TEST(CompressVideoTest, FullBudgetSingleFrame) {
  const auto grid = MakeGrid({{{1, 0}, {0, 1}, {1, 1}, {2, -1}}});
  CompressionConfig config;
  config.retain_video = 1.0;
  config.tokens_per_selected_frame = 3;
  const auto r = CompressVideo(grid, Embedding{1, 0}, config);
  ASSERT_EQ(r.selected_frames, (std::vector<std::size_t>{0}));
  EXPECT_EQ(r.frame_memories[0].kept_positions.size(), 3u);
  ASSERT_TRUE(r.frame_memories[0].memory.has_value());
  EXPECT_EQ(r.retained_per_frame, (std::vector<std::size_t>{4}));
}

TEST(CompressVideoTest, HalfOfFourFrames) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<oracle::Tokens> video(4, oracle::Tokens(4, oracle::Vec(3)));
  for (auto& f : video)
    for (auto& t : f)
      for (auto& x : t) x = u(rng);
  for (std::size_t k = 1; k <= 3; ++k) {
    CompressionConfig config;
    config.retain_video = 0.5;
    config.coverage_bins = 2;
    config.tokens_per_selected_frame = k;
    const auto r = CompressVideo(MakeGrid(video), Embedding{0.2, 0.1, -0.4}, config);
    EXPECT_EQ(r.selected_frames.size(), 2u);
    EXPECT_EQ(r.retained_total(), 2 * (k + 1));
  }
}

TEST(CompressVideoTest, IdenticalTokensFollowTieRules) {
  std::vector<oracle::Tokens> video(6, oracle::Tokens(5, oracle::Vec{1, 2}));
  CompressionConfig config;
  config.retain_video = 0.5;
  config.coverage_bins = 3;
  config.tokens_per_selected_frame = 2;
  const auto r = CompressVideo(MakeGrid(video), Embedding{2, 1}, config);
  // Bins of ceil(6/3) = 2 frames; each bin's first frame leads.
  EXPECT_EQ(r.selected_frames, (std::vector<std::size_t>{0, 2, 4}));
  for (const auto& f : r.frame_memories) {
    EXPECT_EQ(f.kept_positions, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(f.memory->slot, 2u);
    EXPECT_EQ(f.memory->feature, (Embedding{1, 2}));
  }
}

TEST(CompressVideoTest, SinglePositionFramesKeepTheirToken) {
  const auto grid = MakeGrid({{{1, 0}}, {{0, 1}}, {{1, 1}}});
  CompressionConfig config;
  config.retain_video = 0.6;
  config.coverage_bins = 1;
  const auto r = CompressVideo(grid, Embedding{1, 0}, config);
  EXPECT_EQ(r.selected_frames, (std::vector<std::size_t>{0, 2}));
  for (const auto& f : r.frame_memories) {
    EXPECT_EQ(f.kept_positions, (std::vector<std::size_t>{0}));
    EXPECT_FALSE(f.memory.has_value());
  }
  EXPECT_EQ(r.retained_per_frame, (std::vector<std::size_t>{1, 0, 1}));
}

TEST(CompressVideoTest, CoverageBinsClampedToFrameCount) {
  const auto grid = MakeGrid({{{1, 0}, {0, 1}}, {{1, 1}, {0, 1}}});
  CompressionConfig config;  // four bins by default, only two frames
  EXPECT_NO_THROW(CompressVideo(grid, Embedding{1, 0}, config));
  EXPECT_THROW(CompressVideo(grid, Embedding{1, 0, 0}, config), Error);
}

TEST(EffectiveTokensPerFrameTest, DerivedFromRetainedFraction) {
  CompressionConfig config;  // retain 0.3
  // K = 10 of 32 frames, 0.3 * 32 * 196 / 10 = 188.16 -> 188 items, 187 kept.
  EXPECT_EQ(EffectiveTokensPerFrame(config, 32, 196), 187u);
  config.retain_video = 1.0;
  EXPECT_EQ(EffectiveTokensPerFrame(config, 32, 196), 195u);
  config.tokens_per_selected_frame = 500;
  EXPECT_EQ(EffectiveTokensPerFrame(config, 32, 196), 195u);
  config.tokens_per_selected_frame = 7;
  EXPECT_EQ(EffectiveTokensPerFrame(config, 32, 196), 7u);
  EXPECT_EQ(EffectiveTokensPerFrame(config, 32, 1), 1u);
}

TEST(CompressVideoTest, InvariantsAndOracleAgreement) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    const auto in = oracle::RandomInstance(rng, 6, 5, 4, 0);
    const auto config = testing::MakeConfig(in);
    const auto grid = MakeGrid(in.video);
    const auto r = CompressVideo(grid, in.query, config);
    const auto o = oracle::CompressVideo(in.video, in.query, in.retain_video,
                                         in.bins, in.tokens_per_frame);
    ASSERT_EQ(r.selected_frames, o.selected);
    EXPECT_EQ(r.retained_per_frame, o.retained);
    EXPECT_EQ(r.selected_frames.size(),
              std::max<std::size_t>(1, RoundHalfUp(in.retain_video * grid.frames())));
    for (std::size_t j = 0; j < r.frame_memories.size(); ++j) {
      const auto& f = r.frame_memories[j];
      EXPECT_EQ(f.kept_positions, o.frames[j].kept);
      EXPECT_TRUE(std::is_sorted(f.kept_positions.begin(), f.kept_positions.end()));
      if (!f.memory) continue;
      EXPECT_EQ(f.memory->slot, o.frames[j].slot);
      // Convex hull: each coordinate lies between the kept tokens' extremes.
      for (std::size_t i = 0; i < grid.dim(); ++i) {
        double lo = 1e300, hi = -1e300;
        for (const auto& tok : f.kept_tokens) {
          lo = std::min(lo, tok[i]);
          hi = std::max(hi, tok[i]);
        }
        EXPECT_GE(f.memory->feature[i], lo - 1e-12);
        EXPECT_LE(f.memory->feature[i], hi + 1e-12);
        EXPECT_NEAR(f.memory->feature[i], o.frames[j].memory[i], 1e-9);
      }
    }
  }
}

TEST(CompressVideoTest, SelectionInvariantUnderPositiveRescaling) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int iter = 0; iter < 200; ++iter) {
    auto in = oracle::RandomInstance(rng, 6, 5, 4, 0);
    const auto config = testing::MakeConfig(in);
    const auto before = CompressVideo(MakeGrid(in.video), in.query, config);
    const double s = scale(rng), q = scale(rng);
    for (auto& f : in.video)
      for (auto& t : f)
        for (auto& x : t) x *= s;
    for (auto& x : in.query) x *= q;
    const auto after = CompressVideo(MakeGrid(in.video), in.query, config);
    // Integer grids can flip exact ties under rescaling, so compare only the
    // continuous ones where scores are distinct.
    std::vector<double> scores;
    for (const auto& fs : before.frame_scores) scores.push_back(fs.score);
    std::sort(scores.begin(), scores.end());
    if (std::adjacent_find(scores.begin(), scores.end()) != scores.end()) continue;
    EXPECT_EQ(before.selected_frames, after.selected_frames);
  }
}

TEST(CompressVideoTest, Deterministic) {
  std::mt19937_64 rng(1);
  const auto in = oracle::RandomInstance(rng, 6, 5, 4, 0);
  const auto config = testing::MakeConfig(in);
  const auto a = CompressVideo(MakeGrid(in.video), in.query, config);
  const auto b = CompressVideo(MakeGrid(in.video), in.query, config);
  ASSERT_EQ(a.frame_memories.size(), b.frame_memories.size());
  for (std::size_t j = 0; j < a.frame_memories.size(); ++j) {
    EXPECT_EQ(a.frame_memories[j].kept_tokens, b.frame_memories[j].kept_tokens);
    if (a.frame_memories[j].memory) {
      EXPECT_EQ(a.frame_memories[j].memory->feature,
                b.frame_memories[j].memory->feature);
    }
  }
}

}  // namespace
}  // namespace omac
