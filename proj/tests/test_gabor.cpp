#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "declip/gabor.hpp"
#include "test_util.hpp"

using namespace declip;

TEST(GaborFrame, DefaultProfileGeometry) {
  const GaborFrame f = GaborFrame::make(8192, 0.75, 8192, 44100);
  EXPECT_EQ(f.hop(), 2048u);
  EXPECT_EQ(f.channels(), 8192u);
  EXPECT_EQ(f.padded_length() % f.hop(), 0u);
  EXPECT_GE(f.padded_length(), 44100u + 8192u);
  EXPECT_EQ(f.frames() * f.hop(), f.padded_length());
}

TEST(GaborFrame, RejectsNonPainlessParameters) {
  EXPECT_THROW(GaborFrame::make(256, 0.75, 128, 4096), Error);
  EXPECT_THROW(GaborFrame::make(256, 0.6, 256, 4096), Error);
  EXPECT_THROW(GaborFrame::make(256, 0.75, 256, 100), Error);
  EXPECT_THROW(GaborFrame::make(250, 0.75, 256, 4096), Error);
}

TEST(GaborFrame, WindowIsTight) {
  for (double overlap : {0.5, 0.75}) {
    const GaborFrame f = GaborFrame::make(256, overlap, 512, 4096);
    for (std::size_t r = 0; r < f.hop(); ++r) {
      double acc = 0.0;
      for (std::size_t j = r; j < f.window_length(); j += f.hop()) acc += f.window()[j] * f.window()[j];
      EXPECT_NEAR(acc * static_cast<double>(f.channels()), 1.0, 1e-13);
    }
  }
}

TEST(Analyze, ZeroSignalGivesZeroGrid) {
  const GaborFrame f = GaborFrame::make(256, 0.75, 256, 4096);
  const CoefGrid c = f.analyze(std::vector<double>(4096, 0.0));
  for (const auto& v : c.values) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(Analyze, LengthMismatchThrows) {
  const GaborFrame f = GaborFrame::make(256, 0.75, 256, 4096);
  EXPECT_THROW(f.analyze(std::vector<double>(4095, 0.0)), Error);
}

TEST(Analyze, ParsevalOnRandomSignals) {
  std::mt19937_64 rng(5);
  for (double overlap : {0.5, 0.75}) {
    const GaborFrame f = GaborFrame::make(256, overlap, 256, 4096);
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = fixtures::random_signal(rng, 4096);
      double energy = 0.0;
      for (double v : s) energy += v * v;
      EXPECT_NEAR(squared_norm(f.analyze(s)) / energy, 1.0, 1e-10);
    }
  }
}

TEST(Analyze, MatchesDirectWindowedDft) {
  // Cosine at the center frequency of channel 12; compare against a
  // brute-force DFT of every frame and check where the energy sits.
  const int fs = 8000;
  const std::size_t m = 64, channel = 12, n = 1024;
  const GaborFrame f = GaborFrame::make(64, 0.75, m, n);
  const auto s = fixtures::sinusoids(n, fs, {channel * double(fs) / m}, {0.7}, {0.3});
  const CoefGrid c = f.analyze(s);
  const auto padded = f.pad(s);
  for (std::size_t t = 0; t < f.frames(); ++t) {
    const auto direct = fixtures::direct_frame_dft(f, padded, t);
    for (std::size_t k = 0; k < m; ++k) EXPECT_LT(std::abs(c(k, t) - direct[k]), 1e-10);
  }
  // Frames fully inside the signal: all energy in channels m-1..m+1 and the mirror.
  for (std::size_t t = 2; t + 4 < n / f.hop(); ++t) {
    double total = 0.0, near = 0.0;
    std::size_t best = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double e = std::norm(c(k, t));
      total += e;
      const std::size_t d = std::min(k > channel ? k - channel : channel - k,
                                     k > m - channel ? k - (m - channel) : (m - channel) - k);
      if (d <= 1) near += e;
      if (k <= m / 2 && e > std::norm(c(best, t))) best = k;
    }
    EXPECT_EQ(best, channel);
    EXPECT_NEAR(std::norm(c(channel, t)), std::norm(c(m - channel, t)), 1e-12);
    EXPECT_GT(near / total, 1.0 - 1e-12);
  }
}

TEST(Synthesize, PerfectReconstruction) {
  std::mt19937_64 rng(9);
  for (double overlap : {0.5, 0.75}) {
    const GaborFrame f = GaborFrame::make(512, overlap, 1024, 5000);
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = fixtures::random_signal(rng, 5000);
      const auto back = f.synthesize(f.analyze(s));
      ASSERT_EQ(back.size(), s.size());
      for (std::size_t i = 0; i < s.size(); ++i) ASSERT_NEAR(back[i], s[i], 1e-10);
    }
  }
}

TEST(Synthesize, ZeroGridGivesZeroSignal) {
  const GaborFrame f = GaborFrame::make(256, 0.75, 256, 4096);
  for (double v : f.synthesize(CoefGrid(f.channels(), f.frames()))) EXPECT_EQ(v, 0.0);
}

TEST(Synthesize, ShapeMismatchThrows) {
  const GaborFrame f = GaborFrame::make(256, 0.75, 256, 4096);
  EXPECT_THROW(f.synthesize(CoefGrid(f.channels(), f.frames() + 1)), Error);
}

TEST(Synthesize, IsAdjointOfAnalyze) {
  std::mt19937_64 rng(13);
  const GaborFrame f = GaborFrame::make(256, 0.75, 512, 3000);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = fixtures::random_signal(rng, 3000);
    const CoefGrid c = fixtures::random_grid(rng, f.channels(), f.frames());
    const auto dc = f.synthesize(c);
    double lhs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) lhs += dc[i] * s[i];
    const CoefGrid ds = f.analyze(s);
    double rhs = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) rhs += (std::conj(c.values[i]) * ds.values[i]).real();
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Analyze, IsLinear) {
  std::mt19937_64 rng(17);
  const GaborFrame f = GaborFrame::make(256, 0.75, 256, 2048);
  const auto a = fixtures::random_signal(rng, 2048);
  const auto b = fixtures::random_signal(rng, 2048);
  const double alpha = 0.7, beta = -1.3;
  std::vector<double> mix(2048);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * a[i] + beta * b[i];
  const CoefGrid ca = f.analyze(a), cb = f.analyze(b), cm = f.analyze(mix);
  for (std::size_t i = 0; i < cm.values.size(); ++i)
    EXPECT_LT(std::abs(cm.values[i] - (alpha * ca.values[i] + beta * cb.values[i])), 1e-10);
}

TEST(Segment, CentersOnWindow) {
  const GaborFrame f = GaborFrame::make(8, 0.75, 8, 16);
  std::vector<double> padded(f.padded_length());
  for (std::size_t i = 0; i < padded.size(); ++i) padded[i] = static_cast<double>(i);
  // With length == window length the segment is exactly the frame support.
  for (std::size_t t = 0; t < f.frames(); ++t) {
    const auto seg = f.segment(padded, t, 8);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(seg[j], static_cast<double>(f.position(t, j)));
  }
}
