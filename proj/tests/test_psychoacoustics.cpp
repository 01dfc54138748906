#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "declip/psychoacoustics.hpp"
#include "test_util.hpp"

using namespace declip;

namespace {

// Independent evaluations used as oracles.
double terhardt(double f) {
  const double g = f / 1000.0;
  return 3.64 * std::pow(g, -0.8) - 6.5 * std::exp(-0.6 * std::pow(g - 3.3, 2.0)) + 1e-3 * std::pow(g, 4.0);
}

double model1_spread(double dz, double level) {
  // ISO 11172-3 psychoacoustic model 1 spreading function, written per segment.
  if (-3.0 <= dz && dz < -1.0) return 17.0 * dz - 0.4 * level + 11.0;
  if (-1.0 <= dz && dz < 0.0) return (0.4 * level + 6.0) * dz;
  if (0.0 <= dz && dz < 1.0) return -17.0 * dz;
  if (1.0 <= dz && dz < 8.0) return -(dz - 1.0) * (17.0 - 0.15 * level) - 17.0;
  return -1e300;
}

}  // namespace

TEST(Ath, SpotValues) {
  EXPECT_NEAR(ath_db(1000.0), 3.369066525895342, 1e-12);
  EXPECT_NEAR(ath_db(3300.0), -4.980884944002541, 1e-12);
  EXPECT_NEAR(ath_db(20.0), 83.21929770448148, 1e-10);
  EXPECT_NEAR(ath_db(1000.0), 3.37, 0.005);
  EXPECT_NEAR(ath_db(3300.0), -4.98, 0.005);
}

TEST(Ath, MatchesFormulaBelowClamp) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> f(20.0, 20000.0);
  for (int i = 0; i < 1000; ++i) {
    const double hz = f(rng);
    const double expected = terhardt(hz);
    if (expected < kCurveClampDb) {
      EXPECT_NEAR(ath_db(hz), expected, 1e-12);
    }
  }
}

TEST(Ath, ClampsAndRejectsNonpositive) {
  EXPECT_EQ(ath_db(2.0), kCurveClampDb);
  EXPECT_EQ(ath_db(21000.0), kCurveClampDb);
  EXPECT_THROW(ath_db(0.0), Error);
  EXPECT_THROW(ath_db(-5.0), Error);
}

TEST(AthVector, SamplesBinCenters) {
  const ThresholdCurve c = ath_vector(8192, 44100);
  ASSERT_EQ(c.size(), 4097u);
  EXPECT_NEAR(c.bin_freqs[186], 1001.2939453125, 1e-9);
  EXPECT_EQ(c.values_db[186], ath_db(c.bin_freqs[186]));
  EXPECT_EQ(c.values_db[0], 100.0);
  EXPECT_EQ(c.bin_freqs.back(), 22050.0);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_GT(c.bin_freqs[k], c.bin_freqs[k - 1]);
}

TEST(AthVector, DecreasesUpToMinimumRegion) {
  const ThresholdCurve c = ath_vector(8192, 44100);
  const auto stop = static_cast<std::size_t>(std::lround(3300.0 * 8192 / 44100));
  for (std::size_t k = 2; k <= stop; ++k) EXPECT_LE(c.values_db[k], c.values_db[k - 1]) << "bin " << k;
  EXPECT_LT(c.values_db[stop], c.values_db[1]);
}

TEST(Psd, FullScaleSinusoidPeaksAt96dB) {
  const std::size_t m = 1024;
  const auto s = fixtures::sinusoids(m, 44100, {40.0 * 44100 / m}, {1.0}, {0.0});
  const ThresholdCurve p = psd_estimate(s, 44100);
  EXPECT_NEAR(p.values_db[40], 96.0, 0.1);
  EXPECT_NEAR(p.values_db[39], 96.0 - 6.0206, 0.01);
}

TEST(Psd, ZeroFrameIsFloor) {
  const ThresholdCurve p = psd_estimate(std::vector<double>(512, 0.0), 44100);
  for (double v : p.values_db) EXPECT_EQ(v, kPsdFloorDb);
}

TEST(Psd, HalvingLowersBySixDb) {
  std::mt19937_64 rng(2);
  const auto s = fixtures::random_signal(rng, 1024, 0.3);
  std::vector<double> half(s);
  for (double& v : half) v *= 0.5;
  const ThresholdCurve a = psd_estimate(s, 44100), b = psd_estimate(half, 44100);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.values_db[k] - b.values_db[k], 20.0 * std::log10(2.0), 1e-9);
}

TEST(Maskers, SinglePureTone) {
  const std::size_t m = 1024;
  const auto s = fixtures::sinusoids(m, 44100, {40.0 * 44100 / m}, {0.5}, {0.4});
  const auto maskers = find_tonal_maskers(psd_estimate(s, 44100));
  ASSERT_EQ(maskers.size(), 1u);
  EXPECT_EQ(maskers[0].bin, 40u);
}

TEST(Maskers, FlatSpectrumHasNone) {
  ThresholdCurve psd;
  psd.bin_freqs = bin_frequencies(1024, 44100);
  psd.values_db.assign(psd.bin_freqs.size(), 60.0);
  EXPECT_TRUE(find_tonal_maskers(psd).empty());
}

TEST(Maskers, CloseEqualTonesAreDecimated) {
  ThresholdCurve psd;
  psd.bin_freqs = bin_frequencies(8192, 44100);
  psd.values_db.assign(psd.bin_freqs.size(), 20.0);
  const std::size_t first = 186;
  std::size_t second = first + 1;
  while (hz_to_bark(psd.bin_freqs[second]) - hz_to_bark(psd.bin_freqs[first]) < 0.3) ++second;
  ASSERT_GT(second - first, 6u);  // both peaks pass the prominence test on their own
  for (std::size_t k : {first, second}) {
    psd.values_db[k] = 80.0;
    psd.values_db[k - 1] = psd.values_db[k + 1] = 74.0;
  }
  // Oracle: both are prominent candidates; they are < 0.5 Bark apart, so
  // exactly one survives.
  const double gap = hz_to_bark(psd.bin_freqs[second]) - hz_to_bark(psd.bin_freqs[first]);
  EXPECT_LT(gap, 0.5);
  const auto maskers = find_tonal_maskers(psd);
  ASSERT_EQ(maskers.size(), 1u);
  EXPECT_TRUE(maskers[0].bin == first || maskers[0].bin == second);

  // Moving the second tone beyond 0.5 Bark keeps both.
  psd.values_db[second] = psd.values_db[second - 1] = psd.values_db[second + 1] = 20.0;
  std::size_t far = second;
  while (hz_to_bark(psd.bin_freqs[far]) - hz_to_bark(psd.bin_freqs[first]) < 0.6) ++far;
  psd.values_db[far] = 80.0;
  psd.values_db[far - 1] = psd.values_db[far + 1] = 74.0;
  EXPECT_EQ(find_tonal_maskers(psd).size(), 2u);
}

TEST(Maskers, AreStrictLocalMaxima) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = fixtures::music_like(rng, 2048, 44100, 4);
    const ThresholdCurve psd = psd_estimate(s, 44100);
    for (const Masker& mk : find_tonal_maskers(psd)) {
      EXPECT_GT(psd.values_db[mk.bin], psd.values_db[mk.bin - 1]);
      EXPECT_GT(psd.values_db[mk.bin], psd.values_db[mk.bin + 1]);
      EXPECT_GE(mk.level_db, ath_db(psd.bin_freqs[mk.bin]));
    }
  }
}

TEST(Gmt, SilentFrameEqualsAth) {
  const ThresholdCurve gmt = global_masking_threshold(std::vector<double>(2048, 0.0), 44100);
  const ThresholdCurve ath = ath_vector(2048, 44100);
  for (std::size_t k = 0; k < gmt.size(); ++k) EXPECT_NEAR(gmt.values_db[k], ath.values_db[k], 1e-12);
}

TEST(Gmt, NeverBelowAth) {
  std::mt19937_64 rng(37);
  const ThresholdCurve ath = ath_vector(2048, 44100);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = fixtures::music_like(rng, 2048, 44100, 5);
    const ThresholdCurve gmt = global_masking_threshold(s, 44100);
    for (std::size_t k = 0; k < gmt.size(); ++k) EXPECT_GE(gmt.values_db[k], ath.values_db[k]);
  }
}

TEST(Gmt, LoudToneMatchesDirectSummation) {
  const std::size_t m = 2048;
  const int fs = 44100;
  const std::size_t bin = 46;  // ~990 Hz
  const auto s = fixtures::sinusoids(m, fs, {bin * double(fs) / m}, {0.8}, {0.0});
  const ThresholdCurve psd = psd_estimate(s, fs);
  const auto maskers = find_tonal_maskers(psd);
  ASSERT_EQ(maskers.size(), 1u);
  const ThresholdCurve gmt = global_masking_threshold(s, fs);
  const ThresholdCurve ath = ath_vector(m, fs);

  // Direct per-bin summation with the oracle spreading function.
  const Masker& mk = maskers[0];
  const double zm = 13.0 * std::atan(0.00076 * psd.bin_freqs[mk.bin]) +
                    3.5 * std::atan(std::pow(psd.bin_freqs[mk.bin] / 7500.0, 2.0));
  bool raised_near = false;
  for (std::size_t k = 0; k < gmt.size(); ++k) {
    const double f = psd.bin_freqs[k];
    const double z = 13.0 * std::atan(0.00076 * f) + 3.5 * std::atan(std::pow(f / 7500.0, 2.0));
    const double individual = mk.level_db - 0.275 * zm - 6.025 + model1_spread(z - zm, mk.level_db);
    const double expected =
        std::min(10.0 * std::log10(std::pow(10.0, ath.values_db[k] / 10.0) + std::pow(10.0, individual / 10.0)),
                 kCurveClampDb);
    EXPECT_NEAR(gmt.values_db[k], expected, 1e-9) << "bin " << k;
    const double dz = z - zm;
    if (std::abs(dz) <= 3.0 && gmt.values_db[k] > ath.values_db[k] + 10.0) raised_near = true;
    if (dz < -3.0 || dz >= 8.0) {
      EXPECT_NEAR(gmt.values_db[k], ath.values_db[k], 1e-9);
    }
  }
  EXPECT_TRUE(raised_near);
  EXPECT_GT(gmt.values_db[bin], ath.values_db[bin] + 40.0);
}

TEST(Gmt, MonotoneInMaskerLevel) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> level(30.0, 90.0);
  std::uniform_int_distribution<std::size_t> bin(5, 1000);
  const ThresholdCurve ath = ath_vector(2048, 44100);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Masker> maskers;
    for (int i = 0; i < 4; ++i) {
      const std::size_t b = bin(rng);
      maskers.push_back({b, level(rng), hz_to_bark(ath.bin_freqs[b])});
    }
    const ThresholdCurve before = global_masking_threshold(maskers, ath);
    maskers[trial % 4].level_db += 5.0;
    const ThresholdCurve after = global_masking_threshold(maskers, ath);
    for (std::size_t k = 0; k < ath.size(); ++k) EXPECT_GE(after.values_db[k], before.values_db[k]);
  }
}

TEST(Bark, KnownValues) {
  EXPECT_NEAR(hz_to_bark(1000.0), 8.510531510721993, 1e-12);
  EXPECT_EQ(hz_to_bark(0.0), 0.0);
  EXPECT_LT(hz_to_bark(22050.0), 25.0);
}
