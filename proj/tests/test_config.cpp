#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fmcw/config.hpp"

using namespace fmcw;

// Reference values below were computed offline in double precision with
// c = 299792458 m/s.

TEST(RangeResolution, Table1) {
  EXPECT_NEAR(range_resolution(RadarConfig::table1()), 0.22372571492537313, 1e-12);
}

TEST(RangeResolution, UnitAndWideBand) {
  RadarConfig c;
  c.sweep_bandwidth = speed_of_light / 2;
  EXPECT_DOUBLE_EQ(range_resolution(c), 1.0);
  c.sweep_bandwidth = 4e9;
  EXPECT_NEAR(range_resolution(c), 0.03747405725, 1e-12);
}

TEST(RangeResolution, RejectsNonPositiveBandwidth) {
  RadarConfig c;
  c.sweep_bandwidth = 0;
  EXPECT_THROW(range_resolution(c), InvalidConfig);
  c.sweep_bandwidth = -1;
  EXPECT_THROW(range_resolution(c), InvalidConfig);
}

TEST(VelocityResolution, Table1AndScaling) {
  RadarConfig c;
  EXPECT_NEAR(velocity_resolution(c), 0.06361778669043375, 1e-12);
  c.chirps_per_frame = 510;
  EXPECT_NEAR(velocity_resolution(c), 0.031808893345216874, 1e-12);
}

TEST(VelocityResolution, UnitCase) {
  RadarConfig c;
  c.chirps_per_frame = 1;
  c.chirp_duration = c.wavelength() / 2;
  EXPECT_NEAR(velocity_resolution(c), 1.0, 1e-12);
}

TEST(VelocityResolution, Errors) {
  RadarConfig c;
  c.chirps_per_frame = 0;
  EXPECT_THROW(velocity_resolution(c), InvalidConfig);
  c = {};
  c.chirp_duration = 0;
  EXPECT_THROW(velocity_resolution(c), InvalidConfig);
}

TEST(AngleResolution, Table1At10Degrees) {
  const double r = angle_resolution(RadarConfig::table1(), deg_to_rad(10));
  EXPECT_NEAR(r, 0.2538566529714363, 1e-12);
  EXPECT_NEAR(rad_to_deg(r), 14.544914816580468, 1e-9);
}

TEST(AngleResolution, TwoElementsBroadside) {
  RadarConfig c;
  c.n_tx = 1;
  c.n_rx = 2;
  EXPECT_NEAR(angle_resolution(c, 0.0), 1.0, 1e-12);
}

TEST(AngleResolution, SixtyDegreesDoubles) {
  RadarConfig c;
  EXPECT_NEAR(angle_resolution(c, deg_to_rad(60)) / angle_resolution(c, 0.0), 2.0, 1e-12);
}

TEST(AngleResolution, SingularAtEndfire) {
  RadarConfig c;
  EXPECT_THROW(angle_resolution(c, pi / 2), DomainError);
  EXPECT_THROW(angle_resolution(c, -pi / 2), DomainError);
  c.element_spacing = 0;
  EXPECT_THROW(angle_resolution(c, 0.0), InvalidConfig);
}

TEST(BeatFrequency, Examples) {
  RadarConfig c;
  EXPECT_NEAR(beat_frequency(c, 10.0), 1400969.1998322387, 1e-6);
  EXPECT_EQ(beat_frequency(c, 0.0), 0.0);
  const double fb = beat_frequency(c, 2.232);
  EXPECT_NEAR(fb, 312696.3254025557, 1e-6);
  EXPECT_EQ(std::lround(fb * 128 / c.sampling_frequency), 10);
  EXPECT_THROW(beat_frequency(c, -0.1), DomainError);
}

TEST(LinkBudget, MinDetectablePowerTable2) {
  const auto lb = LinkBudget::table2();
  EXPECT_NEAR(min_detectable_power(lb), 8.023005235905377e-13, 1e-24);
  EXPECT_NEAR(min_detectable_power_dbm(lb), -90.95662924371845, 1e-9);
  EXPECT_NEAR(min_detectable_power_dbm(lb), -91.0, 0.1);
}

TEST(LinkBudget, UnitNormalization) {
  LinkBudget lb;
  lb.noise_figure = 0;
  lb.min_snr = 0;
  lb.receiver_bandwidth = 1;
  lb.temperature = 1 / lb.boltzmann;
  EXPECT_NEAR(min_detectable_power(lb), 1.0, 1e-12);
}

TEST(LinkBudget, DoublingBandwidthAdds3dB) {
  auto lb = LinkBudget::table2();
  const double a = min_detectable_power_dbm(lb);
  lb.receiver_bandwidth *= 2;
  EXPECT_NEAR(min_detectable_power_dbm(lb) - a, 10 * std::log10(2.0), 1e-12);
}

TEST(LinkBudget, MaxRangeOracle) {
  EXPECT_NEAR(max_range(LinkBudget::table2()), 14.365587134659918, 1e-9);
}

TEST(LinkBudget, QuadruplingPowerScalesBySqrt2) {
  auto lb = LinkBudget::table2();
  const double r = max_range(lb);
  lb.tx_power += 10 * std::log10(4.0);
  EXPECT_NEAR(max_range(lb) / r, std::sqrt(2.0), 1e-12);
}

TEST(LinkBudget, RatioInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 100);
  const auto lb = LinkBudget::table2();
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng);
    auto scaled = lb;
    scaled.tx_power += 10 * std::log10(x);
    EXPECT_NEAR(max_range(scaled, min_detectable_power(lb) * x), max_range(lb), 1e-9);
  }
}

TEST(Conversions, DbmWattRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-150, 60);
  for (int i = 0; i < 200; ++i) {
    const double dbm = u(rng);
    EXPECT_NEAR(watts_to_dbm(dbm_to_watts(dbm)), dbm, 1e-12 * std::max(1.0, std::abs(dbm)));
    const double w = dbm_to_watts(dbm);
    EXPECT_NEAR(dbm_to_watts(watts_to_dbm(w)) / w, 1.0, 1e-12);
  }
}

TEST(Monotonicity, ResolutionsDecreaseWithAperture) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int i = 0; i < 100; ++i) {
    RadarConfig a, b;
    const double k = 1 + u(rng);
    b.sweep_bandwidth = a.sweep_bandwidth * k;
    EXPECT_LT(range_resolution(b), range_resolution(a));
    b = a;
    b.chirp_duration = a.chirp_duration * k;
    EXPECT_LT(velocity_resolution(b), velocity_resolution(a));
    const double th1 = deg_to_rad(u(rng) * 8), th2 = th1 / k;  // smaller angle, larger cos
    EXPECT_LT(angle_resolution(a, th2), angle_resolution(a, th1));
  }
}

TEST(DerivedAccessors, Table1Grids) {
  RadarConfig c;
  EXPECT_EQ(c.n_virtual(), 8u);
  EXPECT_NEAR(c.wavelength(), 0.0038934085454545454, 1e-15);
  EXPECT_NEAR(c.range_bin_spacing(), 0.22305986458333332, 1e-12);
  EXPECT_NEAR(c.range_bin_spacing(), 0.2232, 0.2232 * 2e-3);
  EXPECT_NEAR(c.doppler_bin_spacing(), 0.06336927971117425, 1e-12);
  EXPECT_NEAR(c.max_unambiguous_velocity(), 8.111267803030303, 1e-9);
  EXPECT_NEAR(c.max_unambiguous_range(), 28.551662666666665, 1e-9);
  EXPECT_DOUBLE_EQ(c.velocity_of_bin(128), 0.0);
  EXPECT_NEAR(c.velocity_of_bin(144), 16 * 0.06336927971117425, 1e-12);
  // angle grid is uniform in sin(theta): bin 96 sits at sin = 0.5
  EXPECT_NEAR(c.sin_of_angle_bin(96), 0.5, 1e-15);
  EXPECT_NEAR(c.azimuth_of_angle_bin(96), 30.0, 1e-12);
  EXPECT_NEAR(c.angle_bin_of(deg_to_rad(30)), 96.0, 1e-9);
  EXPECT_DOUBLE_EQ(c.azimuth_of_angle_bin(64), 0.0);
}

TEST(Validate, Table1IsClean) { EXPECT_TRUE(validate_config(RadarConfig::table1()).empty()); }

TEST(Validate, ShortChirp) {
  RadarConfig c;
  c.chirp_duration = 10e-6;
  const auto v = validate_config(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "chirp_duration");
  EXPECT_THROW(require_valid(c), InvalidConfig);
}

TEST(Validate, SampledBandwidthMismatch) {
  RadarConfig c;
  c.sweep_slope = 10e12;
  const auto v = validate_config(c);
  ASSERT_FALSE(v.empty());
  bool found = false;
  for (const auto& x : v) found |= x.field == "sweep_slope" || x.field == "sweep_bandwidth";
  EXPECT_TRUE(found);
}

TEST(Validate, FftSmallerThanData) {
  RadarConfig c;
  c.doppler_fft_size = 128;
  const auto v = validate_config(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "doppler_fft_size");
}

TEST(ConfigText, ParsesUnitsAndComments) {
  const auto c = parse_radar_config(
      "# comment\n"
      "start_frequency = 77 GHz\n"
      "sweep_slope = 21 MHz/us   # trailing\n"
      "sampling_frequency = 4000 ksps\n"
      "chirp_duration = 120 us\n"
      "chirps_per_frame = 255\n");
  EXPECT_DOUBLE_EQ(c.start_frequency, 77e9);
  EXPECT_DOUBLE_EQ(c.sweep_slope, 21e12);
  EXPECT_DOUBLE_EQ(c.sampling_frequency, 4e6);
  EXPECT_DOUBLE_EQ(c.chirp_duration, 120e-6);
}

TEST(ConfigText, DataFileMatchesDefaults) {
  const auto c = load_radar_config(std::string(FMCW_DATA_DIR) + "/table1.cfg");
  EXPECT_EQ(to_text(c), to_text(RadarConfig::table1()));
  const auto lb = load_link_budget(std::string(FMCW_DATA_DIR) + "/table2.cfg");
  EXPECT_DOUBLE_EQ(min_detectable_power(lb), min_detectable_power(LinkBudget::table2()));
}

TEST(ConfigText, RoundTripAndDigest) {
  RadarConfig c;
  c.start_frequency = 76.5e9;
  c.chirps_per_frame = 128;
  const auto back = parse_radar_config(to_text(c));
  EXPECT_EQ(to_text(back), to_text(c));
  EXPECT_EQ(config_digest(back), config_digest(c));
  EXPECT_NE(config_digest(c), config_digest(RadarConfig::table1()));
}

TEST(ConfigText, ErrorsNameTheLine) {
  auto message = [](const char* text) {
    try {
      parse_radar_config(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("start_frequency = 77 GHz\nbogus = 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("sweep_slope = fast\n").find("sweep_slope"), std::string::npos);
  EXPECT_NE(message("start_frequency = 77 parsecs\n").find("unit"), std::string::npos);
  EXPECT_NE(message("n_tx = 1.5\n").find("n_tx"), std::string::npos);
  EXPECT_NE(message("no equals sign\n").find("line 1"), std::string::npos);
  EXPECT_THROW(parse_link_budget("tx_power = 3 dB\n"), ParseError);
}
