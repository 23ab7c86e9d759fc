#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "edgewear/device/device.hpp"
#include "edgewear/device/mic.hpp"
#include "edgewear/device/power.hpp"
#include "edgewear/error.hpp"
#include "support.hpp"

using namespace edgewear;
using namespace edgewear::device;

TEST(Power, RuntimeToEmpty) {
  EXPECT_NEAR(runtime_to_empty_h(200, 90), 200.0 / 90.0, 1e-12);
  EXPECT_NEAR(runtime_to_empty_h(200, 425) * 60.0, 28.2353, 1e-3);
  EXPECT_GE(runtime_to_empty_h(200, 8), 24.0);
  EXPECT_EQ(runtime_to_empty_h(0, 90), 0.0);
  EXPECT_TRUE(std::isinf(runtime_to_empty_h(200, 0)));
}

TEST(Power, FormatRuntime) {
  EXPECT_EQ(format_runtime(200.0 / 90.0), "2.22 h");
  EXPECT_EQ(format_runtime(200.0 / 425.0), "28.2 min");
  EXPECT_EQ(format_runtime(25.0), "25.00 h");
  EXPECT_EQ(format_runtime(INFINITY), "unbounded");
}

TEST(Power, PlaybackAddsToBaseline) {
  PowerProfile p;
  EXPECT_EQ(p.current_ma(DeviceState::PlayingResponse), 390.0);
  EXPECT_EQ(parse_device_state("ActiveQuery"), DeviceState::ActiveQuery);
  EXPECT_THROW(parse_device_state("Hibernate"), ConfigError);
}

TEST(Power, ProfileJsonValidation) {
  const auto p = power_profile_from_json(nlohmann::json::parse(R"({"battery_mah": 300, "active_query_ma": 400})"));
  EXPECT_EQ(p.battery_mah, 300.0);
  EXPECT_EQ(power_profile_from_json(to_json(p)).active_query_ma, 400.0);
  EXPECT_THROW(power_profile_from_json(nlohmann::json::parse(R"({"batt": 1})")), ConfigError);
  EXPECT_THROW(power_profile_from_json(nlohmann::json::parse(R"({"deep_sleep_ma": 0})")), ConfigError);
  EXPECT_THROW(power_profile_from_json(nlohmann::json::parse(R"({"battery_mah": -1})")), ConfigError);
}

TEST(Power, MeterIntegratesPerState) {
  PowerProfile p;
  EnergyMeter m(p);
  m.set_state(3600.0, DeviceState::ActiveQuery);  // one hour of baseline
  m.advance(3600.0 + 360.0);                      // six minutes of active
  const auto& l = m.ledger();
  EXPECT_NEAR(l.consumed_mah_in(DeviceState::BaselineListening), 90.0, 1e-9);
  EXPECT_NEAR(l.consumed_mah_in(DeviceState::ActiveQuery), 42.5, 1e-9);
  EXPECT_NEAR(l.remaining_mah, 200.0 - 132.5, 1e-9);
  EXPECT_FALSE(l.depleted);
  ASSERT_EQ(l.timeline.size(), 2u);
  EXPECT_EQ(l.timeline[1].state, DeviceState::ActiveQuery);
}

TEST(Power, MeterStopsAtEmpty) {
  PowerProfile p;
  EnergyMeter m(p, DeviceState::ActiveQuery);
  m.advance(7200.0);
  const auto& l = m.ledger();
  EXPECT_TRUE(l.depleted);
  EXPECT_EQ(l.remaining_mah, 0.0);
  EXPECT_NEAR(l.elapsed_s, 200.0 / 425.0 * 3600.0, 1e-6);
  EXPECT_NEAR(l.consumed_total_mah(), 200.0, 1e-9);
}

TEST(Power, ScheduleAverage) {
  PowerProfile p;
  const auto sched = schedule_from_json(nlohmann::json::parse(
      R"([{"state": "BaselineListening", "duration_s": 30}, {"state": "ActiveQuery", "duration_s": 10}])"));
  ASSERT_EQ(sched.size(), 2u);
  const auto sim = simulate_power(p, sched);
  EXPECT_NEAR(sim.average_current_ma, (90.0 * 30 + 425.0 * 10) / 40.0, 1e-9);
  EXPECT_NEAR(sim.runtime_to_empty_h, 200.0 / sim.average_current_ma, 1e-9);
  EXPECT_NEAR(sim.ledger.elapsed_s, 40.0, 1e-9);
  EXPECT_THROW(simulate_power(p, {{DeviceState::DeepSleep, 0.0}}), ConfigError);
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"([{"state": "Nap", "duration_s": 1}])")), ConfigError);
}

TEST(Power, ReportRows) {
  PowerProfile p;
  const auto rows = power_report(p);
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0].current_ma, 90.0);
  EXPECT_NEAR(rows[0].runtime_h, 2.2222, 1e-4);
  EXPECT_NEAR(rows[1].runtime_h * 60.0, 28.235, 1e-3);
  EXPECT_EQ(rows.back().current_ma, 8.0);
  EXPECT_EQ(rows.back().runtime_h, 25.0);
  std::ostringstream text, csv;
  write_power_report_text(rows, p.battery_mah, text);
  write_power_report_csv(rows, csv);
  EXPECT_NE(text.str().find("28.2 min"), std::string::npos);
  EXPECT_NE(csv.str().find("scenario,components,current_ma"), std::string::npos);
  EXPECT_EQ(power_report(p, {{DeviceState::ActiveQuery, 1.0}}).size(), rows.size() + 1);
}

TEST(Mic, TimelineConcatenation) {
  MicTimeline t;
  MicEntry s;
  s.duration_s = 0.5;
  MicEntry c;
  c.kind = MicEntry::Kind::clip;
  c.clip.samples.assign(100, 7);
  MicEntry late = c;
  late.at_s = 1.0;
  t.entries = {s, c, late};
  const auto pcm = mic_source(t);
  ASSERT_EQ(pcm.samples.size(), 16000u + 100u);
  EXPECT_EQ(pcm.samples[7999], 0);
  EXPECT_EQ(pcm.samples[8000], 7);
  EXPECT_EQ(pcm.samples[8100], 0);
  EXPECT_EQ(pcm.samples[16000], 7);
}

TEST(Mic, OverlapAndFormatErrors) {
  MicTimeline t;
  MicEntry s;
  s.duration_s = 1.0;
  MicEntry back;
  back.duration_s = 0.1;
  back.at_s = 0.5;
  t.entries = {s, back};
  EXPECT_THROW(mic_source(t), ConfigError);
  MicEntry wrong;
  wrong.kind = MicEntry::Kind::clip;
  wrong.clip.sample_rate_hz = 8000;
  t.entries = {wrong};
  EXPECT_THROW(mic_source(t), ConfigError);
}

TEST(Mic, NoiseFloorIsSeeded) {
  MicTimeline t;
  MicEntry s;
  s.duration_s = 0.2;
  t.entries = {s};
  t.noise_floor_dbfs = -50.0;
  const auto a = mic_source(t), b = mic_source(t);
  EXPECT_EQ(a.samples, b.samples);
  double e = 0.0;
  for (auto v : a.samples) e += double(v) * v;
  const double rms = std::sqrt(e / double(a.samples.size()));
  EXPECT_NEAR(20.0 * std::log10(rms / 32767.0), -50.0, 0.5);
}

TEST(Photo, PpmRoundTripAndErrors) {
  const auto dir = support::scratch_dir("photos");
  std::vector<uint8_t> rgb(4 * 3 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<uint8_t>(i * 7);
  save_photo_ppm(dir / "desk.ppm", 4, 3, rgb);
  const auto p = load_photo(dir / "desk.ppm");
  EXPECT_EQ(p.name, "desk");
  EXPECT_EQ(p.width, 4);
  EXPECT_EQ(p.height, 3);
  EXPECT_EQ(p.bytes, rgb);

  std::ofstream(dir / "p3.ppm") << "P3\n1 1\n255\n0 0 0\n";
  EXPECT_THROW(load_photo(dir / "p3.ppm"), FormatError);
  {
    std::ofstream out(dir / "short.ppm", std::ios::binary);
    out << "P6\n2 2\n255\n" << std::string(5, 'x');
  }
  EXPECT_THROW(load_photo(dir / "short.ppm"), FormatError);
  EXPECT_THROW(load_photo(dir / "missing.ppm"), InputError);
  EXPECT_THROW(save_photo_ppm(dir / "bad.ppm", 2, 2, rgb), InputError);
}

TEST(Photo, BundledPhotosLoad) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(support::data_dir() / "fixtures" / "photos")) {
    if (e.path().extension() != ".ppm") continue;
    const auto p = load_photo(e.path());
    EXPECT_EQ(p.bytes.size(), std::size_t(p.width) * p.height * 3);
    ++n;
  }
  EXPECT_GE(n, 1u);
}
