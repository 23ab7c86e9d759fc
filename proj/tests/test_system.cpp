#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "edgewear/edge/service.hpp"
#include "edgewear/netsim/transport.hpp"
#include "edgewear/sim/scenario.hpp"
#include "edgewear/sim/system.hpp"
#include "support.hpp"

using namespace edgewear;
using namespace edgewear::sim;

namespace {

struct Loaded {
  Scenario scenario;
  SystemInputs inputs;
};

Loaded load(const std::string& name) {
  Loaded l;
  l.scenario = load_scenario(support::data_dir() / "scenarios" / (name + ".json"));
  l.inputs = load_inputs(l.scenario);
  return l;
}

std::vector<double> e2e(const SystemResult& r) {
  std::vector<double> out;
  for (const auto& q : r.records) out.push_back(q.end_to_end_ms);
  return out;
}

}  // namespace

TEST(System, WalkthroughRoutesEveryQuery) {
  const auto l = load("walkthrough");
  netsim::TransportRegistry reg;
  const auto r = run_system(l.scenario.system, l.inputs, &reg);
  ASSERT_EQ(r.records.size(), 5u);
  const intent::IntentLabel want[] = {intent::IntentLabel::device_control, intent::IntentLabel::visual_query,
                                      intent::IntentLabel::conversational, intent::IntentLabel::general_question,
                                      intent::IntentLabel::device_control};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.records[i].intent, want[i]) << i;
    EXPECT_GT(r.records[i].end_to_end_ms, 0.0) << i;
    EXPECT_GT(r.records[i].response_chunks, 0u) << i;
    EXPECT_FALSE(r.records[i].error) << i;
  }
  EXPECT_EQ(r.records[0].device_command, "capture_photo");
  EXPECT_EQ(r.records[1].response_text, "I can see a laptop, a coffee mug and a notebook on a wooden table.");
  EXPECT_EQ(r.records[3].response_text, "The capital of France is Paris.");

  ASSERT_EQ(r.episodes.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_TRUE(r.episodes[i].completed) << i;
    EXPECT_FALSE(r.episodes[i].hard_capped) << i;
    EXPECT_EQ(r.episodes[i].photo_meta, i == 1 ? 1u : 0u) << i;
    EXPECT_EQ(r.episodes[i].underruns, 0u) << i;
  }
  EXPECT_EQ(r.device_stats.photo_meta_sent, 1u);
  EXPECT_EQ(r.device_stats.photos_stored, 1u);
  EXPECT_EQ(r.device_stats.detections, 5u);
  EXPECT_TRUE(r.device_finished);
  EXPECT_EQ(r.device_state, device::DeviceState::BaselineListening);
  EXPECT_EQ(r.device_session, wire::SessionState::Idle);
  EXPECT_EQ(r.edge_session, wire::SessionState::Idle);
  EXPECT_TRUE(netsim::only_between(reg.snapshot(), "device", "edge"));

  ASSERT_TRUE(r.latency);
  EXPECT_LE(r.latency->max_additivity_error, 0.05);
  EXPECT_GT(r.energy.consumed_mah_in(device::DeviceState::ActiveQuery), 0.0);
}

TEST(System, Deterministic) {
  const auto l = load("walkthrough");
  const auto a = run_system(l.scenario.system, l.inputs);
  const auto b = run_system(l.scenario.system, l.inputs);
  EXPECT_EQ(e2e(a), e2e(b));
  EXPECT_EQ(a.events.size(), b.events.size());
  EXPECT_EQ(a.speaker.samples, b.speaker.samples);
}

TEST(System, SlowerInferenceShiftsEndToEnd) {
  auto l = load("walkthrough");
  const auto base = run_system(l.scenario.system, l.inputs);
  for (auto* s : {&l.inputs.stubs.llm, &l.inputs.stubs.vlm, &l.inputs.stubs.command}) s->latency.fixed_ms += 500.0;
  const auto slow = run_system(l.scenario.system, l.inputs);
  ASSERT_EQ(slow.records.size(), base.records.size());
  EXPECT_NEAR(slow.latency->end_to_end.p50 - base.latency->end_to_end.p50, 500.0, 30.0);
}

TEST(System, NoWakeWordNoStreaming) {
  auto l = load("walkthrough");
  device::MicTimeline t;
  device::MicEntry e;
  e.duration_s = 10.0;
  t.entries = {e};
  t.noise_floor_dbfs = -50.0;
  l.inputs.mic = device::mic_source(t);
  const auto r = run_system(l.scenario.system, l.inputs);
  EXPECT_EQ(r.device_stats.audio_chunks_sent, 0u);
  EXPECT_EQ(r.device_stats.detections, 0u);
  EXPECT_TRUE(r.records.empty());
  EXPECT_FALSE(r.latency);
  EXPECT_EQ(r.energy.consumed_mah_in(device::DeviceState::ActiveQuery), 0.0);
}

TEST(System, DropAndReconnect) {
  const auto l = load("drop_reconnect");
  ASSERT_EQ(l.scenario.system.drops.size(), 1u);
  const auto r = run_system(l.scenario.system, l.inputs);
  EXPECT_GE(r.device_stats.reconnects, 1u);
  EXPECT_TRUE(r.device_finished);
  std::size_t completed = 0;
  for (const auto& q : r.records) completed += q.end_to_end_ms > 0.0;
  EXPECT_GE(completed, 4u);
  EXPECT_EQ(r.device_state, device::DeviceState::BaselineListening);
}

TEST(Scenario, ReportsEveryIssue) {
  const auto j = nlohmann::json::parse(R"({
    "name": "bad", "kind": "session", "colour": "red",
    "models": {"kws": "nope.bin"},
    "stubs": "missing.json",
    "mic": {"timeline": [{"clip": "a.wav", "silence_s": 1}]},
    "channel": {"jitter_ms": -4}
  })");
  try {
    scenario_from_json(j, support::data_dir() / "scenarios");
    FAIL();
  } catch (const ScenarioError& e) {
    const auto& is = e.issues();
    auto has = [&](const std::string& s) {
      return std::any_of(is.begin(), is.end(), [&](const std::string& x) { return x.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(has("colour")) << e.what();
    EXPECT_TRUE(has("models.intent")) << e.what();
    EXPECT_TRUE(has("nope.bin")) << e.what();
    EXPECT_TRUE(has("mic.timeline[0]")) << e.what();
    EXPECT_TRUE(has("jitter_ms")) << e.what();
  }
}

TEST(Scenario, BundledScenariosLoad) {
  for (const auto& e : std::filesystem::directory_iterator(support::data_dir() / "scenarios")) {
    EXPECT_NO_THROW(load_scenario(e.path())) << e.path();
  }
}
