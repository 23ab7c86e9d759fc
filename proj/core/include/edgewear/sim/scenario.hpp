#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgewear/device/mic.hpp"
#include "edgewear/device/power.hpp"
#include "edgewear/error.hpp"
#include "edgewear/netsim/stream.hpp"
#include "edgewear/sim/system.hpp"

namespace edgewear::sim {

/// session: device + channel + edge; stream: bare audio stream over the
/// channel; power: battery schedule only.
enum class ScenarioKind : uint8_t { session, stream, power };

std::string_view scenario_kind_name(ScenarioKind k);

/// All problems found in a scenario file, one "field.path: message" each.
class ScenarioError : public ConfigError {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct MicClipRef {
  std::filesystem::path path;  // empty for silence
  double silence_s = 0.0;
  std::optional<double> at_s;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::session;
  uint64_t seed = 1;
  std::filesystem::path base_dir;

  // session
  SystemConfig system;
  std::vector<MicClipRef> mic;
  std::optional<double> noise_floor_dbfs;
  std::vector<std::filesystem::path> photos;
  std::filesystem::path kws_model;
  std::filesystem::path intent_model;
  std::filesystem::path stubs;

  // stream
  netsim::StreamScenario stream;
  std::vector<uint64_t> stream_seeds;

  // power (also allowed alongside a session)
  std::vector<device::ScheduleEntry> power_schedule;
};

/// Relative paths resolve against `base_dir`; referenced files must exist.
/// Throws ScenarioError listing every problem found.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

device::MicTimeline load_mic_timeline(const Scenario& s);
/// Reads fixtures, models and stub tables for a session scenario.
SystemInputs load_inputs(const Scenario& s);

}  // namespace edgewear::sim
