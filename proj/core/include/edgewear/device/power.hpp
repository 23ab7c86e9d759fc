#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace edgewear::device {

enum class DeviceState : uint8_t { DeepSleep, LightSleep, BaselineListening, ActiveQuery, PlayingResponse };

inline constexpr std::size_t kNumDeviceStates = 5;
inline constexpr std::array<DeviceState, kNumDeviceStates> kAllDeviceStates = {
    DeviceState::DeepSleep, DeviceState::LightSleep, DeviceState::BaselineListening, DeviceState::ActiveQuery,
    DeviceState::PlayingResponse};

std::string_view device_state_name(DeviceState s);
/// Throws ConfigError for unknown names.
DeviceState parse_device_state(std::string_view s);

/// Currents in mA, capacity in mAh.
struct PowerProfile {
  double deep_sleep_ma = 0.05;
  double light_sleep_ma = 3.0;
  double modem_sleep_ma = 25.0;
  double baseline_listening_ma = 90.0;
  double active_query_ma = 425.0;
  /// Added on top of baseline listening while the amplifier plays.
  double playback_extra_ma = 300.0;
  double battery_mah = 200.0;

  double current_ma(DeviceState s) const;
  /// Throws ConfigError unless currents are positive and capacity >= 0.
  void validate() const;
};

PowerProfile power_profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PowerProfile& p);

struct ScheduleEntry {
  DeviceState state = DeviceState::BaselineListening;
  double duration_s = 0.0;
};

struct StateChange {
  double t_s = 0.0;
  DeviceState state = DeviceState::BaselineListening;
  double remaining_mah = 0.0;
};

struct EnergyLedger {
  double capacity_mah = 0.0;
  std::array<double, kNumDeviceStates> consumed_mah{};
  std::array<double, kNumDeviceStates> time_s{};
  double remaining_mah = 0.0;
  double elapsed_s = 0.0;
  bool depleted = false;
  std::vector<StateChange> timeline;

  double consumed_total_mah() const;
  double consumed_mah_in(DeviceState s) const { return consumed_mah[static_cast<std::size_t>(s)]; }
};

/// Incremental ledger driven by state changes on a clock. Stops draining
/// (and marks the ledger depleted) when the battery reaches zero.
class EnergyMeter {
 public:
  explicit EnergyMeter(PowerProfile profile, DeviceState initial = DeviceState::BaselineListening, double t0_s = 0.0);

  void set_state(double t_s, DeviceState s);
  void advance(double t_s);

  DeviceState state() const { return state_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const PowerProfile& profile() const { return profile_; }

 private:
  PowerProfile profile_;
  DeviceState state_;
  double t_s_;
  EnergyLedger ledger_;
};

struct PowerSimulation {
  EnergyLedger ledger;
  double average_current_ma = 0.0;
  /// Hours until empty if the schedule repeated forever.
  double runtime_to_empty_h = 0.0;
};

/// Throws ConfigError on non-positive durations.
PowerSimulation simulate_power(const PowerProfile& profile, const std::vector<ScheduleEntry>& schedule);

/// capacity / current; 0 for an empty battery, +inf for zero current.
double runtime_to_empty_h(double capacity_mah, double current_ma);

std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j);

struct PowerReportRow {
  std::string scenario;
  std::string components;
  double current_ma = 0.0;
  double runtime_h = 0.0;
};

/// Rows for the operating states plus the all-day 8 mA budget.
std::vector<PowerReportRow> power_report(const PowerProfile& profile,
                                         const std::vector<ScheduleEntry>& schedule = {});
void write_power_report_text(const std::vector<PowerReportRow>& rows, double battery_mah, std::ostream& out);
void write_power_report_csv(const std::vector<PowerReportRow>& rows, std::ostream& out);
nlohmann::json power_report_json(const std::vector<PowerReportRow>& rows, double battery_mah);

/// Human-readable runtime: minutes below 1 h, hours otherwise.
std::string format_runtime(double hours);

}  // namespace edgewear::device
