#include "edgewear/device/power.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "edgewear/error.hpp"

namespace edgewear::device {

namespace {

constexpr double kAllDayBudgetMa = 8.0;

std::size_t idx(DeviceState s) { return static_cast<std::size_t>(s); }

}  // namespace

std::string_view device_state_name(DeviceState s) {
  switch (s) {
    case DeviceState::DeepSleep: return "DeepSleep";
    case DeviceState::LightSleep: return "LightSleep";
    case DeviceState::BaselineListening: return "BaselineListening";
    case DeviceState::ActiveQuery: return "ActiveQuery";
    case DeviceState::PlayingResponse: return "PlayingResponse";
  }
  return "?";
}

DeviceState parse_device_state(std::string_view s) {
  for (auto st : kAllDeviceStates) {
    if (device_state_name(st) == s) return st;
  }
  throw ConfigError("unknown device state '" + std::string(s) + "'");
}

double PowerProfile::current_ma(DeviceState s) const {
  switch (s) {
    case DeviceState::DeepSleep: return deep_sleep_ma;
    case DeviceState::LightSleep: return light_sleep_ma;
    case DeviceState::BaselineListening: return baseline_listening_ma;
    case DeviceState::ActiveQuery: return active_query_ma;
    case DeviceState::PlayingResponse: return baseline_listening_ma + playback_extra_ma;
  }
  return 0.0;
}

void PowerProfile::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("power.") + name + ": must be > 0");
  };
  pos(deep_sleep_ma, "deep_sleep_ma");
  pos(light_sleep_ma, "light_sleep_ma");
  pos(modem_sleep_ma, "modem_sleep_ma");
  pos(baseline_listening_ma, "baseline_listening_ma");
  pos(active_query_ma, "active_query_ma");
  pos(playback_extra_ma, "playback_extra_ma");
  if (!(battery_mah >= 0.0) || !std::isfinite(battery_mah)) throw ConfigError("power.battery_mah: must be >= 0");
}

PowerProfile power_profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("power: expected an object");
  PowerProfile p;
  const std::pair<const char*, double*> fields[] = {
      {"deep_sleep_ma", &p.deep_sleep_ma},           {"light_sleep_ma", &p.light_sleep_ma},
      {"modem_sleep_ma", &p.modem_sleep_ma},         {"baseline_listening_ma", &p.baseline_listening_ma},
      {"active_query_ma", &p.active_query_ma},       {"playback_extra_ma", &p.playback_extra_ma},
      {"battery_mah", &p.battery_mah}};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const auto& [name, dst] : fields) {
      if (key != name) continue;
      if (!j[key].is_number()) throw ConfigError("power." + key + ": expected a number");
      *dst = j[key].get<double>();
      known = true;
    }
    if (!known) throw ConfigError("power." + key + ": unknown field");
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const PowerProfile& p) {
  return {{"deep_sleep_ma", p.deep_sleep_ma},
          {"light_sleep_ma", p.light_sleep_ma},
          {"modem_sleep_ma", p.modem_sleep_ma},
          {"baseline_listening_ma", p.baseline_listening_ma},
          {"active_query_ma", p.active_query_ma},
          {"playback_extra_ma", p.playback_extra_ma},
          {"battery_mah", p.battery_mah}};
}

double EnergyLedger::consumed_total_mah() const {
  double s = 0.0;
  for (double v : consumed_mah) s += v;
  return s;
}

EnergyMeter::EnergyMeter(PowerProfile profile, DeviceState initial, double t0_s)
    : profile_(profile), state_(initial), t_s_(t0_s) {
  profile_.validate();
  ledger_.capacity_mah = profile_.battery_mah;
  ledger_.remaining_mah = profile_.battery_mah;
  ledger_.depleted = profile_.battery_mah <= 0.0;
  ledger_.timeline.push_back({t0_s, initial, ledger_.remaining_mah});
}

void EnergyMeter::advance(double t_s) {
  if (t_s <= t_s_) return;
  const double dt = t_s - t_s_;
  t_s_ = t_s;
  if (ledger_.depleted) return;
  const double current = profile_.current_ma(state_);
  double used = current * dt / 3600.0;
  double spent_s = dt;
  if (used >= ledger_.remaining_mah) {
    used = ledger_.remaining_mah;
    spent_s = used / current * 3600.0;
    ledger_.depleted = true;
  }
  ledger_.consumed_mah[idx(state_)] += used;
  ledger_.time_s[idx(state_)] += spent_s;
  ledger_.elapsed_s += spent_s;
  ledger_.remaining_mah = ledger_.depleted ? 0.0 : ledger_.capacity_mah - ledger_.consumed_total_mah();
}

void EnergyMeter::set_state(double t_s, DeviceState s) {
  advance(t_s);
  if (s == state_) return;
  state_ = s;
  ledger_.timeline.push_back({t_s, s, ledger_.remaining_mah});
}

double runtime_to_empty_h(double capacity_mah, double current_ma) {
  if (capacity_mah <= 0.0) return 0.0;
  if (current_ma <= 0.0) return std::numeric_limits<double>::infinity();
  return capacity_mah / current_ma;
}

PowerSimulation simulate_power(const PowerProfile& profile, const std::vector<ScheduleEntry>& schedule) {
  profile.validate();
  double charge = 0.0, total_s = 0.0;
  for (const auto& e : schedule) {
    if (!(e.duration_s > 0.0)) throw ConfigError("schedule: durations must be positive");
    charge += profile.current_ma(e.state) * e.duration_s;
    total_s += e.duration_s;
  }
  PowerSimulation sim;
  EnergyMeter meter(profile, schedule.empty() ? DeviceState::BaselineListening : schedule.front().state);
  double t = 0.0;
  for (const auto& e : schedule) {
    meter.set_state(t, e.state);
    t += e.duration_s;
    meter.advance(t);
    if (meter.ledger().depleted) break;
  }
  sim.ledger = meter.ledger();
  sim.average_current_ma = total_s > 0.0 ? charge / total_s : 0.0;
  sim.runtime_to_empty_h = total_s > 0.0 ? runtime_to_empty_h(profile.battery_mah, sim.average_current_ma) : 0.0;
  return sim;
}

std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("schedule: expected an array");
  std::vector<ScheduleEntry> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto where = "schedule[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("state") || !e["state"].is_string()) {
      throw ConfigError(where + ".state: expected a state name");
    }
    if (!e.contains("duration_s") || !e["duration_s"].is_number()) {
      throw ConfigError(where + ".duration_s: expected a number");
    }
    ScheduleEntry s;
    try {
      s.state = parse_device_state(e["state"].get<std::string>());
    } catch (const ConfigError& err) {
      throw ConfigError(where + ".state: " + err.what());
    }
    s.duration_s = e["duration_s"].get<double>();
    if (!(s.duration_s > 0.0)) throw ConfigError(where + ".duration_s: must be positive");
    out.push_back(s);
  }
  return out;
}

std::vector<PowerReportRow> power_report(const PowerProfile& profile, const std::vector<ScheduleEntry>& schedule) {
  profile.validate();
  auto row = [&](std::string name, std::string comp, double ma) {
    return PowerReportRow{std::move(name), std::move(comp), ma, runtime_to_empty_h(profile.battery_mah, ma)};
  };
  std::vector<PowerReportRow> rows{
      row("Baseline (listening for wake word)", "MCU in modem-sleep, mic + MFCC armed, BLE low duty, amp standby",
          profile.baseline_listening_ma),
      row("Active query burst", "Wi-Fi TX/RX, camera, mic streaming, amp playback, control logic",
          profile.active_query_ma),
      row("Playing response", "baseline listening + amplifier playback", profile.current_ma(DeviceState::PlayingResponse)),
      row("Modem sleep", "radio ready, no traffic", profile.modem_sleep_ma),
      row("Light sleep", "MCU light sleep", profile.light_sleep_ma),
      row("Deep sleep", "MCU deep sleep", profile.deep_sleep_ma),
      row("All-day budget", "24 h average ceiling", kAllDayBudgetMa),
  };
  if (!schedule.empty()) {
    const auto sim = simulate_power(profile, schedule);
    rows.push_back({"Schedule average", "repeating the supplied schedule", sim.average_current_ma,
                    sim.runtime_to_empty_h});
  }
  return rows;
}

std::string format_runtime(double hours) {
  char buf[64];
  if (!std::isfinite(hours)) return "unbounded";
  if (hours < 1.0) {
    std::snprintf(buf, sizeof buf, "%.1f min", hours * 60.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f h", hours);
  }
  return buf;
}

void write_power_report_text(const std::vector<PowerReportRow>& rows, double battery_mah, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "Battery: %.0f mAh\n%-36s %12s %14s\n", battery_mah, "Scenario", "Current", "Runtime");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-36s %9.2f mA %14s\n", r.scenario.c_str(), r.current_ma,
                  format_runtime(r.runtime_h).c_str());
    out << buf;
  }
}

void write_power_report_csv(const std::vector<PowerReportRow>& rows, std::ostream& out) {
  out << "scenario,components,current_ma,runtime_h,runtime_min\n";
  for (const auto& r : rows) {
    out << '"' << r.scenario << "\",\"" << r.components << "\"," << r.current_ma << ',' << r.runtime_h << ','
        << r.runtime_h * 60.0 << '\n';
  }
}

nlohmann::json power_report_json(const std::vector<PowerReportRow>& rows, double battery_mah) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"components", r.components},
                   {"current_ma", r.current_ma},
                   {"runtime_h", std::isfinite(r.runtime_h) ? nlohmann::json(r.runtime_h) : nlohmann::json(nullptr)}});
  }
  return {{"battery_mah", battery_mah}, {"rows", arr}};
}

}  // namespace edgewear::device
