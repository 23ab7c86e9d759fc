#include "edgewear/netsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "edgewear/error.hpp"

namespace edgewear::netsim {

std::string_view coexistence_name(CoexistenceMode m) {
  switch (m) {
    case CoexistenceMode::off: return "off";
    case CoexistenceMode::naive: return "naive";
    case CoexistenceMode::prioritized: return "prioritized";
  }
  return "?";
}

CoexistenceMode parse_coexistence(std::string_view s) {
  if (s == "off") return CoexistenceMode::off;
  if (s == "naive") return CoexistenceMode::naive;
  if (s == "prioritized") return CoexistenceMode::prioritized;
  throw ConfigError("coexistence: expected off|naive|prioritized, got '" + std::string(s) + "'");
}

std::string_view direction_name(Direction d) {
  return d == Direction::device_to_edge ? "device_to_edge" : "edge_to_device";
}

void ChannelConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string("channel.") + name + ": must be >= 0");
  };
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("channel.") + name + ": must lie in [0, 1]");
  };
  nonneg(base_latency_ms, "base_latency_ms");
  nonneg(jitter_ms, "jitter_ms");
  nonneg(reorder_delay_ms, "reorder_delay_ms");
  nonneg(bandwidth_kbps, "bandwidth_kbps");
  prob(loss_prob, "loss_prob");
  prob(reorder_prob, "reorder_prob");
  if (!(coex.stall_period_ms > 0.0)) throw ConfigError("channel.coexistence.stall_period_ms: must be > 0");
  nonneg(coex.stall_duration_ms, "coexistence.stall_duration_ms");
  if (!(coex.stall_phase_ms >= 0.0 && coex.stall_phase_ms < coex.stall_period_ms)) {
    throw ConfigError("channel.stall_phase_ms: must lie in [0, stall_period_ms)");
  }
  if (!(coex.activity_window_ms > 0.0)) throw ConfigError("channel.coexistence.activity_window_ms: must be > 0");
}

ChannelConfig channel_config_from_json(const nlohmann::json& j) {
  ChannelConfig c;
  if (!j.is_object()) throw ConfigError("channel: expected an object");
  auto num = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(std::string("channel.") + key + ": expected a number");
    dst = j[key].get<double>();
  };
  num("base_latency_ms", c.base_latency_ms);
  num("jitter_ms", c.jitter_ms);
  num("loss_prob", c.loss_prob);
  num("reorder_prob", c.reorder_prob);
  num("reorder_delay_ms", c.reorder_delay_ms);
  num("bandwidth_kbps", c.bandwidth_kbps);
  if (j.contains("coexistence")) {
    if (!j["coexistence"].is_string()) throw ConfigError("channel.coexistence: expected a string");
    c.coexistence = parse_coexistence(j["coexistence"].get<std::string>());
  }
  if (j.contains("stall_period_ms")) num("stall_period_ms", c.coex.stall_period_ms);
  if (j.contains("stall_phase_ms")) num("stall_phase_ms", c.coex.stall_phase_ms);
  if (j.contains("stall_duration_ms")) num("stall_duration_ms", c.coex.stall_duration_ms);
  if (j.contains("activity_window_ms")) num("activity_window_ms", c.coex.activity_window_ms);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("channel.seed: expected a non-negative integer");
    c.seed = j["seed"].get<uint64_t>();
  }
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"base_latency_ms", "jitter_ms",         "loss_prob",         "reorder_prob",
                                  "reorder_delay_ms", "bandwidth_kbps",   "coexistence",       "stall_period_ms",
                                  "stall_phase_ms", "stall_duration_ms", "activity_window_ms", "seed"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
      throw ConfigError("channel." + key + ": unknown field");
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ChannelConfig& c) {
  return {{"base_latency_ms", c.base_latency_ms},
          {"jitter_ms", c.jitter_ms},
          {"loss_prob", c.loss_prob},
          {"reorder_prob", c.reorder_prob},
          {"reorder_delay_ms", c.reorder_delay_ms},
          {"bandwidth_kbps", c.bandwidth_kbps},
          {"coexistence", std::string(coexistence_name(c.coexistence))},
          {"stall_period_ms", c.coex.stall_period_ms},
          {"stall_phase_ms", c.coex.stall_phase_ms},
          {"stall_duration_ms", c.coex.stall_duration_ms},
          {"activity_window_ms", c.coex.activity_window_ms},
          {"seed", c.seed}};
}

TraceStats DeliveryTrace::stats() const {
  TraceStats s;
  double sum = 0.0;
  for (const auto& r : records) {
    ++s.sent;
    if (r.stall_ms > 0.0) ++s.stalled;
    if (!r.deliver_ms) {
      ++s.dropped;
      continue;
    }
    ++s.delivered;
    const double lat = *r.deliver_ms - r.send_ms;
    sum += lat;
    s.max_latency_ms = std::max(s.max_latency_ms, lat);
  }
  if (s.delivered) s.mean_latency_ms = sum / static_cast<double>(s.delivered);
  return s;
}

void DeliveryTrace::write_csv(std::ostream& out) const {
  out << "frame_id,direction,bytes,send_ms,deliver_ms,dropped,stall_ms\n";
  for (const auto& r : records) {
    out << r.frame_id << ',' << direction_name(r.direction) << ',' << r.bytes << ',' << r.send_ms << ',';
    if (r.deliver_ms) out << *r.deliver_ms;
    out << ',' << (r.deliver_ms ? 0 : 1) << ',' << r.stall_ms << '\n';
  }
}

Channel::Channel(ChannelConfig cfg) : cfg_(cfg), rng_(cfg.seed) { cfg_.validate(); }

bool Channel::stalls_enabled() const {
  switch (cfg_.coexistence) {
    case CoexistenceMode::off: return false;
    case CoexistenceMode::naive: return true;
    case CoexistenceMode::prioritized: return provisioning_active_;
  }
  return false;
}

double Channel::release_after_stall(double t_ms) {
  if (!stalls_enabled() || cfg_.coex.stall_duration_ms <= 0.0) return t_ms;
  std::size_t active = 0;
  for (const auto& last : last_send_ms_) {
    if (last && t_ms - *last <= cfg_.coex.activity_window_ms) ++active;
  }
  const double stall = cfg_.coex.stall_duration_ms * static_cast<double>(std::max<std::size_t>(active, 1));
  const double period = cfg_.coex.stall_period_ms;
  const double phase = cfg_.coex.stall_phase_ms;
  const double start = std::floor((t_ms - phase) / period) * period + phase;
  return t_ms < start + stall ? start + stall : t_ms;
}

std::optional<double> Channel::send(std::size_t bytes, double t_now_ms, Direction dir) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u_loss = u(rng_);
  const double u_jitter = u(rng_);
  const double u_reorder = u(rng_);

  const auto d = static_cast<std::size_t>(dir);
  last_send_ms_[d] = t_now_ms;

  Delivery rec;
  rec.frame_id = next_id_++;
  rec.direction = dir;
  rec.bytes = bytes;
  rec.send_ms = t_now_ms;

  if (u_loss < cfg_.loss_prob) {
    trace_.records.push_back(rec);
    return std::nullopt;
  }
  const double tx_start = release_after_stall(std::max(t_now_ms, link_free_ms_[d]));
  rec.stall_ms = tx_start - t_now_ms;
  const double serialization = cfg_.bandwidth_kbps > 0.0 ? static_cast<double>(bytes) * 8.0 / cfg_.bandwidth_kbps : 0.0;
  link_free_ms_[d] = tx_start + serialization;

  double deliver = tx_start + serialization + cfg_.base_latency_ms + u_jitter * cfg_.jitter_ms;
  if (u_reorder < cfg_.reorder_prob) deliver += cfg_.reorder_delay_ms;
  rec.deliver_ms = deliver;
  trace_.records.push_back(rec);
  return deliver;
}

}  // namespace edgewear::netsim
