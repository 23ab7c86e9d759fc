#include "edgewear/sim/scenario.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "edgewear/audio/wav.hpp"
#include "edgewear/edge/stubs.hpp"
#include "edgewear/kws/model_io.hpp"

namespace edgewear::sim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::session: return "session";
    case ScenarioKind::stream: return "stream";
    case ScenarioKind::power: return "power";
  }
  return "?";
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string s = "invalid scenario:";
  for (const auto& i : issues) s += "\n  " + i;
  return s;
}

/// Collects issues instead of stopping at the first one.
class Checker {
 public:
  explicit Checker(const fs::path& base) { set_base(base); }

  void issue(std::string where, std::string what) { issues_.push_back(std::move(where) + ": " + std::move(what)); }
  const std::vector<std::string>& issues() const { return issues_; }

  void known_fields(const json& j, const std::string& where, std::initializer_list<const char*> names) {
    if (!j.is_object()) return;
    std::set<std::string> ok(names.begin(), names.end());
    for (const auto& [k, _] : j.items()) {
      if (!ok.contains(k)) issue(where.empty() ? k : where + "." + k, "unknown field");
    }
  }

  template <class T>
  void number(const json& j, const char* key, const std::string& where, T& dst, bool positive = false) {
    if (!j.contains(key)) return;
    const auto path = where + "." + key;
    if (!j[key].is_number()) {
      issue(path, "expected a number");
      return;
    }
    const auto v = j[key].get<double>();
    if (positive ? !(v > 0.0) : !(v >= 0.0)) {
      issue(path, positive ? "must be > 0" : "must be >= 0");
      return;
    }
    dst = static_cast<T>(v);
  }

  std::optional<fs::path> file(const json& j, const std::string& where) {
    if (!j.is_string()) {
      issue(where, "expected a path string");
      return std::nullopt;
    }
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = base_ + p.string();
    if (!fs::exists(p)) {
      issue(where, "file not found: " + p.string());
      return std::nullopt;
    }
    return p;
  }

  /// Runs a parser that throws ConfigError and records its message.
  template <class F>
  void guarded(const std::string& rename_from, const std::string& rename_to, F&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      if (!rename_from.empty() && msg.rfind(rename_from, 0) == 0) msg = rename_to + msg.substr(rename_from.size());
      issues_.push_back(msg);
    } catch (const json::exception& e) {
      issues_.push_back(rename_to + ": " + e.what());
    }
  }

 private:
  std::string base_;
  std::vector<std::string> issues_;

  void set_base(const fs::path& b) { base_ = b.empty() ? std::string() : (b / "").string(); }
};

void parse_device(Checker& c, const json& j, device::DeviceConfig& d) {
  const std::string w = "device";
  if (!j.is_object()) {
    c.issue(w, "expected an object");
    return;
  }
  c.known_fields(j, w, {"device_id", "hard_cap_s", "response_timeout_ms", "drain_timeout_ms", "detector", "jitter",
                        "reconnect"});
  if (j.contains("device_id")) {
    if (j["device_id"].is_string()) {
      d.device_id = j["device_id"].get<std::string>();
    } else {
      c.issue(w + ".device_id", "expected a string");
    }
  }
  c.number(j, "hard_cap_s", w, d.hard_cap_s, true);
  c.number(j, "response_timeout_ms", w, d.response_timeout_ms, true);
  c.number(j, "drain_timeout_ms", w, d.drain_timeout_ms, true);
  if (j.contains("detector")) {
    const auto& dj = j["detector"];
    const auto dw = w + ".detector";
    c.known_fields(dj, dw, {"window_s", "stride_s", "threshold", "smoothing", "suppression_s"});
    c.number(dj, "window_s", dw, d.detector.window_s, true);
    c.number(dj, "stride_s", dw, d.detector.stride_s, true);
    c.number(dj, "threshold", dw, d.detector.threshold, true);
    c.number(dj, "smoothing", dw, d.detector.smoothing, true);
    c.number(dj, "suppression_s", dw, d.detector.suppression_s);
    c.guarded("", dw, [&] { d.detector.validate(); });
  }
  if (j.contains("jitter")) {
    const auto& jj = j["jitter"];
    const auto jw = w + ".jitter";
    c.known_fields(jj, jw, {"prebuffer_ms", "capacity_ms"});
    c.number(jj, "prebuffer_ms", jw, d.jitter.prebuffer_ms);
    c.number(jj, "capacity_ms", jw, d.jitter.capacity_ms, true);
    c.guarded("", jw, [&] { d.jitter.validate(); });
  }
  if (j.contains("reconnect")) {
    const auto& rj = j["reconnect"];
    const auto rw = w + ".reconnect";
    c.known_fields(rj, rw, {"initial_ms", "factor", "max_ms", "max_attempts"});
    c.number(rj, "initial_ms", rw, d.reconnect.initial_ms, true);
    c.number(rj, "factor", rw, d.reconnect.factor, true);
    c.number(rj, "max_ms", rw, d.reconnect.max_ms, true);
    c.number(rj, "max_attempts", rw, d.reconnect.max_attempts, true);
  }
}

void parse_edge(Checker& c, const json& j, edge::EdgeConfig& e) {
  const std::string w = "edge";
  if (!j.is_object()) {
    c.issue(w, "expected an object");
    return;
  }
  c.known_fields(j, w, {"threshold_dbfs", "hangover_ms", "photo_timeout_ms", "tts_rate_hz", "costs"});
  if (j.contains("threshold_dbfs")) {
    if (j["threshold_dbfs"].is_number()) {
      e.endpoint.threshold_dbfs = j["threshold_dbfs"].get<double>();
    } else {
      c.issue(w + ".threshold_dbfs", "expected a number");
    }
  }
  c.number(j, "hangover_ms", w, e.endpoint.hangover_ms, true);
  c.number(j, "photo_timeout_ms", w, e.photo_timeout_ms, true);
  c.number(j, "tts_rate_hz", w, e.tts_rate_hz, true);
  if (j.contains("costs")) {
    const auto& cj = j["costs"];
    const auto cw = w + ".costs";
    c.known_fields(cj, cw, {"decode_ms", "endpoint_ms", "route_ms", "encode_back_ms"});
    c.number(cj, "decode_ms", cw, e.costs.decode_ms);
    c.number(cj, "endpoint_ms", cw, e.costs.endpoint_ms);
    c.number(cj, "route_ms", cw, e.costs.route_ms);
    c.number(cj, "encode_back_ms", cw, e.costs.encode_back_ms);
  }
  c.guarded("", w, [&] { e.endpoint.validate(); });
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

Scenario scenario_from_json(const json& j, const fs::path& base_dir) {
  Checker c(base_dir);
  Scenario s;
  s.base_dir = base_dir;
  if (!j.is_object()) throw ScenarioError({"<root>: expected a JSON object"});
  c.known_fields(j, "", {"name", "kind", "seed", "models", "stubs", "mic", "photos", "channel", "provisioning_channel",
                         "power", "power_schedule", "device", "edge", "drops", "limit_s", "stream"});

  if (j.contains("name") && j["name"].is_string()) {
    s.name = j["name"].get<std::string>();
  } else {
    c.issue("name", "required string");
  }
  if (j.contains("kind")) {
    const auto k = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
    if (k == "session") {
      s.kind = ScenarioKind::session;
    } else if (k == "stream") {
      s.kind = ScenarioKind::stream;
    } else if (k == "power") {
      s.kind = ScenarioKind::power;
    } else {
      c.issue("kind", "expected session|stream|power");
    }
  }
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned()) {
      s.seed = j["seed"].get<uint64_t>();
    } else {
      c.issue("seed", "expected a non-negative integer");
    }
  }

  // Shared sections.
  auto channel_cfg = [&](const char* key, netsim::ChannelConfig& dst) {
    if (!j.contains(key)) return;
    c.guarded("channel", key, [&] {
      auto cj = j[key];
      if (cj.is_object() && !cj.contains("seed")) cj["seed"] = s.seed;
      dst = netsim::channel_config_from_json(cj);
    });
  };
  s.system.runtime_channel.seed = s.seed;
  channel_cfg("channel", s.system.runtime_channel);
  channel_cfg("provisioning_channel", s.system.provisioning_channel);
  if (j.contains("power")) c.guarded("power", "power", [&] { s.system.power = device::power_profile_from_json(j["power"]); });
  if (j.contains("power_schedule")) {
    c.guarded("schedule", "power_schedule", [&] { s.power_schedule = device::schedule_from_json(j["power_schedule"]); });
  }

  if (s.kind == ScenarioKind::power && s.power_schedule.empty()) c.issue("power_schedule", "required for kind power");

  if (s.kind == ScenarioKind::stream) {
    s.stream.channel = s.system.runtime_channel;
    if (!j.contains("stream")) {
      c.issue("stream", "required for kind stream");
    } else {
      const auto& sj = j["stream"];
      c.known_fields(sj, "stream", {"duration_s", "bidirectional", "tone_hz", "prebuffer_ms", "capacity_ms", "seeds"});
      c.number(sj, "duration_s", "stream", s.stream.duration_s, true);
      c.number(sj, "tone_hz", "stream", s.stream.tone_hz, true);
      c.number(sj, "prebuffer_ms", "stream", s.stream.jitter.prebuffer_ms);
      c.number(sj, "capacity_ms", "stream", s.stream.jitter.capacity_ms, true);
      if (sj.contains("bidirectional")) {
        if (sj["bidirectional"].is_boolean()) {
          s.stream.bidirectional = sj["bidirectional"].get<bool>();
        } else {
          c.issue("stream.bidirectional", "expected true or false");
        }
      }
      if (sj.contains("seeds")) {
        if (!sj["seeds"].is_array() || sj["seeds"].empty()) {
          c.issue("stream.seeds", "expected a non-empty array of integers");
        } else {
          for (std::size_t i = 0; i < sj["seeds"].size(); ++i) {
            if (sj["seeds"][i].is_number_unsigned()) {
              s.stream_seeds.push_back(sj["seeds"][i].get<uint64_t>());
            } else {
              c.issue("stream.seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            }
          }
        }
      }
      c.guarded("", "stream", [&] { s.stream.jitter.validate(); });
    }
    if (s.stream_seeds.empty()) s.stream_seeds.push_back(s.seed);
  }

  if (s.kind == ScenarioKind::session) {
    if (!j.contains("models") || !j["models"].is_object()) {
      c.issue("models", "required object with kws and intent paths");
    } else {
      const auto& mj = j["models"];
      c.known_fields(mj, "models", {"kws", "intent"});
      if (!mj.contains("kws")) c.issue("models.kws", "required");
      if (!mj.contains("intent")) c.issue("models.intent", "required");
      if (mj.contains("kws")) s.kws_model = c.file(mj["kws"], "models.kws").value_or("");
      if (mj.contains("intent")) s.intent_model = c.file(mj["intent"], "models.intent").value_or("");
    }
    if (j.contains("stubs")) s.stubs = c.file(j["stubs"], "stubs").value_or("");

    if (!j.contains("mic") || !j["mic"].is_object()) {
      c.issue("mic", "required object with a timeline");
    } else {
      const auto& mj = j["mic"];
      c.known_fields(mj, "mic", {"timeline", "noise_floor_dbfs"});
      if (mj.contains("noise_floor_dbfs")) {
        if (mj["noise_floor_dbfs"].is_number()) {
          s.noise_floor_dbfs = mj["noise_floor_dbfs"].get<double>();
        } else {
          c.issue("mic.noise_floor_dbfs", "expected a number");
        }
      }
      if (!mj.contains("timeline") || !mj["timeline"].is_array()) {
        c.issue("mic.timeline", "required array");
      } else {
        for (std::size_t i = 0; i < mj["timeline"].size(); ++i) {
          const auto& e = mj["timeline"][i];
          const auto w = "mic.timeline[" + std::to_string(i) + "]";
          c.known_fields(e, w, {"silence_s", "clip", "at_s"});
          MicClipRef r;
          if (e.contains("clip") == e.contains("silence_s")) {
            c.issue(w, "needs exactly one of clip or silence_s");
            continue;
          }
          if (e.contains("clip")) {
            r.path = c.file(e["clip"], w + ".clip").value_or("");
          } else {
            c.number(e, "silence_s", w, r.silence_s, true);
          }
          if (e.contains("at_s")) {
            double at = 0.0;
            c.number(e, "at_s", w, at);
            r.at_s = at;
          }
          s.mic.push_back(std::move(r));
        }
      }
    }
    if (j.contains("photos")) {
      if (!j["photos"].is_array()) {
        c.issue("photos", "expected an array of paths");
      } else {
        for (std::size_t i = 0; i < j["photos"].size(); ++i) {
          if (auto p = c.file(j["photos"][i], "photos[" + std::to_string(i) + "]")) s.photos.push_back(*p);
        }
      }
    }
    if (j.contains("device")) parse_device(c, j["device"], s.system.device);
    if (j.contains("edge")) parse_edge(c, j["edge"], s.system.edge);
    if (j.contains("drops")) {
      if (!j["drops"].is_array()) {
        c.issue("drops", "expected an array");
      } else {
        for (std::size_t i = 0; i < j["drops"].size(); ++i) {
          const auto& d = j["drops"][i];
          const auto w = "drops[" + std::to_string(i) + "]";
          c.known_fields(d, w, {"at_s", "duration_s"});
          double at = -1.0, dur = 0.5;
          if (!d.contains("at_s")) c.issue(w + ".at_s", "required");
          c.number(d, "at_s", w, at);
          c.number(d, "duration_s", w, dur, true);
          if (at >= 0.0) s.system.drops.push_back({at * 1000.0, dur * 1000.0});
        }
      }
    }
    c.number(j, "limit_s", "", s.system.limit_s, true);
  }

  if (!c.issues().empty()) throw ScenarioError(c.issues());
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path.string() + ": cannot open scenario"});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({path.string() + ": " + e.what()});
  }
  return scenario_from_json(j, path.parent_path());
}

device::MicTimeline load_mic_timeline(const Scenario& s) {
  device::MicTimeline t;
  t.noise_floor_dbfs = s.noise_floor_dbfs;
  t.seed = s.seed;
  for (const auto& r : s.mic) {
    device::MicEntry e;
    e.at_s = r.at_s;
    if (r.path.empty()) {
      e.kind = device::MicEntry::Kind::silence;
      e.duration_s = r.silence_s;
    } else {
      e.kind = device::MicEntry::Kind::clip;
      e.clip = audio::read_wav(r.path);
      e.name = r.path.stem().string();
    }
    t.entries.push_back(std::move(e));
  }
  return t;
}

SystemInputs load_inputs(const Scenario& s) {
  if (s.kind != ScenarioKind::session) throw ConfigError("load_inputs: not a session scenario");
  SystemInputs in;
  in.mic = device::mic_source(load_mic_timeline(s));
  for (const auto& p : s.photos) in.photos.push_back(device::load_photo(p));
  in.kws = kws::load_quantized_model(s.kws_model);
  in.intent = intent::load_intent_model(s.intent_model);
  if (!s.stubs.empty()) in.stubs = edge::load_stubs(s.stubs);
  return in;
}

}  // namespace edgewear::sim
