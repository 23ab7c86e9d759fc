#include "edgewear/edge/stubs.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgewear/dsp/pitch.hpp"
#include "edgewear/error.hpp"
#include "edgewear/intent/classifier.hpp"

namespace edgewear::edge {

std::string_view stub_kind_name(StubKind k) {
  switch (k) {
    case StubKind::asr: return "asr";
    case StubKind::llm: return "llm";
    case StubKind::vlm: return "vlm";
    case StubKind::tts: return "tts";
    case StubKind::command: return "command";
  }
  return "?";
}

double InferenceStub::latency_for(std::string_view output) const {
  std::istringstream in{std::string(output)};
  std::size_t tokens = 0;
  for (std::string w; in >> w;) ++tokens;
  return latency.fixed_ms + latency.per_token_ms * static_cast<double>(tokens);
}

StubReply InferenceStub::lookup(std::string_view key) const {
  StubReply r;
  if (auto it = table.find(key); it != table.end()) {
    r.output = it->second.output;
    r.hit = true;
    r.latency_ms = it->second.latency_ms >= 0.0 ? it->second.latency_ms : latency_for(r.output);
    return r;
  }
  r.output = default_output;
  r.latency_ms = latency_for(r.output);
  return r;
}

namespace {

void parse_stub(const nlohmann::json& j, InferenceStub& stub, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, v] : j.items()) {
    const auto field = path + "." + key;
    if (key == "default") {
      if (!v.is_string()) throw ConfigError(field + ": expected a string");
      stub.default_output = v.get<std::string>();
    } else if (key == "latency") {
      if (!v.is_object()) throw ConfigError(field + ": expected an object");
      for (const auto& [lk, lv] : v.items()) {
        if (!lv.is_number() || lv.get<double>() < 0.0) throw ConfigError(field + "." + lk + ": expected a number >= 0");
        if (lk == "fixed_ms") {
          stub.latency.fixed_ms = lv.get<double>();
        } else if (lk == "per_token_ms") {
          stub.latency.per_token_ms = lv.get<double>();
        } else {
          throw ConfigError(field + "." + lk + ": unknown field");
        }
      }
    } else if (key == "table") {
      if (!v.is_object()) throw ConfigError(field + ": expected an object");
      for (const auto& [tk, tv] : v.items()) {
        StubEntry e;
        const auto entry = field + "." + tk;
        if (tv.is_string()) {
          e.output = tv.get<std::string>();
        } else if (tv.is_object() && tv.contains("output") && tv["output"].is_string()) {
          e.output = tv["output"].get<std::string>();
          if (tv.contains("latency_ms")) {
            if (!tv["latency_ms"].is_number() || tv["latency_ms"].get<double>() < 0.0) {
              throw ConfigError(entry + ".latency_ms: expected a number >= 0");
            }
            e.latency_ms = tv["latency_ms"].get<double>();
          }
        } else {
          throw ConfigError(entry + ": expected a string or {\"output\": ...}");
        }
        stub.table.emplace(tk, std::move(e));
      }
    } else {
      throw ConfigError(field + ": unknown field");
    }
  }
}

nlohmann::json stub_json(const InferenceStub& s) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [k, e] : s.table) {
    table[k] = {{"output", e.output}};
    if (e.latency_ms >= 0.0) table[k]["latency_ms"] = e.latency_ms;
  }
  return {{"default", s.default_output},
          {"latency", {{"fixed_ms", s.latency.fixed_ms}, {"per_token_ms", s.latency.per_token_ms}}},
          {"table", table}};
}

}  // namespace

StubSet stubs_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("stubs: expected an object");
  StubSet s;
  for (const auto& [key, v] : j.items()) {
    if (key == "asr") {
      parse_stub(v, s.asr, "stubs.asr");
    } else if (key == "llm") {
      parse_stub(v, s.llm, "stubs.llm");
    } else if (key == "vlm") {
      parse_stub(v, s.vlm, "stubs.vlm");
    } else if (key == "tts") {
      parse_stub(v, s.tts, "stubs.tts");
    } else if (key == "command") {
      parse_stub(v, s.command, "stubs.command");
    } else {
      throw ConfigError("stubs." + key + ": unknown stub kind");
    }
  }
  return s;
}

StubSet load_stubs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open stub table");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return stubs_from_json(j);
}

nlohmann::json to_json(const StubSet& s) {
  return {{"asr", stub_json(s.asr)},
          {"llm", stub_json(s.llm)},
          {"vlm", stub_json(s.vlm)},
          {"tts", stub_json(s.tts)},
          {"command", stub_json(s.command)}};
}

std::string asr_key(const audio::PcmBuffer& utterance) {
  const double hz = dsp::dominant_frequency_hz(utterance);
  if (hz <= 0.0) return "";
  return "tone:" + std::to_string(static_cast<long>(std::lround(hz / 50.0) * 50));
}

std::string text_key(std::string_view text) {
  std::string out;
  for (const auto& t : intent::tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string render_vlm_sentence(std::string_view vlm_json) {
  try {
    const auto j = nlohmann::json::parse(vlm_json);
    const auto objects = j.value("objects", std::vector<std::string>{});
    const auto scene = j.value("scene", std::string("the scene"));
    if (objects.empty()) return "I don't see anything notable in " + scene + ".";
    std::string list;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (i > 0) list += i + 1 == objects.size() ? " and " : ", ";
      list += "a " + objects[i];
    }
    return "I can see " + list + " on " + scene + ".";
  } catch (const nlohmann::json::exception&) {
    return "I couldn't make sense of the picture.";
  }
}

audio::PcmBuffer tts_synthesize(std::string_view text, int rate) {
  constexpr double kCharS = 0.06;
  audio::PcmBuffer pcm;
  pcm.sample_rate_hz = rate;
  const auto per_char = static_cast<std::size_t>(std::lround(kCharS * rate));
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (c == ' ') {
      pcm.samples.resize(pcm.samples.size() + per_char / 2, 0);
      continue;
    }
    const double f0 = 140.0 + 7.0 * static_cast<double>(u % 32);
    for (std::size_t i = 0; i < per_char; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(per_char));
      const double v = std::sin(2 * std::numbers::pi * f0 * t) + 0.5 * std::sin(2 * std::numbers::pi * 2 * f0 * t) +
                       0.3 * std::sin(2 * std::numbers::pi * 3.1 * f0 * t);
      pcm.samples.push_back(audio::clamp_to_i16(6000.0 * env * v));
    }
  }
  return pcm;
}

}  // namespace edgewear::edge
