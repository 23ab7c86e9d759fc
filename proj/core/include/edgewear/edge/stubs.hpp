#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::edge {

enum class StubKind : uint8_t { asr, llm, vlm, tts, command };

std::string_view stub_kind_name(StubKind k);

struct StubEntry {
  std::string output;
  /// Overrides the latency model for this entry when set (>= 0).
  double latency_ms = -1.0;
};

/// latency = fixed_ms + per_token_ms * (whitespace tokens in the output)
struct LatencyModel {
  double fixed_ms = 0.0;
  double per_token_ms = 0.0;
};

struct StubReply {
  std::string output;
  double latency_ms = 0.0;
  bool hit = false;
};

/// Deterministic table lookup standing in for a model.
struct InferenceStub {
  StubKind kind = StubKind::llm;
  std::map<std::string, StubEntry, std::less<>> table;
  std::string default_output;
  LatencyModel latency;

  StubReply lookup(std::string_view key) const;
  double latency_for(std::string_view output) const;
};

struct StubSet {
  InferenceStub asr{StubKind::asr, {}, "", {400.0, 0.0}};
  InferenceStub llm{StubKind::llm, {}, "I'm not sure about that.", {1500.0, 0.0}};
  InferenceStub vlm{StubKind::vlm, {}, R"({"objects": [], "scene": "the scene"})", {1500.0, 0.0}};
  InferenceStub tts{StubKind::tts, {}, "", {300.0, 0.0}};
  InferenceStub command{StubKind::command, {}, "none|Sorry, I can't do that.", {50.0, 0.0}};
};

/// {"asr": {"latency": {"fixed_ms": 400}, "default": "", "table": {key: {"output": ..., "latency_ms": ...}}}, ...}
/// Missing sections keep their defaults. Throws ConfigError with the field path.
StubSet stubs_from_json(const nlohmann::json& j);
StubSet load_stubs(const std::filesystem::path& path);
nlohmann::json to_json(const StubSet& s);

/// Transcript lookup key for the ASR stub: "tone:<dominant Hz rounded to 50>",
/// or "" for silence.
std::string asr_key(const audio::PcmBuffer& utterance);

/// Normalized LLM / command key: lowercase tokens joined by single spaces.
std::string text_key(std::string_view text);

/// Renders the VLM stub's JSON ({"objects": [...], "scene": "..."}) as one
/// sentence. Malformed JSON yields a generic sentence.
std::string render_vlm_sentence(std::string_view vlm_json);

/// Speech proxy: one harmonic tone per character (spaces are short gaps),
/// 60 ms each, at `rate`. Duration is proportional to text length.
audio::PcmBuffer tts_synthesize(std::string_view text, int rate = 22050);

}  // namespace edgewear::edge
