#include "edgewear/edge/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/audio/resample.hpp"
#include "edgewear/error.hpp"
#include "edgewear/wire/payload.hpp"

namespace edgewear::edge {

using wire::ChannelKind;
using wire::Frame;
using wire::FrameType;

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::decode: return "decode";
    case Stage::endpoint: return "endpoint";
    case Stage::asr: return "asr";
    case Stage::route: return "route";
    case Stage::inference: return "inference";
    case Stage::tts: return "tts";
    case Stage::encode_back: return "encode_back";
  }
  return "?";
}

double QueryRecord::stage_sum_ms() const {
  double s = 0.0;
  for (const auto& st : stages) s += st.duration_ms();
  return s;
}

nlohmann::json to_json(const QueryRecord& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", std::string(stage_name(s.stage))},
                      {"t_start_ms", s.t_start_ms},
                      {"t_end_ms", s.t_end_ms},
                      {"summary", s.summary}});
  }
  nlohmann::json j = {{"id", r.id},
                      {"boundary_ms", r.boundary_ms},
                      {"empty_utterance", r.empty_utterance},
                      {"asr_key", r.asr_key},
                      {"transcript", r.transcript},
                      {"intent", std::string(intent::intent_name(r.intent))},
                      {"confidence", r.confidence},
                      {"pathway", std::string(intent::pathway_name(r.pathway))},
                      {"response_text", r.response_text},
                      {"photo_ref", r.photo_ref ? nlohmann::json(*r.photo_ref) : nlohmann::json(nullptr)},
                      {"device_command", r.device_command ? nlohmann::json(*r.device_command) : nlohmann::json(nullptr)},
                      {"error", r.error},
                      {"stages", stages},
                      {"response_wait_ms", r.response_wait_ms},
                      {"transport_ms", r.transport_ms},
                      {"end_to_end_ms", r.end_to_end_ms},
                      {"response_chunks", r.response_chunks},
                      {"response_audio_s", r.response_audio_s}};
  return j;
}

QueryLog::QueryLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*out_) throw InputError(path.string() + ": cannot open query log");
}

void QueryLog::append(const QueryRecord& r) {
  records_.push_back(r);
  if (out_) *out_ << to_json(r).dump() << '\n' << std::flush;
}

struct EdgeService::Query {
  QueryRecord rec;
  audio::PcmBuffer utterance;
  double inference_start_ms = -1.0;
  bool waiting_photo = false;
  netsim::Scheduler::EventId photo_timer = 0;
  std::vector<wire::AudioChunk> response;
  double encode_done_ms = -1.0;
  bool streaming = false;
};

EdgeService::EdgeService(netsim::Scheduler& sched, EdgeConfig cfg, StubSet stubs, intent::Router router, SendFn send,
                         QueryLog* log)
    : sched_(sched),
      cfg_(cfg),
      stubs_(std::move(stubs)),
      router_(std::move(router)),
      send_(std::move(send)),
      log_(log),
      endpoint_(cfg.endpoint) {}

void EdgeService::log(const std::string& event, const nlohmann::json& fields) {
  if (logger_) logger_(event, fields);
}

void EdgeService::apply(const wire::SessionEvent& e, bool outgoing) {
  const auto before = session_.state;
  auto out = wire::session_step(session_, e);
  session_ = out.session;
  if (session_.state != before) {
    log("session", {{"from", std::string(wire::session_state_name(before))},
                    {"to", std::string(wire::session_state_name(session_.state))}});
  }
  if (outgoing) {
    if (!out.accepted) log("illegal_send", {{"state", std::string(wire::session_state_name(before))}});
    return;
  }
  for (auto& a : out.actions) {
    if (a.kind == wire::SessionAction::Kind::send_frame) {
      a.frame.seq = ctrl_seq_++;
      send_frame(std::move(a.frame), a.channel);
    }
  }
}

void EdgeService::send_frame(Frame f, ChannelKind ch) {
  apply(wire::FrameEvent{ch, f}, true);
  send_(f, ch);
}

void EdgeService::provision(const wire::Credentials& creds) {
  send_frame(Frame{FrameType::PROVISION, ctrl_seq_++, wire::encode_credentials(creds)}, ChannelKind::provisioning);
}

void EdgeService::reset_utterance() {
  endpoint_.reset();
  utterance_.clear();
  pipeline_started_ = false;
  eou_received_ = false;
  photo_.reset();
}

void EdgeService::on_channel_drop() {
  apply(wire::ChannelDrop{}, false);
  if (active_) log("query_abandoned", {{"id", active_->rec.id}});
  active_.reset();
  reset_utterance();
}

void EdgeService::on_frame(const Frame& f, ChannelKind channel) {
  const auto before = session_.state;
  auto out = wire::session_step(session_, wire::FrameEvent{channel, f});
  if (!out.accepted) {
    log("rejected", {{"type", std::string(wire::frame_type_name(f.type))},
                     {"state", std::string(wire::session_state_name(before))}});
    apply(wire::FrameEvent{channel, f}, false);
    return;
  }
  apply(wire::FrameEvent{channel, f}, false);
  if (channel != ChannelKind::runtime) return;

  switch (f.type) {
    case FrameType::HELLO:
      reset_utterance();
      active_.reset();
      break;
    case FrameType::AUDIO_CHUNK: {
      if (pipeline_started_) break;
      const auto block = wire::decode_audio_payload(f.payload);
      const auto pcm = audio::adpcm_decode_block(block);
      utterance_.insert(utterance_.end(), pcm.begin(), pcm.end());
      if (auto ep = endpoint_.push(pcm)) begin_pipeline(sched_.now_ms(), ep);
      break;
    }
    case FrameType::END_OF_UTTERANCE:
      eou_received_ = true;
      if (!pipeline_started_) {
        begin_pipeline(sched_.now_ms(), std::nullopt);
      } else if (active_ && active_->encode_done_ms >= 0.0 && !active_->streaming) {
        start_streaming(active_);
      }
      break;
    case FrameType::PHOTO_META:
      photo_ = Photo{wire::decode_photo_meta(f.payload), {}};
      log("photo_meta", {{"name", photo_->meta.name}, {"bytes", photo_->meta.total_bytes}});
      break;
    case FrameType::PHOTO_DATA: {
      if (!photo_) break;
      const auto d = wire::decode_photo_data(f.payload);
      if (d.photo_id != photo_->meta.photo_id) break;
      if (photo_->bytes.size() < d.offset + d.bytes.size()) photo_->bytes.resize(d.offset + d.bytes.size());
      std::copy(d.bytes.begin(), d.bytes.end(), photo_->bytes.begin() + d.offset);
      if (photo_->complete() && active_ && active_->waiting_photo) {
        active_->waiting_photo = false;
        sched_.cancel(active_->photo_timer);
        run_inference(active_);
      }
      break;
    }
    case FrameType::ERROR:
      log("peer_error", {{"message", wire::decode_error(f.payload).message}});
      break;
    default:
      break;
  }
}

void EdgeService::begin_pipeline(double boundary_ms, std::optional<EndpointEvent> ep) {
  pipeline_started_ = true;
  auto q = std::make_shared<Query>();
  active_ = q;
  q->rec.id = next_query_id_++;
  q->rec.boundary_ms = boundary_ms;
  if (ep) {
    send_frame(Frame{FrameType::CONTROL, ctrl_seq_++, wire::encode_control({wire::ControlCode::endpoint, ""})},
               ChannelKind::runtime);
  }
  log("boundary", {{"id", q->rec.id}, {"t_ms", boundary_ms}, {"by", ep ? "endpoint" : "end_of_utterance"}});

  // Speech region of what was received.
  const auto span = endpoint_.speech_span_ms();
  q->rec.empty_utterance = !span.has_value();
  q->utterance.sample_rate_hz = audio::kCanonicalRateHz;
  if (span) {
    const auto a = static_cast<std::size_t>(span->first * audio::kCanonicalRateHz / 1000.0);
    const auto b = std::min(utterance_.size(), static_cast<std::size_t>(span->second * audio::kCanonicalRateHz / 1000.0));
    if (a < b) q->utterance.samples.assign(utterance_.begin() + static_cast<long>(a), utterance_.begin() + static_cast<long>(b));
  }

  auto& stages = q->rec.stages;
  double t = boundary_ms;
  auto add = [&](Stage s, double dur, std::string summary) {
    stages.push_back({s, t, t + dur, std::move(summary)});
    t += dur;
  };
  add(Stage::decode, cfg_.costs.decode_ms, std::to_string(utterance_.size()) + " samples");
  add(Stage::endpoint, cfg_.costs.endpoint_ms,
      span ? "speech " + std::to_string(static_cast<long>(span->first)) + "-" + std::to_string(static_cast<long>(span->second)) + " ms"
           : "empty");

  q->rec.asr_key = q->rec.empty_utterance ? "" : asr_key(q->utterance);
  const auto asr = q->rec.asr_key.empty() ? StubReply{"", stubs_.asr.latency_for(""), false} : stubs_.asr.lookup(q->rec.asr_key);
  q->rec.transcript = asr.output;
  add(Stage::asr, asr.latency_ms, q->rec.asr_key + " -> \"" + asr.output + "\"");

  if (!q->rec.transcript.empty()) {
    const auto d = router_.handle(q->rec.transcript);
    q->rec.intent = d.intent;
    q->rec.confidence = d.confidence;
    q->rec.pathway = d.pathway;
  }
  add(Stage::route, cfg_.costs.route_ms,
      std::string(intent::intent_name(q->rec.intent)) + " / " + std::string(intent::pathway_name(q->rec.pathway)));

  sched_.at(t, [this, q] { run_inference(q); });
}

void EdgeService::run_inference(std::shared_ptr<Query> q) {
  if (q != active_) return;
  if (q->inference_start_ms < 0.0) q->inference_start_ms = sched_.now_ms();

  if (q->rec.transcript.empty()) {
    finish_inference(q, "I didn't catch that.", 0.0, "fallback");
    return;
  }
  switch (q->rec.pathway) {
    case intent::Pathway::device_command: {
      const auto r = stubs_.command.lookup(text_key(q->rec.transcript));
      const auto bar = r.output.find('|');
      const auto cmd = r.output.substr(0, bar);
      const auto confirm = bar == std::string::npos ? std::string("Done.") : r.output.substr(bar + 1);
      q->rec.device_command = cmd;
      send_frame(Frame{FrameType::CONTROL, ctrl_seq_++, wire::encode_control({wire::ControlCode::device_command, cmd})},
                 ChannelKind::runtime);
      finish_inference(q, confirm, r.latency_ms, "command " + cmd);
      return;
    }
    case intent::Pathway::visual_pipeline: {
      if (!photo_ || !photo_->complete()) {
        if (q->waiting_photo) return;
        q->waiting_photo = true;
        send_frame(Frame{FrameType::CONTROL, ctrl_seq_++, wire::encode_control({wire::ControlCode::capture_photo, ""})},
                   ChannelKind::runtime);
        q->photo_timer = sched_.after(cfg_.photo_timeout_ms, [this, q] {
          if (q != active_ || !q->waiting_photo) return;
          q->waiting_photo = false;
          q->rec.error = true;
          finish_inference(q, "Sorry, I couldn't get a photo.", 0.0, "photo timeout");
        });
        return;
      }
      q->rec.photo_ref = photo_->meta.name;
      const auto r = stubs_.vlm.lookup(photo_->meta.name);
      finish_inference(q, render_vlm_sentence(r.output), r.latency_ms, "vlm " + photo_->meta.name);
      return;
    }
    case intent::Pathway::conversational_pipeline: {
      const auto r = stubs_.llm.lookup(text_key(q->rec.transcript));
      finish_inference(q, r.output, r.latency_ms, r.hit ? "llm" : "llm default");
      return;
    }
  }
}

void EdgeService::finish_inference(std::shared_ptr<Query> q, std::string text, double latency_ms, std::string summary) {
  sched_.after(latency_ms, [this, q, text = std::move(text), summary = std::move(summary)] {
    if (q != active_) return;
    double t = sched_.now_ms();
    q->rec.stages.push_back({Stage::inference, q->inference_start_ms, t, summary});
    q->rec.response_text = text;

    const auto tts = stubs_.tts.lookup(text_key(text));
    const auto speech = tts_synthesize(text, cfg_.tts_rate_hz);
    q->rec.stages.push_back({Stage::tts, t, t + tts.latency_ms,
                             std::to_string(speech.samples.size()) + " samples @ " + std::to_string(speech.sample_rate_hz)});
    t += tts.latency_ms;

    const auto pcm16 = audio::resample(speech, audio::kCanonicalRateHz);
    q->response = wire::chunk_audio(pcm16, 0);
    q->rec.response_chunks = q->response.size();
    q->rec.response_audio_s = pcm16.duration_s();
    q->rec.stages.push_back({Stage::encode_back, t, t + cfg_.costs.encode_back_ms,
                             std::to_string(q->response.size()) + " chunks"});
    t += cfg_.costs.encode_back_ms;
    sched_.at(t, [this, q] {
      if (q != active_) return;
      q->encode_done_ms = sched_.now_ms();
      if (eou_received_) start_streaming(q);
    });
  });
}

void EdgeService::start_streaming(std::shared_ptr<Query> q) {
  q->streaming = true;
  stream_next(q, 0);
}

void EdgeService::stream_next(std::shared_ptr<Query> q, std::size_t i) {
  if (q != active_) return;
  const double now = sched_.now_ms();
  if (i < q->response.size()) {
    const auto f = wire::audio_frame(FrameType::RESPONSE_AUDIO, q->response[i]);
    apply(wire::FrameEvent{ChannelKind::runtime, f}, true);
    const auto delivered = send_(f, ChannelKind::runtime);
    if (delivered && q->rec.first_response_deliver_ms < 0.0) {
      q->rec.first_response_send_ms = now;
      q->rec.first_response_deliver_ms = *delivered;
      q->rec.transport_ms = *delivered - now;
      q->rec.end_to_end_ms = *delivered - q->rec.boundary_ms;
      q->rec.response_wait_ms = now - q->encode_done_ms;
    }
    sched_.after(cfg_.chunk_interval_ms, [this, q, i] { stream_next(q, i + 1); });
    return;
  }
  send_frame(Frame{FrameType::END_OF_RESPONSE, ctrl_seq_++, {}}, ChannelKind::runtime);
  records_.push_back(q->rec);
  if (log_) log_->append(q->rec);
  log("query_done", to_json(q->rec));
  active_.reset();
  reset_utterance();
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw InputError("percentile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

Percentiles summarize(const std::vector<double>& v) {
  Percentiles p;
  p.p50 = percentile(v, 0.5);
  p.p90 = percentile(v, 0.9);
  p.max = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  p.mean = s / static_cast<double>(v.size());
  return p;
}

LatencyReport measure_latency(std::span<const QueryRecord> records) {
  std::array<std::vector<double>, kNumStages> stage_vals;
  std::vector<double> e2e, transport;
  LatencyReport rep;
  for (const auto& r : records) {
    if (r.end_to_end_ms < 0.0) continue;
    for (const auto& s : r.stages) stage_vals[static_cast<std::size_t>(s.stage)].push_back(s.duration_ms());
    e2e.push_back(r.end_to_end_ms);
    transport.push_back(r.transport_ms);
    const double predicted = r.stage_sum_ms() + r.transport_ms;
    const double err = r.end_to_end_ms > 0.0 ? std::abs(r.end_to_end_ms - predicted) / r.end_to_end_ms
                                             : std::abs(r.end_to_end_ms - predicted);
    rep.max_additivity_error = std::max(rep.max_additivity_error, err);
  }
  if (e2e.empty()) throw InputError("measure_latency: no completed queries");
  rep.count = e2e.size();
  for (std::size_t i = 0; i < kNumStages; ++i) {
    if (!stage_vals[i].empty()) rep.stages[i] = summarize(stage_vals[i]);
  }
  rep.end_to_end = summarize(e2e);
  rep.transport = summarize(transport);
  return rep;
}

void LatencyReport::write_csv(std::ostream& out) const {
  out << "component,p50_ms,p90_ms,max_ms,mean_ms\n";
  auto row = [&](std::string_view name, const Percentiles& p) {
    out << name << ',' << p.p50 << ',' << p.p90 << ',' << p.max << ',' << p.mean << '\n';
  };
  for (auto s : kAllStages) row(stage_name(s), stages[static_cast<std::size_t>(s)]);
  row("transport", transport);
  row("end_to_end", end_to_end);
}

void LatencyReport::write_summary(std::ostream& out) const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "queries: %zu\n%-12s %10s %10s %10s\n", count, "component", "p50 ms", "p90 ms", "max ms");
  out << buf;
  auto row = [&](std::string_view name, const Percentiles& p) {
    std::snprintf(buf, sizeof buf, "%-12.*s %10.1f %10.1f %10.1f\n", static_cast<int>(name.size()), name.data(), p.p50,
                  p.p90, p.max);
    out << buf;
  };
  for (auto s : kAllStages) row(stage_name(s), stages[static_cast<std::size_t>(s)]);
  row("transport", transport);
  row("end_to_end", end_to_end);
  std::snprintf(buf, sizeof buf, "additivity error (max): %.4f%%\n", 100.0 * max_additivity_error);
  out << buf;
}

nlohmann::json LatencyReport::to_json() const {
  auto pj = [](const Percentiles& p) {
    return nlohmann::json{{"p50_ms", p.p50}, {"p90_ms", p.p90}, {"max_ms", p.max}, {"mean_ms", p.mean}};
  };
  nlohmann::json st = nlohmann::json::object();
  for (auto s : kAllStages) st[std::string(stage_name(s))] = pj(stages[static_cast<std::size_t>(s)]);
  return {{"count", count},
          {"stages", st},
          {"transport", pj(transport)},
          {"end_to_end", pj(end_to_end)},
          {"max_additivity_error", max_additivity_error}};
}

}  // namespace edgewear::edge
