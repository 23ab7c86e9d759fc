#include "edgewear/device/device.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/error.hpp"
#include "edgewear/wire/payload.hpp"

namespace edgewear::device {

using wire::ChannelKind;
using wire::Frame;
using wire::FrameType;

namespace {

constexpr std::size_t kPhotoPiece = 60000;

std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> std::ws && in.peek() == '#') {
    std::string line;
    std::getline(in, line);
  }
  in >> tok;
  return tok;
}

}  // namespace

Photo load_photo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open photo");
  if (next_token(in) != "P6") throw FormatError(path.string() + ": not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": bad PPM header");
  }
  if (w <= 0 || h <= 0 || w > 65535 || h > 65535 || maxval != 255) {
    throw FormatError(path.string() + ": unsupported PPM geometry");
  }
  in.get();
  Photo p;
  p.name = path.stem().string();
  p.width = static_cast<uint16_t>(w);
  p.height = static_cast<uint16_t>(h);
  p.bytes.assign(std::istreambuf_iterator<char>(in), {});
  if (p.bytes.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3) {
    throw FormatError(path.string() + ": truncated PPM pixel data");
  }
  return p;
}

void save_photo_ppm(const std::filesystem::path& path, uint16_t width, uint16_t height,
                    const std::vector<uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw InputError("save_photo_ppm: size mismatch");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw InputError(path.string() + ": write failed");
}

nlohmann::json to_json(const DeviceEvent& e) {
  nlohmann::json j = {{"t_ms", e.t_ms}, {"source", "device"}, {"event", e.event}};
  for (const auto& [k, v] : e.fields.items()) j[k] = v;
  return j;
}

Device::Device(netsim::Scheduler& sched, DeviceConfig cfg, const kws::QuantizedKwsModel& kws, audio::PcmBuffer mic,
               std::vector<Photo> photos, PowerProfile power, SendFn send, LinkUpFn link_up)
    : sched_(sched),
      cfg_(std::move(cfg)),
      detector_(kws, cfg_.detector),
      mic_(std::move(mic)),
      photos_(std::move(photos)),
      send_(std::move(send)),
      link_up_(std::move(link_up)),
      meter_(power, DeviceState::BaselineListening, sched.now_ms() / 1000.0) {
  if (mic_.sample_rate_hz != audio::kCanonicalRateHz || mic_.channels != 1) {
    throw InputError("device mic stream must be 16 kHz mono");
  }
  cfg_.jitter.validate();
  if (cfg_.tick_ms <= 0.0 || cfg_.hard_cap_s <= 0.0) throw ConfigError("device: tick_ms and hard_cap_s must be positive");
}

void Device::log(std::string event, nlohmann::json fields) {
  events_.push_back({sched_.now_ms(), std::move(event), std::move(fields)});
}

void Device::set_power(DeviceState s) {
  if (meter_.state() == s) return;
  meter_.set_state(sched_.now_ms() / 1000.0, s);
  log("power", {{"state", std::string(device_state_name(s))}});
}

const EnergyLedger& Device::ledger() {
  meter_.advance(sched_.now_ms() / 1000.0);
  return meter_.ledger();
}

void Device::start() {
  log("start", {{"mic_s", mic_.duration_s()}, {"photos", photos_.size()}});
  ticking_ = true;
  sched_.after(0.0, [this] { tick(); });
}

std::vector<int16_t> Device::mic_samples(std::size_t n) {
  std::vector<int16_t> out(n, 0);
  if (mic_pos_ < mic_.samples.size()) {
    const auto take = std::min(n, mic_.samples.size() - mic_pos_);
    std::copy_n(mic_.samples.begin() + static_cast<long>(mic_pos_), take, out.begin());
  }
  mic_pos_ += n;
  return out;
}

void Device::tick() {
  if (mode_ == Mode::listening && mic_pos_ >= mic_.samples.size()) {
    ticking_ = false;
    finished_ = true;
    log("mic_exhausted");
    return;
  }
  const auto hop = static_cast<std::size_t>(std::lround(cfg_.tick_ms * audio::kCanonicalRateHz / 1000.0));
  const auto samples = mic_samples(hop);
  if (mode_ == Mode::listening) {
    const auto events = detector_.push(samples);
    if (!events.empty()) {
      const auto st = session_.state;
      if (!reconnecting_ && (st == wire::SessionState::Provisioned || st == wire::SessionState::Idle ||
                             st == wire::SessionState::Connected)) {
        log("wake", {{"score", events.front().score}, {"window_end_s", events.front().t_end}});
        begin_query();
      } else {
        log("wake_ignored", {{"session", std::string(wire::session_state_name(st))}});
      }
    }
  } else if (mode_ == Mode::streaming) {
    wire::AudioChunk chunk{audio_seq_++, encoder_.encode_block(samples)};
    send_frame(wire::audio_frame(FrameType::AUDIO_CHUNK, chunk), ChannelKind::runtime);
    ++stats_.audio_chunks_sent;
    ++episodes_.back().audio_chunks;
  }
  sched_.after(cfg_.tick_ms, [this] { tick(); });
}

void Device::begin_query() {
  ++stats_.detections;
  ++stats_.queries;
  episodes_.push_back(Episode{sched_.now_ms()});
  set_power(DeviceState::ActiveQuery);
  mode_ = Mode::streaming;
  audio_seq_ = 0;
  encoder_ = audio::AdpcmEncoder{};
  if (session_.state != wire::SessionState::Connected) {
    send_frame(Frame{FrameType::HELLO, ctrl_seq_++, wire::encode_hello({cfg_.device_id, false})}, ChannelKind::runtime);
  }
}

void Device::end_streaming() {
  mode_ = Mode::awaiting;
  episodes_.back().eou_ms = sched_.now_ms();
  jitter_ = std::make_unique<wire::JitterBuffer>(cfg_.jitter);
  response_ended_ = false;
}

void Device::send_frame(Frame f, ChannelKind channel) {
  apply(wire::FrameEvent{channel, f}, true);
  send_(f, channel);
}

void Device::apply(const wire::SessionEvent& e, bool outgoing) {
  const auto before = session_.state;
  const auto out = wire::session_step(session_, e);
  if (!out.accepted) {
    if (outgoing) log("illegal_send", {{"state", std::string(wire::session_state_name(before))}});
    return;
  }
  session_ = out.session;
  if (session_.state != before) {
    log("session", {{"from", std::string(wire::session_state_name(before))},
                    {"to", std::string(wire::session_state_name(session_.state))}});
  }
  // Replies are for the receiving end; timers run on both.
  for (const auto& a : out.actions) {
    if (a.kind != wire::SessionAction::Kind::send_frame || !outgoing) {
      handle_actions({a});
    }
  }
}

void Device::handle_actions(const std::vector<wire::SessionAction>& actions) {
  using K = wire::SessionAction::Kind;
  for (const auto& a : actions) {
    switch (a.kind) {
      case K::send_frame: {
        Frame f = a.frame;
        if (f.seq == 0) f.seq = ctrl_seq_++;
        send_frame(std::move(f), a.channel);
        break;
      }
      case K::start_timer:
        if (a.timer == wire::TimerKind::hard_cap) {
          hard_cap_timer_ = sched_.after(cfg_.hard_cap_s * 1000.0, [this] {
            hard_cap_timer_.reset();
            const auto out = wire::session_step(session_, wire::TimerFired{wire::TimerKind::hard_cap});
            if (!out.accepted) return;
            log("hard_cap");
            session_ = out.session;
            if (mode_ == Mode::streaming) {
              episodes_.back().hard_capped = true;
              end_streaming();
            }
            // The step already accounts for the END_OF_UTTERANCE it asks for.
            for (const auto& act : out.actions) {
              if (act.kind == K::send_frame) {
                Frame f = act.frame;
                f.seq = ctrl_seq_++;
                send_(f, act.channel);
              } else {
                handle_actions({act});
              }
            }
          });
        } else {
          response_timer_ = sched_.after(cfg_.response_timeout_ms, [this] {
            response_timer_.reset();
            const auto out = wire::session_step(session_, wire::TimerFired{wire::TimerKind::response_timeout});
            if (!out.accepted) return;
            log("response_timeout");
            session_ = out.session;
            for (const auto& act : out.actions) {
              if (act.kind == K::send_frame) send_(act.frame, act.channel);
            }
            finish_response("timeout");
          });
        }
        break;
      case K::cancel_timer: {
        auto& t = a.timer == wire::TimerKind::hard_cap ? hard_cap_timer_ : response_timer_;
        if (t) sched_.cancel(*t);
        t.reset();
        break;
      }
      case K::reconnect:
        reconnecting_ = true;
        reconnect_attempt_ = 0;
        attempt_reconnect();
        break;
    }
  }
}

void Device::attempt_reconnect() {
  const double delay = std::min(cfg_.reconnect.max_ms,
                                cfg_.reconnect.initial_ms * std::pow(cfg_.reconnect.factor, reconnect_attempt_));
  sched_.after(delay, [this] {
    if (!reconnecting_) return;
    ++reconnect_attempt_;
    if (!link_up_ || link_up_()) {
      reconnecting_ = false;
      ++stats_.reconnects;
      log("reconnect", {{"attempt", reconnect_attempt_}});
      send_frame(Frame{FrameType::HELLO, ctrl_seq_++, wire::encode_hello({cfg_.device_id, true})},
                 ChannelKind::runtime);
      return;
    }
    if (reconnect_attempt_ >= cfg_.reconnect.max_attempts) {
      reconnecting_ = false;
      log("reconnect_failed", {{"attempts", reconnect_attempt_}});
      return;
    }
    attempt_reconnect();
  });
}

void Device::on_channel_drop() {
  log("channel_drop", {{"mode", static_cast<int>(mode_)}});
  if (drain_timer_) sched_.cancel(*drain_timer_);
  drain_timer_.reset();
  speaker_running_ = false;
  jitter_.reset();
  if (mode_ != Mode::listening) back_to_listening();
  apply(wire::ChannelDrop{}, false);
}

void Device::on_frame(const Frame& f, ChannelKind channel) {
  const auto out = wire::session_step(session_, wire::FrameEvent{channel, f});
  if (!out.accepted) {
    log("rejected", {{"type", std::string(wire::frame_type_name(f.type))},
                     {"state", std::string(wire::session_state_name(session_.state))}});
  }
  apply(wire::FrameEvent{channel, f}, false);
  if (!out.accepted) {
    for (const auto& a : out.actions) send_(a.frame, a.channel);
    return;
  }
  if (channel == ChannelKind::provisioning) {
    log("provisioned_frame", {{"type", std::string(wire::frame_type_name(f.type))}});
    return;
  }

  switch (f.type) {
    case FrameType::CONTROL: {
      const auto c = wire::decode_control(f.payload);
      if (c.code == wire::ControlCode::endpoint) {
        log("endpoint");
        if (mode_ == Mode::streaming) {
          end_streaming();
          send_frame(Frame{FrameType::END_OF_UTTERANCE, ctrl_seq_++, {}}, ChannelKind::runtime);
        }
      } else if (c.code == wire::ControlCode::capture_photo) {
        send_photo();
      } else if (c.code == wire::ControlCode::device_command) {
        log("command", {{"command", c.argument}});
        if (c.argument == "capture_photo" && !photos_.empty()) {
          stored_.push_back(photos_[next_photo_++ % photos_.size()]);
          ++stats_.photos_stored;
        }
      }
      break;
    }
    case FrameType::RESPONSE_AUDIO: {
      if (!jitter_) break;
      if (mode_ == Mode::awaiting) {
        mode_ = Mode::playing;
        set_power(DeviceState::PlayingResponse);
      }
      const auto chunk = wire::audio_chunk_from_frame(f);
      const auto pcm = audio::adpcm_decode_block(chunk.block);
      jitter_->push(chunk.seq, pcm);
      ++stats_.response_chunks_received;
      ++episodes_.back().response_chunks;
      if (!speaker_running_) {
        speaker_running_ = true;
        sched_.after(0.0, [this] { speaker_tick(); });
      }
      break;
    }
    case FrameType::END_OF_RESPONSE:
      response_ended_ = true;
      if (!jitter_) break;
      jitter_->mark_end();
      if (!speaker_running_) {
        finish_response("empty");
      } else {
        drain_timer_ = sched_.after(cfg_.drain_timeout_ms, [this] {
          drain_timer_.reset();
          finish_response("drain_timeout");
        });
      }
      break;
    case FrameType::ERROR:
      log("peer_error", {{"message", wire::decode_error(f.payload).message}});
      break;
    default:
      break;
  }
}

void Device::send_photo() {
  if (photos_.empty()) {
    log("no_photo_fixture");
    return;
  }
  const auto& p = photos_[next_photo_++ % photos_.size()];
  const uint32_t id = ++photo_id_;
  wire::PhotoMeta meta{id, p.width, p.height, static_cast<uint32_t>(p.bytes.size()), p.name};
  send_frame(Frame{FrameType::PHOTO_META, ctrl_seq_++, wire::encode_photo_meta(meta)}, ChannelKind::runtime);
  ++stats_.photo_meta_sent;
  if (!episodes_.empty()) ++episodes_.back().photo_meta;
  for (std::size_t off = 0; off < p.bytes.size(); off += kPhotoPiece) {
    const auto end = std::min(p.bytes.size(), off + kPhotoPiece);
    wire::PhotoData d{id, static_cast<uint32_t>(off),
                      std::vector<uint8_t>(p.bytes.begin() + static_cast<long>(off), p.bytes.begin() + static_cast<long>(end))};
    send_frame(Frame{FrameType::PHOTO_DATA, ctrl_seq_++, wire::encode_photo_data(d)}, ChannelKind::runtime);
    ++stats_.photo_data_sent;
    if (!episodes_.empty()) ++episodes_.back().photo_data;
  }
  log("photo_sent", {{"name", p.name}, {"bytes", p.bytes.size()}});
}

void Device::speaker_tick() {
  if (!speaker_running_ || !jitter_) return;
  const auto hop = static_cast<std::size_t>(std::lround(cfg_.tick_ms * cfg_.jitter.sample_rate_hz / 1000.0));
  auto r = jitter_->pop(hop);
  speaker_.samples.insert(speaker_.samples.end(), r.samples.begin(), r.samples.end());
  if (r.status == wire::PopStatus::drained) {
    finish_response("played");
    return;
  }
  sched_.after(cfg_.tick_ms, [this] { speaker_tick(); });
}

void Device::finish_response(const std::string& why) {
  if (drain_timer_) sched_.cancel(*drain_timer_);
  drain_timer_.reset();
  speaker_running_ = false;
  if (!episodes_.empty()) {
    auto& ep = episodes_.back();
    ep.response_end_ms = sched_.now_ms();
    ep.completed = why == "played" || why == "empty";
    if (jitter_) {
      const auto js = jitter_->stats();
      ep.played_samples = js.played_samples;
      ep.concealed_samples = js.concealed_samples;
      ep.underruns = js.underruns;
      stats_.underruns += js.underruns;
    }
    if (ep.completed) ++stats_.responses_played;
  }
  log("response_done", {{"why", why}});
  jitter_.reset();
  back_to_listening();
}

void Device::back_to_listening() {
  mode_ = Mode::listening;
  set_power(DeviceState::BaselineListening);
  detector_.reset(static_cast<double>(mic_pos_) / audio::kCanonicalRateHz);
}

}  // namespace edgewear::device
