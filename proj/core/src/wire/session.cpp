#include "edgewear/wire/session.hpp"

#include <string>

namespace edgewear::wire {

std::string_view session_state_name(SessionState s) {
  switch (s) {
    case SessionState::Discovered: return "Discovered";
    case SessionState::Provisioning: return "Provisioning";
    case SessionState::Provisioned: return "Provisioned";
    case SessionState::Connected: return "Connected";
    case SessionState::StreamingQuery: return "StreamingQuery";
    case SessionState::AwaitingResponse: return "AwaitingResponse";
    case SessionState::PlayingResponse: return "PlayingResponse";
    case SessionState::Idle: return "Idle";
  }
  return "?";
}

std::string_view channel_name(ChannelKind c) { return c == ChannelKind::provisioning ? "provisioning" : "runtime"; }

Frame error_frame(ErrorCode code, const Frame& offending, std::string message) {
  return Frame{FrameType::ERROR, offending.seq,
               encode_error({code, static_cast<uint8_t>(offending.type), std::move(message)})};
}

namespace {

using S = SessionState;
using A = SessionAction;

bool is_runtime_state(S s) {
  return s == S::Connected || s == S::StreamingQuery || s == S::AwaitingResponse || s == S::PlayingResponse ||
         s == S::Idle;
}

A send(ChannelKind ch, Frame f) {
  A a;
  a.kind = A::Kind::send_frame;
  a.channel = ch;
  a.frame = std::move(f);
  return a;
}

A timer(A::Kind k, TimerKind t) {
  A a;
  a.kind = k;
  a.timer = t;
  return a;
}

StepOutcome reject(const Session& s, const FrameEvent& e, ErrorCode code = ErrorCode::illegal_transition) {
  StepOutcome out{s, {}, false};
  out.actions.push_back(send(e.channel, error_frame(code, e.frame,
                                                    std::string(frame_type_name(e.frame.type)) + " not allowed in " +
                                                        std::string(session_state_name(s.state)) + " on " +
                                                        std::string(channel_name(e.channel)) + " channel")));
  return out;
}

StepOutcome on_provisioning_channel(const Session& s, const FrameEvent& e) {
  StepOutcome out{s, {}, true};
  switch (e.frame.type) {
    case FrameType::PROVISION:
      if (s.state != S::Discovered && s.state != S::Provisioning) return reject(s, e);
      try {
        out.session.credentials = decode_credentials(e.frame.payload);
      } catch (const FormatError&) {
        return reject(s, e, ErrorCode::bad_frame);
      }
      out.session.state = S::Provisioning;
      out.actions.push_back(send(ChannelKind::provisioning, Frame{FrameType::PROVISION_ACK, e.frame.seq, {}}));
      return out;
    case FrameType::PROVISION_ACK:
      if (s.state != S::Provisioning) return reject(s, e);
      out.session.state = S::Provisioned;
      return out;
    default:
      return reject(s, e);
  }
}

StepOutcome on_runtime_channel(const Session& s, const FrameEvent& e) {
  StepOutcome out{s, {}, true};
  const auto st = s.state;
  switch (e.frame.type) {
    case FrameType::HELLO:
      if (st != S::Provisioned && st != S::Idle && st != S::Connected) return reject(s, e);
      out.session.state = S::Connected;
      return out;
    case FrameType::AUDIO_CHUNK:
      if (st != S::Connected && st != S::StreamingQuery) return reject(s, e);
      if (st == S::Connected) out.actions.push_back(timer(A::Kind::start_timer, TimerKind::hard_cap));
      out.session.state = S::StreamingQuery;
      return out;
    case FrameType::END_OF_UTTERANCE:
      if (st != S::StreamingQuery) return reject(s, e);
      out.session.state = S::AwaitingResponse;
      out.actions.push_back(timer(A::Kind::cancel_timer, TimerKind::hard_cap));
      out.actions.push_back(timer(A::Kind::start_timer, TimerKind::response_timeout));
      return out;
    case FrameType::CONTROL:
    case FrameType::PHOTO_META:
    case FrameType::PHOTO_DATA:
      if (st != S::StreamingQuery && st != S::AwaitingResponse) return reject(s, e);
      return out;
    case FrameType::RESPONSE_AUDIO:
      if (st == S::AwaitingResponse) {
        out.session.state = S::PlayingResponse;
        out.actions.push_back(timer(A::Kind::cancel_timer, TimerKind::response_timeout));
        return out;
      }
      if (st == S::PlayingResponse) return out;
      return reject(s, e);
    case FrameType::END_OF_RESPONSE:
      if (st != S::AwaitingResponse && st != S::PlayingResponse) return reject(s, e);
      if (st == S::AwaitingResponse) out.actions.push_back(timer(A::Kind::cancel_timer, TimerKind::response_timeout));
      out.session.state = S::Idle;
      return out;
    case FrameType::PING:
    case FrameType::ERROR:
      if (!is_runtime_state(st)) return reject(s, e);
      return out;
    case FrameType::PROVISION:
    case FrameType::PROVISION_ACK:
      return reject(s, e);
  }
  return reject(s, e);
}

}  // namespace

StepOutcome session_step(const Session& session, const SessionEvent& event) {
  if (const auto* fe = std::get_if<FrameEvent>(&event)) {
    return fe->channel == ChannelKind::provisioning ? on_provisioning_channel(session, *fe)
                                                    : on_runtime_channel(session, *fe);
  }
  StepOutcome out{session, {}, true};
  if (std::holds_alternative<ChannelDrop>(event)) {
    if (!is_runtime_state(session.state)) {
      out.accepted = false;
      return out;
    }
    out.session.state = S::Provisioned;
    out.actions.push_back(timer(A::Kind::cancel_timer, TimerKind::hard_cap));
    out.actions.push_back(timer(A::Kind::cancel_timer, TimerKind::response_timeout));
    A r;
    r.kind = A::Kind::reconnect;
    out.actions.push_back(r);
    return out;
  }
  const auto t = std::get<TimerFired>(event).timer;
  if (t == TimerKind::hard_cap && session.state == S::StreamingQuery) {
    out.session.state = S::AwaitingResponse;
    out.actions.push_back(send(ChannelKind::runtime, Frame{FrameType::END_OF_UTTERANCE, 0, {}}));
    out.actions.push_back(timer(A::Kind::start_timer, TimerKind::response_timeout));
    return out;
  }
  if (t == TimerKind::response_timeout && session.state == S::AwaitingResponse) {
    out.session.state = S::Idle;
    out.actions.push_back(send(ChannelKind::runtime,
                               Frame{FrameType::ERROR, 0, encode_error({ErrorCode::timeout, 0, "response timeout"})}));
    return out;
  }
  // Stale timer: ignore.
  out.accepted = false;
  return out;
}

}  // namespace edgewear::wire
