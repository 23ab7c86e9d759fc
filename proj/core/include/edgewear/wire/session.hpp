#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "edgewear/wire/frame.hpp"
#include "edgewear/wire/payload.hpp"

namespace edgewear::wire {

enum class SessionState : uint8_t {
  Discovered,
  Provisioning,
  Provisioned,
  Connected,
  StreamingQuery,
  AwaitingResponse,
  PlayingResponse,
  Idle,
};

std::string_view session_state_name(SessionState s);

/// The provisioning channel stands in for BLE, the runtime channel for Wi-Fi.
enum class ChannelKind : uint8_t { provisioning, runtime };

std::string_view channel_name(ChannelKind c);

enum class TimerKind : uint8_t { hard_cap, response_timeout };

/// A frame observed on the session (sent or received; both ends run the
/// same table).
struct FrameEvent {
  ChannelKind channel = ChannelKind::runtime;
  Frame frame;
};
struct ChannelDrop {};
struct TimerFired {
  TimerKind timer = TimerKind::hard_cap;
};

using SessionEvent = std::variant<FrameEvent, ChannelDrop, TimerFired>;

struct SessionAction {
  enum class Kind : uint8_t { send_frame, start_timer, cancel_timer, reconnect };
  Kind kind = Kind::send_frame;
  ChannelKind channel = ChannelKind::runtime;
  Frame frame;  // send_frame
  TimerKind timer = TimerKind::hard_cap;

  bool operator==(const SessionAction&) const = default;
};

struct Session {
  SessionState state = SessionState::Discovered;
  std::optional<Credentials> credentials;

  bool operator==(const Session&) const = default;
};

struct StepOutcome {
  Session session;
  std::vector<SessionAction> actions;
  bool accepted = true;
};

/// Pure transition function. Illegal events leave the session unchanged and
/// emit an ERROR frame on the channel they arrived on.
///
///   Discovered   + PROVISION (prov)        -> Provisioning  [store creds, ACK]
///   Provisioning + PROVISION (prov)        -> Provisioning  [store creds, ACK]
///   Provisioning + PROVISION_ACK (prov)    -> Provisioned
///   Provisioned | Idle | Connected + HELLO -> Connected
///   Connected | StreamingQuery + AUDIO_CHUNK -> StreamingQuery [hard cap timer on entry]
///   StreamingQuery + END_OF_UTTERANCE      -> AwaitingResponse [response timer]
///   StreamingQuery + hard_cap timer        -> AwaitingResponse [send END_OF_UTTERANCE]
///   StreamingQuery | AwaitingResponse + CONTROL / PHOTO_* -> unchanged
///   AwaitingResponse + RESPONSE_AUDIO      -> PlayingResponse
///   PlayingResponse + RESPONSE_AUDIO       -> PlayingResponse
///   AwaitingResponse | PlayingResponse + END_OF_RESPONSE -> Idle
///   AwaitingResponse + response_timeout    -> Idle [ERROR timeout]
///   any runtime state + channel drop       -> Provisioned [reconnect]
///   PING / ERROR on the runtime channel    -> unchanged
StepOutcome session_step(const Session& session, const SessionEvent& event);

Frame error_frame(ErrorCode code, const Frame& offending, std::string message);

}  // namespace edgewear::wire
