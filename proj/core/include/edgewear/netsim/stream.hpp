#pragma once

#include <vector>

#include "edgewear/netsim/channel.hpp"
#include "edgewear/wire/jitter.hpp"

namespace edgewear::netsim {

/// Real-time audio over the simulated channel: the sender emits one
/// 320-sample ADPCM chunk every 20 ms, the receiver pushes decoded chunks
/// into a jitter buffer and pops 20 ms at a time from its first arrival.
struct StreamScenario {
  ChannelConfig channel;
  wire::JitterConfig jitter;
  double duration_s = 5.0;
  /// Stream in both directions at once (full-duplex voice).
  bool bidirectional = false;
  double tone_hz = 440.0;
};

struct DirectionResult {
  Direction direction = Direction::device_to_edge;
  std::size_t chunks_sent = 0;
  std::size_t samples_sent = 0;
  wire::JitterStats jitter;
  double first_play_ms = -1.0;
};

struct StreamResult {
  std::vector<DirectionResult> directions;
  DeliveryTrace trace;

  std::size_t underruns() const;
};

StreamResult run_stream_scenario(const StreamScenario& scenario);

}  // namespace edgewear::netsim
