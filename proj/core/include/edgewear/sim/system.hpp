#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgewear/device/device.hpp"
#include "edgewear/edge/service.hpp"
#include "edgewear/intent/classifier.hpp"
#include "edgewear/kws/quantize.hpp"
#include "edgewear/netsim/channel.hpp"
#include "edgewear/netsim/transport.hpp"

namespace edgewear::sim {

/// The runtime link goes down at `at_ms` and comes back `duration_ms` later.
struct LinkDrop {
  double at_ms = 0.0;
  double duration_ms = 500.0;
};

/// Slow, low-rate link standing in for BLE.
inline netsim::ChannelConfig default_provisioning_channel() {
  netsim::ChannelConfig c;
  c.base_latency_ms = 30.0;
  c.bandwidth_kbps = 250.0;
  return c;
}

struct SystemConfig {
  netsim::ChannelConfig runtime_channel;
  netsim::ChannelConfig provisioning_channel = default_provisioning_channel();
  device::DeviceConfig device;
  edge::EdgeConfig edge;
  device::PowerProfile power;
  wire::Credentials credentials{"home-lan", {0x63, 0x68, 0x61, 0x6e, 0x67, 0x65, 0x6d, 0x65}};
  std::vector<LinkDrop> drops;
  double limit_s = 3600.0;
  /// The session runs over an ordered byte stream: a frame is never handed
  /// over before the one sent ahead of it in the same direction.
  bool ordered_runtime = true;
  /// Optional byte carrier for the runtime link, called at delivery time
  /// with the encoded frame; returns the bytes that came out the far end.
  std::function<std::vector<uint8_t>(const std::vector<uint8_t>&, netsim::Direction)> carrier;
  /// Registry kind recorded for the runtime link when a carrier is set.
  std::string carrier_kind = "tcp-loopback";
};

struct SystemInputs {
  audio::PcmBuffer mic;
  std::vector<device::Photo> photos;
  kws::QuantizedKwsModel kws;
  edge::StubSet stubs;
  intent::IntentModel intent;
};

struct SystemResult {
  std::vector<edge::QueryRecord> records;
  std::optional<edge::LatencyReport> latency;
  device::DeviceStats device_stats;
  std::vector<device::Episode> episodes;
  device::EnergyLedger energy;
  device::DeviceState device_state = device::DeviceState::BaselineListening;
  wire::SessionState device_session = wire::SessionState::Discovered;
  wire::SessionState edge_session = wire::SessionState::Discovered;
  netsim::DeliveryTrace runtime_trace;
  netsim::DeliveryTrace provisioning_trace;
  std::vector<netsim::TransportRecord> transports;
  /// Device and edge events merged by time, one JSON object each.
  std::vector<nlohmann::json> events;
  audio::PcmBuffer speaker;
  std::vector<device::Photo> stored_photos;
  double end_ms = 0.0;
  std::size_t scheduler_events = 0;
  bool device_finished = false;
};

/// Runs device, channels and edge on one simulated clock until the device has
/// consumed its microphone stream and everything in flight has settled.
/// Every link opened is recorded in `registry` when given.
SystemResult run_system(const SystemConfig& cfg, const SystemInputs& inputs,
                        netsim::TransportRegistry* registry = nullptr, edge::QueryLog* log = nullptr);

}  // namespace edgewear::sim
