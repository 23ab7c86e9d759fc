#include "edgewear/sim/system.hpp"

#include <algorithm>
#include <array>

#include "edgewear/error.hpp"
#include "edgewear/wire/frame.hpp"

namespace edgewear::sim {

using netsim::Direction;
using wire::ChannelKind;
using wire::Frame;

SystemResult run_system(const SystemConfig& cfg, const SystemInputs& inputs, netsim::TransportRegistry* registry,
                        edge::QueryLog* log) {
  cfg.runtime_channel.validate();
  cfg.provisioning_channel.validate();
  for (const auto& d : cfg.drops) {
    if (d.at_ms < 0.0 || d.duration_ms <= 0.0) throw ConfigError("drops: need at >= 0 and duration > 0");
  }

  netsim::Scheduler sched;
  netsim::Channel runtime(cfg.runtime_channel);
  netsim::Channel provisioning(cfg.provisioning_channel);
  netsim::TransportRegistry local_registry;
  auto& reg = registry ? *registry : local_registry;
  reg.open({"session/runtime", cfg.carrier ? cfg.carrier_kind : std::string("in-process"), "device", "edge"});
  reg.open({"session/provisioning", "in-process", "device", "edge"});

  std::vector<nlohmann::json> edge_events;
  double link_down_until = -1.0;
  std::array<double, 2> last_delivery{0.0, 0.0};
  uint64_t link_epoch = 0;

  std::unique_ptr<device::Device> dev;
  std::unique_ptr<edge::EdgeService> edge_svc;

  auto link_up = [&] { return sched.now_ms() >= link_down_until; };

  auto update_provisioning = [&] {
    const bool active = dev->session().state == wire::SessionState::Provisioning ||
                        dev->session().state == wire::SessionState::Discovered;
    runtime.set_provisioning_active(active);
  };

  // One function per direction: encode, push through the channel, decode on arrival.
  auto transmit = [&](const Frame& f, ChannelKind kind, Direction dir) -> std::optional<double> {
    const auto bytes = wire::encode_frame(f);
    if (kind == ChannelKind::runtime && !link_up()) return std::nullopt;
    auto& ch = kind == ChannelKind::runtime ? runtime : provisioning;
    auto t = ch.send(bytes.size(), sched.now_ms(), dir);
    if (!t) return std::nullopt;
    if (kind == ChannelKind::runtime && cfg.ordered_runtime) {
      auto& last = last_delivery[static_cast<std::size_t>(dir)];
      t = std::max(*t, last);
      last = *t;
    }
    const auto epoch = link_epoch;
    sched.at(*t, [&, bytes, kind, dir, epoch] {
      if (kind == ChannelKind::runtime && epoch != link_epoch) return;
      const auto frame =
          kind == ChannelKind::runtime && cfg.carrier ? wire::decode_frame(cfg.carrier(bytes, dir)) : wire::decode_frame(bytes);
      if (dir == Direction::device_to_edge) {
        edge_svc->on_frame(frame, kind);
      } else {
        dev->on_frame(frame, kind);
      }
      if (kind == ChannelKind::provisioning) update_provisioning();
    });
    return t;
  };

  dev = std::make_unique<device::Device>(
      sched, cfg.device, inputs.kws, inputs.mic, inputs.photos, cfg.power,
      [&](const Frame& f, ChannelKind k) { return transmit(f, k, Direction::device_to_edge); }, link_up);
  edge_svc = std::make_unique<edge::EdgeService>(
      sched, cfg.edge, inputs.stubs, intent::Router(inputs.intent),
      [&](const Frame& f, ChannelKind k) { return transmit(f, k, Direction::edge_to_device); }, log);
  edge_svc->set_logger([&](const std::string& event, const nlohmann::json& fields) {
    nlohmann::json j = {{"t_ms", sched.now_ms()}, {"source", "edge"}, {"event", event}};
    for (const auto& [k, v] : fields.items()) j[k] = v;
    edge_events.push_back(std::move(j));
  });

  for (const auto& d : cfg.drops) {
    sched.at(d.at_ms, [&, d] {
      link_down_until = d.at_ms + d.duration_ms;
      ++link_epoch;
      edge_events.push_back({{"t_ms", sched.now_ms()}, {"source", "link"}, {"event", "drop"},
                             {"duration_ms", d.duration_ms}});
      dev->on_channel_drop();
      edge_svc->on_channel_drop();
    });
  }

  update_provisioning();
  edge_svc->provision(cfg.credentials);
  dev->start();
  sched.run(cfg.limit_s * 1000.0);

  SystemResult r;
  r.records = edge_svc->records();
  if (std::any_of(r.records.begin(), r.records.end(), [](const auto& q) { return q.end_to_end_ms >= 0.0; })) {
    r.latency = edge::measure_latency(r.records);
  }
  r.device_stats = dev->stats();
  r.episodes = dev->episodes();
  r.energy = dev->ledger();
  r.device_state = dev->state();
  r.device_session = dev->session().state;
  r.edge_session = edge_svc->session().state;
  r.runtime_trace = runtime.trace();
  r.provisioning_trace = provisioning.trace();
  r.transports = reg.snapshot();
  r.speaker = dev->speaker();
  r.stored_photos = dev->stored_photos();
  r.end_ms = sched.now_ms();
  r.scheduler_events = sched.executed();
  r.device_finished = dev->finished();

  for (const auto& e : dev->events()) r.events.push_back(device::to_json(e));
  r.events.insert(r.events.end(), edge_events.begin(), edge_events.end());
  std::stable_sort(r.events.begin(), r.events.end(),
                   [](const auto& a, const auto& b) { return a["t_ms"].template get<double>() < b["t_ms"].template get<double>(); });
  return r;
}

}  // namespace edgewear::sim
