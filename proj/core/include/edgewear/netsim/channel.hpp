#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace edgewear::netsim {

enum class CoexistenceMode : uint8_t { off, naive, prioritized };

std::string_view coexistence_name(CoexistenceMode m);
CoexistenceMode parse_coexistence(std::string_view s);

enum class Direction : uint8_t { device_to_edge = 0, edge_to_device = 1 };

std::string_view direction_name(Direction d);

struct CoexistenceConfig {
  double stall_period_ms = 1000.0;
  /// Offset of the first stall window within each period.
  double stall_phase_ms = 500.0;
  /// Stall length per active runtime direction; both directions streaming
  /// at once doubles the airtime the provisioning radio steals.
  double stall_duration_ms = 200.0;
  /// A direction counts as active if it sent within this window.
  double activity_window_ms = 1000.0;
};

struct ChannelConfig {
  double base_latency_ms = 20.0;
  /// Peak-to-peak variation: each frame gets an extra U(0, jitter_ms).
  double jitter_ms = 0.0;
  double loss_prob = 0.0;
  double reorder_prob = 0.0;
  /// Extra hold applied to a reordered frame.
  double reorder_delay_ms = 40.0;
  /// 0 disables serialization delay.
  double bandwidth_kbps = 0.0;
  CoexistenceMode coexistence = CoexistenceMode::off;
  CoexistenceConfig coex;
  uint64_t seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

ChannelConfig channel_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChannelConfig& cfg);

struct Delivery {
  uint64_t frame_id = 0;
  Direction direction = Direction::device_to_edge;
  std::size_t bytes = 0;
  double send_ms = 0.0;
  std::optional<double> deliver_ms;  // nullopt when dropped
  double stall_ms = 0.0;             // time held before transmission (stall or queue)
};

struct TraceStats {
  std::size_t sent = 0;
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  double mean_latency_ms = 0.0;
  double max_latency_ms = 0.0;
  std::size_t stalled = 0;
};

struct DeliveryTrace {
  std::vector<Delivery> records;

  TraceStats stats() const;
  /// frame_id,direction,bytes,send_ms,deliver_ms,dropped,stall_ms
  void write_csv(std::ostream& out) const;
};

/// A simulated point-to-point link. Every send consumes exactly three random
/// draws (loss, jitter, reorder) so traces stay aligned across configs that
/// share a seed.
class Channel {
 public:
  explicit Channel(ChannelConfig cfg);

  /// Schedules a frame of `bytes` sent at `t_now_ms`. Returns the delivery
  /// time, or nullopt if the frame is lost.
  std::optional<double> send(std::size_t bytes, double t_now_ms, Direction dir = Direction::device_to_edge);

  /// In prioritized mode the provisioning radio only runs while this is set
  /// (the session is in Provisioning). Naive mode ignores it: the radio is
  /// always on.
  void set_provisioning_active(bool active) { provisioning_active_ = active; }
  bool provisioning_active() const { return provisioning_active_; }

  const ChannelConfig& config() const { return cfg_; }
  const DeliveryTrace& trace() const { return trace_; }

 private:
  bool stalls_enabled() const;
  double release_after_stall(double t_ms);

  ChannelConfig cfg_;
  std::mt19937_64 rng_;
  DeliveryTrace trace_;
  std::array<double, 2> link_free_ms_{0.0, 0.0};
  std::array<std::optional<double>, 2> last_send_ms_{};
  bool provisioning_active_ = false;
  uint64_t next_id_ = 0;
};

}  // namespace edgewear::netsim
