#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace edgewear::netsim {

/// Discrete-event loop on a virtual millisecond clock. Events at equal
/// times run in scheduling order.
class Scheduler {
 public:
  using EventId = uint64_t;
  using Task = std::function<void()>;

  double now_ms() const { return now_ms_; }

  /// Schedules at an absolute time (clamped to now).
  EventId at(double t_ms, Task task);
  EventId after(double delay_ms, Task task) { return at(now_ms_ + delay_ms, std::move(task)); }
  void cancel(EventId id) { cancelled_.insert(id); }

  /// Runs one event; false if the queue is empty.
  bool step();
  /// Runs events with time <= t_ms, then advances the clock to t_ms.
  void run_until(double t_ms);
  /// Runs until the queue drains or `limit_ms` is reached.
  void run(double limit_ms = 1e12);

  std::size_t pending() const { return queue_.size() - cancelled_.size(); }
  std::size_t executed() const { return executed_; }

  /// Demo mode: sleep so that simulated time advances at `speed` x real time.
  void set_wall_clock(bool enabled, double speed = 1.0);

 private:
  struct Entry {
    double t_ms;
    EventId id;
    bool operator>(const Entry& o) const { return t_ms != o.t_ms ? t_ms > o.t_ms : id > o.id; }
  };

  void pace(double target_ms) const;

  double now_ms_ = 0.0;
  EventId next_id_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::vector<Task> tasks_;  // indexed by id
  std::unordered_set<EventId> cancelled_;
  std::size_t executed_ = 0;
  bool wall_clock_ = false;
  double speed_ = 1.0;
};

}  // namespace edgewear::netsim
