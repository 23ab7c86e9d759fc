#include "edgewear/netsim/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "edgewear/error.hpp"

namespace edgewear::netsim {

Scheduler::EventId Scheduler::at(double t_ms, Task task) {
  const EventId id = next_id_++;
  tasks_.push_back(std::move(task));
  queue_.push({std::max(t_ms, now_ms_), id});
  return id;
}

bool Scheduler::step() {
  while (!queue_.empty()) {
    const auto e = queue_.top();
    queue_.pop();
    if (cancelled_.erase(e.id)) {
      tasks_[e.id] = nullptr;
      continue;
    }
    pace(e.t_ms);
    now_ms_ = e.t_ms;
    auto task = std::move(tasks_[e.id]);
    tasks_[e.id] = nullptr;
    ++executed_;
    task();
    return true;
  }
  return false;
}

void Scheduler::run_until(double t_ms) {
  while (!queue_.empty()) {
    const auto e = queue_.top();
    if (cancelled_.contains(e.id)) {
      queue_.pop();
      cancelled_.erase(e.id);
      tasks_[e.id] = nullptr;
      continue;
    }
    if (e.t_ms > t_ms) break;
    step();
  }
  pace(t_ms);
  now_ms_ = std::max(now_ms_, t_ms);
}

void Scheduler::run(double limit_ms) {
  while (!queue_.empty() && queue_.top().t_ms <= limit_ms) {
    if (!step()) break;
  }
}

void Scheduler::set_wall_clock(bool enabled, double speed) {
  if (!(speed > 0.0)) throw ConfigError("scheduler: speed must be positive");
  wall_clock_ = enabled;
  speed_ = speed;
}

void Scheduler::pace(double target_ms) const {
  if (!wall_clock_ || target_ms <= now_ms_) return;
  std::this_thread::sleep_for(std::chrono::duration<double, std::milli>((target_ms - now_ms_) / speed_));
}

}  // namespace edgewear::netsim
