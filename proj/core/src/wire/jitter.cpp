#include "edgewear/wire/jitter.hpp"

#include <algorithm>
#include <cmath>

#include "edgewear/error.hpp"

namespace edgewear::wire {

void JitterConfig::validate() const {
  if (prebuffer_ms < 0.0) throw ConfigError("jitter: prebuffer_ms must be >= 0");
  if (capacity_ms <= 0.0 || capacity_ms < prebuffer_ms) throw ConfigError("jitter: capacity_ms must be >= prebuffer_ms");
  if (sample_rate_hz <= 0) throw ConfigError("jitter: sample_rate_hz must be positive");
  if (chunk_samples == 0) throw ConfigError("jitter: chunk_samples must be positive");
}

std::size_t JitterConfig::prebuffer_samples() const {
  return static_cast<std::size_t>(std::llround(prebuffer_ms * sample_rate_hz / 1000.0));
}

std::size_t JitterConfig::capacity_samples() const {
  return static_cast<std::size_t>(std::llround(capacity_ms * sample_rate_hz / 1000.0));
}

JitterBuffer::JitterBuffer(JitterConfig cfg) : cfg_(cfg) { cfg_.validate(); }

PushResult JitterBuffer::push(uint32_t seq, std::span<const int16_t> samples) {
  std::lock_guard lock(mu_);
  if (cursor_ && (seq < *cursor_ || (seq == *cursor_ && concealing_))) {
    ++stats_.late;
    return PushResult::late;
  }
  if (chunks_.contains(seq)) {
    ++stats_.duplicates;
    return PushResult::duplicate;
  }
  if (buffered_ + samples.size() > cfg_.capacity_samples()) {
    ++stats_.overflows;
    return PushResult::overflow;
  }
  chunks_.emplace(seq, std::vector<int16_t>(samples.begin(), samples.end()));
  buffered_ += samples.size();
  ++stats_.accepted;
  stats_.accepted_samples += samples.size();
  return PushResult::accepted;
}

std::size_t JitterBuffer::contiguous_from_cursor() const {
  if (chunks_.empty()) return 0;
  uint32_t expect = cursor_ ? *cursor_ : chunks_.begin()->first;
  std::size_t total = 0;
  for (auto it = chunks_.find(expect); it != chunks_.end() && it->first == expect; ++it, ++expect) {
    total += it->second.size();
  }
  return total - (cursor_ && chunks_.contains(*cursor_) ? offset_ : 0);
}

bool JitterBuffer::can_start() const {
  if (chunks_.empty()) return false;
  if (ended_) return true;
  const auto need = std::max<std::size_t>(cfg_.prebuffer_samples(), 1);
  return contiguous_from_cursor() >= need || (buffered_ >= need && cursor_ && !chunks_.contains(*cursor_));
}

PopResult JitterBuffer::pop(std::size_t n_samples) {
  std::lock_guard lock(mu_);
  PopResult r;
  if (!playing_) {
    if (ended_ && chunks_.empty()) {
      r.status = PopStatus::drained;
      return r;
    }
    if (!can_start()) return r;
    playing_ = true;
    if (!cursor_) cursor_ = chunks_.begin()->first;
  }
  const auto conceal_need = ended_ ? std::size_t{1} : std::max<std::size_t>(cfg_.prebuffer_samples(), 1);
  r.samples.reserve(n_samples);
  while (r.samples.size() < n_samples) {
    auto it = chunks_.find(*cursor_);
    if (it != chunks_.end()) {
      const auto& chunk = it->second;
      const auto take = std::min(n_samples - r.samples.size(), chunk.size() - offset_);
      r.samples.insert(r.samples.end(), chunk.begin() + static_cast<long>(offset_),
                       chunk.begin() + static_cast<long>(offset_ + take));
      offset_ += take;
      buffered_ -= take;
      if (offset_ == chunk.size()) {
        chunks_.erase(it);
        ++*cursor_;
        offset_ = 0;
      }
      continue;
    }
    if (!chunks_.empty() && buffered_ >= conceal_need) {
      // Treat the missing chunk as lost and play silence in its place.
      concealing_ = true;
      const auto take = std::min(n_samples - r.samples.size(), cfg_.chunk_samples - offset_);
      r.samples.insert(r.samples.end(), take, 0);
      r.concealed_samples += take;
      offset_ += take;
      if (offset_ == cfg_.chunk_samples) {
        ++stats_.concealed_chunks;
        ++*cursor_;
        offset_ = 0;
        concealing_ = false;
      }
      continue;
    }
    playing_ = false;
    if (ended_ && chunks_.empty()) {
      r.status = PopStatus::drained;
      break;
    }
    r.status = PopStatus::underrun;
    ++stats_.underruns;
    break;
  }
  if (r.status == PopStatus::not_ready) r.status = PopStatus::audio;
  stats_.played_samples += r.samples.size();
  stats_.concealed_samples += r.concealed_samples;
  return r;
}

void JitterBuffer::mark_end() {
  std::lock_guard lock(mu_);
  ended_ = true;
}

bool JitterBuffer::playing() const {
  std::lock_guard lock(mu_);
  return playing_;
}

std::size_t JitterBuffer::buffered_samples() const {
  std::lock_guard lock(mu_);
  return buffered_;
}

double JitterBuffer::buffered_ms() const { return 1000.0 * static_cast<double>(buffered_samples()) / cfg_.sample_rate_hz; }

JitterStats JitterBuffer::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace edgewear::wire
