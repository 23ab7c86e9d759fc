#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace edgewear::wire {

struct JitterConfig {
  double prebuffer_ms = 300.0;
  double capacity_ms = 2000.0;
  int sample_rate_hz = 16000;
  /// Length of silence inserted for a missing chunk.
  std::size_t chunk_samples = 320;

  /// Throws ConfigError on negative durations or capacity below prebuffer.
  void validate() const;
  std::size_t prebuffer_samples() const;
  std::size_t capacity_samples() const;
};

enum class PushResult : uint8_t { accepted, duplicate, late, overflow };
/// `drained`: the stream was marked finished and everything has been played.
enum class PopStatus : uint8_t { audio, not_ready, underrun, drained };

struct PopResult {
  PopStatus status = PopStatus::not_ready;
  /// For `audio`, exactly the requested count; for `underrun`, whatever was
  /// available before the buffer ran dry.
  std::vector<int16_t> samples;
  std::size_t concealed_samples = 0;
};

struct JitterStats {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t late = 0;
  std::size_t overflows = 0;
  std::size_t underruns = 0;
  std::size_t concealed_chunks = 0;
  std::size_t concealed_samples = 0;
  std::size_t accepted_samples = 0;
  std::size_t played_samples = 0;  // includes concealment
};

/// Reorders chunks by seq and holds back playback until `prebuffer_ms` of
/// contiguous audio is queued. One producer and one consumer may call
/// push/pop concurrently.
///
/// A missing chunk is zero-filled only when at least a prebuffer's worth of
/// audio (and at least one chunk) is already queued behind it; otherwise the
/// consumer gets an underrun and the buffer re-primes.
class JitterBuffer {
 public:
  explicit JitterBuffer(JitterConfig cfg = {});

  PushResult push(uint32_t seq, std::span<const int16_t> samples);
  PopResult pop(std::size_t n_samples);
  /// No more chunks will arrive: playback may start below the prebuffer,
  /// gaps are concealed and running dry reports `drained`.
  void mark_end();

  bool playing() const;
  std::size_t buffered_samples() const;
  double buffered_ms() const;
  JitterStats stats() const;
  const JitterConfig& config() const { return cfg_; }

 private:
  std::size_t contiguous_from_cursor() const;
  bool can_start() const;

  JitterConfig cfg_;
  mutable std::mutex mu_;
  std::map<uint32_t, std::vector<int16_t>> chunks_;
  std::optional<uint32_t> cursor_;  // next seq to play, set once playback starts
  std::size_t offset_ = 0;          // samples already consumed from chunk `cursor_`
  std::size_t buffered_ = 0;
  bool concealing_ = false;         // chunk `cursor_` is being replaced by silence
  bool playing_ = false;
  bool ended_ = false;
  JitterStats stats_;
};

}  // namespace edgewear::wire
