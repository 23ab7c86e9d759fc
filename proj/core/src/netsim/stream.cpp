#include "edgewear/netsim/stream.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/netsim/scheduler.hpp"
#include "edgewear/wire/frame.hpp"
#include "edgewear/wire/payload.hpp"

namespace edgewear::netsim {

namespace {

constexpr double kTickMs = 20.0;
constexpr double kDrainMs = 5000.0;

audio::PcmBuffer tone(double hz, double seconds) {
  audio::PcmBuffer pcm;
  const auto n = static_cast<std::size_t>(std::lround(seconds * audio::kCanonicalRateHz));
  pcm.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pcm.samples[i] = audio::clamp_to_i16(
        8000.0 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / audio::kCanonicalRateHz));
  }
  return pcm;
}

struct Receiver {
  explicit Receiver(const wire::JitterConfig& cfg) : jb(cfg) {}
  wire::JitterBuffer jb;
  bool ticking = false;
  double first_play_ms = -1.0;
};

}  // namespace

std::size_t StreamResult::underruns() const {
  std::size_t n = 0;
  for (const auto& d : directions) n += d.jitter.underruns;
  return n;
}

StreamResult run_stream_scenario(const StreamScenario& sc) {
  sc.jitter.validate();
  Scheduler sched;
  Channel channel(sc.channel);
  const auto chunks = wire::chunk_audio(tone(sc.tone_hz, sc.duration_s));
  std::vector<std::vector<uint8_t>> wire_frames;
  for (const auto& c : chunks) wire_frames.push_back(wire::encode_frame(wire::audio_frame(wire::FrameType::AUDIO_CHUNK, c)));
  std::size_t total_samples = 0;
  for (const auto& c : chunks) total_samples += c.block.sample_count;

  std::vector<Direction> dirs{Direction::device_to_edge};
  if (sc.bidirectional) dirs.push_back(Direction::edge_to_device);
  std::vector<std::unique_ptr<Receiver>> rx;
  for (std::size_t d = 0; d < dirs.size(); ++d) rx.push_back(std::make_unique<Receiver>(sc.jitter));

  const double end_ms = sc.duration_s * 1000.0 + kDrainMs;
  std::function<void(Receiver&)> tick = [&](Receiver& r) {
    if (r.jb.stats().played_samples >= total_samples) return;
    const auto got = r.jb.pop(audio::kChunkSamples);
    if (got.status != wire::PopStatus::not_ready && r.first_play_ms < 0) r.first_play_ms = sched.now_ms();
    if (sched.now_ms() + kTickMs <= end_ms) sched.after(kTickMs, [&] { tick(r); });
  };

  // Interleave directions per chunk so draws alternate deterministically.
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      sched.at(static_cast<double>(i) * kTickMs, [&, i, d] {
        const auto when = channel.send(wire_frames[i].size(), sched.now_ms(), dirs[d]);
        if (!when) return;
        sched.at(*when, [&, i, d] {
          auto& r = *rx[d];
          const auto f = wire::decode_frame(wire_frames[i]);
          const auto pcm = audio::adpcm_decode_block(wire::audio_chunk_from_frame(f).block);
          r.jb.push(f.seq, pcm);
          if (!r.ticking) {
            r.ticking = true;
            tick(r);
          }
        });
      });
    }
  }
  sched.run(end_ms);

  StreamResult out;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    DirectionResult dr;
    dr.direction = dirs[d];
    dr.chunks_sent = chunks.size();
    dr.samples_sent = total_samples;
    dr.jitter = rx[d]->jb.stats();
    dr.first_play_ms = rx[d]->first_play_ms;
    out.directions.push_back(dr);
  }
  out.trace = channel.trace();
  return out;
}

}  // namespace edgewear::netsim
