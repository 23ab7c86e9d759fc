#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/audio/pcm.hpp"
#include "edgewear/device/power.hpp"
#include "edgewear/kws/detector.hpp"
#include "edgewear/netsim/scheduler.hpp"
#include "edgewear/wire/jitter.hpp"
#include "edgewear/wire/session.hpp"

namespace edgewear::device {

/// A still image as the camera would hand it over: opaque bytes plus size.
struct Photo {
  std::string name;
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<uint8_t> bytes;
};

/// Reads a binary PPM (P6). The photo name is the file stem.
Photo load_photo(const std::filesystem::path& path);
void save_photo_ppm(const std::filesystem::path& path, uint16_t width, uint16_t height,
                    const std::vector<uint8_t>& rgb);

struct ReconnectPolicy {
  double initial_ms = 200.0;
  double factor = 2.0;
  double max_ms = 5000.0;
  int max_attempts = 20;
};

struct DeviceConfig {
  std::string device_id = "earpiece-01";
  kws::DetectorConfig detector;
  double tick_ms = 20.0;
  double hard_cap_s = 10.0;
  double response_timeout_ms = 15000.0;
  wire::JitterConfig jitter;
  /// Playback gives up this long after END_OF_RESPONSE if chunks are missing.
  double drain_timeout_ms = 5000.0;
  ReconnectPolicy reconnect;
};

struct DeviceStats {
  std::size_t detections = 0;
  std::size_t queries = 0;
  std::size_t audio_chunks_sent = 0;
  std::size_t photo_meta_sent = 0;
  std::size_t photo_data_sent = 0;
  std::size_t photos_stored = 0;
  std::size_t response_chunks_received = 0;
  std::size_t responses_played = 0;
  std::size_t reconnects = 0;
  std::size_t underruns = 0;
};

/// One wake-word-triggered query as seen from the device.
struct Episode {
  double wake_ms = 0.0;
  double eou_ms = -1.0;
  double response_end_ms = -1.0;
  std::size_t audio_chunks = 0;
  std::size_t photo_meta = 0;
  std::size_t photo_data = 0;
  std::size_t response_chunks = 0;
  std::size_t played_samples = 0;
  std::size_t concealed_samples = 0;
  std::size_t underruns = 0;
  bool hard_capped = false;
  bool completed = false;
};

struct DeviceEvent {
  double t_ms = 0.0;
  std::string event;
  nlohmann::json fields;
};

nlohmann::json to_json(const DeviceEvent& e);

/// The emulated earpiece, driven entirely by scheduler events.
class Device {
 public:
  /// Returns the delivery time, or nullopt if the channel dropped the frame.
  using SendFn = std::function<std::optional<double>(const wire::Frame&, wire::ChannelKind)>;
  /// True when the runtime link can carry a reconnect attempt.
  using LinkUpFn = std::function<bool()>;

  Device(netsim::Scheduler& sched, DeviceConfig cfg, const kws::QuantizedKwsModel& kws, audio::PcmBuffer mic,
         std::vector<Photo> photos, PowerProfile power, SendFn send, LinkUpFn link_up = {});

  /// Starts the microphone clock at the current scheduler time.
  void start();
  void on_frame(const wire::Frame& f, wire::ChannelKind channel);
  void on_channel_drop();

  /// Mic exhausted and nothing in flight.
  bool finished() const { return finished_; }
  DeviceState state() const { return meter_.state(); }
  const wire::Session& session() const { return session_; }
  const DeviceStats& stats() const { return stats_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  const std::vector<DeviceEvent>& events() const { return events_; }
  const std::vector<Photo>& stored_photos() const { return stored_; }
  /// Everything the speaker played, 16 kHz.
  const audio::PcmBuffer& speaker() const { return speaker_; }
  /// Advances the energy meter to now and returns it.
  const EnergyLedger& ledger();

 private:
  enum class Mode : uint8_t { listening, streaming, awaiting, playing };

  void tick();
  void speaker_tick();
  void begin_query();
  void end_streaming();
  void send_frame(wire::Frame f, wire::ChannelKind channel);
  void apply(const wire::SessionEvent& e, bool outgoing);
  void handle_actions(const std::vector<wire::SessionAction>& actions);
  void send_photo();
  void finish_response(const std::string& why);
  void back_to_listening();
  void attempt_reconnect();
  void set_power(DeviceState s);
  void log(std::string event, nlohmann::json fields = nlohmann::json::object());
  std::vector<int16_t> mic_samples(std::size_t n);

  netsim::Scheduler& sched_;
  DeviceConfig cfg_;
  kws::StreamingDetector detector_;
  audio::PcmBuffer mic_;
  std::vector<Photo> photos_;
  SendFn send_;
  LinkUpFn link_up_;
  EnergyMeter meter_;

  wire::Session session_;
  Mode mode_ = Mode::listening;
  std::size_t mic_pos_ = 0;
  bool ticking_ = false;
  bool finished_ = false;
  uint32_t audio_seq_ = 0;
  audio::AdpcmEncoder encoder_;
  uint32_t ctrl_seq_ = 0;
  uint32_t photo_id_ = 0;
  std::size_t next_photo_ = 0;
  std::optional<netsim::Scheduler::EventId> hard_cap_timer_;
  std::optional<netsim::Scheduler::EventId> response_timer_;
  std::optional<netsim::Scheduler::EventId> drain_timer_;
  std::unique_ptr<wire::JitterBuffer> jitter_;
  bool speaker_running_ = false;
  bool response_ended_ = false;
  int reconnect_attempt_ = 0;
  bool reconnecting_ = false;

  DeviceStats stats_;
  std::vector<Episode> episodes_;
  std::vector<DeviceEvent> events_;
  std::vector<Photo> stored_;
  audio::PcmBuffer speaker_;
};

}  // namespace edgewear::device
