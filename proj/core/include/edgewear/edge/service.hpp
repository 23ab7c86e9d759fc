#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgewear/edge/endpoint.hpp"
#include "edgewear/edge/stubs.hpp"
#include "edgewear/intent/router.hpp"
#include "edgewear/netsim/scheduler.hpp"
#include "edgewear/wire/session.hpp"

namespace edgewear::edge {

enum class Stage : uint8_t { decode, endpoint, asr, route, inference, tts, encode_back };

inline constexpr std::size_t kNumStages = 7;
inline constexpr std::array<Stage, kNumStages> kAllStages = {Stage::decode, Stage::endpoint,  Stage::asr,
                                                             Stage::route,  Stage::inference, Stage::tts,
                                                             Stage::encode_back};

std::string_view stage_name(Stage s);

struct PipelineStageResult {
  Stage stage = Stage::decode;
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  std::string summary;

  double duration_ms() const { return t_end_ms - t_start_ms; }
};

struct QueryRecord {
  uint32_t id = 0;
  /// Edge time at which the utterance was complete (endpoint boundary or
  /// END_OF_UTTERANCE, whichever came first).
  double boundary_ms = 0.0;
  bool empty_utterance = false;
  std::string asr_key;
  std::string transcript;
  intent::IntentLabel intent = intent::IntentLabel::conversational;
  double confidence = 0.0;
  intent::Pathway pathway = intent::Pathway::conversational_pipeline;
  std::string response_text;
  std::optional<std::string> photo_ref;
  std::optional<std::string> device_command;
  bool error = false;
  std::vector<PipelineStageResult> stages;
  /// Time between encode_back finishing and the first delivered chunk being
  /// sent (waiting for END_OF_UTTERANCE, or lost chunks).
  double response_wait_ms = 0.0;
  double first_response_send_ms = -1.0;
  double first_response_deliver_ms = -1.0;
  double transport_ms = 0.0;
  /// boundary -> first RESPONSE_AUDIO delivered at the device; -1 if none was.
  double end_to_end_ms = -1.0;
  std::size_t response_chunks = 0;
  double response_audio_s = 0.0;

  double stage_sum_ms() const;
};

nlohmann::json to_json(const QueryRecord& r);

/// Append-only JSON-lines log on local disk (or in memory only).
class QueryLog {
 public:
  QueryLog() = default;
  explicit QueryLog(const std::filesystem::path& path);

  void append(const QueryRecord& r);
  const std::vector<QueryRecord>& records() const { return records_; }

 private:
  std::vector<QueryRecord> records_;
  std::unique_ptr<std::ofstream> out_;
};

/// Fixed per-query processing costs of the non-model stages (simulated ms).
struct PipelineCosts {
  double decode_ms = 10.0;
  double endpoint_ms = 0.0;
  double route_ms = 2.0;
  double encode_back_ms = 5.0;
};

struct EdgeConfig {
  EndpointConfig endpoint;
  PipelineCosts costs;
  double photo_timeout_ms = 3000.0;
  int tts_rate_hz = 22050;
  double chunk_interval_ms = 20.0;
};

/// The phone side of a session. Runs on the shared scheduler; its only
/// outlet is `send`, which hands frames to the session channel.
class EdgeService {
 public:
  /// Returns the delivery time at the device, or nullopt if the frame was lost.
  using SendFn = std::function<std::optional<double>(const wire::Frame&, wire::ChannelKind)>;
  using LogFn = std::function<void(const std::string& event, const nlohmann::json& fields)>;

  EdgeService(netsim::Scheduler& sched, EdgeConfig cfg, StubSet stubs, intent::Router router, SendFn send,
              QueryLog* log = nullptr);

  void set_logger(LogFn fn) { logger_ = std::move(fn); }

  /// Starts provisioning over the provisioning channel.
  void provision(const wire::Credentials& creds);
  void on_frame(const wire::Frame& f, wire::ChannelKind channel);
  void on_channel_drop();

  const wire::Session& session() const { return session_; }
  const std::vector<QueryRecord>& records() const { return records_; }
  const intent::Router& router() const { return router_; }

 private:
  struct Photo {
    wire::PhotoMeta meta;
    std::vector<uint8_t> bytes;
    bool complete() const { return bytes.size() >= meta.total_bytes; }
  };
  struct Query;

  void send_frame(wire::Frame f, wire::ChannelKind ch);
  void apply(const wire::SessionEvent& e, bool outgoing);
  void log(const std::string& event, const nlohmann::json& fields);
  void begin_pipeline(double boundary_ms, std::optional<EndpointEvent> ep);
  void run_inference(std::shared_ptr<Query> q);
  void finish_inference(std::shared_ptr<Query> q, std::string text, double latency_ms, std::string summary);
  void start_streaming(std::shared_ptr<Query> q);
  void stream_next(std::shared_ptr<Query> q, std::size_t i);
  void reset_utterance();

  netsim::Scheduler& sched_;
  EdgeConfig cfg_;
  StubSet stubs_;
  intent::Router router_;
  SendFn send_;
  QueryLog* log_;
  LogFn logger_;

  wire::Session session_;
  uint32_t ctrl_seq_ = 0;
  uint32_t next_query_id_ = 0;
  EndpointDetector endpoint_;
  std::vector<int16_t> utterance_;
  bool pipeline_started_ = false;
  bool eou_received_ = false;
  std::optional<Photo> photo_;
  std::shared_ptr<Query> active_;
  std::vector<QueryRecord> records_;
};

struct Percentiles {
  double p50 = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);
Percentiles summarize(const std::vector<double>& values);

struct LatencyReport {
  std::size_t count = 0;
  std::array<Percentiles, kNumStages> stages{};
  Percentiles end_to_end;
  Percentiles transport;
  /// max over records of |e2e - (stage sum + transport)| / e2e
  double max_additivity_error = 0.0;

  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Uses records whose response reached the device. Throws InputError if
/// there are none.
LatencyReport measure_latency(std::span<const QueryRecord> records);

}  // namespace edgewear::edge
