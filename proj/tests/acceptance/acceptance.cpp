// Prints one PASS/FAIL line per acceptance criterion. Exit status is the
// number of failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/dataset/toy.hpp"
#include "edgewear/device/power.hpp"
#include "edgewear/dsp/mfcc.hpp"
#include "edgewear/intent/classifier.hpp"
#include "edgewear/intent/router.hpp"
#include "edgewear/kws/detector.hpp"
#include "edgewear/kws/model_io.hpp"
#include "edgewear/kws/profile.hpp"
#include "edgewear/kws/quantize.hpp"
#include "edgewear/kws/train.hpp"
#include "edgewear/netsim/stream.hpp"
#include "edgewear/netsim/transport.hpp"
#include "edgewear/sim/scenario.hpp"
#include "edgewear/sim/system.hpp"

namespace fs = std::filesystem;
using namespace edgewear;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits.
constexpr double kMinCompressionRatio = 3.9;
constexpr double kCodecRuntimeS = 1.0;
constexpr double kMinSnrDb = 25.0;
constexpr int kSnrSignals = 100;
constexpr double kSnrRuntimeS = 5.0;
constexpr int kShiftTrials = 50;
constexpr double kShiftTol = 1e-4;
constexpr double kMinFloatValAccuracy = 0.95;
constexpr double kMinInt8Agreement = 0.95;
constexpr double kGradRelTol = 1e-3;
constexpr double kGradAbsEscape = 1e-8;
constexpr double kTrainRuntimeS = 120.0;
constexpr double kDetectorThreshold = 0.43;
constexpr double kMinEventGapS = 1.0;
constexpr double kDetectorRuntimeS = 30.0;
constexpr std::size_t kParams = 1492;
constexpr std::size_t kMaxPeakActivationBytes = 15400;
constexpr double kBatteryMah = 200.0;
constexpr double kIdleRuntimeTargetH = 2.0;
constexpr double kIdleRuntimeTol = 0.15;
constexpr double kActiveMinMin = 25.0, kActiveMaxMin = 30.0;
constexpr double kAllDayMa = 8.0, kAllDayMinH = 24.0;
constexpr double kMedianE2eLoS = 2.0, kMedianE2eHiS = 3.0;
constexpr double kMaxAdditivityError = 0.05;
constexpr double kE2eRuntimeS = 30.0;
constexpr double kMinIntentAccuracy = 0.90;
constexpr double kMaxClassifyMs = 50.0;

const fs::path kData = EDGEWEAR_DATA_DIR;
const fs::path kGolden = EDGEWEAR_GOLDEN_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

template <typename T>
std::vector<T> numbers(const std::string& line) {
  std::istringstream in(line);
  std::vector<T> out;
  for (T v; in >> v;) out.push_back(v);
  return out;
}

audio::PcmBuffer mono(std::vector<int16_t> s) {
  audio::PcmBuffer p;
  p.samples = std::move(s);
  return p;
}

std::vector<int16_t> band_limited(std::mt19937_64& rng, std::size_t n) {
  // 1-4 sines in 50-1000 Hz, peak sum at most half scale
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> f(50.0, 1000.0), w(0.02, 1.0), peak(0.05, 0.5), ph(0.0, 2 * std::numbers::pi);
  const int k = count(rng);
  std::vector<double> amps(k);
  double sum = 0.0;
  for (auto& a : amps) sum += a = w(rng);
  const double scale = peak(rng) / sum;
  std::vector<double> acc(n, 0.0);
  for (double a : amps) {
    const double hz = f(rng), p = ph(rng);
    for (std::size_t i = 0; i < n; ++i) acc[i] += a * scale * std::sin(2 * std::numbers::pi * hz * double(i) / 16000.0 + p);
  }
  std::vector<int16_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = audio::clamp_to_i16(acc[i] * 32767.0);
  return out;
}

double snr_db(const std::vector<int16_t>& ref, const std::vector<int16_t>& got) {
  double s = 0.0, e = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    s += double(ref[i]) * ref[i];
    const double d = double(ref[i]) - got[i];
    e += d * d;
  }
  return 10.0 * std::log10(s / std::max(e, 1e-12));
}

Outcome c1_compression() {
  const auto t0 = Clock::now();
  const auto pcm = audio::read_wav(kData / "fixtures" / "speech_proxy_60s.wav");
  const auto wav_bytes = audio::serialize_wav(pcm).size();
  const auto blocks = audio::adpcm_encode(pcm);
  std::size_t nibbles = 0, samples = 0;
  for (const auto& b : blocks) {
    nibbles += b.nibbles.size() * 2;
    samples += b.sample_count;
  }
  const bool four_bits = samples == pcm.samples.size() && nibbles == samples + (samples % 2);
  const auto ima_bytes = audio::write_ima_stream(pcm).size();
  const double ratio = double(wav_bytes) / double(ima_bytes);
  const double rt = seconds_since(t0);
  return {four_bits && ratio >= kMinCompressionRatio && rt < kCodecRuntimeS,
          fmt("%.1f s fixture, 4 bits/sample %s, %zu -> %zu bytes, ratio %.4f (>= %.1f), %.3f s", pcm.duration_s(),
              four_bits ? "yes" : "no", wav_bytes, ima_bytes, ratio, kMinCompressionRatio, rt)};
}

Outcome c2_roundtrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 1e9;
  for (int i = 0; i < kSnrSignals; ++i) {
    const auto s = band_limited(rng, 16000);
    worst = std::min(worst, snr_db(s, audio::adpcm_decode(audio::adpcm_encode(mono(s))).samples));
  }
  const auto lines = read_lines(kGolden / "ima_vectors.txt");
  std::size_t vectors = 0, mismatches = 0;
  for (std::size_t v = 0; v + 3 < lines.size(); v += 4) {
    const auto pcm = numbers<int>(lines[v + 1]);
    const auto dec = numbers<int>(lines[v + 3]);
    const auto out = audio::adpcm_decode(audio::adpcm_encode(mono({pcm.begin(), pcm.end()}))).samples;
    ++vectors;
    if (std::vector<int>(out.begin(), out.end()) != dec) ++mismatches;
  }
  const double rt = seconds_since(t0);
  return {worst >= kMinSnrDb && vectors > 0 && mismatches == 0 && rt < kSnrRuntimeS,
          fmt("min SNR %.2f dB over %d signals (>= %.0f), oracle vectors %zu/%zu bit-exact, %.3f s", worst, kSnrSignals,
              kMinSnrDb, vectors - mismatches, vectors, rt)};
}

Outcome c3_features() {
  dsp::MfccExtractor mfcc;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> amp(-9000, 9000), shift(1, 10);
  const auto first = mfcc.compute(std::vector<int16_t>(16000, 0));
  const std::size_t count = first.rows * first.cols;
  double worst = 0.0;
  for (int t = 0; t < kShiftTrials; ++t) {
    const int k = shift(rng);
    std::vector<int16_t> sig(16000 + std::size_t(k) * 320);
    for (auto& v : sig) v = static_cast<int16_t>(amp(rng));
    const auto a = mfcc.compute(std::span<const int16_t>(sig).first(16000));
    const auto b = mfcc.compute(std::span<const int16_t>(sig).subspan(std::size_t(k) * 320, 16000));
    for (std::size_t r = 1; r + std::size_t(k) < 49; ++r)
      for (std::size_t c = 0; c < 13; ++c) worst = std::max(worst, double(std::abs(b.at(r, c) - a.at(r + k, c))));
  }
  return {count == 637 && first.rows == 49 && worst <= kShiftTol,
          fmt("%zux%zu = %zu features, max shift deviation %.2e over %d inputs (<= %.0e)", first.rows, first.cols, count,
              worst, kShiftTrials, kShiftTol)};
}

Outcome c4_training() {
  const auto t0 = Clock::now();
  const auto clips = dataset::make_toy_corpus({60, 1});
  dataset::WindowingConfig w;
  w.seed = 11;
  const auto ds = dataset::windowed_feature_dataset(clips, w);
  kws::TrainConfig cfg;  // 100 epochs, lr 0.005, batch 32, 80/20
  const auto r = kws::train(ds, cfg);
  const double val = r.final_val_accuracy();
  double best = 0.0;
  for (const auto& m : r.history) best = std::max(best, m.val_accuracy);

  std::vector<dsp::FeatureMatrix> cal;
  for (auto i : r.train_indices) cal.push_back(ds.features[i]);
  const auto q = kws::quantize_int8(r.model, cal);
  std::size_t agree = 0;
  for (auto i : r.val_indices) {
    agree += kws::argmax(kws::forward_float(r.model, ds.features[i])) == kws::argmax(kws::forward_int8(q, ds.features[i]));
  }
  const double agreement = double(agree) / double(r.val_indices.size());

  // central differences over every parameter of the trained model
  std::vector<std::size_t> idx(r.val_indices.begin(), r.val_indices.begin() + 8);
  auto model = r.model;
  auto grad = kws::KwsModel::zeros();
  kws::loss_and_gradient(model, ds, idx, grad);
  auto params = model.parameters();
  const auto g = std::as_const(grad).parameters();
  std::size_t checked = 0, bad = 0;
  const double h = 1e-6;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double keep = params[t][i];
      params[t][i] = keep + h;
      const double up = kws::mean_loss(model, ds, idx);
      params[t][i] = keep - h;
      const double down = kws::mean_loss(model, ds, idx);
      params[t][i] = keep;
      const double num = (up - down) / (2 * h);
      const double diff = std::abs(num - g[t][i]);
      ++checked;
      if (diff / std::max(std::abs(num) + std::abs(g[t][i]), 1e-7) > kGradRelTol && diff > kGradAbsEscape) ++bad;
    }
  }
  const double rt = seconds_since(t0);
  return {r.history.size() <= 100 && val >= kMinFloatValAccuracy && agreement >= kMinInt8Agreement && bad == 0 &&
              rt < kTrainRuntimeS,
          fmt("%zu epochs, final val acc %.4f (best %.4f, >= %.2f), int8 agreement %.4f on %zu (>= %.2f), "
              "gradient %zu/%zu within %.0e, %.1f s",
              r.history.size(), val, best, kMinFloatValAccuracy, agreement, r.val_indices.size(), kMinInt8Agreement,
              checked - bad, checked, kGradRelTol, rt)};
}

Outcome c5_detector() {
  const auto t0 = Clock::now();
  const auto model = kws::load_quantized_model(kData / "models" / "kws_int8.bin");
  kws::DetectorConfig cfg;
  cfg.threshold = kDetectorThreshold;

  std::size_t noise_events = 0;
  int streams = 0;
  for (bool brown : {false, true}) {
    for (double level : {-50.0, -35.0, -20.0}) {
      std::mt19937_64 rng(500 + streams);
      noise_events += kws::detect_stream(dataset::synth_noise(60.0, level, brown, rng), cfg, model).size();
      ++streams;
    }
  }

  std::size_t positives = 0, matched_once = 0, extra = 0, close_pairs = 0;
  for (uint64_t f = 0; f < 10; ++f) {
    std::mt19937_64 rng(900 + f);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    std::vector<double> starts;
    for (int j = 0; j < 4; ++j) starts.push_back(1.5 + 4.0 * j + u(rng));
    const auto stream = dataset::make_detection_stream(20.0, starts, 1000 + f);
    const auto events = kws::detect_stream(stream, cfg, model);
    std::vector<int> hits(starts.size(), 0);
    for (const auto& e : events) {
      bool any = false;
      for (std::size_t j = 0; j < starts.size(); ++j) {
        if (e.t_end > starts[j] && e.t_start < starts[j] + 1.0) {
          ++hits[j];
          any = true;
        }
      }
      if (!any) ++extra;
    }
    for (std::size_t i = 1; i < events.size(); ++i) close_pairs += events[i].t_start - events[i - 1].t_start < kMinEventGapS;
    positives += starts.size();
    matched_once += std::count(hits.begin(), hits.end(), 1);
  }
  const double rt = seconds_since(t0);
  return {noise_events == 0 && matched_once == positives && extra == 0 && close_pairs == 0 && rt < kDetectorRuntimeS,
          fmt("noise: %zu events over %d x 60 s streams; positives: %zu/%zu detected exactly once, %zu extra, "
              "%zu pairs < %.0f s apart, %.1f s",
              noise_events, streams, matched_once, positives, extra, close_pairs, kMinEventGapS, rt)};
}

Outcome c6_footprint() {
  const auto fm = std::get<kws::KwsModel>(kws::load_model(kData / "models" / "kws_float.bin"));
  const auto q = kws::load_quantized_model(kData / "models" / "kws_int8.bin");
  const auto pf = kws::profile(fm);
  const auto pq = kws::profile(q);
  dsp::FeatureMatrix f = dsp::mfcc_window(dataset::synth_sine(300.0, 1.0, 0.2));
  const int reps = 2000;
  const auto t0 = Clock::now();
  double sink = 0.0;
  for (int i = 0; i < reps; ++i) sink += kws::forward_int8(q, f)[0];
  const double us = seconds_since(t0) / reps * 1e6;
  return {fm.parameter_count() == kParams && pq.params == kParams && pq.weight_bytes == kParams &&
              pq.peak_activation_bytes <= kMaxPeakActivationBytes,
          fmt("params %zu, int8 weight bytes %zu (+%zu bias widening), peak activation %zu B int8 / %zu B float "
              "(<= %zu), MACs %zu, %.1f us per int8 window%s",
              pf.params, pq.weight_bytes, pq.bias_widening_bytes, pq.peak_activation_bytes, pf.peak_activation_bytes,
              kMaxPeakActivationBytes, pq.macs, us, sink == 12345.678 ? " " : "")};
}

Outcome c7_power() {
  device::PowerProfile p;
  p.battery_mah = kBatteryMah;
  const double idle_h = device::runtime_to_empty_h(p.battery_mah, p.baseline_listening_ma);
  const double active_min = device::runtime_to_empty_h(p.battery_mah, p.active_query_ma) * 60.0;
  const double day_h = device::runtime_to_empty_h(p.battery_mah, kAllDayMa);
  const bool idle_ok = std::abs(idle_h - kIdleRuntimeTargetH) <= kIdleRuntimeTol * kIdleRuntimeTargetH;
  const bool active_ok = active_min >= kActiveMinMin && active_min <= kActiveMaxMin;
  return {idle_ok && active_ok && day_h >= kAllDayMinH,
          fmt("%.0f mAh: %.0f mA -> %.2f h (2 h +-15%%), %.0f mA -> %.1f min (25-30), %.0f mA -> %.1f h (>= 24)",
              p.battery_mah, p.baseline_listening_ma, idle_h, p.active_query_ma, active_min, kAllDayMa, day_h)};
}

std::vector<std::size_t> underruns_per_seed(const sim::Scenario& s) {
  std::vector<std::size_t> out;
  for (auto seed : s.stream_seeds) {
    auto sc = s.stream;
    sc.channel.seed = seed;
    out.push_back(netsim::run_stream_scenario(sc).underruns());
  }
  return out;
}

Outcome c8_jitter() {
  const auto with = sim::load_scenario(kData / "scenarios" / "jitter_prebuffer_300.json");
  const auto without = sim::load_scenario(kData / "scenarios" / "jitter_prebuffer_0.json");
  const auto a = underruns_per_seed(with);
  const auto b = underruns_per_seed(without);
  const bool setup = with.stream.jitter.prebuffer_ms == 300.0 && without.stream.jitter.prebuffer_ms == 0.0 &&
                     with.stream.channel.jitter_ms <= 250.0 && without.stream.channel.jitter_ms <= 250.0 &&
                     with.stream.duration_s >= 5.0 && a.size() == 20 && with.stream_seeds == without.stream_seeds;
  const auto total_a = std::accumulate(a.begin(), a.end(), std::size_t{0});
  const auto min_b = b.empty() ? 0 : *std::min_element(b.begin(), b.end());
  return {setup && total_a == 0 && min_b >= 1,
          fmt("jitter %.0f ms, %zu seeds x %.0f s: prebuffer 300 ms -> %zu underruns total; 0 ms -> min %zu per seed",
              with.stream.channel.jitter_ms, a.size(), with.stream.duration_s, total_a, min_b)};
}

Outcome c9_coexistence() {
  const auto naive = sim::load_scenario(kData / "scenarios" / "coexistence_naive.json");
  const auto prio = sim::load_scenario(kData / "scenarios" / "coexistence_prioritized.json");
  const auto a = underruns_per_seed(naive);
  const auto b = underruns_per_seed(prio);
  const bool setup = naive.stream.bidirectional && prio.stream.bidirectional && naive.stream.duration_s >= 10.0 &&
                     naive.stream_seeds == prio.stream_seeds && !a.empty();
  const auto min_a = a.empty() ? 0 : *std::min_element(a.begin(), a.end());
  const auto total_b = std::accumulate(b.begin(), b.end(), std::size_t{0});
  return {setup && min_a >= 1 && total_b == 0,
          fmt("%zu seeds x %.0f s bidirectional: naive min %zu underruns per run; prioritized %zu total", a.size(),
              naive.stream.duration_s, min_a, total_b)};
}

Outcome c10_latency() {
  const auto t0 = Clock::now();
  const auto s = sim::load_scenario(kData / "scenarios" / "walkthrough.json");
  const auto r = sim::run_system(s.system, sim::load_inputs(s));
  const double rt = seconds_since(t0);
  if (!r.latency) return {false, "no completed queries"};
  const double med = r.latency->end_to_end.p50 / 1000.0;
  return {med >= kMedianE2eLoS && med <= kMedianE2eHiS && r.latency->max_additivity_error <= kMaxAdditivityError &&
              rt < kE2eRuntimeS,
          fmt("%zu queries, median end-to-end %.3f s ([%.1f, %.1f]), max additivity error %.2f%% (<= %.0f%%), %.2f s",
              r.latency->count, med, kMedianE2eLoS, kMedianE2eHiS, r.latency->max_additivity_error * 100.0,
              kMaxAdditivityError * 100.0, rt)};
}

Outcome c11_intent() {
  const auto corpus = intent::load_intent_corpus(kData / "intents.tsv");
  std::vector<intent::LabeledUtterance> train, test;
  intent::stratified_split(corpus, 0.8, 7, train, test);
  const auto m = intent::fit(train).model;
  const double acc = intent::accuracy(m, test);
  const intent::Router router(intent::load_intent_model(kData / "models" / "intent.json"));
  const auto photo = router.handle("take a photo");
  const auto table = router.handle("what's on this table?");
  const bool routed = photo.intent == intent::IntentLabel::device_control &&
                      table.intent == intent::IntentLabel::visual_query;
  double worst_ms = 0.0;
  for (const auto& u : corpus) {
    const auto t0 = Clock::now();
    (void)router.handle(u.text);
    worst_ms = std::max(worst_ms, seconds_since(t0) * 1000.0);
  }
  return {corpus.size() == 200 && acc >= kMinIntentAccuracy && routed && worst_ms <= kMaxClassifyMs,
          fmt("%zu utterances, held-out accuracy %.3f on %zu (>= %.2f), 'take a photo' -> %s, "
              "'what's on this table?' -> %s, max classify %.3f ms (<= %.0f)",
              corpus.size(), acc, test.size(), kMinIntentAccuracy, std::string(intent::intent_name(photo.intent)).c_str(),
              std::string(intent::intent_name(table.intent)).c_str(), worst_ms, kMaxClassifyMs)};
}

Outcome c12_transports() {
  const auto s = sim::load_scenario(kData / "scenarios" / "walkthrough.json");
  netsim::TransportRegistry reg;
  const auto r = sim::run_system(s.system, sim::load_inputs(s), &reg);
  const auto snap = reg.snapshot();
  std::string names;
  for (const auto& t : snap) names += (names.empty() ? "" : ", ") + t.name + " [" + t.endpoint_a + "<->" + t.endpoint_b + "]";
  return {!snap.empty() && !r.records.empty() && netsim::only_between(snap, "device", "edge"),
          fmt("%zu transports opened: %s", snap.size(), names.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, c1_compression}, {2, c2_roundtrip}, {3, c3_features}, {4, c4_training},  {5, c5_detector},
      {6, c6_footprint},   {7, c7_power},     {8, c8_jitter},   {9, c9_coexistence}, {10, c10_latency},
      {11, c11_intent},    {12, c12_transports}};
  int failures = 0;
  for (const auto& [n, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
