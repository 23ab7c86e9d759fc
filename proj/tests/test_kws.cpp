#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>

#include "edgewear/dataset/toy.hpp"
#include "edgewear/error.hpp"
#include "edgewear/kws/detector.hpp"
#include "edgewear/kws/model.hpp"
#include "edgewear/kws/model_io.hpp"
#include "edgewear/kws/profile.hpp"
#include "edgewear/kws/quantize.hpp"
#include "edgewear/kws/train.hpp"
#include "oracles/kws_reference.hpp"
#include "support.hpp"

using namespace edgewear;
using namespace edgewear::kws;

namespace {

dsp::FeatureMatrix random_features(std::mt19937_64& rng, double scale = 5.0) {
  std::normal_distribution<double> n(0.0, scale);
  dsp::FeatureMatrix f{kInputFrames, kInputCoeffs, std::vector<float>(kInputFrames * kInputCoeffs)};
  for (auto& v : f.values) v = static_cast<float>(n(rng));
  return f;
}

FeatureDataset random_dataset(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  FeatureDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.features.push_back(random_features(rng));
    d.labels.push_back(kAllLabels[i % kNumLabels]);
  }
  return d;
}

KwsModel model_with_bias(uint64_t seed) {
  auto m = KwsModel::init(seed);
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& b : m.conv1.bias) b = n(rng);
  for (auto& b : m.conv2.bias) b = n(rng);
  for (auto& b : m.dense.bias) b = n(rng);
  for (std::size_t c = 0; c < kInputCoeffs; ++c) {
    m.norm.mean[c] = 0.3 * static_cast<double>(c);
    m.norm.inv_std[c] = 0.2 + 0.01 * static_cast<double>(c);
  }
  return m;
}

}  // namespace

TEST(KwsModel, ParameterCountIs1492) {
  const auto m = KwsModel::zeros();
  EXPECT_EQ(m.conv1.parameter_count(), 13u * 8 * 3 + 8);
  EXPECT_EQ(m.conv2.parameter_count(), 8u * 16 * 3 + 16);
  EXPECT_EQ(m.dense.parameter_count(), 192u * 4 + 4);
  EXPECT_EQ(m.parameter_count(), 1492u);
  std::size_t total = 0;
  for (auto s : m.parameters()) total += s.size();
  EXPECT_EQ(total, 1492u);
}

TEST(KwsModel, ForwardMatchesScalarOracle) {
  std::mt19937_64 rng(4);
  const auto m = model_with_bias(3);
  for (int i = 0; i < 20; ++i) {
    const auto f = random_features(rng);
    const auto got = forward_logits(m, f);
    const auto ref = oracle::float_logits(m, f);
    for (std::size_t k = 0; k < kNumLabels; ++k) EXPECT_NEAR(got[k], ref[k], 1e-9 * (1 + std::abs(ref[k])));
    const auto p = forward_float(m, f);
    double sum = 0;
    for (double v : p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(KwsModel, RejectsWrongShape) {
  dsp::FeatureMatrix f{48, 13, std::vector<float>(48 * 13)};
  EXPECT_THROW(forward_float(KwsModel::zeros(), f), InputError);
}

TEST(KwsModel, SoftmaxIsShiftInvariantAndStable) {
  const std::array<double, 4> a{1000.0, 1001.0, 999.0, 1000.5};
  const std::array<double, 4> b{0.0, 1.0, -1.0, 0.5};
  const auto pa = softmax(a), pb = softmax(b);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
  EXPECT_EQ(argmax(b), 1u);
}

// Central differences against the analytic gradient on every parameter of
// a few examples. Relative tolerance 1e-3.
TEST(KwsTrain, GradientMatchesFiniteDifferences) {
  const auto data = random_dataset(6, 17);
  std::vector<std::size_t> idx = {0, 1, 2, 3, 4, 5};
  auto model = model_with_bias(21);
  auto grad = KwsModel::zeros();
  loss_and_gradient(model, data, idx, grad);

  auto params = model.parameters();
  const auto gparams = std::as_const(grad).parameters();
  const double h = 1e-6;
  std::size_t checked = 0, failures = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double keep = params[t][i];
      params[t][i] = keep + h;
      const double up = mean_loss(model, data, idx);
      params[t][i] = keep - h;
      const double down = mean_loss(model, data, idx);
      params[t][i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = gparams[t][i];
      const double denom = std::max(std::abs(numeric) + std::abs(analytic), 1e-7);
      ++checked;
      if (std::abs(numeric - analytic) / denom > 1e-3 && std::abs(numeric - analytic) > 1e-8) ++failures;
    }
  }
  EXPECT_EQ(checked, 1492u);
  EXPECT_EQ(failures, 0u);
}

TEST(KwsTrain, StratifiedSplitKeepsClassBalance) {
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(kAllLabels[i % 4]);
  std::vector<std::size_t> tr, va;
  stratified_split(labels, 0.8, 5, tr, va);
  EXPECT_EQ(tr.size(), 32u);
  EXPECT_EQ(va.size(), 8u);
  std::array<int, 4> per{};
  for (auto i : va) per[index_of(labels[i])]++;
  for (int c : per) EXPECT_EQ(c, 2);
  std::vector<std::size_t> tr2, va2;
  stratified_split(labels, 0.8, 5, tr2, va2);
  EXPECT_EQ(tr, tr2);
}

TEST(KwsTrain, DeterministicAndLearnsSmallToyCorpus) {
  const auto clips = dataset::make_toy_corpus({16, 3});
  dataset::WindowingConfig w;
  w.variants_per_clip = 1;
  const auto ds = dataset::windowed_feature_dataset(clips, w);
  TrainConfig cfg;
  cfg.epochs = 15;
  const auto a = train(ds, cfg);
  const auto b = train(ds, cfg);
  ASSERT_EQ(a.history.size(), 15u);
  EXPECT_EQ(a.model.dense.weight, b.model.dense.weight);
  EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
  EXPECT_GT(a.history.back().train_accuracy, 0.6);
}

TEST(KwsTrain, NeedsTwoExamplesPerClass) {
  auto d = random_dataset(4, 1);
  EXPECT_THROW(train(d, {}), ConfigError);
}

TEST(Quantize, MultiplierRepresentation) {
  for (double real : {0.0003, 0.0271, 0.5, 0.75, 1.0, 3.9}) {
    const auto m = quantize_multiplier(real);
    EXPECT_GE(m.m0, 1 << 14);
    EXPECT_LT(m.m0, 1 << 15);
    EXPECT_NEAR(m.m0 * std::ldexp(1.0, -m.shift), real, real * 1.0 / (1 << 14));
  }
  const FixedMultiplier half{1 << 14, 15};  // 0.5
  EXPECT_EQ(apply_multiplier(3, half), 2);    // 1.5 rounds up
  EXPECT_EQ(apply_multiplier(-3, half), -1);  // -1.5 rounds up
  EXPECT_EQ(apply_multiplier(100, half), 50);
}

TEST(Quantize, ActivationAndWeightParams) {
  const auto a = choose_activation_params(-1.0, 3.0);
  EXPECT_NEAR(a.scale, 4.0 / 255.0, 1e-12);
  EXPECT_EQ(quantize_value(0.0, a), a.zero_point);  // zero is exact
  EXPECT_EQ(quantize_value(-1.0, a), -128);
  EXPECT_EQ(quantize_value(3.0, a), 127);
  const auto deg = choose_activation_params(0.0, 0.0);
  EXPECT_EQ(deg.scale, kMinQuantScale);
  const std::vector<double> w = {-0.5, 0.25, 0.127};
  const auto wp = choose_weight_params(w);
  EXPECT_EQ(wp.zero_point, 0);
  EXPECT_NEAR(wp.scale, 0.5 / 127.0, 1e-15);
}

TEST(Quantize, IntegerPipelineMatchesReplay) {
  std::mt19937_64 rng(8);
  const auto m = model_with_bias(5);
  std::vector<dsp::FeatureMatrix> cal;
  for (int i = 0; i < 32; ++i) cal.push_back(random_features(rng));
  const auto q = quantize_int8(m, cal);
  EXPECT_EQ(q.parameter_count(), 1492u);
  for (int i = 0; i < 50; ++i) {
    const auto f = random_features(rng);
    const auto got = forward_int8_logits(q, f);
    const auto ref = oracle::int8_logits(q, f);
    for (std::size_t k = 0; k < 4; ++k) ASSERT_EQ(int(got[k]), ref[k]) << "window " << i;
  }
}

TEST(Quantize, Int8TracksFloatOnCalibrationData) {
  std::mt19937_64 rng(12);
  const auto m = model_with_bias(6);
  std::vector<dsp::FeatureMatrix> cal;
  for (int i = 0; i < 64; ++i) cal.push_back(random_features(rng));
  const auto q = quantize_int8(m, cal);
  double worst = 0;
  for (const auto& f : cal) {
    const auto pf = forward_float(m, f);
    const auto pq = forward_int8(q, f);
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(pf[k] - pq[k]));
  }
  EXPECT_LT(worst, 0.1);
  EXPECT_THROW(quantize_int8(m, std::span<const dsp::FeatureMatrix>{}), ConfigError);
}

TEST(ModelIo, FloatAndInt8RoundTrip) {
  std::mt19937_64 rng(1);
  const auto m = model_with_bias(2);
  const auto back = std::get<KwsModel>(parse_model(serialize_model(m)));
  // stored as f32
  for (std::size_t i = 0; i < m.dense.weight.size(); ++i)
    EXPECT_EQ(back.dense.weight[i], static_cast<double>(static_cast<float>(m.dense.weight[i])));
  std::vector<dsp::FeatureMatrix> cal = {random_features(rng), random_features(rng)};
  const auto q = quantize_int8(m, cal);
  const auto qb = std::get<QuantizedKwsModel>(parse_model(serialize_model(q)));
  EXPECT_EQ(qb.conv1.weight, q.conv1.weight);
  EXPECT_EQ(qb.dense.bias, q.dense.bias);
  EXPECT_EQ(qb.dense.requant, q.dense.requant);
  const auto f = random_features(rng);
  EXPECT_EQ(forward_int8_logits(qb, f), forward_int8_logits(q, f));
}

TEST(ModelIo, RejectsBadBytes) {
  auto bytes = serialize_model(KwsModel::zeros());
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(parse_model(bad), FormatError);
  bad = bytes;
  bad[4] = 9;  // version
  EXPECT_THROW(parse_model(bad), FormatError);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(parse_model(bytes), FormatError);
}

TEST(ModelIo, BundledModelsLoad) {
  const auto q = load_quantized_model(support::data_dir() / "models" / "kws_int8.bin");
  EXPECT_EQ(q.parameter_count(), 1492u);
  EXPECT_NO_THROW(std::get<KwsModel>(load_model(support::data_dir() / "models" / "kws_float.bin")));
}

TEST(Profile, HandCountedResources) {
  const auto m = KwsModel::zeros();
  const auto pf = profile(m);
  EXPECT_EQ(pf.params, 1492u);
  EXPECT_EQ(pf.macs, 49u * 8 * 3 * 13 + 24u * 16 * 3 * 8 + 192u * 4);
  EXPECT_EQ(pf.weight_bytes, 1492u * 4);
  EXPECT_EQ(pf.peak_activation_bytes, (49u * 13 + 49u * 8) * 4);
  std::mt19937_64 rng(1);
  std::vector<dsp::FeatureMatrix> cal = {random_features(rng)};
  const auto pq = profile(quantize_int8(model_with_bias(1), cal));
  EXPECT_EQ(pq.weight_bytes, 1492u);
  EXPECT_EQ(pq.peak_activation_bytes, 49u * 13 + 49u * 8);
  EXPECT_EQ(pq.bias_widening_bytes, 3u * 28);
}

namespace {

// Scorer replaying a fixed wake-word posterior per window.
StreamingDetector::Scorer scripted(std::vector<double> p) {
  auto queue = std::make_shared<std::deque<double>>(p.begin(), p.end());
  return [queue](const dsp::FeatureMatrix&) {
    const double v = queue->empty() ? 0.0 : queue->front();
    if (!queue->empty()) queue->pop_front();
    return Posterior{v, 0.0, 1.0 - v, 0.0};
  };
}

std::vector<DetectionEvent> run_scripted(const std::vector<double>& p, DetectorConfig cfg = {}) {
  StreamingDetector det(scripted(p), cfg);
  // 1 s window, 0.5 s stride: n windows need (n + 1) * 8000 samples.
  return det.push(std::vector<int16_t>((p.size() + 1) * 8000, 0));
}

}  // namespace

TEST(Detector, EmaAndThreshold) {
  // s: 0.4, 0.6 -> fires at window 1 (t = 0.5 s) with s = 0.6
  auto ev = run_scripted({0.8, 0.8, 0.0, 0.0});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_DOUBLE_EQ(ev[0].t_start, 0.5);
  EXPECT_DOUBLE_EQ(ev[0].t_end, 1.5);
  EXPECT_NEAR(ev[0].score, 0.6, 1e-12);
  // a single 0.8 window only reaches s = 0.4 < 0.43
  EXPECT_TRUE(run_scripted({0.8, 0.0, 0.0}).empty());
}

TEST(Detector, StaysQuietWhileAboveThreshold) {
  EXPECT_EQ(run_scripted(std::vector<double>(20, 0.9)).size(), 1u);
}

TEST(Detector, SuppressionWindow) {
  // falls below and rises again 1 window later: still inside 1 s suppression
  auto ev = run_scripted({1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0});
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_DOUBLE_EQ(ev[0].t_start, 0.0);
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_GE(ev[i].t_start - ev[i - 1].t_start, 1.0);
  DetectorConfig long_supp;
  long_supp.suppression_s = 3.0;
  auto ev2 = run_scripted({1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0}, long_supp);
  ASSERT_EQ(ev2.size(), 2u);
  EXPECT_GE(ev2[1].t_start - ev2[0].t_start, 3.0);
}

TEST(Detector, ChunkingDoesNotChangeResults) {
  const auto q = load_quantized_model(support::data_dir() / "models" / "kws_int8.bin");
  const auto stream = dataset::make_detection_stream(12.0, {2.0, 7.0}, 4);
  const auto whole = detect_stream(stream, {}, q);
  StreamingDetector det(q);
  std::vector<DetectionEvent> pieces;
  for (std::size_t at = 0; at < stream.samples.size(); at += 333) {
    const auto n = std::min<std::size_t>(333, stream.samples.size() - at);
    for (auto& e : det.push(std::span(stream.samples).subspan(at, n))) pieces.push_back(e);
  }
  ASSERT_EQ(whole.size(), pieces.size());
  for (std::size_t i = 0; i < whole.size(); ++i) EXPECT_EQ(whole[i].t_start, pieces[i].t_start);
}

TEST(Detector, ResetMovesClock) {
  StreamingDetector det(scripted({0.0, 0.0, 1.0, 1.0}));
  det.reset(10.0);
  EXPECT_DOUBLE_EQ(det.time_s(), 10.0);
  const auto ev = det.push(std::vector<int16_t>(5 * 8000, 0));
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_DOUBLE_EQ(ev[0].t_start, 11.0);
}

TEST(Detector, ConfigValidation) {
  DetectorConfig c;
  c.threshold = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.suppression_s = 0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.smoothing = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
