#include "edgewear/kws/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "edgewear/error.hpp"
#include "network.hpp"

namespace edgewear::kws {

void stratified_split(std::span<const Label> labels, double fraction, uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& val) {
  train.clear();
  val.clear();
  std::mt19937_64 rng(seed);
  for (Label l : kAllLabels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == l) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    val.insert(val.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
}

InputNorm fit_input_norm(const FeatureDataset& data, std::span<const std::size_t> indices) {
  InputNorm norm;
  std::vector<double> sum(kInputCoeffs, 0.0);
  std::vector<double> sq(kInputCoeffs, 0.0);
  double n = 0.0;
  for (std::size_t i : indices) {
    const auto& f = data.features[i];
    for (std::size_t t = 0; t < f.rows; ++t) {
      for (std::size_t c = 0; c < kInputCoeffs; ++c) {
        const double v = f.at(t, c);
        sum[c] += v;
        sq[c] += v * v;
      }
    }
    n += static_cast<double>(f.rows);
  }
  if (n == 0.0) return norm;
  for (std::size_t c = 0; c < kInputCoeffs; ++c) {
    const double mean = sum[c] / n;
    const double var = std::max(sq[c] / n - mean * mean, 0.0);
    // Stored as f32 in model files; round now so saved models replay exactly.
    norm.mean[c] = static_cast<float>(mean);
    norm.inv_std[c] = static_cast<float>(1.0 / std::sqrt(var + 1e-6));
  }
  return norm;
}

namespace {

void check_dataset(const FeatureDataset& data) {
  if (data.features.size() != data.labels.size()) throw ConfigError("train: features/labels size mismatch");
  std::array<std::size_t, kNumLabels> counts{};
  for (Label l : data.labels) ++counts[index_of(l)];
  for (Label l : kAllLabels) {
    if (counts[index_of(l)] < 2) {
      throw ConfigError("train: class '" + std::string(label_name(l)) + "' has " +
                        std::to_string(counts[index_of(l)]) + " examples (need >= 2)");
    }
  }
  for (const auto& f : data.features) check_feature_shape(f);
}

void zero(KwsModel& g) {
  for (auto p : g.parameters()) std::fill(p.begin(), p.end(), 0.0);
}

}  // namespace

double loss_and_gradient(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices,
                         KwsModel& grad) {
  grad = KwsModel::zeros();
  if (indices.empty()) return 0.0;
  const double w = 1.0 / static_cast<double>(indices.size());
  detail::ForwardCache cache;
  double loss = 0.0;
  for (std::size_t i : indices) {
    detail::forward(model, data.features[i], cache);
    loss += w * detail::backward(model, cache, index_of(data.labels[i]), grad, w);
  }
  return loss;
}

double mean_loss(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  double loss = 0.0;
  detail::ForwardCache cache;
  for (std::size_t i : indices) {
    detail::forward(model, data.features[i], cache);
    const auto p = softmax(cache.logits);
    loss -= std::log(std::max(p[index_of(data.labels[i])], 1e-300));
  }
  return loss / static_cast<double>(indices.size());
}

double accuracy(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  detail::ForwardCache cache;
  for (std::size_t i : indices) {
    detail::forward(model, data.features[i], cache);
    if (argmax(cache.logits) == index_of(data.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

TrainResult train(const FeatureDataset& data, const TrainConfig& cfg) {
  check_dataset(data);
  if (cfg.epochs < 0 || cfg.batch_size == 0) throw ConfigError("train: epochs must be >= 0 and batch size > 0");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) throw ConfigError("train: split must be in (0, 1)");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("train: dropout must be in [0, 1)");

  TrainResult result;
  stratified_split(data.labels, cfg.train_fraction, cfg.seed, result.train_indices, result.val_indices);

  KwsModel model = KwsModel::init(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  model.norm = fit_input_norm(data, result.train_indices);
  result.initial = model;

  std::mt19937_64 rng(cfg.seed + 1);
  std::bernoulli_distribution keep(1.0 - cfg.dropout);
  const double keep_scale = 1.0 / (1.0 - cfg.dropout);

  detail::DropoutMasks masks;
  masks.after_pool1.resize(kPool1Frames * kConv1Channels);
  masks.after_pool2.resize(kFlatten);
  auto draw_masks = [&] {
    for (auto& m : masks.after_pool1) m = keep(rng) ? keep_scale : 0.0;
    for (auto& m : masks.after_pool2) m = keep(rng) ? keep_scale : 0.0;
  };

  std::vector<std::size_t> order = result.train_indices;
  KwsModel grad = KwsModel::zeros();
  detail::ForwardCache cache;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(end - start);
      zero(grad);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const detail::DropoutMasks* mp = nullptr;
        if (cfg.dropout > 0.0) {
          draw_masks();
          mp = &masks;
        }
        detail::forward(model, data.features[i], cache, mp);
        if (argmax(cache.logits) == index_of(data.labels[i])) ++correct;
        epoch_loss += detail::backward(model, cache, index_of(data.labels[i]), grad, w, mp);
      }
      auto params = model.parameters();
      auto grads = grad.parameters();
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t j = 0; j < params[t].size(); ++j) params[t][j] -= cfg.learning_rate * grads[t][j];
      }
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
    m.train_accuracy = order.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(order.size());
    m.val_loss = mean_loss(model, data, result.val_indices);
    m.val_accuracy = accuracy(model, data, result.val_indices);
    result.history.push_back(m);
  }
  result.model = std::move(model);
  return result;
}

void write_metrics_csv(std::span<const EpochMetrics> history, std::ostream& out) {
  out << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << m.train_loss << ',' << m.train_accuracy << ',' << m.val_loss << ',' << m.val_accuracy
        << '\n';
  }
}

}  // namespace edgewear::kws
