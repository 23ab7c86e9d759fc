#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "edgewear/kws/model.hpp"

namespace edgewear::kws {

/// Features paired with labels; the unit of training and evaluation.
struct FeatureDataset {
  std::vector<dsp::FeatureMatrix> features;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
};

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.005;
  std::size_t batch_size = 32;
  double train_fraction = 0.8;
  double dropout = 0.25;
  uint64_t seed = 7;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  KwsModel model;
  KwsModel initial;  // weights before the first update
  std::vector<EpochMetrics> history;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;

  double final_val_accuracy() const { return history.empty() ? 0.0 : history.back().val_accuracy; }
};

/// Seeded stratified split: `fraction` of every class goes to training.
void stratified_split(std::span<const Label> labels, double fraction, uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& val);

/// Per-coefficient mean / inverse std over all frames of the given examples.
InputNorm fit_input_norm(const FeatureDataset& data, std::span<const std::size_t> indices);

/// Mini-batch SGD with softmax cross-entropy. Requires at least two
/// examples of every label (ConfigError otherwise). Deterministic in `seed`.
TrainResult train(const FeatureDataset& data, const TrainConfig& cfg = {});

/// Mean cross-entropy and the gradient of every parameter, dropout off.
double loss_and_gradient(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices,
                         KwsModel& grad);
double mean_loss(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices);
double accuracy(const KwsModel& model, const FeatureDataset& data, std::span<const std::size_t> indices);

void write_metrics_csv(std::span<const EpochMetrics> history, std::ostream& out);

}  // namespace edgewear::kws
