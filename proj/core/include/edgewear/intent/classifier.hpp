#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace edgewear::intent {

enum class IntentLabel : uint8_t { device_control = 0, visual_query = 1, general_question = 2, conversational = 3 };

inline constexpr std::size_t kNumIntents = 4;
inline constexpr std::array<IntentLabel, kNumIntents> kAllIntents = {
    IntentLabel::device_control, IntentLabel::visual_query, IntentLabel::general_question,
    IntentLabel::conversational};

std::string_view intent_name(IntentLabel l);
std::optional<IntentLabel> parse_intent(std::string_view s);

using IntentPosterior = std::array<double, kNumIntents>;

struct LabeledUtterance {
  std::string text;
  IntentLabel label = IntentLabel::conversational;
};

/// Lowercase runs of ASCII letters and digits; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

/// (feature index, value), sorted by index.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// tf = count / tokens in document, idf = ln((1 + N) / (1 + df)) + 1.
class TfidfVectorizer {
 public:
  TfidfVectorizer() = default;
  TfidfVectorizer(std::vector<std::string> vocabulary, std::vector<double> idf);

  static TfidfVectorizer fit(std::span<const std::string> documents);

  SparseVector transform(std::string_view text) const;
  std::size_t size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const std::vector<double>& idf() const { return idf_; }
  std::optional<std::size_t> index(std::string_view token) const;

 private:
  std::vector<std::string> vocab_;  // sorted
  std::vector<double> idf_;
  std::map<std::string, std::size_t, std::less<>> lookup_;
};

/// Multinomial logistic regression over sparse features.
struct IntentClassifier {
  std::size_t n_features = 0;
  std::vector<double> weights;  // [4][n_features]
  std::array<double, kNumIntents> bias{};

  static IntentClassifier zeros(std::size_t n_features);
  std::array<double, kNumIntents> logits(const SparseVector& x) const;
  IntentPosterior posterior(const SparseVector& x) const;
};

struct IntentFitConfig {
  int iterations = 2000;
  double l2 = 1e-4;
  /// 0 picks 1/L from a Lipschitz bound on the loss gradient, which keeps
  /// full-batch descent monotone.
  double learning_rate = 0.0;
};

struct IntentFitResult;

struct Classification {
  IntentLabel label = IntentLabel::conversational;
  IntentPosterior posterior{};
  std::size_t known_tokens = 0;

  double confidence() const { return posterior[static_cast<std::size_t>(label)]; }
};

class IntentModel {
 public:
  IntentModel() = default;
  IntentModel(TfidfVectorizer vectorizer, IntentClassifier classifier);

  /// Input with no in-vocabulary token falls back to conversational with a
  /// uniform posterior.
  Classification classify(std::string_view text) const;

  const TfidfVectorizer& vectorizer() const { return vec_; }
  const IntentClassifier& classifier() const { return clf_; }

 private:
  TfidfVectorizer vec_;
  IntentClassifier clf_;
};

struct IntentFitResult {
  IntentModel model;
  std::vector<double> loss_history;  // one entry per iteration, before the step
  double learning_rate = 0.0;
};

/// Mean cross-entropy plus (l2/2)*||W||^2 (bias not decayed); fills `grad`.
double intent_loss_and_gradient(const IntentClassifier& clf, std::span<const SparseVector> x,
                                std::span<const IntentLabel> y, double l2, IntentClassifier& grad);

/// Throws ConfigError on an empty corpus or fewer than two classes.
IntentFitResult fit(std::span<const LabeledUtterance> corpus, const IntentFitConfig& cfg = {});

double accuracy(const IntentModel& model, std::span<const LabeledUtterance> data);

/// Tab-separated "label<TAB>text" with a header row.
std::vector<LabeledUtterance> load_intent_corpus(const std::filesystem::path& path);
void stratified_split(std::span<const LabeledUtterance> data, double train_fraction, uint64_t seed,
                      std::vector<LabeledUtterance>& train, std::vector<LabeledUtterance>& test);

nlohmann::json to_json(const IntentModel& model);
IntentModel intent_model_from_json(const nlohmann::json& j);
void save_intent_model(const IntentModel& model, const std::filesystem::path& path);
IntentModel load_intent_model(const std::filesystem::path& path);

}  // namespace edgewear::intent
