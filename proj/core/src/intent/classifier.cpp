#include "edgewear/intent/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgewear/error.hpp"

namespace edgewear::intent {

namespace {

constexpr int kModelVersion = 1;

std::size_t idx(IntentLabel l) { return static_cast<std::size_t>(l); }

double squared_norm(const SparseVector& x) {
  double s = 0.0;
  for (const auto& [i, v] : x) s += v * v;
  return s;
}

IntentPosterior softmax4(const std::array<double, kNumIntents>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  IntentPosterior p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumIntents; ++k) sum += (p[k] = std::exp(z[k] - m));
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

std::string_view intent_name(IntentLabel l) {
  switch (l) {
    case IntentLabel::device_control: return "device_control";
    case IntentLabel::visual_query: return "visual_query";
    case IntentLabel::general_question: return "general_question";
    case IntentLabel::conversational: return "conversational";
  }
  return "?";
}

std::optional<IntentLabel> parse_intent(std::string_view s) {
  for (auto l : kAllIntents) {
    if (intent_name(l) == s) return l;
  }
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TfidfVectorizer::TfidfVectorizer(std::vector<std::string> vocabulary, std::vector<double> idf)
    : vocab_(std::move(vocabulary)), idf_(std::move(idf)) {
  if (vocab_.size() != idf_.size()) throw FormatError("tfidf: vocabulary and idf sizes differ");
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!(idf_[i] >= 0.0)) throw FormatError("tfidf: negative idf for '" + vocab_[i] + "'");
    if (!lookup_.emplace(vocab_[i], i).second) throw FormatError("tfidf: duplicate token '" + vocab_[i] + "'");
  }
}

TfidfVectorizer TfidfVectorizer::fit(std::span<const std::string> documents) {
  std::map<std::string, std::size_t> df;
  for (const auto& d : documents) {
    const auto toks = tokenize(d);
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
  }
  const double n = static_cast<double>(documents.size());
  std::vector<std::string> vocab;
  std::vector<double> idf;
  for (const auto& [tok, count] : df) {
    vocab.push_back(tok);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return TfidfVectorizer(std::move(vocab), std::move(idf));
}

std::optional<std::size_t> TfidfVectorizer::index(std::string_view token) const {
  auto it = lookup_.find(token);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SparseVector TfidfVectorizer::transform(std::string_view text) const {
  const auto toks = tokenize(text);
  std::map<std::size_t, double> counts;
  for (const auto& t : toks) {
    if (auto i = index(t)) counts[*i] += 1.0;
  }
  SparseVector out;
  const double len = static_cast<double>(toks.size());
  for (const auto& [i, c] : counts) out.emplace_back(i, c / len * idf_[i]);
  return out;
}

IntentClassifier IntentClassifier::zeros(std::size_t n_features) {
  IntentClassifier c;
  c.n_features = n_features;
  c.weights.assign(kNumIntents * n_features, 0.0);
  return c;
}

std::array<double, kNumIntents> IntentClassifier::logits(const SparseVector& x) const {
  auto z = bias;
  for (std::size_t k = 0; k < kNumIntents; ++k) {
    for (const auto& [i, v] : x) z[k] += weights[k * n_features + i] * v;
  }
  return z;
}

IntentPosterior IntentClassifier::posterior(const SparseVector& x) const { return softmax4(logits(x)); }

IntentModel::IntentModel(TfidfVectorizer vectorizer, IntentClassifier classifier)
    : vec_(std::move(vectorizer)), clf_(std::move(classifier)) {
  if (clf_.n_features != vec_.size() || clf_.weights.size() != kNumIntents * clf_.n_features) {
    throw FormatError("intent model: classifier does not match vocabulary");
  }
}

Classification IntentModel::classify(std::string_view text) const {
  Classification c;
  const auto x = vec_.transform(text);
  c.known_tokens = x.size();
  if (x.empty()) {
    c.posterior.fill(1.0 / kNumIntents);
    c.label = IntentLabel::conversational;
    return c;
  }
  c.posterior = clf_.posterior(x);
  c.label = static_cast<IntentLabel>(std::max_element(c.posterior.begin(), c.posterior.end()) - c.posterior.begin());
  return c;
}

double intent_loss_and_gradient(const IntentClassifier& clf, std::span<const SparseVector> x,
                                std::span<const IntentLabel> y, double l2, IntentClassifier& grad) {
  grad = IntentClassifier::zeros(clf.n_features);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  double loss = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    const auto z = clf.logits(x[s]);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    loss += (lse - z[idx(y[s])]) * inv_n;
    for (std::size_t k = 0; k < kNumIntents; ++k) {
      const double d = (std::exp(z[k] - lse) - (k == idx(y[s]) ? 1.0 : 0.0)) * inv_n;
      grad.bias[k] += d;
      for (const auto& [i, v] : x[s]) grad.weights[k * clf.n_features + i] += d * v;
    }
  }
  for (std::size_t j = 0; j < clf.weights.size(); ++j) {
    loss += 0.5 * l2 * clf.weights[j] * clf.weights[j];
    grad.weights[j] += l2 * clf.weights[j];
  }
  return loss;
}

IntentFitResult fit(std::span<const LabeledUtterance> corpus, const IntentFitConfig& cfg) {
  if (corpus.empty()) throw ConfigError("intent fit: empty corpus");
  std::set<IntentLabel> classes;
  for (const auto& u : corpus) classes.insert(u.label);
  if (classes.size() < 2) throw ConfigError("intent fit: need at least two classes");
  if (cfg.iterations < 0 || cfg.l2 < 0.0 || cfg.learning_rate < 0.0) throw ConfigError("intent fit: bad config");

  std::vector<std::string> docs;
  for (const auto& u : corpus) docs.push_back(u.text);
  auto vec = TfidfVectorizer::fit(docs);
  std::vector<SparseVector> x;
  std::vector<IntentLabel> y;
  double max_sq = 0.0;
  for (const auto& u : corpus) {
    x.push_back(vec.transform(u.text));
    y.push_back(u.label);
    max_sq = std::max(max_sq, squared_norm(x.back()) + 1.0);
  }

  IntentFitResult r;
  r.learning_rate = cfg.learning_rate > 0.0 ? cfg.learning_rate : 1.0 / (0.5 * max_sq + cfg.l2);
  auto clf = IntentClassifier::zeros(vec.size());
  IntentClassifier grad;
  for (int it = 0; it < cfg.iterations; ++it) {
    r.loss_history.push_back(intent_loss_and_gradient(clf, x, y, cfg.l2, grad));
    for (std::size_t j = 0; j < clf.weights.size(); ++j) clf.weights[j] -= r.learning_rate * grad.weights[j];
    for (std::size_t k = 0; k < kNumIntents; ++k) clf.bias[k] -= r.learning_rate * grad.bias[k];
  }
  r.model = IntentModel(std::move(vec), std::move(clf));
  return r;
}

double accuracy(const IntentModel& model, std::span<const LabeledUtterance> data) {
  if (data.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& u : data) ok += model.classify(u.text).label == u.label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

std::vector<LabeledUtterance> load_intent_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  std::vector<LabeledUtterance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("label\t", 0) == 0)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    const auto label = parse_intent(line.substr(0, tab));
    if (!label) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": unknown intent");
    out.push_back({line.substr(tab + 1), *label});
  }
  return out;
}

void stratified_split(std::span<const LabeledUtterance> data, double train_fraction, uint64_t seed,
                      std::vector<LabeledUtterance>& train, std::vector<LabeledUtterance>& test) {
  train.clear();
  test.clear();
  std::mt19937_64 rng(seed);
  for (auto l : kAllIntents) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].label == l) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j) (j < n_train ? train : test).push_back(data[members[j]]);
  }
}

nlohmann::json to_json(const IntentModel& model) {
  const auto& c = model.classifier();
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t k = 0; k < kNumIntents; ++k) {
    w.push_back(std::vector<double>(c.weights.begin() + static_cast<long>(k * c.n_features),
                                    c.weights.begin() + static_cast<long>((k + 1) * c.n_features)));
  }
  std::vector<std::string> labels;
  for (auto l : kAllIntents) labels.emplace_back(intent_name(l));
  return {{"format", "edgewear-intent"},
          {"version", kModelVersion},
          {"labels", labels},
          {"vocabulary", model.vectorizer().vocabulary()},
          {"idf", model.vectorizer().idf()},
          {"weights", w},
          {"bias", c.bias}};
}

IntentModel intent_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "edgewear-intent") throw FormatError("intent model: wrong format tag");
    if (j.at("version") != kModelVersion) throw FormatError("intent model: unsupported version");
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    for (std::size_t k = 0; k < kNumIntents; ++k) {
      if (k >= labels.size() || labels[k] != intent_name(kAllIntents[k])) {
        throw FormatError("intent model: label order mismatch");
      }
    }
    TfidfVectorizer vec(j.at("vocabulary").get<std::vector<std::string>>(), j.at("idf").get<std::vector<double>>());
    auto clf = IntentClassifier::zeros(vec.size());
    const auto& w = j.at("weights");
    if (w.size() != kNumIntents) throw FormatError("intent model: expected 4 weight rows");
    for (std::size_t k = 0; k < kNumIntents; ++k) {
      const auto row = w[k].get<std::vector<double>>();
      if (row.size() != vec.size()) throw FormatError("intent model: weight row width mismatch");
      std::copy(row.begin(), row.end(), clf.weights.begin() + static_cast<long>(k * vec.size()));
    }
    clf.bias = j.at("bias").get<std::array<double, kNumIntents>>();
    return IntentModel(std::move(vec), std::move(clf));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("intent model: ") + e.what());
  }
}

void save_intent_model(const IntentModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << to_json(model).dump(1) << '\n';
}

IntentModel load_intent_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return intent_model_from_json(j);
}

}  // namespace edgewear::intent
