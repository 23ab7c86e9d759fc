#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <cmath>
#include <nlohmann/json.hpp>

#include "edgewear/error.hpp"
#include "edgewear/intent/classifier.hpp"
#include "edgewear/intent/router.hpp"
#include "support.hpp"

using namespace edgewear;
using namespace edgewear::intent;

namespace {

std::vector<LabeledUtterance> tiny_corpus() {
  return {{"take a photo", IntentLabel::device_control},
          {"turn up the volume", IntentLabel::device_control},
          {"what is on this table", IntentLabel::visual_query},
          {"what am i looking at", IntentLabel::visual_query},
          {"what is the capital of france", IntentLabel::general_question},
          {"how tall is everest", IntentLabel::general_question},
          {"tell me a joke", IntentLabel::conversational},
          {"how are you today", IntentLabel::conversational}};
}

}  // namespace

TEST(Tokenize, LowercaseAlnumRuns) {
  EXPECT_EQ(tokenize("What's on THIS table?"), (std::vector<std::string>{"what", "s", "on", "this", "table"}));
  EXPECT_EQ(tokenize("  mp3-player 2x "), (std::vector<std::string>{"mp3", "player", "2x"}));
  EXPECT_TRUE(tokenize("?!").empty());
}

// idf = ln((1 + N) / (1 + df)) + 1, tf = count / doc length.
TEST(Tfidf, HandComputedWeights) {
  const std::vector<std::string> docs = {"a b b", "a c", "d"};
  const auto v = TfidfVectorizer::fit(docs);
  ASSERT_EQ(v.vocabulary(), (std::vector<std::string>{"a", "b", "c", "d"}));
  const double idf_a = std::log(4.0 / 3.0) + 1.0;
  const double idf_b = std::log(4.0 / 2.0) + 1.0;
  EXPECT_NEAR(v.idf()[0], idf_a, 1e-12);
  EXPECT_NEAR(v.idf()[1], idf_b, 1e-12);
  const auto x = v.transform("b a b zzz");
  // 4 tokens including the unknown one
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0].first, 0u);
  EXPECT_NEAR(x[0].second, 0.25 * idf_a, 1e-12);
  EXPECT_EQ(x[1].first, 1u);
  EXPECT_NEAR(x[1].second, 0.5 * idf_b, 1e-12);
  EXPECT_TRUE(v.transform("").empty());
}

TEST(IntentFit, GradientMatchesFiniteDifferences) {
  const auto corpus = tiny_corpus();
  std::vector<std::string> docs;
  for (const auto& u : corpus) docs.push_back(u.text);
  const auto vec = TfidfVectorizer::fit(docs);
  std::vector<SparseVector> x;
  std::vector<IntentLabel> y;
  for (const auto& u : corpus) {
    x.push_back(vec.transform(u.text));
    y.push_back(u.label);
  }
  auto clf = IntentClassifier::zeros(vec.size());
  for (std::size_t i = 0; i < clf.weights.size(); ++i) clf.weights[i] = 0.1 * std::sin(double(i));
  clf.bias = {0.1, -0.2, 0.05, 0.0};
  auto grad = IntentClassifier::zeros(vec.size());
  const double l2 = 0.01;
  intent_loss_and_gradient(clf, x, y, l2, grad);
  auto scratch = IntentClassifier::zeros(vec.size());
  const double h = 1e-6;
  for (std::size_t i = 0; i < clf.weights.size(); ++i) {
    const double keep = clf.weights[i];
    clf.weights[i] = keep + h;
    const double up = intent_loss_and_gradient(clf, x, y, l2, scratch);
    clf.weights[i] = keep - h;
    const double down = intent_loss_and_gradient(clf, x, y, l2, scratch);
    clf.weights[i] = keep;
    const double num = (up - down) / (2 * h);
    EXPECT_NEAR(grad.weights[i], num, 1e-3 * std::max(1e-6, std::abs(num)) + 1e-9) << i;
  }
  for (std::size_t k = 0; k < kNumIntents; ++k) {
    const double keep = clf.bias[k];
    clf.bias[k] = keep + h;
    const double up = intent_loss_and_gradient(clf, x, y, l2, scratch);
    clf.bias[k] = keep - h;
    const double down = intent_loss_and_gradient(clf, x, y, l2, scratch);
    clf.bias[k] = keep;
    EXPECT_NEAR(grad.bias[k], (up - down) / (2 * h), 1e-7);
  }
}

TEST(IntentFit, LossIsMonotoneAndFitsTrainingSet) {
  const auto corpus = tiny_corpus();
  const auto r = fit(corpus, {.iterations = 500});
  ASSERT_EQ(r.loss_history.size(), 500u);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) EXPECT_LE(r.loss_history[i], r.loss_history[i - 1] + 1e-12);
  EXPECT_EQ(accuracy(r.model, corpus), 1.0);
}

TEST(IntentFit, RejectsDegenerateCorpus) {
  EXPECT_THROW(fit(std::vector<LabeledUtterance>{}), ConfigError);
  const std::vector<LabeledUtterance> one = {{"a", IntentLabel::conversational}, {"b", IntentLabel::conversational}};
  EXPECT_THROW(fit(one), ConfigError);
}

TEST(IntentModel, OutOfVocabularyFallsBack) {
  const auto m = fit(tiny_corpus(), {.iterations = 200}).model;
  const auto c = m.classify("zzz qqq");
  EXPECT_EQ(c.label, IntentLabel::conversational);
  EXPECT_EQ(c.known_tokens, 0u);
  for (double p : c.posterior) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(IntentModel, JsonRoundTrip) {
  const auto m = fit(tiny_corpus(), {.iterations = 200}).model;
  const auto back = intent_model_from_json(nlohmann::json::parse(to_json(m).dump()));
  for (const auto& u : tiny_corpus()) {
    const auto a = m.classify(u.text), b = back.classify(u.text);
    EXPECT_EQ(a.label, b.label);
    for (std::size_t k = 0; k < kNumIntents; ++k) EXPECT_NEAR(a.posterior[k], b.posterior[k], 1e-12);
  }
}

TEST(IntentCorpus, BundledCorpusHeldOut) {
  const auto corpus = load_intent_corpus(support::data_dir() / "intents.tsv");
  ASSERT_EQ(corpus.size(), 200u);
  std::array<int, 4> per{};
  for (const auto& u : corpus) per[static_cast<std::size_t>(u.label)]++;
  for (int c : per) EXPECT_EQ(c, 50);
  std::vector<LabeledUtterance> train, test;
  stratified_split(corpus, 0.8, 7, train, test);
  EXPECT_EQ(test.size(), 40u);
  const auto m = fit(train).model;
  EXPECT_GE(accuracy(m, test), 0.9);
}

TEST(IntentCorpus, BadFileReportsLine) {
  const auto dir = support::scratch_dir("intent_bad");
  {
    std::ofstream out(dir / "c.tsv");
    out << "label\ttext\ndevice_control\tok\nnot_a_label\thello\n";
  }
  try {
    load_intent_corpus(dir / "c.tsv");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(Router, PathwayMapping) {
  EXPECT_EQ(route(IntentLabel::device_control, 0.9).pathway, Pathway::device_command);
  EXPECT_EQ(route(IntentLabel::visual_query, 0.9).pathway, Pathway::visual_pipeline);
  EXPECT_EQ(route(IntentLabel::general_question, 0.9).pathway, Pathway::conversational_pipeline);
  EXPECT_EQ(route(IntentLabel::conversational, 0.9).pathway, Pathway::conversational_pipeline);
}

TEST(Router, BundledModelRoutesQuotedUtterances) {
  Router r(load_intent_model(support::data_dir() / "models" / "intent.json"));
  EXPECT_EQ(r.handle("take a photo").intent, IntentLabel::device_control);
  EXPECT_EQ(r.handle("take a photo").pathway, Pathway::device_command);
  EXPECT_EQ(r.handle("what's on this table?").intent, IntentLabel::visual_query);
  EXPECT_EQ(r.handle("what's on this table?").pathway, Pathway::visual_pipeline);
}

TEST(Router, AnnotatorsOnlyAddTags) {
  Router r(fit(tiny_corpus(), {.iterations = 200}).model);
  const auto before = r.handle("take a photo");
  r.add_annotator([](std::string_view text, RouteDecision& d) { d.annotations["len"] = std::to_string(text.size()); });
  const auto after = r.handle("take a photo");
  EXPECT_EQ(after.pathway, before.pathway);
  EXPECT_EQ(after.annotations.at("len"), "12");
}
