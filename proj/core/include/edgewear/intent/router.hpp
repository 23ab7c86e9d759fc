#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "edgewear/intent/classifier.hpp"

namespace edgewear::intent {

enum class Pathway : uint8_t { device_command = 0, visual_pipeline = 1, conversational_pipeline = 2 };

std::string_view pathway_name(Pathway p);

struct RouteDecision {
  Pathway pathway = Pathway::conversational_pipeline;
  IntentLabel intent = IntentLabel::conversational;
  double confidence = 0.0;
  /// Tags added by annotators (empty unless one is registered).
  std::map<std::string, std::string> annotations;
};

RouteDecision route(IntentLabel intent, double confidence);

/// Classifies text and routes it. Annotators run after routing and may only
/// add annotations; they are where extra classifiers would attach.
class Router {
 public:
  using Annotator = std::function<void(std::string_view text, RouteDecision&)>;

  explicit Router(IntentModel model) : model_(std::move(model)) {}

  void add_annotator(Annotator a) { annotators_.push_back(std::move(a)); }
  RouteDecision handle(std::string_view text) const;
  const IntentModel& model() const { return model_; }

 private:
  IntentModel model_;
  std::vector<Annotator> annotators_;
};

}  // namespace edgewear::intent
