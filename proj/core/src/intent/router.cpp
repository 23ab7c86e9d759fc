#include "edgewear/intent/router.hpp"

namespace edgewear::intent {

std::string_view pathway_name(Pathway p) {
  switch (p) {
    case Pathway::device_command: return "device_command";
    case Pathway::visual_pipeline: return "visual_pipeline";
    case Pathway::conversational_pipeline: return "conversational_pipeline";
  }
  return "?";
}

RouteDecision route(IntentLabel intent, double confidence) {
  RouteDecision d;
  d.intent = intent;
  d.confidence = confidence;
  switch (intent) {
    case IntentLabel::device_control: d.pathway = Pathway::device_command; break;
    case IntentLabel::visual_query: d.pathway = Pathway::visual_pipeline; break;
    case IntentLabel::general_question:
    case IntentLabel::conversational: d.pathway = Pathway::conversational_pipeline; break;
  }
  return d;
}

RouteDecision Router::handle(std::string_view text) const {
  const auto c = model_.classify(text);
  auto d = route(c.label, c.confidence());
  for (const auto& a : annotators_) a(text, d);
  return d;
}

}  // namespace edgewear::intent
