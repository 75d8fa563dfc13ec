#pragma once

#include <functional>
#include <utility>

#include "ptav/verifier.hpp"

namespace ptav {

/// One scripted verification result. A failing step carries the box and score
/// of its "detection"; whether it becomes a correction is decided by the real
/// search-adaptation rule against tau2.
struct ScriptedStep {
  bool pass = true;
  double score = 2.0;
  BoundingBox detection;
  double detection_score = 0.0;

  static ScriptedStep passing(double score = 2.0) { return {true, score, {}, 0.0}; }
  static ScriptedStep failing(BoundingBox detection, double detection_score, double score = 0.0) {
    return {false, score, detection, detection_score};
  }
};

/// Verifier driven by a script: (request frame, call ordinal, tracked box) -> step.
class ScriptedVerifier : public Verifier {
 public:
  using Script = std::function<ScriptedStep(int frame, int call, const BoundingBox& tracked)>;

  explicit ScriptedVerifier(Script script, DetectionConfig cfg = {})
      : script_(std::move(script)), cfg_(std::move(cfg)) {
    validate(cfg_);
  }

  static ScriptedVerifier always_pass() {
    return ScriptedVerifier([](int, int, const BoundingBox&) { return ScriptedStep::passing(); });
  }

  void initialize(const Frame&, const BoundingBox&) override {
    cfg_.beta = cfg_.beta_default;
    calls_ = 0;
  }

  VerifierOutcome check(const Frame& frame, const BoundingBox& box) override {
    const ScriptedStep step = script_(frame.index(), calls_++, box);
    VerifierOutcome out;
    out.passed = step.pass;
    out.score = step.score;
    if (step.pass) {
      cfg_.beta = cfg_.beta_default;
      out.interval = IntervalSignal::restore;
    } else {
      const SearchAdaptation a = adapt_search(cfg_, step.detection_score);
      cfg_ = a.cfg;
      out.detection_score = step.detection_score;
      out.interval = a.interval;
      if (a.accepted) out.correction = step.detection;
    }
    out.beta = cfg_.beta;
    return out;
  }

  double search_scale() const override { return cfg_.beta; }
  int calls() const { return calls_; }
  const DetectionConfig& config() const { return cfg_; }

 private:
  Script script_;
  DetectionConfig cfg_;
  int calls_ = 0;
};

}  // namespace ptav
