#pragma once

#include <span>
#include <vector>

#include "mtia/anticipator.hpp"
#include "mtia/diffcore.hpp"

namespace mtia::eval {

struct EvalOptions {
  model::GateMode mode = model::GateMode::kCon;
  double tau = 0.5;  // Mtr threshold decisions; sampling never runs here
};

struct FractionMetrics {
  double fraction = 1.0;
  double accuracy = 0.0;
  double trigger_ratio = 0.0;  // triggers within the observed prefix
};

struct EvalReport {
  std::vector<FractionMetrics> fractions;
  std::vector<std::vector<long>> confusion;  // [gt][pred], full observation
  long episodes = 0;
};

// Prediction at frame ceil(f*T) of one causal run; causality makes this
// identical to rerunning the truncated prefix.
double accuracy_at_fraction(diff::ParamStore& store,
                            const std::vector<model::EpisodeFeatures>& episodes,
                            const model::ModelConfig& cfg, double fraction,
                            const EvalOptions& opt);

// One run per episode scored at every fraction cutoff, plus the confusion
// table at full observation. Fractions must lie in (0,1].
EvalReport evaluate(diff::ParamStore& store, const std::vector<model::EpisodeFeatures>& episodes,
                    const model::ModelConfig& cfg, const EvalOptions& opt,
                    std::span<const double> fractions);

struct SweepRow {
  double tau = 0.0;
  double trigger_ratio = 0.0;
  double acc25 = 0.0;
  double acc100 = 0.0;
};

// Mtr evaluation across thresholds; tau=0 reproduces Con, tau=1 reproduces MO.
std::vector<SweepRow> sweep_threshold(diff::ParamStore& store,
                                      const std::vector<model::EpisodeFeatures>& episodes,
                                      const model::ModelConfig& cfg,
                                      std::span<const double> taus);

}  // namespace mtia::eval
