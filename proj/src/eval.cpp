#include "mtia/eval.hpp"

#include <cmath>
#include <string>

namespace mtia::eval {

namespace {

int cutoff(double fraction, int T) {
  return static_cast<int>(std::ceil(fraction * T));
}

void check_fraction(double f) {
  if (!(f > 0.0) || f > 1.0)
    throw ConfigError("observation fraction " + std::to_string(f) + " outside (0,1]");
}

model::GateSpec gate_of(const EvalOptions& opt) {
  model::GateSpec gate;
  gate.mode = opt.mode;
  gate.tau = opt.tau;
  gate.sample = false;
  return gate;
}

}  // namespace

double accuracy_at_fraction(diff::ParamStore& store,
                            const std::vector<model::EpisodeFeatures>& episodes,
                            const model::ModelConfig& cfg, double fraction,
                            const EvalOptions& opt) {
  const double f[] = {fraction};
  return evaluate(store, episodes, cfg, opt, f).fractions[0].accuracy;
}

EvalReport evaluate(diff::ParamStore& store, const std::vector<model::EpisodeFeatures>& episodes,
                    const model::ModelConfig& cfg, const EvalOptions& opt,
                    std::span<const double> fractions) {
  if (episodes.empty()) throw ConfigError("evaluation needs at least one episode");
  if (fractions.empty()) throw ConfigError("evaluation needs at least one fraction");
  for (double f : fractions) check_fraction(f);

  EvalReport report;
  report.episodes = static_cast<long>(episodes.size());
  report.fractions.resize(fractions.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) report.fractions[i].fraction = fractions[i];
  report.confusion.assign(static_cast<std::size_t>(cfg.n_intentions),
                          std::vector<long>(static_cast<std::size_t>(cfg.n_intentions), 0));

  std::vector<long> hits(fractions.size(), 0);
  std::vector<double> ratio_sum(fractions.size(), 0.0);

  for (const auto& ep : episodes) {
    diff::Tape tape;
    model::EpisodeRun run = model::run_episode(tape, store, ep, cfg, gate_of(opt));
    const int T = ep.T();
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      const int cut = cutoff(fractions[i], T);
      const int pred = run.preds[static_cast<std::size_t>(cut - 1)];
      if (pred == ep.intention) ++hits[i];
      int triggers = 0;
      for (int t = 0; t < cut; ++t) triggers += run.trace.actions[static_cast<std::size_t>(t)];
      ratio_sum[i] += static_cast<double>(triggers) / cut;
    }
    const int final_pred = run.preds[static_cast<std::size_t>(T - 1)];
    ++report.confusion[static_cast<std::size_t>(ep.intention)]
                      [static_cast<std::size_t>(final_pred)];
  }

  for (std::size_t i = 0; i < fractions.size(); ++i) {
    report.fractions[i].accuracy = static_cast<double>(hits[i]) / report.episodes;
    report.fractions[i].trigger_ratio = ratio_sum[i] / report.episodes;
  }
  return report;
}

std::vector<SweepRow> sweep_threshold(diff::ParamStore& store,
                                      const std::vector<model::EpisodeFeatures>& episodes,
                                      const model::ModelConfig& cfg,
                                      std::span<const double> taus) {
  std::vector<SweepRow> rows;
  const double fractions[] = {0.25, 1.0};
  for (double tau : taus) {
    if (tau < 0.0 || tau > 1.0)
      throw ConfigError("sweep threshold " + std::to_string(tau) + " outside [0,1]");
    EvalOptions opt{model::GateMode::kMtr, tau};
    EvalReport r = evaluate(store, episodes, cfg, opt, fractions);
    rows.push_back({tau, r.fractions[1].trigger_ratio, r.fractions[0].accuracy,
                    r.fractions[1].accuracy});
  }
  return rows;
}

}  // namespace mtia::eval
