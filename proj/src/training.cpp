#include "mtia/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "mtia/eval.hpp"
#include "mtia/policy.hpp"

namespace mtia::train {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (hidden < 1) throw ConfigError("hidden must be at least 1");
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (!(r_pos > 0.0) || !(r_neg < 0.0)) throw ConfigError("rewards need r_pos > 0 > r_neg");
  if (k_samples < 1) throw ConfigError("k_samples must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (tau_eval < 0.0 || tau_eval > 1.0) throw ConfigError("tau_eval must lie in [0,1]");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
}

double anticipation_weight(int t, int T) {
  return std::pow(0.1, static_cast<double>(T - t) / T);
}

diff::Value anticipation_loss(diff::Tape& tape, std::span<const diff::Value> frame_probs,
                              int y_gt, long* clamp_count) {
  const int T = static_cast<int>(frame_probs.size());
  if (T < 1) throw NumericError("anticipation loss needs at least one frame");

  std::vector<diff::Value> logs;
  std::vector<double> weights;
  logs.reserve(frame_probs.size());
  weights.reserve(frame_probs.size());
  for (int t = 0; t < T; ++t) {
    logs.push_back(
        tape.log_floor(tape.pick(frame_probs[static_cast<std::size_t>(t)], y_gt), 1e-12,
                       clamp_count));
    weights.push_back(-anticipation_weight(t, T));
  }
  return tape.weighted_sum(logs, weights);
}

double reward(double p_gt, bool correct, int n, int T, const TrainConfig& cfg) {
  if (n < 0 || n > T) throw NumericError("trigger count outside [0,T]");
  const double cost = cfg.reward_cost_term ? static_cast<double>(n) / T : 0.0;
  return correct ? p_gt * cfg.r_pos * (1.0 - cost) : p_gt * cfg.r_neg * cost;
}

std::vector<double> episode_rewards(const model::EpisodeRun& run, int y_gt,
                                    const TrainConfig& cfg) {
  const int T = static_cast<int>(run.preds.size());
  std::vector<double> out(static_cast<std::size_t>(T));
  int prefix = 0;
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    prefix += run.trace.actions[i];
    const int n = cfg.reward_prefix_n ? prefix : run.trace.n;
    const double p_gt = run.frame_probs[i].data()[static_cast<std::size_t>(y_gt)];
    out[i] = reward(p_gt, run.preds[i] == y_gt, n, T, cfg);
  }
  return out;
}

std::vector<std::vector<double>> shared_returns(
    const std::vector<std::vector<double>>& rewards) {
  std::vector<std::vector<double>> out(rewards.size());
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const auto& rs = rewards[k];
    if (rs.empty()) throw NumericError("return of a zero-length trace");
    const double mean =
        std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
    out[k].assign(rs.size(), mean);
  }
  return out;
}

diff::Value policy_loss(diff::Tape& tape,
                        const std::vector<std::vector<diff::Value>>& log_pi,
                        const std::vector<std::vector<double>>& rewards) {
  const std::size_t K = log_pi.size();
  if (K == 0 || rewards.size() != K) throw NumericError("policy loss needs K matched samples");
  const std::size_t T = log_pi[0].size();
  if (T == 0) throw NumericError("policy loss on a zero-length trace");

  std::vector<diff::Value> terms;
  std::vector<double> weights;
  terms.reserve(K * T);
  weights.reserve(K * T);
  const double norm = -1.0 / (static_cast<double>(K) * static_cast<double>(T));
  for (std::size_t k = 0; k < K; ++k) {
    if (log_pi[k].size() != T || rewards[k].size() != T)
      throw NumericError("policy loss samples disagree on T");
    for (std::size_t t = 0; t < T; ++t) {
      terms.push_back(log_pi[k][t]);
      weights.push_back(norm * rewards[k][t]);
    }
  }
  return tape.weighted_sum(terms, weights);
}

void write_progress_csv(const TrainReport& report, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write progress log " + path);
  out << "epoch,loss_a,loss_p,trigger_ratio,val_accuracy\n";
  for (const auto& r : report.rows)
    out << r.epoch << ',' << r.loss_a << ',' << r.loss_p << ',' << r.trigger_ratio << ','
        << r.val_accuracy << '\n';
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

double val_accuracy_or_nan(diff::ParamStore& store,
                           const std::vector<model::EpisodeFeatures>& val_set,
                           const model::ModelConfig& mcfg, const eval::EvalOptions& opt) {
  if (val_set.empty()) return std::numeric_limits<double>::quiet_NaN();
  return eval::accuracy_at_fraction(store, val_set, mcfg, 1.0, opt);
}

void require_finite(double loss, const char* phase, int epoch) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(phase) + " diverged at epoch " + std::to_string(epoch) +
                       ": loss " + std::to_string(loss));
  }
}

}  // namespace

TrainReport pretrain_anticipator(diff::ParamStore& store,
                                 const std::vector<model::EpisodeFeatures>& train_set,
                                 const std::vector<model::EpisodeFeatures>& val_set,
                                 const model::ModelConfig& mcfg, const TrainConfig& cfg, Rng& rng,
                                 const CheckpointFn& checkpoint) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("pretraining needs a nonempty training set");

  TrainReport report;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(train_set.size(), rng);
    double epoch_loss = 0.0;

    std::size_t at = 0;
    while (at < order.size()) {
      const std::size_t batch_n =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - at);
      for (std::size_t b = 0; b < batch_n; ++b) {
        const auto& ep = train_set[order[at + b]];
        diff::Tape tape;
        model::EpisodeRun run =
            model::run_episode(tape, store, ep, mcfg, {model::GateMode::kCon});
        diff::Value loss =
            anticipation_loss(tape, run.frame_probs, ep.intention, &report.clamped_logs);
        epoch_loss += loss.scalar();
        tape.backward(tape.scale(loss, 1.0 / static_cast<double>(batch_n)));
      }
      store.clip_grads(cfg.clip_norm);
      diff::sgd_step(store, cfg.lr);
      at += batch_n;
    }

    ProgressRow row;
    row.epoch = epoch;
    row.loss_a = epoch_loss / static_cast<double>(train_set.size());
    row.loss_p = 0.0;
    row.trigger_ratio = 1.0;
    require_finite(row.loss_a, "pretraining", epoch);
    row.val_accuracy =
        val_accuracy_or_nan(store, val_set, mcfg, {model::GateMode::kCon, 0.0});
    report.rows.push_back(row);

    if (checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
      checkpoint(epoch, store);
  }
  return report;
}

TrainReport joint_train(diff::ParamStore& store,
                        const std::vector<model::EpisodeFeatures>& train_set,
                        const std::vector<model::EpisodeFeatures>& val_set,
                        const model::ModelConfig& mcfg, const TrainConfig& cfg, Rng& rng,
                        const CheckpointFn& checkpoint) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("joint training needs a nonempty training set");
  if (!policy::has_policy_params(store))
    policy::declare_policy_params(store, mcfg.hidden + mcfg.fused_motion_dim(), rng);

  TrainReport report;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(train_set.size(), rng);
    double epoch_loss_a = 0.0, epoch_loss_p = 0.0, epoch_ratio = 0.0;
    double reward_min = std::numeric_limits<double>::infinity();
    double reward_max = -std::numeric_limits<double>::infinity();
    long runs_counted = 0;

    std::size_t at = 0;
    while (at < order.size()) {
      const std::size_t batch_n =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - at);
      for (std::size_t b = 0; b < batch_n; ++b) {
        const auto& ep = train_set[order[at + b]];
        diff::Tape tape;

        std::vector<std::vector<diff::Value>> log_pi;
        std::vector<std::vector<double>> rewards;
        std::vector<diff::Value> anti_terms;
        model::GateSpec gate{model::GateMode::kMtr, cfg.tau_eval, true, &rng};
        for (int k = 0; k < cfg.k_samples; ++k) {
          model::EpisodeRun run = model::run_episode(tape, store, ep, mcfg, gate);
          rewards.push_back(episode_rewards(run, ep.intention, cfg));
          log_pi.push_back(std::move(run.log_pi));
          anti_terms.push_back(
              anticipation_loss(tape, run.frame_probs, ep.intention, &report.clamped_logs));
          epoch_ratio += run.trace.ratio;
          ++runs_counted;
          for (double r : rewards.back()) {
            reward_min = std::min(reward_min, r);
            reward_max = std::max(reward_max, r);
          }
        }

        diff::Value l_p = policy_loss(tape, log_pi, shared_returns(rewards));
        std::vector<double> k_weights(static_cast<std::size_t>(cfg.k_samples),
                                      1.0 / cfg.k_samples);
        diff::Value l_a = tape.weighted_sum(anti_terms, k_weights);
        diff::Value total = tape.add(l_p, tape.scale(l_a, cfg.lambda));
        epoch_loss_a += l_a.scalar();
        epoch_loss_p += l_p.scalar();
        tape.backward(tape.scale(total, 1.0 / static_cast<double>(batch_n)));
      }
      store.clip_grads(cfg.clip_norm);
      diff::sgd_step(store, cfg.lr);
      at += batch_n;
    }

    ProgressRow row;
    row.epoch = epoch;
    row.loss_a = epoch_loss_a / static_cast<double>(train_set.size());
    row.loss_p = epoch_loss_p / static_cast<double>(train_set.size());
    row.trigger_ratio = epoch_ratio / static_cast<double>(runs_counted);
    require_finite(row.loss_a, "joint training", epoch);
    require_finite(row.loss_p, "joint training", epoch);
    row.val_accuracy = val_accuracy_or_nan(store, val_set, mcfg,
                                           {model::GateMode::kMtr, cfg.tau_eval});
    report.rows.push_back(row);

    if (reward_min == reward_max) {
      report.warnings.push_back("epoch " + std::to_string(epoch) +
                                ": degenerate rewards, all equal " +
                                std::to_string(reward_min));
    }

    if (checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
      checkpoint(epoch, store);
  }
  return report;
}

}  // namespace mtia::train
