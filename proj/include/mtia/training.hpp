#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtia/anticipator.hpp"
#include "mtia/diffcore.hpp"
#include "mtia/rng.hpp"

namespace mtia::train {

struct TrainConfig {
  double lr = 0.001;
  int hidden = 256;
  double lambda = 0.1;    // weight of the anticipation term in the joint loss
  double r_pos = 100.0;
  double r_neg = -100.0;
  int k_samples = 4;      // trigger sequences sampled per episode
  int batch_size = 8;
  int epochs = 10;
  double tau_eval = 0.5;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  int checkpoint_every = 0;     // epochs between checkpoint callbacks; 0 disables
  bool reward_prefix_n = false; // n counts triggers up to frame t, not the episode total
  bool reward_cost_term = true; // false drops the n/T factors (parsimony ablation)

  // lambda may be zero so the policy-only update path stays testable.
  void validate() const;
};

// w(t) = exp(log(0.1)*(T-t)/T) for frame index t in [0,T]. Strictly
// increasing, w(0)=0.1, w(T)=1; stored frames use t=0..T-1.
double anticipation_weight(int t, int T);

// Sum over frames of -log p_t(y_gt) * w(t), logs floored at 1e-12.
// clamp_count, when given, tallies floored frames for diagnostics.
diff::Value anticipation_loss(diff::Tape& tape, std::span<const diff::Value> frame_probs,
                              int y_gt, long* clamp_count = nullptr);

// Per-frame trigger reward: correct predictions earn p*R+*(1-n/T),
// wrong ones p*R-*(n/T), with p the probability mass on the true label.
double reward(double p_gt, bool correct, int n, int T, const TrainConfig& cfg);

// Rewards for one sampled run; n is the episode trigger total, or the
// running prefix count when cfg.reward_prefix_n is set.
std::vector<double> episode_rewards(const model::EpisodeRun& run, int y_gt,
                                    const TrainConfig& cfg);

// Williams pairing: every frame of sample k carries that run's mean
// per-frame return. Same-frame pairing is biased toward never triggering:
// given the history, R_t depends on a_t only through the trigger count, a
// strictly decreasing channel, while a trigger's payoff lands at later
// frames' rewards.
std::vector<std::vector<double>> shared_returns(
    const std::vector<std::vector<double>>& rewards);

// L^P = -(1/(K*T)) sum_k sum_t log pi(a_t^k) * R_t^k. Rewards enter as
// constants, so the gradient is the score-function estimator.
diff::Value policy_loss(diff::Tape& tape,
                        const std::vector<std::vector<diff::Value>>& log_pi,
                        const std::vector<std::vector<double>>& rewards);

struct ProgressRow {
  int epoch = 0;
  double loss_a = 0.0;
  double loss_p = 0.0;
  double trigger_ratio = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<ProgressRow> rows;
  std::vector<std::string> warnings;
  long clamped_logs = 0;
};

// epoch,loss_a,loss_p,trigger_ratio,val_accuracy rows.
void write_progress_csv(const TrainReport& report, const std::string& path);

using CheckpointFn = std::function<void(int epoch, const diff::ParamStore&)>;

// Minimizes L^A alone with every frame triggered (Con mode), mini-batch SGD
// with gradient clipping. Aborts with NumericError on non-finite loss.
TrainReport pretrain_anticipator(diff::ParamStore& store,
                                 const std::vector<model::EpisodeFeatures>& train_set,
                                 const std::vector<model::EpisodeFeatures>& val_set,
                                 const model::ModelConfig& mcfg, const TrainConfig& cfg, Rng& rng,
                                 const CheckpointFn& checkpoint = {});

// Joint phase: per episode draw K trigger sequences from the policy,
// L = L^P + lambda * mean_k L^A_k. Declares policy parameters when absent.
// Warns when an epoch's rewards are all identical.
TrainReport joint_train(diff::ParamStore& store,
                        const std::vector<model::EpisodeFeatures>& train_set,
                        const std::vector<model::EpisodeFeatures>& val_set,
                        const model::ModelConfig& mcfg, const TrainConfig& cfg, Rng& rng,
                        const CheckpointFn& checkpoint = {});

}  // namespace mtia::train
