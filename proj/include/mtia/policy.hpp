#pragma once

#include <vector>

#include "mtia/diffcore.hpp"
#include "mtia/rng.hpp"

namespace mtia::policy {

// Per-episode record of the trigger channel.
struct TriggerTrace {
  std::vector<double> probs;  // pi(a=1) per frame
  std::vector<int> actions;   // a_t per frame
  int n = 0;                  // sum of actions
  double ratio = 0.0;         // n / T
};

// Two tanh hidden layers (64, 32) over [h_top || f_m], 2-way softmax out.
void declare_policy_params(diff::ParamStore& store, int input_dim, Rng& rng);

bool has_policy_params(const diff::ParamStore& store);

// Returns the softmax pair [pi0, pi1]; callers pick index 1 for the trigger
// probability. Inputs are expected pre-detached when gradients must stay
// inside the policy.
diff::Value policy_forward(diff::Tape& tape, diff::ParamStore& store, diff::Value h_top,
                           diff::Value fm);

int sample_action(double pi1, Rng& rng);
int threshold_action(double pi1, double tau);

}  // namespace mtia::policy
