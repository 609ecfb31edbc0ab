#include "mtia/policy.hpp"

#include <cmath>

namespace mtia::policy {

namespace {
constexpr int kHidden1 = 64;
constexpr int kHidden2 = 32;
}  // namespace

void declare_policy_params(diff::ParamStore& store, int input_dim, Rng& rng) {
  using diff::Init;
  auto u = [](int fan_in) { return Init::uniform_sym(1.0 / std::sqrt(static_cast<double>(fan_in))); };
  store.declare("policy.l1.w", {kHidden1, input_dim}, u(input_dim), &rng);
  store.declare("policy.l1.b", {kHidden1}, Init::zeros());
  store.declare("policy.l2.w", {kHidden2, kHidden1}, u(kHidden1), &rng);
  store.declare("policy.l2.b", {kHidden2}, Init::zeros());
  store.declare("policy.out.w", {2, kHidden2}, u(kHidden2), &rng);
  store.declare("policy.out.b", {2}, Init::zeros());
}

bool has_policy_params(const diff::ParamStore& store) { return store.has("policy.l1.w"); }

diff::Value policy_forward(diff::Tape& tape, diff::ParamStore& store, diff::Value h_top,
                           diff::Value fm) {
  std::vector<diff::Value> parts = {h_top, fm};
  diff::Value x = tape.concat(parts);
  diff::Value h1 = tape.tanh_(tape.add(tape.matmul(tape.param(store, "policy.l1.w"), x),
                                       tape.param(store, "policy.l1.b")));
  diff::Value h2 = tape.tanh_(tape.add(tape.matmul(tape.param(store, "policy.l2.w"), h1),
                                       tape.param(store, "policy.l2.b")));
  diff::Value logits = tape.add(tape.matmul(tape.param(store, "policy.out.w"), h2),
                                tape.param(store, "policy.out.b"));
  return tape.softmax(logits);
}

int sample_action(double pi1, Rng& rng) { return rng.bernoulli(pi1) ? 1 : 0; }

int threshold_action(double pi1, double tau) { return pi1 > tau ? 1 : 0; }

}  // namespace mtia::policy
