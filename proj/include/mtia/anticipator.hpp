#pragma once

#include <utility>
#include <vector>

#include "mtia/diffcore.hpp"
#include "mtia/policy.hpp"
#include "mtia/rng.hpp"
#include "mtia/synthworld.hpp"

namespace mtia::model {

struct ModelConfig {
  int n_intentions = 34;
  int n_objects = 50;
  int dm = 32;       // per-hand motion feature width
  int dobj = 16;     // per-hand object embedding width
  int dg = 64;       // fused input width
  int hidden = 256;  // per LSTM layer
  bool flip_enabled = true;
  int flip_channel = 0;

  int fused_motion_dim() const { return 2 * dm; }
  int fused_object_dim() const { return 2 * dobj; }
};

// obj.emb table, emb.w (with folded constant column), two LSTM layers
// (gate order i,f,g,o), intention head.
void declare_anticipator_params(diff::ParamStore& store, const ModelConfig& cfg, Rng& rng);

// Row lookup; token 0 is the learned hand-free vector.
diff::Value object_embed_one(diff::Tape& tape, diff::ParamStore& store, int token,
                             const ModelConfig& cfg);

// Right hand first, always.
diff::Value fuse_hands(diff::Tape& tape, diff::Value f_right, diff::Value f_left);

// g = emb.w * [f_m || f_o || 1].
diff::Value embed_fuse(diff::Tape& tape, diff::ParamStore& store, diff::Value fm_fused,
                       diff::Value fo_fused, const ModelConfig& cfg);

struct LstmState {
  diff::Value h0, c0, h1, c1;
};

LstmState lstm_init(diff::Tape& tape, const ModelConfig& cfg);
LstmState lstm_step(diff::Tape& tape, diff::ParamStore& store, diff::Value g,
                    const LstmState& prev, const ModelConfig& cfg);

diff::Value predict_probs(diff::Tape& tape, diff::ParamStore& store, diff::Value h_top);

int argmax_index(std::span<const double> xs);

// Frozen-encoder view of an episode: fused motion features plus the token
// pair per frame. Motion params stay fixed once this is taken.
struct EpisodeFeatures {
  int episode_id = 0;
  int intention = 0;
  std::vector<std::vector<double>> fm;           // per frame, [2*dm]
  std::vector<std::pair<int, int>> tokens;       // per frame, (right, left)

  int T() const { return static_cast<int>(fm.size()); }
};

EpisodeFeatures extract_features(diff::ParamStore& store, const world::Episode& ep,
                                 const ModelConfig& cfg);

enum class GateMode { kCon, kMO, kOO, kMtr };

struct GateSpec {
  GateMode mode = GateMode::kCon;
  double tau = 0.5;     // Mtr threshold decisions
  bool sample = false;  // Mtr training draws a_t ~ Bernoulli(pi1)
  Rng* rng = nullptr;   // required when sample
  // Pins the Mtr trigger pattern, one action per frame; analysis hook for
  // enumerating trigger patterns exactly. Overrides sample and tau.
  const std::vector<int>* force = nullptr;
};

struct EpisodeRun {
  std::vector<diff::Value> frame_probs;  // p_t on the tape
  std::vector<int> preds;                // lowest-index argmax per frame
  std::vector<diff::Value> log_pi;       // log pi(a_t), present when the policy ran
  policy::TriggerTrace trace;
};

// One causal pass: per frame embed_fuse -> lstm_step -> predict, then the
// trigger decision a_t gates whether frame t+1's tokens replace the cached
// object feature. a_t=0 reuses the previous tape value, bit for bit; frame 0
// always sees the hand-free init pair.
EpisodeRun run_episode(diff::Tape& tape, diff::ParamStore& store, const EpisodeFeatures& ep,
                       const ModelConfig& cfg, const GateSpec& gate);

}  // namespace mtia::model
