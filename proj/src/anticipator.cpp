#include "mtia/anticipator.hpp"

#include <cmath>
#include <string>

#include "mtia/motion.hpp"

namespace mtia::model {

using diff::Init;
using diff::Value;

void declare_anticipator_params(diff::ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  auto u = [](int fan_in) { return Init::uniform_sym(1.0 / std::sqrt(static_cast<double>(fan_in))); };
  const int emb_in = cfg.fused_motion_dim() + cfg.fused_object_dim() + 1;
  const int h = cfg.hidden;

  store.declare("obj.emb", {cfg.n_objects, cfg.dobj}, u(cfg.dobj), &rng);
  store.declare("emb.w", {cfg.dg, emb_in}, u(emb_in), &rng);
  store.declare("rnn.l0.wx", {4 * h, cfg.dg}, u(cfg.dg), &rng);
  store.declare("rnn.l0.wh", {4 * h, h}, u(h), &rng);
  store.declare("rnn.l0.b", {4 * h}, Init::zeros());
  store.declare("rnn.l1.wx", {4 * h, h}, u(h), &rng);
  store.declare("rnn.l1.wh", {4 * h, h}, u(h), &rng);
  store.declare("rnn.l1.b", {4 * h}, Init::zeros());
  store.declare("head.w", {cfg.n_intentions, h}, u(h), &rng);
  store.declare("head.b", {cfg.n_intentions}, Init::zeros());
}

Value object_embed_one(diff::Tape& tape, diff::ParamStore& store, int token,
                       const ModelConfig& cfg) {
  if (token < 0 || token >= cfg.n_objects) {
    throw NumericError("object token " + std::to_string(token) + " out of range [0," +
                       std::to_string(cfg.n_objects) + ")");
  }
  return tape.row(tape.param(store, "obj.emb"), token);
}

Value fuse_hands(diff::Tape& tape, Value f_right, Value f_left) {
  std::vector<Value> parts = {f_right, f_left};
  return tape.concat(parts);
}

Value embed_fuse(diff::Tape& tape, diff::ParamStore& store, Value fm_fused, Value fo_fused,
                 const ModelConfig& cfg) {
  std::vector<Value> parts = {fm_fused, fo_fused, tape.input_scalar(1.0)};
  Value x = tape.concat(parts);
  const int want = cfg.fused_motion_dim() + cfg.fused_object_dim() + 1;
  if (x.shape() != diff::Shape{want}) {
    throw ShapeError("embed input is " + diff::shape_str(x.shape()) + ", configured " +
                     std::to_string(want));
  }
  return tape.matmul(tape.param(store, "emb.w"), x);
}

LstmState lstm_init(diff::Tape& tape, const ModelConfig& cfg) {
  std::vector<double> zeros(static_cast<std::size_t>(cfg.hidden), 0.0);
  LstmState s;
  s.h0 = tape.input({cfg.hidden}, zeros);
  s.c0 = tape.input({cfg.hidden}, zeros);
  s.h1 = tape.input({cfg.hidden}, zeros);
  s.c1 = tape.input({cfg.hidden}, zeros);
  return s;
}

namespace {

// Gate layout inside the stacked [4H] preactivation: i, f, g, o.
std::pair<Value, Value> cell_step(diff::Tape& tape, diff::ParamStore& store, const char* wx,
                                  const char* wh, const char* b, Value x, Value h_prev,
                                  Value c_prev, int hidden) {
  Value z = tape.add(tape.add(tape.matmul(tape.param(store, wx), x),
                              tape.matmul(tape.param(store, wh), h_prev)),
                     tape.param(store, b));
  Value i = tape.sigmoid(tape.slice(z, 0, hidden));
  Value f = tape.sigmoid(tape.slice(z, hidden, hidden));
  Value g = tape.tanh_(tape.slice(z, 2 * hidden, hidden));
  Value o = tape.sigmoid(tape.slice(z, 3 * hidden, hidden));
  Value c = tape.add(tape.mul(f, c_prev), tape.mul(i, g));
  Value h = tape.mul(o, tape.tanh_(c));
  return {h, c};
}

}  // namespace

LstmState lstm_step(diff::Tape& tape, diff::ParamStore& store, Value g, const LstmState& prev,
                    const ModelConfig& cfg) {
  LstmState next;
  auto [h0, c0] = cell_step(tape, store, "rnn.l0.wx", "rnn.l0.wh", "rnn.l0.b", g, prev.h0, prev.c0,
                            cfg.hidden);
  next.h0 = h0;
  next.c0 = c0;
  auto [h1, c1] = cell_step(tape, store, "rnn.l1.wx", "rnn.l1.wh", "rnn.l1.b", h0, prev.h1, prev.c1,
                            cfg.hidden);
  next.h1 = h1;
  next.c1 = c1;
  return next;
}

Value predict_probs(diff::Tape& tape, diff::ParamStore& store, Value h_top) {
  return tape.softmax(
      tape.add(tape.matmul(tape.param(store, "head.w"), h_top), tape.param(store, "head.b")));
}

int argmax_index(std::span<const double> xs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(xs.size()); ++i)
    if (xs[static_cast<std::size_t>(i)] > xs[static_cast<std::size_t>(best)]) best = i;
  return best;
}

EpisodeFeatures extract_features(diff::ParamStore& store, const world::Episode& ep,
                                 const ModelConfig& cfg) {
  EpisodeFeatures out;
  out.episode_id = ep.episode_id;
  out.intention = ep.intention;
  out.fm.reserve(ep.frames.size());
  out.tokens.reserve(ep.frames.size());
  for (const auto& f : ep.frames) {
    auto right = motion::extract_fm(store, f.accel_r, cfg.dm);
    const auto& left_win =
        cfg.flip_enabled ? motion::flip_left(f.accel_l, cfg.flip_channel) : f.accel_l;
    auto left = motion::extract_fm(store, left_win, cfg.dm);
    right.insert(right.end(), left.begin(), left.end());
    // CNN activations are unbounded post-ReLU while object embeddings start
    // near +-0.3; squash to [-1,1] so both channels reach fusion at the same
    // scale, otherwise the object path learns orders of magnitude slower.
    for (auto& v : right) v = std::tanh(v);
    out.fm.push_back(std::move(right));
    out.tokens.push_back({f.obj_r, f.obj_l});
  }
  return out;
}

EpisodeRun run_episode(diff::Tape& tape, diff::ParamStore& store, const EpisodeFeatures& ep,
                       const ModelConfig& cfg, const GateSpec& gate) {
  const int T = ep.T();
  if (T < 1) throw NumericError("episode has no frames");
  if (gate.mode == GateMode::kMtr && gate.sample && gate.rng == nullptr) {
    throw ConfigError("sampling gate needs an rng");
  }

  const bool use_policy = policy::has_policy_params(store);
  if (gate.mode == GateMode::kMtr && !use_policy) {
    throw ConfigError("Mtr gating requires policy parameters");
  }

  EpisodeRun run;
  run.frame_probs.reserve(static_cast<std::size_t>(T));
  run.preds.reserve(static_cast<std::size_t>(T));

  const std::vector<double> fm_zeros(static_cast<std::size_t>(cfg.fused_motion_dim()), 0.0);
  auto fo_of = [&](int t) {
    return fuse_hands(tape, object_embed_one(tape, store, ep.tokens[static_cast<std::size_t>(t)].first, cfg),
                      object_embed_one(tape, store, ep.tokens[static_cast<std::size_t>(t)].second, cfg));
  };

  LstmState state = lstm_init(tape, cfg);
  Value fo = fuse_hands(tape, object_embed_one(tape, store, 0, cfg),
                        object_embed_one(tape, store, 0, cfg));

  for (int t = 0; t < T; ++t) {
    Value fm = gate.mode == GateMode::kOO
                   ? tape.input({cfg.fused_motion_dim()}, fm_zeros)
                   : tape.input({cfg.fused_motion_dim()}, ep.fm[static_cast<std::size_t>(t)]);
    Value g = embed_fuse(tape, store, fm, fo, cfg);
    state = lstm_step(tape, store, g, state, cfg);
    Value p = predict_probs(tape, store, state.h1);
    run.frame_probs.push_back(p);
    run.preds.push_back(argmax_index(p.data()));

    int action = gate.mode == GateMode::kMO ? 0 : 1;
    double pi1 = 0.5;
    if (use_policy) {
      Value pi = policy::policy_forward(tape, store, tape.detach(state.h1), tape.detach(fm));
      pi1 = pi.data()[1];
      if (gate.mode == GateMode::kMtr) {
        if (gate.force != nullptr) {
          action = gate.force->at(static_cast<std::size_t>(t)) != 0 ? 1 : 0;
        } else {
          action = gate.sample ? policy::sample_action(pi1, *gate.rng)
                               : policy::threshold_action(pi1, gate.tau);
        }
      }
      run.log_pi.push_back(tape.log_floor(tape.pick(pi, action), 1e-12));
    }
    run.trace.probs.push_back(pi1);
    run.trace.actions.push_back(action);
    run.trace.n += action;

    if (t + 1 < T && action == 1) fo = fo_of(t + 1);
  }
  run.trace.ratio = static_cast<double>(run.trace.n) / static_cast<double>(T);
  return run;
}

}  // namespace mtia::model
