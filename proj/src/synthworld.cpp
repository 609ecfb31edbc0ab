#include "mtia/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtia/error.hpp"

namespace mtia::world {

namespace {

using motion::AccelWindow;
using motion::Hand;
using motion::MotionClass;

constexpr int kMaxGapTicks = 2;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double bump(double t, double center, double width) {
  const double z = (t - center) / width;
  return std::exp(-z * z);
}

// Right-hand template value for channel ch at normalized time tau. Walking is
// phase-shifted per window; other classes ignore phase.
double template_value(MotionClass c, int ch, double tau, double phase) {
  switch (c) {
    case MotionClass::kStationary:
      return 0.0;
    case MotionClass::kWalking: {
      const double p = tau + phase;
      if (ch == 0) return 0.15 * std::sin(kTwoPi * p);
      if (ch == 1) return 0.2 * std::sin(2.0 * kTwoPi * p + 1.0);
      return 0.35 * std::sin(2.0 * kTwoPi * p);
    }
    case MotionClass::kLift:
      if (ch == 0) return 0.3 * tau;
      if (ch == 1) return 0.0;
      return 0.8 * smoothstep(tau);
    case MotionClass::kPutDown:
      if (ch == 0) return -0.3 * tau;
      if (ch == 1) return 0.0;
      return -0.8 * smoothstep(tau);
    case MotionClass::kPull:
      if (ch == 0) return -0.9 * bump(tau, 0.5, 0.15);
      if (ch == 1) return 0.3 * bump(tau, 0.55, 0.25);
      return 0.0;
    case MotionClass::kPickUp:
      if (ch == 0) return 0.9 * bump(tau, 0.5, 0.15);
      if (ch == 1) return 0.3 * bump(tau, 0.55, 0.25);
      return 0.5 * smoothstep(tau);
  }
  return 0.0;
}

ActionStep gap_step(int ticks) {
  ActionStep s;
  s.duration = ticks;
  return s;
}

// Skeletons fix the motion stream (classes, durations, gaps); object tokens
// are assigned per sequence, so sequences sharing a skeleton are
// indistinguishable from motion alone.
// Skeletons carry >=2 manipulation steps when length allows: the guarantee
// passes below need one object slot they can pin and a second one the
// uniqueness repair may resample without undoing the pin.
std::vector<ActionStep> gen_skeleton(const WorldSpec& spec, Rng& rng) {
  static constexpr MotionClass kManip[4] = {MotionClass::kLift, MotionClass::kPickUp,
                                            MotionClass::kPutDown, MotionClass::kPull};
  for (;;) {
    std::vector<ActionStep> steps;
    int manip = 0;
    const int actions = rng.uniform_int(spec.seq_len_range[0], spec.seq_len_range[1]);
    for (int j = 0; j < actions; ++j) {
      const int gap = rng.uniform_int(0, kMaxGapTicks);
      if (gap > 0) steps.push_back(gap_step(gap));
      ActionStep s;
      s.duration = rng.uniform_int(spec.action_duration_range[0], spec.action_duration_range[1]);
      if (rng.uniform() < spec.walk_prob) {
        s.motion = {MotionClass::kWalking, MotionClass::kWalking};
      } else {
        const int hand = rng.uniform() < spec.right_hand_prob ? 1 : 0;
        s.motion[static_cast<std::size_t>(hand)] = kManip[rng.uniform_int(4)];
        s.acting_hand = hand;
        ++manip;
      }
      steps.push_back(s);
    }
    if (manip >= std::min(actions, 2)) return steps;
  }
}

int draw_object(const WorldSpec& spec, Rng& rng) { return 1 + rng.uniform_int(spec.n_objects - 1); }

int last_acting_index(const SequenceDef& seq) {
  for (int i = static_cast<int>(seq.steps.size()) - 1; i >= 0; --i)
    if (seq.steps[static_cast<std::size_t>(i)].acting_hand >= 0) return i;
  return -1;
}

int first_acting_index(const SequenceDef& seq) {
  for (int i = 0; i < static_cast<int>(seq.steps.size()); ++i)
    if (seq.steps[static_cast<std::size_t>(i)].acting_hand >= 0) return i;
  return -1;
}

bool has_cross_prefix(const World& w) {
  for (std::size_t a = 0; a < w.sequences.size(); ++a)
    for (std::size_t b = a + 1; b < w.sequences.size(); ++b) {
      if (w.sequences[a].intention == w.sequences[b].intention) continue;
      if (w.sequences[a].steps.front() == w.sequences[b].steps.front()) return true;
    }
  return false;
}

bool has_shared_object(const World& w) {
  // object token -> first intention seen; shared when a second one appears.
  std::vector<int> owner(static_cast<std::size_t>(w.spec.n_objects), -1);
  for (const auto& seq : w.sequences)
    for (const auto& s : seq.steps)
      for (int o : s.object) {
        if (o == 0) continue;
        if (owner[static_cast<std::size_t>(o)] == -1) owner[static_cast<std::size_t>(o)] = seq.intention;
        else if (owner[static_cast<std::size_t>(o)] != seq.intention) return true;
      }
  return false;
}

// Cross-intention full-stream collisions defeat a fully observed predictor;
// resample the last manipulated object until every pair differs.
void repair_uniqueness(World& w, Rng& rng) {
  for (int round = 0; round < 500; ++round) {
    std::vector<std::vector<TickSig>> sigs;
    sigs.reserve(w.sequences.size());
    for (const auto& s : w.sequences) sigs.push_back(canonical_stream(s));
    int victim = -1;
    for (std::size_t a = 0; a < sigs.size() && victim < 0; ++a)
      for (std::size_t b = a + 1; b < sigs.size(); ++b) {
        if (w.sequences[a].intention == w.sequences[b].intention) continue;
        if (sigs[a] == sigs[b]) {
          victim = static_cast<int>(b);
          break;
        }
      }
    if (victim < 0) return;
    auto& seq = w.sequences[static_cast<std::size_t>(victim)];
    const int idx = last_acting_index(seq);
    if (idx < 0) throw ConfigError("sequence " + std::to_string(seq.id) + " has no manipulation step");
    auto& step = seq.steps[static_cast<std::size_t>(idx)];
    step.object[static_cast<std::size_t>(step.acting_hand)] = draw_object(w.spec, rng);
  }
  throw ConfigError("cannot build a world with unique intention streams; add objects or reduce sharing");
}

}  // namespace

int SequenceDef::total_ticks() const {
  int t = 0;
  for (const auto& s : steps) t += s.duration;
  return t;
}

std::vector<TickSig> canonical_stream(const SequenceDef& seq) {
  std::vector<TickSig> out;
  out.reserve(static_cast<std::size_t>(seq.total_ticks()));
  for (const auto& s : seq.steps)
    for (int d = 0; d < s.duration; ++d)
      out.push_back({s.motion[0], s.motion[1], s.object[0], s.object[1]});
  return out;
}

World build_world(const WorldSpec& spec) {
  if (spec.n_intentions < 1) throw ConfigError("n_intentions must be >= 1");
  if (spec.n_sequences < spec.n_intentions) {
    throw ConfigError("infeasible world: n_sequences " + std::to_string(spec.n_sequences) +
                      " < n_intentions " + std::to_string(spec.n_intentions));
  }
  if (spec.n_objects < 2) throw ConfigError("n_objects must be >= 2 (token 0 is hand-free)");
  if (spec.seq_len_range[0] < 1 || spec.seq_len_range[0] > spec.seq_len_range[1]) {
    throw ConfigError("bad seq_len_range");
  }
  if (spec.action_duration_range[0] < 1 ||
      spec.action_duration_range[0] > spec.action_duration_range[1]) {
    throw ConfigError("bad action_duration_range");
  }
  if (spec.seq_len_range[0] * spec.action_duration_range[0] < 2) {
    throw ConfigError("episodes must span at least 2 ticks");
  }
  for (double p : {spec.shared_prefix_prob, spec.right_hand_prob, spec.walk_prob,
                   spec.noise.object_token_flip_prob}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("probabilities must lie in [0,1]");
  }
  if (spec.noise.accel_noise_sd < 0.0) throw ConfigError("accel_noise_sd must be >= 0");

  Rng rng = Rng::derive(spec.rng_seed, {stream::kWorldBuild});
  World w;
  w.spec = spec;

  // Paired first sequences: intentions 2k and 2k+1 draw skeleton k, so every
  // intention has a motion twin under another label.
  const int pool_size = std::max((spec.n_intentions + 1) / 2, (spec.n_sequences + 2) / 3);
  std::vector<std::vector<ActionStep>> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (int i = 0; i < pool_size; ++i) pool.push_back(gen_skeleton(spec, rng));

  w.intention_sequences.resize(static_cast<std::size_t>(spec.n_intentions));
  for (int i = 0; i < spec.n_sequences; ++i) {
    SequenceDef seq;
    seq.id = i;
    seq.intention = i < spec.n_intentions ? i : rng.uniform_int(spec.n_intentions);
    const int skel = i < spec.n_intentions ? i / 2 : rng.uniform_int(pool_size);
    seq.steps = pool[static_cast<std::size_t>(skel)];
    for (auto& s : seq.steps)
      if (s.acting_hand >= 0) s.object[static_cast<std::size_t>(s.acting_hand)] = draw_object(spec, rng);

    if (i > 0 && rng.uniform() < spec.shared_prefix_prob) {
      std::vector<int> donors;
      for (int j = 0; j < i; ++j)
        if (w.sequences[static_cast<std::size_t>(j)].intention != seq.intention) donors.push_back(j);
      if (!donors.empty()) {
        const auto& donor = w.sequences[static_cast<std::size_t>(donors[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(donors.size())))])];
        const int shorter = static_cast<int>(std::min(donor.steps.size(), seq.steps.size()));
        if (shorter >= 2) {
          const int prefix = 1 + rng.uniform_int(shorter - 1);
          const auto saved = seq.steps;
          std::copy(donor.steps.begin(), donor.steps.begin() + prefix, seq.steps.begin());
          if (last_acting_index(seq) < 0) seq.steps = saved;
        }
      }
    }
    w.intention_sequences[static_cast<std::size_t>(seq.intention)].push_back(i);
    w.sequences.push_back(std::move(seq));
  }

  if (spec.n_intentions >= 2) {
    for (int round = 0; round < 10; ++round) {
      bool dirty = false;
      if (spec.shared_prefix_prob > 0.0 && !has_cross_prefix(w)) {
        w.sequences[1].steps[0] = w.sequences[0].steps[0];
        dirty = true;
      }
      if (!has_shared_object(w)) {
        // Pin the first manipulated object; the uniqueness repair only ever
        // resamples the last one, so the pin survives it.
        const int src = first_acting_index(w.sequences[0]);
        const int dst = first_acting_index(w.sequences[1]);
        const auto& from = w.sequences[0].steps[static_cast<std::size_t>(src)];
        auto& to = w.sequences[1].steps[static_cast<std::size_t>(dst)];
        to.object[static_cast<std::size_t>(to.acting_hand)] =
            from.object[static_cast<std::size_t>(from.acting_hand)];
        dirty = true;
      }
      repair_uniqueness(w, rng);
      if (!dirty && (spec.shared_prefix_prob <= 0.0 || has_cross_prefix(w)) && has_shared_object(w)) {
        break;
      }
      if (round == 9) throw ConfigError("world guarantees did not converge; widen the spec");
    }
  } else {
    repair_uniqueness(w, rng);
  }
  return w;
}

AccelWindow sample_motion_window(MotionClass c, Hand hand, double noise_sd, Rng& rng) {
  AccelWindow w;
  w.hand = hand;
  const double phase = c == MotionClass::kWalking ? rng.uniform() : 0.0;
  const double mirror = hand == Hand::kLeft ? -1.0 : 1.0;
  for (int ch = 0; ch < motion::kChannels; ++ch) {
    const double sign = ch == 0 ? mirror : 1.0;
    for (int t = 0; t < motion::kWindowLen; ++t) {
      const double tau = static_cast<double>(t) / motion::kWindowLen;
      double v = sign * template_value(c, ch, tau, phase);
      if (noise_sd > 0.0) v += noise_sd * rng.normal();
      w.at(ch, t) = std::clamp(v, -motion::kAccelRange, motion::kAccelRange);
    }
  }
  return w;
}

AccelWindow render_window(const WorldSpec& spec, int sequence_id, int replica, int tick, Hand hand,
                          MotionClass c) {
  const std::uint64_t hand_id = hand == Hand::kLeft ? 1 : 2;
  Rng rng = Rng::derive(spec.rng_seed,
                        {stream::kRender, static_cast<std::uint64_t>(sequence_id),
                         static_cast<std::uint64_t>(replica), static_cast<std::uint64_t>(tick) + 1,
                         hand_id});
  return sample_motion_window(c, hand, spec.noise.accel_noise_sd, rng);
}

Episode render_episode(const World& world, int sequence_id, int replica) {
  if (sequence_id < 0 || sequence_id >= static_cast<int>(world.sequences.size())) {
    throw ConfigError("unknown sequence id " + std::to_string(sequence_id));
  }
  const auto& seq = world.sequences[static_cast<std::size_t>(sequence_id)];
  const auto& spec = world.spec;

  Rng token_rng = Rng::derive(spec.rng_seed, {stream::kRender, static_cast<std::uint64_t>(sequence_id),
                                              static_cast<std::uint64_t>(replica), 0});
  Episode ep;
  ep.sequence_id = sequence_id;
  ep.replica = replica;
  ep.intention = seq.intention;

  auto emit_token = [&](int true_token) {
    if (spec.noise.object_token_flip_prob > 0.0 &&
        token_rng.bernoulli(spec.noise.object_token_flip_prob)) {
      int t = token_rng.uniform_int(spec.n_objects - 1);
      if (t >= true_token) ++t;
      return t;
    }
    return true_token;
  };

  int tick = 0;
  for (const auto& step : seq.steps) {
    for (int d = 0; d < step.duration; ++d, ++tick) {
      Frame f;
      f.tick_index = tick;
      f.motion_l = step.motion[0];
      f.motion_r = step.motion[1];
      f.obj_l = emit_token(step.object[0]);
      f.obj_r = emit_token(step.object[1]);
      f.accel_l = render_window(spec, sequence_id, replica, tick, Hand::kLeft, f.motion_l);
      f.accel_r = render_window(spec, sequence_id, replica, tick, Hand::kRight, f.motion_r);
      ep.frames.push_back(std::move(f));
    }
  }
  return ep;
}

std::vector<Episode> render_all(const World& world, int replicas) {
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  std::vector<Episode> out;
  out.reserve(world.sequences.size() * static_cast<std::size_t>(replicas));
  for (int s = 0; s < static_cast<int>(world.sequences.size()); ++s)
    for (int r = 0; r < replicas; ++r) {
      Episode ep = render_episode(world, s, r);
      ep.episode_id = s * replicas + r;
      out.push_back(std::move(ep));
    }
  return out;
}

DatasetSplit split_dataset(std::vector<Episode> episodes, SplitRatios ratios, Rng& rng) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 || std::fabs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }

  int max_intention = -1;
  for (const auto& ep : episodes) max_intention = std::max(max_intention, ep.intention);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(max_intention + 1));
  for (int i = 0; i < static_cast<int>(episodes.size()); ++i)
    groups[static_cast<std::size_t>(episodes[static_cast<std::size_t>(i)].intention)].push_back(i);

  const double r[3] = {ratios.train, ratios.val, ratios.test};
  DatasetSplit split;
  std::vector<Episode>* dest[3] = {&split.train, &split.val, &split.test};
  std::string infeasible;

  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& idx = groups[g];
    if (idx.empty()) continue;
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(rng.uniform_int(i + 1))]);

    const int n = static_cast<int>(idx.size());
    int counts[3];
    double frac[3];
    int used = 0;
    for (int s = 0; s < 3; ++s) {
      const double q = r[s] * n;
      counts[s] = static_cast<int>(q);
      frac[s] = q - counts[s];
      used += counts[s];
    }
    for (int left = n - used; left > 0; --left) {
      int best = 0;
      for (int s = 1; s < 3; ++s)
        if (frac[s] > frac[best]) best = s;
      ++counts[best];
      frac[best] = -1.0;
    }
    // Positive-ratio splits must each see this intention; steal from the
    // largest split when the remainder rounding starved one.
    for (int s = 0; s < 3; ++s) {
      if (r[s] <= 0.0 || counts[s] > 0) continue;
      int donor = 0;
      for (int d = 1; d < 3; ++d)
        if (counts[d] > counts[donor]) donor = d;
      if (counts[donor] < 2) {
        if (!infeasible.empty()) infeasible += ", ";
        infeasible += std::to_string(g);
        break;
      }
      --counts[donor];
      ++counts[s];
    }

    int at = 0;
    for (int s = 0; s < 3; ++s)
      for (int k = 0; k < counts[s]; ++k)
        dest[s]->push_back(episodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(at++)])]);
  }

  if (!infeasible.empty()) {
    throw ConfigError("stratification impossible for intentions: " + infeasible);
  }
  return split;
}

}  // namespace mtia::world
