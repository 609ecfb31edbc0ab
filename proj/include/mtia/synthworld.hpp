#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mtia/motion.hpp"
#include "mtia/rng.hpp"

namespace mtia::world {

struct NoiseSpec {
  double object_token_flip_prob = 0.03;
  double accel_noise_sd = 0.05;
};

struct WorldSpec {
  int n_intentions = 34;
  int n_sequences = 164;
  std::array<int, 2> seq_len_range{2, 10};  // actions per sequence, pre-gap
  int n_objects = 50;                       // token 0 = hand-free
  double shared_prefix_prob = 0.3;
  NoiseSpec noise;
  std::uint64_t rng_seed = 1;

  // Generator shape. Idle gaps of 0-2 ticks are inserted before actions at
  // build time so frame counts stay a pure function of the step list.
  double right_hand_prob = 0.7;
  double walk_prob = 0.2;
  std::array<int, 2> action_duration_range{2, 4};
};

// One rendered-step description; hand index 0 = left, 1 = right.
struct ActionStep {
  std::array<motion::MotionClass, 2> motion{motion::MotionClass::kStationary,
                                            motion::MotionClass::kStationary};
  std::array<int, 2> object{0, 0};
  int duration = 1;
  int acting_hand = -1;  // -1 for gaps and walking

  bool operator==(const ActionStep&) const = default;
};

struct SequenceDef {
  int id = 0;
  int intention = 0;
  std::vector<ActionStep> steps;

  int total_ticks() const;
};

struct World {
  WorldSpec spec;
  std::vector<SequenceDef> sequences;
  std::vector<std::vector<int>> intention_sequences;  // intention -> sequence ids
};

// Deterministic in spec.rng_seed. Guarantees: every intention owns >=1
// sequence; some object appears under >=2 intentions; with
// shared_prefix_prob>0 some cross-intention pair shares a step prefix; no two
// intentions share a full canonical stream.
World build_world(const WorldSpec& spec);

struct Frame {
  motion::AccelWindow accel_l, accel_r;
  int obj_l = 0, obj_r = 0;
  motion::MotionClass motion_l = motion::MotionClass::kStationary;
  motion::MotionClass motion_r = motion::MotionClass::kStationary;
  int tick_index = 0;
};

struct Episode {
  int episode_id = 0;
  int sequence_id = 0;
  int replica = 0;
  int intention = 0;
  std::vector<Frame> frames;

  int T() const { return static_cast<int>(frames.size()); }
};

// Per-motion-class parametric window template plus Gaussian noise. Left-hand
// windows are mirrored on channel 0 at generation.
motion::AccelWindow sample_motion_window(motion::MotionClass c, motion::Hand hand, double noise_sd,
                                         Rng& rng);

// The exact window render_episode produces at (sequence, replica, tick, hand);
// compact dataset files rebuild raw signals through this.
motion::AccelWindow render_window(const WorldSpec& spec, int sequence_id, int replica, int tick,
                                  motion::Hand hand, motion::MotionClass c);

Episode render_episode(const World& world, int sequence_id, int replica);

// All sequences x replicas, episode_id = sequence_id * replicas + replica.
std::vector<Episode> render_all(const World& world, int replicas);

// Noiseless per-tick record of a sequence, the disambiguation ground truth.
struct TickSig {
  motion::MotionClass motion_l, motion_r;
  int obj_l = 0, obj_r = 0;

  bool operator==(const TickSig&) const = default;
};

std::vector<TickSig> canonical_stream(const SequenceDef& seq);

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
};

struct DatasetSplit {
  std::vector<Episode> train, val, test;
};

// Stratified by intention via largest remainder; throws ConfigError listing
// intentions that cannot reach every positive-ratio split.
DatasetSplit split_dataset(std::vector<Episode> episodes, SplitRatios ratios, Rng& rng);

}  // namespace mtia::world
