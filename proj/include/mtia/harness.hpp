#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtia/anticipator.hpp"
#include "mtia/diffcore.hpp"
#include "mtia/synthworld.hpp"
#include "mtia/training.hpp"

namespace mtia::harness {

struct Paths {
  std::string data = "out/data";
  std::string checkpoints = "out/checkpoints";
  std::string reports = "out/reports";
};

struct EvalConfig {
  std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0};
  std::vector<double> tau_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

// One document drives every subcommand; all randomness flows from `seed`.
struct AppConfig {
  std::uint64_t seed = 1;
  world::WorldSpec world;
  int replicas = 10;
  world::SplitRatios split;
  std::string dataset_format = "compact";  // or "full" with raw accel arrays

  train::TrainConfig train;  // lr/epochs are the joint phase's
  double pretrain_lr = 0.05;
  int pretrain_epochs = 30;
  double motion_lr = 0.05;
  int motion_epochs = 6;
  int motion_per_class = 40;

  int dm = 32;
  int dobj = 16;
  int dg = 64;
  bool flip_enabled = true;

  EvalConfig eval;
  Paths paths;

  model::ModelConfig model_config() const;
  void validate() const;
};

// Strict JSON: unknown keys are configuration errors.
AppConfig load_config(const std::string& path);

// FNV-1a over the canonical {seed, world, train} serialization; paths and
// eval settings do not shape a checkpoint.
std::string config_hash(const AppConfig& cfg);

struct CheckpointMeta {
  int format_version = 1;
  std::uint64_t rng_seed = 0;
  std::string config_hash;
};

// Parameters serialize in declaration order with full-precision values.
void save_checkpoint(const diff::ParamStore& store, const CheckpointMeta& meta,
                     const std::string& path);

// Declares every stored parameter into an empty store. Missing file -> IoError,
// malformed payload -> IoError, duplicate/empty entries -> ShapeError.
CheckpointMeta load_checkpoint(diff::ParamStore& store, const std::string& path);

// Confirms a loaded store matches the configured model dimensions; throws
// ShapeError naming the first mismatch or stray parameter.
void check_model_shapes(const diff::ParamStore& store, const model::ModelConfig& cfg,
                        bool expect_motion, bool expect_anticipator, bool expect_policy);

struct Dataset {
  world::WorldSpec spec;
  std::string format;
  int replicas = 0;
  std::vector<world::Episode> episodes;
};

// JSONL: one header line, then one episode per line. The compact format
// stores tokens and motion classes only; loading regenerates the raw accel
// windows through the deterministic renderer, bit for bit.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// CLI entry, also callable in-process. argv-style tokens without the program
// name. Returns the process exit code: 0 ok, 2 config, 3 I/O, 4 numeric.
int run_command(const std::vector<std::string>& args);

}  // namespace mtia::harness
