#include "mtia/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtia/eval.hpp"
#include "mtia/motion.hpp"
#include "mtia/policy.hpp"

namespace mtia::harness {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

model::ModelConfig AppConfig::model_config() const {
  model::ModelConfig m;
  m.n_intentions = world.n_intentions;
  m.n_objects = world.n_objects;
  m.dm = dm;
  m.dobj = dobj;
  m.dg = dg;
  m.hidden = train.hidden;
  m.flip_enabled = flip_enabled;
  return m;
}

void AppConfig::validate() const {
  train.validate();
  if (replicas < 1) throw ConfigError("world.replicas must be at least 1");
  if (dataset_format != "full" && dataset_format != "compact")
    throw ConfigError("world.dataset_format must be \"full\" or \"compact\"");
  if (dm < 1 || dobj < 1 || dg < 1) throw ConfigError("model widths must be at least 1");
  if (pretrain_epochs < 0 || motion_epochs < 0) throw ConfigError("epoch counts are nonnegative");
  if (!(pretrain_lr > 0.0) || !(motion_lr > 0.0)) throw ConfigError("learning rates are positive");
  if (motion_per_class < 1) throw ConfigError("train.motion_per_class must be at least 1");
  if (eval.fractions.empty()) throw ConfigError("eval.fractions must be nonempty");
  for (double f : eval.fractions)
    if (!(f > 0.0) || f > 1.0)
      throw ConfigError("eval.fractions entries must lie in (0,1]");
  for (double t : eval.tau_grid)
    if (t < 0.0 || t > 1.0) throw ConfigError("eval.tau_grid entries must lie in [0,1]");
}

namespace {

// Tracks consumed keys so typos surface instead of silently using defaults.
class StrictObject {
 public:
  StrictObject(const ordered_json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + " must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(ctx_ + "." + key + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (seen_.count(key) == 0) throw ConfigError("unknown config key " + ctx_ + "." + key);
  }

 private:
  const ordered_json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

std::array<int, 2> int_pair(StrictObject& obj, const std::string& key, std::array<int, 2> fb) {
  auto v = obj.get<std::vector<int>>(key, {fb[0], fb[1]});
  if (v.size() != 2) throw ConfigError(key + " must have exactly two entries");
  return {v[0], v[1]};
}

ordered_json world_to_json(const world::WorldSpec& w) {
  ordered_json j;
  j["n_intentions"] = w.n_intentions;
  j["n_sequences"] = w.n_sequences;
  j["seq_len_range"] = w.seq_len_range;
  j["n_objects"] = w.n_objects;
  j["shared_prefix_prob"] = w.shared_prefix_prob;
  j["object_token_flip_prob"] = w.noise.object_token_flip_prob;
  j["accel_noise_sd"] = w.noise.accel_noise_sd;
  j["right_hand_prob"] = w.right_hand_prob;
  j["walk_prob"] = w.walk_prob;
  j["action_duration_range"] = w.action_duration_range;
  j["rng_seed"] = w.rng_seed;
  return j;
}

world::WorldSpec world_from_json(const ordered_json& j, const std::string& ctx,
                                 bool expect_seed) {
  world::WorldSpec w;
  StrictObject obj(j, ctx);
  w.n_intentions = obj.get("n_intentions", w.n_intentions);
  w.n_sequences = obj.get("n_sequences", w.n_sequences);
  w.seq_len_range = int_pair(obj, "seq_len_range", w.seq_len_range);
  w.n_objects = obj.get("n_objects", w.n_objects);
  w.shared_prefix_prob = obj.get("shared_prefix_prob", w.shared_prefix_prob);
  w.noise.object_token_flip_prob =
      obj.get("object_token_flip_prob", w.noise.object_token_flip_prob);
  w.noise.accel_noise_sd = obj.get("accel_noise_sd", w.noise.accel_noise_sd);
  w.right_hand_prob = obj.get("right_hand_prob", w.right_hand_prob);
  w.walk_prob = obj.get("walk_prob", w.walk_prob);
  w.action_duration_range = int_pair(obj, "action_duration_range", w.action_duration_range);
  if (expect_seed) w.rng_seed = obj.get<std::uint64_t>("rng_seed", w.rng_seed);
  // Dataset-shape keys live beside the generator's in the config document.
  obj.get<int>("replicas", 0);
  obj.get<std::vector<double>>("split", {});
  obj.get<std::string>("dataset_format", "");
  obj.finish();
  return w;
}

ordered_json train_to_json(const AppConfig& cfg) {
  const auto& t = cfg.train;
  ordered_json j;
  j["lr"] = t.lr;
  j["hidden"] = t.hidden;
  j["lambda"] = t.lambda;
  j["r_pos"] = t.r_pos;
  j["r_neg"] = t.r_neg;
  j["k_samples"] = t.k_samples;
  j["batch_size"] = t.batch_size;
  j["epochs"] = t.epochs;
  j["tau_eval"] = t.tau_eval;
  j["clip_norm"] = t.clip_norm;
  j["checkpoint_every"] = t.checkpoint_every;
  j["reward_prefix_n"] = t.reward_prefix_n;
  j["reward_cost_term"] = t.reward_cost_term;
  j["pretrain_lr"] = cfg.pretrain_lr;
  j["pretrain_epochs"] = cfg.pretrain_epochs;
  j["motion_lr"] = cfg.motion_lr;
  j["motion_epochs"] = cfg.motion_epochs;
  j["motion_per_class"] = cfg.motion_per_class;
  j["dm"] = cfg.dm;
  j["dobj"] = cfg.dobj;
  j["dg"] = cfg.dg;
  j["flip_enabled"] = cfg.flip_enabled;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << bytes;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

const char* mode_name(model::GateMode m) {
  switch (m) {
    case model::GateMode::kCon: return "Con";
    case model::GateMode::kMO: return "MO";
    case model::GateMode::kOO: return "OO";
    case model::GateMode::kMtr: return "Mtr";
  }
  return "?";
}

}  // namespace

AppConfig load_config(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }

  AppConfig cfg;
  StrictObject root(j, "config");
  cfg.seed = root.get<std::uint64_t>("seed", cfg.seed);

  if (root.has("world")) {
    const auto& wj = root.raw("world");
    cfg.world = world_from_json(wj, "world", false);
    StrictObject wo(wj, "world");
    cfg.replicas = wo.get("replicas", cfg.replicas);
    auto split = wo.get<std::vector<double>>("split", {cfg.split.train, cfg.split.val,
                                                       cfg.split.test});
    if (split.size() != 3) throw ConfigError("world.split needs three ratios");
    cfg.split = {split[0], split[1], split[2]};
    cfg.dataset_format = wo.get("dataset_format", cfg.dataset_format);
  }
  cfg.world.rng_seed = cfg.seed;

  if (root.has("train")) {
    StrictObject to(root.raw("train"), "train");
    auto& t = cfg.train;
    t.lr = to.get("lr", t.lr);
    t.hidden = to.get("hidden", t.hidden);
    t.lambda = to.get("lambda", t.lambda);
    t.r_pos = to.get("r_pos", t.r_pos);
    t.r_neg = to.get("r_neg", t.r_neg);
    t.k_samples = to.get("k_samples", t.k_samples);
    t.batch_size = to.get("batch_size", t.batch_size);
    t.epochs = to.get("epochs", t.epochs);
    t.tau_eval = to.get("tau_eval", t.tau_eval);
    t.clip_norm = to.get("clip_norm", t.clip_norm);
    t.checkpoint_every = to.get("checkpoint_every", t.checkpoint_every);
    t.reward_prefix_n = to.get("reward_prefix_n", t.reward_prefix_n);
    t.reward_cost_term = to.get("reward_cost_term", t.reward_cost_term);
    cfg.pretrain_lr = to.get("pretrain_lr", cfg.pretrain_lr);
    cfg.pretrain_epochs = to.get("pretrain_epochs", cfg.pretrain_epochs);
    cfg.motion_lr = to.get("motion_lr", cfg.motion_lr);
    cfg.motion_epochs = to.get("motion_epochs", cfg.motion_epochs);
    cfg.motion_per_class = to.get("motion_per_class", cfg.motion_per_class);
    cfg.dm = to.get("dm", cfg.dm);
    cfg.dobj = to.get("dobj", cfg.dobj);
    cfg.dg = to.get("dg", cfg.dg);
    cfg.flip_enabled = to.get("flip_enabled", cfg.flip_enabled);
    to.finish();
  }
  cfg.train.seed = cfg.seed;

  if (root.has("eval")) {
    StrictObject eo(root.raw("eval"), "eval");
    cfg.eval.fractions = eo.get("fractions", cfg.eval.fractions);
    cfg.eval.tau_grid = eo.get("tau_grid", cfg.eval.tau_grid);
    eo.finish();
  }

  if (root.has("paths")) {
    StrictObject po(root.raw("paths"), "paths");
    cfg.paths.data = po.get("data", cfg.paths.data);
    cfg.paths.checkpoints = po.get("checkpoints", cfg.paths.checkpoints);
    cfg.paths.reports = po.get("reports", cfg.paths.reports);
    po.finish();
  }

  root.finish();
  cfg.validate();
  return cfg;
}

std::string config_hash(const AppConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["world"] = world_to_json(cfg.world);
  j["world"]["replicas"] = cfg.replicas;
  j["world"]["split"] = {cfg.split.train, cfg.split.val, cfg.split.test};
  j["world"]["dataset_format"] = cfg.dataset_format;
  j["train"] = train_to_json(cfg);
  std::ostringstream hex;
  hex << "0x" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(j.dump());
  return hex.str();
}

void save_checkpoint(const diff::ParamStore& store, const CheckpointMeta& meta,
                     const std::string& path) {
  ordered_json j;
  j["format_version"] = meta.format_version;
  j["rng_seed"] = meta.rng_seed;
  j["config_hash"] = meta.config_hash;
  auto& params = j["params"] = ordered_json::array();
  for (const auto& e : store.entries()) {
    ordered_json p;
    p["name"] = e.name;
    p["shape"] = e.shape;
    p["values"] = e.values;
    params.push_back(std::move(p));
  }
  write_file(path, j.dump() + "\n");
}

CheckpointMeta load_checkpoint(diff::ParamStore& store, const std::string& path) {
  if (!store.entries().empty()) throw ShapeError("checkpoint load needs an empty store");
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path + ": " + e.what());
  }

  CheckpointMeta meta;
  try {
    meta.format_version = j.at("format_version").get<int>();
    meta.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    meta.config_hash = j.at("config_hash").get<std::string>();
    if (meta.format_version != 1)
      throw IoError("unsupported checkpoint format_version " +
                    std::to_string(meta.format_version));
    for (const auto& p : j.at("params")) {
      const auto name = p.at("name").get<std::string>();
      auto shape = p.at("shape").get<diff::Shape>();
      auto values = p.at("values").get<std::vector<double>>();
      auto& entry = store.declare(name, shape, diff::Init::zeros());
      if (static_cast<long>(values.size()) != diff::numel(shape))
        throw ShapeError("checkpoint entry " + name + " has " + std::to_string(values.size()) +
                         " values for shape " + diff::shape_str(shape));
      entry.values = std::move(values);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path + ": " + e.what());
  }
  return meta;
}

void check_model_shapes(const diff::ParamStore& store, const model::ModelConfig& cfg,
                        bool expect_motion, bool expect_anticipator, bool expect_policy) {
  diff::ParamStore expected;
  Rng rng(0);
  if (expect_motion) motion::declare_motion_params(expected, cfg.dm, rng);
  if (expect_anticipator) model::declare_anticipator_params(expected, cfg, rng);
  if (expect_policy)
    policy::declare_policy_params(expected, cfg.hidden + cfg.fused_motion_dim(), rng);

  for (const auto& e : expected.entries()) {
    if (!store.has(e.name)) throw ShapeError("checkpoint is missing parameter " + e.name);
    const auto& got = store.at(e.name).shape;
    if (got != e.shape)
      throw ShapeError("dimension mismatch for " + e.name + ": checkpoint " +
                       diff::shape_str(got) + ", model " + diff::shape_str(e.shape));
  }
  for (const auto& e : store.entries())
    if (!expected.has(e.name)) throw ShapeError("unexpected checkpoint parameter " + e.name);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ostringstream out;
  ordered_json header;
  header["type"] = "header";
  header["format"] = ds.format;
  header["replicas"] = ds.replicas;
  header["world"] = world_to_json(ds.spec);
  out << header.dump() << "\n";

  const bool full = ds.format == "full";
  for (const auto& ep : ds.episodes) {
    ordered_json e;
    e["type"] = "episode";
    e["episode_id"] = ep.episode_id;
    e["sequence_id"] = ep.sequence_id;
    e["replica"] = ep.replica;
    e["intention"] = ep.intention;
    auto& frames = e["frames"] = ordered_json::array();
    for (const auto& f : ep.frames) {
      ordered_json fj;
      fj["tick"] = f.tick_index;
      fj["obj_l"] = f.obj_l;
      fj["obj_r"] = f.obj_r;
      fj["motion_l"] = motion::to_string(f.motion_l);
      fj["motion_r"] = motion::to_string(f.motion_r);
      if (full) {
        fj["accel_l"] = f.accel_l.samples;
        fj["accel_r"] = f.accel_r.samples;
      }
      frames.push_back(std::move(fj));
    }
    out << e.dump() << "\n";
  }
  write_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset " + path + " is empty");

  Dataset ds;
  try {
    ordered_json header = ordered_json::parse(line);
    if (header.value("type", "") != "header")
      throw IoError("dataset " + path + " does not start with a header line");
    ds.format = header.at("format").get<std::string>();
    ds.replicas = header.at("replicas").get<int>();
    ds.spec = world_from_json(header.at("world"), "dataset.world", true);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed dataset header in " + path + ": " + e.what());
  }
  if (ds.format != "full" && ds.format != "compact")
    throw IoError("dataset " + path + " has unknown format " + ds.format);
  const bool full = ds.format == "full";

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ordered_json e = ordered_json::parse(line);
      world::Episode ep;
      ep.episode_id = e.at("episode_id").get<int>();
      ep.sequence_id = e.at("sequence_id").get<int>();
      ep.replica = e.at("replica").get<int>();
      ep.intention = e.at("intention").get<int>();
      for (const auto& fj : e.at("frames")) {
        world::Frame f;
        f.tick_index = fj.at("tick").get<int>();
        f.obj_l = fj.at("obj_l").get<int>();
        f.obj_r = fj.at("obj_r").get<int>();
        f.motion_l = motion::motion_class_from_string(fj.at("motion_l").get<std::string>());
        f.motion_r = motion::motion_class_from_string(fj.at("motion_r").get<std::string>());
        if (full) {
          f.accel_l.samples = fj.at("accel_l").get<std::vector<double>>();
          f.accel_l.hand = motion::Hand::kLeft;
          f.accel_r.samples = fj.at("accel_r").get<std::vector<double>>();
          f.accel_r.hand = motion::Hand::kRight;
          motion::validate(f.accel_l);
          motion::validate(f.accel_r);
        } else {
          f.accel_l = world::render_window(ds.spec, ep.sequence_id, ep.replica, f.tick_index,
                                           motion::Hand::kLeft, f.motion_l);
          f.accel_r = world::render_window(ds.spec, ep.sequence_id, ep.replica, f.tick_index,
                                           motion::Hand::kRight, f.motion_r);
        }
        ep.frames.push_back(std::move(f));
      }
      ds.episodes.push_back(std::move(ep));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed dataset line " + std::to_string(line_no) + " in " + path + ": " +
                    e.what());
    }
  }
  return ds;
}

namespace {

std::string dataset_path(const AppConfig& cfg) { return cfg.paths.data + "/dataset.jsonl"; }
std::string ckpt_path(const AppConfig& cfg, const std::string& name) {
  return cfg.paths.checkpoints + "/" + name + ".json";
}

CheckpointMeta meta_of(const AppConfig& cfg) {
  CheckpointMeta meta;
  meta.rng_seed = cfg.seed;
  meta.config_hash = config_hash(cfg);
  return meta;
}

void warn_on_hash(const CheckpointMeta& meta, const AppConfig& cfg, const std::string& what) {
  if (meta.config_hash != config_hash(cfg))
    std::cerr << "warning: " << what << " was produced under a different config (hash "
              << meta.config_hash << ", current " << config_hash(cfg) << ")\n";
}

struct SplitFeatures {
  std::vector<model::EpisodeFeatures> train, val, test;
};

world::DatasetSplit split_of(const AppConfig& cfg, std::vector<world::Episode> episodes) {
  Rng rng = Rng::derive(cfg.seed, {stream::kSplit});
  return world::split_dataset(std::move(episodes), cfg.split, rng);
}

std::vector<model::EpisodeFeatures> features_of(diff::ParamStore& store,
                                                const std::vector<world::Episode>& eps,
                                                const model::ModelConfig& mcfg) {
  std::vector<model::EpisodeFeatures> out;
  out.reserve(eps.size());
  for (const auto& ep : eps) out.push_back(model::extract_features(store, ep, mcfg));
  return out;
}

void check_dataset_matches(const Dataset& ds, const AppConfig& cfg) {
  if (ds.spec.n_intentions != cfg.world.n_intentions ||
      ds.spec.n_objects != cfg.world.n_objects) {
    throw ShapeError("dataset/model dimension mismatch: dataset has " +
                     std::to_string(ds.spec.n_intentions) + " intentions over " +
                     std::to_string(ds.spec.n_objects) + " objects, config expects " +
                     std::to_string(cfg.world.n_intentions) + "/" +
                     std::to_string(cfg.world.n_objects));
  }
}

int cmd_gen_data(const AppConfig& cfg) {
  world::World w = world::build_world(cfg.world);
  Dataset ds;
  ds.spec = w.spec;
  ds.format = cfg.dataset_format;
  ds.replicas = cfg.replicas;
  ds.episodes = world::render_all(w, cfg.replicas);
  save_dataset(ds, dataset_path(cfg));

  long frames = 0;
  for (const auto& ep : ds.episodes) frames += ep.T();
  std::cout << "wrote " << dataset_path(cfg) << ": " << ds.episodes.size() << " episodes, "
            << frames << " frames, format " << ds.format << "\n";
  return 0;
}

int cmd_pretrain_motion(const AppConfig& cfg) {
  Rng init_rng = Rng::derive(cfg.seed, {stream::kParamInit, 1});
  diff::ParamStore store;
  motion::declare_motion_params(store, cfg.dm, init_rng);

  Rng data_rng = Rng::derive(cfg.seed, {stream::kMotionData});
  std::vector<motion::LabeledWindow> data;
  for (int c = 0; c < motion::kNumMotionClasses; ++c) {
    const auto mc = static_cast<motion::MotionClass>(c);
    for (int i = 0; i < cfg.motion_per_class; ++i) {
      data.push_back({world::sample_motion_window(mc, motion::Hand::kRight,
                                                  cfg.world.noise.accel_noise_sd, data_rng),
                      mc});
      auto left = world::sample_motion_window(mc, motion::Hand::kLeft,
                                              cfg.world.noise.accel_noise_sd, data_rng);
      data.push_back({motion::flip_left(left), mc});
    }
  }

  Rng train_rng = Rng::derive(cfg.seed, {stream::kTrainOrder, 0});
  auto report = motion::train_motion_classifier(store, data, cfg.dm, cfg.motion_lr,
                                                cfg.motion_epochs, train_rng);
  save_checkpoint(store, meta_of(cfg), ckpt_path(cfg, "motion"));
  std::cout << "wrote " << ckpt_path(cfg, "motion") << ": train accuracy "
            << report.final_train_accuracy << " over " << data.size() << " windows\n";
  return 0;
}

int cmd_classify_csv(const AppConfig& cfg, const std::string& csv_path) {
  diff::ParamStore store;
  CheckpointMeta meta = load_checkpoint(store, ckpt_path(cfg, "motion"));
  warn_on_hash(meta, cfg, "motion checkpoint");
  check_model_shapes(store, cfg.model_config(), true, false, false);

  std::istringstream in(read_file(csv_path));
  std::string line;
  std::vector<std::array<double, 3>> left, right;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.find("ax") != std::string::npos) continue;  // header row
    std::istringstream row(line);
    std::string t, ax, ay, az, hand;
    if (!std::getline(row, t, ',') || !std::getline(row, ax, ',') ||
        !std::getline(row, ay, ',') || !std::getline(row, az, ',') ||
        !std::getline(row, hand)) {
      throw IoError(csv_path + ":" + std::to_string(line_no) + ": expected t,ax,ay,az,hand");
    }
    std::array<double, 3> sample;
    try {
      sample = {std::stod(ax), std::stod(ay), std::stod(az)};
    } catch (const std::exception&) {
      throw IoError(csv_path + ":" + std::to_string(line_no) + ": non-numeric acceleration");
    }
    if (hand == "L" || hand == "l" || hand == "left")
      left.push_back(sample);
    else if (hand == "R" || hand == "r" || hand == "right")
      right.push_back(sample);
    else
      throw IoError(csv_path + ":" + std::to_string(line_no) + ": hand must be L or R");
  }

  std::cout << "hand,window,label";
  for (int c = 0; c < motion::kNumMotionClasses; ++c)
    std::cout << ",p_" << motion::to_string(static_cast<motion::MotionClass>(c));
  std::cout << "\n";
  auto emit = [&](const char* tag, const std::vector<motion::AccelWindow>& windows) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
      auto post = motion::motion_cnn_forward(store, windows[i], cfg.dm);
      const int best = model::argmax_index(post);
      std::cout << tag << ',' << i << ','
                << motion::to_string(static_cast<motion::MotionClass>(best));
      for (double p : post) std::cout << ',' << std::setprecision(10) << p;
      std::cout << "\n";
    }
  };
  if (!right.empty()) emit("R", motion::window_stream(right, motion::Hand::kRight));
  if (!left.empty()) {
    auto windows = motion::window_stream(left, motion::Hand::kLeft);
    for (auto& w : windows) w = motion::flip_left(w);
    emit("L", windows);
  }
  return 0;
}

int cmd_pretrain_rnn(const AppConfig& cfg) {
  Dataset ds = load_dataset(dataset_path(cfg));
  check_dataset_matches(ds, cfg);

  diff::ParamStore store;
  CheckpointMeta meta = load_checkpoint(store, ckpt_path(cfg, "motion"));
  warn_on_hash(meta, cfg, "motion checkpoint");
  const model::ModelConfig mcfg = cfg.model_config();
  check_model_shapes(store, mcfg, true, false, false);

  Rng init_rng = Rng::derive(cfg.seed, {stream::kParamInit, 2});
  model::declare_anticipator_params(store, mcfg, init_rng);

  auto split = split_of(cfg, std::move(ds.episodes));
  if (split.train.empty()) throw ConfigError("split leaves no training episodes");
  auto train_f = features_of(store, split.train, mcfg);
  auto val_f = features_of(store, split.val, mcfg);

  train::TrainConfig pre = cfg.train;
  pre.lr = cfg.pretrain_lr;
  pre.epochs = cfg.pretrain_epochs;
  Rng train_rng = Rng::derive(cfg.seed, {stream::kTrainOrder, 1});
  auto report = train::pretrain_anticipator(store, train_f, val_f, mcfg, pre, train_rng);

  save_checkpoint(store, meta_of(cfg), ckpt_path(cfg, "rnn"));
  train::write_progress_csv(report, cfg.paths.reports + "/pretrain_progress.csv");
  const auto& last = report.rows.back();
  std::cout << "wrote " << ckpt_path(cfg, "rnn") << ": loss " << report.rows.front().loss_a
            << " -> " << last.loss_a << ", val accuracy " << last.val_accuracy << "\n";
  return 0;
}

int cmd_train_joint(const AppConfig& cfg) {
  Dataset ds = load_dataset(dataset_path(cfg));
  check_dataset_matches(ds, cfg);

  diff::ParamStore store;
  CheckpointMeta meta = load_checkpoint(store, ckpt_path(cfg, "rnn"));
  warn_on_hash(meta, cfg, "rnn checkpoint");
  const model::ModelConfig mcfg = cfg.model_config();
  check_model_shapes(store, mcfg, true, true, false);

  auto split = split_of(cfg, std::move(ds.episodes));
  if (split.train.empty()) throw ConfigError("split leaves no training episodes");
  auto train_f = features_of(store, split.train, mcfg);
  auto val_f = features_of(store, split.val, mcfg);

  Rng train_rng = Rng::derive(cfg.seed, {stream::kTriggerSample});
  auto report = train::joint_train(store, train_f, val_f, mcfg, cfg.train, train_rng);

  save_checkpoint(store, meta_of(cfg), ckpt_path(cfg, "joint"));
  train::write_progress_csv(report, cfg.paths.reports + "/joint_progress.csv");
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const auto& last = report.rows.back();
  std::cout << "wrote " << ckpt_path(cfg, "joint") << ": trigger ratio " << last.trigger_ratio
            << ", val accuracy " << last.val_accuracy << "\n";
  return 0;
}

struct LoadedModel {
  diff::ParamStore store;
  model::ModelConfig mcfg;
  bool has_policy = false;
  std::vector<model::EpisodeFeatures> test_f;
};

LoadedModel load_for_eval(const AppConfig& cfg, const std::string& checkpoint) {
  Dataset ds = load_dataset(dataset_path(cfg));
  check_dataset_matches(ds, cfg);

  LoadedModel m;
  CheckpointMeta meta = load_checkpoint(m.store, ckpt_path(cfg, checkpoint));
  warn_on_hash(meta, cfg, checkpoint + " checkpoint");
  m.mcfg = cfg.model_config();
  m.has_policy = policy::has_policy_params(m.store);
  check_model_shapes(m.store, m.mcfg, true, true, m.has_policy);

  auto split = split_of(cfg, std::move(ds.episodes));
  const auto& eval_eps = split.test.empty() ? split.val : split.test;
  if (eval_eps.empty()) throw ConfigError("split leaves no held-out episodes to evaluate");
  m.test_f = features_of(m.store, eval_eps, m.mcfg);
  return m;
}

int cmd_eval(const AppConfig& cfg, const std::string& checkpoint) {
  LoadedModel m = load_for_eval(cfg, checkpoint);

  std::vector<std::pair<model::GateMode, double>> modes = {
      {model::GateMode::kCon, 0.0}, {model::GateMode::kMO, 0.0}, {model::GateMode::kOO, 0.0}};
  if (m.has_policy) modes.push_back({model::GateMode::kMtr, cfg.train.tau_eval});

  std::ostringstream summary, confusion;
  summary << "mode,fraction,accuracy,trigger_ratio\n";
  confusion << "mode,gt,pred,count\n";
  summary << std::setprecision(10);

  for (const auto& [mode, tau] : modes) {
    eval::EvalReport r = eval::evaluate(m.store, m.test_f, m.mcfg, {mode, tau},
                                        cfg.eval.fractions);
    for (const auto& f : r.fractions) {
      summary << mode_name(mode) << ',' << f.fraction << ',' << f.accuracy << ','
              << f.trigger_ratio << "\n";
      std::cout << mode_name(mode) << " @" << f.fraction << ": accuracy " << f.accuracy
                << ", trigger ratio " << f.trigger_ratio << "\n";
    }
    for (std::size_t g = 0; g < r.confusion.size(); ++g)
      for (std::size_t p = 0; p < r.confusion[g].size(); ++p)
        if (r.confusion[g][p] != 0)
          confusion << mode_name(mode) << ',' << g << ',' << p << ',' << r.confusion[g][p]
                    << "\n";
  }

  write_file(cfg.paths.reports + "/eval_summary.csv", summary.str());
  write_file(cfg.paths.reports + "/eval_confusion.csv", confusion.str());
  std::cout << "wrote " << cfg.paths.reports << "/eval_summary.csv over " << m.test_f.size()
            << " episodes\n";
  return 0;
}

std::vector<eval::SweepRow> run_sweep(const AppConfig& cfg, const std::string& checkpoint) {
  LoadedModel m = load_for_eval(cfg, checkpoint);
  if (!m.has_policy)
    throw ConfigError("threshold sweep needs a joint checkpoint with policy parameters");
  return eval::sweep_threshold(m.store, m.test_f, m.mcfg, cfg.eval.tau_grid);
}

int cmd_sweep(const AppConfig& cfg, const std::string& checkpoint) {
  auto rows = run_sweep(cfg, checkpoint);
  std::ostringstream out;
  out << "tau,trigger_ratio,acc25,acc100\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.tau << ',' << r.trigger_ratio << ',' << r.acc25 << ',' << r.acc100 << "\n";
    std::cout << "tau " << r.tau << ": ratio " << r.trigger_ratio << ", acc25 " << r.acc25
              << ", acc100 " << r.acc100 << "\n";
  }
  write_file(cfg.paths.reports + "/sweep.csv", out.str());
  std::cout << "wrote " << cfg.paths.reports << "/sweep.csv\n";
  return 0;
}

int cmd_export(const AppConfig& cfg, const std::string& checkpoint) {
  auto rows = run_sweep(cfg, checkpoint);
  auto emit = [&](const std::string& name, auto pick) {
    std::ostringstream out;
    out << "x,y\n" << std::setprecision(10);
    for (const auto& r : rows) out << r.trigger_ratio << ',' << pick(r) << "\n";
    write_file(cfg.paths.reports + "/" + name, out.str());
    std::cout << "wrote " << cfg.paths.reports << "/" << name << "\n";
  };
  emit("export_acc25.csv", [](const eval::SweepRow& r) { return r.acc25; });
  emit("export_acc100.csv", [](const eval::SweepRow& r) { return r.acc100; });
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"motion-triggered intention anticipation workbench"};
  app.require_subcommand(1);

  std::string config_path, checkpoint = "joint", classify_csv;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config document")->required();
    return sub;
  };
  auto* gen = add_common(app.add_subcommand("gen-data", "build and write the synthetic dataset"));
  auto* pm = add_common(
      app.add_subcommand("pretrain-motion", "train the accelerometer classifier"));
  pm->add_option("--classify-csv", classify_csv,
                 "classify a t,ax,ay,az,hand CSV with the trained encoder");
  auto* pr = add_common(app.add_subcommand("pretrain-rnn", "pretrain the anticipator"));
  auto* tj = add_common(app.add_subcommand("train-joint", "joint policy + anticipator phase"));
  auto* ev = add_common(app.add_subcommand("eval", "per-mode accuracy at fractions"));
  ev->add_option("--checkpoint", checkpoint, "checkpoint name to evaluate");
  auto* sw = add_common(app.add_subcommand("sweep", "threshold sweep over tau"));
  sw->add_option("--checkpoint", checkpoint, "checkpoint name to sweep");
  auto* ex = add_common(app.add_subcommand("export", "plot-ready (x,y) series of the sweep"));
  ex->add_option("--checkpoint", checkpoint, "checkpoint name to export");

  std::vector<const char*> argv = {"mtia"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const AppConfig cfg = load_config(config_path);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (pm->parsed())
      return classify_csv.empty() ? cmd_pretrain_motion(cfg) : cmd_classify_csv(cfg, classify_csv);
    if (pr->parsed()) return cmd_pretrain_rnn(cfg);
    if (tj->parsed()) return cmd_train_joint(cfg);
    if (ev->parsed()) return cmd_eval(cfg, checkpoint);
    if (sw->parsed()) return cmd_sweep(cfg, checkpoint);
    if (ex->parsed()) return cmd_export(cfg, checkpoint);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace mtia::harness
