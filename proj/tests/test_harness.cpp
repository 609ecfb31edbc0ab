#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtia/anticipator.hpp"
#include "mtia/diffcore.hpp"
#include "mtia/error.hpp"
#include "mtia/harness.hpp"
#include "mtia/motion.hpp"
#include "mtia/rng.hpp"
#include "mtia/synthworld.hpp"

namespace fs = std::filesystem;
using namespace mtia;
using harness::AppConfig;
using harness::Dataset;
using nlohmann::ordered_json;

namespace {

// Unique scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mtia_ht_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  std::string at(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

// In-process invocation with stdout/stderr captured so test logs stay clean.
RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  RunResult r;
  try {
    r.code = harness::run_command(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Tiny but trainable setup: three intentions over eight objects, short
// sequences, model narrow enough that the full pipeline runs in about a
// second.
std::string tiny_config_json(const TempDir& dir, std::uint64_t seed = 7) {
  ordered_json j;
  j["seed"] = seed;
  j["world"] = {{"n_intentions", 3},          {"n_sequences", 3},
                {"seq_len_range", {2, 3}},    {"n_objects", 8},
                {"action_duration_range", {1, 2}}, {"replicas", 8},
                {"split", {0.6, 0.2, 0.2}},   {"dataset_format", "compact"}};
  j["train"] = {{"hidden", 12},        {"dm", 6},
                {"dobj", 4},           {"dg", 10},
                {"pretrain_lr", 0.3},  {"pretrain_epochs", 200},
                {"motion_lr", 0.05},   {"motion_epochs", 2},
                {"motion_per_class", 6}, {"lr", 0.02},
                {"lambda", 0.1},       {"epochs", 3},
                {"k_samples", 2},      {"batch_size", 4}};
  j["paths"] = {{"data", dir.at("data")},
                {"checkpoints", dir.at("ckpt")},
                {"reports", dir.at("reports")}};
  return j.dump(2) + "\n";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("config: defaults apply and the single seed reaches every consumer") {
  TempDir dir("cfg_defaults");
  write_text(dir.at("c.json"), "{\"seed\": 5}\n");
  AppConfig cfg = harness::load_config(dir.at("c.json"));

  CHECK(cfg.seed == 5);
  CHECK(cfg.world.rng_seed == 5);
  CHECK(cfg.train.seed == 5);
  CHECK(cfg.replicas == 10);
  CHECK(cfg.dataset_format == "compact");
  CHECK(cfg.train.hidden == 256);
  CHECK(cfg.world.n_intentions == 34);
  CHECK(cfg.split.train == doctest::Approx(0.8));

  const auto mcfg = cfg.model_config();
  CHECK(mcfg.n_intentions == cfg.world.n_intentions);
  CHECK(mcfg.n_objects == cfg.world.n_objects);
  CHECK(mcfg.dm == cfg.dm);
  CHECK(mcfg.hidden == cfg.train.hidden);
}

TEST_CASE("config: unknown keys, malformed payloads, and stray seeds are rejected") {
  TempDir dir("cfg_strict");
  auto expect_config_error = [&](const std::string& body) {
    write_text(dir.at("c.json"), body);
    CHECK_THROWS_AS(harness::load_config(dir.at("c.json")), ConfigError);
  };

  expect_config_error("{\"sed\": 5}");
  expect_config_error("{\"world\": {\"n_object\": 5}}");
  expect_config_error("{\"train\": {\"learning_rate\": 0.1}}");
  expect_config_error("{\"eval\": {\"taus\": [0.5]}}");
  expect_config_error("{\"paths\": {\"output\": \"x\"}}");
  // The seed is global; a second one under world would silently fork streams.
  expect_config_error("{\"world\": {\"rng_seed\": 9}}");
  expect_config_error("{\"seed\": 5");                       // truncated JSON
  expect_config_error("{\"world\": {\"split\": [0.8, 0.2]}}");
  expect_config_error("{\"train\": {\"lr\": -1.0}}");        // validate() rejects
  expect_config_error("{\"seed\": \"abc\"}");                // wrong type

  CHECK_THROWS_AS(harness::load_config(dir.at("missing.json")), IoError);
}

TEST_CASE("config hash: sensitive to seed/world/train, blind to paths and eval") {
  TempDir dir("cfg_hash");
  write_text(dir.at("c.json"), tiny_config_json(dir));
  AppConfig base = harness::load_config(dir.at("c.json"));
  const std::string h = harness::config_hash(base);
  CHECK(h.substr(0, 2) == "0x");
  CHECK(h.size() == 18);

  AppConfig moved = base;
  moved.paths.data = "/elsewhere";
  moved.paths.reports = "/tmp/r";
  moved.eval.fractions = {0.5};
  CHECK(harness::config_hash(moved) == h);

  AppConfig reseeded = base;
  reseeded.seed = base.seed + 1;
  CHECK(harness::config_hash(reseeded) != h);

  AppConfig reworlded = base;
  reworlded.world.n_objects += 1;
  CHECK(harness::config_hash(reworlded) != h);

  AppConfig retrained = base;
  retrained.train.lr *= 2;
  CHECK(harness::config_hash(retrained) != h);

  AppConfig resized = base;
  resized.dm += 1;
  CHECK(harness::config_hash(resized) != h);
}

TEST_CASE("checkpoint: save/load round trip is bitwise, failure modes are typed") {
  TempDir dir("ckpt");
  model::ModelConfig mcfg;
  mcfg.n_intentions = 3;
  mcfg.n_objects = 5;
  mcfg.dm = 4;
  mcfg.dobj = 3;
  mcfg.dg = 6;
  mcfg.hidden = 5;

  diff::ParamStore store;
  Rng rng(99);
  model::declare_anticipator_params(store, mcfg, rng);

  harness::CheckpointMeta meta;
  meta.rng_seed = 42;
  meta.config_hash = "0xdeadbeefdeadbeef";
  harness::save_checkpoint(store, meta, dir.at("p.json"));

  diff::ParamStore loaded;
  harness::CheckpointMeta got = harness::load_checkpoint(loaded, dir.at("p.json"));
  CHECK(got.format_version == 1);
  CHECK(got.rng_seed == 42);
  CHECK(got.config_hash == meta.config_hash);

  REQUIRE(loaded.entries().size() == store.entries().size());
  for (std::size_t i = 0; i < store.entries().size(); ++i) {
    const auto& a = store.entries()[i];
    const auto& b = loaded.entries()[i];
    CHECK(a.name == b.name);
    CHECK(a.shape == b.shape);
    REQUIRE(a.values.size() == b.values.size());
    bool identical = true;
    for (std::size_t k = 0; k < a.values.size(); ++k)
      identical = identical && a.values[k] == b.values[k];
    CHECK(identical);
  }
  CHECK_NOTHROW(harness::check_model_shapes(loaded, mcfg, false, true, false));

  // Loading requires a fresh store; duplicates would shadow live bindings.
  CHECK_THROWS_AS(harness::load_checkpoint(loaded, dir.at("p.json")), ShapeError);

  diff::ParamStore fresh;
  CHECK_THROWS_AS(harness::load_checkpoint(fresh, dir.at("absent.json")), IoError);

  auto j = ordered_json::parse(read_text(dir.at("p.json")));
  j["format_version"] = 2;
  write_text(dir.at("v2.json"), j.dump());
  diff::ParamStore fresh2;
  CHECK_THROWS_AS(harness::load_checkpoint(fresh2, dir.at("v2.json")), IoError);

  j["format_version"] = 1;
  j["params"][0]["values"].erase(0);  // numel no longer matches the shape
  write_text(dir.at("short.json"), j.dump());
  diff::ParamStore fresh3;
  CHECK_THROWS_AS(harness::load_checkpoint(fresh3, dir.at("short.json")), ShapeError);

  write_text(dir.at("garbage.json"), "not json at all");
  diff::ParamStore fresh4;
  CHECK_THROWS_AS(harness::load_checkpoint(fresh4, dir.at("garbage.json")), IoError);

  // Shape audit: a store with a parameter missing and one with a stray extra.
  diff::ParamStore missing_one;
  Rng rng2(99);
  model::declare_anticipator_params(missing_one, mcfg, rng2);
  diff::ParamStore extra = store;
  extra.declare("stray.w", {2, 2}, diff::Init::zeros());
  CHECK_THROWS_AS(harness::check_model_shapes(extra, mcfg, false, true, false), ShapeError);
  model::ModelConfig widened = mcfg;
  widened.hidden += 1;
  CHECK_THROWS_AS(harness::check_model_shapes(store, widened, false, true, false), ShapeError);
}

TEST_CASE("dataset: full storage and compact reconstruction both reproduce the render bitwise") {
  TempDir dir("dataset");
  world::WorldSpec spec;
  spec.n_intentions = 2;
  spec.n_sequences = 2;
  spec.seq_len_range = {2, 2};
  spec.n_objects = 5;
  spec.action_duration_range = {1, 2};
  spec.rng_seed = 11;

  world::World w = world::build_world(spec);
  const auto episodes = world::render_all(w, 2);
  REQUIRE(!episodes.empty());

  Dataset full{spec, "full", 2, episodes};
  Dataset comp{spec, "compact", 2, episodes};
  harness::save_dataset(full, dir.at("full.jsonl"));
  harness::save_dataset(comp, dir.at("comp.jsonl"));
  CHECK(read_text(dir.at("full.jsonl")).size() > read_text(dir.at("comp.jsonl")).size());

  Dataset lf = harness::load_dataset(dir.at("full.jsonl"));
  Dataset lc = harness::load_dataset(dir.at("comp.jsonl"));
  CHECK(lf.format == "full");
  CHECK(lc.format == "compact");
  CHECK(lf.replicas == 2);
  CHECK(lc.spec.rng_seed == spec.rng_seed);
  CHECK(lc.spec.n_objects == spec.n_objects);

  for (const Dataset* ds : {&lf, &lc}) {
    REQUIRE(ds->episodes.size() == episodes.size());
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      const auto& orig = episodes[e];
      const auto& got = ds->episodes[e];
      CHECK(got.episode_id == orig.episode_id);
      CHECK(got.sequence_id == orig.sequence_id);
      CHECK(got.replica == orig.replica);
      CHECK(got.intention == orig.intention);
      REQUIRE(got.frames.size() == orig.frames.size());
      for (std::size_t t = 0; t < orig.frames.size(); ++t) {
        const auto& fo = orig.frames[t];
        const auto& fg = got.frames[t];
        CHECK(fg.obj_l == fo.obj_l);
        CHECK(fg.obj_r == fo.obj_r);
        CHECK(fg.motion_l == fo.motion_l);
        CHECK(fg.motion_r == fo.motion_r);
        CHECK(fg.tick_index == fo.tick_index);
        bool same_l = fg.accel_l.samples == fo.accel_l.samples;
        bool same_r = fg.accel_r.samples == fo.accel_r.samples;
        CHECK(same_l);
        CHECK(same_r);
      }
    }
  }

  write_text(dir.at("nohdr.jsonl"), "{\"episode_id\": 0}\n");
  CHECK_THROWS_AS(harness::load_dataset(dir.at("nohdr.jsonl")), IoError);
}

TEST_CASE("gen-data: repeated runs emit byte-identical files") {
  TempDir dir("gen_det");
  ordered_json j = ordered_json::parse(tiny_config_json(dir));
  j["paths"]["data"] = dir.at("data_a");
  write_text(dir.at("a.json"), j.dump());
  j["paths"]["data"] = dir.at("data_b");
  write_text(dir.at("b.json"), j.dump());

  CHECK(run_cli({"gen-data", "--config", dir.at("a.json")}).code == 0);
  CHECK(run_cli({"gen-data", "--config", dir.at("b.json")}).code == 0);
  CHECK(run_cli({"gen-data", "--config", dir.at("a.json")}).code == 0);  // overwrite in place

  const std::string a = read_text(dir.at("data_a") + "/dataset.jsonl");
  const std::string b = read_text(dir.at("data_b") + "/dataset.jsonl");
  CHECK(!a.empty());
  bool identical = a == b;
  CHECK(identical);
}

TEST_CASE("cli: exit codes separate config, I/O, and shape failures") {
  TempDir dir("exit_codes");
  write_text(dir.at("bad_key.json"), "{\"wrold\": {}}");
  write_text(dir.at("bad_syntax.json"), "{\"seed\":");
  write_text(dir.at("ok.json"), tiny_config_json(dir));

  CHECK(run_cli({"gen-data", "--config", dir.at("bad_key.json")}).code == 2);
  CHECK(run_cli({"gen-data", "--config", dir.at("bad_syntax.json")}).code == 2);
  CHECK(run_cli({"gen-data", "--config", dir.at("nonexistent.json")}).code == 3);
  CHECK(run_cli({"bogus-subcommand", "--config", dir.at("ok.json")}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);

  // I/O failure: evaluating before anything was generated or trained.
  CHECK(run_cli({"eval", "--config", dir.at("ok.json")}).code == 3);
  CHECK(run_cli({"gen-data", "--config", dir.at("ok.json")}).code == 0);
  CHECK(run_cli({"pretrain-rnn", "--config", dir.at("ok.json")}).code == 3);
}

TEST_CASE("pipeline: every stage runs, reports cohere, sweep endpoints equal fixed modes") {
  TempDir dir("pipeline");
  write_text(dir.at("c.json"), tiny_config_json(dir));
  const std::string cfg_arg = dir.at("c.json");

  CHECK(run_cli({"gen-data", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"pretrain-motion", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"pretrain-rnn", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"train-joint", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"eval", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"sweep", "--config", cfg_arg}).code == 0);
  CHECK(run_cli({"export", "--config", cfg_arg}).code == 0);

  for (const char* f : {"data/dataset.jsonl", "ckpt/motion.json", "ckpt/rnn.json",
                        "ckpt/joint.json", "reports/pretrain_progress.csv",
                        "reports/joint_progress.csv", "reports/eval_summary.csv",
                        "reports/eval_confusion.csv", "reports/sweep.csv",
                        "reports/export_acc25.csv", "reports/export_acc100.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir.path / f));
  }

  // Pretraining must have actually learned the tiny world.
  auto progress = csv_rows(read_text(dir.at("reports/pretrain_progress.csv")));
  REQUIRE(progress.size() > 2);
  CHECK(progress[0][0] == "epoch");
  const double first_loss = std::stod(progress[1][1]);
  const double last_loss = std::stod(progress.back()[1]);
  CHECK(last_loss < 0.5 * first_loss);

  auto summary = csv_rows(read_text(dir.at("reports/eval_summary.csv")));
  REQUIRE(summary.size() == 1 + 4 * 4);  // header + 4 modes x 4 fractions
  CHECK(summary[0] == std::vector<std::string>{"mode", "fraction", "accuracy", "trigger_ratio"});
  std::map<std::string, std::vector<std::vector<std::string>>> by_mode;
  for (std::size_t i = 1; i < summary.size(); ++i)
    by_mode[summary[i][0]].push_back(summary[i]);
  REQUIRE(by_mode.count("Con"));
  REQUIRE(by_mode.count("MO"));
  REQUIRE(by_mode.count("OO"));
  REQUIRE(by_mode.count("Mtr"));
  for (const auto& row : by_mode["Con"]) CHECK(row[3] == "1");
  for (const auto& row : by_mode["MO"]) CHECK(row[3] == "0");
  for (const auto& [mode, rows] : by_mode) {
    for (const auto& row : rows) {
      const double acc = std::stod(row[2]);
      const double ratio = std::stod(row[3]);
      CHECK(acc >= 0.0);
      CHECK(acc <= 1.0);
      CHECK(ratio >= 0.0);
      CHECK(ratio <= 1.0);
    }
  }

  // Confusion counts per mode sum to the number of evaluated episodes, and
  // the Con diagonal agrees with accuracy at the full fraction.
  auto confusion = csv_rows(read_text(dir.at("reports/eval_confusion.csv")));
  REQUIRE(confusion.size() > 1);
  std::map<std::string, int> total, diag;
  for (std::size_t i = 1; i < confusion.size(); ++i) {
    const auto& row = confusion[i];
    REQUIRE(row.size() == 4);
    total[row[0]] += std::stoi(row[3]);
    if (row[1] == row[2]) diag[row[0]] += std::stoi(row[3]);
  }
  const int n_eval = total["Con"];
  CHECK(n_eval > 0);
  CHECK(total["MO"] == n_eval);
  CHECK(total["OO"] == n_eval);
  CHECK(total["Mtr"] == n_eval);
  const double con_acc_full = std::stod(by_mode["Con"].back()[2]);
  CHECK(diag["Con"] == doctest::Approx(con_acc_full * n_eval));

  // tau=0 forces every trigger (continuous mode); tau=1 forbids them (motion
  // only). The sweep must reproduce those rows digit for digit.
  auto sweep = csv_rows(read_text(dir.at("reports/sweep.csv")));
  REQUIRE(sweep.size() >= 3);
  CHECK(sweep[0] == std::vector<std::string>{"tau", "trigger_ratio", "acc25", "acc100"});
  const auto& tau0 = sweep[1];
  const auto& tau1 = sweep.back();
  CHECK(tau0[0] == "0");
  CHECK(tau1[0] == "1");
  auto row_of = [&](const std::string& mode, int i) { return by_mode[mode][std::size_t(i)]; };
  CHECK(tau0[1] == row_of("Con", 0)[3]);   // trigger ratio at the full cut
  CHECK(tau0[2] == row_of("Con", 0)[2]);   // accuracy @0.25
  CHECK(tau0[3] == row_of("Con", 3)[2]);   // accuracy @1.0
  CHECK(tau1[1] == row_of("MO", 0)[3]);
  CHECK(tau1[2] == row_of("MO", 0)[2]);
  CHECK(tau1[3] == row_of("MO", 3)[2]);

  // Export re-plots the sweep: one (x, y) pair per tau row.
  auto exp100 = csv_rows(read_text(dir.at("reports/export_acc100.csv")));
  REQUIRE(exp100.size() == sweep.size());
  CHECK(exp100[0] == std::vector<std::string>{"x", "y"});
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(exp100[i][0] == sweep[i][1]);
    CHECK(exp100[i][1] == sweep[i][3]);
  }

  // eval --checkpoint rnn evaluates the pretrained model; no policy yet, so
  // the triggered mode is absent from the summary.
  CHECK(run_cli({"eval", "--config", cfg_arg, "--checkpoint", "rnn"}).code == 0);
  auto rnn_summary = csv_rows(read_text(dir.at("reports/eval_summary.csv")));
  CHECK(rnn_summary.size() == 1 + 3 * 4);
  for (std::size_t i = 1; i < rnn_summary.size(); ++i) CHECK(rnn_summary[i][0] != "Mtr");

  // Dimension drift between config and checkpoint is a shape failure.
  ordered_json j = ordered_json::parse(read_text(dir.at("c.json")));
  j["train"]["dg"] = 11;
  write_text(dir.at("drift.json"), j.dump());
  auto drift = run_cli({"eval", "--config", dir.at("drift.json")});
  CHECK(drift.code == 4);
  CHECK(drift.err.find("error:") != std::string::npos);

  // Checkpoints carry the producing config's hash; a mismatch only warns.
  ordered_json j2 = ordered_json::parse(read_text(dir.at("c.json")));
  j2["train"]["lr"] = 0.03;
  write_text(dir.at("relr.json"), j2.dump());
  auto warned = run_cli({"eval", "--config", dir.at("relr.json")});
  CHECK(warned.code == 0);
  CHECK(warned.err.find("different config") != std::string::npos);
}

TEST_CASE("classify-csv: raw two-hand samples window, mirror, and label") {
  TempDir dir("classify");
  write_text(dir.at("c.json"), tiny_config_json(dir));
  CHECK(run_cli({"gen-data", "--config", dir.at("c.json")}).code == 0);
  CHECK(run_cli({"pretrain-motion", "--config", dir.at("c.json")}).code == 0);

  // 300 right samples window at hops 0/75/150; 150 left samples give one.
  Rng rng(3);
  std::ostringstream csv;
  csv << "t,ax,ay,az,hand\n";
  auto emit = [&](motion::MotionClass c, motion::Hand hand, const char* tag, int count) {
    for (int i = 0; i < count; ++i) {
      auto w = world::sample_motion_window(c, hand, 0.05, rng);
      for (int t = 0; t < motion::kWindowLen; ++t)
        csv << t << ',' << w.at(0, t) << ',' << w.at(1, t) << ',' << w.at(2, t) << ',' << tag
            << "\n";
    }
  };
  emit(motion::MotionClass::kPickUp, motion::Hand::kRight, "R", 2);
  emit(motion::MotionClass::kLift, motion::Hand::kLeft, "left", 1);
  write_text(dir.at("raw.csv"), csv.str());

  auto r = run_cli({"pretrain-motion", "--config", dir.at("c.json"), "--classify-csv",
                    dir.at("raw.csv")});
  CHECK(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() >= 2);
  REQUIRE(rows[0].size() == std::size_t(3 + motion::kNumMotionClasses));
  CHECK(rows[0][0] == "hand");
  int n_left = 0, n_right = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    REQUIRE(row.size() == rows[0].size());
    (row[0] == "L" ? n_left : n_right) += 1;
    double psum = 0.0;
    for (std::size_t k = 3; k < row.size(); ++k) psum += std::stod(row[k]);
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-9));
  }
  // 300 right samples -> windows at offsets 0 and 75 and 150; 150 left -> 1.
  CHECK(n_right == 3);
  CHECK(n_left == 1);

  write_text(dir.at("badhand.csv"), "t,ax,ay,az,hand\n0,0.1,0.2,0.3,Q\n");
  CHECK(run_cli({"pretrain-motion", "--config", dir.at("c.json"), "--classify-csv",
                 dir.at("badhand.csv")})
            .code == 3);
  write_text(dir.at("badnum.csv"), "t,ax,ay,az,hand\n0,x,0.2,0.3,R\n");
  CHECK(run_cli({"pretrain-motion", "--config", dir.at("c.json"), "--classify-csv",
                 dir.at("badnum.csv")})
            .code == 3);
}
