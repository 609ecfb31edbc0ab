#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "mtia/gradcheck.hpp"
#include "mtia/motion.hpp"
#include "mtia/synthworld.hpp"

using namespace mtia;
using namespace mtia::motion;

namespace {

constexpr int kDm = 32;

std::vector<LabeledWindow> make_labeled(int per_class, Hand hand, double sd, Rng& rng) {
  std::vector<LabeledWindow> out;
  for (int c = 0; c < kNumMotionClasses; ++c)
    for (int i = 0; i < per_class; ++i)
      out.push_back({world::sample_motion_window(static_cast<MotionClass>(c), hand, sd, rng),
                     static_cast<MotionClass>(c)});
  return out;
}

}  // namespace

TEST_CASE("class names round-trip") {
  for (int i = 0; i < kNumMotionClasses; ++i) {
    const auto c = static_cast<MotionClass>(i);
    CHECK(motion_class_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(motion_class_from_string("jump"), ConfigError);
}

TEST_CASE("window validation") {
  AccelWindow w;
  CHECK_NOTHROW(validate(w));
  w.samples.pop_back();
  CHECK_THROWS_AS(validate(w), ShapeError);

  AccelWindow bad;
  bad.at(1, 3) = std::nan("");
  CHECK_THROWS_AS(validate(bad), NumericError);
  bad.at(1, 3) = 17.0;
  CHECK_THROWS_AS(validate(bad), NumericError);
}

TEST_CASE("flip_left negates one channel and relabels") {
  AccelWindow w;
  w.hand = Hand::kLeft;
  w.at(0, 0) = 1.0;
  w.at(0, 1) = -2.0;
  w.at(1, 0) = 3.0;
  w.at(2, 5) = -4.0;

  AccelWindow f = flip_left(w);
  CHECK(f.hand == Hand::kRight);
  CHECK(f.at(0, 0) == -1.0);
  CHECK(f.at(0, 1) == 2.0);
  CHECK(f.at(1, 0) == 3.0);
  CHECK(f.at(2, 5) == -4.0);

  AccelWindow again = f;
  again.hand = Hand::kLeft;
  AccelWindow back = flip_left(again);
  CHECK(back.samples == w.samples);

  CHECK_THROWS_AS(flip_left(f), NumericError);
  CHECK_THROWS_AS(flip_left(w, 5), ConfigError);
}

TEST_CASE("window_stream hops 75 samples") {
  std::vector<std::array<double, 3>> raw;
  for (int i = 0; i < 300; ++i)
    raw.push_back({0.01 * i, 0.01 * i + 0.001, -0.01 * i});

  auto windows = window_stream(raw, Hand::kRight);
  REQUIRE(windows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(windows[static_cast<std::size_t>(k)].at(0, 0) == doctest::Approx(0.01 * (75 * k)));
    CHECK(windows[static_cast<std::size_t>(k)].hand == Hand::kRight);
  }

  raw.resize(150);
  CHECK(window_stream(raw, Hand::kLeft).size() == 1);
  raw.resize(149);
  CHECK_THROWS_AS(window_stream(raw, Hand::kLeft), IoError);
}

TEST_CASE("zero window with zero output layer gives uniform posterior") {
  Rng rng(5);
  diff::ParamStore store;
  declare_motion_params(store, kDm, rng);
  for (double& v : store.at("motion.out.w").values) v = 0.0;
  for (double& v : store.at("motion.out.b").values) v = 0.0;

  AccelWindow zero;
  auto post = motion_cnn_forward(store, zero, kDm);
  REQUIRE(post.size() == 6);
  for (double p : post) CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("posterior normalizes and fm is deterministic") {
  Rng rng(9);
  diff::ParamStore store;
  declare_motion_params(store, kDm, rng);

  Rng wrng = Rng::derive(77, {stream::kMotionData});
  for (int c = 0; c < kNumMotionClasses; ++c) {
    auto w = world::sample_motion_window(static_cast<MotionClass>(c), Hand::kRight, 0.05, wrng);
    auto post = motion_cnn_forward(store, w, kDm);
    double sum = 0.0;
    for (double p : post) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    auto f1 = extract_fm(store, w, kDm);
    auto f2 = extract_fm(store, w, kDm);
    REQUIRE(f1.size() == static_cast<std::size_t>(kDm));
    CHECK(f1 == f2);
  }
}

TEST_CASE("motion net passes finite differences") {
  Rng rng(13);
  diff::ParamStore store;
  declare_motion_params(store, kDm, rng);

  Rng wrng(21);
  const auto w = world::sample_motion_window(MotionClass::kPickUp, Hand::kRight, 0.05, wrng);

  auto loss = [&](bool want_grad) {
    diff::Tape tape;
    auto out = motion_forward(tape, store, w, kDm);
    diff::Value nll = tape.scale(tape.log_floor(tape.pick(out.posterior, 1), 1e-12), -1.0);
    if (want_grad) tape.backward(nll);
    return nll.scalar();
  };

  Rng coords = Rng::derive(99, {stream::kGradCheck});
  auto report = diff::check_gradients(store, loss, 1e-5, 100, coords);
  CHECK(report.coords_checked == 100);
  INFO("worst ", report.worst_param, " rel ", report.max_rel_err);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("trained classifier separates classes, features, and benefits from flip") {
  Rng data_rng = Rng::derive(123, {stream::kMotionData});
  auto train = make_labeled(40, Hand::kRight, 0.05, data_rng);
  auto held_right = make_labeled(20, Hand::kRight, 0.05, data_rng);
  auto held_left = make_labeled(20, Hand::kLeft, 0.05, data_rng);

  Rng init(31);
  diff::ParamStore store;
  declare_motion_params(store, kDm, init);
  Rng order(41);
  auto report = train_motion_classifier(store, train, kDm, 0.05, 6, order);
  CHECK(report.epoch_loss.front() > report.epoch_loss.back());

  const double acc_right = motion_accuracy(store, held_right, kDm);
  INFO("held-out right-hand accuracy ", acc_right);
  CHECK(acc_right >= 0.90);

  // Raw left-hand windows vs flip-corrected ones.
  double correct_raw = 0, correct_flip = 0;
  for (const auto& ex : held_left) {
    auto post_raw = motion_cnn_forward(store, ex.window, kDm);
    auto flipped = flip_left(ex.window);
    auto post_flip = motion_cnn_forward(store, flipped, kDm);
    const auto pred = [](const std::vector<double>& p) {
      return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    };
    if (pred(post_raw) == static_cast<int>(ex.label)) ++correct_raw;
    if (pred(post_flip) == static_cast<int>(ex.label)) ++correct_flip;
  }
  const double acc_raw = correct_raw / static_cast<double>(held_left.size());
  const double acc_flip = correct_flip / static_cast<double>(held_left.size());
  INFO("left raw ", acc_raw, " left flipped ", acc_flip);
  CHECK(acc_flip >= acc_raw + 0.10);

  // Feature geometry: stationary and walking centroids sit farther apart
  // than the average within-class scatter.
  std::vector<std::vector<double>> fs, fw;
  Rng frng = Rng::derive(321, {stream::kMotionData});
  for (int i = 0; i < 100; ++i) {
    fs.push_back(extract_fm(store, world::sample_motion_window(MotionClass::kStationary,
                                                               Hand::kRight, 0.05, frng),
                            kDm));
    fw.push_back(extract_fm(store, world::sample_motion_window(MotionClass::kWalking, Hand::kRight,
                                                               0.05, frng),
                            kDm));
  }
  auto centroid = [](const std::vector<std::vector<double>>& xs) {
    std::vector<double> c(xs[0].size(), 0.0);
    for (const auto& x : xs)
      for (std::size_t i = 0; i < x.size(); ++i) c[i] += x[i] / static_cast<double>(xs.size());
    return c;
  };
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sq);
  };
  const auto cs = centroid(fs), cw = centroid(fw);
  double spread = 0.0;
  for (const auto& x : fs) spread += dist(x, cs) / 200.0;
  for (const auto& x : fw) spread += dist(x, cw) / 200.0;
  CHECK(dist(cs, cw) > spread);
}
