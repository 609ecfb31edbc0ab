#include "mtia/motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mtia::motion {

namespace {

constexpr int kConv1Out = 16, kConv1K = 9;
constexpr int kConv2Out = 32, kConv2K = 5;
constexpr int kConv3Out = 32, kConv3K = 3;
constexpr int kPooledLen = 18;  // 150 -> 75 -> 37 -> 18
constexpr int kFlatDim = kConv3Out * kPooledLen;

}  // namespace

const char* to_string(MotionClass c) {
  switch (c) {
    case MotionClass::kLift: return "lift";
    case MotionClass::kPickUp: return "pick_up";
    case MotionClass::kPutDown: return "put_down";
    case MotionClass::kPull: return "pull";
    case MotionClass::kStationary: return "stationary";
    case MotionClass::kWalking: return "walking";
  }
  return "?";
}

MotionClass motion_class_from_string(const std::string& s) {
  for (int i = 0; i < kNumMotionClasses; ++i) {
    const auto c = static_cast<MotionClass>(i);
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown motion class: " + s);
}

void validate(const AccelWindow& w) {
  if (static_cast<int>(w.samples.size()) != kChannels * kWindowLen) {
    throw ShapeError("accel window has " + std::to_string(w.samples.size()) + " samples, want " +
                     std::to_string(kChannels * kWindowLen));
  }
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw NumericError("accel window contains non-finite sample");
    if (std::fabs(v) > kAccelRange) {
      throw NumericError("accel sample " + std::to_string(v) + " outside sensor range");
    }
  }
}

AccelWindow flip_left(const AccelWindow& w, int channel) {
  if (w.hand != Hand::kLeft) throw NumericError("flip_left applied to a right-hand window");
  if (channel < 0 || channel >= kChannels) {
    throw ConfigError("flip channel " + std::to_string(channel) + " out of range");
  }
  AccelWindow out = w;
  for (int t = 0; t < kWindowLen; ++t) out.at(channel, t) = -out.at(channel, t);
  out.hand = Hand::kRight;
  return out;
}

std::vector<AccelWindow> window_stream(const std::vector<std::array<double, 3>>& raw, Hand hand) {
  const int n = static_cast<int>(raw.size());
  if (n < kWindowLen) {
    throw IoError("stream of " + std::to_string(n) + " samples is shorter than one window");
  }
  std::vector<AccelWindow> out;
  for (int start = 0; start + kWindowLen <= n; start += kWindowHop) {
    AccelWindow w;
    w.hand = hand;
    for (int t = 0; t < kWindowLen; ++t)
      for (int ch = 0; ch < kChannels; ++ch) w.at(ch, t) = raw[static_cast<std::size_t>(start + t)][static_cast<std::size_t>(ch)];
    out.push_back(std::move(w));
  }
  return out;
}

void declare_motion_params(diff::ParamStore& store, int dm, Rng& rng) {
  using diff::Init;
  auto u = [](int fan_in) { return Init::uniform_sym(1.0 / std::sqrt(static_cast<double>(fan_in))); };
  store.declare("motion.conv1.w", {kConv1Out, kChannels, kConv1K}, u(kChannels * kConv1K), &rng);
  store.declare("motion.conv1.b", {kConv1Out}, Init::zeros());
  store.declare("motion.conv2.w", {kConv2Out, kConv1Out, kConv2K}, u(kConv1Out * kConv2K), &rng);
  store.declare("motion.conv2.b", {kConv2Out}, Init::zeros());
  store.declare("motion.conv3.w", {kConv3Out, kConv2Out, kConv3K}, u(kConv2Out * kConv3K), &rng);
  store.declare("motion.conv3.b", {kConv3Out}, Init::zeros());
  store.declare("motion.fc4.w", {dm, kFlatDim}, u(kFlatDim), &rng);
  store.declare("motion.fc4.b", {dm}, Init::zeros());
  store.declare("motion.out.w", {kNumMotionClasses, dm}, u(dm), &rng);
  store.declare("motion.out.b", {kNumMotionClasses}, Init::zeros());
}

MotionOut motion_forward(diff::Tape& tape, diff::ParamStore& store, const AccelWindow& w, int dm) {
  validate(w);
  using diff::Value;
  Value x = tape.input({kChannels, kWindowLen}, w.samples);

  auto block = [&](Value in, const char* wname, const char* bname) {
    Value c = tape.conv1d(in, tape.param(store, wname), tape.param(store, bname));
    return tape.maxpool1d(tape.relu(c), 2);
  };
  Value p1 = block(x, "motion.conv1.w", "motion.conv1.b");    // [16,75]
  Value p2 = block(p1, "motion.conv2.w", "motion.conv2.b");   // [32,37]
  Value p3 = block(p2, "motion.conv3.w", "motion.conv3.b");   // [32,18]

  std::vector<Value> rows;
  rows.reserve(kConv3Out);
  for (int c = 0; c < kConv3Out; ++c) rows.push_back(tape.row(p3, c));
  Value flat = tape.concat(rows);  // [576]

  Value fm = tape.relu(tape.add(tape.matmul(tape.param(store, "motion.fc4.w"), flat),
                                tape.param(store, "motion.fc4.b")));
  Value logits = tape.add(tape.matmul(tape.param(store, "motion.out.w"), fm),
                          tape.param(store, "motion.out.b"));
  if (fm.shape() != diff::Shape{dm}) {
    throw ShapeError("fc4 produced " + diff::shape_str(fm.shape()) + ", configured dm " +
                     std::to_string(dm));
  }
  return {tape.softmax(logits), fm};
}

std::vector<double> motion_cnn_forward(diff::ParamStore& store, const AccelWindow& w, int dm) {
  diff::Tape tape;
  auto out = motion_forward(tape, store, w, dm);
  return {out.posterior.data().begin(), out.posterior.data().end()};
}

std::vector<double> extract_fm(diff::ParamStore& store, const AccelWindow& w, int dm) {
  diff::Tape tape;
  auto out = motion_forward(tape, store, w, dm);
  return {out.fm.data().begin(), out.fm.data().end()};
}

MotionTrainReport train_motion_classifier(diff::ParamStore& store,
                                          const std::vector<LabeledWindow>& data, int dm,
                                          double lr, int epochs, Rng& rng) {
  if (data.empty()) throw ConfigError("motion training set is empty");
  MotionTrainReport report;
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    }
    double loss_sum = 0.0;
    for (int idx : order) {
      const auto& ex = data[static_cast<std::size_t>(idx)];
      diff::Tape tape;
      auto out = motion_forward(tape, store, ex.window, dm);
      diff::Value nll = tape.scale(
          tape.log_floor(tape.pick(out.posterior, static_cast<int>(ex.label)), 1e-12), -1.0);
      tape.backward(nll);
      loss_sum += nll.scalar();
      store.clip_grads(5.0);
      diff::sgd_step(store, lr);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
  }
  report.final_train_accuracy = motion_accuracy(store, data, dm);
  return report;
}

double motion_accuracy(diff::ParamStore& store, const std::vector<LabeledWindow>& data, int dm) {
  if (data.empty()) return 0.0;
  int correct = 0;
  for (const auto& ex : data) {
    const auto post = motion_cnn_forward(store, ex.window, dm);
    const int pred = static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin());
    if (pred == static_cast<int>(ex.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace mtia::motion
