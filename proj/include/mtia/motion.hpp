#pragma once

#include <array>
#include <string>
#include <vector>

#include "mtia/diffcore.hpp"
#include "mtia/rng.hpp"

namespace mtia::motion {

inline constexpr int kChannels = 3;
inline constexpr int kWindowLen = 150;  // 2 s at 75 Hz
inline constexpr int kWindowHop = 75;   // 1 s overlap
inline constexpr double kAccelRange = 16.0;

enum class Hand { kLeft, kRight };

enum class MotionClass { kLift = 0, kPickUp, kPutDown, kPull, kStationary, kWalking };
inline constexpr int kNumMotionClasses = 6;

const char* to_string(MotionClass c);
MotionClass motion_class_from_string(const std::string& s);

// One 2-second window of 3-axis acceleration, row-major [channel][t] in g.
struct AccelWindow {
  std::vector<double> samples = std::vector<double>(kChannels * kWindowLen, 0.0);
  Hand hand = Hand::kRight;

  double& at(int ch, int t) { return samples[static_cast<std::size_t>(ch * kWindowLen + t)]; }
  double at(int ch, int t) const { return samples[static_cast<std::size_t>(ch * kWindowLen + t)]; }
};

// Throws ShapeError on wrong sample count, NumericError on non-finite or
// out-of-range values.
void validate(const AccelWindow& w);

// Left-hand mirror correction: negates one channel and relabels the window
// as right-equivalent. Throws NumericError on a right-hand window.
AccelWindow flip_left(const AccelWindow& w, int channel = 0);

// Splits a raw per-hand stream (one {ax,ay,az} triple per sample) into
// 150-sample windows with hop 75. Throws IoError if shorter than one window.
std::vector<AccelWindow> window_stream(const std::vector<std::array<double, 3>>& raw, Hand hand);

// Conv(9)+MP2 -> Conv(5)+MP2 -> Conv(3)+MP2 -> FC4 (dim dm, relu) -> 6-way softmax.
// Channel widths 16/32/32; input [3,150] pools to [32,18].
void declare_motion_params(diff::ParamStore& store, int dm, Rng& rng);

struct MotionOut {
  diff::Value posterior;  // [6]
  diff::Value fm;         // [dm], the FC4 activation
};

MotionOut motion_forward(diff::Tape& tape, diff::ParamStore& store, const AccelWindow& w, int dm);

// Tape-free conveniences for inference-style callers.
std::vector<double> motion_cnn_forward(diff::ParamStore& store, const AccelWindow& w, int dm);
std::vector<double> extract_fm(diff::ParamStore& store, const AccelWindow& w, int dm);

struct LabeledWindow {
  AccelWindow window;
  MotionClass label = MotionClass::kStationary;
};

struct MotionTrainReport {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
  double final_train_accuracy = 0.0;
};

// Plain SGD on cross-entropy, one step per example, order reshuffled per
// epoch from `rng`. Windows are used as stored; flip any left-hand data first.
MotionTrainReport train_motion_classifier(diff::ParamStore& store,
                                          const std::vector<LabeledWindow>& data, int dm,
                                          double lr, int epochs, Rng& rng);

double motion_accuracy(diff::ParamStore& store, const std::vector<LabeledWindow>& data, int dm);

}  // namespace mtia::motion
