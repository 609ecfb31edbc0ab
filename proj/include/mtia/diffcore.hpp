#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtia/error.hpp"
#include "mtia/rng.hpp"

namespace mtia::diff {

// Shapes are row-major dimension lists: [n], [rows,cols], [ch,len], ...
using Shape = std::vector<int>;

int numel(const Shape& s);
std::string shape_str(const Shape& s);

// Parameter initialization spec: zeros, constant fill, or uniform in +-s.
struct Init {
  enum class Kind { Zeros, Constant, UniformSym };
  Kind kind = Kind::Zeros;
  double value = 0.0;

  static Init zeros() { return {Kind::Zeros, 0.0}; }
  static Init constant(double v) { return {Kind::Constant, v}; }
  static Init uniform_sym(double halfwidth) { return {Kind::UniformSym, halfwidth}; }
};

// Named, shaped parameter arrays with gradient buffers. Iteration and
// serialization follow declaration order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<double> values;
    std::vector<double> grads;
  };

  Entry& declare(const std::string& name, Shape shape, Init init, Rng* rng = nullptr);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grads();
  double grad_norm() const;
  // Scales all grads down so the global L2 norm is at most max_norm.
  void clip_grads(double max_norm);
  long total_params() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// values <- values - lr * grads, then grads <- 0.
// Throws NumericError naming the parameter if any grad is non-finite.
void sgd_step(ParamStore& store, double lr);

class Tape;

// Handle to a node on a Tape. Cheap to copy; invalidated by Tape::clear().
class Value {
 public:
  Value() = default;
  bool valid() const { return tape_ != nullptr; }
  const Shape& shape() const;
  std::span<const double> data() const;
  std::span<const double> grad() const;
  double scalar() const;
  int id() const { return id_; }

 private:
  friend class Tape;
  Value(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Dynamic tape for one forward pass: records every primitive so backward()
// can replay them in reverse and accumulate d(loss)/d(leaf).
class Tape {
 public:
  // Leaf bound to a parameter: backward() adds into store grads.
  Value param(ParamStore& store, const std::string& name);
  // Constant leaf (no gradient tracked).
  Value input(Shape shape, std::span<const double> data);
  Value input_scalar(double v);
  // Constant leaf that re-enters the graph from an existing value,
  // cutting the gradient path (stop-gradient).
  Value detach(Value v);

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value concat(std::span<const Value> parts);
  Value tanh_(Value v);
  Value sigmoid(Value v);
  Value relu(Value v);
  Value mul(Value a, Value b);
  Value softmax(Value v);
  Value log_(Value v);
  // log with values floored at `floor`; increments *clamp_count per clamp.
  Value log_floor(Value v, double floor, long* clamp_count = nullptr);
  Value maxpool1d(Value v, int width);
  // Same-padded stride-1 1-D convolution. x: [Cin,L], w: [Cout,Cin,K] (K odd), b: [Cout].
  Value conv1d(Value x, Value w, Value b);
  Value mean(Value v);
  Value sum(Value v);
  Value pick(Value v, int index);
  Value slice(Value v, int offset, int len);
  Value row(Value m, int r);
  Value scale(Value v, double c);
  // Elementwise sum_i ws[i]*vs[i]; all vs share one shape.
  Value weighted_sum(std::span<const Value> vs, std::span<const double> ws);

  // Reverse pass from a scalar loss. Repeated calls without zero_grads()
  // accumulate into parameter grads.
  void backward(Value loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Value;
  struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    std::vector<int> parents;
    std::function<void(Tape&, int)> back;  // (tape, self id)
    ParamStore::Entry* bound = nullptr;
  };

  Value make(Shape shape);
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  Node& node(Value v);
  const Node& node(Value v) const;
  void check_same_tape(Value v) const;

  std::vector<Node> nodes_;
};

}  // namespace mtia::diff
