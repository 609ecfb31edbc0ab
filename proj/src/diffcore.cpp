#include "mtia/diffcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>

namespace mtia::diff {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes " << shape_str(a) << " and " << shape_str(b);
  throw ShapeError(os.str());
}

}  // namespace

int numel(const Shape& s) {
  int n = 1;
  for (int d : s) n *= d;
  return s.empty() ? 0 : n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

ParamStore::Entry& ParamStore::declare(const std::string& name, Shape shape, Init init, Rng* rng) {
  if (index_.count(name)) throw ConfigError("parameter already declared: " + name);
  const int n = numel(shape);
  if (shape.empty() || n <= 0) {
    throw ConfigError("parameter " + name + " has zero-size shape " + shape_str(shape));
  }
  Entry e;
  e.name = name;
  e.shape = std::move(shape);
  e.values.assign(static_cast<std::size_t>(n), 0.0);
  e.grads.assign(static_cast<std::size_t>(n), 0.0);
  switch (init.kind) {
    case Init::Kind::Zeros:
      break;
    case Init::Kind::Constant:
      std::fill(e.values.begin(), e.values.end(), init.value);
      break;
    case Init::Kind::UniformSym:
      if (!rng) throw ConfigError("uniform init for " + name + " requires an rng");
      for (double& v : e.values) v = rng->uniform(-init.value, init.value);
      break;
  }
  index_.emplace(name, static_cast<int>(entries_.size()));
  entries_.push_back(std::move(e));
  return entries_.back();
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw NumericError("unknown parameter: " + name);
  return entries_[static_cast<std::size_t>(it->second)];
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw NumericError("unknown parameter: " + name);
  return entries_[static_cast<std::size_t>(it->second)];
}

void ParamStore::zero_grads() {
  for (auto& e : entries_) std::fill(e.grads.begin(), e.grads.end(), 0.0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& e : entries_)
    for (double g : e.grads) sq += g * g;
  return std::sqrt(sq);
}

void ParamStore::clip_grads(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (auto& e : entries_)
    for (double& g : e.grads) g *= s;
}

long ParamStore::total_params() const {
  long n = 0;
  for (const auto& e : entries_) n += static_cast<long>(e.values.size());
  return n;
}

void sgd_step(ParamStore& store, double lr) {
  for (auto& e : store.entries()) {
    for (double g : e.grads) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + e.name);
    }
  }
  for (auto& e : store.entries()) {
    for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] -= lr * e.grads[i];
    std::fill(e.grads.begin(), e.grads.end(), 0.0);
  }
}

const Shape& Value::shape() const { return tape_->node(*this).shape; }
std::span<const double> Value::data() const { return tape_->node(*this).data; }
std::span<const double> Value::grad() const { return tape_->node(*this).grad; }

double Value::scalar() const {
  const auto& n = tape_->node(*this);
  if (n.data.size() != 1) throw ShapeError("scalar() on non-scalar value " + shape_str(n.shape));
  return n.data[0];
}

Tape::Node& Tape::node(Value v) { return nodes_[static_cast<std::size_t>(v.id_)]; }
const Tape::Node& Tape::node(Value v) const { return nodes_[static_cast<std::size_t>(v.id_)]; }

void Tape::check_same_tape(Value v) const {
  if (!v.valid() || v.tape_ != this) throw NumericError("value does not belong to this tape");
}

Value Tape::make(Shape shape) {
  Node n;
  n.shape = std::move(shape);
  n.data.assign(static_cast<std::size_t>(numel(n.shape)), 0.0);
  nodes_.push_back(std::move(n));
  return Value(this, static_cast<int>(nodes_.size()) - 1);
}

Value Tape::param(ParamStore& store, const std::string& name) {
  auto& e = store.at(name);
  Value v = make(e.shape);
  node(v).data = e.values;
  node(v).bound = &e;
  return v;
}

Value Tape::input(Shape shape, std::span<const double> data) {
  if (static_cast<int>(data.size()) != numel(shape)) {
    throw ShapeError("input data size " + std::to_string(data.size()) + " does not match shape " +
                     shape_str(shape));
  }
  Value v = make(std::move(shape));
  std::copy(data.begin(), data.end(), node(v).data.begin());
  return v;
}

Value Tape::input_scalar(double x) {
  Value v = make({1});
  node(v).data[0] = x;
  return v;
}

Value Tape::detach(Value v) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  node(out).data = node(v).data;
  return out;
}

Value Tape::matmul(Value a, Value b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape& sa = node(a).shape;
  const Shape& sb = node(b).shape;

  // [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]; [k]x[k,n] -> [n]
  int m, k, n;
  bool a_vec = sa.size() == 1, b_vec = sb.size() == 1;
  if (sa.size() == 2 && sb.size() == 2) {
    m = sa[0]; k = sa[1]; n = sb[1];
    if (sb[0] != k) shape_fail("matmul", sa, sb);
  } else if (sa.size() == 2 && b_vec) {
    m = sa[0]; k = sa[1]; n = 1;
    if (sb[0] != k) shape_fail("matmul", sa, sb);
  } else if (a_vec && sb.size() == 2) {
    m = 1; k = sa[0]; n = sb[1];
    if (sb[0] != k) shape_fail("matmul", sa, sb);
  } else {
    shape_fail("matmul", sa, sb);
  }

  Shape out_shape = a_vec ? Shape{n} : (b_vec ? Shape{m} : Shape{m, n});
  Value out = make(std::move(out_shape));
  {
    CMatMap A(node(a).data.data(), m, k);
    CMatMap B(node(b).data.data(), k, n);
    MatMap C(node(out).data.data(), m, n);
    C.noalias() = A * B;
  }
  node(out).parents = {a.id_, b.id_};
  node(out).back = [m, k, n](Tape& t, int self) {
    Node& s = t.node(self);
    Node& pa = t.node(s.parents[0]);
    Node& pb = t.node(s.parents[1]);
    CMatMap A(pa.data.data(), m, k);
    CMatMap B(pb.data.data(), k, n);
    CMatMap dC(s.grad.data(), m, n);
    MatMap dA(pa.grad.data(), m, k);
    MatMap dB(pb.grad.data(), k, n);
    dA.noalias() += dC * B.transpose();
    dB.noalias() += A.transpose() * dC;
  };
  return out;
}

Value Tape::add(Value a, Value b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape sa = node(a).shape;
  const Shape sb = node(b).shape;
  const bool same = sa == sb;
  const bool row_bcast = sa.size() == 2 && sb.size() == 1 && sa[1] == sb[0];
  if (!same && !row_bcast) shape_fail("add", sa, sb);

  Value out = make(sa);
  Node& o = node(out);
  const auto& da = node(a).data;
  const auto& db = node(b).data;
  if (same) {
    for (std::size_t i = 0; i < o.data.size(); ++i) o.data[i] = da[i] + db[i];
  } else {
    const int rows = sa[0], cols = sa[1];
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) o.data[static_cast<std::size_t>(r * cols + c)] = da[static_cast<std::size_t>(r * cols + c)] + db[static_cast<std::size_t>(c)];
  }
  o.parents = {a.id_, b.id_};
  o.back = [same](Tape& t, int self) {
    Node& s = t.node(self);
    Node& pa = t.node(s.parents[0]);
    Node& pb = t.node(s.parents[1]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) pa.grad[i] += s.grad[i];
    if (same) {
      for (std::size_t i = 0; i < s.grad.size(); ++i) pb.grad[i] += s.grad[i];
    } else {
      const int rows = s.shape[0], cols = s.shape[1];
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) pb.grad[static_cast<std::size_t>(c)] += s.grad[static_cast<std::size_t>(r * cols + c)];
    }
  };
  return out;
}

Value Tape::concat(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("concat of zero parts");
  int total = 0;
  for (Value p : parts) {
    check_same_tape(p);
    if (node(p).shape.size() != 1) {
      throw ShapeError("concat expects vectors, got " + shape_str(node(p).shape));
    }
    total += node(p).shape[0];
  }
  Value out = make({total});
  Node& o = node(out);
  int off = 0;
  for (Value p : parts) {
    const auto& d = node(p).data;
    std::copy(d.begin(), d.end(), o.data.begin() + off);
    o.parents.push_back(p.id_);
    off += static_cast<int>(d.size());
  }
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    int off = 0;
    for (int pid : s.parents) {
      Node& p = t.node(pid);
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += s.grad[static_cast<std::size_t>(off) + i];
      off += static_cast<int>(p.grad.size());
    }
  };
  return out;
}

Value Tape::tanh_(Value v) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (std::size_t i = 0; i < d.size(); ++i) o.data[i] = std::tanh(d[i]);
  o.parents = {v.id_};
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) p.grad[i] += s.grad[i] * (1.0 - s.data[i] * s.data[i]);
  };
  return out;
}

Value Tape::sigmoid(Value v) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (std::size_t i = 0; i < d.size(); ++i) o.data[i] = 1.0 / (1.0 + std::exp(-d[i]));
  o.parents = {v.id_};
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) p.grad[i] += s.grad[i] * s.data[i] * (1.0 - s.data[i]);
  };
  return out;
}

Value Tape::relu(Value v) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (std::size_t i = 0; i < d.size(); ++i) o.data[i] = d[i] > 0.0 ? d[i] : 0.0;
  o.parents = {v.id_};
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i)
      if (p.data[i] > 0.0) p.grad[i] += s.grad[i];
  };
  return out;
}

Value Tape::mul(Value a, Value b) {
  check_same_tape(a);
  check_same_tape(b);
  if (node(a).shape != node(b).shape) shape_fail("mul", node(a).shape, node(b).shape);
  Value out = make(node(a).shape);
  Node& o = node(out);
  const auto& da = node(a).data;
  const auto& db = node(b).data;
  for (std::size_t i = 0; i < o.data.size(); ++i) o.data[i] = da[i] * db[i];
  o.parents = {a.id_, b.id_};
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    Node& pa = t.node(s.parents[0]);
    Node& pb = t.node(s.parents[1]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) {
      pa.grad[i] += s.grad[i] * pb.data[i];
      pb.grad[i] += s.grad[i] * pa.data[i];
    }
  };
  return out;
}

Value Tape::softmax(Value v) {
  check_same_tape(v);
  const Shape& sv = node(v).shape;
  if (sv.empty() || sv.size() > 2) throw ShapeError("softmax expects 1-D or 2-D, got " + shape_str(sv));
  const int rows = sv.size() == 2 ? sv[0] : 1;
  const int cols = sv.size() == 2 ? sv[1] : sv[0];

  Value out = make(sv);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (int r = 0; r < rows; ++r) {
    const double* x = d.data() + static_cast<std::ptrdiff_t>(r) * cols;
    double* y = o.data.data() + static_cast<std::ptrdiff_t>(r) * cols;
    double mx = x[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    for (int c = 0; c < cols; ++c) y[c] /= sum;
  }
  o.parents = {v.id_};
  o.back = [rows, cols](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (int r = 0; r < rows; ++r) {
      const double* y = s.data.data() + static_cast<std::ptrdiff_t>(r) * cols;
      const double* dy = s.grad.data() + static_cast<std::ptrdiff_t>(r) * cols;
      double* dx = p.grad.data() + static_cast<std::ptrdiff_t>(r) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += dy[c] * y[c];
      for (int c = 0; c < cols; ++c) dx[c] += y[c] * (dy[c] - dot);
    }
  };
  return out;
}

Value Tape::log_(Value v) { return log_floor(v, 0.0, nullptr); }

Value Tape::log_floor(Value v, double floor, long* clamp_count) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double x = d[i];
    if (x < floor) {
      x = floor;
      if (clamp_count) ++*clamp_count;
    }
    o.data[i] = std::log(x);
  }
  o.parents = {v.id_};
  // Clamped coordinates see zero gradient: the floored forward is constant there.
  o.back = [floor](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) {
      if (p.data[i] < floor) continue;
      p.grad[i] += s.grad[i] / p.data[i];
    }
  };
  return out;
}

Value Tape::maxpool1d(Value v, int width) {
  check_same_tape(v);
  const Shape& sv = node(v).shape;
  if (sv.size() != 2) throw ShapeError("maxpool1d expects [ch,len], got " + shape_str(sv));
  if (width < 1) throw ShapeError("maxpool1d width must be >= 1");
  const int ch = sv[0], len = sv[1], out_len = len / width;
  if (out_len < 1) throw ShapeError("maxpool1d window wider than input " + shape_str(sv));

  Value out = make({ch, out_len});
  Node& o = node(out);
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(ch) * out_len);
  const auto& d = node(v).data;
  for (int c = 0; c < ch; ++c) {
    for (int i = 0; i < out_len; ++i) {
      int best = c * len + i * width;
      for (int j = 1; j < width; ++j) {
        const int idx = c * len + i * width + j;
        if (d[static_cast<std::size_t>(idx)] > d[static_cast<std::size_t>(best)]) best = idx;
      }
      o.data[static_cast<std::size_t>(c * out_len + i)] = d[static_cast<std::size_t>(best)];
      (*argmax)[static_cast<std::size_t>(c * out_len + i)] = best;
    }
  }
  o.parents = {v.id_};
  o.back = [argmax](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) p.grad[static_cast<std::size_t>((*argmax)[i])] += s.grad[i];
  };
  return out;
}

Value Tape::conv1d(Value x, Value w, Value b) {
  check_same_tape(x);
  check_same_tape(w);
  check_same_tape(b);
  const Shape& sx = node(x).shape;
  const Shape& sw = node(w).shape;
  const Shape& sb = node(b).shape;
  if (sx.size() != 2 || sw.size() != 3) shape_fail("conv1d", sx, sw);
  const int cin = sx[0], len = sx[1];
  const int cout = sw[0], k = sw[2];
  if (sw[1] != cin) shape_fail("conv1d", sx, sw);
  if (k % 2 != 1) throw ShapeError("conv1d kernel width must be odd, got " + shape_str(sw));
  if (sb.size() != 1 || sb[0] != cout) shape_fail("conv1d bias", sw, sb);
  const int pad = k / 2;

  Value out = make({cout, len});
  Node& o = node(out);
  const auto& dx = node(x).data;
  const auto& dw = node(w).data;
  const auto& db = node(b).data;
  for (int oc = 0; oc < cout; ++oc) {
    for (int i = 0; i < len; ++i) {
      double acc = db[static_cast<std::size_t>(oc)];
      for (int ic = 0; ic < cin; ++ic) {
        const double* xi = dx.data() + static_cast<std::ptrdiff_t>(ic) * len;
        const double* wi = dw.data() + (static_cast<std::ptrdiff_t>(oc) * cin + ic) * k;
        const int j0 = std::max(0, pad - i);
        const int j1 = std::min(k, len + pad - i);
        for (int j = j0; j < j1; ++j) acc += wi[j] * xi[i + j - pad];
      }
      o.data[static_cast<std::size_t>(oc * len + i)] = acc;
    }
  }
  o.parents = {x.id_, w.id_, b.id_};
  o.back = [cin, cout, len, k, pad](Tape& t, int self) {
    Node& s = t.node(self);
    Node& px = t.node(s.parents[0]);
    Node& pw = t.node(s.parents[1]);
    Node& pb = t.node(s.parents[2]);
    for (int oc = 0; oc < cout; ++oc) {
      const double* go = s.grad.data() + static_cast<std::ptrdiff_t>(oc) * len;
      for (int i = 0; i < len; ++i) pb.grad[static_cast<std::size_t>(oc)] += go[i];
      for (int ic = 0; ic < cin; ++ic) {
        const double* xi = px.data.data() + static_cast<std::ptrdiff_t>(ic) * len;
        double* gxi = px.grad.data() + static_cast<std::ptrdiff_t>(ic) * len;
        const double* wi = pw.data.data() + (static_cast<std::ptrdiff_t>(oc) * cin + ic) * k;
        double* gwi = pw.grad.data() + (static_cast<std::ptrdiff_t>(oc) * cin + ic) * k;
        for (int i = 0; i < len; ++i) {
          const double g = go[i];
          if (g == 0.0) continue;
          const int j0 = std::max(0, pad - i);
          const int j1 = std::min(k, len + pad - i);
          for (int j = j0; j < j1; ++j) {
            gwi[j] += g * xi[i + j - pad];
            gxi[i + j - pad] += g * wi[j];
          }
        }
      }
    }
  };
  return out;
}

Value Tape::mean(Value v) {
  check_same_tape(v);
  const int n = numel(node(v).shape);
  Value out = make({1});
  Node& o = node(out);
  double acc = 0.0;
  for (double x : node(v).data) acc += x;
  o.data[0] = acc / n;
  o.parents = {v.id_};
  o.back = [n](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    const double g = s.grad[0] / n;
    for (double& pg : p.grad) pg += g;
  };
  return out;
}

Value Tape::sum(Value v) {
  check_same_tape(v);
  Value out = make({1});
  Node& o = node(out);
  double acc = 0.0;
  for (double x : node(v).data) acc += x;
  o.data[0] = acc;
  o.parents = {v.id_};
  o.back = [](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (double& pg : p.grad) pg += s.grad[0];
  };
  return out;
}

Value Tape::pick(Value v, int index) {
  check_same_tape(v);
  const int n = numel(node(v).shape);
  if (index < 0 || index >= n) {
    throw ShapeError("pick index " + std::to_string(index) + " out of range for " +
                     shape_str(node(v).shape));
  }
  Value out = make({1});
  Node& o = node(out);
  o.data[0] = node(v).data[static_cast<std::size_t>(index)];
  o.parents = {v.id_};
  o.back = [index](Tape& t, int self) {
    Node& s = t.node(self);
    t.node(s.parents[0]).grad[static_cast<std::size_t>(index)] += s.grad[0];
  };
  return out;
}

Value Tape::slice(Value v, int offset, int len) {
  check_same_tape(v);
  const int n = numel(node(v).shape);
  if (offset < 0 || len <= 0 || offset + len > n) {
    throw ShapeError("slice [" + std::to_string(offset) + "," + std::to_string(offset + len) +
                     ") out of range for " + shape_str(node(v).shape));
  }
  Value out = make({len});
  Node& o = node(out);
  const auto& d = node(v).data;
  std::copy(d.begin() + offset, d.begin() + offset + len, o.data.begin());
  o.parents = {v.id_};
  o.back = [offset, len](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (int i = 0; i < len; ++i) p.grad[static_cast<std::size_t>(offset + i)] += s.grad[static_cast<std::size_t>(i)];
  };
  return out;
}

Value Tape::row(Value m, int r) {
  check_same_tape(m);
  const Shape& sm = node(m).shape;
  if (sm.size() != 2) throw ShapeError("row expects a matrix, got " + shape_str(sm));
  if (r < 0 || r >= sm[0]) {
    throw ShapeError("row " + std::to_string(r) + " out of range for " + shape_str(sm));
  }
  return slice(m, r * sm[1], sm[1]);
}

Value Tape::scale(Value v, double c) {
  check_same_tape(v);
  Value out = make(node(v).shape);
  Node& o = node(out);
  const auto& d = node(v).data;
  for (std::size_t i = 0; i < d.size(); ++i) o.data[i] = c * d[i];
  o.parents = {v.id_};
  o.back = [c](Tape& t, int self) {
    Node& s = t.node(self);
    Node& p = t.node(s.parents[0]);
    for (std::size_t i = 0; i < s.grad.size(); ++i) p.grad[i] += c * s.grad[i];
  };
  return out;
}

Value Tape::weighted_sum(std::span<const Value> vs, std::span<const double> ws) {
  if (vs.empty() || vs.size() != ws.size()) {
    throw ShapeError("weighted_sum needs matching value/weight counts");
  }
  const Shape shape = node(vs[0]).shape;
  Value out = make(shape);
  Node& o = node(out);
  auto weights = std::make_shared<std::vector<double>>(ws.begin(), ws.end());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    check_same_tape(vs[i]);
    if (node(vs[i]).shape != shape) shape_fail("weighted_sum", shape, node(vs[i]).shape);
    const auto& d = node(vs[i]).data;
    for (std::size_t j = 0; j < d.size(); ++j) o.data[j] += ws[i] * d[j];
    o.parents.push_back(vs[i].id_);
  }
  o.back = [weights](Tape& t, int self) {
    Node& s = t.node(self);
    for (std::size_t i = 0; i < s.parents.size(); ++i) {
      Node& p = t.node(s.parents[i]);
      const double w = (*weights)[i];
      for (std::size_t j = 0; j < s.grad.size(); ++j) p.grad[j] += w * s.grad[j];
    }
  };
  return out;
}

void Tape::backward(Value loss) {
  check_same_tape(loss);
  if (numel(node(loss).shape) != 1) {
    throw ShapeError("backward requires a scalar loss, got " + shape_str(node(loss).shape));
  }
  for (auto& n : nodes_) n.grad.assign(n.data.size(), 0.0);
  node(loss).grad[0] = 1.0;
  for (int id = loss.id_; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    bool any = false;
    for (double g : n.grad) {
      if (g != 0.0) { any = true; break; }
    }
    if (!any) continue;
    if (n.back) n.back(*this, id);
    if (n.bound) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) n.bound->grads[i] += n.grad[i];
    }
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace mtia::diff
