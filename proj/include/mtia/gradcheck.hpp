#pragma once

#include <functional>
#include <string>

#include "mtia/diffcore.hpp"
#include "mtia/rng.hpp"

namespace mtia::diff {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_coord = -1;
  long coords_checked = 0;
};

// Deterministic scalar loss of the current store values. Called with
// want_grad=true exactly once to accumulate analytic grads into the store;
// all other calls use want_grad=false and must not touch grads.
using LossFn = std::function<double(bool want_grad)>;

// Central-difference check of d(loss)/d(theta) on `coords` randomly chosen
// parameter coordinates. Relative error uses max(|analytic|,|numeric|,1e-6)
// as denominator; the floor turns sub-1e-6 gradients into an absolute check.
GradCheckReport check_gradients(ParamStore& store, const LossFn& loss, double eps, long coords,
                                Rng& rng);

}  // namespace mtia::diff
