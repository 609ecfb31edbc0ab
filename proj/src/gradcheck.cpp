#include "mtia/gradcheck.hpp"

#include <cmath>
#include <vector>

namespace mtia::diff {

GradCheckReport check_gradients(ParamStore& store, const LossFn& loss, double eps, long coords,
                                Rng& rng) {
  store.zero_grads();
  loss(true);

  std::vector<std::vector<double>> analytic;
  for (const auto& e : store.entries()) analytic.push_back(e.grads);
  store.zero_grads();

  const long total = store.total_params();
  GradCheckReport report;
  for (long s = 0; s < coords; ++s) {
    long flat = rng.uniform_int(static_cast<int>(total));
    std::size_t ei = 0;
    while (flat >= static_cast<long>(store.entries()[ei].values.size())) {
      flat -= static_cast<long>(store.entries()[ei].values.size());
      ++ei;
    }
    auto& e = store.entries()[ei];
    const std::size_t ci = static_cast<std::size_t>(flat);

    const double saved = e.values[ci];
    e.values[ci] = saved + eps;
    const double up = loss(false);
    e.values[ci] = saved - eps;
    const double down = loss(false);
    e.values[ci] = saved;

    const double numeric = (up - down) / (2.0 * eps);
    const double exact = analytic[ei][ci];
    // Floor shields near-zero gradients from central-difference roundoff
    // (~|loss|*1e-16/eps) while still flagging corruption above 1e-10.
    const double denom = std::max({std::fabs(numeric), std::fabs(exact), 1e-6});
    const double rel = std::fabs(numeric - exact) / denom;
    ++report.coords_checked;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_param = e.name;
      report.worst_coord = static_cast<int>(ci);
    }
  }
  return report;
}

}  // namespace mtia::diff
