#include "sbridge/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "sbridge/error.hpp"

namespace sbridge {

namespace {

void check_positive(const ScalarField& f, std::string_view name, double relative_floor) {
  const double top = f.max();
  if (!(top > 0.0) || !std::isfinite(top))
    throw DegenerateFieldError("field has no positive finite maximum", {{}, {}, {}, std::string(name)});
  const double floor = relative_floor * top;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] >= floor))
      throw DegenerateFieldError(
          fmt::format("value {:.3g} below the positivity floor {:.3g}", f[k], floor),
          {{}, {}, k, std::string(name)});
  }
}

}  // namespace

double hilbert_distance(const ScalarField& u, const ScalarField& v, std::string_view u_name,
                        std::string_view v_name, double relative_floor) {
  if (!(u.grid() == v.grid())) throw InvalidArgument("Hilbert distance between fields on different grids");
  check_positive(u, u_name, relative_floor);
  check_positive(v, v_name, relative_floor);
  // Ratios are formed in log space, so neither overflow nor underflow of u/v
  // can affect the result when the fields span many decades.
  double hi = -INFINITY, lo = INFINITY;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = std::log(u[k]) - std::log(v[k]);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return hi - lo;
}

ScalarField apply_relative_floor(ScalarField f, double relative_floor) {
  const double floor = relative_floor * f.max();
  for (double& v : f.values()) v = std::max(v, floor);
  return f;
}

}  // namespace sbridge
