#pragma once

#include <string_view>

#include "sbridge/grid.hpp"

namespace sbridge {

/// Positivity floor relative to a field's maximum, shared by the metric, the
/// PDE kernels and the boundary divisions.
inline constexpr double kRelativeFloor = 1e-14;

/// Hilbert's projective metric log(max u/v) - log(min u/v), over every node.
///
/// Throws DegenerateFieldError naming the field and node when a value of
/// either argument falls below relative_floor * (that field's max).
double hilbert_distance(const ScalarField& u, const ScalarField& v, std::string_view u_name = "u",
                        std::string_view v_name = "v", double relative_floor = kRelativeFloor);

/// Copy of f with every value raised to at least relative_floor * max(f).
ScalarField apply_relative_floor(ScalarField f, double relative_floor = kRelativeFloor);

}  // namespace sbridge
