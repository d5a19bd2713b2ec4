#pragma once

#include <cmath>
#include <string>

#include "wdrm/distortion.hpp"
#include "wdrm/error.hpp"
#include "wdrm/solve_report.hpp"

namespace wdrm::detail {

inline void check_order(double p, double min_p) {
    if (!(p >= min_p) || !std::isfinite(p)) {
        throw InvalidArgument("order p must be finite and >= " + std::to_string(min_p));
    }
}

inline void check_radius(double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("radius eps must be > 0");
}

inline void check_distortion(const Distortion& g, const SolverOptions& options) {
    if (!g.is_strict() && !options.allow_non_strict) {
        throw InvalidArgument("distortion '" + g.to_string() + "' is not strictly concave; pass allow_non_strict");
    }
}

}  // namespace wdrm::detail
