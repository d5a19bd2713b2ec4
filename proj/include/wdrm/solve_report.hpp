#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdrm/distributions.hpp"

namespace wdrm {

struct Tolerances {
    double root = 1e-12;        // relative bracket width for the outer multiplier
    double quadrature = 1e-10;  // absolute, per integral
    double newton = 1e-10;      // moment residuals in the inner solve
    double gap = 5e-3;          // oracle agreement target
};

struct SolverOptions {
    Tolerances tol;
    bool allow_non_strict = false;  // admit the identity distortion
};

enum SolveFlag : std::uint32_t {
    flag_binding = 1u << 0,
    flag_p1_degenerate = 1u << 1,
    flag_supremum_not_attained = 1u << 2,
    flag_near_degenerate_ball = 1u << 3,
    flag_rectified = 1u << 4,
    flag_cp_outside_reference_range = 1u << 5,
    flag_homotopy = 1u << 6,
    flag_nested_fallback = 1u << 7,
    flag_iteration_cap = 1u << 8,
    flag_non_strict_distortion = 1u << 9,
};

// Names used in reports, in bit order.
std::vector<std::string> flag_names(std::uint32_t flags);

struct MultiplierSet {
    double lambda = 0.0;
    double eta1 = 0.0;
    double etap = 0.0;
    bool wasserstein_binding = false;
};

struct Residuals {
    std::optional<double> budget;   // W_p(F*, Fhat) - eps
    std::optional<double> mean;     // first moment - c1
    std::optional<double> pmoment;  // p-th moment - cp
};

struct IterationCounts {
    int outer = 0;     // root-finder steps on lambda
    int inner = 0;     // Newton / bisection steps on (eta1, etap)
    int restarts = 0;
    int homotopy = 0;
    int evaluations = 0;
};

struct SolveReport {
    double value = 0.0;
    MultiplierSet multipliers;
    PiecewiseCdf cdf;
    Residuals residuals;
    IterationCounts iterations;
    double budget_used = 0.0;  // W_p(F*, Fhat) in outer units
    std::uint32_t flags = 0;
    std::vector<std::string> warnings;

    bool has(SolveFlag f) const { return (flags & f) != 0; }
};

}  // namespace wdrm
