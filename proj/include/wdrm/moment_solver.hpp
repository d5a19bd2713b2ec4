#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "wdrm/distortion.hpp"
#include "wdrm/distributions.hpp"
#include "wdrm/solve_report.hpp"

namespace wdrm {

// Band i of the stationarity candidate at fixed multipliers, before any
// monotone correction. On [0,1] its curve is increasing except possibly on a
// single interval, which is empty whenever etap <= 0.
struct BandCandidate {
    std::size_t index = 1;
    std::size_t count = 1;
    StationarityCurve curve;

    // Open interval (within [0,1]) where the curve decreases, if any.
    std::optional<std::pair<double, double>> decreasing_interval() const;
    bool is_monotone() const { return !decreasing_interval().has_value(); }
};

enum class RectifyMethod {
    analytic,  // decreasing stretch located in closed form
    grid,      // located by pooling adjacent violators on a uniform grid
};

// Isotonic correction of the candidate's stationarity curve on [0,1]: every
// decreasing stretch is pooled into a flat whose level keeps the integral of
// the curve over the pooled interval. Returns the band built from the
// corrected curve; monotone candidates come back unchanged.
ConditionalBandCdf monotone_rectify(const BandCandidate& candidate, const Distortion& g,
                                    RectifyMethod method = RectifyMethod::analytic, std::size_t grid_points = 2048);

// Moment-constrained worst case without a Wasserstein ball (mean c1 and
// p-th raw moment cp on the support).
SolveReport solve_cornilly(const Distortion& g, double p, double c1, double cp,
                           SupportMode support = SupportMode::unit(), const SolverOptions& options = {});

// Wasserstein ball intersected with the moment constraints, bounded support, p >= 2.
SolveReport solve_problem_b(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps, double c1,
                            double cp, const SolverOptions& options = {});

// Ball plus a mean constraint only.
SolveReport solve_mean_only(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps, double c1,
                            const SolverOptions& options = {});

// Real-line version for p = 2 with mean c1 and second raw moment c2.
SolveReport solve_corollary_p2(const EmpiricalCdf& Fhat, const Distortion& g, double eps, double c1, double c2,
                               const SolverOptions& options = {});

}  // namespace wdrm
