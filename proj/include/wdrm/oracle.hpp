#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "wdrm/distortion.hpp"
#include "wdrm/distributions.hpp"
#include "wdrm/solve_report.hpp"

namespace wdrm {

// Optional moment hyperplanes, in loss units.
struct OracleConstraints {
    std::optional<double> c1;
    std::optional<double> cp;
};

struct OracleOptions {
    std::size_t grid = 800;        // cells on the unit interval
    int max_iterations = 200000;
    double tolerance = 1e-10;      // relative objective change at termination
};

struct OracleResult {
    double value = 0.0;             // drm_value of the averaged grid CDF
    double objective = 0.0;         // discrete integral of phi(F), unit scale
    PiecewiseCdf cdf;               // averaged step CDF on the grid
    std::vector<double> grid_cdf;   // averaged CDF on [x_j, x_{j+1}), j = 0..M-1
    Residuals residuals;            // re-evaluated through the distributions module
    double budget_used = 0.0;
    double constraint_violation = 0.0;  // largest linear-constraint residual of the grid program
    int iterations = 0;
    bool converged = false;
};

// Brute-force verifier. Discretises every conditional CDF F^i as a step
// function on the grid j/M (last value pinned to 1), keeps the Wasserstein
// budget and moment constraints as exact linear functionals of the steps, and
// minimises sum_j phi(mean_i F^i_j) / M by accelerated projected gradient.
OracleResult oracle_solve(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps,
                          const OracleConstraints& constraints = {}, const OracleOptions& options = {});

// Pool-adjacent-violators projection onto nondecreasing vectors, then the box
// [lower, upper], then the last entry pinned to terminal when given.
std::vector<double> pava_project(std::vector<double> v, double lower = 0.0, double upper = 1.0,
                                 std::optional<double> terminal = 1.0);

// report.value - result.value for the same instance.
double oracle_gap(const SolveReport& report, const OracleResult& result);

}  // namespace wdrm
