#pragma once

#include <vector>

#include "wdrm/distortion.hpp"
#include "wdrm/distributions.hpp"
#include "wdrm/solve_report.hpp"

namespace wdrm {

// Worst-case distortion risk over the Wasserstein ball of radius eps around
// Fhat, on [0,1] (or [0,B], reduced to [0,1]).
SolveReport solve_problem_a(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps,
                            const SolverOptions& options = {});

// Same problem on the real line for p = 2, where the optimiser is a
// closed-form quantile shift.
SolveReport solve_a_unbounded_p2(const EmpiricalCdf& Fhat, const Distortion& g, double eps,
                                 const SolverOptions& options = {});

// Unit-scale budget residual (W_p(F_lambda, Fhat)^p - eps^p)/p of the
// lambda-indexed candidate family. Decreasing in lambda.
double budget_residual(const EmpiricalCdf& Fhat_unit, const Distortion& g, double p, double eps, double lambda,
                       double tol = 1e-10);

// Bands of the candidate at lambda (unit scale, no moment multipliers).
std::vector<ConditionalBandCdf> problem_a_bands(const EmpiricalCdf& Fhat_unit, const Distortion& g, double p,
                                                double lambda);

}  // namespace wdrm
