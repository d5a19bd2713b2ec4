#include "wdrm/wball_solver.hpp"

#include <cmath>
#include <limits>

#include "band_integrals.hpp"
#include "validation.hpp"
#include "wdrm/error.hpp"
#include "wdrm/roots.hpp"

namespace wdrm {

namespace {

constexpr double kLambdaLo = 1e-8;
constexpr double kLambdaHi = 1e8;
constexpr double kLambdaCeiling = 1e280;

// (1/N) sum (1 - x_i)^p: W_p(delta_1, Fhat)^p.
double tail_moment(const EmpiricalCdf& unit, double p) {
    double s = 0.0;
    for (double x : unit.samples()) s += std::pow(1.0 - x, p);
    return s / static_cast<double>(unit.size());
}

// Clipped quantile shift for the linear distortion: every shift of mass to the
// right raises the mean one for one, so the optimum moves each sample by the
// same amount until it hits the upper bound.
SolveReport solve_identity(const EmpiricalCdf& Fhat, const EmpiricalCdf& unit, double p, double e) {
    const auto& xs = unit.samples();
    auto cost = [&](double d) {
        double s = 0.0;
        for (double x : xs) s += std::pow(std::min(d, 1.0 - x), p);
        return s / static_cast<double>(xs.size()) - std::pow(e, p);
    };
    int iters = 0;
    double d = roots::solve_bracketed(cost, {0.0, 1.0, cost(0.0), cost(1.0)}, 1e-15, 0.0, &iters);
    std::vector<double> shifted;
    for (double x : xs) shifted.push_back(std::min(1.0, x + d) * Fhat.support().scale);
    EmpiricalCdf moved(std::move(shifted), Fhat.support());
    SolveReport r;
    r.cdf = moved.to_piecewise();
    r.multipliers.lambda = d;
    r.multipliers.wasserstein_binding = true;
    r.flags |= flag_binding | flag_non_strict_distortion;
    r.iterations.outer = iters;
    return r;
}

}  // namespace

std::vector<ConditionalBandCdf> problem_a_bands(const EmpiricalCdf& unit, const Distortion& g, double p,
                                                double lambda) {
    std::vector<ConditionalBandCdf> bands;
    const auto& xs = unit.samples();
    bands.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        StationarityCurve curve{p, xs[i], lambda, 0.0, 0.0};
        bands.emplace_back(i + 1, xs.size(), curve, g);
    }
    return bands;
}

double budget_residual(const EmpiricalCdf& unit, const Distortion& g, double p, double eps, double lambda,
                       double tol) {
    if (!(lambda > 0.0)) throw InvalidArgument("budget_residual needs lambda > 0");
    double sum = 0.0;
    for (const auto& band : problem_a_bands(unit, g, p, lambda)) {
        sum += detail::integrate_band(band, p, tol, false).budget;
    }
    double lhs = -sum / static_cast<double>(unit.size());
    double kappa = (std::pow(eps, p) - tail_moment(unit, p)) / p;
    return lhs - kappa;
}

SolveReport solve_problem_a(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps,
                            const SolverOptions& options) {
    detail::check_order(p, 1.0);
    detail::check_radius(eps);
    detail::check_distortion(g, options);
    if (!Fhat.support().bounded()) {
        if (p != 2.0) throw InvalidArgument("unbounded support is only solved for p = 2");
        return solve_a_unbounded_p2(Fhat, g, eps, options);
    }
    const double scale = Fhat.support().scale;
    const EmpiricalCdf unit = Fhat.to_unit();
    const double e = eps / scale;
    const double tail = tail_moment(unit, p);

    SolveReport r;
    if (tail <= std::pow(e, p)) {
        // The point mass at the upper bound is inside the ball.
        r.cdf = PiecewiseCdf::point_mass(Fhat.support().upper(), Fhat.support());
    } else if (!g.is_strict()) {
        r = solve_identity(Fhat, unit, p, e);
    } else {
        const double tol = options.tol.quadrature;
        int evals = 0;
        auto f = [&](double t) {
            ++evals;
            return budget_residual(unit, g, p, e, std::exp(t), tol);
        };
        double lo = std::log(kLambdaLo), hi = std::log(kLambdaHi);
        double f_lo = f(lo);
        while (f_lo <= 0.0 && lo > std::log(1e-300)) {
            lo -= std::log(1e4);
            f_lo = f(lo);
        }
        double f_hi = f(hi);
        while (f_hi >= 0.0 && hi < std::log(kLambdaCeiling)) {
            // Radius close to zero: the multiplier leaves the default bracket.
            r.flags |= flag_near_degenerate_ball;
            hi += std::log(1e4);
            f_hi = f(hi);
        }
        if (f_lo <= 0.0 || f_hi >= 0.0) {
            if (p == 1.0) {
                r.flags |= flag_supremum_not_attained | flag_p1_degenerate;
                r.warnings.push_back("no root of the budget equation; supremum not attained");
            }
            throw ConvergenceError("budget equation has no sign change in lambda", {f_lo, f_hi});
        }
        if (r.flags & flag_near_degenerate_ball) {
            r.warnings.push_back("assumption_a_near_degenerate: lambda bracket expanded beyond 1e8");
        }
        double t = roots::solve_bracketed(f, {lo, hi, f_lo, f_hi}, options.tol.root, 0.0, &r.iterations.outer);
        double lambda = std::exp(t);
        auto bands = problem_a_bands(unit, g, p, lambda);
        r.cdf = assemble_bands(bands, g, SupportMode::unit()).with_support(Fhat.support());
        r.multipliers.lambda = lambda;
        r.multipliers.wasserstein_binding = true;
        r.flags |= flag_binding;
        r.iterations.evaluations = evals;
    }
    if (p == 1.0) r.flags |= flag_p1_degenerate;
    r.value = drm_value(r.cdf, g);
    r.budget_used = wasserstein_to_empirical(r.cdf, Fhat, p);
    r.residuals.budget = r.budget_used - eps;
    return r;
}

SolveReport solve_a_unbounded_p2(const EmpiricalCdf& Fhat, const Distortion& g, double eps,
                                 const SolverOptions& options) {
    detail::check_radius(eps);
    detail::check_distortion(g, options);
    const double g2 = g.derivative_square_integral();
    if (!std::isfinite(g2)) {
        throw UnboundedError("integral of g'(u)^2 diverges: the worst case over the ball is +infinity");
    }
    const double lambda = std::sqrt(g2) / eps;
    const auto& xs = Fhat.samples();
    std::vector<ConditionalBandCdf> bands;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        StationarityCurve curve{2.0, xs[i], lambda, 0.0, 0.0};
        bands.emplace_back(i + 1, xs.size(), curve, g, std::vector<ConditionalBandCdf::Flat>{},
                           -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    }
    SolveReport r;
    r.cdf = assemble_bands(bands, g, SupportMode::unbounded());
    r.multipliers.lambda = lambda;
    r.multipliers.wasserstein_binding = true;
    r.flags |= flag_binding;
    if (!g.is_strict()) r.flags |= flag_non_strict_distortion;
    r.value = drm_value(r.cdf, g, DrmRoute::quantile);
    r.budget_used = wasserstein_to_empirical(r.cdf, Fhat, 2.0);
    r.residuals.budget = r.budget_used - eps;
    return r;
}

}  // namespace wdrm
