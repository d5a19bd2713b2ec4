#include <gtest/gtest.h>

#include <cmath>

#include "wdrm/error.hpp"
#include "wdrm/rng.hpp"
#include "wdrm/wball_solver.hpp"

using namespace wdrm;

TEST(ProblemA, AlreadyWorst) {
    auto r = solve_problem_a(EmpiricalCdf({1.0}), Distortion::dual_power(2), 2.0, 0.05);
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_FALSE(r.multipliers.wasserstein_binding);
    EXPECT_NEAR(r.cdf(1.0 - 1e-9), 0.0, 1e-12);
}

TEST(ProblemA, NonBindingReturnsRightEdge) {
    auto r = solve_problem_a(EmpiricalCdf({0.9, 0.95}), Distortion::power(0.5), 2.0, 0.2);
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_FALSE(r.has(flag_binding));
}

TEST(ProblemA, MatchesOracleValue) {
    // Grid oracle at M = 800 gave 0.8506998481.
    auto r = solve_problem_a(EmpiricalCdf({0.25, 0.75}), Distortion::dual_power(2), 2.0, 0.2);
    EXPECT_NEAR(r.value, 0.8506998481, 5e-3);
    EXPECT_NEAR(r.value, 0.8507, 1e-9);
    EXPECT_LE(std::abs(*r.residuals.budget), 1e-6);
}

TEST(ProblemA, SurrogateDatasetCell) {
    EmpiricalCdf F(uniform_samples(200, 0.0, 1.0, 162072707ULL));
    auto r = solve_problem_a(F, Distortion::power(0.5), 2.0, 0.3);
    EXPECT_NEAR(r.value, 0.85754, 0.02);
}

TEST(ProblemA, BudgetResidualLimits) {
    EmpiricalCdf F({0.2, 0.6});
    auto g = Distortion::dual_power(3);
    double p = 2.0, eps = 0.1;
    double far = budget_residual(F, g, p, eps, 1e9);
    double slack = std::pow(eps, p) - 0.5 * (std::pow(0.8, p) + std::pow(0.4, p));
    EXPECT_NEAR(far, -std::pow(eps, p) / p, 1e-6);
    EXPECT_GT(budget_residual(F, g, p, eps, 1e-9), 0.0);
    EXPECT_LT(slack, 0.0);
    double prev = budget_residual(F, g, p, eps, 0.01);
    for (double lam : {0.1, 1.0, 10.0, 100.0}) {
        double cur = budget_residual(F, g, p, eps, lam);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(ProblemA, HandIntegratedBand) {
    // N=1, x=0.5, g'=2(1-t), lambda=4: F(x) = 2(x-0.5) on [0.5, 1].
    EmpiricalCdf F({0.5});
    auto g = Distortion::dual_power(2);
    auto bands = problem_a_bands(F, g, 2.0, 4.0);
    PiecewiseCdf cdf = assemble_bands(bands, g, SupportMode::unit());
    EXPECT_NEAR(cdf(0.75), 0.5, 1e-12);
    EXPECT_NEAR(drm_value(cdf, g), 5.0 / 6.0, 1e-10);
    EXPECT_NEAR(std::pow(wasserstein_to_empirical(cdf, F, 2.0), 2.0), 1.0 / 12.0, 1e-10);
}

TEST(ProblemA, UnboundedClosedForm) {
    auto g = Distortion::dual_power(2);
    EmpiricalCdf zero({0.0}, SupportMode::unbounded());
    EXPECT_NEAR(solve_a_unbounded_p2(zero, g, std::sqrt(3.0) / 2).value, 1.0, 1e-12);
    EXPECT_NEAR(solve_a_unbounded_p2(zero, g, 0.3).value, 0.6 / std::sqrt(3.0), 1e-12);
    EmpiricalCdf ends({0.0, 1.0}, SupportMode::unbounded());
    auto g3 = Distortion::dual_power(3);
    EXPECT_NEAR(solve_a_unbounded_p2(ends, g3, 0.1).value, drm_value(ends, g3) + 0.1 * std::sqrt(9.0 / 5.0), 1e-12);
    EXPECT_THROW(solve_a_unbounded_p2(zero, Distortion::power(0.5), 0.1), UnboundedError);
}

TEST(ProblemA, OrderOneFlagsStepFamily) {
    auto r = solve_problem_a(EmpiricalCdf({0.2, 0.5, 0.7}), Distortion::dual_power(3), 1.0, 0.1);
    EXPECT_TRUE(r.has(flag_p1_degenerate));
    EXPECT_LE(std::abs(*r.residuals.budget), 1e-6);
}

TEST(ProblemA, ScaledSupport) {
    auto unit = solve_problem_a(EmpiricalCdf({0.2, 0.6}), Distortion::dual_power(2), 2.0, 0.05);
    auto big = solve_problem_a(EmpiricalCdf({2.0, 6.0}, SupportMode::scaled(10)), Distortion::dual_power(2), 2.0, 0.5);
    EXPECT_NEAR(big.value, 10.0 * unit.value, 1e-8);
}

TEST(ProblemA, RejectsBadInput) {
    EmpiricalCdf F({0.5});
    EXPECT_THROW(solve_problem_a(F, Distortion::dual_power(2), 0.5, 0.1), Error);
    EXPECT_THROW(solve_problem_a(F, Distortion::dual_power(2), 2.0, -0.1), Error);
    EXPECT_THROW(solve_problem_a(F, Distortion::identity(), 2.0, 0.1), Error);
}
