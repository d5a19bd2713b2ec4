#include <gtest/gtest.h>

#include <cmath>

#include "wdrm/error.hpp"
#include "wdrm/oracle.hpp"
#include "wdrm/wball_solver.hpp"

using namespace wdrm;

TEST(Pava, Examples) {
    auto a = pava_project({0.3, 0.2, 1.0});
    EXPECT_NEAR(a[0], 0.25, 1e-15);
    EXPECT_NEAR(a[1], 0.25, 1e-15);
    EXPECT_DOUBLE_EQ(a[2], 1.0);
    auto b = pava_project({0.0, 0.5, 1.0});
    EXPECT_DOUBLE_EQ(b[1], 0.5);
    auto c = pava_project({1.2, -0.1, 1.0});
    EXPECT_NEAR(c[0], 0.55, 1e-15);
    EXPECT_NEAR(c[1], 0.55, 1e-15);
}

TEST(Pava, BruteForceThreeVector) {
    // Exhaustive search over a 0.01 grid of monotone vectors in [0,1] with last entry 1.
    std::vector<double> v{0.9, 0.1, 0.6};
    double best = 1e9, b0 = 0, b1 = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = i; j <= 100; ++j) {
            double x0 = i / 100.0, x1 = j / 100.0;
            double d = (x0 - v[0]) * (x0 - v[0]) + (x1 - v[1]) * (x1 - v[1]);
            if (d < best) best = d, b0 = x0, b1 = x1;
        }
    auto p = pava_project(v);
    EXPECT_NEAR(p[0], b0, 0.01);
    EXPECT_NEAR(p[1], b1, 0.01);
    EXPECT_DOUBLE_EQ(p[2], 1.0);
}

TEST(Oracle, HugeBallPushesMassRight) {
    auto r = oracle_solve(EmpiricalCdf({0.25, 0.75}), Distortion::dual_power(2), 2.0, 1e3);
    EXPECT_GE(r.value, 1.0 - 1.0 / 800);
}

TEST(Oracle, UniformMomentTarget) {
    OracleConstraints c{0.5, 1.0 / 3.0};
    auto r = oracle_solve(EmpiricalCdf({0.25, 0.75}), Distortion::dual_power(2), 2.0, 1e3, c);
    EXPECT_NEAR(r.value, 2.0 / 3.0, 5e-3);
}

TEST(Oracle, GroundTruthInstance) {
    auto g = Distortion::dual_power(2);
    EmpiricalCdf F({0.25, 0.75});
    auto r = oracle_solve(F, g, 2.0, 0.2);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 0.8506998481, 1e-7);
    EXPECT_LE(r.constraint_violation, 1e-8);
    auto report = solve_problem_a(F, g, 2.0, 0.2);
    EXPECT_LE(std::abs(oracle_gap(report, r)), 5e-3);
}

TEST(Oracle, GapShrinksWithGrid) {
    auto g = Distortion::dual_power(2);
    EmpiricalCdf F({0.25, 0.75});
    auto report = solve_problem_a(F, g, 2.0, 0.2);
    double coarse = std::abs(oracle_gap(report, oracle_solve(F, g, 2.0, 0.2, {}, OracleOptions{200})));
    double fine = std::abs(oracle_gap(report, oracle_solve(F, g, 2.0, 0.2, {}, OracleOptions{800})));
    EXPECT_LT(fine, coarse);
}

TEST(Oracle, DegeneratePointMass) {
    auto g = Distortion::dual_power(3);
    EmpiricalCdf F({1.0});
    auto report = solve_problem_a(F, g, 2.0, 0.05);
    EXPECT_LE(std::abs(oracle_gap(report, oracle_solve(F, g, 2.0, 0.05))), 1.0 / 800);
}

TEST(Oracle, EmptyConstraintSet) {
    OracleConstraints c{0.55, 0.35};
    EXPECT_THROW(oracle_solve(EmpiricalCdf({0.25, 0.75}), Distortion::dual_power(3), 2.0, 0.05, c), InfeasibleError);
}

TEST(Oracle, RejectsUnboundedSupport) {
    EXPECT_THROW(oracle_solve(EmpiricalCdf({0.5}, SupportMode::unbounded()), Distortion::dual_power(2), 2.0, 0.1),
                 Error);
}
