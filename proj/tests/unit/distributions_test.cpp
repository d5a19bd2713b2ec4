#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wdrm/distributions.hpp"
#include "wdrm/error.hpp"

using namespace wdrm;

namespace {

PiecewiseCdf uniform01() { return PiecewiseCdf({CdfPiece::linear(0.0, 1.0, 0.0, 1.0)}, std::nullopt); }

}  // namespace

TEST(Empirical, SortsAndValidates) {
    EmpiricalCdf F({0.8, 0.2});
    EXPECT_EQ(F.size(), 2u);
    EXPECT_DOUBLE_EQ(F.samples()[0], 0.2);
    EXPECT_EQ(EmpiricalCdf({0.5}).size(), 1u);
    EXPECT_THROW(EmpiricalCdf({1.2}), Error);
}

TEST(Empirical, EvalAndQuantile) {
    EmpiricalCdf F({0.2, 0.8});
    EXPECT_DOUBLE_EQ(F(0.5), 0.5);
    EXPECT_DOUBLE_EQ(F(0.2), 0.5);
    EXPECT_DOUBLE_EQ(F(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(F.quantile(0.5), 0.2);
    EXPECT_DOUBLE_EQ(F.quantile(0.75), 0.8);
    EXPECT_NEAR(uniform01().quantile(0.3), 0.3, 1e-15);
}

TEST(Drm, ClosedForms) {
    EXPECT_NEAR(drm_value(PiecewiseCdf::point_mass(0.4), Distortion::power(0.3)), 0.4, 1e-12);
    EXPECT_NEAR(drm_value(uniform01(), Distortion::power(0.5)), 2.0 / 3.0, 1e-10);
    EXPECT_NEAR(drm_value(EmpiricalCdf({0.2, 0.8}), Distortion::dual_power(2)), 0.65, 1e-15);
}

TEST(Drm, RoutesAgree) {
    auto g = Distortion::dual_power(3);
    auto F = uniform01();
    EXPECT_NEAR(drm_value(F, g, DrmRoute::x_domain), drm_value(F, g, DrmRoute::quantile), 1e-10);
}

TEST(Moments, Raw) {
    EXPECT_NEAR(moment_raw(uniform01(), 1), 0.5, 1e-12);
    EXPECT_NEAR(moment_raw(uniform01(), 2), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(moment_raw(EmpiricalCdf({0.2, 0.8}).to_piecewise(), 1), 0.5, 1e-12);
    EXPECT_NEAR(moment_raw_x_domain(uniform01(), 3), 0.25, 1e-10);
}

TEST(Wasserstein, Examples) {
    EmpiricalCdf F({0.1, 0.4, 0.9});
    EXPECT_NEAR(wasserstein_to_empirical(F.to_piecewise(), F, 2.0), 0.0, 1e-12);
    EmpiricalCdf ends({0.0, 1.0});
    for (double p : {1.0, 2.0, 3.0}) EXPECT_NEAR(wasserstein_to_empirical(PiecewiseCdf::point_mass(0.5), ends, p), 0.5, 1e-12);
}

TEST(Wasserstein, UniformAgainstTwoPoints) {
    // Trapezoid rule over 1e6 points of |u - Q(u)|^2 for the two-point quantile.
    const int n = 1000000;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        double u = static_cast<double>(k) / n;
        double q = u <= 0.5 ? 0.25 : 0.75;
        double w = (k == 0 || k == n) ? 0.5 : 1.0;
        sum += w * (u - q) * (u - q);
    }
    double reference = std::sqrt(sum / n);
    EXPECT_NEAR(wasserstein_to_empirical(uniform01(), EmpiricalCdf({0.25, 0.75}), 2.0), reference, 1e-6);
}

TEST(Support, ScaledRoundTrip) {
    EmpiricalCdf F({2.0, 8.0}, SupportMode::scaled(10));
    EXPECT_DOUBLE_EQ(F.to_unit().samples()[1], 0.8);
    EXPECT_NEAR(drm_value(F, Distortion::dual_power(2)), 6.5, 1e-12);
    EXPECT_THROW(EmpiricalCdf({11.0}, SupportMode::scaled(10)), Error);
}

TEST(Curve, RoundTrip) {
    auto g = Distortion::dual_power(2);
    std::vector<ConditionalBandCdf> bands;
    StationarityCurve y{2.0, 0.5, 4.0, 0.0, 0.0};
    bands.emplace_back(1, 1, y, g);
    PiecewiseCdf F = assemble_bands(bands, g, SupportMode::unit());
    std::istringstream in(format_curve(F));
    PiecewiseCdf back = parse_curve(in);
    EXPECT_NEAR(drm_value(back, g), drm_value(F, g), 2e-3);
}

TEST(Samples, ParsesComments) {
    std::istringstream in("# header\n0.5\n\n0.25  # trailing\n");
    auto xs = parse_samples(in);
    ASSERT_EQ(xs.size(), 2u);
    EXPECT_DOUBLE_EQ(xs[1], 0.25);
}
