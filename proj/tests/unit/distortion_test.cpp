#include <gtest/gtest.h>

#include <cmath>

#include "wdrm/distortion.hpp"
#include "wdrm/error.hpp"

using wdrm::Distortion;

TEST(Distortion, Values) {
    EXPECT_DOUBLE_EQ(Distortion::power(0.5).value(0.25), 0.5);
    EXPECT_DOUBLE_EQ(Distortion::dual_power(2).value(0.5), 0.75);
    EXPECT_DOUBLE_EQ(Distortion::identity().value(0.3), 0.3);
}

TEST(Distortion, Derivatives) {
    EXPECT_DOUBLE_EQ(Distortion::dual_power(2).derivative(0.0), 2.0);
    EXPECT_DOUBLE_EQ(Distortion::dual_power(2).derivative(1.0), 0.0);
    EXPECT_DOUBLE_EQ(Distortion::power(0.5).derivative(1.0), 0.5);
    EXPECT_TRUE(std::isinf(Distortion::power(0.5).derivative(0.0)));
}

TEST(Distortion, DerivativeInverseClamps) {
    auto d = Distortion::dual_power(2);
    EXPECT_DOUBLE_EQ(d.derivative_inverse(2.0), 0.0);
    EXPECT_DOUBLE_EQ(d.derivative_inverse(0.0), 1.0);
    EXPECT_DOUBLE_EQ(Distortion::power(0.5).derivative_inverse(0.5), 1.0);
}

TEST(Distortion, DerivativeInverseRoundTrip) {
    for (auto d : {Distortion::power(0.3), Distortion::dual_power(3.5)})
        for (double t : {0.05, 0.3, 0.7, 0.95}) EXPECT_NEAR(d.derivative_inverse(d.derivative(t)), t, 1e-12);
}

TEST(Distortion, Phi) {
    EXPECT_DOUBLE_EQ(Distortion::dual_power(2).phi(0.5), 0.25);
    EXPECT_DOUBLE_EQ(Distortion::identity().phi(0.7), 0.7);
    EXPECT_DOUBLE_EQ(Distortion::power(0.5).phi(0.0), 0.0);
    auto d = Distortion::dual_power(3);
    EXPECT_NEAR(d.phi_derivative(0.4), d.derivative(0.6), 1e-15);
}

TEST(Distortion, Validate) {
    EXPECT_FALSE(wdrm::validate(Distortion::power(0.5)).has_value());
    EXPECT_THROW(Distortion::power(1.5), wdrm::Error);
    EXPECT_THROW(Distortion::dual_power(0.5), wdrm::Error);
}

TEST(Distortion, Parse) {
    EXPECT_EQ(Distortion::parse("dual:3").family(), wdrm::DistortionFamily::dual_power);
    EXPECT_DOUBLE_EQ(Distortion::parse("power:0.2").shape(), 0.2);
    EXPECT_FALSE(Distortion::parse("identity").is_strict());
    EXPECT_THROW(Distortion::parse("cubic:2"), wdrm::Error);
}

TEST(Distortion, DerivativeSquareIntegral) {
    EXPECT_NEAR(Distortion::dual_power(2).derivative_square_integral(), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(Distortion::dual_power(3).derivative_square_integral(), 9.0 / 5.0, 1e-15);
    EXPECT_TRUE(std::isinf(Distortion::power(0.5).derivative_square_integral()));
}
