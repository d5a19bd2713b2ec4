#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace wdrm {

enum class DistortionFamily { power, dual_power, identity };

// Concave distortion g on [0,1] with g(0)=0, g(1)=1.
//   power:      g(t) = t^a,            0 < a < 1
//   dual_power: g(t) = 1 - (1-t)^b,    b > 1
//   identity:   g(t) = t  (not strictly concave; test use only)
class Distortion {
public:
    static Distortion power(double alpha);
    static Distortion dual_power(double beta);
    static Distortion identity();
    // "power:<a>", "dual:<b>" or "identity"
    static Distortion parse(std::string_view text);

    DistortionFamily family() const noexcept { return family_; }
    double shape() const noexcept { return shape_; }
    bool is_strict() const noexcept { return family_ != DistortionFamily::identity; }

    double value(double t) const;
    // g'(t); +inf at t = 0 for the power family.
    double derivative(double t) const;
    double second_derivative(double t) const;
    // (g')^{-1}(y), clamped: 1 for y <= g'(1), 0 for y >= g'(0).
    double derivative_inverse(double y) const;

    double derivative_at_zero() const { return derivative(0.0); }
    double derivative_at_one() const { return derivative(1.0); }

    // phi(y) = 1 - g(1-y), convex with phi'(y) = g'(1-y).
    double phi(double y) const;
    double phi_derivative(double y) const;

    // Closed form of the integral of g'(u)^2 over [0,1]; +inf when it diverges.
    double derivative_square_integral() const;

    std::string to_string() const;

private:
    Distortion(DistortionFamily family, double shape) : family_(family), shape_(shape) {}

    DistortionFamily family_;
    double shape_;
};

// Empty when the axioms hold, otherwise a description of the first violation.
std::optional<std::string> validate(const Distortion& g);

}  // namespace wdrm
