#include "wdrm/distortion.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "wdrm/error.hpp"

namespace wdrm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double t, const char* what) {
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream msg;
        msg << what << ": argument " << t << " outside [0,1]";
        throw DomainError(msg.str());
    }
}

double parse_number(std::string_view text, std::string_view full) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw InvalidArgument("bad distortion shape in '" + std::string(full) + "'");
    }
    return v;
}

}  // namespace

Distortion Distortion::power(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("power distortion needs 0 < alpha < 1");
    }
    return Distortion(DistortionFamily::power, alpha);
}

Distortion Distortion::dual_power(double beta) {
    if (!(beta > 1.0) || !std::isfinite(beta)) {
        throw InvalidArgument("dual power distortion needs beta > 1");
    }
    return Distortion(DistortionFamily::dual_power, beta);
}

Distortion Distortion::identity() { return Distortion(DistortionFamily::identity, 1.0); }

Distortion Distortion::parse(std::string_view text) {
    if (text == "identity") return identity();
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InvalidArgument("unknown distortion '" + std::string(text) + "'");
    }
    auto name = text.substr(0, colon);
    double shape = parse_number(text.substr(colon + 1), text);
    if (name == "power") return power(shape);
    if (name == "dual" || name == "dual_power") return dual_power(shape);
    throw InvalidArgument("unknown distortion family '" + std::string(name) + "'");
}

double Distortion::value(double t) const {
    check_unit(t, "g");
    switch (family_) {
    case DistortionFamily::power: return std::pow(t, shape_);
    case DistortionFamily::dual_power: return 1.0 - std::pow(1.0 - t, shape_);
    case DistortionFamily::identity: return t;
    }
    return t;
}

double Distortion::derivative(double t) const {
    check_unit(t, "g'");
    switch (family_) {
    case DistortionFamily::power: return t == 0.0 ? kInf : shape_ * std::pow(t, shape_ - 1.0);
    case DistortionFamily::dual_power: return shape_ * std::pow(1.0 - t, shape_ - 1.0);
    case DistortionFamily::identity: return 1.0;
    }
    return 1.0;
}

double Distortion::second_derivative(double t) const {
    check_unit(t, "g''");
    switch (family_) {
    case DistortionFamily::power:
        return t == 0.0 ? -kInf : shape_ * (shape_ - 1.0) * std::pow(t, shape_ - 2.0);
    case DistortionFamily::dual_power:
        if (t == 1.0 && shape_ < 2.0) return -kInf;
        return -shape_ * (shape_ - 1.0) * std::pow(1.0 - t, shape_ - 2.0);
    case DistortionFamily::identity: return 0.0;
    }
    return 0.0;
}

double Distortion::derivative_inverse(double y) const {
    if (std::isnan(y)) throw DomainError("(g')^{-1}: NaN argument");
    switch (family_) {
    case DistortionFamily::power: {
        if (y <= shape_) return 1.0;
        if (y == kInf) return 0.0;
        double t = std::pow(y / shape_, 1.0 / (shape_ - 1.0));
        return t > 1.0 ? 1.0 : t;
    }
    case DistortionFamily::dual_power: {
        if (y <= 0.0) return 1.0;
        if (y >= shape_) return 0.0;
        double t = 1.0 - std::pow(y / shape_, 1.0 / (shape_ - 1.0));
        return t < 0.0 ? 0.0 : t;
    }
    case DistortionFamily::identity:
        // g' is constant; every t attains y = 1, pick the clamp branch.
        return y < 1.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

double Distortion::phi(double y) const { return 1.0 - value(1.0 - y); }

double Distortion::phi_derivative(double y) const { return derivative(1.0 - y); }

double Distortion::derivative_square_integral() const {
    switch (family_) {
    case DistortionFamily::power:
        return shape_ > 0.5 ? shape_ * shape_ / (2.0 * shape_ - 1.0) : kInf;
    case DistortionFamily::dual_power: return shape_ * shape_ / (2.0 * shape_ - 1.0);
    case DistortionFamily::identity: return 1.0;
    }
    return kInf;
}

std::string Distortion::to_string() const {
    std::ostringstream out;
    out.precision(17);
    switch (family_) {
    case DistortionFamily::power: out << "power:" << shape_; break;
    case DistortionFamily::dual_power: out << "dual:" << shape_; break;
    case DistortionFamily::identity: out << "identity"; break;
    }
    return out.str();
}

std::optional<std::string> validate(const Distortion& g) {
    constexpr double tol = 1e-12;
    if (std::abs(g.value(0.0)) > tol) return "g(0) != 0";
    if (std::abs(g.value(1.0) - 1.0) > tol) return "g(1) != 1";
    const int n = 256;
    double prev_g = 0.0;
    double prev_d = kInf;
    for (int k = 1; k <= n; ++k) {
        double t = static_cast<double>(k) / n;
        double gt = g.value(t);
        if (gt < prev_g - tol) return "g is not nondecreasing";
        double d = g.derivative(t);
        if (d > prev_d + tol) return "g' is not nonincreasing";
        // Chord test for concavity on the sampling grid.
        if (k < n) {
            double mid = g.value(t - 0.5 / n);
            if (mid < 0.5 * (prev_g + gt) - tol) return "g is not concave";
        }
        prev_g = gt;
        prev_d = d;
    }
    if (g.is_strict()) {
        for (int k = 1; k < n; ++k) {
            double t = static_cast<double>(k) / n;
            double back = g.derivative_inverse(g.derivative(t));
            if (std::abs(back - t) > 1e-9) return "(g')^{-1} does not invert g'";
        }
    }
    return std::nullopt;
}

}  // namespace wdrm
