#pragma once

#include <cmath>

#include "wdrm/distributions.hpp"
#include "wdrm/quadrature.hpp"

namespace wdrm::detail {

// Integrals of one band F^i over [0,1] against the weights appearing in the
// moment and budget constraints: 1, x^{p-1} and s(x - x_i).
struct BandIntegrals {
    double plain = 0.0;
    double power = 0.0;
    double budget = 0.0;
};

BandIntegrals integrate_band(const ConditionalBandCdf& band, double p, double tol, bool need_moments);

}  // namespace wdrm::detail
