#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "wdrm/error.hpp"
#include "wdrm/moment_solver.hpp"
#include "wdrm/roots.hpp"

namespace wdrm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pool {
    double lo;
    double hi;
    double level;
};

// Pools the single decreasing stretch (d_lo, d_hi) of y, with y increasing on
// [a_lo, d_lo] and on [d_hi, b_hi]. The flat [A, B] at level m satisfies
// y(A) = y(B) = m at interior endpoints and integral_A^B (y - m) = 0.
Pool pool_bump(const StationarityCurve& y, double a_lo, double d_lo, double d_hi, double b_hi) {
    if (d_lo <= 0.0 && d_hi >= 1.0) {
        return {0.0, 1.0, y.primitive(1.0) - y.primitive(0.0)};
    }
    auto left = [&](double m) {
        if (d_lo <= a_lo || y(a_lo) >= m) return a_lo;
        return y.solve(m, a_lo, d_lo);
    };
    auto right = [&](double m) {
        if (d_hi >= b_hi || y(b_hi) <= m) return b_hi;
        return y.solve(m, d_hi, b_hi);
    };
    auto G = [&](double m) {
        double A = left(m), B = right(m);
        return y.primitive(B) - y.primitive(A) - m * (B - A);
    };
    double m_lo = y(std::min(d_hi, b_hi));
    double m_hi = y(std::max(d_lo, a_lo));
    if (!(m_hi > m_lo)) return {d_lo, d_hi, m_lo};
    double g_lo = G(m_lo), g_hi = G(m_hi);
    double m;
    if (g_lo <= 0.0) {
        m = m_lo;
    } else if (g_hi >= 0.0) {
        m = m_hi;
    } else {
        m = roots::solve_bracketed(G, {m_lo, m_hi, g_lo, g_hi}, 0.0, 1e-15);
    }
    return {left(m), right(m), m};
}

// Pool-adjacent-violators on equally weighted values; returns [first, last] index blocks.
std::vector<std::pair<std::size_t, std::size_t>> pava_blocks(const std::vector<double>& v) {
    struct Block {
        double sum;
        std::size_t first, last;
        double mean() const { return sum / static_cast<double>(last - first + 1); }
    };
    std::vector<Block> stack;
    for (std::size_t k = 0; k < v.size(); ++k) {
        stack.push_back({v[k], k, k});
        while (stack.size() > 1 && stack[stack.size() - 2].mean() > stack.back().mean()) {
            Block top = stack.back();
            stack.pop_back();
            stack.back().sum += top.sum;
            stack.back().last = top.last;
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& b : stack) out.emplace_back(b.first, b.last);
    return out;
}

std::vector<ConditionalBandCdf::Flat> grid_flats(const StationarityCurve& y, std::size_t m) {
    std::vector<double> xs(m), vs(m);
    for (std::size_t k = 0; k < m; ++k) {
        xs[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
        vs[k] = y(xs[k]);
    }
    auto blocks = pava_blocks(vs);
    std::vector<ConditionalBandCdf::Flat> flats;
    const double h = 1.0 / static_cast<double>(m);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto [k0, k1] = blocks[b];
        if (k1 == k0) continue;
        auto peak = std::max_element(vs.begin() + static_cast<long>(k0), vs.begin() + static_cast<long>(k1) + 1);
        auto trough = std::min_element(peak, vs.begin() + static_cast<long>(k1) + 1);
        if (*peak <= *trough) continue;
        // Sharpen the grid extrema with a bracketed 1-D minimiser.
        auto refine = [&](double centre, double sign) {
            double lo = std::max(0.0, centre - h), hi = std::min(1.0, centre + h);
            auto r = boost::math::tools::brent_find_minima([&](double x) { return sign * y(x); }, lo, hi, 52);
            return r.first;
        };
        double d_lo = refine(xs[static_cast<std::size_t>(peak - vs.begin())], -1.0);
        double d_hi = refine(xs[static_cast<std::size_t>(trough - vs.begin())], 1.0);
        if (k0 == 0 && d_lo < 1.5 * h && y(0.0) >= y(d_lo)) d_lo = 0.0;
        if (k1 + 1 == m && d_hi > 1.0 - 1.5 * h && y(1.0) <= y(d_hi)) d_hi = 1.0;
        double a_lo = b == 0 ? 0.0 : static_cast<double>(blocks[b - 1].second + 1) * h;
        double b_hi = b + 1 == blocks.size() ? 1.0 : static_cast<double>(blocks[b + 1].first) * h;
        Pool pool = pool_bump(y, a_lo, d_lo, d_hi, b_hi);
        flats.push_back({pool.lo, pool.hi, pool.level});
    }
    return flats;
}

}  // namespace

std::optional<std::pair<double, double>> BandCandidate::decreasing_interval() const {
    const double p = curve.order;
    const double lam = curve.lambda;
    const double ep = curve.etap;
    const double a = curve.anchor;
    if (!(ep > 0.0) || p <= 1.0) return std::nullopt;
    if (lam == 0.0 || (p == 2.0 && lam < ep)) return std::make_pair(0.0, 1.0);
    if (p == 2.0) return std::nullopt;
    double lo = 0.0, hi = 1.0;
    if (p > 2.0) {
        // y' < 0  <=>  r |x - a| < x  with r = (lambda/etap)^{1/(p-2)}.
        double r = std::pow(lam / ep, 1.0 / (p - 2.0));
        if (a <= 0.0) {
            if (r < 1.0) return std::make_pair(0.0, 1.0);
            return std::nullopt;
        }
        lo = r * a / (1.0 + r);
        hi = r > 1.0 ? r * a / (r - 1.0) : kInf;
    } else {
        // 1 < p < 2: decreasing where x < r |x - a|, r = (etap/lambda)^{1/(2-p)};
        // report the hull of the (at most two) stretches.
        double r = std::pow(ep / lam, 1.0 / (2.0 - p));
        double first = a > 0.0 ? r * a / (1.0 + r) : 0.0;
        double second = r > 1.0 ? r * a / (r - 1.0) : kInf;
        if (first > 0.0) {
            lo = 0.0;
            hi = second < 1.0 ? 1.0 : first;
        } else if (second < 1.0) {
            lo = second;
            hi = 1.0;
        } else {
            return std::nullopt;
        }
    }
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (hi > lo) return std::make_pair(lo, hi);
    return std::nullopt;
}

ConditionalBandCdf monotone_rectify(const BandCandidate& c, const Distortion& g, RectifyMethod method,
                                    std::size_t grid_points) {
    auto interval = c.decreasing_interval();
    if (!interval) return ConditionalBandCdf(c.index, c.count, c.curve, g);
    std::vector<ConditionalBandCdf::Flat> flats;
    bool analytic = method == RectifyMethod::analytic && c.curve.order >= 2.0;
    if (analytic) {
        Pool pool = pool_bump(c.curve, 0.0, interval->first, interval->second, 1.0);
        flats.push_back({pool.lo, pool.hi, pool.level});
    } else {
        if (grid_points < 16) throw InvalidArgument("rectification grid too coarse");
        flats = grid_flats(c.curve, grid_points);
    }
    return ConditionalBandCdf(c.index, c.count, c.curve, g, std::move(flats));
}

}  // namespace wdrm
