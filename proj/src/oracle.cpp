#include "wdrm/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/toms748_solve.hpp>

#include "wdrm/error.hpp"

namespace wdrm {

namespace {

// Largest CDF level at which phi' is evaluated: the power family has
// phi'(1) = g'(0) = +infinity.
constexpr double kLevelCap = 1.0 - 1e-12;

struct Block {
    std::size_t first;
    std::size_t last;
    double value;  // pooled mean, before clamping
};

// PAVA on equally weighted entries; blocks cover the whole vector.
void pava_blocks(const double* v, std::size_t n, std::vector<Block>& out) {
    out.clear();
    std::vector<double> sums;
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back({k, k, v[k]});
        sums.push_back(v[k]);
        while (out.size() > 1 && out[out.size() - 2].value > out.back().value) {
            Block top = out.back();
            double s = sums.back();
            out.pop_back();
            sums.pop_back();
            sums.back() += s;
            out.back().last = top.last;
            out.back().value = sums.back() / static_cast<double>(out.back().last - out.back().first + 1);
        }
    }
}

// Convex C^1 extension of phi beyond [0, kLevelCap] so that extrapolated
// iterates outside the box still have a finite objective and gradient.
struct Phi {
    const Distortion& g;
    double value(double y) const {
        if (y < 0.0) return g.phi(0.0) + g.phi_derivative(0.0) * y;
        if (y > kLevelCap) return g.phi(kLevelCap) + g.phi_derivative(kLevelCap) * (y - kLevelCap);
        return g.phi(y);
    }
    double derivative(double y) const { return g.phi_derivative(std::clamp(y, 0.0, kLevelCap)); }
};

// Euclidean projection onto {rows nondecreasing in [0,1]} intersected with up
// to three linear constraints, one of which (the budget) may be an inequality.
// The dual in the multipliers is maximised by semismooth Newton.
class Projector {
public:
    struct Constraint {
        std::vector<double> a;  // N*M coefficients, normalised to unit length
        double rhs;
        bool inequality;        // a.F <= rhs
    };

    Projector(std::size_t rows, std::size_t cols, std::vector<Constraint> cons)
        : rows_(rows), cols_(cols), cons_(std::move(cons)), mu_(cons_.size(), 0.0) {}

    // Projects v into out; returns the largest constraint violation left.
    double project(const std::vector<double>& v, std::vector<double>& out) {
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < cons_.size(); ++k) {
            if (!cons_[k].inequality) active.push_back(k);
        }
        double viol = solve_active(v, active, out);
        for (std::size_t k = 0; k < cons_.size(); ++k) {
            if (!cons_[k].inequality) continue;
            if (dot(k, out) - cons_[k].rhs > 1e-13) {
                active.push_back(k);
                viol = solve_active(v, active, out);
                if (mu_[k] < 0.0) mu_[k] = 0.0;
            } else {
                mu_[k] = 0.0;
            }
        }
        return viol;
    }

    double dot(std::size_t k, const std::vector<double>& f) const {
        return std::inner_product(f.begin(), f.end(), cons_[k].a.begin(), 0.0);
    }

    std::size_t size() const { return cons_.size(); }
    const Constraint& constraint(std::size_t k) const { return cons_[k]; }

private:
    // Box-isotonic projection of v - sum mu_k a_k, row by row.
    void primal(const std::vector<double>& v, const std::vector<std::size_t>& active, std::vector<double>& out) {
        out = v;
        for (std::size_t k : active) {
            const auto& a = cons_[k].a;
            for (std::size_t j = 0; j < out.size(); ++j) out[j] -= mu_[k] * a[j];
        }
        blocks_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            double* row = out.data() + i * cols_;
            pava_blocks(row, cols_, blocks_[i]);
            for (const Block& b : blocks_[i]) {
                double level = std::clamp(b.value, 0.0, 1.0);
                for (std::size_t j = b.first; j <= b.last; ++j) row[j] = level;
            }
        }
    }

    // Generalised Jacobian a_k^T P a_l of the primal map; P averages over
    // unclamped pools and vanishes on clamped ones.
    double hessian(std::size_t k, std::size_t l) const {
        const auto& a = cons_[k].a;
        const auto& b = cons_[l].a;
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::size_t off = i * cols_;
            for (const Block& blk : blocks_[i]) {
                if (blk.value <= 0.0 || blk.value >= 1.0) continue;
                double sa = 0.0, sb = 0.0;
                for (std::size_t j = blk.first; j <= blk.last; ++j) {
                    sa += a[off + j];
                    sb += b[off + j];
                }
                s += sa * sb / static_cast<double>(blk.last - blk.first + 1);
            }
        }
        return s;
    }

    double solve_active(const std::vector<double>& v, const std::vector<std::size_t>& active,
                        std::vector<double>& out) {
        primal(v, active, out);
        const std::size_t n = active.size();
        if (n == 0) return 0.0;
        std::array<double, 3> r{};
        auto residuals = [&](const std::vector<double>& f) {
            double m = 0.0;
            for (std::size_t q = 0; q < n; ++q) {
                r[q] = dot(active[q], f) - cons_[active[q]].rhs;
                m = std::max(m, std::abs(r[q]));
            }
            return m;
        };
        double viol = residuals(out);
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        const double step_cap = 4.0 * (1.0 + vmax) * std::sqrt(static_cast<double>(v.size()));
        std::vector<double> trial;
        // Stop at the rounding floor, or once progress stalls well below the
        // reporting threshold.
        double best = viol;
        int stalled = 0;
        for (int it = 0; it < 200 && viol > 1e-13 && !(stalled >= 3 && viol <= 1e-10); ++it) {
            std::array<std::array<double, 3>, 3> H{};
            double trace = 0.0;
            for (std::size_t q = 0; q < n; ++q) {
                for (std::size_t s = 0; s <= q; ++s) H[q][s] = H[s][q] = hessian(active[q], active[s]);
                trace += H[q][q];
            }
            for (std::size_t q = 0; q < n; ++q) H[q][q] += 1e-9 * trace + 1e-14;
            std::array<double, 3> d{};
            if (!solve_small(H, r, n, d)) {
                for (std::size_t q = 0; q < n; ++q) d[q] = r[q];
            }
            // A flat model (every pool clamped) gives unbounded steps; beyond
            // step_cap every entry would clamp anyway.
            double dmax = 0.0;
            for (std::size_t q = 0; q < n; ++q) dmax = std::max(dmax, std::abs(d[q]));
            if (dmax > step_cap) {
                for (std::size_t q = 0; q < n; ++q) d[q] *= step_cap / dmax;
            }
            // Newton with a residual-norm merit; at a kink where the merit
            // cannot descend, fall back to one sweep of exact coordinate ascent.
            std::array<double, 3> mu0{};
            for (std::size_t q = 0; q < n; ++q) mu0[q] = mu_[active[q]];
            double t = 1.0;
            bool accepted = false;
            for (int half = 0; half < 14; ++half, t *= 0.5) {
                for (std::size_t q = 0; q < n; ++q) mu_[active[q]] = mu0[q] + t * d[q];
                primal(v, active, trial);
                double m = 0.0;
                for (std::size_t q = 0; q < n; ++q) {
                    m = std::max(m, std::abs(dot(active[q], trial) - cons_[active[q]].rhs));
                }
                if (m < (1.0 - 1e-4 * t) * viol) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                for (std::size_t q = 0; q < n; ++q) mu_[active[q]] = mu0[q];
                for (std::size_t q = 0; q < n; ++q) coordinate_root(v, active, active[q], step_cap);
                primal(v, active, trial);
            }
            out.swap(trial);
            viol = residuals(out);
            stalled = viol < 0.5 * best ? 0 : stalled + 1;
            best = std::min(best, viol);
            for (std::size_t q = 0; q < n; ++q) {
                if (!std::isfinite(mu_[active[q]]) || std::abs(mu_[active[q]]) > 1e8 * step_cap) {
                    throw InfeasibleError("oracle constraint set is empty");
                }
            }
        }
        return viol;
    }

    // Zeroes residual k along mu_k alone; the residual is nonincreasing in mu_k.
    void coordinate_root(const std::vector<double>& v, const std::vector<std::size_t>& active, std::size_t k,
                         double scale) {
        std::vector<double> f;
        auto res = [&](double m) {
            mu_[k] = m;
            primal(v, active, f);
            return dot(k, f) - cons_[k].rhs;
        };
        const double m0 = mu_[k];
        double r0 = res(m0);
        if (r0 == 0.0) return;
        double step = std::max(1e-3, std::abs(r0));
        double lo = m0, hi = m0, r_lo = r0, r_hi = r0;
        for (int k2 = 0; k2 < 200; ++k2, step *= 2.0) {
            if (r0 > 0.0) {
                lo = hi;
                r_lo = r_hi;
                hi = m0 + step;
                r_hi = res(hi);
                if (r_hi <= 0.0) break;
            } else {
                hi = lo;
                r_hi = r_lo;
                lo = m0 - step;
                r_lo = res(lo);
                if (r_lo >= 0.0) break;
            }
            if (step > 1e8 * scale) throw InfeasibleError("oracle constraint set is empty");
        }
        if (r_lo == 0.0 || r_hi == 0.0) {
            mu_[k] = r_lo == 0.0 ? lo : hi;
            return;
        }
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * (1.0 + std::abs(a)); };
        std::uintmax_t iters = 200;
        auto root = boost::math::tools::toms748_solve([&](double m) { return -res(m); }, lo, hi, -r_lo, -r_hi,
                                                      tol, iters);
        double a = root.first, b = root.second;
        mu_[k] = std::abs(res(a)) <= std::abs(res(b)) ? a : b;
    }

    static bool solve_small(std::array<std::array<double, 3>, 3> H, std::array<double, 3> r, std::size_t n,
                            std::array<double, 3>& x) {
        // Gaussian elimination with partial pivoting on at most 3 unknowns.
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            for (std::size_t q = c + 1; q < n; ++q) {
                if (std::abs(H[q][c]) > std::abs(H[piv][c])) piv = q;
            }
            if (!(std::abs(H[piv][c]) > 0.0)) return false;
            std::swap(H[piv], H[c]);
            std::swap(r[piv], r[c]);
            for (std::size_t q = c + 1; q < n; ++q) {
                double f = H[q][c] / H[c][c];
                for (std::size_t s = c; s < n; ++s) H[q][s] -= f * H[c][s];
                r[q] -= f * r[c];
            }
        }
        for (std::size_t c = n; c-- > 0;) {
            double s = r[c];
            for (std::size_t q = c + 1; q < n; ++q) s -= H[c][q] * x[q];
            x[c] = s / H[c][c];
        }
        return true;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<Constraint> cons_;
    std::vector<double> mu_;
    std::vector<std::vector<Block>> blocks_;
};

Projector::Constraint normalised(std::vector<double> a, double rhs, bool inequality) {
    double norm = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
    if (!(norm > 0.0)) throw Error(ErrorCode::internal, "zero constraint row in the oracle");
    for (double& x : a) x /= norm;
    return {std::move(a), rhs / norm, inequality};
}

}  // namespace

std::vector<double> pava_project(std::vector<double> v, double lower, double upper, std::optional<double> terminal) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument("pava_project needs finite entries");
    }
    if (!(lower <= upper)) throw InvalidArgument("pava_project needs lower <= upper");
    std::vector<Block> blocks;
    pava_blocks(v.data(), v.size(), blocks);
    for (const Block& b : blocks) {
        double level = std::clamp(b.value, lower, upper);
        for (std::size_t j = b.first; j <= b.last; ++j) v[j] = level;
    }
    if (terminal && !v.empty()) v.back() = *terminal;
    return v;
}

OracleResult oracle_solve(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps,
                          const OracleConstraints& constraints, const OracleOptions& options) {
    if (!Fhat.support().bounded()) throw InvalidArgument("oracle needs a bounded support");
    if (Fhat.size() > 8) throw InvalidArgument("oracle is limited to N <= 8 samples");
    if (options.grid < 2 || options.grid > 4096) throw InvalidArgument("oracle grid must lie in [2, 4096]");
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("order p must be a finite number >= 1");
    if (!(eps > 0.0)) throw InvalidArgument("radius must be positive");
    if (constraints.cp && !constraints.c1) throw InvalidArgument("a p-th moment constraint needs a mean constraint");

    const double scale = Fhat.support().scale;
    const EmpiricalCdf unit = Fhat.to_unit();
    const std::size_t N = unit.size();
    const std::size_t M = options.grid;
    const double h = 1.0 / static_cast<double>(M);
    const double n = static_cast<double>(N);
    auto grid = [&](std::size_t j) { return static_cast<double>(j) * h; };

    // F^i is constant on [x_j, x_{j+1}), j = 0..M-1, and equals 1 from x = 1 on,
    // so every functional below is an exact cell sum.
    std::vector<Projector::Constraint> cons;
    if (std::isfinite(eps)) {
        std::vector<double> a(N * M);
        double tail = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double xi = unit.samples()[i];
            tail += std::pow(1.0 - xi, p) / n;
            auto S = [&](double x) { return std::pow(std::abs(x - xi), p) / p; };
            for (std::size_t j = 0; j < M; ++j) a[i * M + j] = -(S(grid(j + 1)) - S(grid(j))) / n;
        }
        const double e = eps / scale;
        cons.push_back(normalised(std::move(a), (std::pow(e, p) - tail) / p, true));
    }
    if (constraints.c1) {
        // mean = 1 - integral of F.
        std::vector<double> a(N * M, h / n);
        cons.push_back(normalised(std::move(a), 1.0 - *constraints.c1 / scale, false));
    }
    if (constraints.cp) {
        // E X^p = 1 - integral of p x^{p-1} F.
        std::vector<double> a(N * M);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < M; ++j) {
                a[i * M + j] = (std::pow(grid(j + 1), p) - std::pow(grid(j), p)) / n;
            }
        }
        cons.push_back(normalised(std::move(a), 1.0 - *constraints.cp / std::pow(scale, p), false));
    }
    Projector proj(N, M, std::move(cons));

    const Phi phi{g};
    std::vector<double> avg(M);
    auto average = [&](const std::vector<double>& F) {
        for (std::size_t j = 0; j < M; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < N; ++i) s += F[i * M + j];
            avg[j] = s / n;
        }
    };
    auto objective = [&](const std::vector<double>& F) {
        average(F);
        double s = 0.0;
        for (double y : avg) s += phi.value(y);
        return s * h;
    };
    auto gradient = [&](const std::vector<double>& F, std::vector<double>& grad) {
        average(F);
        grad.resize(N * M);
        for (std::size_t j = 0; j < M; ++j) {
            double d = phi.derivative(avg[j]) * h / n;
            for (std::size_t i = 0; i < N; ++i) grad[i * M + j] = d;
        }
    };

    // Start from the empirical rows (zero transport cost), projected.
    std::vector<double> start(N * M);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < M; ++j) start[i * M + j] = grid(j) >= unit.samples()[i] ? 1.0 : 0.0;
    }
    std::vector<double> x, x_prev, y, grad, trial, diff;
    double viol = proj.project(start, x);
    if (viol > 1e-8) throw InfeasibleError("oracle constraint set is empty");
    x_prev = x;
    double fx = objective(x);

    OracleResult result;
    double L = 1.0;
    double t = 1.0;
    int calm = 0;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        y.resize(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + beta * (x[k] - x_prev[k]);
        const double fy = objective(y);
        gradient(y, grad);
        L *= 0.8;
        double f_trial = 0.0;
        for (int bt = 0; bt < 80; ++bt) {
            diff.resize(y.size());
            for (std::size_t k = 0; k < y.size(); ++k) diff[k] = y[k] - grad[k] / L;
            viol = proj.project(diff, trial);
            f_trial = objective(trial);
            double lin = 0.0, sq = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) {
                double dk = trial[k] - y[k];
                lin += grad[k] * dk;
                sq += dk * dk;
            }
            if (f_trial <= fy + lin + 0.5 * L * sq + 1e-15 * std::abs(fy)) break;
            L *= 2.0;
        }
        if (f_trial > fx) {
            // Function-value restart keeps the sequence monotone. A plain
            // projected-gradient step that cannot descend means the iterate is
            // optimal to rounding.
            if (t == 1.0) {
                result.converged = viol <= 1e-8;
                ++it;
                break;
            }
            t = 1.0;
            x_prev = x;
            continue;
        }
        const double change = fx - f_trial;
        x_prev.swap(x);
        x.swap(trial);
        fx = f_trial;
        t = t_next;
        calm = change <= options.tolerance * std::max(1.0, std::abs(fx)) ? calm + 1 : 0;
        if (calm >= 25) {
            result.converged = true;
            ++it;
            break;
        }
    }

    average(x);
    std::vector<CdfPiece> pieces;
    for (std::size_t j = 0; j < M; ++j) pieces.push_back(CdfPiece::flat(grid(j), grid(j + 1), avg[j]));
    result.grid_cdf = avg;
    result.cdf = PiecewiseCdf(std::move(pieces), std::nullopt, Fhat.support());
    result.objective = fx;
    result.iterations = it;
    result.constraint_violation = 0.0;
    for (std::size_t k = 0; k < proj.size(); ++k) {
        double r = proj.dot(k, x) - proj.constraint(k).rhs;
        if (proj.constraint(k).inequality) r = std::max(r, 0.0);
        result.constraint_violation = std::max(result.constraint_violation, std::abs(r));
    }
    result.value = drm_value(result.cdf, g);
    result.budget_used = wasserstein_to_empirical(result.cdf, Fhat, p);
    if (std::isfinite(eps)) result.residuals.budget = result.budget_used - eps;
    if (constraints.c1) result.residuals.mean = moment_raw(result.cdf, 1.0) - *constraints.c1;
    if (constraints.cp) result.residuals.pmoment = moment_raw(result.cdf, p) - *constraints.cp;
    return result;
}

double oracle_gap(const SolveReport& report, const OracleResult& result) {
    const SupportMode a = report.cdf.support();
    const SupportMode b = result.cdf.support();
    if (a.kind != b.kind || a.scale != b.scale) throw InvalidArgument("oracle_gap: support modes differ");
    if (!std::isfinite(report.value) || !std::isfinite(result.value)) {
        throw InvalidArgument("oracle_gap: non-finite value");
    }
    return report.value - result.value;
}

}  // namespace wdrm
