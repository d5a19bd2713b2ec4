#include "wdrm/wdrm.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "wdrm/distortion.hpp"
#include "wdrm/distributions.hpp"
#include "wdrm/error.hpp"
#include "wdrm/moment_solver.hpp"
#include "wdrm/oracle.hpp"
#include "wdrm/rng.hpp"
#include "wdrm/wball_solver.hpp"

struct wdrm_distortion {
    wdrm::Distortion g;
};

struct wdrm_samples {
    wdrm::EmpiricalCdf F;
};

struct wdrm_cdf {
    wdrm::PiecewiseCdf F;
};

struct wdrm_report {
    wdrm::SolveReport r;
};

namespace {

thread_local std::string last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
int guard(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return WDRM_OK;
    } catch (const wdrm::Error& e) {
        last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return WDRM_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return WDRM_E_INTERNAL;
    }
}

template <class T>
void require(const T* p, const char* what) {
    if (p == nullptr) throw wdrm::InvalidArgument(std::string(what) + " must not be NULL");
}

wdrm::SolverOptions options_from(const wdrm_options* opt) {
    wdrm::SolverOptions o;
    if (opt) {
        o.tol.root = opt->root;
        o.tol.quadrature = opt->quadrature;
        o.tol.newton = opt->newton;
        o.tol.gap = opt->gap;
        o.allow_non_strict = opt->allow_non_strict != 0;
    }
    return o;
}

wdrm::SupportMode support_from(const char* text) {
    return text ? wdrm::SupportMode::parse(text) : wdrm::SupportMode::unit();
}

}  // namespace

extern "C" {

const char* wdrm_last_error(void) { return last_error.c_str(); }

const char* wdrm_version(void) { return "1.0.0"; }

const char* wdrm_rng_algorithm(void) { return wdrm::SplitMix64::algorithm.data(); }

const char* wdrm_flag_name(unsigned bit) {
    static const std::vector<std::string> names = wdrm::flag_names(0xFFFFFFFFu);
    return bit < names.size() ? names[bit].c_str() : nullptr;
}

void wdrm_options_default(wdrm_options* out) {
    if (!out) return;
    wdrm::Tolerances t;
    out->root = t.root;
    out->quadrature = t.quadrature;
    out->newton = t.newton;
    out->gap = t.gap;
    out->allow_non_strict = 0;
}

int wdrm_distortion_parse(const char* spec, wdrm_distortion** out) {
    return guard([&] {
        require(spec, "spec");
        require(out, "out");
        *out = new wdrm_distortion{wdrm::Distortion::parse(spec)};
    });
}

int wdrm_distortion_describe(const wdrm_distortion* g, char* buf, size_t len) {
    return guard([&] {
        require(g, "distortion");
        require(buf, "buf");
        std::string s = g->g.to_string();
        if (len <= s.size()) throw wdrm::InvalidArgument("buffer too small");
        std::memcpy(buf, s.c_str(), s.size() + 1);
    });
}

void wdrm_distortion_free(wdrm_distortion* g) { delete g; }

int wdrm_generate_uniform(size_t n, double lo, double hi, uint64_t seed, double* out) {
    return guard([&] {
        require(out, "out");
        if (n == 0) throw wdrm::InvalidArgument("n must be at least 1");
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw wdrm::InvalidArgument("need finite lo < hi");
        auto xs = wdrm::uniform_samples(n, lo, hi, seed);
        std::memcpy(out, xs.data(), n * sizeof(double));
    });
}

int wdrm_samples_create(const double* x, size_t n, const char* support, wdrm_samples** out) {
    return guard([&] {
        require(x, "x");
        require(out, "out");
        *out = new wdrm_samples{wdrm::EmpiricalCdf(std::vector<double>(x, x + n), support_from(support))};
    });
}

int wdrm_samples_read(const char* path, const char* support, wdrm_samples** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new wdrm_samples{wdrm::EmpiricalCdf(wdrm::read_samples(path), support_from(support))};
    });
}

size_t wdrm_samples_size(const wdrm_samples* s) { return s ? s->F.size() : 0; }

double wdrm_samples_mean(const wdrm_samples* s) { return s ? s->F.mean() : kNaN; }

double wdrm_samples_variance(const wdrm_samples* s) { return s ? s->F.variance() : kNaN; }

int wdrm_samples_drm(const wdrm_samples* s, const wdrm_distortion* g, double* out) {
    return guard([&] {
        require(s, "samples");
        require(g, "distortion");
        require(out, "out");
        *out = wdrm::drm_value(s->F, g->g);
    });
}

void wdrm_samples_free(wdrm_samples* s) { delete s; }

int wdrm_solve_a(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, const wdrm_options* opt,
                 wdrm_report** out) {
    return guard([&] {
        require(s, "samples");
        require(g, "distortion");
        require(out, "out");
        *out = new wdrm_report{wdrm::solve_problem_a(s->F, g->g, p, eps, options_from(opt))};
    });
}

int wdrm_solve_b(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, double c1, double cp,
                 const wdrm_options* opt, wdrm_report** out) {
    return guard([&] {
        require(s, "samples");
        require(g, "distortion");
        require(out, "out");
        *out = new wdrm_report{wdrm::solve_problem_b(s->F, g->g, p, eps, c1, cp, options_from(opt))};
    });
}

int wdrm_solve_mean_only(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, double c1,
                         const wdrm_options* opt, wdrm_report** out) {
    return guard([&] {
        require(s, "samples");
        require(g, "distortion");
        require(out, "out");
        *out = new wdrm_report{wdrm::solve_mean_only(s->F, g->g, p, eps, c1, options_from(opt))};
    });
}

int wdrm_solve_moments(const wdrm_distortion* g, double p, double c1, double cp, const char* support,
                       const wdrm_options* opt, wdrm_report** out) {
    return guard([&] {
        require(g, "distortion");
        require(out, "out");
        *out = new wdrm_report{wdrm::solve_cornilly(g->g, p, c1, cp, support_from(support), options_from(opt))};
    });
}

int wdrm_oracle(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, const double* c1,
                const double* cp, size_t grid, wdrm_report** out) {
    return guard([&] {
        require(s, "samples");
        require(g, "distortion");
        require(out, "out");
        wdrm::OracleConstraints cons;
        if (c1) cons.c1 = *c1;
        if (cp) cons.cp = *cp;
        wdrm::OracleOptions o;
        o.grid = grid;
        wdrm::OracleResult res = wdrm::oracle_solve(s->F, g->g, p, eps, cons, o);
        wdrm::SolveReport r;
        r.value = res.value;
        r.multipliers = {kNaN, kNaN, kNaN, false};
        r.cdf = res.cdf;
        r.residuals = res.residuals;
        r.budget_used = res.budget_used;
        r.iterations.outer = res.iterations;
        if (std::isfinite(eps) && res.budget_used >= eps - 1e-6) {
            r.multipliers.wasserstein_binding = true;
            r.flags |= wdrm::flag_binding;
        }
        if (!res.converged) {
            r.flags |= wdrm::flag_iteration_cap;
            r.warnings.push_back("oracle stopped before meeting its tolerance");
        }
        *out = new wdrm_report{std::move(r)};
    });
}

double wdrm_report_value(const wdrm_report* r) { return r ? r->r.value : kNaN; }

double wdrm_report_lambda(const wdrm_report* r) { return r ? r->r.multipliers.lambda : kNaN; }

double wdrm_report_eta1(const wdrm_report* r) { return r ? r->r.multipliers.eta1 : kNaN; }

double wdrm_report_etap(const wdrm_report* r) { return r ? r->r.multipliers.etap : kNaN; }

int wdrm_report_binding(const wdrm_report* r) { return r && r->r.multipliers.wasserstein_binding ? 1 : 0; }

double wdrm_report_budget_used(const wdrm_report* r) { return r ? r->r.budget_used : kNaN; }

int wdrm_report_residual(const wdrm_report* r, wdrm_residual which, double* value, int* present) {
    return guard([&] {
        require(r, "report");
        require(value, "value");
        require(present, "present");
        const std::optional<double>* slot = nullptr;
        switch (which) {
        case WDRM_RESIDUAL_BUDGET: slot = &r->r.residuals.budget; break;
        case WDRM_RESIDUAL_MEAN: slot = &r->r.residuals.mean; break;
        case WDRM_RESIDUAL_PMOMENT: slot = &r->r.residuals.pmoment; break;
        default: throw wdrm::InvalidArgument("unknown residual kind");
        }
        *present = slot->has_value() ? 1 : 0;
        *value = slot->value_or(kNaN);
    });
}

void wdrm_report_iterations(const wdrm_report* r, long* outer, long* inner, long* restarts, long* evaluations) {
    if (!r) return;
    if (outer) *outer = r->r.iterations.outer;
    if (inner) *inner = r->r.iterations.inner;
    if (restarts) *restarts = r->r.iterations.restarts;
    if (evaluations) *evaluations = r->r.iterations.evaluations;
}

uint32_t wdrm_report_flags(const wdrm_report* r) { return r ? r->r.flags : 0u; }

size_t wdrm_report_warning_count(const wdrm_report* r) { return r ? r->r.warnings.size() : 0; }

const char* wdrm_report_warning(const wdrm_report* r, size_t i) {
    if (!r || i >= r->r.warnings.size()) return nullptr;
    return r->r.warnings[i].c_str();
}

int wdrm_report_cdf(const wdrm_report* r, wdrm_cdf** out) {
    return guard([&] {
        require(r, "report");
        require(out, "out");
        *out = new wdrm_cdf{r->r.cdf};
    });
}

void wdrm_report_free(wdrm_report* r) { delete r; }

int wdrm_cdf_read(const char* path, const char* support, wdrm_cdf** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new wdrm_cdf{wdrm::read_curve(path, support_from(support))};
    });
}

int wdrm_cdf_write(const wdrm_cdf* F, const char* path, size_t grid_points) {
    return guard([&] {
        require(F, "cdf");
        require(path, "path");
        wdrm::write_curve(F->F, path, grid_points);
    });
}

int wdrm_cdf_eval(const wdrm_cdf* F, double x, double* out) {
    return guard([&] {
        require(F, "cdf");
        require(out, "out");
        *out = F->F(x);
    });
}

int wdrm_cdf_quantile(const wdrm_cdf* F, double u, double* out) {
    return guard([&] {
        require(F, "cdf");
        require(out, "out");
        if (!(u > 0.0 && u <= 1.0)) throw wdrm::DomainError("quantile level must lie in (0, 1]");
        *out = F->F.quantile(u);
    });
}

int wdrm_cdf_drm(const wdrm_cdf* F, const wdrm_distortion* g, double* out) {
    return guard([&] {
        require(F, "cdf");
        require(g, "distortion");
        require(out, "out");
        *out = wdrm::drm_value(F->F, g->g);
    });
}

int wdrm_cdf_moment(const wdrm_cdf* F, double k, double* out) {
    return guard([&] {
        require(F, "cdf");
        require(out, "out");
        *out = wdrm::moment_raw(F->F, k);
    });
}

int wdrm_cdf_wasserstein(const wdrm_cdf* F, const wdrm_samples* s, double p, double* out) {
    return guard([&] {
        require(F, "cdf");
        require(s, "samples");
        require(out, "out");
        *out = wdrm::wasserstein_to_empirical(F->F, s->F, p);
    });
}

void wdrm_cdf_free(wdrm_cdf* F) { delete F; }

}  // extern "C"
