#ifndef WDRM_H
#define WDRM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WDRM_API __declspec(dllexport)
#else
#define WDRM_API __attribute__((visibility("default")))
#endif

/* Status codes returned by every fallible call. */
enum {
    WDRM_OK = 0,
    WDRM_E_INVALID_ARGUMENT = 1,
    WDRM_E_DOMAIN = 2,
    WDRM_E_INFEASIBLE = 3,
    WDRM_E_NO_CONVERGENCE = 4,
    WDRM_E_UNBOUNDED = 5,
    WDRM_E_IO = 6,
    WDRM_E_INTERNAL = 7
};

typedef enum { WDRM_RESIDUAL_BUDGET = 0, WDRM_RESIDUAL_MEAN = 1, WDRM_RESIDUAL_PMOMENT = 2 } wdrm_residual;

typedef struct wdrm_distortion wdrm_distortion;
typedef struct wdrm_samples wdrm_samples;
typedef struct wdrm_cdf wdrm_cdf;
typedef struct wdrm_report wdrm_report;

typedef struct {
    double root;        /* relative width of the lambda bracket */
    double quadrature;  /* absolute quadrature target */
    double newton;      /* inner moment residual target */
    double gap;         /* oracle gap target, reporting only */
    int allow_non_strict;
} wdrm_options;

/* Message of the last failure on the calling thread; empty after success. */
WDRM_API const char* wdrm_last_error(void);
WDRM_API const char* wdrm_version(void);
WDRM_API const char* wdrm_rng_algorithm(void);
/* Name of solve flag bit `bit`, or NULL past the last flag. */
WDRM_API const char* wdrm_flag_name(unsigned bit);

WDRM_API void wdrm_options_default(wdrm_options* out);

/* "power:<alpha>", "dual:<beta>", "identity". */
WDRM_API int wdrm_distortion_parse(const char* spec, wdrm_distortion** out);
WDRM_API int wdrm_distortion_describe(const wdrm_distortion* g, char* buf, size_t len);
WDRM_API void wdrm_distortion_free(wdrm_distortion* g);

/* Uniform[lo, hi) draws in generation order (SplitMix64). */
WDRM_API int wdrm_generate_uniform(size_t n, double lo, double hi, uint64_t seed, double* out);

/* support: "unit", "scaled:<B>", "unbounded". */
WDRM_API int wdrm_samples_create(const double* x, size_t n, const char* support, wdrm_samples** out);
WDRM_API int wdrm_samples_read(const char* path, const char* support, wdrm_samples** out);
WDRM_API size_t wdrm_samples_size(const wdrm_samples* s);
WDRM_API double wdrm_samples_mean(const wdrm_samples* s);
/* Population variance. */
WDRM_API double wdrm_samples_variance(const wdrm_samples* s);
/* Exact distortion risk measure of the empirical law. */
WDRM_API int wdrm_samples_drm(const wdrm_samples* s, const wdrm_distortion* g, double* out);
WDRM_API void wdrm_samples_free(wdrm_samples* s);

/* Worst case over the p-Wasserstein ball. */
WDRM_API int wdrm_solve_a(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps,
                          const wdrm_options* opt, wdrm_report** out);
/* Ball plus mean c1 and p-th raw moment cp (real line: p = 2, cp = second moment). */
WDRM_API int wdrm_solve_b(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, double c1, double cp,
                          const wdrm_options* opt, wdrm_report** out);
/* Ball plus mean c1 only. */
WDRM_API int wdrm_solve_mean_only(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, double c1,
                                  const wdrm_options* opt, wdrm_report** out);
/* Moment constraints without a ball. */
WDRM_API int wdrm_solve_moments(const wdrm_distortion* g, double p, double c1, double cp, const char* support,
                                const wdrm_options* opt, wdrm_report** out);
/* Grid convex-program verifier; c1/cp may be NULL. eps may be +inf. */
WDRM_API int wdrm_oracle(const wdrm_samples* s, const wdrm_distortion* g, double p, double eps, const double* c1,
                         const double* cp, size_t grid, wdrm_report** out);

/* Unset multipliers read as NaN. */
WDRM_API double wdrm_report_value(const wdrm_report* r);
WDRM_API double wdrm_report_lambda(const wdrm_report* r);
WDRM_API double wdrm_report_eta1(const wdrm_report* r);
WDRM_API double wdrm_report_etap(const wdrm_report* r);
WDRM_API int wdrm_report_binding(const wdrm_report* r);
WDRM_API double wdrm_report_budget_used(const wdrm_report* r);
/* *present is 0 when the constraint does not apply. */
WDRM_API int wdrm_report_residual(const wdrm_report* r, wdrm_residual which, double* value, int* present);
WDRM_API void wdrm_report_iterations(const wdrm_report* r, long* outer, long* inner, long* restarts,
                                     long* evaluations);
WDRM_API uint32_t wdrm_report_flags(const wdrm_report* r);
WDRM_API size_t wdrm_report_warning_count(const wdrm_report* r);
WDRM_API const char* wdrm_report_warning(const wdrm_report* r, size_t i);
/* Copy of the maximising (or grid) CDF. */
WDRM_API int wdrm_report_cdf(const wdrm_report* r, wdrm_cdf** out);
WDRM_API void wdrm_report_free(wdrm_report* r);

/* Curve CSV "x,F"; support fixes the unit scale of the stored pieces. */
WDRM_API int wdrm_cdf_read(const char* path, const char* support, wdrm_cdf** out);
WDRM_API int wdrm_cdf_write(const wdrm_cdf* F, const char* path, size_t grid_points);
WDRM_API int wdrm_cdf_eval(const wdrm_cdf* F, double x, double* out);
WDRM_API int wdrm_cdf_quantile(const wdrm_cdf* F, double u, double* out);
WDRM_API int wdrm_cdf_drm(const wdrm_cdf* F, const wdrm_distortion* g, double* out);
WDRM_API int wdrm_cdf_moment(const wdrm_cdf* F, double k, double* out);
WDRM_API int wdrm_cdf_wasserstein(const wdrm_cdf* F, const wdrm_samples* s, double p, double* out);
WDRM_API void wdrm_cdf_free(wdrm_cdf* F);

#ifdef __cplusplus
}
#endif

#endif
