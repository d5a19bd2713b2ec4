#include "wdrm/solve_report.hpp"

namespace wdrm {

std::vector<std::string> flag_names(std::uint32_t flags) {
    static const char* names[] = {
        "wasserstein_binding", "p1_degenerate_step_family", "supremum_not_attained",
        "assumption_a_near_degenerate", "rectified", "cp_outside_reference_range",
        "homotopy_continuation", "nested_bisection_fallback", "iteration_cap",
        "non_strict_distortion",
    };
    std::vector<std::string> out;
    for (unsigned k = 0; k < sizeof(names) / sizeof(names[0]); ++k) {
        if (flags & (1u << k)) out.emplace_back(names[k]);
    }
    return out;
}

}  // namespace wdrm
