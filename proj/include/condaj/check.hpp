#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace condaj {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    bool skipped = false;
    std::string detail;
    double seconds = 0.0;
};

struct CheckOptions {
    bool quick = false;  // skip the two long Monte Carlo criteria
    std::uint64_t seed = 20240601;
    std::size_t threads = 1;
    std::function<void(const CriterionResult&)> on_result;
};

CriterionResult check_conservation(const CheckOptions& opt);
CriterionResult check_exposure_identity(const CheckOptions& opt);
CriterionResult check_beran_reduction(const CheckOptions& opt);
CriterionResult check_landmark_reduction(const CheckOptions& opt);
CriterionResult check_consistency(const CheckOptions& opt);
CriterionResult check_product_integral(const CheckOptions& opt);
CriterionResult check_covariance_scale(const CheckOptions& opt);
CriterionResult check_covariance_surfaces(const CheckOptions& opt);
CriterionResult check_epsilon_floor(const CheckOptions& opt);
CriterionResult check_determinism(const CheckOptions& opt);

std::vector<CriterionResult> run_acceptance(const CheckOptions& opt);
// One line: "PASS  3 beran-reduction (0.05 s) detail".
std::string format_result(const CriterionResult& r);

}  // namespace condaj
