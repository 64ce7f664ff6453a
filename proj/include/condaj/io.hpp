#pragma once

#include <filesystem>
#include <string>

namespace condaj {

struct ConditionalFit;
struct CovarianceResult;
class StateSpace;

// 17 significant digits, so every double round-trips exactly.
std::string format_number(double v);

// Long/tidy CSV: time,quantity,j,k,value with quantities
// cumulative_hazard, count (both with j,k) and exposure (k empty).
std::string fit_hazard_csv(const ConditionalFit& fit, const StateSpace& states);
// time,j,value
std::string fit_occupation_csv(const ConditionalFit& fit, const StateSpace& states);
// Full step-function representation including floor and horizon annotations.
std::string fit_json(const ConditionalFit& fit, const StateSpace& states);

// s,t,value for one surface.
std::string surface_csv(const CovarianceResult& cov, bool hazard, std::size_t index);
std::string covariance_json(const CovarianceResult& cov, const ConditionalFit& fit, const StateSpace& states);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace condaj
