#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace condaj {

using MessageSink = std::function<void(const std::string&)>;

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path out = ".";
    std::vector<std::vector<double>> x_points;
    std::vector<std::pair<std::size_t, std::vector<double>>> atoms;  // 0-based dimension
    std::string kernel = "epanechnikov";
    double eta = 0.75;
    std::optional<double> bandwidth;
    double epsilon = 1e-4;
    std::optional<double> theta;
    std::size_t grid = 50;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::optional<std::filesystem::path> scenario;
    std::optional<std::size_t> n;
    bool quick = false;
    MessageSink message;  // progress lines and warnings; may be empty
};

// Violations of the config invariants (epsilon > 0, eta in (0, 1), ...).
std::vector<std::string> validate_config(const RunConfig& config);

// Each command throws condaj errors on failure. A fit at an x point without
// kernel mass raises DegenerateError after the other points are written.
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& config);
std::vector<std::filesystem::path> cmd_fit(const RunConfig& config);
std::vector<std::filesystem::path> cmd_covariance(const RunConfig& config);
// True when every criterion passed.
bool cmd_check(const RunConfig& config);

}  // namespace condaj
