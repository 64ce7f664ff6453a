#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "condaj/data.hpp"
#include "condaj/estimators.hpp"
#include "condaj/expr.hpp"

namespace condaj {

// Reproducible stream: mt19937_64 seeded from (seed, stream index) with
// uniforms built from the raw 64-bit output, so draws do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    double uniform();  // [0, 1)
    double exponential(double rate);
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// Seed for replicate `index` of an experiment seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

enum class ProcessKind { markov, semi_markov };

// One covariate coordinate: a point mass on each atom (with the given
// probabilities) and Uniform(low, high) with the remaining mass.
struct CovariateDim {
    double low = 0.0;
    double high = 1.0;
    std::vector<double> atoms;
    std::vector<double> atom_probs;
};

struct CovariateLaw {
    std::vector<CovariateDim> dims;
    std::vector<double> draw(Rng& rng) const;
};

struct TransitionRate {
    StateLabel from;
    StateLabel to;
    Expression rate;
};

struct IntensitySpec {
    ProcessKind kind = ProcessKind::markov;
    StateSpace states;
    std::vector<TransitionRate> rates;
    CovariateLaw covariate_law;
    std::vector<std::pair<StateLabel, double>> initial;  // initial-state law
    double majorant_window = 0.25;  // thinning window for time-varying rates

    // Negative values raise ValidationError.
    double rate(StateLabel from, StateLabel to, double t, double duration, std::span<const double> x) const;
    bool time_homogeneous() const;  // no rate depends on t or duration
    Matrix generator(double t, std::span<const double> x) const;
    RowVector initial_distribution() const;
};

// Censoring time R > 0 given covariates; independent of the jump process.
struct CensoringSpec {
    enum class Kind { exponential, uniform, fixed } kind = Kind::exponential;
    Expression rate = Expression::constant(0.3);  // exponential rate, may use x
    double low = 0.0, high = 1.0;                  // uniform
    double value = 1.0;                             // fixed

    double draw(Rng& rng, std::span<const double> x) const;
};

struct Scenario {
    IntensitySpec intensity;
    CensoringSpec censoring;
    std::size_t n = 500;
    std::uint64_t seed = 1;
};

// JSON scenario file; see README for the schema.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

// Irreversible illness-death model 1 -> 2 -> 3, 1 -> 3 with all rates
// scaled by (1 + x), x ~ Uniform(0, 1), censoring Exp(0.3).
Scenario default_scenario();
// Two states, 1 -> 2 at rate (1 + x), x ~ Uniform(0, 1), censoring Exp(0.3).
Scenario survival_scenario();

ObservedPath simulate_path(const IntensitySpec& intensity, const CensoringSpec& censoring, Rng& rng);
// Subject l uses stream (seed, l); deterministic given the seed.
Sample simulate_sample(const IntensitySpec& intensity, const CensoringSpec& censoring, std::size_t n,
                       std::uint64_t seed);
Sample simulate_sample(const Scenario& scenario);

struct OraclePath {
    std::vector<double> grid;
    Matrix occupation;  // row i = p(grid[i] | x)
};

// True occupation probabilities of a Markov intensity: matrix exponential
// for time-homogeneous rates, otherwise adaptive RK4 on p' = p Q(t, x).
OraclePath markov_occupation_oracle(const IntensitySpec& intensity, std::span<const double> x,
                                    const std::vector<double>& grid);

struct BruteForceResult {
    WeightVector weights;
    HazardEstimate hazard;
    OccupationEstimate occupation;
};

// Test oracle: recomputes weights, counts, exposures (directly from the
// indicator definitions), hazard increments and the ordered matrix product
// by literal formula evaluation. Quadratic cost; keep n small.
BruteForceResult brute_force_estimator(const Sample& sample, const EvalPoint& x, const KernelSpec& spec, double a,
                                       double epsilon);

}  // namespace condaj
