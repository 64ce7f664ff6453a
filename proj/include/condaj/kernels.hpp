#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condaj/data.hpp"

namespace condaj {

// All kernels are symmetric densities supported on [-1, 1].
enum class KernelKind { epanechnikov, triangular, uniform };

KernelKind parse_kernel_kind(std::string_view name);
std::string_view kernel_name(KernelKind kind);

double kernel_value(KernelKind kind, double u);
// Closed form of the integral of K(u)^2 over [-1, 1].
double kernel_square_integral(KernelKind kind);

// Per-dimension kernel plus the declared atom set of that coordinate.
struct KernelSpec {
    std::vector<KernelKind> kinds;
    std::vector<std::vector<double>> atoms;  // sorted, one list per dimension

    static KernelSpec same(std::size_t d, KernelKind kind = KernelKind::epanechnikov);

    std::size_t dimension() const { return kinds.size(); }
    bool is_atom(std::size_t dim, double value) const;
    void set_atoms(std::size_t dim, std::vector<double> values);
};

double kernel_eval(const KernelSpec& spec, std::size_t dim, double u);

// Deterministic bandwidth rule a_n^{d_c} = log(n) / n^{1-eta}, where d_c
// counts only the continuous coordinates of the evaluation point.
// Admissible eta must exceed 1/(1+delta) for the unknown moment exponent
// delta of the transition counts; eta is exposed, not estimated.
struct BandwidthSchedule {
    double eta = 0.75;
    std::size_t d_continuous = 1;
    std::optional<double> explicit_a;
};

double bandwidth(const BandwidthSchedule& schedule, std::size_t n);

struct EvalPoint {
    std::vector<double> coords;
    std::vector<bool> atom_flags;

    std::size_t continuous_dimension() const;
};

// Flags each coordinate that hits a declared atom of its dimension.
EvalPoint make_eval_point(std::vector<double> coords, const KernelSpec& spec);

struct WeightVector {
    std::vector<double> weights;  // normalized kernel factors, sum to 1
    std::vector<double> factors;  // raw per-subject kernel products
    double density_value = 0.0;   // mean of the factors
    bool degenerate = true;
};

WeightVector nw_weights(const Sample& sample, const EvalPoint& x, const KernelSpec& spec, double a);

// (prod_i int K_i^2) / density_value; throws DegenerateError when the
// density is not positive.
double phi_estimate(const KernelSpec& spec, double density_value);
// Same, with atomic coordinates of x contributing a factor 1 (their kernel
// factor is an indicator, not a smoothing kernel).
double phi_estimate(const KernelSpec& spec, const EvalPoint& x, double density_value);

}  // namespace condaj
