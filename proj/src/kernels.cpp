#include "condaj/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "condaj/error.hpp"

namespace condaj {

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "epanechnikov") return KernelKind::epanechnikov;
    if (name == "triangular") return KernelKind::triangular;
    if (name == "uniform") return KernelKind::uniform;
    throw ParseError("unknown kernel '" + std::string(name) + "'");
}

std::string_view kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::epanechnikov: return "epanechnikov";
        case KernelKind::triangular: return "triangular";
        case KernelKind::uniform: return "uniform";
    }
    return "?";
}

double kernel_value(KernelKind kind, double u) {
    const double a = std::abs(u);
    if (a > 1.0) return 0.0;
    switch (kind) {
        case KernelKind::epanechnikov: return 0.75 * (1.0 - u * u);
        case KernelKind::triangular: return 1.0 - a;
        case KernelKind::uniform: return 0.5;
    }
    return 0.0;
}

double kernel_square_integral(KernelKind kind) {
    switch (kind) {
        case KernelKind::epanechnikov: return 0.6;       // 0.5625 * 16/15
        case KernelKind::triangular: return 2.0 / 3.0;   // 2 * int_0^1 (1-u)^2
        case KernelKind::uniform: return 0.5;
    }
    return 0.0;
}

KernelSpec KernelSpec::same(std::size_t d, KernelKind kind) {
    KernelSpec s;
    s.kinds.assign(d, kind);
    s.atoms.assign(d, {});
    return s;
}

bool KernelSpec::is_atom(std::size_t dim, double value) const {
    const auto& a = atoms.at(dim);
    return std::binary_search(a.begin(), a.end(), value);
}

void KernelSpec::set_atoms(std::size_t dim, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    atoms.at(dim) = std::move(values);
}

double kernel_eval(const KernelSpec& spec, std::size_t dim, double u) {
    return kernel_value(spec.kinds.at(dim), u);
}

double bandwidth(const BandwidthSchedule& schedule, std::size_t n) {
    if (schedule.explicit_a) {
        if (!(*schedule.explicit_a > 0.0)) throw std::invalid_argument("bandwidth must be positive");
        return *schedule.explicit_a;
    }
    if (n < 2) throw std::invalid_argument("bandwidth schedule needs n >= 2");
    if (!(schedule.eta > 0.0 && schedule.eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (schedule.d_continuous == 0) return 1.0;
    const double nd = static_cast<double>(n);
    const double a_pow_d = std::log(nd) / std::pow(nd, 1.0 - schedule.eta);
    return std::pow(a_pow_d, 1.0 / static_cast<double>(schedule.d_continuous));
}

std::size_t EvalPoint::continuous_dimension() const {
    return static_cast<std::size_t>(std::count(atom_flags.begin(), atom_flags.end(), false));
}

EvalPoint make_eval_point(std::vector<double> coords, const KernelSpec& spec) {
    if (coords.size() != spec.dimension())
        throw std::invalid_argument("evaluation point has dimension " + std::to_string(coords.size()) +
                                    ", kernel has " + std::to_string(spec.dimension()));
    EvalPoint x;
    x.atom_flags.resize(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) x.atom_flags[i] = spec.is_atom(i, coords[i]);
    x.coords = std::move(coords);
    return x;
}

WeightVector nw_weights(const Sample& sample, const EvalPoint& x, const KernelSpec& spec, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    const std::size_t d = x.coords.size();
    if (d != sample.dimension() || d != spec.dimension())
        throw std::invalid_argument("dimension mismatch between sample, kernel and evaluation point");

    WeightVector w;
    w.factors.resize(sample.size());
    double total = 0.0;
    for (std::size_t l = 0; l < sample.size(); ++l) {
        const auto& cov = sample.paths[l].covariates;
        double f = 1.0;
        for (std::size_t i = 0; i < d && f != 0.0; ++i) {
            if (x.atom_flags[i]) {
                f *= cov[i] == x.coords[i] ? 1.0 : 0.0;
            } else if (spec.is_atom(i, cov[i])) {
                f = 0.0;
            } else {
                f *= kernel_eval(spec, i, (x.coords[i] - cov[i]) / a) / a;
            }
        }
        w.factors[l] = f;
        total += f;
    }
    w.density_value = total / static_cast<double>(sample.size());
    w.weights.assign(sample.size(), 0.0);
    w.degenerate = !(total > 0.0);
    if (!w.degenerate)
        for (std::size_t l = 0; l < sample.size(); ++l) w.weights[l] = w.factors[l] / total;
    return w;
}

double phi_estimate(const KernelSpec& spec, double density_value) {
    if (!(density_value > 0.0)) throw DegenerateError("degenerate density");
    double num = 1.0;
    for (KernelKind k : spec.kinds) num *= kernel_square_integral(k);
    return num / density_value;
}

double phi_estimate(const KernelSpec& spec, const EvalPoint& x, double density_value) {
    if (!(density_value > 0.0)) throw DegenerateError("degenerate density");
    double num = 1.0;
    for (std::size_t i = 0; i < spec.dimension(); ++i)
        if (!x.atom_flags.at(i)) num *= kernel_square_integral(spec.kinds[i]);
    return num / density_value;
}

}  // namespace condaj
