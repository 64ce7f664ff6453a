#include "condaj/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace condaj {

namespace {

// Fills the zeta increments of one subject; restricted to a single (j, k)
// when `only` is set.
StepMatrix zeta_increments(const Sample& sample, const HazardEstimate& hazard, double phi, std::size_t subject,
                           std::optional<std::pair<std::size_t, std::size_t>> only) {
    if (subject >= sample.size()) throw std::out_of_range("subject index out of range");
    if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
    const StateSpace& space = sample.state_space;
    const ObservedPath& path = sample.paths[subject];
    const auto& grid = hazard.hazard.times();
    const std::size_t S = hazard.hazard.states();
    const double eps = hazard.epsilon;
    const double root_phi = std::sqrt(phi);

    StepMatrix z(grid, S);
    const auto own = counting_increments(path);
    std::size_t next = 0;
    std::size_t current = space.index_of(path.initial_state);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        std::ptrdiff_t own_from = -1, own_to = -1;
        if (next < own.size() && own[next].time == t) {
            own_from = static_cast<std::ptrdiff_t>(space.index_of(own[next].from_state));
            own_to = static_cast<std::ptrdiff_t>(space.index_of(own[next].to_state));
        }
        const bool observed = path.observed_before(t);
        for (std::size_t j = 0; j < S; ++j) {
            if (only && only->first != j) continue;
            const double exposure = hazard.exposure[j].before_index(i);
            const double denom = std::max(exposure, eps);
            const double at_risk = observed && current == j ? 1.0 : 0.0;
            for (std::size_t k = 0; k < S; ++k) {
                if (k == j || (only && only->second != k)) continue;
                const double mine = (static_cast<std::ptrdiff_t>(j) == own_from &&
                                     static_cast<std::ptrdiff_t>(k) == own_to) ? 1.0 : 0.0;
                const double dn = hazard.counts.jump(i, j, k);
                if (mine == 0.0 && dn == 0.0) continue;
                double v = (mine - dn) / denom;
                if (exposure > eps) v -= (at_risk - exposure) / exposure * hazard.hazard.jump(i, j, k);
                z.jump(i, j, k) = root_phi * v;
            }
        }
        if (own_to >= 0) {
            current = static_cast<std::size_t>(own_to);
            ++next;
        }
    }
    z.set_generator_diagonal();
    return z;
}

// Weighted Gram matrix sum_l w_l v_l v_l^T; rows of `values` are subjects.
Matrix gram(const Matrix& values, const std::vector<double>& weights) {
    const auto m = values.cols();
    Matrix out(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = a; b < m; ++b) {
            double acc = 0.0;
            for (Eigen::Index l = 0; l < values.rows(); ++l)
                acc += weights[static_cast<std::size_t>(l)] * values(l, a) * values(l, b);
            out(a, b) = acc;
            out(b, a) = acc;
        }
    return out;
}

CovarianceSurface surface_from_curves(const std::vector<InfluenceCurve>& influences, const WeightVector& w,
                                      const std::vector<double>& grid) {
    Matrix values(static_cast<Eigen::Index>(influences.size()), static_cast<Eigen::Index>(grid.size()));
    std::vector<double> weights(influences.size());
    for (std::size_t r = 0; r < influences.size(); ++r) {
        weights[r] = w.weights.at(influences[r].subject);
        for (std::size_t c = 0; c < grid.size(); ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = influences[r].curve.at(grid[c]);
    }
    return {grid, gram(values, weights)};
}

}  // namespace

InfluenceCurve influence_zeta(const Sample& sample, const WeightVector& w, const HazardEstimate& hazard,
                              double phi, std::size_t subject, std::size_t j, std::size_t k) {
    if (w.weights.size() != sample.size()) throw std::invalid_argument("weight vector does not match the sample");
    if (j == k || j >= hazard.hazard.states() || k >= hazard.hazard.states())
        throw std::invalid_argument("influence_zeta: (j, k) must be distinct states");
    StepMatrix z = zeta_increments(sample, hazard, phi, subject, std::make_pair(j, k));
    return {subject, z.entry(j, k)};
}

StepMatrix influence_zeta_matrix(const Sample& sample, const HazardEstimate& hazard, double phi,
                                 std::size_t subject) {
    return zeta_increments(sample, hazard, phi, subject, std::nullopt);
}

std::vector<InfluenceCurve> influence_gamma(const HazardEstimate& hazard, const OccupationEstimate& occupation,
                                            const StepMatrix& zeta, std::size_t subject) {
    const std::size_t S = hazard.hazard.states();
    const std::size_t G = hazard.hazard.size();
    if (zeta.size() != G || zeta.states() != S || occupation.occupation.size() != S)
        throw std::invalid_argument("influence_gamma: inputs come from different fits");

    std::vector<std::vector<double>> values(S, std::vector<double>(G));
    RowVector gamma = RowVector::Zero(static_cast<Eigen::Index>(S));
    RowVector prev(static_cast<Eigen::Index>(S));
    for (std::size_t j = 0; j < S; ++j) prev(static_cast<Eigen::Index>(j)) = occupation.initial[j];
    for (std::size_t i = 0; i < G; ++i) {
        gamma = gamma + gamma * hazard.hazard.jump_matrix(i) + prev * zeta.jump_matrix(i);
        for (std::size_t j = 0; j < S; ++j) {
            values[j][i] = gamma(static_cast<Eigen::Index>(j));
            prev(static_cast<Eigen::Index>(j)) = occupation.occupation[j].values()[i];
        }
    }
    std::vector<InfluenceCurve> out;
    out.reserve(S);
    for (std::size_t j = 0; j < S; ++j)
        out.push_back({subject, StepCurve(hazard.hazard.times(), std::move(values[j]), 0.0)});
    return out;
}

CovarianceSurface cov_hazard(const std::vector<InfluenceCurve>& influences, const WeightVector& w,
                             const std::vector<double>& grid) {
    if (w.degenerate) throw std::invalid_argument("cov_hazard: degenerate weights");
    return surface_from_curves(influences, w, grid);
}

CovarianceSurface cov_occupation(const std::vector<InfluenceCurve>& influences, const WeightVector& w,
                                 const std::vector<double>& grid) {
    if (w.degenerate) throw std::invalid_argument("cov_occupation: degenerate weights");
    return surface_from_curves(influences, w, grid);
}

std::vector<double> quantile_grid(const std::vector<double>& times, double theta, std::size_t m) {
    std::vector<double> eligible;
    for (double t : times)
        if (t <= theta) eligible.push_back(t);
    std::vector<double> out;
    if (eligible.empty() || m == 0) return out;
    const double n = static_cast<double>(eligible.size());
    for (std::size_t i = 1; i <= m; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(m);
        auto idx = static_cast<std::size_t>(std::ceil(p * n));
        idx = std::clamp<std::size_t>(idx, 1, eligible.size()) - 1;
        if (out.empty() || out.back() != eligible[idx]) out.push_back(eligible[idx]);
    }
    return out;
}

CovarianceResult covariance(const Sample& sample, const ConditionalFit& fit, const KernelSpec& spec,
                            std::size_t grid_size) {
    CovarianceResult res;
    const HazardEstimate& hz = fit.hazard;
    const std::size_t S = hz.hazard.states();
    const std::size_t G = hz.hazard.size();
    res.phi = phi_estimate(spec, fit.x, fit.weights.density_value);
    res.grid = quantile_grid(hz.hazard.times(), fit.theta, grid_size);
    for (std::size_t j = 0; j < S; ++j)
        for (std::size_t k = 0; k < S; ++k)
            if (j != k && G > 0 && hz.counts.cumulative(G - 1, j, k) > 0.0) res.pairs.emplace_back(j, k);

    std::vector<std::size_t> subjects;
    std::vector<double> weights;
    for (std::size_t l = 0; l < sample.size(); ++l)
        if (fit.weights.weights[l] > 0.0) {
            subjects.push_back(l);
            weights.push_back(fit.weights.weights[l]);
        }
    const auto rows = static_cast<Eigen::Index>(subjects.size());
    const auto cols = static_cast<Eigen::Index>(res.grid.size());
    std::vector<Matrix> zeta_values(res.pairs.size(), Matrix(rows, cols));
    std::vector<Matrix> gamma_values(S, Matrix(rows, cols));

    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t l = subjects[static_cast<std::size_t>(r)];
        StepMatrix z = influence_zeta_matrix(sample, hz, res.phi, l);
        auto gamma = influence_gamma(hz, fit.occupation, z, l);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double t = res.grid[static_cast<std::size_t>(c)];
            for (std::size_t p = 0; p < res.pairs.size(); ++p)
                zeta_values[p](r, c) = z.value(t, res.pairs[p].first, res.pairs[p].second);
            for (std::size_t j = 0; j < S; ++j) gamma_values[j](r, c) = gamma[j].curve.at(t);
        }
    }
    for (const Matrix& v : zeta_values) res.hazard.push_back({res.grid, gram(v, weights)});
    for (const Matrix& v : gamma_values) res.occupation.push_back({res.grid, gram(v, weights)});
    return res;
}

}  // namespace condaj
