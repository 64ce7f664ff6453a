#include "condaj/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "condaj/error.hpp"
#include "condaj/io.hpp"

namespace condaj {

namespace {

std::size_t grid_index(const std::vector<double>& grid, double t) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.end() || *it != t) throw std::invalid_argument("time " + format_number(t) + " is not on the grid");
    return static_cast<std::size_t>(it - grid.begin());
}

void require_weights(const Sample& sample, const WeightVector& w) {
    if (w.weights.size() != sample.size()) throw std::invalid_argument("weight vector does not match the sample");
    if (w.degenerate) throw DegenerateError("no kernel mass at x");
}

std::string describe(const EvalPoint& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.coords.size(); ++i) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, x.coords[i]);
        os << (i ? ", " : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << ')';
    return os.str();
}

}  // namespace

std::vector<double> event_grid(const Sample& sample) {
    std::vector<double> grid;
    for (const ObservedPath& p : sample.paths) {
        for (const Jump& j : p.jumps) grid.push_back(j.time);
        if (p.end_reason == EndReason::censored) grid.push_back(p.end_time);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

StepMatrix estimate_counts(const Sample& sample, const WeightVector& w) {
    return estimate_counts(sample, w, event_grid(sample));
}

StepMatrix estimate_counts(const Sample& sample, const WeightVector& w, const std::vector<double>& grid) {
    require_weights(sample, w);
    const StateSpace& space = sample.state_space;
    StepMatrix counts(grid, space.size());
    for (std::size_t l = 0; l < sample.size(); ++l) {
        const double wl = w.weights[l];
        if (wl == 0.0) continue;
        for (const Transition& tr : counting_increments(sample.paths[l]))
            counts.jump(grid_index(grid, tr.time), space.index_of(tr.from_state), space.index_of(tr.to_state)) += wl;
    }
    counts.accumulate();
    return counts;
}

std::vector<StepCurve> estimate_censoring(const Sample& sample, const WeightVector& w) {
    return estimate_censoring(sample, w, event_grid(sample));
}

std::vector<StepCurve> estimate_censoring(const Sample& sample, const WeightVector& w,
                                          const std::vector<double>& grid) {
    require_weights(sample, w);
    const StateSpace& space = sample.state_space;
    std::vector<std::vector<double>> jumps(space.size(), std::vector<double>(grid.size(), 0.0));
    for (std::size_t l = 0; l < sample.size(); ++l) {
        const ObservedPath& p = sample.paths[l];
        if (w.weights[l] == 0.0 || p.end_reason != EndReason::censored) continue;
        jumps[space.index_of(p.final_state())][grid_index(grid, p.end_time)] += w.weights[l];
    }
    std::vector<StepCurve> out;
    out.reserve(space.size());
    for (auto& col : jumps) {
        for (std::size_t i = 1; i < col.size(); ++i) col[i] += col[i - 1];
        out.emplace_back(grid, std::move(col), 0.0);
    }
    return out;
}

std::vector<double> initial_exposure(const Sample& sample, const WeightVector& w) {
    require_weights(sample, w);
    std::vector<double> init(sample.state_space.size(), 0.0);
    for (std::size_t l = 0; l < sample.size(); ++l)
        init[sample.state_space.index_of(sample.paths[l].initial_state)] += w.weights[l];
    return init;
}

std::vector<StepCurve> estimate_exposure(const StepMatrix& counts, const std::vector<StepCurve>& censoring,
                                         const std::vector<double>& initial) {
    const std::size_t S = counts.states();
    if (censoring.size() != S || initial.size() != S)
        throw std::invalid_argument("estimate_exposure: state dimension mismatch");
    std::vector<StepCurve> out;
    out.reserve(S);
    for (std::size_t j = 0; j < S; ++j) {
        std::vector<double> v(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            double flow = 0.0;
            for (std::size_t k = 0; k < S; ++k)
                if (k != j) flow += counts.cumulative(i, k, j) - counts.cumulative(i, j, k);
            v[i] = initial[j] - censoring[j].values()[i] + flow;
        }
        out.emplace_back(counts.times(), std::move(v), initial[j]);
    }
    return out;
}

HazardEstimate nelson_aalen(const StepMatrix& counts, std::vector<StepCurve> exposure, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const std::size_t S = counts.states();
    HazardEstimate est;
    est.epsilon = epsilon;
    est.hazard = StepMatrix(counts.times(), S);
    est.floor_active.assign(S, {});
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < S; ++j) {
            const double at_risk = exposure[j].before_index(i);
            const double denom = std::max(at_risk, epsilon);
            bool any = false;
            for (std::size_t k = 0; k < S; ++k) {
                if (k == j) continue;
                const double dn = counts.jump(i, j, k);
                if (dn == 0.0) continue;
                est.hazard.jump(i, j, k) = dn / denom;
                any = true;
            }
            if (any && at_risk < epsilon) est.floor_active[j].push_back(counts.times()[i]);
        }
    }
    est.hazard.set_generator_diagonal();
    est.exposure = std::move(exposure);
    est.counts = counts;
    return est;
}

HazardEstimate nelson_aalen(const Sample& sample, const WeightVector& w, double epsilon) {
    const auto grid = event_grid(sample);
    StepMatrix counts = estimate_counts(sample, w, grid);
    auto exposure = estimate_exposure(counts, estimate_censoring(sample, w, grid), initial_exposure(sample, w));
    return nelson_aalen(counts, std::move(exposure), epsilon);
}

HazardEstimate nelson_aalen(const Sample& sample, const EvalPoint& x, const KernelSpec& spec,
                            const BandwidthSchedule& schedule, double epsilon) {
    const double a = bandwidth(schedule, sample.size());
    WeightVector w = nw_weights(sample, x, spec, a);
    if (w.degenerate) throw DegenerateError("no kernel mass at x = " + describe(x));
    return nelson_aalen(sample, w, epsilon);
}

Matrix product_integral(const StepMatrix& hazard, double s, double t) {
    if (s > t) throw std::invalid_argument("product_integral: s must not exceed t");
    const std::size_t S = hazard.states();
    Matrix out = Matrix::Identity(S, S);
    const auto& times = hazard.times();
    auto it = std::upper_bound(times.begin(), times.end(), s);
    for (; it != times.end() && *it <= t; ++it) {
        const auto i = static_cast<std::size_t>(it - times.begin());
        out = out * (Matrix::Identity(S, S) + hazard.jump_matrix(i));
    }
    return out;
}

RowVector OccupationEstimate::at(double t) const {
    RowVector p(occupation.size());
    for (std::size_t j = 0; j < occupation.size(); ++j) p(j) = occupation[j].at(t);
    return p;
}

OccupationEstimate aalen_johansen(const StepMatrix& hazard, const std::vector<double>& initial) {
    const std::size_t S = hazard.states();
    if (initial.size() != S) throw std::invalid_argument("aalen_johansen: initial vector has wrong size");
    for (double v : initial)
        if (v < 0.0) throw std::invalid_argument("aalen_johansen: negative initial mass");
    const std::size_t G = hazard.size();
    std::vector<std::vector<double>> values(S, std::vector<double>(G));
    std::vector<double> p = initial, next(S);
    for (std::size_t i = 0; i < G; ++i) {
        next = p;
        for (std::size_t j = 0; j < S; ++j) {
            if (p[j] == 0.0) continue;
            for (std::size_t k = 0; k < S; ++k) {
                if (k == j) continue;
                const double flow = p[j] * hazard.jump(i, j, k);
                if (flow == 0.0) continue;
                next[k] += flow;
                next[j] -= flow;
            }
        }
        p.swap(next);
        for (std::size_t j = 0; j < S; ++j) values[j][i] = p[j];
    }
    OccupationEstimate est;
    est.initial = initial;
    est.occupation.reserve(S);
    for (std::size_t j = 0; j < S; ++j) est.occupation.emplace_back(hazard.times(), std::move(values[j]), initial[j]);
    return est;
}

OccupationEstimate aalen_johansen(const HazardEstimate& hazard, const std::vector<double>& initial) {
    return aalen_johansen(hazard.hazard, initial);
}

std::size_t ConditionalFit::first_index_beyond_theta() const {
    const auto& times = hazard.hazard.times();
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), theta) - times.begin());
}

ConditionalFit fit(const Sample& sample, const EvalPoint& x, const FitOptions& options) {
    return fit(sample, x, options, event_grid(sample));
}

ConditionalFit fit(const Sample& sample, const EvalPoint& x, const FitOptions& options,
                   const std::vector<double>& grid) {
    if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    ConditionalFit f;
    f.x = x;
    BandwidthSchedule schedule{options.eta, x.continuous_dimension(), options.bandwidth};
    f.bandwidth = bandwidth(schedule, sample.size());
    f.weights = nw_weights(sample, x, options.kernel, f.bandwidth);
    if (f.weights.degenerate) throw DegenerateError("no kernel mass at x = " + describe(x));

    StepMatrix counts = estimate_counts(sample, f.weights, grid);
    f.censoring = estimate_censoring(sample, f.weights, grid);
    const auto init = initial_exposure(sample, f.weights);
    f.hazard = nelson_aalen(counts, estimate_exposure(counts, f.censoring, init), options.epsilon);
    f.occupation = aalen_johansen(f.hazard, init);

    if (options.theta) {
        f.theta = *options.theta;
    } else {
        f.theta = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::size_t l = 0; l < sample.size(); ++l) {
            const ObservedPath& p = sample.paths[l];
            if (f.weights.weights[l] > 0.0 && p.end_reason == EndReason::censored) {
                f.theta = std::max(f.theta, p.end_time);
                any = true;
            }
        }
        if (!any) f.theta = std::numeric_limits<double>::infinity();
    }
    return f;
}

}  // namespace condaj
