#include "condaj/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "condaj/error.hpp"
#include "condaj/io.hpp"
#include "json.hpp"

namespace condaj {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::size_t kMaxJumpsPerPath = 1'000'000;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
    double e = 0.0;
    while (e == 0.0) e = -std::log1p(-uniform());
    return e / rate;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ull));
}

std::vector<double> CovariateLaw::draw(Rng& rng) const {
    std::vector<double> x;
    x.reserve(dims.size());
    for (const CovariateDim& d : dims) {
        double u = rng.uniform(), cum = 0.0;
        bool hit = false;
        for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            cum += d.atom_probs[i];
            if (u < cum) {
                x.push_back(d.atoms[i]);
                hit = true;
                break;
            }
        }
        if (!hit) x.push_back(d.low + (d.high - d.low) * rng.uniform());
    }
    return x;
}

double IntensitySpec::rate(StateLabel from, StateLabel to, double t, double duration,
                           std::span<const double> x) const {
    double total = 0.0;
    const double dur = kind == ProcessKind::markov ? 0.0 : duration;
    for (const TransitionRate& r : rates) {
        if (r.from != from || r.to != to) continue;
        const double v = r.rate.eval({t, dur, x});
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("rate " + std::to_string(from) + "->" + std::to_string(to) + " ('" +
                                  r.rate.text() + "') evaluated to " + format_number(v));
        total += v;
    }
    return total;
}

bool IntensitySpec::time_homogeneous() const {
    return std::none_of(rates.begin(), rates.end(),
                        [](const TransitionRate& r) { return r.rate.uses_time() || r.rate.uses_duration(); });
}

Matrix IntensitySpec::generator(double t, std::span<const double> x) const {
    const std::size_t S = states.size();
    Matrix q = Matrix::Zero(S, S);
    for (std::size_t j = 0; j < S; ++j)
        for (std::size_t k = 0; k < S; ++k)
            if (j != k) q(j, k) = rate(states.label_at(j), states.label_at(k), t, 0.0, x);
    for (std::size_t j = 0; j < S; ++j) q(j, j) = -(q.row(j).sum() - q(j, j));
    return q;
}

RowVector IntensitySpec::initial_distribution() const {
    RowVector p = RowVector::Zero(static_cast<Eigen::Index>(states.size()));
    for (auto [label, prob] : initial) p(static_cast<Eigen::Index>(states.index_of(label))) += prob;
    return p;
}

double CensoringSpec::draw(Rng& rng, std::span<const double> x) const {
    switch (kind) {
        case Kind::exponential: {
            const double r = rate.eval({0.0, 0.0, x});
            if (!(r > 0.0) || !std::isfinite(r))
                throw ValidationError("censoring rate must be positive, got " + format_number(r));
            return rng.exponential(r);
        }
        case Kind::uniform: {
            double v = 0.0;
            while (!(v > 0.0)) v = low + (high - low) * rng.uniform();
            return v;
        }
        case Kind::fixed: return value;
    }
    return value;
}

ObservedPath simulate_path(const IntensitySpec& intensity, const CensoringSpec& censoring, Rng& rng) {
    const StateSpace& space = intensity.states;
    ObservedPath p;
    p.covariates = intensity.covariate_law.draw(rng);
    const double horizon = censoring.draw(rng, p.covariates);

    {
        double u = rng.uniform(), cum = 0.0;
        p.initial_state = intensity.initial.back().first;
        for (auto [label, prob] : intensity.initial) {
            cum += prob;
            if (u < cum) {
                p.initial_state = label;
                break;
            }
        }
    }

    std::map<StateLabel, std::vector<StateLabel>> targets;
    for (const TransitionRate& r : intensity.rates) targets[r.from].push_back(r.to);
    for (auto& [from, to] : targets) {
        std::sort(to.begin(), to.end());
        to.erase(std::unique(to.begin(), to.end()), to.end());
    }
    const bool homogeneous = intensity.time_homogeneous();
    const std::span<const double> x(p.covariates);

    StateLabel state = p.initial_state;
    double t = 0.0, entry = 0.0;
    std::vector<double> rates;
    auto total_rate = [&](const std::vector<StateLabel>& to, double at) {
        rates.resize(to.size());
        double total = 0.0;
        for (std::size_t i = 0; i < to.size(); ++i) {
            rates[i] = intensity.rate(state, to[i], at, at - entry, x);
            total += rates[i];
        }
        return total;
    };
    auto pick = [&](double total) {
        double u = rng.uniform() * total, cum = 0.0;
        const auto& to = targets[state];
        for (std::size_t i = 0; i < to.size(); ++i) {
            cum += rates[i];
            if (u < cum && rates[i] > 0.0) return to[i];
        }
        for (std::size_t i = to.size(); i-- > 0;)
            if (rates[i] > 0.0) return to[i];
        return to.back();
    };

    for (;;) {
        auto it = targets.find(state);
        if (it == targets.end() || it->second.empty()) {
            if (space.is_absorbing(state) && !p.jumps.empty()) {
                p.end_reason = EndReason::absorbed;
                p.end_time = t;
            } else {
                p.end_reason = EndReason::censored;
                p.end_time = horizon;
            }
            return p;
        }
        const auto& to = it->second;
        double next = 0.0;
        if (homogeneous) {
            const double total = total_rate(to, t);
            if (total == 0.0) next = horizon + 1.0;
            else next = t + rng.exponential(total);
            if (next <= horizon) {
                total_rate(to, next);
            }
        } else {
            // Thinning against a piecewise-constant majorant, one window at a time.
            double u = t;
            const double window = intensity.majorant_window;
            for (;;) {
                const double end = u + window;
                double bound = 0.0;
                for (int k = 0; k <= 8; ++k) bound = std::max(bound, total_rate(to, u + window * k / 8.0));
                bound *= 1.25;
                if (bound == 0.0) {
                    u = end;
                    if (u >= horizon) break;
                    continue;
                }
                const double cand = u + rng.exponential(bound);
                if (cand > end) {
                    u = end;
                    if (u >= horizon) break;
                    continue;
                }
                if (cand > horizon) break;
                const double total = total_rate(to, cand);
                if (total > bound)
                    throw ValidationError("thinning majorant violated at t = " + format_number(cand) +
                                          "; rates vary too fast for the majorant window");
                if (rng.uniform() * bound < total) {
                    next = cand;
                    break;
                }
                u = cand;
            }
            if (next == 0.0) next = horizon + 1.0;
        }
        if (next > horizon) {
            p.end_reason = EndReason::censored;
            p.end_time = horizon;
            return p;
        }
        double total = 0.0;
        for (double r : rates) total += r;
        const StateLabel dest = pick(total);
        p.jumps.push_back({next, dest});
        if (p.jumps.size() > kMaxJumpsPerPath) throw ValidationError("path exceeded the jump limit; rates explode");
        state = dest;
        t = next;
        entry = next;
    }
}

Sample simulate_sample(const IntensitySpec& intensity, const CensoringSpec& censoring, std::size_t n,
                       std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("simulate_sample: n must be at least 1");
    Sample s;
    s.state_space = intensity.states;
    s.paths.reserve(n);
    for (std::size_t l = 0; l < n; ++l) {
        Rng rng(seed, l);
        ObservedPath p = simulate_path(intensity, censoring, rng);
        p.id = std::to_string(l + 1);
        s.paths.push_back(std::move(p));
    }
    return s;
}

Sample simulate_sample(const Scenario& scenario) {
    return simulate_sample(scenario.intensity, scenario.censoring, scenario.n, scenario.seed);
}

namespace {

Expression expression_field(const nlohmann::json& j) {
    if (j.is_number()) return Expression::constant(j.get<double>());
    if (j.is_string()) return Expression::parse(j.get<std::string>());
    throw ParseError("rate must be a number or an expression string");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    try {
        Scenario sc;
        IntensitySpec& in = sc.intensity;
        const std::string kind = j.value("kind", std::string("markov"));
        if (kind == "markov") in.kind = ProcessKind::markov;
        else if (kind == "semi_markov") in.kind = ProcessKind::semi_markov;
        else throw ParseError("scenario: unknown kind '" + kind + "'");

        const auto states = j.at("states").get<std::vector<StateLabel>>();
        for (const auto& t : j.at("transitions")) {
            TransitionRate r{t.at("from").get<StateLabel>(), t.at("to").get<StateLabel>(),
                             expression_field(t.at("rate"))};
            if (r.from == r.to) throw ParseError("scenario: transition from a state to itself");
            if (in.kind == ProcessKind::markov && r.rate.uses_duration())
                throw ParseError("scenario: markov rates cannot depend on duration");
            in.rates.push_back(std::move(r));
        }
        std::vector<StateLabel> absorbing;
        if (j.contains("absorbing")) {
            absorbing = j.at("absorbing").get<std::vector<StateLabel>>();
        } else {
            for (StateLabel s : states)
                if (std::none_of(in.rates.begin(), in.rates.end(), [&](const TransitionRate& r) { return r.from == s; }))
                    absorbing.push_back(s);
        }
        in.states = StateSpace(states, absorbing);
        for (const auto& r : in.rates)
            if (!in.states.contains(r.from) || !in.states.contains(r.to))
                throw ParseError("scenario: transition uses an undeclared state");

        if (!j.contains("initial")) {
            in.initial = {{in.states.label_at(0), 1.0}};
        } else if (j.at("initial").is_number_integer()) {
            in.initial = {{j.at("initial").get<StateLabel>(), 1.0}};
        } else {
            double total = 0.0;
            for (auto& [key, val] : j.at("initial").items()) {
                in.initial.emplace_back(std::stoi(key), val.get<double>());
                total += val.get<double>();
            }
            if (std::abs(total - 1.0) > 1e-12) throw ParseError("scenario: initial probabilities must sum to 1");
        }
        for (auto [label, prob] : in.initial)
            if (!in.states.contains(label) || prob < 0.0) throw ParseError("scenario: bad initial law");

        if (j.contains("covariates")) {
            for (const auto& c : j.at("covariates")) {
                CovariateDim d;
                const std::string type = c.value("type", std::string("uniform"));
                if (type == "uniform") {
                    d.low = c.value("low", 0.0);
                    d.high = c.value("high", 1.0);
                    if (c.contains("atoms")) {
                        d.atoms = c.at("atoms").get<std::vector<double>>();
                        d.atom_probs = c.at("atom_probs").get<std::vector<double>>();
                    }
                } else if (type == "discrete") {
                    d.atoms = c.at("values").get<std::vector<double>>();
                    d.atom_probs = c.at("probs").get<std::vector<double>>();
                    double total = 0.0;
                    for (double p : d.atom_probs) total += p;
                    if (std::abs(total - 1.0) > 1e-12) throw ParseError("scenario: discrete probs must sum to 1");
                } else {
                    throw ParseError("scenario: unknown covariate type '" + type + "'");
                }
                if (d.atoms.size() != d.atom_probs.size()) throw ParseError("scenario: atoms/atom_probs mismatch");
                if (!(d.high >= d.low)) throw ParseError("scenario: covariate range is empty");
                in.covariate_law.dims.push_back(std::move(d));
            }
        }
        for (const auto& r : in.rates)
            if (r.rate.max_covariate() > in.covariate_law.dims.size())
                throw ParseError("scenario: rate '" + r.rate.text() + "' uses a covariate that is not declared");

        const auto& c = j.at("censoring");
        const std::string ctype = c.value("type", std::string("exponential"));
        if (ctype == "exponential") {
            sc.censoring.kind = CensoringSpec::Kind::exponential;
            sc.censoring.rate = expression_field(c.at("rate"));
            if (sc.censoring.rate.uses_time() || sc.censoring.rate.uses_duration())
                throw ParseError("scenario: censoring rate may depend on x only");
        } else if (ctype == "uniform") {
            sc.censoring.kind = CensoringSpec::Kind::uniform;
            sc.censoring.low = c.at("low").get<double>();
            sc.censoring.high = c.at("high").get<double>();
            if (sc.censoring.low < 0.0 || !(sc.censoring.high > sc.censoring.low))
                throw ParseError("scenario: censoring uniform range must satisfy 0 <= low < high");
        } else if (ctype == "fixed") {
            sc.censoring.kind = CensoringSpec::Kind::fixed;
            sc.censoring.value = c.at("value").get<double>();
            if (!(sc.censoring.value > 0.0)) throw ParseError("scenario: fixed censoring time must be positive");
        } else {
            throw ParseError("scenario: unknown censoring type '" + ctype + "'");
        }
        in.majorant_window = j.value("majorant_window", 0.25);
        if (!(in.majorant_window > 0.0)) throw ParseError("scenario: majorant_window must be positive");
        sc.n = j.value("n", std::size_t{500});
        sc.seed = j.value("seed", std::uint64_t{1});
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

Scenario default_scenario() {
    return parse_scenario(R"json({
        "kind": "markov",
        "states": [1, 2, 3],
        "initial": 1,
        "transitions": [
            {"from": 1, "to": 2, "rate": "0.4 * (1 + x)"},
            {"from": 1, "to": 3, "rate": "0.2 * (1 + x)"},
            {"from": 2, "to": 3, "rate": "0.5 * (1 + x)"}
        ],
        "covariates": [{"type": "uniform", "low": 0, "high": 1}],
        "censoring": {"type": "exponential", "rate": 0.3},
        "n": 500,
        "seed": 1
    })json");
}

Scenario survival_scenario() {
    return parse_scenario(R"json({
        "kind": "markov",
        "states": [1, 2],
        "initial": 1,
        "transitions": [{"from": 1, "to": 2, "rate": "1 + x"}],
        "covariates": [{"type": "uniform", "low": 0, "high": 1}],
        "censoring": {"type": "exponential", "rate": 0.3},
        "n": 200,
        "seed": 1
    })json");
}

OraclePath markov_occupation_oracle(const IntensitySpec& intensity, std::span<const double> x,
                                    const std::vector<double>& grid) {
    if (intensity.kind != ProcessKind::markov) throw std::invalid_argument("occupation oracle needs a markov intensity");
    const auto S = static_cast<Eigen::Index>(intensity.states.size());
    OraclePath out;
    out.grid = grid;
    out.occupation = Matrix(static_cast<Eigen::Index>(grid.size()), S);
    const RowVector p0 = intensity.initial_distribution();

    if (intensity.time_homogeneous()) {
        const Matrix q = intensity.generator(0.0, x);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Matrix m = (grid[i] * q).exp();
            out.occupation.row(static_cast<Eigen::Index>(i)) = p0 * m;
        }
        return out;
    }

    auto deriv = [&](double t, const RowVector& p) -> RowVector { return p * intensity.generator(t, x); };
    auto rk4 = [&](double t, const RowVector& p, double h) -> RowVector {
        const RowVector k1 = deriv(t, p);
        const RowVector k2 = deriv(t + h / 2, p + h / 2 * k1);
        const RowVector k3 = deriv(t + h / 2, p + h / 2 * k2);
        const RowVector k4 = deriv(t + h, p + h * k3);
        return p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    constexpr double tol = 1e-12;
    RowVector p = p0;
    double t = 0.0, h = 1e-2;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < t) throw std::invalid_argument("oracle grid must be nondecreasing and nonnegative");
        while (t < grid[i]) {
            const double step = std::min(h, grid[i] - t);
            const RowVector full = rk4(t, p, step);
            const RowVector half = rk4(t + step / 2, rk4(t, p, step / 2), step / 2);
            const double err = (half - full).cwiseAbs().maxCoeff();
            if (err <= tol || step < 1e-9) {
                p = half + (half - full) / 15.0;
                t = step == grid[i] - t ? grid[i] : t + step;
            }
            const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0);
            h = step * factor;
        }
        out.occupation.row(static_cast<Eigen::Index>(i)) = p;
    }
    return out;
}

BruteForceResult brute_force_estimator(const Sample& sample, const EvalPoint& x, const KernelSpec& spec, double a,
                                       double epsilon) {
    const std::size_t n = sample.size();
    const std::size_t S = sample.state_space.size();
    const auto& labels = sample.state_space.states();
    auto idx = [&](StateLabel s) {
        return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), s) - labels.begin());
    };

    BruteForceResult res;
    WeightVector& w = res.weights;
    w.factors.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        double f = 1.0;
        for (std::size_t i = 0; i < x.coords.size(); ++i) {
            const double xi = x.coords[i], vi = sample.paths[l].covariates[i];
            const auto& atoms = spec.atoms[i];
            if (x.atom_flags[i]) {
                f *= (vi == xi) ? 1.0 : 0.0;
                continue;
            }
            if (std::find(atoms.begin(), atoms.end(), vi) != atoms.end()) {
                f = 0.0;
                continue;
            }
            const double u = (xi - vi) / a;
            double k = 0.0;
            if (u >= -1.0 && u <= 1.0) {
                switch (spec.kinds[i]) {
                    case KernelKind::epanechnikov: k = 3.0 / 4.0 * (1.0 - u * u); break;
                    case KernelKind::triangular: k = u < 0 ? 1.0 + u : 1.0 - u; break;
                    case KernelKind::uniform: k = 1.0 / 2.0; break;
                }
            }
            f *= k / a;
        }
        w.factors[l] = f;
        total += f;
    }
    w.density_value = total / static_cast<double>(n);
    w.degenerate = !(total > 0.0);
    w.weights.assign(n, 0.0);
    if (w.degenerate) throw DegenerateError("no kernel mass at x");
    for (std::size_t l = 0; l < n; ++l) w.weights[l] = w.factors[l] / total;

    std::set<double> time_set;
    for (const auto& p : sample.paths) {
        for (const auto& jmp : p.jumps) time_set.insert(jmp.time);
        if (p.end_reason == EndReason::censored) time_set.insert(p.end_time);
    }
    const std::vector<double> times(time_set.begin(), time_set.end());
    const std::size_t G = times.size();

    // Z_t (left = false) or Z_{t-} (left = true), read off the raw jump list.
    auto state_of = [](const ObservedPath& p, double t, bool left) {
        StateLabel s = p.initial_state;
        for (const auto& jmp : p.jumps)
            if (left ? jmp.time < t : jmp.time <= t) s = jmp.to_state;
        return s;
    };
    auto exposure_at = [&](std::size_t j, double t, bool left) {
        double e = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const auto& p = sample.paths[l];
            const bool observed = p.end_reason == EndReason::absorbed || (left ? t <= p.end_time : t < p.end_time);
            if (observed && idx(state_of(p, t, left)) == j) e += w.weights[l];
        }
        return e;
    };

    std::vector<double> init(S, 0.0);
    for (std::size_t l = 0; l < n; ++l) init[idx(sample.paths[l].initial_state)] += w.weights[l];

    HazardEstimate& hz = res.hazard;
    hz.epsilon = epsilon;
    hz.counts = StepMatrix(times, S);
    hz.hazard = StepMatrix(times, S);
    hz.floor_active.assign(S, {});
    std::vector<std::vector<double>> exposure(S, std::vector<double>(G));
    for (std::size_t g = 0; g < G; ++g) {
        const double t = times[g];
        for (std::size_t l = 0; l < n; ++l) {
            const auto& p = sample.paths[l];
            StateLabel prev = p.initial_state;
            for (const auto& jmp : p.jumps) {
                if (jmp.time == t) hz.counts.jump(g, idx(prev), idx(jmp.to_state)) += w.weights[l];
                prev = jmp.to_state;
            }
        }
        for (std::size_t j = 0; j < S; ++j) {
            exposure[j][g] = exposure_at(j, t, false);
            const double left = exposure_at(j, t, true);
            bool any = false;
            for (std::size_t k = 0; k < S; ++k) {
                if (k == j || hz.counts.jump(g, j, k) == 0.0) continue;
                hz.hazard.jump(g, j, k) = hz.counts.jump(g, j, k) / std::max(left, epsilon);
                any = true;
            }
            if (any && left < epsilon) hz.floor_active[j].push_back(t);
        }
    }
    hz.counts.accumulate();
    hz.hazard.set_generator_diagonal();
    for (std::size_t j = 0; j < S; ++j) hz.exposure.emplace_back(times, exposure[j], init[j]);

    RowVector p0(static_cast<Eigen::Index>(S));
    for (std::size_t j = 0; j < S; ++j) p0(static_cast<Eigen::Index>(j)) = init[j];
    std::vector<std::vector<double>> occ(S, std::vector<double>(G));
    for (std::size_t g = 0; g < G; ++g) {
        Matrix prod = Matrix::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
        for (std::size_t u = 0; u <= g; ++u) {
            Matrix step = Matrix::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
            for (std::size_t j = 0; j < S; ++j)
                for (std::size_t k = 0; k < S; ++k) step(j, k) += hz.hazard.jump(u, j, k);
            prod = prod * step;
        }
        const RowVector pt = p0 * prod;
        for (std::size_t j = 0; j < S; ++j) occ[j][g] = pt(static_cast<Eigen::Index>(j));
    }
    res.occupation.initial = init;
    for (std::size_t j = 0; j < S; ++j) res.occupation.occupation.emplace_back(times, occ[j], init[j]);
    return res;
}

}  // namespace condaj
