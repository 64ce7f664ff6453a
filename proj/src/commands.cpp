#include "condaj/commands.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "condaj/check.hpp"
#include "condaj/covariance.hpp"
#include "condaj/error.hpp"
#include "condaj/estimators.hpp"
#include "condaj/io.hpp"
#include "condaj/parallel.hpp"
#include "condaj/simulate.hpp"

namespace condaj {

namespace {

void say(const RunConfig& config, const std::string& line) {
    if (config.message) config.message(line);
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string describe_x(const std::vector<double>& x) {
    std::string s = "x = (";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + shortest(x[i]);
    return s + ")";
}

void require_valid(const RunConfig& config) {
    const auto problems = validate_config(config);
    if (problems.empty()) return;
    std::string msg = problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
    throw ValidationError(msg);
}

struct Prepared {
    Sample sample;
    KernelSpec spec;
    FitOptions options;
    std::vector<EvalPoint> points;
};

Prepared prepare(const RunConfig& config) {
    require_valid(config);
    if (config.input.empty()) throw ValidationError("--input is required");
    if (config.x_points.empty()) throw ValidationError("at least one --x point is required");
    Prepared p;
    p.sample = load_sample(config.input);
    const auto problems = validate(p.sample);
    if (!problems.empty()) throw ValidationError(config.input.string() + ": " + problems.front());
    const std::size_t d = p.sample.dimension();
    p.spec = KernelSpec::same(d, parse_kernel_kind(config.kernel));
    for (const auto& [dim, values] : config.atoms) {
        if (dim >= d)
            throw ValidationError("--atoms names dimension " + std::to_string(dim + 1) + " but the data have " +
                                  std::to_string(d) + " covariates");
        p.spec.set_atoms(dim, values);
    }
    for (const auto& x : config.x_points) {
        if (x.size() != d)
            throw ValidationError(describe_x(x) + " has dimension " + std::to_string(x.size()) +
                                  " but the data have " + std::to_string(d) + " covariates");
        p.points.push_back(make_eval_point(x, p.spec));
    }
    p.options.kernel = p.spec;
    p.options.eta = config.eta;
    p.options.bandwidth = config.bandwidth;
    p.options.epsilon = config.epsilon;
    p.options.theta = config.theta;
    return p;
}

struct PointOutcome {
    std::optional<ConditionalFit> fit;
    std::optional<CovarianceResult> cov;
    std::string degenerate;
};

std::vector<PointOutcome> fit_points(const Prepared& p, const RunConfig& config, bool with_covariance) {
    const std::vector<double> grid = event_grid(p.sample);
    std::vector<PointOutcome> out(p.points.size());
    parallel_for(p.points.size(), config.threads, [&](std::size_t i) {
        try {
            out[i].fit = fit(p.sample, p.points[i], p.options, grid);
            if (with_covariance) out[i].cov = covariance(p.sample, *out[i].fit, p.spec, config.grid);
        } catch (const DegenerateError& e) {
            out[i].degenerate = e.what();
        }
    });
    return out;
}

void warn_fit(const RunConfig& config, const ConditionalFit& f, const StateSpace& states) {
    const std::string where = describe_x(f.x.coords);
    for (std::size_t s = 0; s < f.hazard.floor_active.size(); ++s) {
        const auto& times = f.hazard.floor_active[s];
        if (times.empty()) continue;
        say(config, "warning: " + where + ": epsilon floor active for state " + std::to_string(states.label_at(s)) +
                        " at " + std::to_string(times.size()) + " event time(s), first at t = " +
                        shortest(times.front()));
    }
    const auto& times = f.hazard.hazard.times();
    const std::size_t beyond = times.size() - std::min(times.size(), f.first_index_beyond_theta());
    if (beyond > 0)
        say(config, "warning: " + where + ": " + std::to_string(beyond) + " event time(s) exceed theta = " +
                        shortest(f.theta) + "; estimates there are outside the estimation horizon");
}

void throw_degenerate(const std::vector<PointOutcome>& outcomes) {
    std::string msg;
    for (const auto& o : outcomes)
        if (!o.degenerate.empty()) msg += (msg.empty() ? "" : "; ") + o.degenerate;
    if (!msg.empty()) throw DegenerateError(msg);
}

}  // namespace

std::vector<std::string> validate_config(const RunConfig& config) {
    std::vector<std::string> v;
    if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) v.push_back("epsilon must be positive");
    if (!(config.eta > 0.0 && config.eta < 1.0)) v.push_back("eta must lie in (0, 1)");
    if (config.bandwidth && !(*config.bandwidth > 0.0 && std::isfinite(*config.bandwidth)))
        v.push_back("bandwidth must be positive");
    if (config.theta && !(*config.theta > 0.0)) v.push_back("theta must be positive");
    if (config.grid == 0) v.push_back("grid must be at least 1");
    if (config.threads == 0) v.push_back("threads must be at least 1");
    if (config.n && *config.n == 0) v.push_back("n must be at least 1");
    try {
        parse_kernel_kind(config.kernel);
    } catch (const std::exception& e) {
        v.push_back(e.what());
    }
    return v;
}

std::vector<std::filesystem::path> cmd_simulate(const RunConfig& config) {
    require_valid(config);
    Scenario sc = config.scenario ? load_scenario(*config.scenario) : default_scenario();
    if (config.n) sc.n = *config.n;
    if (config.seed) sc.seed = *config.seed;
    const Sample sample = simulate_sample(sc);
    std::filesystem::create_directories(config.out);
    const auto path = config.out / "sample.csv";
    write_sample(sample, path);
    say(config, "wrote " + std::to_string(sample.size()) + " subjects to " + path.string());
    return {path};
}

std::vector<std::filesystem::path> cmd_fit(const RunConfig& config) {
    const Prepared p = prepare(config);
    const auto outcomes = fit_points(p, config, false);
    std::filesystem::create_directories(config.out);
    std::vector<std::filesystem::path> files;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].fit) continue;
        const ConditionalFit& f = *outcomes[i].fit;
        const std::string stem = "fit_x" + std::to_string(i + 1);
        const StateSpace& states = p.sample.state_space;
        files.push_back(config.out / (stem + "_hazard.csv"));
        write_text(files.back(), fit_hazard_csv(f, states));
        files.push_back(config.out / (stem + "_occupation.csv"));
        write_text(files.back(), fit_occupation_csv(f, states));
        files.push_back(config.out / (stem + ".json"));
        write_text(files.back(), fit_json(f, states));
        warn_fit(config, f, states);
        say(config, describe_x(f.x.coords) + ": bandwidth " + shortest(f.bandwidth) + ", " +
                        std::to_string(f.hazard.hazard.size()) + " event times -> " + stem + "*");
    }
    throw_degenerate(outcomes);
    return files;
}

std::vector<std::filesystem::path> cmd_covariance(const RunConfig& config) {
    const Prepared p = prepare(config);
    const auto outcomes = fit_points(p, config, true);
    std::filesystem::create_directories(config.out);
    std::vector<std::filesystem::path> files;
    const StateSpace& states = p.sample.state_space;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].fit) continue;
        const ConditionalFit& f = *outcomes[i].fit;
        const CovarianceResult& cov = *outcomes[i].cov;
        const std::string stem = "cov_x" + std::to_string(i + 1);
        for (std::size_t q = 0; q < cov.pairs.size(); ++q) {
            const auto [j, k] = cov.pairs[q];
            files.push_back(config.out / (stem + "_hazard_" + std::to_string(states.label_at(j)) + "_" +
                                          std::to_string(states.label_at(k)) + ".csv"));
            write_text(files.back(), surface_csv(cov, true, q));
        }
        for (std::size_t s = 0; s < cov.occupation.size(); ++s) {
            files.push_back(config.out / (stem + "_occupation_" + std::to_string(states.label_at(s)) + ".csv"));
            write_text(files.back(), surface_csv(cov, false, s));
        }
        files.push_back(config.out / (stem + ".json"));
        write_text(files.back(), covariance_json(cov, f, states));
        warn_fit(config, f, states);
        say(config, describe_x(f.x.coords) + ": " + std::to_string(cov.grid.size()) + "-point grid, " +
                        std::to_string(cov.pairs.size()) + " transition type(s) -> " + stem + "*");
    }
    throw_degenerate(outcomes);
    return files;
}

bool cmd_check(const RunConfig& config) {
    require_valid(config);
    CheckOptions opt;
    opt.quick = config.quick;
    if (config.seed) opt.seed = *config.seed;
    opt.threads = config.threads;
    opt.on_result = [&](const CriterionResult& r) { say(config, format_result(r)); };
    const auto results = run_acceptance(opt);
    std::size_t failed = 0, skipped = 0;
    for (const auto& r : results) {
        if (r.skipped) ++skipped;
        else if (!r.passed) ++failed;
    }
    say(config, std::to_string(results.size() - failed - skipped) + " passed, " + std::to_string(failed) +
                    " failed, " + std::to_string(skipped) + " skipped");
    return failed == 0;
}

}  // namespace condaj
