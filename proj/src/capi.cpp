#include "condaj/condaj.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "condaj/commands.hpp"
#include "condaj/covariance.hpp"
#include "condaj/error.hpp"
#include "condaj/estimators.hpp"
#include "condaj/io.hpp"
#include "condaj/simulate.hpp"

struct cj_sample {
    condaj::Sample sample;
};

struct cj_options {
    std::string kernel = "epanechnikov";
    double eta = 0.75;
    std::optional<double> bandwidth;
    double epsilon = 1e-4;
    std::optional<double> theta;
    std::map<std::size_t, std::vector<double>> atoms;
};

struct cj_fit {
    condaj::ConditionalFit fit;
    condaj::StateSpace states;
    condaj::KernelSpec spec;
};

struct cj_config {
    condaj::RunConfig config;
    cj_message_fn fn = nullptr;
    void* user = nullptr;
};

namespace {

thread_local std::string last_error;

cj_status fail(cj_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <class F>
cj_status guard(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const condaj::DegenerateError& e) {
        return fail(CJ_ERR_NO_KERNEL_MASS, e.what());
    } catch (const condaj::ParseError& e) {
        return fail(CJ_ERR_PARSE, e.what());
    } catch (const condaj::ValidationError& e) {
        return fail(CJ_ERR_VALIDATION, e.what());
    } catch (const condaj::IoError& e) {
        return fail(CJ_ERR_IO, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(CJ_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(CJ_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CJ_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CJ_ERR_INTERNAL, e.what());
    }
}

#define CJ_REQUIRE(cond)                                                   \
    do {                                                                   \
        if (!(cond)) return fail(CJ_ERR_INVALID_ARGUMENT, "null argument"); \
    } while (0)

condaj::RunConfig with_sink(const cj_config* c) {
    condaj::RunConfig cfg = c->config;
    if (c->fn) {
        cj_message_fn fn = c->fn;
        void* user = c->user;
        cfg.message = [fn, user](const std::string& line) { fn(line.c_str(), user); };
    }
    return cfg;
}

}  // namespace

extern "C" {

const char* cj_last_error(void) { return last_error.c_str(); }

const char* cj_version(void) { return "1.0.0"; }

const char* cj_status_name(cj_status status) {
    switch (status) {
        case CJ_OK: return "ok";
        case CJ_ERR_INVALID_ARGUMENT: return "invalid argument";
        case CJ_ERR_NO_KERNEL_MASS: return "no kernel mass";
        case CJ_ERR_PARSE: return "parse error";
        case CJ_ERR_VALIDATION: return "validation error";
        case CJ_ERR_IO: return "i/o error";
        case CJ_ERR_CHECK_FAILED: return "check failed";
        case CJ_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

cj_status cj_sample_load(const char* path, cj_sample** out) {
    CJ_REQUIRE(path && out);
    return guard([&] {
        auto s = std::make_unique<cj_sample>();
        s->sample = condaj::load_sample(path);
        const auto problems = condaj::validate(s->sample);
        if (!problems.empty()) throw condaj::ValidationError(problems.front());
        *out = s.release();
        return CJ_OK;
    });
}

cj_status cj_sample_parse(const char* csv_text, cj_sample** out) {
    CJ_REQUIRE(csv_text && out);
    return guard([&] {
        auto s = std::make_unique<cj_sample>();
        s->sample = condaj::parse_sample(csv_text);
        const auto problems = condaj::validate(s->sample);
        if (!problems.empty()) throw condaj::ValidationError(problems.front());
        *out = s.release();
        return CJ_OK;
    });
}

cj_status cj_sample_simulate(const char* scenario_json, size_t n, uint64_t seed, cj_sample** out) {
    CJ_REQUIRE(out);
    return guard([&] {
        condaj::Scenario sc = scenario_json ? condaj::parse_scenario(scenario_json) : condaj::default_scenario();
        if (n > 0) sc.n = n;
        sc.seed = seed;
        auto s = std::make_unique<cj_sample>();
        s->sample = condaj::simulate_sample(sc);
        *out = s.release();
        return CJ_OK;
    });
}

cj_status cj_sample_write(const cj_sample* sample, const char* path) {
    CJ_REQUIRE(sample && path);
    return guard([&] {
        condaj::write_sample(sample->sample, path);
        return CJ_OK;
    });
}

size_t cj_sample_size(const cj_sample* sample) { return sample ? sample->sample.size() : 0; }

size_t cj_sample_dimension(const cj_sample* sample) { return sample ? sample->sample.dimension() : 0; }

size_t cj_sample_state_count(const cj_sample* sample) { return sample ? sample->sample.state_space.size() : 0; }

cj_status cj_sample_state_label(const cj_sample* sample, size_t index, int* out) {
    CJ_REQUIRE(sample && out);
    if (index >= sample->sample.state_space.size()) return fail(CJ_ERR_INVALID_ARGUMENT, "state index out of range");
    *out = sample->sample.state_space.label_at(index);
    return CJ_OK;
}

void cj_sample_free(cj_sample* sample) { delete sample; }

cj_status cj_options_create(cj_options** out) {
    CJ_REQUIRE(out);
    return guard([&] {
        *out = new cj_options();
        return CJ_OK;
    });
}

cj_status cj_options_set_kernel(cj_options* options, const char* name) {
    CJ_REQUIRE(options && name);
    return guard([&] {
        condaj::parse_kernel_kind(name);
        options->kernel = name;
        return CJ_OK;
    });
}

cj_status cj_options_set_eta(cj_options* options, double eta) {
    CJ_REQUIRE(options);
    if (!(eta > 0.0 && eta < 1.0)) return fail(CJ_ERR_INVALID_ARGUMENT, "eta must lie in (0, 1)");
    options->eta = eta;
    return CJ_OK;
}

cj_status cj_options_set_bandwidth(cj_options* options, double a) {
    CJ_REQUIRE(options);
    if (a > 0.0 && std::isfinite(a)) options->bandwidth = a;
    else options->bandwidth.reset();
    return CJ_OK;
}

cj_status cj_options_set_epsilon(cj_options* options, double epsilon) {
    CJ_REQUIRE(options);
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) return fail(CJ_ERR_INVALID_ARGUMENT, "epsilon must be positive");
    options->epsilon = epsilon;
    return CJ_OK;
}

cj_status cj_options_set_theta(cj_options* options, double theta) {
    CJ_REQUIRE(options);
    if (theta > 0.0) options->theta = theta;
    else options->theta.reset();
    return CJ_OK;
}

cj_status cj_options_set_atoms(cj_options* options, size_t dim, const double* values, size_t count) {
    CJ_REQUIRE(options && (values || count == 0));
    return guard([&] {
        options->atoms[dim].assign(values, values + count);
        return CJ_OK;
    });
}

void cj_options_free(cj_options* options) { delete options; }

cj_status cj_fit_compute(const cj_sample* sample, const cj_options* options, const double* x, size_t dim,
                         cj_fit** out) {
    CJ_REQUIRE(sample && x && out);
    return guard([&] {
        const cj_options defaults;
        const cj_options& o = options ? *options : defaults;
        const std::size_t d = sample->sample.dimension();
        if (dim != d)
            throw condaj::ValidationError("x has dimension " + std::to_string(dim) + " but the data have " +
                                          std::to_string(d) + " covariates");
        auto f = std::make_unique<cj_fit>();
        f->spec = condaj::KernelSpec::same(d, condaj::parse_kernel_kind(o.kernel));
        for (const auto& [i, values] : o.atoms) {
            if (i >= d) throw condaj::ValidationError("atoms declared for a missing dimension");
            f->spec.set_atoms(i, values);
        }
        condaj::FitOptions fo;
        fo.kernel = f->spec;
        fo.eta = o.eta;
        fo.bandwidth = o.bandwidth;
        fo.epsilon = o.epsilon;
        fo.theta = o.theta;
        f->fit = condaj::fit(sample->sample, condaj::make_eval_point({x, x + dim}, f->spec), fo);
        f->states = sample->sample.state_space;
        *out = f.release();
        return CJ_OK;
    });
}

size_t cj_fit_time_count(const cj_fit* fit) { return fit ? fit->fit.hazard.hazard.size() : 0; }

const double* cj_fit_times(const cj_fit* fit) { return fit ? fit->fit.hazard.hazard.times().data() : nullptr; }

double cj_fit_bandwidth(const cj_fit* fit) { return fit ? fit->fit.bandwidth : NAN; }

double cj_fit_theta(const cj_fit* fit) { return fit ? fit->fit.theta : NAN; }

size_t cj_fit_state_count(const cj_fit* fit) { return fit ? fit->states.size() : 0; }

cj_status cj_fit_occupation(const cj_fit* fit, double t, double* out, size_t states) {
    CJ_REQUIRE(fit && out);
    if (states != fit->states.size()) return fail(CJ_ERR_INVALID_ARGUMENT, "output length must equal the state count");
    const condaj::RowVector p = fit->fit.occupation.at(t);
    for (size_t j = 0; j < states; ++j) out[j] = p(static_cast<Eigen::Index>(j));
    return CJ_OK;
}

cj_status cj_fit_cumulative_hazard(const cj_fit* fit, double t, int from, int to, double* out) {
    CJ_REQUIRE(fit && out);
    return guard([&] {
        *out = fit->fit.hazard.hazard.value(t, fit->states.index_of(from), fit->states.index_of(to));
        return CJ_OK;
    });
}

cj_status cj_fit_floor_active_count(const cj_fit* fit, int state, size_t* out) {
    CJ_REQUIRE(fit && out);
    return guard([&] {
        *out = fit->fit.hazard.floor_active.at(fit->states.index_of(state)).size();
        return CJ_OK;
    });
}

cj_status cj_fit_write(const cj_fit* fit, const char* dir, const char* stem) {
    CJ_REQUIRE(fit && dir && stem);
    return guard([&] {
        const std::filesystem::path d(dir);
        std::filesystem::create_directories(d);
        condaj::write_text(d / (std::string(stem) + "_hazard.csv"), condaj::fit_hazard_csv(fit->fit, fit->states));
        condaj::write_text(d / (std::string(stem) + "_occupation.csv"),
                           condaj::fit_occupation_csv(fit->fit, fit->states));
        condaj::write_text(d / (std::string(stem) + ".json"), condaj::fit_json(fit->fit, fit->states));
        return CJ_OK;
    });
}

cj_status cj_fit_write_covariance(const cj_sample* sample, const cj_fit* fit, size_t grid_size, const char* dir,
                                  const char* stem) {
    CJ_REQUIRE(sample && fit && dir && stem);
    if (grid_size == 0) return fail(CJ_ERR_INVALID_ARGUMENT, "grid size must be at least 1");
    return guard([&] {
        if (sample->sample.size() != fit->fit.weights.weights.size())
            throw condaj::ValidationError("fit was computed on a different sample");
        const condaj::CovarianceResult cov = condaj::covariance(sample->sample, fit->fit, fit->spec, grid_size);
        const std::filesystem::path d(dir);
        std::filesystem::create_directories(d);
        const auto& states = fit->states;
        for (std::size_t q = 0; q < cov.pairs.size(); ++q)
            condaj::write_text(d / (std::string(stem) + "_hazard_" + std::to_string(states.label_at(cov.pairs[q].first)) +
                                    "_" + std::to_string(states.label_at(cov.pairs[q].second)) + ".csv"),
                               condaj::surface_csv(cov, true, q));
        for (std::size_t s = 0; s < cov.occupation.size(); ++s)
            condaj::write_text(d / (std::string(stem) + "_occupation_" + std::to_string(states.label_at(s)) + ".csv"),
                               condaj::surface_csv(cov, false, s));
        condaj::write_text(d / (std::string(stem) + ".json"), condaj::covariance_json(cov, fit->fit, states));
        return CJ_OK;
    });
}

void cj_fit_free(cj_fit* fit) { delete fit; }

cj_status cj_config_create(cj_config** out) {
    CJ_REQUIRE(out);
    return guard([&] {
        *out = new cj_config();
        return CJ_OK;
    });
}

cj_status cj_config_set_input(cj_config* config, const char* path) {
    CJ_REQUIRE(config && path);
    config->config.input = path;
    return CJ_OK;
}

cj_status cj_config_set_out(cj_config* config, const char* dir) {
    CJ_REQUIRE(config && dir);
    config->config.out = dir;
    return CJ_OK;
}

cj_status cj_config_add_x(cj_config* config, const double* x, size_t dim) {
    CJ_REQUIRE(config && x && dim > 0);
    config->config.x_points.emplace_back(x, x + dim);
    return CJ_OK;
}

cj_status cj_config_add_atoms(cj_config* config, size_t dim, const double* values, size_t count) {
    CJ_REQUIRE(config && (values || count == 0));
    config->config.atoms.emplace_back(dim, std::vector<double>(values, values + count));
    return CJ_OK;
}

cj_status cj_config_set_kernel(cj_config* config, const char* name) {
    CJ_REQUIRE(config && name);
    config->config.kernel = name;
    return CJ_OK;
}

cj_status cj_config_set_eta(cj_config* config, double eta) {
    CJ_REQUIRE(config);
    config->config.eta = eta;
    return CJ_OK;
}

cj_status cj_config_set_bandwidth(cj_config* config, double a) {
    CJ_REQUIRE(config);
    config->config.bandwidth = a;
    return CJ_OK;
}

cj_status cj_config_set_epsilon(cj_config* config, double epsilon) {
    CJ_REQUIRE(config);
    config->config.epsilon = epsilon;
    return CJ_OK;
}

cj_status cj_config_set_theta(cj_config* config, double theta) {
    CJ_REQUIRE(config);
    config->config.theta = theta;
    return CJ_OK;
}

cj_status cj_config_set_grid(cj_config* config, size_t grid) {
    CJ_REQUIRE(config);
    if (grid == 0) return fail(CJ_ERR_INVALID_ARGUMENT, "grid size must be at least 1");
    config->config.grid = grid;
    return CJ_OK;
}

cj_status cj_config_set_seed(cj_config* config, uint64_t seed) {
    CJ_REQUIRE(config);
    config->config.seed = seed;
    return CJ_OK;
}

cj_status cj_config_set_threads(cj_config* config, size_t threads) {
    CJ_REQUIRE(config);
    if (threads == 0) return fail(CJ_ERR_INVALID_ARGUMENT, "threads must be at least 1");
    config->config.threads = threads;
    return CJ_OK;
}

cj_status cj_config_set_scenario(cj_config* config, const char* path) {
    CJ_REQUIRE(config && path);
    config->config.scenario = path;
    return CJ_OK;
}

cj_status cj_config_set_n(cj_config* config, size_t n) {
    CJ_REQUIRE(config);
    config->config.n = n;
    return CJ_OK;
}

cj_status cj_config_set_quick(cj_config* config, int quick) {
    CJ_REQUIRE(config);
    config->config.quick = quick != 0;
    return CJ_OK;
}

cj_status cj_config_set_message_callback(cj_config* config, cj_message_fn fn, void* user) {
    CJ_REQUIRE(config);
    config->fn = fn;
    config->user = user;
    return CJ_OK;
}

void cj_config_free(cj_config* config) { delete config; }

cj_status cj_cmd_simulate(const cj_config* config) {
    CJ_REQUIRE(config);
    return guard([&] {
        condaj::cmd_simulate(with_sink(config));
        return CJ_OK;
    });
}

cj_status cj_cmd_fit(const cj_config* config) {
    CJ_REQUIRE(config);
    return guard([&] {
        condaj::cmd_fit(with_sink(config));
        return CJ_OK;
    });
}

cj_status cj_cmd_covariance(const cj_config* config) {
    CJ_REQUIRE(config);
    return guard([&] {
        condaj::cmd_covariance(with_sink(config));
        return CJ_OK;
    });
}

cj_status cj_cmd_check(const cj_config* config) {
    CJ_REQUIRE(config);
    return guard([&] {
        if (condaj::cmd_check(with_sink(config))) return CJ_OK;
        return fail(CJ_ERR_CHECK_FAILED, "one or more acceptance criteria failed");
    });
}

}  // extern "C"
