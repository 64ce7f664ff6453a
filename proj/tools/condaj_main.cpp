#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "condaj/condaj.h"

namespace {

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
            throw CLI::ValidationError("bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("empty list");
    return out;
}

void print_line(const char* line, void*) {
    const std::string s(line);
    std::FILE* stream = s.rfind("warning:", 0) == 0 || s.rfind("error:", 0) == 0 ? stderr : stdout;
    std::fprintf(stream, "%s\n", line);
    std::fflush(stream);
}

struct Flags {
    std::string input, out = ".", kernel = "epanechnikov", scenario;
    std::vector<std::string> x, atoms;
    double eta = 0.75, epsilon = 1e-4;
    std::optional<double> bandwidth, theta;
    std::size_t grid = 50, threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    bool quick = false;
};

int exit_code(cj_status status) {
    if (status == CJ_OK) return 0;
    if (status != CJ_ERR_CHECK_FAILED) std::fprintf(stderr, "error: %s\n", cj_last_error());
    return status == CJ_ERR_NO_KERNEL_MASS ? 2 : 1;
}

int run(const std::string& command, const Flags& f) {
    cj_config* cfg = nullptr;
    if (cj_config_create(&cfg) != CJ_OK) return exit_code(CJ_ERR_INTERNAL);
    const std::unique_ptr<cj_config, decltype(&cj_config_free)> owner(cfg, cj_config_free);
    cj_config_set_message_callback(cfg, print_line, nullptr);
    if (!f.input.empty()) cj_config_set_input(cfg, f.input.c_str());
    cj_config_set_out(cfg, f.out.c_str());
    for (const auto& x : f.x) {
        const auto v = parse_list(x);
        cj_config_add_x(cfg, v.data(), v.size());
    }
    for (const auto& a : f.atoms) {
        const auto colon = a.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--atoms expects DIM:v1,v2,... (DIM from 1)");
        const int dim = std::stoi(a.substr(0, colon));
        if (dim < 1) throw CLI::ValidationError("--atoms dimension counts from 1");
        const auto v = parse_list(a.substr(colon + 1));
        cj_config_add_atoms(cfg, static_cast<std::size_t>(dim - 1), v.data(), v.size());
    }
    cj_config_set_kernel(cfg, f.kernel.c_str());
    cj_config_set_eta(cfg, f.eta);
    cj_config_set_epsilon(cfg, f.epsilon);
    if (f.bandwidth) cj_config_set_bandwidth(cfg, *f.bandwidth);
    if (f.theta) cj_config_set_theta(cfg, *f.theta);
    cj_config_set_grid(cfg, f.grid);
    if (f.seed) cj_config_set_seed(cfg, *f.seed);
    cj_config_set_threads(cfg, f.threads);
    if (!f.scenario.empty()) cj_config_set_scenario(cfg, f.scenario.c_str());
    if (f.n) cj_config_set_n(cfg, *f.n);
    cj_config_set_quick(cfg, f.quick);

    cj_status status = CJ_OK;
    if (command == "simulate") status = cj_cmd_simulate(cfg);
    else if (command == "fit") status = cj_cmd_fit(cfg);
    else if (command == "covariance") status = cj_cmd_covariance(cfg);
    else status = cj_cmd_check(cfg);
    return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional Nelson-Aalen and Aalen-Johansen estimation for multi-state data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cj_version());
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", f.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", f.seed, "Random seed");
        sub->add_option("--threads", f.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto estimation = [&](CLI::App* sub) {
        sub->add_option("--input", f.input, "Long-format sample CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--x", f.x, "Evaluation point, comma-separated coordinates (repeatable)")->required();
        sub->add_option("--atoms", f.atoms, "Declared atoms DIM:v1,v2,... with DIM counted from 1 (repeatable)");
        sub->add_option("--kernel", f.kernel, "Kernel")
            ->capture_default_str()
            ->check(CLI::IsMember({"epanechnikov", "triangular", "uniform"}));
        sub->add_option("--eta", f.eta, "Bandwidth schedule exponent in (0, 1)")->capture_default_str();
        sub->add_option("--bandwidth", f.bandwidth, "Fixed bandwidth, overrides the schedule");
        sub->add_option("--epsilon", f.epsilon, "Exposure floor")->capture_default_str();
        sub->add_option("--theta", f.theta, "Estimation horizon");
        common(sub);
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate a sample from a scenario");
    simulate->add_option("--scenario", f.scenario, "Scenario JSON (default: illness-death)")->check(CLI::ExistingFile);
    simulate->add_option("--n", f.n, "Number of subjects")->check(CLI::PositiveNumber);
    common(simulate);

    auto* fit = app.add_subcommand("fit", "Fit hazards and occupation probabilities at each x");
    estimation(fit);

    auto* cov = app.add_subcommand("covariance", "Plug-in covariance surfaces at each x");
    estimation(cov);
    cov->add_option("--grid", f.grid, "Quantile grid size")->capture_default_str()->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "Run the acceptance suite");
    check->add_flag("--quick", f.quick, "Skip the long Monte Carlo criteria");
    check->add_option("--seed", f.seed, "Random seed");
    check->add_option("--threads", f.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, f);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
