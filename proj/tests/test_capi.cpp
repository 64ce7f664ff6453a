#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "condaj/condaj.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("condaj_capi_" + std::to_string(::getpid()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(cj_version()) == "1.0.0");
    CHECK(std::string(cj_status_name(CJ_OK)) == "ok");
    CHECK(std::string(cj_status_name(CJ_ERR_NO_KERNEL_MASS)) == "no kernel mass");
}

TEST_CASE("null arguments are rejected") {
    CHECK(cj_sample_load(nullptr, nullptr) == CJ_ERR_INVALID_ARGUMENT);
    CHECK(std::string(cj_last_error()).size() > 0);
    cj_sample_free(nullptr);
    cj_fit_free(nullptr);
    cj_options_free(nullptr);
    cj_config_free(nullptr);
}

TEST_CASE("simulate, fit and query through handles") {
    cj_sample* s = nullptr;
    REQUIRE(cj_sample_simulate(nullptr, 300, 5, &s) == CJ_OK);
    CHECK(cj_sample_size(s) == 300);
    CHECK(cj_sample_dimension(s) == 1);
    CHECK(cj_sample_state_count(s) == 3);
    int label = 0;
    CHECK(cj_sample_state_label(s, 2, &label) == CJ_OK);
    CHECK(label == 3);
    CHECK(cj_sample_state_label(s, 3, &label) == CJ_ERR_INVALID_ARGUMENT);

    cj_options* o = nullptr;
    REQUIRE(cj_options_create(&o) == CJ_OK);
    CHECK(cj_options_set_kernel(o, "triangular") == CJ_OK);
    CHECK(cj_options_set_kernel(o, "gaussian") != CJ_OK);
    CHECK(cj_options_set_epsilon(o, -1.0) != CJ_OK);

    const double x = 0.5;
    cj_fit* f = nullptr;
    REQUIRE(cj_fit_compute(s, o, &x, 1, &f) == CJ_OK);
    CHECK(cj_fit_time_count(f) > 0);
    CHECK(cj_fit_state_count(f) == 3);
    CHECK(cj_fit_bandwidth(f) > 0.0);
    std::vector<double> p(3);
    CHECK(cj_fit_occupation(f, 0.0, p.data(), 3) == CJ_OK);
    CHECK(p[0] == doctest::Approx(1.0));
    const double last = cj_fit_times(f)[cj_fit_time_count(f) - 1];
    CHECK(cj_fit_occupation(f, last, p.data(), 3) == CJ_OK);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-12);
    double h = -1.0;
    CHECK(cj_fit_cumulative_hazard(f, last, 1, 2, &h) == CJ_OK);
    CHECK(h > 0.0);
    CHECK(cj_fit_cumulative_hazard(f, last, 1, 9, &h) != CJ_OK);
    std::size_t count = 99;
    CHECK(cj_fit_floor_active_count(f, 1, &count) == CJ_OK);

    TempDir dir;
    CHECK(cj_fit_write(f, dir.path.c_str(), "fit") == CJ_OK);
    CHECK(fs::exists(dir.path / "fit_hazard.csv"));
    CHECK(fs::exists(dir.path / "fit_occupation.csv"));
    CHECK(fs::exists(dir.path / "fit.json"));
    CHECK(cj_fit_write_covariance(s, f, 10, dir.path.c_str(), "cov") == CJ_OK);
    CHECK(cj_sample_write(s, (dir.path / "sample.csv").c_str()) == CJ_OK);

    cj_sample* back = nullptr;
    CHECK(cj_sample_load((dir.path / "sample.csv").c_str(), &back) == CJ_OK);
    CHECK(cj_sample_size(back) == 300);
    cj_sample_free(back);

    const double far = 50.0;
    cj_fit* none = nullptr;
    CHECK(cj_options_set_bandwidth(o, 0.1) == CJ_OK);
    CHECK(cj_fit_compute(s, o, &far, 1, &none) == CJ_ERR_NO_KERNEL_MASS);
    CHECK(none == nullptr);
    const double two[2] = {0.5, 0.5};
    CHECK(cj_fit_compute(s, o, two, 2, &none) != CJ_OK);

    cj_fit_free(f);
    cj_options_free(o);
    cj_sample_free(s);
}

TEST_CASE("parse errors map to status codes") {
    cj_sample* s = nullptr;
    CHECK(cj_sample_parse("id,time,state,end\n1,abc,1,censored\n", &s) == CJ_ERR_PARSE);
    CHECK(s == nullptr);
    CHECK(cj_sample_simulate("{", 10, 1, &s) == CJ_ERR_PARSE);
    CHECK(cj_sample_load("/nonexistent/sample.csv", &s) == CJ_ERR_IO);
}

namespace {
void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }
}  // namespace

TEST_CASE("commands through a config handle") {
    TempDir dir;
    cj_config* c = nullptr;
    REQUIRE(cj_config_create(&c) == CJ_OK);
    std::vector<std::string> messages;
    cj_config_set_message_callback(c, collect, &messages);
    cj_config_set_out(c, dir.path.c_str());
    cj_config_set_n(c, 150);
    cj_config_set_seed(c, 4);
    REQUIRE(cj_cmd_simulate(c) == CJ_OK);
    REQUIRE(fs::exists(dir.path / "sample.csv"));

    cj_config_set_input(c, (dir.path / "sample.csv").c_str());
    const double xs[2] = {0.3, 0.7};
    cj_config_add_x(c, &xs[0], 1);
    cj_config_add_x(c, &xs[1], 1);
    cj_config_set_grid(c, 8);
    CHECK(cj_cmd_fit(c) == CJ_OK);
    CHECK(cj_cmd_covariance(c) == CJ_OK);
    CHECK(fs::exists(dir.path / "fit_x2_occupation.csv"));
    CHECK(fs::exists(dir.path / "cov_x1.json"));
    CHECK(!messages.empty());
    cj_config_free(c);

    cj_config* bad = nullptr;
    REQUIRE(cj_config_create(&bad) == CJ_OK);
    cj_config_set_message_callback(bad, collect, &messages);
    cj_config_set_input(bad, (dir.path / "sample.csv").c_str());
    cj_config_set_out(bad, dir.path.c_str());
    const double far = 40.0;
    cj_config_add_x(bad, &far, 1);
    cj_config_set_bandwidth(bad, 0.2);
    CHECK(cj_cmd_fit(bad) == CJ_ERR_NO_KERNEL_MASS);
    CHECK(cj_config_set_grid(bad, 0) != CJ_OK);
    cj_config_free(bad);
}
