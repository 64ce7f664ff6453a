#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "condaj/covariance.hpp"
#include "condaj/error.hpp"
#include "condaj/expr.hpp"
#include "condaj/io.hpp"
#include "condaj/simulate.hpp"
#include "json.hpp"

using namespace condaj;

namespace {

ConditionalFit small_fit(Sample& s) {
    const Scenario sc = default_scenario();
    s = simulate_sample(sc.intensity, sc.censoring, 80, 12);
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    o.bandwidth = 0.4;
    return fit(s, make_eval_point({0.5}, o.kernel), o);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("format_number round-trips doubles") {
    for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e-7, 0.9999999999999999})
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("expressions: grammar and variables") {
    const std::vector<double> x{2.0, 5.0};
    auto eval = [&](const std::string& s, double t = 0.0, double d = 0.0) {
        return Expression::parse(s).eval({t, d, x});
    };
    CHECK(eval("1 + 2 * 3") == 7.0);
    CHECK(eval("(1 + 2) * 3") == 9.0);
    CHECK(eval("2 ^ 3") == 8.0);
    CHECK(eval("-x + x2") == 3.0);
    CHECK(eval("x1 / 4") == 0.5);
    CHECK(eval("t * duration", 3.0, 4.0) == 12.0);
    CHECK(eval("exp(0) + log(1) + sqrt(9) + abs(-2)") == 6.0);
    CHECK(eval("min(1, 2) + max(1, 2) + pow(2, 5)") == 35.0);
    CHECK(eval("1e-3 * 1000") == doctest::Approx(1.0));

    const Expression e = Expression::parse("0.5 * t + x3 + 0 * duration");
    CHECK(e.uses_time());
    CHECK(e.uses_duration());
    CHECK(e.max_covariate() == 3);
    CHECK(Expression::constant(2.5).eval({}) == 2.5);
    CHECK(!Expression::constant(2.5).uses_time());
}

TEST_CASE("expressions: malformed input") {
    for (const char* bad : {"", "1 +", "(1", "foo", "sin(1)", "min(1)", "x0", "1 2", "2 * * 3"})
        CHECK_THROWS_AS(Expression::parse(bad), ParseError);
    CHECK_THROWS(Expression::parse("x2").eval({0.0, 0.0, std::vector<double>{1.0}}));
}

TEST_CASE("fit CSV outputs") {
    Sample s;
    const ConditionalFit f = small_fit(s);
    const auto hz = lines(fit_hazard_csv(f, s.state_space));
    CHECK(hz.front() == "time,quantity,j,k,value");
    CHECK(hz[1].rfind("0,cumulative_hazard,", 0) == 0);
    const auto occ = lines(fit_occupation_csv(f, s.state_space));
    CHECK(occ.front() == "time,j,value");
    CHECK(occ.size() == 1 + 3 * (f.hazard.hazard.size() + 1));
    CHECK(occ[1] == "0,1," + format_number(f.occupation.occupation[0].initial_value()));
    const std::string last = occ.back();
    const std::string expect_tail = format_number(f.occupation.occupation[2].values().back());
    CHECK(last.substr(last.size() - expect_tail.size()) == expect_tail);
}

TEST_CASE("fit JSON carries exact values") {
    Sample s;
    const ConditionalFit f = small_fit(s);
    const auto j = nlohmann::json::parse(fit_json(f, s.state_space));
    CHECK(j.at("bandwidth").get<double>() == f.bandwidth);
    CHECK(j.at("epsilon").get<double>() == 1e-4);
    CHECK(j.at("times").get<std::vector<double>>() == f.hazard.hazard.times());
    CHECK(j.at("occupation")[1].at("values").get<std::vector<double>>() == f.occupation.occupation[1].values());
    CHECK(j.at("first_index_beyond_theta").get<std::size_t>() == f.first_index_beyond_theta());
    CHECK(j.at("floor_active").size() == 3);
    CHECK(j.at("states").get<std::vector<int>>() == std::vector<int>{1, 2, 3});
}

TEST_CASE("infinite horizon is written as null") {
    Sample s;
    s.state_space = StateSpace({1, 2}, {2});
    ObservedPath p;
    p.id = "a";
    p.covariates = {0.0};
    p.initial_state = 1;
    p.jumps = {{1.0, 2}};
    p.end_time = 1.0;
    p.end_reason = EndReason::absorbed;
    s.paths = {p};
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    o.bandwidth = 1.0;
    const ConditionalFit f = fit(s, make_eval_point({0.0}, o.kernel), o);
    CHECK(f.theta == std::numeric_limits<double>::infinity());
    CHECK(nlohmann::json::parse(fit_json(f, s.state_space)).at("theta").is_null());
}

TEST_CASE("covariance outputs") {
    Sample s;
    const ConditionalFit f = small_fit(s);
    const CovarianceResult cov = covariance(s, f, KernelSpec::same(1), 5);
    const auto rows = lines(surface_csv(cov, true, 0));
    CHECK(rows.front() == "s,t,value");
    CHECK(rows.size() == 1 + cov.grid.size() * cov.grid.size());
    const auto j = nlohmann::json::parse(covariance_json(cov, f, s.state_space));
    CHECK(j.at("phi").get<double>() == cov.phi);
    CHECK(j.at("grid").get<std::vector<double>>() == cov.grid);
}

TEST_CASE("write_text reports unwritable paths") {
    CHECK_THROWS_AS(write_text("/nonexistent/dir/file.txt", "x"), IoError);
}
