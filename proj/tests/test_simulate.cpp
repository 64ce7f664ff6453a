#include "doctest.h"

#include <cmath>
#include <set>

#include "condaj/error.hpp"
#include "condaj/simulate.hpp"

using namespace condaj;

namespace {

Scenario illness_death(const std::string& kind, const std::string& r12, const std::string& r13,
                       const std::string& r23, const std::string& censoring) {
    return parse_scenario(R"json({"kind": ")json" + kind + R"json(", "states": [1, 2, 3], "initial": 1,
        "transitions": [{"from": 1, "to": 2, "rate": ")json" + r12 + R"json("},
                        {"from": 1, "to": 3, "rate": ")json" + r13 + R"json("},
                        {"from": 2, "to": 3, "rate": ")json" + r23 + R"json("}],
        "covariates": [{"type": "discrete", "values": [0.5], "probs": [1]}],
        "censoring": )json" + censoring + "}");
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("rng: range, determinism and exponential mean") {
    Rng a(7, 3), b(7, 3), c(7, 4);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform());
        differs = differs || u != c.uniform();
    }
    CHECK(differs);
    Rng e(1, 0);
    double mean = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) mean += e.exponential(2.0) / m;
    CHECK(std::abs(mean - 0.5) < 4 * 0.5 / std::sqrt(m));
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
    CHECK(derive_seed(5, 1) == derive_seed(5, 1));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(5, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(5, 0) != derive_seed(6, 0));
}

TEST_CASE("zero rates: every path is censored at R in its initial state") {
    const Scenario sc = illness_death("markov", "0", "0", "0", R"json({"type": "exponential", "rate": 1})json");
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 200, 4);
    CHECK(validate(s).empty());
    for (std::size_t l = 0; l < s.size(); ++l) {
        const ObservedPath& p = s.paths[l];
        CHECK(p.jumps.empty());
        CHECK(p.end_reason == EndReason::censored);
        Rng rng(4, l);
        const auto x = sc.intensity.covariate_law.draw(rng);
        CHECK(p.end_time == sc.censoring.draw(rng, x));
    }
}

TEST_CASE("very fast rates: every path is absorbed before R") {
    const Scenario sc = parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 2, "rate": 1000}],
        "censoring": {"type": "fixed", "value": 10}})json");
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 300, 9);
    CHECK(validate(s).empty());
    for (const auto& p : s.paths) {
        REQUIRE(p.jumps.size() == 1);
        CHECK(p.end_reason == EndReason::absorbed);
        CHECK(p.end_time == p.jumps[0].time);
        CHECK(p.end_time < 10.0);
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    const Scenario sc = default_scenario();
    CHECK(simulate_sample(sc.intensity, sc.censoring, 100, 3) == simulate_sample(sc.intensity, sc.censoring, 100, 3));
    CHECK(!(simulate_sample(sc.intensity, sc.censoring, 100, 3) == simulate_sample(sc.intensity, sc.censoring, 100, 4)));
    // A prefix of a larger sample is the smaller sample.
    const Sample big = simulate_sample(sc.intensity, sc.censoring, 150, 3);
    const Sample small = simulate_sample(sc.intensity, sc.censoring, 100, 3);
    for (std::size_t l = 0; l < 100; ++l) CHECK(big.paths[l] == small.paths[l]);
}

TEST_CASE("time-varying rates simulate valid paths") {
    const Scenario sc = illness_death("markov", "0.5 + 0.5 * t", "0.2", "1 / (1 + t)",
                                      R"json({"type": "exponential", "rate": 0.3})json");
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 300, 2);
    CHECK(validate(s).empty());
}

TEST_CASE("negative rates are rejected") {
    const Scenario sc = parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 2, "rate": "x - 2"}],
        "covariates": [{"type": "uniform"}], "censoring": {"type": "exponential", "rate": 1}})json");
    CHECK_THROWS_AS(simulate_sample(sc.intensity, sc.censoring, 10, 1), ValidationError);
    const std::vector<double> x{0.5};
    CHECK_THROWS_AS(markov_occupation_oracle(sc.intensity, x, {1.0}), ValidationError);
}

TEST_CASE("oracle: survival with constant rate") {
    const Scenario sc = parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 2, "rate": 1}],
        "censoring": {"type": "fixed", "value": 1}})json");
    const std::vector<double> grid{0.0, 0.5, 1.0, 3.0};
    const OraclePath o = markov_occupation_oracle(sc.intensity, {}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(o.occupation(static_cast<Eigen::Index>(i), 0) - std::exp(-grid[i])) <= 1e-12);
        CHECK(std::abs(o.occupation.row(static_cast<Eigen::Index>(i)).sum() - 1.0) <= 1e-9);
    }
}

TEST_CASE("oracle: zero generator keeps the initial law") {
    const Scenario sc = illness_death("markov", "0", "0", "0", R"json({"type": "fixed", "value": 1})json");
    const OraclePath o = markov_occupation_oracle(sc.intensity, std::vector<double>{0.5}, {0.0, 1.0, 10.0});
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(o.occupation(i, 0) == 1.0);
        CHECK(o.occupation(i, 1) == 0.0);
    }
}

TEST_CASE("oracle: time-varying rates against a fine product integral") {
    const Scenario sc = illness_death("markov", "0.5 + 0.5 * t", "0.2 * exp(-t)", "1 / (1 + t)",
                                      R"json({"type": "fixed", "value": 1})json");
    const std::vector<double> x{0.5};
    const std::vector<double> grid{0.25, 1.0, 2.0};
    const OraclePath o = markov_occupation_oracle(sc.intensity, x, grid);
    const double h = 1e-5;
    RowVector p = sc.intensity.initial_distribution();
    double t = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto steps = static_cast<long>(std::llround((grid[g] - t) / h));
        for (long i = 0; i < steps; ++i) {
            const Matrix qh = sc.intensity.generator(t + (i + 0.5) * h, x) * h;
            p = p + p * qh + p * qh * qh / 2.0;
        }
        t = grid[g];
        CHECK(std::abs(o.occupation.row(static_cast<Eigen::Index>(g)).sum() - 1.0) <= 1e-9);
        CHECK((o.occupation.row(static_cast<Eigen::Index>(g)) - p).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("semi-markov machinery reproduces the markov law when rates ignore duration") {
    const Scenario sc = illness_death("semi_markov", "0.4 * (1 + x) + 0 * duration", "0.2 * (1 + x)",
                                      "0.5 * (1 + x) + 0 * duration", R"json({"type": "fixed", "value": 50})json");
    CHECK(!sc.intensity.time_homogeneous());
    const std::size_t m = 10000;
    const Sample s = simulate_sample(sc.intensity, sc.censoring, m, 21);
    Scenario markov = illness_death("markov", "0.4 * (1 + x)", "0.2 * (1 + x)", "0.5 * (1 + x)",
                                    R"json({"type": "fixed", "value": 50})json");
    const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
    const OraclePath o = markov_occupation_oracle(markov.intensity, std::vector<double>{0.5}, grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t j = 0; j < 3; ++j) {
            double hits = 0.0;
            for (const auto& p : s.paths) hits += s.state_space.index_of(p.state_at(grid[g])) == j ? 1.0 : 0.0;
            const double truth = o.occupation(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j));
            const double se = std::sqrt(std::max(truth * (1 - truth), 1e-12) / static_cast<double>(m));
            CHECK(std::abs(hits / static_cast<double>(m) - truth) <= 3.5 * se + 1e-12);
        }
}

TEST_CASE("censoring is drawn independently of the jump process") {
    const Scenario sc = default_scenario();
    CensoringSpec far;
    far.kind = CensoringSpec::Kind::uniform;
    far.low = 1e6;
    far.high = 1e6 + 1;
    const std::size_t m = 3000;
    const Sample observed = simulate_sample(sc.intensity, sc.censoring, m, 77);
    const Sample full = simulate_sample(sc.intensity, far, m, 77);
    std::vector<double> r, tau;
    for (std::size_t l = 0; l < m; ++l) {
        Rng rng(77, l);
        const auto x = sc.intensity.covariate_law.draw(rng);
        const double rl = sc.censoring.draw(rng, x);
        REQUIRE(full.paths[l].end_reason == EndReason::absorbed);
        const double tl = full.paths[l].end_time;
        r.push_back(rl);
        tau.push_back(tl);
        // The observed path is the full path stopped at min(R, tau).
        CHECK(observed.paths[l].end_time == std::min(rl, tl));
        CHECK(observed.paths[l].covariates == full.paths[l].covariates);
        for (const Jump& jp : observed.paths[l].jumps) CHECK(full.paths[l].state_at(jp.time) == jp.to_state);
    }
    CHECK(std::abs(correlation(r, tau)) < 3.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("scenario parsing errors") {
    CHECK_THROWS_AS(parse_scenario("{"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"json({"states": [1, 2], "transitions": []})json"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"json({"kind": "markov", "states": [1, 2],
        "transitions": [{"from": 1, "to": 2, "rate": "duration"}], "censoring": {"type": "fixed", "value": 1}})json"),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 2, "rate": "x2"}],
        "covariates": [{"type": "uniform"}], "censoring": {"type": "fixed", "value": 1}})json"),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 3, "rate": 1}],
        "censoring": {"type": "fixed", "value": 1}})json"),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(R"json({"states": [1, 2], "transitions": [{"from": 1, "to": 2, "rate": 1}],
        "censoring": {"type": "exponential", "rate": "t"}})json"),
                    ParseError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("scenario defaults and covariate laws") {
    const Scenario sc = parse_scenario(R"json({"states": [1, 2, 3], "transitions": [{"from": 1, "to": 2, "rate": 1}],
        "initial": {"1": 0.25, "2": 0.75},
        "covariates": [{"type": "uniform", "low": 2, "high": 3, "atoms": [0], "atom_probs": [0.5]}],
        "censoring": {"type": "fixed", "value": 1}})json");
    CHECK(sc.intensity.states.absorbing() == std::vector<StateLabel>{2, 3});
    CHECK(sc.n == 500);
    const RowVector p0 = sc.intensity.initial_distribution();
    CHECK(p0(0) == 0.25);
    CHECK(p0(1) == 0.75);
    Rng rng(1, 1);
    int atoms = 0;
    for (int i = 0; i < 4000; ++i) {
        const double v = sc.intensity.covariate_law.draw(rng)[0];
        if (v == 0.0) ++atoms;
        else CHECK((v >= 2.0 && v <= 3.0));
    }
    CHECK(std::abs(atoms / 4000.0 - 0.5) < 4 * std::sqrt(0.25 / 4000.0));
}
