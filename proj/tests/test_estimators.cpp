#include "doctest.h"

#include <cmath>
#include <limits>

#include "condaj/error.hpp"
#include "condaj/estimators.hpp"
#include "condaj/simulate.hpp"

using namespace condaj;

namespace {

WeightVector uniform_weights(std::size_t n) {
    WeightVector w;
    w.weights.assign(n, 1.0 / static_cast<double>(n));
    w.factors.assign(n, 1.0);
    w.density_value = 1.0;
    w.degenerate = false;
    return w;
}

ObservedPath path(StateLabel z0, std::vector<Jump> jumps, double end, EndReason why, double x = 0.0) {
    ObservedPath p;
    p.covariates = {x};
    p.initial_state = z0;
    p.jumps = std::move(jumps);
    p.end_time = end;
    p.end_reason = why;
    return p;
}

Sample make_sample(StateSpace space, std::vector<ObservedPath> paths) {
    Sample s;
    s.state_space = std::move(space);
    s.paths = std::move(paths);
    for (std::size_t i = 0; i < s.paths.size(); ++i) s.paths[i].id = std::to_string(i + 1);
    return s;
}

// Illness-death toy sample of 4 paths with a censoring tie at 2.
Sample toy_sample() {
    return make_sample(StateSpace({1, 2, 3}, {3}),
                       {path(1, {{0.5, 2}, {1.5, 3}}, 1.5, EndReason::absorbed, 0.1),
                        path(1, {{1.0, 3}}, 1.0, EndReason::absorbed, 0.4),
                        path(1, {{0.8, 2}}, 2.0, EndReason::censored, 0.6),
                        path(1, {}, 2.0, EndReason::censored, 0.3)});
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("event grid is the sorted union of jump and censoring times") {
    CHECK(event_grid(toy_sample()) == std::vector<double>{0.5, 0.8, 1.0, 1.5, 2.0});
}

TEST_CASE("counts: single path") {
    const Sample s = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed)});
    const StepMatrix n = estimate_counts(s, uniform_weights(1));
    CHECK(n.value(0.99, 0, 1) == 0.0);
    CHECK(n.value(1.0, 0, 1) == 1.0);
    CHECK(n.value(5.0, 0, 1) == 1.0);

    const Sample c = make_sample(StateSpace({1, 2}, {2}), {path(1, {}, 0.5, EndReason::censored)});
    const StepMatrix nc = estimate_counts(c, uniform_weights(1));
    CHECK(nc.value(10.0, 0, 1) == 0.0);
}

TEST_CASE("counts: two half-weight paths") {
    const Sample s = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed),
                                                           path(1, {{2.0, 2}}, 2.0, EndReason::absorbed)});
    const StepMatrix n = estimate_counts(s, uniform_weights(2));
    CHECK(n.value(1.0, 0, 1) == 0.5);
    CHECK(n.value(1.5, 0, 1) == 0.5);
    CHECK(n.value(2.0, 0, 1) == 1.0);
}

TEST_CASE("censoring curves") {
    const Sample a = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed)});
    for (const auto& c : estimate_censoring(a, uniform_weights(1))) CHECK(c.at(10.0) == 0.0);

    const Sample b = make_sample(StateSpace({1, 2, 3}, {3}), {path(1, {{1.0, 2}}, 3.0, EndReason::censored)});
    const auto cb = estimate_censoring(b, uniform_weights(1));
    CHECK(cb[1].at(2.99) == 0.0);
    CHECK(cb[1].at(3.0) == 1.0);
    CHECK(cb[0].at(5.0) == 0.0);
    CHECK(cb[2].at(5.0) == 0.0);

    const Sample t = toy_sample();
    const auto ct = estimate_censoring(t, uniform_weights(4));
    CHECK(ct[0].at(2.0) == 0.25);
    CHECK(ct[1].at(2.0) == 0.25);
}

TEST_CASE("exposure: hand examples") {
    const Sample s = make_sample(StateSpace({1, 2}, {2}), {path(1, {}, 3.0, EndReason::censored)});
    const auto w = uniform_weights(1);
    auto e = estimate_exposure(estimate_counts(s, w), estimate_censoring(s, w), initial_exposure(s, w));
    CHECK(e[0].at(0.0) == 1.0);
    CHECK(e[0].at(2.999) == 1.0);
    CHECK(e[0].at(3.0) == 0.0);

    const Sample a = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed)});
    e = estimate_exposure(estimate_counts(a, w), estimate_censoring(a, w), initial_exposure(a, w));
    CHECK(e[0].at(0.5) == 1.0);
    CHECK(e[0].at(1.0) == 0.0);
    CHECK(e[1].at(1.0) == 1.0);
    CHECK(e[1].at(100.0) == 1.0);
}

TEST_CASE("exposure identity matches direct recomputation on a 20-path sample") {
    const Scenario sc = default_scenario();
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 20, 99);
    const KernelSpec spec = KernelSpec::same(1);
    const WeightVector w = nw_weights(s, make_eval_point({0.5}, spec), spec, 0.7);
    const auto grid = event_grid(s);
    const auto e = estimate_exposure(estimate_counts(s, w, grid), estimate_censoring(s, w, grid), initial_exposure(s, w));
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double direct = 0.0;
            for (std::size_t l = 0; l < s.size(); ++l)
                if (s.paths[l].observed_at(grid[g]) && s.state_space.index_of(s.paths[l].state_at(grid[g])) == j)
                    direct += w.weights[l];
            CHECK(std::abs(e[j].values()[g] - direct) <= 1e-12);
        }
}

TEST_CASE("nelson-aalen: hand examples") {
    const Sample one = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed)});
    CHECK(nelson_aalen(one, uniform_weights(1), 0.01).hazard.jump(0, 0, 1) == 1.0);

    const Sample two = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed),
                                                             path(1, {}, 3.0, EndReason::censored)});
    const HazardEstimate h = nelson_aalen(two, uniform_weights(2), 1e-4);
    CHECK(h.hazard.jump(0, 0, 1) == 0.5);
    CHECK(h.hazard.jump(0, 0, 0) == -0.5);
    CHECK(h.floor_active[0].empty());
}

TEST_CASE("nelson-aalen: floor engaged") {
    StepMatrix counts({1.0}, 2);
    counts.jump(0, 0, 1) = 0.005;
    counts.accumulate();
    std::vector<StepCurve> exposure{StepCurve({1.0}, {0.0}, 0.005), StepCurve({1.0}, {0.005}, 0.0)};
    const HazardEstimate h = nelson_aalen(counts, exposure, 0.01);
    CHECK(h.hazard.jump(0, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h.floor_active[0] == std::vector<double>{1.0});
    CHECK(h.floor_active[1].empty());
}

TEST_CASE("nelson-aalen: no kernel mass at x") {
    const Sample s = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed, 0.0)});
    const KernelSpec spec = KernelSpec::same(1);
    CHECK_THROWS_AS(nelson_aalen(s, make_eval_point({5.0}, spec), spec, {0.75, 1, 0.5}, 1e-4), DegenerateError);
}

TEST_CASE("product integral: hand examples") {
    StepMatrix zero({1.0, 2.0}, 2);
    zero.set_generator_diagonal();
    CHECK(product_integral(zero, 0.0, 3.0).isApprox(Matrix::Identity(2, 2)));

    StepMatrix h({1.0}, 2);
    h.jump(0, 0, 1) = 0.5;
    h.set_generator_diagonal();
    Matrix expect(2, 2);
    expect << 0.5, 0.5, 0.0, 1.0;
    CHECK((product_integral(h, 0.0, 2.0) - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK(product_integral(h, 1.0, 2.0) == Matrix::Identity(2, 2));
    CHECK_THROWS(product_integral(h, 2.0, 1.0));
}

TEST_CASE("aalen-johansen: hand examples") {
    StepMatrix h({1.0}, 2);
    h.jump(0, 0, 1) = 1.0;
    h.set_generator_diagonal();
    OccupationEstimate p = aalen_johansen(h, {1.0, 0.0});
    CHECK(p.occupation[0].at(0.99) == 1.0);
    CHECK(p.occupation[0].at(1.0) == 0.0);
    CHECK(p.occupation[1].at(1.0) == 1.0);

    h.jump(0, 0, 1) = 0.5;
    h.set_generator_diagonal();
    p = aalen_johansen(h, {1.0, 0.0});
    CHECK(p.occupation[0].at(3.0) == 0.5);
    CHECK(p.occupation[1].at(3.0) == 0.5);
}

TEST_CASE("aalen-johansen recursion equals initial times the product integral") {
    const Sample s = toy_sample();
    const HazardEstimate h = nelson_aalen(s, uniform_weights(4), 1e-4);
    const std::vector<double> init = initial_exposure(s, uniform_weights(4));
    const OccupationEstimate p = aalen_johansen(h, init);
    RowVector p0(3);
    p0 << init[0], init[1], init[2];
    for (double t : h.hazard.times()) {
        const RowVector ref = p0 * product_integral(h.hazard, 0.0, t);
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(p.occupation[j].at(t) - ref(static_cast<Eigen::Index>(j))) <= 1e-12);
    }
}

TEST_CASE("fit: conservation, range and monotonicity on simulated data") {
    const Scenario sc = default_scenario();
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 400, 3);
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    for (double x : {0.2, 0.5, 0.8}) {
        const ConditionalFit f = fit(s, make_eval_point({x}, o.kernel), o);
        for (std::size_t g = 0; g < f.hazard.hazard.size(); ++g) {
            double total = 0.0;
            for (const auto& c : f.occupation.occupation) {
                total += c.values()[g];
                CHECK(c.values()[g] >= -1e-12);
                CHECK(c.values()[g] <= 1.0 + 1e-12);
            }
            CHECK(std::abs(total - 1.0) <= 1e-12);
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t k = 0; k < 3; ++k)
                    if (j != k) {
                        CHECK(f.hazard.hazard.jump(g, j, k) >= 0.0);
                        CHECK(f.hazard.counts.jump(g, j, k) >= 0.0);
                    }
        }
    }
}

TEST_CASE("fit: smaller epsilon never lowers the cumulative hazard") {
    const Scenario sc = default_scenario();
    const Sample s = simulate_sample(sc.intensity, sc.censoring, 300, 8);
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    o.bandwidth = 0.2;
    const EvalPoint x = make_eval_point({0.9}, o.kernel);
    o.epsilon = 1e-6;
    const ConditionalFit small = fit(s, x, o);
    o.epsilon = 0.05;
    const ConditionalFit large = fit(s, x, o);
    for (std::size_t g = 0; g < small.hazard.hazard.size(); ++g)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                if (j != k) CHECK(small.hazard.hazard.cumulative(g, j, k) >= large.hazard.hazard.cumulative(g, j, k));
}

TEST_CASE("fit: default horizon is the last censoring time with positive weight") {
    const Sample s = toy_sample();
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    o.bandwidth = 10.0;
    ConditionalFit f = fit(s, make_eval_point({0.5}, o.kernel), o);
    CHECK(f.theta == 2.0);
    CHECK(f.first_index_beyond_theta() == 5);
    o.theta = 0.9;
    f = fit(s, make_eval_point({0.5}, o.kernel), o);
    CHECK(f.first_index_beyond_theta() == 2);

    const Sample absorbed = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed)});
    o.theta.reset();
    o.bandwidth = 1.0;
    CHECK(fit(absorbed, make_eval_point({0.0}, o.kernel), o).theta == kInf);
}

TEST_CASE("fit agrees with the brute-force oracle") {
    const KernelSpec spec = KernelSpec::same(1);
    auto compare = [&](const Sample& s, double x, double a, double eps) {
        FitOptions o;
        o.kernel = spec;
        o.bandwidth = a;
        o.epsilon = eps;
        const EvalPoint pt = make_eval_point({x}, spec);
        const ConditionalFit f = fit(s, pt, o);
        const BruteForceResult bf = brute_force_estimator(s, pt, spec, a, eps);
        REQUIRE(f.hazard.hazard.times() == bf.hazard.hazard.times());
        const std::size_t S = s.state_space.size();
        for (std::size_t g = 0; g < f.hazard.hazard.size(); ++g)
            for (std::size_t j = 0; j < S; ++j) {
                CHECK(std::abs(f.occupation.occupation[j].values()[g] - bf.occupation.occupation[j].values()[g]) <= 1e-12);
                CHECK(std::abs(f.hazard.exposure[j].values()[g] - bf.hazard.exposure[j].values()[g]) <= 1e-12);
                for (std::size_t k = 0; k < S; ++k) {
                    CHECK(std::abs(f.hazard.hazard.jump(g, j, k) - bf.hazard.hazard.jump(g, j, k)) <= 1e-12);
                    CHECK(std::abs(f.hazard.counts.cumulative(g, j, k) - bf.hazard.counts.cumulative(g, j, k)) <= 1e-12);
                }
            }
        CHECK(f.hazard.floor_active == bf.hazard.floor_active);
    };
    SUBCASE("one subject") {
        compare(make_sample(StateSpace({1, 2, 3}, {3}), {path(1, {{0.7, 2}, {1.2, 3}}, 1.2, EndReason::absorbed, 0.5)}),
                0.5, 0.5, 1e-4);
    }
    SUBCASE("four-subject survival sample") {
        compare(make_sample(StateSpace({1, 2}, {2}), {path(1, {{0.4, 2}}, 0.4, EndReason::absorbed, 0.1),
                                                      path(1, {}, 0.9, EndReason::censored, 0.3),
                                                      path(1, {{1.3, 2}}, 1.3, EndReason::absorbed, 0.6),
                                                      path(1, {}, 2.0, EndReason::censored, 0.8)}),
                0.5, 0.6, 1e-4);
    }
    SUBCASE("censoring ties and a jump tied with a censoring") {
        compare(make_sample(StateSpace({1, 2, 3}, {3}), {path(1, {{1.0, 2}}, 2.0, EndReason::censored, 0.2),
                                                         path(1, {}, 2.0, EndReason::censored, 0.4),
                                                         path(1, {{2.0, 3}}, 2.0, EndReason::absorbed, 0.5),
                                                         path(1, {{1.0, 3}}, 1.0, EndReason::absorbed, 0.7)}),
                0.5, 0.5, 1e-4);
    }
    SUBCASE("simulated sample") {
        const Scenario sc = default_scenario();
        compare(simulate_sample(sc.intensity, sc.censoring, 10, 42), 0.4, 0.5, 1e-4);
    }
}

TEST_CASE("landmark reduction with an atomic covariate") {
    Sample s = make_sample(StateSpace({1, 2}, {2}), {path(1, {{1.0, 2}}, 1.0, EndReason::absorbed, 0.0),
                                                     path(1, {}, 1.5, EndReason::censored, 0.0),
                                                     path(1, {{2.0, 2}}, 2.0, EndReason::absorbed, 0.0),
                                                     path(1, {{0.5, 2}}, 0.5, EndReason::absorbed, 1.0)});
    FitOptions o;
    o.kernel = KernelSpec::same(1);
    o.kernel.set_atoms(0, {0.0, 1.0});
    const ConditionalFit f = fit(s, make_eval_point({0.0}, o.kernel), o);
    CHECK(f.bandwidth == 1.0);
    // Subsample {X = 0}: 3 at risk at 1 (one event), 1 at risk at 2 (one event).
    CHECK(f.occupation.occupation[0].at(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(f.occupation.occupation[0].at(2.0)) <= 1e-15);
    CHECK(f.occupation.occupation[0].at(0.5) == 1.0);
}
