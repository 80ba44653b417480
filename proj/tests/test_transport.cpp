#include "doctest.h"

#include <cmath>

#include "msfem/error.hpp"
#include "msfem/transport.hpp"

using namespace msfem;

TEST_CASE("fluid model closed forms")
{
    const FluidModel m;
    CHECK(m.F(0.5) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(m.eta(0.0) == 0.2);
    CHECK(m.eta(1.0) == 1.0);
    CHECK(m.F(0.0) == 0.0);
    CHECK(m.F(1.0) == 1.0);
    for (int k = 0; k <= 1000; ++k) {
        const double s = k / 1000.0;
        const double eta = s * s + (1 - s) * (1 - s) / 5.0;
        CHECK(std::abs(m.eta(s) - eta) <= 1e-15 * eta);
        CHECK(std::abs(m.F(s) - s * s / eta) <= 1e-15);
        if (k > 0)
            CHECK(m.F(s) > m.F(s - 1e-3));
    }
    // F' against a central difference
    for (double s : {0.1, 0.3, 0.6, 0.9}) {
        const double d = 1e-6;
        CHECK(m.dF(s) == doctest::Approx((m.F(s + d) - m.F(s - d)) / (2 * d)).epsilon(1e-7));
    }
    CHECK(m.max_dF() >= m.dF(0.3));
}

TEST_CASE("time step")
{
    const GridHierarchy g(4, 2);
    const double h = g.h();
    CHECK(cfl_dt(g, Eigen::VectorXd::Zero(g.num_edges()), 0.5) == unbounded_step);

    // uniform unit v.n = 1 in +x: flux unknown h on every vertical edge
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.num_edges());
    for (int e = 0; e < g.num_vertical_edges(); ++e)
        v[e] = h;
    CHECK(cfl_dt(g, v, 0.5) == doctest::Approx(0.5 * h));
    CHECK(cfl_dt(g, v, 0.25) == doctest::Approx(0.25 * h));
    CHECK_THROWS_AS(cfl_dt(g, v, 0.0), ConfigError);
}

TEST_CASE("two-cell upwind step by hand")
{
    // unit v.n from cell (0,0) to cell (1,0), every other face closed
    const GridHierarchy g(4, 2);
    const double h = g.h();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.num_edges());
    v[g.vertical_edge(1, 0)] = h;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(16);
    s[g.cell(0, 0)] = 1.0;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(16);
    const double dt = 0.01;

    const Eigen::VectorXd next = step_single_phase(g, s, v, zero, dt);
    CHECK(next[g.cell(1, 0)] == doctest::Approx(dt * h / (h * h)));
    CHECK(next[g.cell(0, 0)] == doctest::Approx(1.0 - dt * h / (h * h)));
    for (int c = 0; c < 16; ++c)
        if (c != g.cell(0, 0) && c != g.cell(1, 0))
            CHECK(next[c] == 0.0);

    const FluidModel m;
    s[g.cell(0, 0)] = 0.5;
    const Eigen::VectorXd two = step_two_phase(g, s, v, zero, dt, m);
    CHECK(two[g.cell(1, 0)] == doctest::Approx(dt * m.F(0.5) / h));

    // reversed flow takes the other cell as upstream, which is empty
    const Eigen::VectorXd back = step_single_phase(g, s, -v, zero, dt);
    CHECK(back[g.cell(1, 0)] == 0.0);
    CHECK(back[g.cell(0, 0)] == 0.5);
}

TEST_CASE("constant states and balance")
{
    const GridHierarchy g(8, 2);
    const PermField k = synthetic_field(8, 3, 100.0);
    // divergence-free circulation: zero source
    Eigen::VectorXd F = Eigen::VectorXd::Zero(64);
    F[g.cell(0, 7)] = g.cell_area();
    F[g.cell(7, 0)] = -g.cell_area();
    const Eigen::VectorXd v = solve_global(assemble(g, k), F).flux;
    const Eigen::VectorXd rate = corner_rate(g);
    CHECK(rate.sum() == 1.0);
    CHECK(rate[g.cell(0, 7)] == 1.0);

    const double dt = cfl_dt(g, v, 0.5);
    Eigen::VectorXd s = Eigen::VectorXd::Constant(64, 0.3);
    const Eigen::VectorXd after = step_single_phase(g, s, v, Eigen::VectorXd::Zero(64), dt);
    for (int c = 0; c < 64; ++c)
        if (c != g.cell(0, 7) && c != g.cell(7, 0))
            CHECK(after[c] == doctest::Approx(0.3).epsilon(1e-12));

    s.setZero();
    double injected = 0.0;
    for (int n = 0; n < 50; ++n) {
        const Eigen::VectorXd next = step_single_phase(g, s, v, rate, dt);
        CHECK(balance_defect(g, s, next, rate, dt) <= 1e-12);
        // no new extrema away from the source
        CHECK(next.minCoeff() >= -1e-15);
        s = next;
        injected += dt * g.cell_area();
    }
    CHECK(g.cell_area() * s.sum() == doctest::Approx(injected).epsilon(1e-12));
}

TEST_CASE("serial and parallel steps are identical")
{
    const GridHierarchy g(16, 4);
    const Eigen::VectorXd F = corner_source(g);
    const Eigen::VectorXd v = solve_global(assemble(g, synthetic_field(16, 7, 1e4)), F).flux;
    Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(256, 0.0, 1.0);
    const double dt = cfl_dt(g, v, 0.5);
    const FluidModel m;
    CHECK(step_two_phase(g, s, v, corner_rate(g), dt, m, Execution::serial) ==
          step_two_phase(g, s, v, corner_rate(g), dt, m, Execution::parallel));
    CHECK(step_single_phase(g, s, v, corner_rate(g), dt, Execution::serial) ==
          step_single_phase(g, s, v, corner_rate(g), dt, Execution::parallel));
}

TEST_CASE("IMPES loop")
{
    const GridHierarchy g(16, 4);
    const PermField k = synthetic_field(16, 7, 1e4);
    const Eigen::VectorXd F = corner_source(g);
    int solves = 0;
    const VelocitySolver fine = [&](const PermField& mobility) {
        ++solves;
        return solve_global(assemble(g, mobility), F).flux;
    };

    TransportOptions o;
    o.output_times = {2.0, 5.0};
    const TransportResult single = impes_loop(g, k, corner_rate(g), o, fine);
    CHECK(solves == 1);
    CHECK(single.times == std::vector<double>{2.0, 5.0});
    CHECK(single.final_time == 5.0);
    // all injected fluid is stored
    CHECK(g.cell_area() * single.final_saturation.sum() == doctest::Approx(5.0 * g.cell_area()).epsilon(1e-12));
    for (const StepRecord& r : single.log)
        CHECK(r.balance <= 1e-12);

    solves = 0;
    o.mode = TransportMode::two_phase;
    o.output_times = {1e6};
    o.pressure_cadence = 3;
    o.max_steps = 30;
    const TransportResult two = impes_loop(g, k, corner_rate(g), o, fine);
    CHECK(two.log.size() == 30);
    CHECK(solves == 10);
    for (const StepRecord& r : two.log) {
        CHECK(r.min_s >= 0.0);
        CHECK(r.max_s <= 1.0);
    }

    o.cfl = 1.0;
    o.mode = TransportMode::single_phase;
    o.output_times = {0.0};
    CHECK_THROWS_AS(impes_loop(g, k, corner_rate(g), o, fine), ConfigError);
}

TEST_CASE("overshoot is reported")
{
    const GridHierarchy g(4, 2);
    const PermField k = PermField::constant(4, 1.0);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.num_edges());
    v[g.vertical_edge(1, 0)] = 1.0;
    // a velocity that is not divergence free empties cell (0,0) below zero
    const VelocitySolver bad = [&](const PermField&) { return v; };
    TransportOptions o;
    o.cfl = 1.0;
    o.output_times = {10.0};
    Eigen::VectorXd rate = Eigen::VectorXd::Zero(16);
    rate[g.cell(0, 0)] = -1.0;
    CHECK_THROWS_AS(impes_loop(g, k, rate, o, bad), NumericError);
}

TEST_CASE("saturation error")
{
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    CHECK(relative_saturation_error(2.0 * b, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_saturation_error(b, Eigen::VectorXd::Zero(4)), NumericError);
}
