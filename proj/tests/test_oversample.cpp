#include "doctest.h"

#include <cmath>

#include "msfem/error.hpp"
#include "msfem/oversample.hpp"

using namespace msfem;

TEST_CASE("harmonic extension")
{
    const GridHierarchy g(4, 2);
    const std::vector<int> cells{g.cell(0, 0), g.cell(1, 0), g.cell(1, 1)};
    const LocalMixedProblem problem(Region(g, cells), synthetic_field(4, 1, 10.0));
    const Region& r = problem.region();
    const auto nb = static_cast<Eigen::Index>(r.boundary_edges().size());

    const HarmonicExtension zero = harmonic_extension(problem, Eigen::VectorXd::Zero(nb));
    CHECK(zero.c == 0.0);
    CHECK(zero.solution.interior_flux.norm() == 0.0);

    const HarmonicExtension one = harmonic_extension(problem, Eigen::VectorXd::Unit(nb, 2));
    CHECK(one.c == doctest::Approx(0.25 / (3.0 * 0.0625)));
    const Eigen::VectorXd div = problem.interior_divergence() * one.solution.interior_flux +
                                problem.boundary_divergence() * one.solution.boundary_flux;
    for (Eigen::Index c = 0; c < div.size(); ++c)
        CHECK(div[c] == doctest::Approx(one.c * g.cell_area()).epsilon(1e-12));
    CHECK(div.sum() == doctest::Approx(g.h()));

    CHECK_THROWS_AS(harmonic_extension(problem, Eigen::VectorXd::Zero(nb + 1)), ConfigError);
}

TEST_CASE("trace ensemble of a central edge")
{
    const GridHierarchy g(8, 4);
    const CoarseEdge* edge = nullptr;
    for (int id : g.interior_coarse_edges())
        if (g.coarse_edge(id).orientation == Orientation::vertical && g.coarse_edge(id).line == 2 &&
            g.coarse_edge(id).segment == 1)
            edge = &g.coarse_edge(id);
    REQUIRE(edge != nullptr);

    const PermField k = PermField::constant(8, 1.0);
    const TraceEnsemble t = build_trace_ensemble(g, k, *edge, 1);
    CHECK(t.region.count() == 24);
    CHECK(t.traces.rows() == 2);
    CHECK(t.traces.cols() == 2 * (6 + 4));
    CHECK(t.weight == g.h());

    // linearity: the all-ones extension is the sum of the indicator ones
    const Region omega(g, t.region);
    const LocalMixedProblem problem(omega, k);
    const HarmonicExtension ones =
        harmonic_extension(problem, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(omega.boundary_edges().size())));
    for (int j = 0; j < 2; ++j) {
        const double trace = ones.solution.interior_flux[omega.local_interior_edge(edge->fine_edges[static_cast<std::size_t>(j)])] / g.h();
        CHECK(trace == doctest::Approx(t.traces.row(j).sum()).epsilon(1e-10));
    }

    // reflection y -> 6h - y maps the region onto itself and E_i onto itself
    auto mirror = [&](int e) {
        const FineEdge f = g.edge(e);
        return f.orientation == Orientation::vertical ? g.vertical_edge(f.i, 5 - f.j)
                                                      : g.horizontal_edge(f.i, 6 - f.j);
    };
    const auto& b = omega.boundary_edges();
    for (std::size_t col = 0; col < b.size(); ++col) {
        const int m = omega.local_boundary_edge(mirror(b[col]));
        REQUIRE(m >= 0);
        CHECK(t.traces(0, static_cast<Eigen::Index>(col)) == doctest::Approx(t.traces(1, m)).epsilon(1e-10));
    }

    CHECK_THROWS_AS(build_trace_ensemble(g, k, g.coarse_edge(0), 1), ConfigError);
}

TEST_CASE("POD")
{
    TraceEnsemble rank1;
    rank1.weight = 0.25;
    const Eigen::Vector3d shape(1.0, 2.0, -1.0);
    rank1.traces = shape * Eigen::RowVector4d(1.0, -3.0, 0.5, 2.0);
    const PodModes one = pod(rank1);
    CHECK(one.rank == 1);
    CHECK(one.sigma[1] <= 1e-12 * one.sigma[0]);
    CHECK_THROWS_AS(one.leading(2), NumericError);
    CHECK(one.truncation_energy(1) == doctest::Approx(0.0).epsilon(1e-14));

    const GridHierarchy g(8, 2);
    const TraceEnsemble t = build_trace_ensemble(g, synthetic_field(8, 3, 1e3),
                                                 g.coarse_edge(g.interior_coarse_edges()[0]), 2);
    const PodModes m = pod(t);
    const Eigen::MatrixXd gram = t.weight * m.modes.transpose() * m.modes;
    CHECK((gram - Eigen::MatrixXd::Identity(m.rank, m.rank)).norm() < 1e-12);
    const Eigen::MatrixXd rebuilt = m.modes * (t.weight * m.modes.transpose() * t.traces);
    CHECK(std::sqrt(t.weight) * (rebuilt - t.traces).norm() <= 1e-12 * std::sqrt(t.weight) * t.traces.norm());
    for (Eigen::Index k = 1; k < m.sigma.size(); ++k)
        CHECK(m.sigma[k] <= m.sigma[k - 1]);
    CHECK(m.truncation_energy(m.rank) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.truncation_energy(0) == 1.0);
}

TEST_CASE("synthesized fields carry the modes as traces")
{
    const GridHierarchy g(8, 2);
    const PermField k = synthetic_field(8, 3, 1e3);
    const BlockSolvers blocks(g, k);
    const CoarseEdge& e = g.coarse_edge(g.interior_coarse_edges()[2]);
    const PodModes m = pod(build_trace_ensemble(g, k, e, 2));
    const EdgeBasis b = synthesize_basis(blocks, e, m.leading(3));
    CHECK((edge_traces(g, b) - m.leading(3)).norm() < 1e-12);
    CHECK(b.support == g.neighborhood(e));
}

TEST_CASE("oversampling study")
{
    const GridHierarchy g(16, 4);
    const PermField k = periodic_field(16, 0.25);
    std::vector<double> values(16, 0.0);
    values[12] = 1.0;
    values[3] = -1.0;
    const OversamplingStudy s(g, k, block_source(g, values));
    CHECK(s.run_case(3, 4).E_os_v <= 1e-10);
    for (int c = 1; c <= 4; ++c) {
        const ErrorReport r = s.run_case(c, 2);
        CHECK(r.E_of_v > 0.0);
        CHECK(r.E_of_v < 1.0);
    }
    CHECK_THROWS_AS(s.run_case(2, 4), ConfigError);
    CHECK_THROWS_AS(s.run_case(5, 1), ConfigError);

    OversamplingStudy::Options serial;
    serial.exec = Execution::serial;
    const OversamplingStudy t(g, k, block_source(g, values), serial);
    for (std::size_t i = 0; i < s.modes().size(); ++i)
        CHECK(s.modes()[i].modes == t.modes()[i].modes);
    CHECK(s.run_case(1, 2).E_of_v == t.run_case(1, 2).E_of_v);
}
