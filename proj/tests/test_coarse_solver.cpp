#include "doctest.h"

#include <cmath>

#include "msfem/coarse_solver.hpp"
#include "msfem/error.hpp"
#include "msfem/snapshot.hpp"
#include "msfem/spectral.hpp"

using namespace msfem;

namespace {

Eigen::VectorXd blockwise(const GridHierarchy& g)
{
    std::vector<double> v(static_cast<std::size_t>(g.num_blocks()));
    for (int K = 0; K < g.num_blocks(); ++K)
        v[static_cast<std::size_t>(K)] = std::sin(1.0 + 2.3 * K);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x -= mean;
    return block_source(g, v);
}

} // namespace

TEST_CASE("prolongation")
{
    const GridHierarchy g(8, 2);
    const SparseMatrix G = prolongation(g);
    CHECK(G.rows() == 64);
    CHECK(G.cols() == 4);
    const Eigen::VectorXd counts = Eigen::MatrixXd(G).colwise().sum().transpose();
    CHECK((counts.array() == 16.0).all());
    CHECK(G.coeff(g.cell(5, 6), 3) == 1.0);
}

TEST_CASE("snapshot space reproduces the fine solution for blockwise sources")
{
    const GridHierarchy g(16, 4);
    const PermField k = synthetic_field(16, 7, 1e4);
    const SaddleSystem s = assemble(g, k);
    const BlockSolvers blocks(g, k);
    const SparseMatrix R = assemble_coefficients(g, build_snapshot_space(blocks).blocks);
    const Eigen::VectorXd F = blockwise(g);

    const CoarseSolution c = solve_coarse(s, R, F);
    const MixedSolution fine = solve_global(s, F);
    CHECK(relative_velocity_error(s, c.fine.flux, fine.flux) <= 1e-10);
    CHECK(coarse_conservation_residual(s, c.fine.flux, F) <= 1e-10 * F.lpNorm<1>());
    CHECK(std::abs(c.pressure.sum()) < 1e-10);

    const MixedSolution projected = project_fine(blocks, fine, F);
    CHECK(relative_velocity_error(s, projected.flux, fine.flux) <= 1e-10);
    CHECK(relative_pressure_error(g, projected.pressure, fine.pressure) <= 1e-10);
}

TEST_CASE("coarse solve details")
{
    const GridHierarchy g(8, 2);
    const PermField k = synthetic_field(8, 2, 1e3);
    const SaddleSystem s = assemble(g, k);
    const BlockSolvers blocks(g, k);
    const SnapshotSpace snaps = build_snapshot_space(blocks);
    std::vector<int> column_edge;
    const SparseMatrix R = assemble_coefficients(g, snaps.blocks, &column_edge);

    const CoarseSolution zero = solve_coarse(s, R, Eigen::VectorXd::Zero(64));
    CHECK(zero.velocity.norm() == 0.0);
    CHECK(zero.pressure.norm() == 0.0);

    const Eigen::VectorXd F = corner_source(g);
    const CoarseSystem cs = assemble_coarse(s, R, F);
    CHECK((cs.M - Eigen::MatrixXd(SparseMatrix(R.transpose()) * s.M * R)).norm() < 1e-12);
    CHECK(cs.F.sum() == doctest::Approx(0.0));
    CHECK(coarse_infsup_sigma(cs) > 0.0);
    CHECK(coarse_conservation_residual(s, solve_coarse(s, R, F).fine.flux, F) <= 1e-10 * F.lpNorm<1>());

    // perturbing one coarse-edge flux shows up in the residual
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.num_edges());
    CHECK(coarse_conservation_residual(s, v, Eigen::VectorXd::Zero(64)) == 0.0);
    v[g.vertical_edge(4, 1)] = 1.0;
    CHECK(coarse_conservation_residual(s, v, Eigen::VectorXd::Zero(64)) == doctest::Approx(1.0));

    // a repeated column makes the basis dependent; the message names the edge
    Eigen::MatrixXd dense(R);
    Eigen::MatrixXd dup(dense.rows(), dense.cols() + 1);
    dup << dense, dense.col(2);
    std::vector<int> dup_edge = column_edge;
    dup_edge.push_back(column_edge[2]);
    const SparseMatrix Rd = dup.sparseView();
    try {
        solve_coarse(s, Rd, F, &dup_edge);
        FAIL("dependent basis accepted");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("edge " + std::to_string(column_edge[2])) != std::string::npos);
    }
}

TEST_CASE("error measures")
{
    const GridHierarchy g(8, 2);
    const PermField k = synthetic_field(8, 2, 1e3);
    const SaddleSystem s = assemble(g, k);
    const Eigen::VectorXd F = corner_source(g);
    const MixedSolution fine = solve_global(s, F);
    CHECK(relative_velocity_error(s, fine.flux, fine.flux) == 0.0);
    CHECK(relative_velocity_error(s, 2.0 * fine.flux, fine.flux) == doctest::Approx(1.0));
    CHECK(relative_pressure_error(g, Eigen::VectorXd::Zero(64), fine.pressure) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_velocity_error(s, fine.flux, Eigen::VectorXd::Zero(g.num_edges())), NumericError);

    const ErrorReport same = error_report(s, fine, fine, fine);
    CHECK(same.E_of_v == 0.0);
    CHECK(same.E_os_p == 0.0);
    CHECK(std::isnan(same.E_pf_v));
}

TEST_CASE("offline error decreases with the space")
{
    const GridHierarchy g(20, 4);
    const PermField k = synthetic_field(20, 7, 1e4);
    const SaddleSystem s = assemble(g, k);
    const BlockSolvers blocks(g, k);
    const SnapshotSpace snaps = build_snapshot_space(blocks);
    const auto spectra = compute_spectra(SpectralKind::spectral1, s, snaps.blocks);
    const Eigen::VectorXd F = corner_source(g);
    const MixedSolution fine = solve_global(s, F);
    const MixedSolution snap = solve_coarse(s, assemble_coefficients(g, snaps.blocks), F).fine;
    double previous = INFINITY;
    for (int l = 1; l <= 5; ++l) {
        const OfflineSpace off = assemble_offline(g, snaps.blocks, spectra, l);
        const ErrorReport r = error_report(s, fine, snap, solve_coarse(s, off.R, F).fine);
        CHECK(r.E_os_v <= previous + 1e-12);
        previous = r.E_os_v;
    }
    CHECK(previous <= 1e-10);
}
