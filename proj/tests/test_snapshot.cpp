#include "doctest.h"

#include <filesystem>

#include "msfem/coarse_solver.hpp"
#include "msfem/snapshot.hpp"

using namespace msfem;

TEST_CASE("snapshot traces are unit vectors")
{
    const GridHierarchy g(8, 2);
    const PermField k = synthetic_field(8, 2, 1e4);
    const BlockSolvers blocks(g, k);
    for (int id : g.interior_coarse_edges()) {
        const EdgeBasis b = build_edge_snapshots(blocks, g.coarse_edge(id));
        CHECK(b.count() == 4);
        CHECK((edge_traces(g, b) - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
        CHECK(b.support == g.neighborhood(g.coarse_edge(id)));
    }
}

TEST_CASE("snapshot divergence balances the trace in each block")
{
    const GridHierarchy g(8, 2);
    const BlockSolvers blocks(g, synthetic_field(8, 4, 1e3));
    const SaddleSystem s = assemble(g, synthetic_field(8, 4, 1e3));
    const SnapshotSpace space = build_snapshot_space(blocks);
    const SparseMatrix R = assemble_coefficients(g, space.blocks);
    const Eigen::MatrixXd div = Eigen::MatrixXd(s.B * R) / g.cell_area();
    const double alpha = g.h() / (g.H() * g.H());

    std::vector<int> column_edge;
    assemble_coefficients(g, space.blocks, &column_edge);
    for (Eigen::Index col = 0; col < R.cols(); ++col) {
        const CoarseEdge& e = g.coarse_edge(column_edge[static_cast<std::size_t>(col)]);
        for (int c = 0; c < g.num_cells(); ++c) {
            const int K = g.block_of_cell(c);
            const double expected = K == e.blocks[0] ? alpha : K == e.blocks[1] ? -alpha : 0.0;
            CHECK(std::abs(div(c, col) - expected) < 1e-12 * alpha);
        }
    }
    for (const EdgeBasis& b : space.blocks)
        for (int k = 0; k < b.count(); ++k) {
            CHECK(b.block_divergence(0, k) == doctest::Approx(alpha));
            CHECK(b.block_divergence(1, k) == doctest::Approx(-alpha));
        }
}

TEST_CASE("snapshot pressures have zero mean per block")
{
    const GridHierarchy g(8, 2);
    const BlockSolvers blocks(g, synthetic_field(8, 9, 1e4));
    const EdgeBasis b = build_edge_snapshots(blocks, g.coarse_edge(g.interior_coarse_edges()[1]));
    for (int k = 0; k < b.count(); ++k) {
        double sums[4] = {0, 0, 0, 0};
        for (std::size_t c = 0; c < b.cells.size(); ++c)
            sums[g.block_of_cell(b.cells[c])] += b.pressure(static_cast<Eigen::Index>(c), k);
        for (double v : sums)
            CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("sum of snapshots is the constant-trace field")
{
    const GridHierarchy g(8, 2);
    const PermField k = PermField::constant(8, 1.0);
    const BlockSolvers blocks(g, k);
    const CoarseEdge& e = g.coarse_edge(g.interior_coarse_edges()[0]);
    const EdgeBasis snaps = build_edge_snapshots(blocks, e);
    const EdgeBasis summed = snaps.combine(Eigen::VectorXd::Ones(4));
    const EdgeBasis direct = synthesize_edge_fields(blocks, e, Eigen::VectorXd::Ones(4));
    CHECK((summed.flux - direct.flux).norm() < 1e-12);
    CHECK((summed.pressure - direct.pressure).norm() < 1e-12);
    CHECK((edge_traces(g, direct).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("snapshot space size and support")
{
    const GridHierarchy g(4, 2);
    const BlockSolvers blocks(g, PermField::constant(4, 1.0));
    const SnapshotSpace space = build_snapshot_space(blocks);
    CHECK(space.size() == 8);
    const SparseMatrix R = assemble_coefficients(g, space.blocks);
    CHECK(R.rows() == g.num_edges());
    CHECK(R.cols() == 8);
    for (Eigen::Index col = 0; col < R.cols(); ++col) {
        const EdgeBasis& b = space.blocks[static_cast<std::size_t>(col / 2)];
        for (SparseMatrix::InnerIterator it(R, col); it; ++it) {
            const auto cells = g.edge_cells(static_cast<int>(it.row()));
            for (int c : cells)
                if (c >= 0) {
                    const auto ij = g.cell_coords(c);
                    CHECK(b.support.contains(ij[0], ij[1]));
                }
        }
    }
    // one edge's columns are independent
    const Eigen::MatrixXd cols = Eigen::MatrixXd(R).leftCols(2);
    CHECK(cols.fullPivLu().rank() == 2);
}

TEST_CASE("serial and parallel snapshots are identical")
{
    const GridHierarchy g(12, 3);
    const PermField k = synthetic_field(12, 7, 1e4);
    const SnapshotSpace a = build_snapshot_space(BlockSolvers(g, k, Execution::serial), Execution::serial);
    const SnapshotSpace b = build_snapshot_space(BlockSolvers(g, k, Execution::parallel), Execution::parallel);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].flux == b.blocks[i].flux);
        CHECK(a.blocks[i].pressure == b.blocks[i].pressure);
    }
}

TEST_CASE("coefficient dump round trip")
{
    const GridHierarchy g(8, 2);
    const BlockSolvers blocks(g, synthetic_field(8, 1, 50.0));
    const SparseMatrix R = assemble_coefficients(g, build_snapshot_space(blocks).blocks);
    const auto path = std::filesystem::temp_directory_path() / "msfem_R.bin";
    write_coefficients(path, g, R);
    CHECK(std::filesystem::file_size(path) == 24 + 8 * static_cast<std::uintmax_t>(R.rows() * R.cols()));
    int n = 0, N = 0;
    const Eigen::MatrixXd back = read_coefficients(path, &n, &N);
    CHECK(n == 8);
    CHECK(N == 2);
    CHECK(back == Eigen::MatrixXd(R));
}
