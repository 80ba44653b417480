#include "msfem/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "msfem/error.hpp"

namespace msfem {

EdgeBasis EdgeBasis::combine(const Eigen::MatrixXd& coeffs) const
{
    EdgeBasis out;
    out.edge_id = edge_id;
    out.support = support;
    out.edges = edges;
    out.cells = cells;
    out.flux = flux * coeffs;
    out.pressure = pressure * coeffs;
    out.block_divergence = block_divergence * coeffs;
    return out;
}

EdgeBasis synthesize_edge_fields(const BlockSolvers& blocks, const CoarseEdge& edge,
                                 const Eigen::MatrixXd& traces)
{
    const GridHierarchy& grid = blocks.grid();
    if (edge.boundary)
        throw ConfigError("edge fields are only built for interior coarse edges (edge " +
                          std::to_string(edge.id) + " lies on the domain boundary)");
    const int J = edge.fine_count();
    if (traces.rows() != J)
        throw ConfigError("trace matrix needs one row per fine edge of coarse edge " +
                          std::to_string(edge.id));
    const int count = static_cast<int>(traces.cols());
    const double h = grid.h();

    const Region omega(grid, grid.neighborhood(edge));
    EdgeBasis out;
    out.edge_id = edge.id;
    out.support = grid.neighborhood(edge);
    out.edges = omega.interior_edges();
    out.cells = omega.cells();
    out.flux = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.edges.size()), count);
    out.pressure = Eigen::MatrixXd::Zero(omega.num_cells(), count);
    out.block_divergence = Eigen::MatrixXd::Zero(2, count);

    for (int j = 0; j < J; ++j) {
        const int row = omega.local_interior_edge(edge.fine_edges[static_cast<std::size_t>(j)]);
        for (int c = 0; c < count; ++c)
            out.flux(row, c) = traces(j, c) * h;
    }

    for (int side = 0; side < 2; ++side) {
        const int K = edge.blocks[static_cast<std::size_t>(side)];
        const LocalMixedProblem& problem = blocks[K];
        const Region& region = problem.region();
        // E_i is the right/upper face of the first block and the left/lower
        // face of the second, so +m_i leaves the first block.
        const double outward = side == 0 ? 1.0 : -1.0;
        std::vector<int> slots(static_cast<std::size_t>(J));
        for (int j = 0; j < J; ++j)
            slots[static_cast<std::size_t>(j)] =
                region.local_boundary_edge(edge.fine_edges[static_cast<std::size_t>(j)]);

        for (int c = 0; c < count; ++c) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(region.boundary_edges().size()));
            double net_outflow = 0.0;
            for (int j = 0; j < J; ++j) {
                g[slots[static_cast<std::size_t>(j)]] = traces(j, c) * h;
                net_outflow += outward * traces(j, c) * h;
            }
            const Eigen::VectorXd rhs =
                Eigen::VectorXd::Constant(region.num_cells(), net_outflow / region.num_cells());
            const LocalSolution local = problem.solve(g, rhs);

            for (std::size_t k = 0; k < region.interior_edges().size(); ++k)
                out.flux(omega.local_interior_edge(region.interior_edges()[k]), c) =
                    local.interior_flux[static_cast<Eigen::Index>(k)];
            for (std::size_t k = 0; k < region.cells().size(); ++k)
                out.pressure(omega.local_cell(region.cells()[k]), c) =
                    local.pressure[static_cast<Eigen::Index>(k)];
            out.block_divergence(side, c) = net_outflow / region.area();
        }
    }
    return out;
}

EdgeBasis build_edge_snapshots(const BlockSolvers& blocks, const CoarseEdge& edge)
{
    return synthesize_edge_fields(blocks, edge,
                                  Eigen::MatrixXd::Identity(edge.fine_count(), edge.fine_count()));
}

Eigen::MatrixXd edge_traces(const GridHierarchy& grid, const EdgeBasis& basis)
{
    const CoarseEdge& edge = grid.coarse_edge(basis.edge_id);
    Eigen::MatrixXd out(edge.fine_count(), basis.count());
    for (int j = 0; j < edge.fine_count(); ++j) {
        const int e = edge.fine_edges[static_cast<std::size_t>(j)];
        const auto it = std::lower_bound(basis.edges.begin(), basis.edges.end(), e);
        out.row(j) = basis.flux.row(it - basis.edges.begin()) / grid.h();
    }
    return out;
}

int SnapshotSpace::size() const
{
    return std::accumulate(blocks.begin(), blocks.end(), 0,
                           [](int acc, const EdgeBasis& b) { return acc + b.count(); });
}

SnapshotSpace build_snapshot_space(const BlockSolvers& blocks, Execution exec)
{
    const GridHierarchy& grid = blocks.grid();
    const auto& interior = grid.interior_coarse_edges();
    SnapshotSpace space;
    space.blocks.resize(interior.size());
    parallel_for(exec, static_cast<int>(interior.size()), [&](int k) {
        space.blocks[static_cast<std::size_t>(k)] =
            build_edge_snapshots(blocks, grid.coarse_edge(interior[static_cast<std::size_t>(k)]));
    });
    return space;
}

SparseMatrix assemble_coefficients(const GridHierarchy& grid, std::span<const EdgeBasis> blocks,
                                   std::vector<int>* column_edge)
{
    std::vector<Eigen::Triplet<double>> t;
    int col = 0;
    if (column_edge)
        column_edge->clear();
    for (const EdgeBasis& b : blocks) {
        for (int c = 0; c < b.count(); ++c, ++col) {
            for (std::size_t r = 0; r < b.edges.size(); ++r) {
                const double v = b.flux(static_cast<Eigen::Index>(r), c);
                if (v != 0.0)
                    t.emplace_back(b.edges[r], col, v);
            }
            if (column_edge)
                column_edge->push_back(b.edge_id);
        }
    }
    SparseMatrix R(grid.num_edges(), col);
    R.setFromTriplets(t.begin(), t.end());
    return R;
}

namespace {

void put_u64(std::ofstream& out, std::uint64_t v)
{
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k)
        bytes[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xffu);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::ifstream& in)
{
    unsigned char bytes[8] = {};
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
        v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return v;
}

} // namespace

void write_coefficients(const std::filesystem::path& path, const GridHierarchy& grid,
                        const SparseMatrix& R)
{
    static_assert(std::endian::native == std::endian::little, "dump format is little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    put_u64(out, static_cast<std::uint64_t>(grid.n()));
    put_u64(out, static_cast<std::uint64_t>(grid.N()));
    put_u64(out, static_cast<std::uint64_t>(R.cols()));
    Eigen::VectorXd column(R.rows());
    for (int c = 0; c < R.cols(); ++c) {
        column = R.col(c);
        out.write(reinterpret_cast<const char*>(column.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(column.size())));
    }
    if (!out)
        throw IoError("short write to '" + path.string() + "'");
}

Eigen::MatrixXd read_coefficients(const std::filesystem::path& path, int* n, int* N)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path.string() + "'");
    const auto fine = static_cast<int>(get_u64(in));
    const auto coarse = static_cast<int>(get_u64(in));
    const auto cols = static_cast<Eigen::Index>(get_u64(in));
    if (n)
        *n = fine;
    if (N)
        *N = coarse;
    const Eigen::Index rows = 2LL * (fine + 1) * fine;
    Eigen::MatrixXd R(rows, cols);
    in.read(reinterpret_cast<char*>(R.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows * cols)));
    if (!in)
        throw IoError("truncated coefficient dump '" + path.string() + "'");
    return R;
}

} // namespace msfem
