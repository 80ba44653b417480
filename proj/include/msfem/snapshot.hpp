#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "msfem/block_solvers.hpp"

namespace msfem {

/// Velocity fields attached to one interior coarse edge and supported in its
/// neighbourhood omega_i. Rows of `flux` follow `edges` (the interior fine
/// edges of omega_i; the flux on the boundary of omega_i is zero), rows of
/// `pressure` follow `cells`. Snapshot, offline and oversampled spaces all
/// use this layout.
struct EdgeBasis {
    int edge_id = -1;
    CellBox support;
    std::vector<int> edges;
    std::vector<int> cells;
    Eigen::MatrixXd flux;
    Eigen::MatrixXd pressure;        ///< zero mean on each block of omega_i
    Eigen::MatrixXd block_divergence;  ///< 2 x count: div in the left/lower and right/upper block

    int count() const { return static_cast<int>(flux.cols()); }
    /// Same fields recombined: columns become basis * coeffs.
    EdgeBasis combine(const Eigen::MatrixXd& coeffs) const;
};

/// Solves the unit-trace local problems of one interior coarse edge: for each
/// column of `traces` (values of v . m_i on the fine edges of E_i), one
/// Neumann solve per block of omega_i with zero flux on the rest of the
/// block boundary and constant divergence balancing the trace.
EdgeBasis synthesize_edge_fields(const BlockSolvers& blocks, const CoarseEdge& edge,
                                 const Eigen::MatrixXd& traces);

/// J_i snapshots of an interior coarse edge (identity traces).
EdgeBasis build_edge_snapshots(const BlockSolvers& blocks, const CoarseEdge& edge);

/// v . m_i on the fine edges of E_i, one column per field.
Eigen::MatrixXd edge_traces(const GridHierarchy& grid, const EdgeBasis& basis);

/// Per-edge snapshot blocks for every interior coarse edge, in ascending
/// coarse-edge order.
struct SnapshotSpace {
    std::vector<EdgeBasis> blocks;

    int size() const;
};

SnapshotSpace build_snapshot_space(const BlockSolvers& blocks, Execution exec = Execution::parallel);

/// Global coefficient matrix whose columns are the fields of every block,
/// ordered by (block, local column). `column_edge`, when given, receives the
/// coarse-edge id of each column.
SparseMatrix assemble_coefficients(const GridHierarchy& grid, std::span<const EdgeBasis> blocks,
                                   std::vector<int>* column_edge = nullptr);

/// Binary dump of a coefficient matrix: three little-endian uint64 (n, N,
/// column count) followed by the dense columns, column-major float64, each
/// of length num_edges.
void write_coefficients(const std::filesystem::path& path, const GridHierarchy& grid,
                        const SparseMatrix& R);
Eigen::MatrixXd read_coefficients(const std::filesystem::path& path, int* n = nullptr,
                                  int* N = nullptr);

} // namespace msfem
