#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "msfem/grid.hpp"
#include "msfem/perm.hpp"

namespace msfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lowest-order Raviart-Thomas velocity mass. `lumped` is the trapezoidal
/// diagonal variant, kept for cross-checks only.
enum class MassMatrix { full, lumped };

/// Fine-grid mixed operators on the whole domain.
///
/// Flux convention used throughout the library: the velocity unknown of a
/// fine edge is the edge-integrated normal flux in the +x (vertical edges) or
/// +y (horizontal edges) direction, i.e. (v . m) * h. Pressure unknowns are
/// cell values. Source vectors hold cell integrals of f.
struct SaddleSystem {
    const GridHierarchy* grid = nullptr;
    SparseMatrix M;  ///< num_edges x num_edges, kappa^-1 weighted
    SparseMatrix B;  ///< num_cells x num_edges, (B v)_c = outward flux of cell c
    MassMatrix mass = MassMatrix::full;
    PermField kappa;
};

/// Fine velocity and pressure on global numbering; pressure is zero outside
/// the region it was computed on.
struct MixedSolution {
    Eigen::VectorXd flux;
    Eigen::VectorXd pressure;
};

/// Region-local solution: flux on the region's interior and boundary edges
/// and pressure on its cells, all in Region numbering.
struct LocalSolution {
    Eigen::VectorXd interior_flux;
    Eigen::VectorXd boundary_flux;
    Eigen::VectorXd pressure;
};

/// Per-cell 2x2 mass stencil shared by both opposite-edge pairs of a cell;
/// {diagonal, off-diagonal} for unit kappa.
std::array<double, 2> mass_stencil(MassMatrix kind);

/// kappa^-1 on an edge: mean of kappa^-1 over the adjacent cells inside D.
double edge_inverse_perm(const GridHierarchy& grid, const PermField& kappa, int edge);

SaddleSystem assemble(const GridHierarchy& grid, const PermField& kappa,
                      MassMatrix mass = MassMatrix::full);

/// Cell integrals of a cell-wise constant source.
Eigen::VectorXd cell_integrals(const GridHierarchy& grid, std::span<const double> values);

/// f = +1 on the top-left fine cell and -1 on the bottom-right one, as cell
/// integrals.
Eigen::VectorXd corner_source(const GridHierarchy& grid);

/// Cell integrals of a source that is constant per coarse block.
Eigen::VectorXd block_source(const GridHierarchy& grid, std::span<const double> block_values);

/// Factored local mixed problem on a region: interior-edge fluxes and cell
/// pressures are unknown, boundary-edge fluxes are prescribed, pressure has
/// zero mean on every connected component. The factorization is computed
/// once; solve() may be called concurrently from several threads.
class LocalMixedProblem {
public:
    LocalMixedProblem(Region region, const PermField& kappa, MassMatrix mass = MassMatrix::full);

    const Region& region() const { return region_; }

    /// boundary_flux: one value per region boundary edge (global +x/+y
    /// orientation). rhs: cell integrals of the source per region cell.
    /// Throws NumericError when a component's source does not balance its
    /// net boundary outflow.
    LocalSolution solve(const Eigen::VectorXd& boundary_flux, const Eigen::VectorXd& rhs) const;

    /// Region-local velocity mass over interior edges (boundary edges carry
    /// prescribed data and are accounted for separately).
    const SparseMatrix& interior_mass() const { return m_ii_; }
    const SparseMatrix& boundary_mass() const { return m_ib_; }
    /// Divergence from interior / boundary edge fluxes to cell outflow.
    const SparseMatrix& interior_divergence() const { return d_i_; }
    const SparseMatrix& boundary_divergence() const { return d_b_; }

    /// Accepted normwise backward error per block row of the saddle system.
    static constexpr double residual_tolerance = 1e-12;
    static constexpr double compatibility_tolerance = 1e-10;

private:
    Eigen::VectorXd reduced_solve(const Eigen::VectorXd& full_rhs) const;

    Region region_;
    std::vector<int> boundary_component_;
    SparseMatrix m_ii_, m_ib_, d_i_, d_b_;
    SparseMatrix system_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    double norm_momentum_ = 0.0;
    double norm_continuity_ = 0.0;
    std::vector<int> reduced_row_;  ///< full row -> factored row, -1 when dropped
    int reduced_size_ = 0;
};

/// Global fine solve with zero normal flux on the domain boundary. The
/// source must integrate to zero.
MixedSolution solve_global(const SaddleSystem& system, const Eigen::VectorXd& source);

/// Scatters a local solution into global vectors.
MixedSolution to_global(const Region& region, const LocalSolution& local);

/// Velocity norm ||v||_{kappa^-1} through the assembled mass matrix.
double energy_norm(const SaddleSystem& system, const Eigen::VectorXd& flux);

/// Cell-measure weighted L2 norm of a cell field.
double pressure_norm(const GridHierarchy& grid, const Eigen::VectorXd& pressure);

/// Per-cell conservation defect B v - F.
Eigen::VectorXd conservation_defect(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                    const Eigen::VectorXd& source);

} // namespace msfem
