#pragma once

#include <limits>
#include <vector>

#include "msfem/block_solvers.hpp"

namespace msfem {

/// Coarse pressures are constant per coarse block; G_H maps them to fine cells.
SparseMatrix prolongation(const GridHierarchy& grid);

/// Galerkin coarse operators for a coefficient matrix R (num_edges x dofs).
struct CoarseSystem {
    Eigen::MatrixXd M;  ///< R^T M_fine R
    Eigen::MatrixXd B;  ///< G_H^T B_fine R, N^2 x dofs
    Eigen::VectorXd F;  ///< G_H^T F_h
};

CoarseSystem assemble_coarse(const SaddleSystem& system, const SparseMatrix& R,
                             const Eigen::VectorXd& source);

struct CoarseSolution {
    MixedSolution fine;         ///< v_H = R V_H on fine edges, p_H on fine cells
    Eigen::VectorXd velocity;   ///< coefficients V_H
    Eigen::VectorXd pressure;   ///< one value per coarse block
};

/// Solves the coarse saddle system with a zero-mean pressure gauge.
/// `column_edge` (coarse edge per column) only feeds the error message
/// when the basis is dependent.
CoarseSolution solve_coarse(const SaddleSystem& system, const SparseMatrix& R,
                            const Eigen::VectorXd& source,
                            const std::vector<int>* column_edge = nullptr);

/// max over coarse blocks K of |flux out of K - integral of f over K|.
double coarse_conservation_residual(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                    const Eigen::VectorXd& source);

/// Smallest singular value of B_c that survives the constant-pressure null
/// direction (sigma_{N^2-1}); positive when the coarse pair is stable.
double coarse_infsup_sigma(const CoarseSystem& coarse);

/// Projection of a fine solution into the snapshot span: per block, the
/// local mixed problem with the fine boundary flux and the block-averaged
/// source; pressure mean matched to the fine one.
MixedSolution project_fine(const BlockSolvers& blocks, const MixedSolution& fine,
                           const Eigen::VectorXd& source, Execution exec = Execution::parallel);

/// ||a - b|| / ||b|| in the kappa^-1 velocity norm or L2 pressure norm.
double relative_velocity_error(const SaddleSystem& system, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b);
double relative_pressure_error(const GridHierarchy& grid, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b);

struct ErrorReport {
    double E_of_v = 0.0;
    double E_of_p = 0.0;
    double E_os_v = 0.0;
    double E_os_p = 0.0;
    double E_pf_v = std::numeric_limits<double>::quiet_NaN();  ///< NaN without postprocessing
};

ErrorReport error_report(const SaddleSystem& system, const MixedSolution& fine,
                         const MixedSolution& snapshot, const MixedSolution& offline,
                         const Eigen::VectorXd* postprocessed = nullptr);

} // namespace msfem
