#pragma once

#include <vector>

#include "msfem/block_solvers.hpp"

namespace msfem {

struct PostprocessedVelocity {
    Eigen::VectorXd flux;
    std::vector<int> processed_blocks;
};

/// Fine-conservative velocity from a coarse one: on each coarse block a
/// local mixed solve with the coarse normal flux on the block boundary and
/// the fine source inside. Blocks with a constant source already carry a
/// conservative v_H and are copied unless force_all is set.
PostprocessedVelocity postprocess(const BlockSolvers& blocks, const Eigen::VectorXd& coarse_flux,
                                  const Eigen::VectorXd& source, bool force_all = false,
                                  Execution exec = Execution::parallel);

/// max over fine cells of |flux out of the cell - integral of f|.
double fine_conservation_residual(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                  const Eigen::VectorXd& source);

} // namespace msfem
