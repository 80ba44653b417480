#include "msfem/block_solvers.hpp"

namespace msfem {

BlockSolvers::BlockSolvers(const GridHierarchy& grid, const PermField& kappa, Execution exec,
                           MassMatrix mass)
    : grid_(&grid), blocks_(static_cast<std::size_t>(grid.num_blocks()))
{
    parallel_for(exec, grid.num_blocks(), [&](int K) {
        blocks_[static_cast<std::size_t>(K)] =
            std::make_unique<LocalMixedProblem>(Region(grid, grid.block_box(K)), kappa, mass);
    });
}

} // namespace msfem
