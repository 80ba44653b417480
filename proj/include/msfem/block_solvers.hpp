#pragma once

#include <memory>
#include <vector>

#include "msfem/fine_solver.hpp"
#include "msfem/parallel.hpp"

namespace msfem {

/// One factored local mixed problem per coarse block. Shared by snapshot
/// construction, the projection and the postprocessing, which all solve
/// Neumann problems block by block.
class BlockSolvers {
public:
    BlockSolvers(const GridHierarchy& grid, const PermField& kappa,
                 Execution exec = Execution::parallel, MassMatrix mass = MassMatrix::full);

    const GridHierarchy& grid() const { return *grid_; }
    int size() const { return static_cast<int>(blocks_.size()); }
    const LocalMixedProblem& operator[](int block) const { return *blocks_[static_cast<std::size_t>(block)]; }

private:
    const GridHierarchy* grid_;
    std::vector<std::unique_ptr<LocalMixedProblem>> blocks_;
};

} // namespace msfem
