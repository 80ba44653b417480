#include "msfem/postprocess.hpp"

#include <cmath>

#include "msfem/error.hpp"

namespace msfem {

namespace {

bool constant_on(const Region& region, const Eigen::VectorXd& source)
{
    const double first = source[region.cells().front()];
    for (int c : region.cells())
        if (source[c] != first)
            return false;
    return true;
}

} // namespace

PostprocessedVelocity postprocess(const BlockSolvers& blocks, const Eigen::VectorXd& coarse_flux,
                                  const Eigen::VectorXd& source, bool force_all, Execution exec)
{
    const GridHierarchy& grid = blocks.grid();
    if (coarse_flux.size() != grid.num_edges() || source.size() != grid.num_cells())
        throw ConfigError("postprocess needs a fine-edge flux and a fine-cell source");

    PostprocessedVelocity out;
    out.flux = coarse_flux;
    std::vector<char> processed(static_cast<std::size_t>(blocks.size()), 0);
    std::vector<Eigen::VectorXd> interior(static_cast<std::size_t>(blocks.size()));

    parallel_for(exec, blocks.size(), [&](int K) {
        const LocalMixedProblem& problem = blocks[K];
        const Region& region = problem.region();
        if (!force_all && constant_on(region, source))
            return;
        Eigen::VectorXd g(static_cast<Eigen::Index>(region.boundary_edges().size()));
        for (std::size_t k = 0; k < region.boundary_edges().size(); ++k)
            g[static_cast<Eigen::Index>(k)] = coarse_flux[region.boundary_edges()[k]];
        Eigen::VectorXd rhs(region.num_cells());
        for (int k = 0; k < region.num_cells(); ++k)
            rhs[k] = source[region.cells()[static_cast<std::size_t>(k)]];
        try {
            interior[static_cast<std::size_t>(K)] = problem.solve(g, rhs).interior_flux;
        } catch (const NumericError& e) {
            throw NumericError("postprocessing coarse block " + std::to_string(K) + ": " + e.what());
        }
        processed[static_cast<std::size_t>(K)] = 1;
    });

    for (int K = 0; K < blocks.size(); ++K) {
        if (!processed[static_cast<std::size_t>(K)])
            continue;
        const Region& region = blocks[K].region();
        const Eigen::VectorXd& v = interior[static_cast<std::size_t>(K)];
        for (std::size_t k = 0; k < region.interior_edges().size(); ++k)
            out.flux[region.interior_edges()[k]] = v[static_cast<Eigen::Index>(k)];
        out.processed_blocks.push_back(K);
    }
    return out;
}

double fine_conservation_residual(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                  const Eigen::VectorXd& source)
{
    return conservation_defect(system, flux, source).lpNorm<Eigen::Infinity>();
}

} // namespace msfem
