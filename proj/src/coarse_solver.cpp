#include "msfem/coarse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "msfem/error.hpp"

namespace msfem {

SparseMatrix prolongation(const GridHierarchy& grid)
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(grid.num_cells()));
    for (int c = 0; c < grid.num_cells(); ++c)
        t.emplace_back(c, grid.block_of_cell(c), 1.0);
    SparseMatrix G(grid.num_cells(), grid.num_blocks());
    G.setFromTriplets(t.begin(), t.end());
    return G;
}

CoarseSystem assemble_coarse(const SaddleSystem& system, const SparseMatrix& R,
                             const Eigen::VectorXd& source)
{
    const GridHierarchy& grid = *system.grid;
    if (R.rows() != grid.num_edges())
        throw ConfigError("coefficient matrix needs one row per fine edge");
    const SparseMatrix G = prolongation(grid);
    CoarseSystem out;
    const SparseMatrix MR = system.M * R;
    out.M = Eigen::MatrixXd(SparseMatrix(R.transpose()) * MR);
    out.M = 0.5 * (out.M + out.M.transpose()).eval();
    out.B = Eigen::MatrixXd(SparseMatrix(G.transpose()) * (system.B * R));
    out.F = G.transpose() * source;
    return out;
}

namespace {

[[noreturn]] void report_dependent_basis(const Eigen::MatrixXd& M, const std::vector<int>* column_edge)
{
    if (column_edge && static_cast<Eigen::Index>(column_edge->size()) == M.rows()) {
        std::map<int, std::vector<Eigen::Index>> columns;
        for (std::size_t k = 0; k < column_edge->size(); ++k)
            columns[(*column_edge)[k]].push_back(static_cast<Eigen::Index>(k));
        for (const auto& [edge, idx] : columns) {
            const auto len = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXd sub(len, len);
            for (Eigen::Index i = 0; i < len; ++i)
                for (Eigen::Index j = 0; j < len; ++j)
                    sub(i, j) = M(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
            const Eigen::VectorXd ev = eig.eigenvalues();
            if (ev[0] <= 1e-13 * std::max(ev[len - 1], 1e-300))
                throw NumericError("dependent basis functions on coarse edge " + std::to_string(edge));
        }
    }
    throw NumericError("coarse velocity mass matrix is singular: basis functions are dependent");
}

} // namespace

CoarseSolution solve_coarse(const SaddleSystem& system, const SparseMatrix& R,
                            const Eigen::VectorXd& source, const std::vector<int>* column_edge)
{
    const GridHierarchy& grid = *system.grid;
    if (source.size() != grid.num_cells())
        throw ConfigError("source needs one value per fine cell");
    if (std::abs(source.sum()) > LocalMixedProblem::compatibility_tolerance * source.lpNorm<1>())
        throw NumericError("incompatible source: its integral must vanish");

    const CoarseSystem cs = assemble_coarse(system, R, source);
    const Eigen::Index m = cs.M.rows();
    const Eigen::Index q = cs.B.rows();
    if (m > 0) {
        Eigen::LLT<Eigen::MatrixXd> chol(cs.M);
        if (chol.info() != Eigen::Success)
            report_dependent_basis(cs.M, column_edge);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cs.M, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues()[0] <= 1e-14 * eig.eigenvalues()[m - 1])
            report_dependent_basis(cs.M, column_edge);
    }

    // [[M, -B^T, 0], [-B, 0, -1], [0, -1^T, 0]]
    const Eigen::Index size = m + q + 1;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(size, size);
    K.topLeftCorner(m, m) = cs.M;
    K.block(0, m, m, q) = -cs.B.transpose();
    K.block(m, 0, q, m) = -cs.B;
    K.block(m, m + q, q, 1).setConstant(-1.0);
    K.block(m + q, m, 1, q).setConstant(-1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
    rhs.segment(m, q) = -cs.F;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd x = lu.solve(rhs);
    const double norm_mom = cs.M.lpNorm<Eigen::Infinity>() + cs.B.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_con = cs.B.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    auto backward_error = [&](const Eigen::VectorXd& r) {
        const double mom = m > 0 ? r.head(m).lpNorm<Eigen::Infinity>() /
                                       (norm_mom * x.head(m + q).lpNorm<Eigen::Infinity>() + 1e-300)
                                 : 0.0;
        const double con = r.segment(m, q).lpNorm<Eigen::Infinity>() /
                           (norm_con * x.lpNorm<Eigen::Infinity>() + cs.F.lpNorm<Eigen::Infinity>() + 1e-300);
        return std::max(mom, con);
    };
    Eigen::VectorXd r = rhs - K * x;
    for (int pass = 0; pass < 3 && backward_error(r) > LocalMixedProblem::residual_tolerance; ++pass) {
        x += lu.solve(r);
        r = rhs - K * x;
    }
    if (backward_error(r) > LocalMixedProblem::residual_tolerance)
        throw NumericError("coarse saddle solve missed the residual bound (backward error " +
                           std::to_string(backward_error(r)) + ")");

    CoarseSolution out;
    out.velocity = x.head(m);
    out.pressure = x.segment(m, q);
    out.fine.flux = R * out.velocity;
    out.fine.pressure = prolongation(grid) * out.pressure;
    return out;
}

double coarse_conservation_residual(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                    const Eigen::VectorXd& source)
{
    const GridHierarchy& grid = *system.grid;
    const Eigen::VectorXd per_block = prolongation(grid).transpose() * (system.B * flux - source);
    return per_block.size() ? per_block.lpNorm<Eigen::Infinity>() : 0.0;
}

double coarse_infsup_sigma(const CoarseSystem& coarse)
{
    const Eigen::Index q = coarse.B.rows();
    if (q < 2)
        return 0.0;
    const Eigen::MatrixXd gram = coarse.B * coarse.B.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues()[1]));
}

MixedSolution project_fine(const BlockSolvers& blocks, const MixedSolution& fine,
                           const Eigen::VectorXd& source, Execution exec)
{
    const GridHierarchy& grid = blocks.grid();
    MixedSolution out{Eigen::VectorXd::Zero(grid.num_edges()), Eigen::VectorXd::Zero(grid.num_cells())};
    std::vector<MixedSolution> parts(static_cast<std::size_t>(blocks.size()));
    parallel_for(exec, blocks.size(), [&](int K) {
        const LocalMixedProblem& problem = blocks[K];
        const Region& region = problem.region();
        Eigen::VectorXd g(static_cast<Eigen::Index>(region.boundary_edges().size()));
        for (std::size_t k = 0; k < region.boundary_edges().size(); ++k)
            g[static_cast<Eigen::Index>(k)] = fine.flux[region.boundary_edges()[k]];
        double total = 0.0;
        double mean = 0.0;
        for (int c : region.cells()) {
            total += source[c];
            mean += fine.pressure[c];
        }
        mean /= region.num_cells();
        LocalSolution local =
            problem.solve(g, Eigen::VectorXd::Constant(region.num_cells(), total / region.num_cells()));
        local.pressure.array() += mean;
        parts[static_cast<std::size_t>(K)] = to_global(region, local);
    });
    // interior edges and cells are disjoint between blocks; block-boundary
    // fluxes are the fine ones on both sides
    for (int K = 0; K < blocks.size(); ++K) {
        const Region& region = blocks[K].region();
        const MixedSolution& part = parts[static_cast<std::size_t>(K)];
        for (int e : region.interior_edges())
            out.flux[e] = part.flux[e];
        for (int e : region.boundary_edges())
            out.flux[e] = part.flux[e];
        for (int c : region.cells())
            out.pressure[c] = part.pressure[c];
    }
    return out;
}

double relative_velocity_error(const SaddleSystem& system, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b)
{
    const double denom = energy_norm(system, b);
    if (!(denom > 0.0))
        throw NumericError("relative velocity error undefined: reference velocity is zero");
    return energy_norm(system, a - b) / denom;
}

double relative_pressure_error(const GridHierarchy& grid, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b)
{
    const double denom = pressure_norm(grid, b);
    if (!(denom > 0.0))
        throw NumericError("relative pressure error undefined: reference pressure is zero");
    return pressure_norm(grid, a - b) / denom;
}

ErrorReport error_report(const SaddleSystem& system, const MixedSolution& fine,
                         const MixedSolution& snapshot, const MixedSolution& offline,
                         const Eigen::VectorXd* postprocessed)
{
    const GridHierarchy& grid = *system.grid;
    ErrorReport out;
    out.E_of_v = relative_velocity_error(system, offline.flux, fine.flux);
    out.E_of_p = relative_pressure_error(grid, offline.pressure, fine.pressure);
    out.E_os_v = relative_velocity_error(system, offline.flux, snapshot.flux);
    out.E_os_p = relative_pressure_error(grid, offline.pressure, snapshot.pressure);
    if (postprocessed)
        out.E_pf_v = relative_velocity_error(system, *postprocessed, fine.flux);
    return out;
}

} // namespace msfem
