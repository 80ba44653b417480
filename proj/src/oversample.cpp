#include "msfem/oversample.hpp"

#include <cmath>

#include "msfem/error.hpp"

namespace msfem {

HarmonicExtension harmonic_extension(const LocalMixedProblem& problem, const Eigen::VectorXd& psi)
{
    const Region& region = problem.region();
    const double h = region.grid().h();
    const auto nb = static_cast<Eigen::Index>(region.boundary_edges().size());
    if (psi.size() != nb)
        throw ConfigError("harmonic extension needs one value per boundary edge of the region");

    Eigen::VectorXd g(nb);
    double outflow = 0.0;
    for (Eigen::Index k = 0; k < nb; ++k) {
        const double sign = region.boundary_signs()[static_cast<std::size_t>(k)];
        g[k] = sign * psi[k] * h;
        outflow += psi[k] * h;
    }
    HarmonicExtension out;
    out.c = outflow / region.area();
    out.solution = problem.solve(
        g, Eigen::VectorXd::Constant(region.num_cells(), out.c * region.grid().cell_area()));
    return out;
}

TraceEnsemble build_trace_ensemble(const GridHierarchy& grid, const PermField& kappa,
                                   const CoarseEdge& edge, int layers, MassMatrix mass)
{
    if (edge.boundary)
        throw ConfigError("trace ensembles are only built for interior coarse edges");
    TraceEnsemble out;
    out.edge_id = edge.id;
    out.region = grid.oversampled_neighborhood(edge, layers);
    out.weight = grid.h();

    const LocalMixedProblem problem(Region(grid, out.region), kappa, mass);
    const Region& region = problem.region();
    const auto nb = static_cast<Eigen::Index>(region.boundary_edges().size());
    std::vector<int> rows;
    for (int e : edge.fine_edges)
        rows.push_back(region.local_interior_edge(e));

    out.traces.resize(edge.fine_count(), nb);
    for (Eigen::Index k = 0; k < nb; ++k) {
        const HarmonicExtension ext = harmonic_extension(problem, Eigen::VectorXd::Unit(nb, k));
        for (int j = 0; j < edge.fine_count(); ++j)
            out.traces(j, k) = ext.solution.interior_flux[rows[static_cast<std::size_t>(j)]] / grid.h();
    }
    return out;
}

double PodModes::truncation_energy(int l) const
{
    const double total = sigma.squaredNorm();
    if (total == 0.0)
        return 0.0;
    const int k = std::min<int>(std::max(l, 0), static_cast<int>(sigma.size()));
    return std::max(0.0, 1.0 - sigma.head(k).squaredNorm() / total);
}

Eigen::MatrixXd PodModes::leading(int l) const
{
    if (l < 1 || l > rank)
        throw NumericError("requested " + std::to_string(l) + " POD modes on coarse edge " +
                           std::to_string(edge_id) + ", numerical rank is " + std::to_string(rank));
    return modes.leftCols(l);
}

PodModes pod(const TraceEnsemble& ensemble)
{
    const double root = std::sqrt(ensemble.weight);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(root * ensemble.traces, Eigen::ComputeThinU);
    PodModes out;
    out.edge_id = ensemble.edge_id;
    out.sigma = svd.singularValues();
    const double cut = out.sigma.size() ? pod_rank_tolerance * out.sigma[0] : 0.0;
    while (out.rank < out.sigma.size() && out.sigma[out.rank] > cut)
        ++out.rank;
    out.modes = svd.matrixU().leftCols(out.rank) / root;
    return out;
}

EdgeBasis synthesize_basis(const BlockSolvers& blocks, const CoarseEdge& edge,
                           const Eigen::MatrixXd& modes)
{
    return synthesize_edge_fields(blocks, edge, modes);
}

OversamplingStudy::OversamplingStudy(const GridHierarchy& grid, const PermField& kappa,
                                     const Eigen::VectorXd& source, Options options)
    : grid_(&grid),
      system_(assemble(grid, kappa)),
      source_(source),
      options_(options),
      blocks_(grid, kappa, options.exec)
{
    if (options_.layers == 0)
        options_.layers = grid.default_oversampling_layers();
    snapshots_ = build_snapshot_space(blocks_, options_.exec);

    const auto& interior = grid.interior_coarse_edges();
    pods_.resize(interior.size());
    parallel_for(options_.exec, static_cast<int>(interior.size()), [&](int k) {
        const CoarseEdge& edge = grid.coarse_edge(interior[static_cast<std::size_t>(k)]);
        pods_[static_cast<std::size_t>(k)] =
            pod(build_trace_ensemble(grid, kappa, edge, options_.layers));
    });

    spectra1_ = compute_spectra(SpectralKind::spectral1, system_, snapshots_.blocks, options_.exec);
    spectra2_ = compute_spectra(SpectralKind::spectral2, system_, snapshots_.blocks, options_.exec);
    fine_ = solve_global(system_, source_);
    const SparseMatrix R = assemble_coefficients(grid, snapshots_.blocks);
    snapshot_solution_ = solve_coarse(system_, R, source_).fine;
}

ErrorReport OversamplingStudy::run_case(int which, int l, double* coarse_residual) const
{
    const GridHierarchy& grid = *grid_;
    const auto& interior = grid.interior_coarse_edges();
    std::vector<EdgeBasis> offline(interior.size());

    switch (which) {
    case 1:
    case 2: {
        if (which == 2 && l > options_.case2_modes)
            throw ConfigError("case 2 selects at most " + std::to_string(options_.case2_modes) +
                              " functions per edge from its oversampled snapshot space");
        parallel_for(options_.exec, static_cast<int>(interior.size()), [&](int k) {
            const auto i = static_cast<std::size_t>(k);
            const CoarseEdge& edge = grid.coarse_edge(interior[i]);
            if (which == 1) {
                offline[i] = synthesize_basis(blocks_, edge, pods_[i].leading(l));
                return;
            }
            const int width = std::min(options_.case2_modes, pods_[i].rank);
            const EdgeBasis snap = synthesize_basis(blocks_, edge, pods_[i].leading(width));
            const EdgeSpectrum spec = compute_edge_spectrum(SpectralKind::spectral1, system_, snap);
            offline[i] = snap.combine(select_offline(spec, std::min(l, width)));
        });
        break;
    }
    case 3:
    case 4: {
        const auto& spectra = which == 3 ? spectra1_ : spectra2_;
        for (std::size_t i = 0; i < interior.size(); ++i)
            offline[i] = snapshots_.blocks[i].combine(select_offline(spectra[i], l));
        break;
    }
    default:
        throw ConfigError("oversampling case must be 1, 2, 3 or 4 (got " + std::to_string(which) + ")");
    }

    std::vector<int> column_edge;
    const SparseMatrix R = assemble_coefficients(grid, offline, &column_edge);
    const CoarseSolution coarse = solve_coarse(system_, R, source_, &column_edge);
    if (coarse_residual)
        *coarse_residual = coarse_conservation_residual(system_, coarse.fine.flux, source_);
    return error_report(system_, fine_, snapshot_solution_, coarse.fine);
}

} // namespace msfem
