#pragma once

#include <vector>

#include "msfem/coarse_solver.hpp"
#include "msfem/spectral.hpp"

namespace msfem {

/// Mixed solve on a region with outward normal velocity psi on its boundary
/// edges (one value per Region::boundary_edges entry) and the constant
/// divergence c = |Omega|^-1 * integral of psi that makes the data compatible.
struct HarmonicExtension {
    LocalSolution solution;
    double c = 0.0;
};

HarmonicExtension harmonic_extension(const LocalMixedProblem& problem, const Eigen::VectorXd& psi);

/// Traces on E_i (v . m_i, one row per fine edge of E_i) of the harmonic
/// extensions of every boundary-edge indicator of omega_i^+.
struct TraceEnsemble {
    int edge_id = -1;
    CellBox region;
    Eigen::MatrixXd traces;  ///< J_i x (boundary edges of omega_i^+)
    double weight = 0.0;     ///< fine edge length, the L2(E_i) quadrature weight
};

TraceEnsemble build_trace_ensemble(const GridHierarchy& grid, const PermField& kappa,
                                   const CoarseEdge& edge, int layers,
                                   MassMatrix mass = MassMatrix::full);

/// POD of a trace ensemble in the weighted inner product.
struct PodModes {
    int edge_id = -1;
    Eigen::MatrixXd modes;  ///< J_i x rank, orthonormal in the weighted inner product
    Eigen::VectorXd sigma;  ///< all singular values, nonincreasing
    int rank = 0;

    /// 1 - sum_{k<=l} sigma_k^2 / sum sigma_k^2
    double truncation_energy(int l) const;
    /// First l modes; throws NumericError when l exceeds the numerical rank.
    Eigen::MatrixXd leading(int l) const;
};

inline constexpr double pod_rank_tolerance = 1e-12;

PodModes pod(const TraceEnsemble& ensemble);

/// Velocity fields on omega_i whose normal traces on E_i are the given modes.
EdgeBasis synthesize_basis(const BlockSolvers& blocks, const CoarseEdge& edge,
                           const Eigen::MatrixXd& modes);

/// Shared data of a four-case oversampling comparison on one problem.
class OversamplingStudy {
public:
    struct Options {
        int layers = 0;          ///< 0 selects the grid default
        int case2_modes = 3;
        Execution exec = Execution::parallel;
    };

    OversamplingStudy(const GridHierarchy& grid, const PermField& kappa,
                      const Eigen::VectorXd& source, Options options);
    OversamplingStudy(const GridHierarchy& grid, const PermField& kappa,
                      const Eigen::VectorXd& source)
        : OversamplingStudy(grid, kappa, source, Options{}) {}

    /// Cases 1 and 2 use the oversampled POD modes (directly, or as a
    /// snapshot space for spectral problem 1); cases 3 and 4 use the
    /// standard snapshots with spectral problem 1 or 2. `coarse_residual`
    /// receives the coarse conservation residual of the solve.
    ErrorReport run_case(int which, int l, double* coarse_residual = nullptr) const;

    const std::vector<PodModes>& modes() const { return pods_; }
    const SnapshotSpace& snapshots() const { return snapshots_; }
    const MixedSolution& fine() const { return fine_; }
    const SaddleSystem& system() const { return system_; }

private:
    const GridHierarchy* grid_;
    SaddleSystem system_;
    Eigen::VectorXd source_;
    Options options_;
    BlockSolvers blocks_;
    SnapshotSpace snapshots_;
    std::vector<PodModes> pods_;
    std::vector<EdgeSpectrum> spectra1_;
    std::vector<EdgeSpectrum> spectra2_;
    MixedSolution fine_;
    MixedSolution snapshot_solution_;
};

} // namespace msfem
