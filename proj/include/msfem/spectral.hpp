#pragma once

#include <limits>
#include <string>
#include <vector>

#include "msfem/snapshot.hpp"

namespace msfem {

/// Local spectral problems a(v,w) = lambda s(v,w) on an edge block.
///  - spectral1: a = edge form of normal traces on E_i, s = kappa^-1 mass + div-div on omega_i
///  - spectral2: a = kappa^-1 mass on omega_i, s = pressure jumps across E_i
///  - curl:      a = discrete curl of kappa^-1 v on omega_i, s = kappa^-1 mass
enum class SpectralKind { spectral1, spectral2, curl };

std::string to_string(SpectralKind kind);
SpectralKind spectral_kind_from_string(const std::string& name);

struct LocalPencil {
    Eigen::MatrixXd A;
    Eigen::MatrixXd S;
    SpectralKind kind = SpectralKind::spectral1;

    /// The pencil member required to be SPD: S, except for spectral2 where
    /// the pressure-jump form may be singular and A is used instead.
    const Eigen::MatrixXd& definite() const { return kind == SpectralKind::spectral2 ? A : S; }
};

/// Discrete curl operator of kappa^-1 v on the interior vertices of a
/// region: circulation around the dual cell of each vertex. Rows follow
/// region.interior_vertices(), columns follow `edges`.
SparseMatrix circulation_operator(const GridHierarchy& grid, const PermField& kappa,
                                  const Region& region, const std::vector<int>& edges);

LocalPencil build_pencil(SpectralKind kind, const SaddleSystem& system, const EdgeBasis& block);

/// Eigenpairs of a pencil, eigenvalues ascending, eigenvectors normalised in
/// the definite form. Infinite eigenvalues (spectral2 null directions of
/// the jump form) are reported as +inf and ordered last.
struct Eigenpairs {
    Eigen::VectorXd lambda;
    Eigen::MatrixXd vectors;
};

inline constexpr double infinite_eigenvalue = std::numeric_limits<double>::infinity();

/// Dense generalized symmetric-definite eigensolve. Throws NumericError if
/// the definite member fails a Cholesky check or an eigenpair misses the
/// residual bound 1e-10 (||A|| + |lambda| ||S||).
Eigenpairs solve_pencil(const LocalPencil& pencil);

/// Spectrum data of one edge. For spectral2 the selection uses the
/// constant-normal-trace field followed by eigenvectors of the pencil
/// restricted to its A-orthogonal complement.
struct EdgeSpectrum {
    int edge_id = -1;
    SpectralKind kind = SpectralKind::spectral1;
    Eigenpairs full;
    Eigen::VectorXd leading;  ///< spectral2 only
    Eigenpairs complement;    ///< spectral2 only
};

EdgeSpectrum compute_edge_spectrum(SpectralKind kind, const SaddleSystem& system,
                                   const EdgeBasis& block);

std::vector<EdgeSpectrum> compute_spectra(SpectralKind kind, const SaddleSystem& system,
                                          std::span<const EdgeBasis> blocks,
                                          Execution exec = Execution::parallel);

inline constexpr double default_multiplicity_tolerance = 1e-9;

/// Number of eigenvectors actually taken when `requested` are asked for:
/// a cluster straddling the cut (relative gap <= tol) is taken whole.
int extend_to_cluster(const Eigen::VectorXd& lambda, int requested,
                      double tol = default_multiplicity_tolerance);

/// Coefficient matrix Z (block count x selected) of the first l modes.
Eigen::MatrixXd select_offline(const EdgeSpectrum& spectrum, int l,
                               double tol = default_multiplicity_tolerance);

/// Offline space: selected per-edge fields and their global coefficient matrix.
struct OfflineSpace {
    SpectralKind kind = SpectralKind::spectral1;
    std::vector<Eigen::MatrixXd> selections;
    std::vector<EdgeBasis> blocks;
    SparseMatrix R;
    std::vector<int> column_edge;
    /// min over edges of the first eigenvalue left out (+inf if none).
    double Lambda = infinite_eigenvalue;

    int size() const { return static_cast<int>(R.cols()); }
};

OfflineSpace assemble_offline(const GridHierarchy& grid, std::span<const EdgeBasis> blocks,
                              std::span<const EdgeSpectrum> spectra, int l,
                              double tol = default_multiplicity_tolerance);

} // namespace msfem
