#include "msfem/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "msfem/error.hpp"

namespace msfem {

std::string to_string(SpectralKind kind)
{
    switch (kind) {
    case SpectralKind::spectral1: return "spectral1";
    case SpectralKind::spectral2: return "spectral2";
    case SpectralKind::curl: return "curl";
    }
    return "spectral1";
}

SpectralKind spectral_kind_from_string(const std::string& name)
{
    if (name == "spectral1")
        return SpectralKind::spectral1;
    if (name == "spectral2")
        return SpectralKind::spectral2;
    if (name == "curl")
        return SpectralKind::curl;
    throw ConfigError("unknown spectral kind '" + name + "' (expected spectral1, spectral2 or curl)");
}

namespace {

int position(const std::vector<int>& sorted, int value)
{
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
    return (it != sorted.end() && *it == value) ? static_cast<int>(it - sorted.begin()) : -1;
}

/// Rows/columns of a global sparse matrix restricted to index lists.
SparseMatrix restrict(const SparseMatrix& a, const std::vector<int>& rows,
                      const std::vector<int>& cols)
{
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (SparseMatrix::InnerIterator it(a, cols[c]); it; ++it) {
            const int r = position(rows, static_cast<int>(it.row()));
            if (r >= 0)
                t.emplace_back(r, static_cast<int>(c), it.value());
        }
    }
    SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

} // namespace

SparseMatrix circulation_operator(const GridHierarchy& grid, const PermField& kappa,
                                  const Region& region, const std::vector<int>& edges)
{
    std::vector<Eigen::Triplet<double>> t;
    const auto& vertices = region.interior_vertices();
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const int v = vertices[k];
        const int i = v % (grid.n() + 1);
        const int j = v / (grid.n() + 1);
        // counter-clockwise around the dual cell: the crossed edge's normal is
        // the tangent on the south and east segments, its opposite on north and west
        const std::array<std::pair<int, double>, 4> stencil{{
            {grid.vertical_edge(i, j - 1), +1.0},
            {grid.horizontal_edge(i, j), +1.0},
            {grid.vertical_edge(i, j), -1.0},
            {grid.horizontal_edge(i - 1, j), -1.0},
        }};
        for (const auto& [e, sign] : stencil) {
            const int col = position(edges, e);
            if (col >= 0)
                t.emplace_back(static_cast<int>(k), col, sign * edge_inverse_perm(grid, kappa, e));
        }
    }
    SparseMatrix C(static_cast<Eigen::Index>(vertices.size()), static_cast<Eigen::Index>(edges.size()));
    C.setFromTriplets(t.begin(), t.end());
    return C;
}

LocalPencil build_pencil(SpectralKind kind, const SaddleSystem& system, const EdgeBasis& block)
{
    const GridHierarchy& grid = *system.grid;
    const CoarseEdge& edge = grid.coarse_edge(block.edge_id);
    const double h = grid.h();
    const Eigen::MatrixXd& psi = block.flux;

    const SparseMatrix mass = restrict(system.M, block.edges, block.edges);
    const Eigen::MatrixXd velocity_mass = symmetrized(psi.transpose() * (mass * psi));

    LocalPencil pencil;
    pencil.kind = kind;
    switch (kind) {
    case SpectralKind::spectral1: {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(block.count(), block.count());
        for (int e : edge.fine_edges) {
            const int row = position(block.edges, e);
            const Eigen::RowVectorXd trace = psi.row(row);
            a += (edge_inverse_perm(grid, system.kappa, e) / h) * trace.transpose() * trace;
        }
        const SparseMatrix div = restrict(system.B, block.cells, block.edges);
        const Eigen::MatrixXd d = div * psi;
        pencil.A = symmetrized(a);
        pencil.S = symmetrized(velocity_mass + d.transpose() * d / grid.cell_area());
        break;
    }
    case SpectralKind::spectral2: {
        if (block.pressure.rows() != static_cast<Eigen::Index>(block.cells.size()) ||
            block.pressure.cols() != block.count())
            throw ConfigError("spectral problem 2 needs the local pressures of edge " +
                              std::to_string(block.edge_id));
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(block.count(), block.count());
        for (int e : edge.fine_edges) {
            const auto side = grid.edge_cells(e);
            const Eigen::RowVectorXd jump = block.pressure.row(position(block.cells, side[0])) -
                                            block.pressure.row(position(block.cells, side[1]));
            s += h * jump.transpose() * jump;
        }
        pencil.A = velocity_mass;
        pencil.S = symmetrized(s);
        break;
    }
    case SpectralKind::curl: {
        const Region omega(grid, block.support);
        const SparseMatrix C = circulation_operator(grid, system.kappa, omega, block.edges);
        const Eigen::MatrixXd circ = C * psi;
        pencil.A = symmetrized(circ.transpose() * circ / grid.cell_area());
        pencil.S = velocity_mass;
        break;
    }
    }
    return pencil;
}

Eigenpairs solve_pencil(const LocalPencil& pencil)
{
    const Eigen::MatrixXd& definite = pencil.definite();
    Eigen::LLT<Eigen::MatrixXd> chol(definite);
    if (chol.info() != Eigen::Success)
        throw NumericError("degenerate pencil: the " + to_string(pencil.kind) +
                           " definite form is not positive definite");

    const bool swapped = pencil.kind == SpectralKind::spectral2;
    const Eigen::MatrixXd& lhs = swapped ? pencil.S : pencil.A;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(lhs, definite);
    if (solver.info() != Eigen::Success)
        throw NumericError("generalized eigensolve failed for a " + to_string(pencil.kind) + " pencil");

    const Eigen::VectorXd mu = solver.eigenvalues();
    const Eigen::MatrixXd& z = solver.eigenvectors();
    const double norm_lhs = lhs.lpNorm<1>();
    const double norm_def = definite.lpNorm<1>();
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        const double res = (lhs * z.col(k) - mu[k] * definite * z.col(k)).lpNorm<1>();
        if (res > 1e-10 * (norm_lhs + std::abs(mu[k]) * norm_def) * std::max(1.0, z.col(k).lpNorm<1>()))
            throw NumericError("eigenpair " + std::to_string(k) + " of a " + to_string(pencil.kind) +
                               " pencil misses the residual bound");
    }

    Eigenpairs out;
    const Eigen::Index m = mu.size();
    if (!swapped) {
        out.lambda = mu;
        out.vectors = z;
        return out;
    }
    // mu descending is lambda = 1/mu ascending; null directions of the jump
    // form become +inf at the end.
    out.lambda.resize(m);
    out.vectors.resize(z.rows(), m);
    const double mu_max = std::max(mu.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index src = m - 1 - k;
        out.vectors.col(k) = z.col(src);
        out.lambda[k] = mu[src] <= 1e-12 * mu_max ? infinite_eigenvalue : 1.0 / mu[src];
    }
    return out;
}

EdgeSpectrum compute_edge_spectrum(SpectralKind kind, const SaddleSystem& system,
                                   const EdgeBasis& block)
{
    EdgeSpectrum out;
    out.edge_id = block.edge_id;
    out.kind = kind;
    const LocalPencil pencil = build_pencil(kind, system, block);
    out.full = solve_pencil(pencil);
    if (kind != SpectralKind::spectral2)
        return out;

    // Field with constant unit normal trace on E_i, in block coordinates.
    const Eigen::MatrixXd traces = edge_traces(*system.grid, block);
    Eigen::VectorXd c = traces.colPivHouseholderQr().solve(Eigen::VectorXd::Ones(traces.rows()));
    c /= std::sqrt(c.dot(pencil.A * c));
    out.leading = c;

    const Eigen::Index count = block.count();
    if (count == 1)
        return out;
    const Eigen::VectorXd a = pencil.A * c;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd w = q.rightCols(count - 1);
    LocalPencil reduced;
    reduced.kind = SpectralKind::spectral2;
    reduced.A = symmetrized(w.transpose() * pencil.A * w);
    reduced.S = symmetrized(w.transpose() * pencil.S * w);
    Eigenpairs sub = solve_pencil(reduced);
    out.complement.lambda = sub.lambda;
    out.complement.vectors = w * sub.vectors;
    return out;
}

std::vector<EdgeSpectrum> compute_spectra(SpectralKind kind, const SaddleSystem& system,
                                          std::span<const EdgeBasis> blocks, Execution exec)
{
    std::vector<EdgeSpectrum> out(blocks.size());
    parallel_for(exec, static_cast<int>(blocks.size()), [&](int k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            out[i] = compute_edge_spectrum(kind, system, blocks[i]);
        } catch (const NumericError& e) {
            throw NumericError("coarse edge " + std::to_string(blocks[i].edge_id) + ": " + e.what());
        }
    });
    return out;
}

int extend_to_cluster(const Eigen::VectorXd& lambda, int requested, double tol)
{
    int l = requested;
    while (l > 0 && l < lambda.size()) {
        const double a = lambda[l - 1];
        const double b = lambda[l];
        const bool same = (std::isinf(a) && std::isinf(b)) ||
                          std::abs(b - a) <= tol * std::max(std::abs(a), std::abs(b));
        if (!same)
            break;
        ++l;
    }
    return l;
}

Eigen::MatrixXd select_offline(const EdgeSpectrum& spectrum, int l, double tol)
{
    const auto count = static_cast<int>(spectrum.full.lambda.size());
    if (l < 1 || l > count)
        throw ConfigError("requested " + std::to_string(l) + " basis functions on coarse edge " +
                          std::to_string(spectrum.edge_id) + ", which has " +
                          std::to_string(count) + " snapshots");
    if (spectrum.kind != SpectralKind::spectral2) {
        const int m = extend_to_cluster(spectrum.full.lambda, l, tol);
        return spectrum.full.vectors.leftCols(m);
    }
    if (l == 1)
        return spectrum.leading;
    const int m = extend_to_cluster(spectrum.complement.lambda, l - 1, tol);
    Eigen::MatrixXd z(spectrum.leading.size(), m + 1);
    z.col(0) = spectrum.leading;
    z.rightCols(m) = spectrum.complement.vectors.leftCols(m);
    return z;
}

OfflineSpace assemble_offline(const GridHierarchy& grid, std::span<const EdgeBasis> blocks,
                              std::span<const EdgeSpectrum> spectra, int l, double tol)
{
    if (blocks.size() != spectra.size())
        throw ConfigError("one spectrum per edge block is required");
    OfflineSpace out;
    out.kind = spectra.empty() ? SpectralKind::spectral1 : spectra.front().kind;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const EdgeSpectrum& spec = spectra[k];
        Eigen::MatrixXd z = select_offline(spec, l, tol);
        double next = infinite_eigenvalue;
        if (spec.kind == SpectralKind::spectral2) {
            const auto taken = z.cols() - 1;
            if (taken < spec.complement.lambda.size())
                next = spec.complement.lambda[taken];
        } else if (z.cols() < spec.full.lambda.size()) {
            next = spec.full.lambda[z.cols()];
        }
        out.Lambda = std::min(out.Lambda, next);
        out.blocks.push_back(blocks[k].combine(z));
        out.selections.push_back(std::move(z));
    }
    out.R = assemble_coefficients(grid, out.blocks, &out.column_edge);
    return out;
}

} // namespace msfem
