#include "msfem/fine_solver.hpp"

#include <cmath>
#include <string>

#include "msfem/error.hpp"

namespace msfem {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::array<double, 2> mass_stencil(MassMatrix kind)
{
    // Exact integral of the RT0 shape functions of one direction over a
    // square cell, in edge-integrated flux unknowns: independent of h.
    if (kind == MassMatrix::lumped)
        return {0.5, 0.0};
    return {1.0 / 3.0, 1.0 / 6.0};
}

double edge_inverse_perm(const GridHierarchy& grid, const PermField& kappa, int edge)
{
    double sum = 0.0;
    int count = 0;
    for (int c : grid.edge_cells(edge)) {
        if (c >= 0) {
            sum += kappa.inverse(c);
            ++count;
        }
    }
    return sum / count;
}

SaddleSystem assemble(const GridHierarchy& grid, const PermField& kappa, MassMatrix mass)
{
    if (kappa.n() != grid.n())
        throw ConfigError("permeability resolution " + std::to_string(kappa.n()) +
                          " does not match fine grid n=" + std::to_string(grid.n()));
    const auto [diag, off] = mass_stencil(mass);

    Triplets m, b;
    m.reserve(static_cast<std::size_t>(grid.num_cells()) * 8);
    b.reserve(static_cast<std::size_t>(grid.num_cells()) * 4);
    for (int c = 0; c < grid.num_cells(); ++c) {
        const double kinv = kappa.inverse(c);
        const auto e = grid.cell_edges(c);
        for (int pair = 0; pair < 2; ++pair) {
            const int lo = e[static_cast<std::size_t>(2 * pair)];
            const int hi = e[static_cast<std::size_t>(2 * pair + 1)];
            m.emplace_back(lo, lo, diag * kinv);
            m.emplace_back(hi, hi, diag * kinv);
            if (off != 0.0) {
                m.emplace_back(lo, hi, off * kinv);
                m.emplace_back(hi, lo, off * kinv);
            }
            b.emplace_back(c, lo, -1.0);
            b.emplace_back(c, hi, +1.0);
        }
    }

    SaddleSystem sys{&grid, SparseMatrix(grid.num_edges(), grid.num_edges()),
                     SparseMatrix(grid.num_cells(), grid.num_edges()), mass, kappa};
    sys.M.setFromTriplets(m.begin(), m.end());
    sys.B.setFromTriplets(b.begin(), b.end());
    return sys;
}

Eigen::VectorXd cell_integrals(const GridHierarchy& grid, std::span<const double> values)
{
    if (values.size() != static_cast<std::size_t>(grid.num_cells()))
        throw ConfigError("source needs one value per fine cell");
    Eigen::VectorXd out(grid.num_cells());
    for (int c = 0; c < grid.num_cells(); ++c)
        out[c] = values[static_cast<std::size_t>(c)] * grid.cell_area();
    return out;
}

Eigen::VectorXd corner_source(const GridHierarchy& grid)
{
    Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.num_cells());
    const int n = grid.n();
    f[grid.cell(0, n - 1)] = grid.cell_area();
    f[grid.cell(n - 1, 0)] = -grid.cell_area();
    return f;
}

Eigen::VectorXd block_source(const GridHierarchy& grid, std::span<const double> block_values)
{
    if (block_values.size() != static_cast<std::size_t>(grid.num_blocks()))
        throw ConfigError("block source needs one value per coarse block");
    Eigen::VectorXd f(grid.num_cells());
    for (int c = 0; c < grid.num_cells(); ++c)
        f[c] = block_values[static_cast<std::size_t>(grid.block_of_cell(c))] * grid.cell_area();
    return f;
}

namespace {

double max_row_sum(const SparseMatrix& a, int row_begin, int row_end)
{
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            sums[it.row()] += std::abs(it.value());
    double best = 0.0;
    for (int r = row_begin; r < row_end; ++r)
        best = std::max(best, sums[r]);
    return best;
}

double inf_norm(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

} // namespace

LocalMixedProblem::LocalMixedProblem(Region region, const PermField& kappa, MassMatrix mass)
    : region_(std::move(region))
{
    const GridHierarchy& grid = region_.grid();
    if (kappa.n() != grid.n())
        throw ConfigError("permeability resolution does not match the fine grid");

    const int n_int = static_cast<int>(region_.interior_edges().size());
    const int n_bnd = static_cast<int>(region_.boundary_edges().size());
    const int n_cell = region_.num_cells();
    const int n_comp = region_.num_components();
    const auto [diag, off] = mass_stencil(mass);

    boundary_component_.resize(static_cast<std::size_t>(n_bnd));
    for (int b = 0; b < n_bnd; ++b) {
        const auto side = grid.edge_cells(region_.boundary_edges()[static_cast<std::size_t>(b)]);
        const int inside = region_.boundary_signs()[static_cast<std::size_t>(b)] > 0 ? side[0] : side[1];
        boundary_component_[static_cast<std::size_t>(b)] =
            region_.component_of()[static_cast<std::size_t>(region_.local_cell(inside))];
    }

    Triplets mii, mib, di, db;
    for (int lc = 0; lc < n_cell; ++lc) {
        const int c = region_.cells()[static_cast<std::size_t>(lc)];
        const double kinv = kappa.inverse(c);
        const auto e = grid.cell_edges(c);
        for (int pair = 0; pair < 2; ++pair) {
            const int ge[2] = {e[static_cast<std::size_t>(2 * pair)], e[static_cast<std::size_t>(2 * pair + 1)]};
            int li[2], lb[2];
            for (int s = 0; s < 2; ++s) {
                li[s] = region_.local_interior_edge(ge[s]);
                lb[s] = li[s] < 0 ? region_.local_boundary_edge(ge[s]) : -1;
            }
            for (int s = 0; s < 2; ++s) {
                const double sign = s == 0 ? -1.0 : 1.0;
                if (li[s] >= 0)
                    di.emplace_back(lc, li[s], sign);
                else
                    db.emplace_back(lc, lb[s], sign);
                if (li[s] < 0)
                    continue;
                mii.emplace_back(li[s], li[s], diag * kinv);
                const int t = 1 - s;
                if (off == 0.0)
                    continue;
                if (li[t] >= 0)
                    mii.emplace_back(li[s], li[t], off * kinv);
                else
                    mib.emplace_back(li[s], lb[t], off * kinv);
            }
        }
    }

    m_ii_.resize(n_int, n_int);
    m_ii_.setFromTriplets(mii.begin(), mii.end());
    m_ib_.resize(n_int, n_bnd);
    m_ib_.setFromTriplets(mib.begin(), mib.end());
    d_i_.resize(n_cell, n_int);
    d_i_.setFromTriplets(di.begin(), di.end());
    d_b_.resize(n_cell, n_bnd);
    d_b_.setFromTriplets(db.begin(), db.end());

    // [ M   -D^T   0 ] [u]   [ -M_ib g      ]
    // [ -D   0    -C ] [p] = [ -(F - D_b g) ]
    // [ 0   -C^T   0 ] [mu]  [ 0            ]
    Triplets k;
    k.reserve(mii.size() + 2 * di.size() + 2 * static_cast<std::size_t>(n_cell));
    for (const auto& t : mii)
        k.emplace_back(t.row(), t.col(), t.value());
    for (const auto& t : di) {
        k.emplace_back(t.col(), n_int + t.row(), -t.value());
        k.emplace_back(n_int + t.row(), t.col(), -t.value());
    }
    for (int lc = 0; lc < n_cell; ++lc) {
        const int comp = region_.component_of()[static_cast<std::size_t>(lc)];
        k.emplace_back(n_int + lc, n_int + n_cell + comp, -1.0);
        k.emplace_back(n_int + n_cell + comp, n_int + lc, -1.0);
    }
    const int size = n_int + n_cell + n_comp;
    system_.resize(size, size);
    system_.setFromTriplets(k.begin(), k.end());
    system_.makeCompressed();

    norm_momentum_ = max_row_sum(system_, 0, n_int);
    norm_continuity_ = max_row_sum(system_, n_int, size);

    // The bordered gauge row couples every cell and ruins the sparse LU, so
    // the factored matrix drops one pressure unknown and its continuity row
    // per component. For compatible data the dropped row is implied by the
    // others and the multiplier vanishes; solve() restores the zero mean.
    reduced_row_.assign(static_cast<std::size_t>(size), -1);
    std::vector<char> pinned(static_cast<std::size_t>(n_comp), 0);
    int next = 0;
    for (int r = 0; r < n_int; ++r)
        reduced_row_[static_cast<std::size_t>(r)] = next++;
    for (int lc = 0; lc < n_cell; ++lc) {
        const auto comp = static_cast<std::size_t>(region_.component_of()[static_cast<std::size_t>(lc)]);
        if (!pinned[comp]) {
            pinned[comp] = 1;
            continue;
        }
        reduced_row_[static_cast<std::size_t>(n_int + lc)] = next++;
    }
    Triplets kr;
    kr.reserve(k.size());
    for (const auto& t : k) {
        const int r = reduced_row_[static_cast<std::size_t>(t.row())];
        const int c = reduced_row_[static_cast<std::size_t>(t.col())];
        if (r >= 0 && c >= 0)
            kr.emplace_back(r, c, t.value());
    }
    SparseMatrix reduced(next, next);
    reduced.setFromTriplets(kr.begin(), kr.end());
    reduced.makeCompressed();

    lu_.analyzePattern(reduced);
    lu_.factorize(reduced);
    if (lu_.info() != Eigen::Success)
        throw NumericError("local mixed system on " + std::to_string(n_cell) +
                           " cells is singular: " + lu_.lastErrorMessage());
    reduced_size_ = next;
}

Eigen::VectorXd LocalMixedProblem::reduced_solve(const Eigen::VectorXd& full_rhs) const
{
    const int n_int = static_cast<int>(region_.interior_edges().size());
    const int n_cell = region_.num_cells();
    const int n_comp = region_.num_components();
    Eigen::VectorXd br(reduced_size_);
    for (Eigen::Index r = 0; r < full_rhs.size(); ++r) {
        const int k = reduced_row_[static_cast<std::size_t>(r)];
        if (k >= 0)
            br[k] = full_rhs[r];
    }
    const Eigen::VectorXd y = lu_.solve(br);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(full_rhs.size());
    for (Eigen::Index r = 0; r < x.size(); ++r) {
        const int k = reduced_row_[static_cast<std::size_t>(r)];
        if (k >= 0)
            x[r] = y[k];
    }
    std::vector<double> mean(static_cast<std::size_t>(n_comp), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_comp), 0);
    for (int lc = 0; lc < n_cell; ++lc) {
        const auto comp = static_cast<std::size_t>(region_.component_of()[static_cast<std::size_t>(lc)]);
        mean[comp] += x[n_int + lc];
        ++count[comp];
    }
    for (int lc = 0; lc < n_cell; ++lc) {
        const auto comp = static_cast<std::size_t>(region_.component_of()[static_cast<std::size_t>(lc)]);
        x[n_int + lc] -= mean[comp] / count[comp];
    }
    return x;
}

LocalSolution LocalMixedProblem::solve(const Eigen::VectorXd& boundary_flux,
                                       const Eigen::VectorXd& rhs) const
{
    const int n_int = static_cast<int>(region_.interior_edges().size());
    const int n_bnd = static_cast<int>(region_.boundary_edges().size());
    const int n_cell = region_.num_cells();
    const int n_comp = region_.num_components();
    if (boundary_flux.size() != n_bnd || rhs.size() != n_cell)
        throw ConfigError("local solve data does not match the region (" +
                          std::to_string(n_bnd) + " boundary edges, " + std::to_string(n_cell) +
                          " cells)");

    std::vector<double> defect(static_cast<std::size_t>(n_comp), 0.0);
    std::vector<double> scale(static_cast<std::size_t>(n_comp), 0.0);
    for (int lc = 0; lc < n_cell; ++lc) {
        const auto comp = static_cast<std::size_t>(region_.component_of()[static_cast<std::size_t>(lc)]);
        defect[comp] += rhs[lc];
        scale[comp] += std::abs(rhs[lc]);
    }
    for (int b = 0; b < n_bnd; ++b) {
        const auto comp = static_cast<std::size_t>(boundary_component_[static_cast<std::size_t>(b)]);
        defect[comp] -= region_.boundary_signs()[static_cast<std::size_t>(b)] * boundary_flux[b];
        scale[comp] += std::abs(boundary_flux[b]);
    }
    for (int comp = 0; comp < n_comp; ++comp) {
        const auto k = static_cast<std::size_t>(comp);
        if (std::abs(defect[k]) > compatibility_tolerance * scale[k])
            throw NumericError("incompatible local Neumann data on component " +
                               std::to_string(comp) + ": source minus net outflow = " +
                               std::to_string(defect[k]));
    }

    const int size = n_int + n_cell + n_comp;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
    if (n_bnd > 0) {
        b.head(n_int) = -(m_ib_ * boundary_flux);
        b.segment(n_int, n_cell) = -(rhs - d_b_ * boundary_flux);
    } else {
        b.segment(n_int, n_cell) = -rhs;
    }

    Eigen::VectorXd x = reduced_solve(b);
    double err_m = 0.0, err_c = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd r = b - system_ * x;
        const double xn = inf_norm(x);
        err_m = inf_norm(r.head(n_int)) /
                std::max(norm_momentum_ * xn + inf_norm(b.head(n_int)), 1e-300);
        err_c = inf_norm(r.tail(n_cell + n_comp)) /
                std::max(norm_continuity_ * xn + inf_norm(b.tail(n_cell + n_comp)), 1e-300);
        if (err_m <= 1e-15 && err_c <= 1e-15)
            break;
        x += reduced_solve(r);
    }
    const Eigen::VectorXd r = b - system_ * x;
    const double xn = inf_norm(x);
    err_m = inf_norm(r.head(n_int)) / std::max(norm_momentum_ * xn + inf_norm(b.head(n_int)), 1e-300);
    err_c = inf_norm(r.tail(n_cell + n_comp)) /
            std::max(norm_continuity_ * xn + inf_norm(b.tail(n_cell + n_comp)), 1e-300);
    if (err_m > residual_tolerance || err_c > residual_tolerance || !x.allFinite())
        throw NumericError("local mixed solve missed the residual contract (momentum " +
                           std::to_string(err_m) + ", continuity " + std::to_string(err_c) + ")");

    LocalSolution out;
    out.interior_flux = x.head(n_int);
    out.boundary_flux = boundary_flux;
    out.pressure = x.segment(n_int, n_cell);
    return out;
}

MixedSolution to_global(const Region& region, const LocalSolution& local)
{
    const GridHierarchy& grid = region.grid();
    MixedSolution out{Eigen::VectorXd::Zero(grid.num_edges()), Eigen::VectorXd::Zero(grid.num_cells())};
    for (std::size_t k = 0; k < region.interior_edges().size(); ++k)
        out.flux[region.interior_edges()[k]] = local.interior_flux[static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < region.boundary_edges().size(); ++k)
        out.flux[region.boundary_edges()[k]] = local.boundary_flux[static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < region.cells().size(); ++k)
        out.pressure[region.cells()[k]] = local.pressure[static_cast<Eigen::Index>(k)];
    return out;
}

MixedSolution solve_global(const SaddleSystem& system, const Eigen::VectorXd& source)
{
    const GridHierarchy& grid = *system.grid;
    if (source.size() != grid.num_cells())
        throw ConfigError("source needs one value per fine cell");
    const double total = source.sum();
    const double scale = source.lpNorm<1>();
    if (std::abs(total) > LocalMixedProblem::compatibility_tolerance * scale)
        throw NumericError("incompatible source: integral " + std::to_string(total) +
                           " must vanish under zero-flux boundary conditions");

    LocalMixedProblem problem(Region(grid, CellBox{0, 0, grid.n(), grid.n()}), system.kappa,
                              system.mass);
    const auto local = problem.solve(
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.region().boundary_edges().size())),
        source);
    return to_global(problem.region(), local);
}

double energy_norm(const SaddleSystem& system, const Eigen::VectorXd& flux)
{
    return std::sqrt(std::max(0.0, flux.dot(system.M * flux)));
}

double pressure_norm(const GridHierarchy& grid, const Eigen::VectorXd& pressure)
{
    return std::sqrt(grid.cell_area() * pressure.squaredNorm());
}

Eigen::VectorXd conservation_defect(const SaddleSystem& system, const Eigen::VectorXd& flux,
                                    const Eigen::VectorXd& source)
{
    return system.B * flux - source;
}

} // namespace msfem
