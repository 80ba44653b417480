// Acceptance checks: msfem_acceptance [criterion ...]
// Prints one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "msfem/coarse_solver.hpp"
#include "msfem/error.hpp"
#include "msfem/oversample.hpp"
#include "msfem/postprocess.hpp"
#include "msfem/run.hpp"
#include "msfem/spectral.hpp"
#include "msfem/transport.hpp"

using namespace msfem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Worst coarse conservation residual, relative to ||f||_1, over every coarse
// solve made by the other criteria.
struct Conservation {
    double worst = 0.0;
    int solves = 0;

    void record(const SaddleSystem& s, const Eigen::VectorXd& flux, const Eigen::VectorXd& F)
    {
        worst = std::max(worst, coarse_conservation_residual(s, flux, F) / F.lpNorm<1>());
        ++solves;
    }
    void record(double residual, const Eigen::VectorXd& F)
    {
        worst = std::max(worst, residual / F.lpNorm<1>());
        ++solves;
    }
};

Conservation conservation;

// n = 40, N = 4, synthetic seed 7 at contrast 1e4, corner source.
struct TableProblem {
    GridHierarchy grid{40, 4};
    PermField kappa = synthetic_field(40, 7, 1e4);
    SaddleSystem system = assemble(grid, kappa);
    Eigen::VectorXd F = corner_source(grid);
    BlockSolvers blocks{grid, kappa};
    SnapshotSpace snaps = build_snapshot_space(blocks);
    std::vector<EdgeSpectrum> spectra = compute_spectra(SpectralKind::spectral1, system, snaps.blocks);
    MixedSolution fine = solve_global(system, F);
    MixedSolution snapshot = solve(assemble_coefficients(grid, snaps.blocks));

    MixedSolution solve(const SparseMatrix& R)
    {
        MixedSolution x = solve_coarse(system, R, F).fine;
        conservation.record(system, x.flux, F);
        return x;
    }
    ErrorReport offline(int l)
    {
        return error_report(system, fine, snapshot, solve(assemble_offline(grid, snaps.blocks, spectra, l).R));
    }
};

TableProblem& table_problem()
{
    static TableProblem p;
    return p;
}

Outcome full_snapshot_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    TableProblem& p = table_problem();
    const ErrorReport r = p.offline(p.grid.ratio());
    const double t = seconds_since(t0);
    return {r.E_os_v <= 1e-10 && r.E_os_p <= 1e-10 && t < 10.0,
            "E_os(v) " + fmt("%.3e", r.E_os_v) + ", E_os(p) " + fmt("%.3e", r.E_os_p) + ", " +
                fmt("%.2f", t) + " s"};
}

Outcome spectral_decay()
{
    TableProblem& p = table_problem();
    bool pass = true;
    std::string seq;
    double previous = INFINITY;
    for (int l : {1, 3, 5, 7, 9}) {
        const double e = p.offline(l).E_os_v;
        if (!(e < previous || previous < 1e-12))
            pass = false;
        previous = e;
        seq += fmt("%.3e ", e);
    }
    const double full = p.offline(p.grid.ratio()).E_os_v;
    pass = pass && full < 1e-8;
    int bad_edges = 0;
    for (const EdgeSpectrum& s : p.spectra)
        for (Eigen::Index k = 1; k < s.full.lambda.size(); ++k)
            if (1.0 / s.full.lambda[k] > 1.0 / s.full.lambda[k - 1]) {
                ++bad_edges;
                break;
            }
    pass = pass && bad_edges == 0;
    return {pass, "E_os(v) at 1,3,5,7,9: " + seq + "; at J " + fmt("%.3e", full) +
                      "; edges with rising 1/lambda " + std::to_string(bad_edges)};
}

// Dense bordered solve, independent of the library's sparse saddle solver.
Eigen::VectorXd brute_force_flux(const SaddleSystem& s, const Eigen::VectorXd& F)
{
    // domain-boundary fluxes are zero and drop out
    std::vector<int> free;
    for (int e = 0; e < s.grid->num_edges(); ++e)
        if (!s.grid->on_domain_boundary(e))
            free.push_back(e);
    const Eigen::MatrixXd Mf(s.M), Bf(s.B);
    const auto ne = static_cast<Eigen::Index>(free.size());
    const Eigen::Index nc = Bf.rows();
    Eigen::MatrixXd M(ne, ne), B(nc, ne);
    for (Eigen::Index i = 0; i < ne; ++i) {
        B.col(i) = Bf.col(free[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < ne; ++j)
            M(i, j) = Mf(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ne + nc + 1, ne + nc + 1);
    K.topLeftCorner(ne, ne) = M;
    K.block(0, ne, ne, nc) = -B.transpose();
    K.block(ne, 0, nc, ne) = -B;
    K.block(ne, ne + nc, nc, 1).setConstant(-1.0);
    K.block(ne + nc, ne, 1, nc).setConstant(-1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ne + nc + 1);
    rhs.segment(ne, nc) = -F;
    const Eigen::VectorXd x = K.partialPivLu().solve(rhs);
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(s.grid->num_edges());
    for (Eigen::Index i = 0; i < ne; ++i)
        flux[free[static_cast<std::size_t>(i)]] = x[i];
    return flux;
}

Outcome blockwise_source_exactness()
{
    const GridHierarchy g(16, 4);
    const PermField k = synthetic_field(16, 7, 1e4);
    const SaddleSystem s = assemble(g, k);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> values(16);
    double mean = 0.0;
    for (double& v : values) {
        v = u(rng);
        mean += v / 16.0;
    }
    for (double& v : values)
        v -= mean;
    const Eigen::VectorXd F = block_source(g, values);
    const BlockSolvers blocks(g, k);
    const Eigen::VectorXd vH =
        solve_coarse(s, assemble_coefficients(g, build_snapshot_space(blocks).blocks), F).fine.flux;
    conservation.record(s, vH, F);
    const double e = relative_velocity_error(s, vH, brute_force_flux(s, F));
    return {e <= 1e-10, "||v_H - v_h|| / ||v_h|| = " + fmt("%.3e", e)};
}

Outcome postprocessed_conservation()
{
    TableProblem& p = table_problem();
    const double f_inf = (p.F / p.grid.cell_area()).lpNorm<Eigen::Infinity>();
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (int l : {1, 3, 5}) {
        const MixedSolution vH = p.solve(assemble_offline(p.grid, p.snaps.blocks, p.spectra, l).R);
        const Eigen::VectorXd post = postprocess(p.blocks, vH.flux, p.F, true).flux;
        // per unit cell measure, like f itself
        const double r = fine_conservation_residual(p.system, post, p.F) / p.grid.cell_area();
        worst = std::max(worst, r);
        const ErrorReport e = error_report(p.system, p.fine, p.snapshot, vH, &post);
        pass = pass && r <= 1e-10 * std::max(1.0, f_inf) && e.E_pf_v <= e.E_of_v + 1e-12;
        detail += "dof " + std::to_string(l) + ": E_pf " + fmt("%.4f", e.E_pf_v) + " vs E_of " +
                  fmt("%.4f", e.E_of_v) + "; ";
    }
    return {pass, detail + "max cell residual " + fmt("%.3e", worst)};
}

Outcome oversampling()
{
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c = parse_config(R"({"n": 100, "N": 10, "perm": "periodic", "source": "corner_blocks"})");
    const GridHierarchy g(c.n, c.N);
    const Eigen::VectorXd F = make_source(c, g);
    const PermField k = make_permeability(c);
    const OversamplingStudy study(g, k, F);
    double e[5] = {};
    for (int k = 1; k <= 4; ++k) {
        double residual = 0.0;
        e[k] = study.run_case(k, 2, &residual).E_of_v;
        conservation.record(residual, F);
    }
    const double t = seconds_since(t0);
    return {e[1] <= 0.05 && e[2] <= 0.05 && e[1] <= e[3] + 0.01 && t < 300.0,
            "cases 1-4: " + fmt("%.4f ", e[1]) + fmt("%.4f ", e[2]) + fmt("%.4f ", e[3]) +
                fmt("%.4f", e[4]) + ", " + fmt("%.1f", t) + " s"};
}

VelocitySolver recorded_offline_solver(const GridHierarchy& g, const Eigen::VectorXd& F, SparseMatrix R)
{
    return [&g, F, R = std::move(R)](const PermField& mobility) {
        const SaddleSystem s = assemble(g, mobility);
        const Eigen::VectorXd vH = solve_coarse(s, R, F).fine.flux;
        conservation.record(s, vH, F);
        return postprocess(BlockSolvers(g, mobility), vH, F).flux;
    };
}

Outcome transport_balance()
{
    const GridHierarchy g(40, 4);
    const PermField k = synthetic_field(40, 7, 1e4);
    const Eigen::VectorXd F = corner_source(g);
    TransportOptions o;
    o.output_times = {1e12};
    o.max_steps = 500;
    double worst = 0.0, lo = INFINITY, hi = -INFINITY;
    bool pass = true;
    for (auto mode : {TransportMode::single_phase, TransportMode::two_phase}) {
        o.mode = mode;
        try {
            const TransportResult r = impes_loop(
                g, k, corner_rate(g), o,
                recorded_offline_solver(g, F, offline_coefficients(g, k, SpectralKind::spectral1, 3)));
            pass = pass && r.log.size() == 500;
            for (const StepRecord& s : r.log) {
                worst = std::max(worst, s.balance);
                if (mode == TransportMode::two_phase) {
                    lo = std::min(lo, s.min_s);
                    hi = std::max(hi, s.max_s);
                }
            }
        } catch (const NumericError& e) {
            return {false, e.what()};
        }
    }
    pass = pass && worst <= 1e-12 && lo >= 0.0 && hi <= 1.0;
    return {pass, "max balance defect " + fmt("%.3e", worst) + ", two-phase S in [" + fmt("%.3g", lo) +
                      ", " + fmt("%.6g", hi) + "]"};
}

std::vector<double> saturation_errors(const char* perm)
{
    RunConfig c = parse_config(std::string(R"({"n": 40, "N": 5, "perm": ")") + perm + "\"}");
    const GridHierarchy g(c.n, c.N);
    const PermField k = make_permeability(c);
    const Eigen::VectorXd F = make_source(c, g);
    TransportOptions o;
    o.output_times = c.output_times();
    const Eigen::VectorXd reference =
        impes_loop(g, k, corner_rate(g), o, fine_velocity_solver(g, F)).final_saturation;
    std::vector<double> out;
    for (int l : {1, 3, 5}) {
        const TransportResult r = impes_loop(
            g, k, corner_rate(g), o,
            recorded_offline_solver(g, F, offline_coefficients(g, k, SpectralKind::spectral1, l)));
        out.push_back(relative_saturation_error(r.final_saturation, reference));
    }
    return out;
}

Outcome transport_accuracy()
{
    const std::vector<double> e = saturation_errors("synthetic");
    const std::vector<double> per = saturation_errors("periodic");
    const bool pass = e[1] < e[0] && e[2] < e[1] && e[0] <= 0.15;
    return {pass, "synthetic 1,3,5: " + fmt("%.4f ", e[0]) + fmt("%.4f ", e[1]) + fmt("%.4f", e[2]) +
                      " (periodic field: " + fmt("%.4f ", per[0]) + fmt("%.4f ", per[1]) +
                      fmt("%.4f", per[2]) + ")"};
}

Outcome fluid_closed_forms()
{
    const FluidModel m;
    const double a = std::abs(m.F(0.5) - 5.0 / 6.0);
    const double b = std::abs(m.eta(0.0) - 0.2);
    const double c = std::abs(m.eta(1.0) - 1.0);
    return {a <= 1e-15 && b <= 1e-15 && c <= 1e-15,
            "|F(0.5)-5/6| " + fmt("%.1e", a) + ", |eta(0)-0.2| " + fmt("%.1e", b) + ", |eta(1)-1| " +
                fmt("%.1e", c)};
}

// Hand-rolled dense kernels for the optimization oracle; they share nothing
// with the library's eigensolver path.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& a)
{
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw NumericError("oracle: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

// L^-1 X L^-T for lower triangular L.
Eigen::MatrixXd whiten(const Eigen::MatrixXd& l, const Eigen::MatrixXd& x)
{
    const Eigen::Index n = l.rows();
    auto forward = [&](Eigen::MatrixXd b) {
        for (Eigen::Index c = 0; c < b.cols(); ++c)
            for (Eigen::Index i = 0; i < n; ++i) {
                double s = b(i, c);
                for (Eigen::Index k = 0; k < i; ++k)
                    s -= l(i, k) * b(k, c);
                b(i, c) = s / l(i, i);
            }
        return b;
    };
    const Eigen::MatrixXd y = forward(x);
    return forward(Eigen::MatrixXd(y.transpose()));
}

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double jacobi_max_eigenvalue(Eigen::MatrixXd a)
{
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off <= 1e-30 * a.squaredNorm())
            break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    double best = -INFINITY;
    for (Eigen::Index k = 0; k < n; ++k)
        best = std::max(best, a(k, k));
    return best;
}

// Basis of {x : x^T S w = 0 for every column w of W}, by Gram-Schmidt in the
// S inner product.
Eigen::MatrixXd s_orthogonal_complement(const Eigen::MatrixXd& S, const Eigen::MatrixXd& W)
{
    const Eigen::Index n = S.rows();
    std::vector<Eigen::VectorXd> basis;
    auto sdot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.dot(S * y); };
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        Eigen::VectorXd w = W.col(c);
        for (const auto& b : basis)
            w -= sdot(b, w) * b;
        basis.push_back(w / std::sqrt(sdot(w, w)));
    }
    const std::size_t fixed = basis.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k);
        const double before = std::sqrt(sdot(e, e));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis)
                e -= sdot(b, e) * b;
        const double norm = std::sqrt(sdot(e, e));
        if (norm > 1e-8 * before)
            basis.push_back(e / norm);
    }
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(basis.size() - fixed));
    for (std::size_t k = fixed; k < basis.size(); ++k)
        out.col(static_cast<Eigen::Index>(k - fixed)) = basis[k];
    return out;
}

Outcome optimization_viewpoint()
{
    TableProblem& p = table_problem();
    std::mt19937_64 rng(20);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto& block = p.snaps.blocks[rng() % p.snaps.blocks.size()];
        const LocalPencil full = build_pencil(SpectralKind::spectral1, p.system, block);
        std::vector<int> idx(static_cast<std::size_t>(block.count()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            idx[k] = static_cast<int>(k);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(5);

        LocalPencil sub;
        sub.kind = SpectralKind::spectral1;
        sub.A.resize(5, 5);
        sub.S.resize(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                sub.A(i, j) = full.A(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
                sub.S(i, j) = full.S(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            }
        const Eigenpairs e = solve_pencil(sub);

        // max s/a over the s-complement of the first k eigenvectors is 1/lambda_{k+1}
        for (int k = 0; k < 5; ++k) {
            const Eigen::MatrixXd Q = s_orthogonal_complement(sub.S, e.vectors.leftCols(k));
            const Eigen::MatrixXd a = Q.transpose() * sub.A * Q;
            const Eigen::MatrixXd s = Q.transpose() * sub.S * Q;
            const double oracle = jacobi_max_eigenvalue(whiten(cholesky(a), s));
            const Eigen::VectorXd z = e.vectors.col(k);
            const double quotient = z.dot(sub.S * z) / z.dot(sub.A * z);
            worst = std::max(worst, std::abs(quotient - oracle) / oracle);
            worst = std::max(worst, std::abs(1.0 / e.lambda[k] - oracle) / oracle);
        }
    }
    return {worst <= 1e-8, "max relative mismatch " + fmt("%.3e", worst)};
}

Outcome coarse_conservation(const std::set<int>& already)
{
    // make sure the other criteria have contributed their coarse solves
    const std::map<int, std::function<Outcome()>> producers{
        {1, full_snapshot_exactness}, {2, spectral_decay},   {3, blockwise_source_exactness},
        {5, postprocessed_conservation}, {6, oversampling}, {7, transport_balance},
        {8, transport_accuracy}};
    for (const auto& [k, f] : producers)
        if (!already.count(k))
            f();
    return {conservation.worst <= 1e-10, std::to_string(conservation.solves) +
                                             " coarse solves, max residual / ||f||_1 " +
                                             fmt("%.3e", conservation.worst)};
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > 10) {
            std::fprintf(stderr, "usage: msfem_acceptance [criterion 1-10 ...]\n");
            return 2;
        }
        wanted.insert(k);
    }
    if (wanted.empty())
        for (int k = 1; k <= 10; ++k)
            wanted.insert(k);

    const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
        {1, {"full snapshot space is exact", full_snapshot_exactness}},
        {2, {"spectral error decay", spectral_decay}},
        {3, {"blockwise source reproduced by snapshots", blockwise_source_exactness}},
        {5, {"postprocessed velocity conserves per fine cell", postprocessed_conservation}},
        {6, {"oversampling on the periodic field", oversampling}},
        {7, {"transport mass balance and saturation bounds", transport_balance}},
        {8, {"multiscale transport accuracy", transport_accuracy}},
        {9, {"fluid model closed forms", fluid_closed_forms}},
        {10, {"eigenvectors solve the constrained maximization", optimization_viewpoint}},
    };

    std::map<int, std::pair<std::string, Outcome>> results;
    std::set<int> done;
    for (int k : wanted) {
        if (k == 4)
            continue;
        const auto& [name, f] = criteria.at(k);
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        results[k] = {name, o};
        done.insert(k);
    }
    if (wanted.count(4)) {
        Outcome o;
        try {
            o = coarse_conservation(done);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        results[4] = {"coarse conservation in every coarse solve", o};
    }

    bool all = true;
    for (const auto& [k, r] : results) {
        std::printf("%s %2d  %s: %s\n", r.second.pass ? "PASS" : "FAIL", k, r.first.c_str(),
                    r.second.detail.c_str());
        all = all && r.second.pass;
    }
    return all ? 0 : 1;
}
