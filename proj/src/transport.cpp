#include "msfem/transport.hpp"

#include <algorithm>
#include <cmath>

#include "msfem/error.hpp"

namespace msfem {

double FluidModel::dF(double s) const
{
    const double a = krw(s) / mu_w;
    const double b = kro(s) / mu_o;
    const double da = 2.0 * s / mu_w;
    const double db = -2.0 * (1.0 - s) / mu_o;
    const double sum = a + b;
    return (da * b - a * db) / (sum * sum);
}

double FluidModel::max_dF() const
{
    constexpr int samples = 100000;
    double best = 0.0;
    for (int k = 0; k <= samples; ++k)
        best = std::max(best, dF(static_cast<double>(k) / samples));
    return best;
}

double cfl_dt(const GridHierarchy& grid, const Eigen::VectorXd& flux, double cfl)
{
    if (!(cfl > 0.0 && cfl <= 1.0))
        throw ConfigError("cfl must lie in (0, 1]");
    double worst = 0.0;
    for (int c = 0; c < grid.num_cells(); ++c) {
        const auto e = grid.cell_edges(c);
        const double out = std::max(-flux[e[0]], 0.0) + std::max(flux[e[1]], 0.0) +
                           std::max(-flux[e[2]], 0.0) + std::max(flux[e[3]], 0.0);
        worst = std::max(worst, out);
    }
    return worst > 0.0 ? cfl * grid.cell_area() / worst : unbounded_step;
}

namespace {

template <class Flow>
Eigen::VectorXd upwind_step(const GridHierarchy& grid, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& flux, const Eigen::VectorXd& rate, double dt,
                            Execution exec, Flow flow)
{
    if (s.size() != grid.num_cells() || rate.size() != grid.num_cells() ||
        flux.size() != grid.num_edges())
        throw ConfigError("transport step needs cell saturations, cell rates and edge fluxes");
    Eigen::VectorXd next(s.size());
    const double scale = dt / grid.cell_area();
    parallel_for(exec, grid.num_cells(), [&](int c) {
        const auto e = grid.cell_edges(c);
        double out = 0.0;
        for (int k = 0; k < 4; ++k) {
            // W and S faces point into the cell
            const double q = (k % 2 == 0 ? -1.0 : 1.0) * flux[e[static_cast<std::size_t>(k)]];
            if (q == 0.0)
                continue;
            const auto side = grid.edge_cells(e[static_cast<std::size_t>(k)]);
            const int other = side[0] == c ? side[1] : side[0];
            const double upstream = (q > 0.0 || other < 0) ? s[c] : s[other];
            out += flow(upstream) * q;
        }
        next[c] = s[c] + dt * rate[c] - scale * out;
    });
    return next;
}

} // namespace

Eigen::VectorXd step_single_phase(const GridHierarchy& grid, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& flux, const Eigen::VectorXd& rate,
                                  double dt, Execution exec)
{
    return upwind_step(grid, s, flux, rate, dt, exec, [](double v) { return v; });
}

Eigen::VectorXd step_two_phase(const GridHierarchy& grid, const Eigen::VectorXd& s,
                               const Eigen::VectorXd& flux, const Eigen::VectorXd& rate,
                               double dt, const FluidModel& model, Execution exec)
{
    return upwind_step(grid, s, flux, rate, dt, exec, [&](double v) { return model.F(v); });
}

double balance_defect(const GridHierarchy& grid, const Eigen::VectorXd& before,
                      const Eigen::VectorXd& after, const Eigen::VectorXd& rate, double dt)
{
    const double area = grid.cell_area();
    const double stored = area * (after - before).sum();
    const double injected = dt * area * rate.sum();
    const double scale = dt * area * rate.cwiseAbs().sum();
    const double defect = std::abs(stored - injected);
    return scale > 0.0 ? defect / scale : defect;
}

TransportResult impes_loop(const GridHierarchy& grid, const PermField& kappa,
                           const Eigen::VectorXd& rate, const TransportOptions& options,
                           const VelocitySolver& velocity)
{
    if (options.output_times.empty())
        throw ConfigError("transport needs at least one output time");
    if (!std::is_sorted(options.output_times.begin(), options.output_times.end()) ||
        options.output_times.front() <= 0.0)
        throw ConfigError("output times must be positive and ascending");
    if (options.pressure_cadence < 1)
        throw ConfigError("pressure cadence must be at least 1");

    const bool two_phase = options.mode == TransportMode::two_phase;
    // F(S) steepens the characteristic speed by up to max F'
    const double cfl = two_phase ? options.cfl / options.model.max_dF() : options.cfl;
    const double tol = 1e-12;

    TransportResult result;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(grid.num_cells());
    Eigen::VectorXd flux = velocity(two_phase ? kappa.scaled(std::vector<double>(
                                                    static_cast<std::size_t>(grid.num_cells()),
                                                    options.model.eta(0.0)))
                                              : kappa);
    double t = 0.0;
    long step = 0;
    std::size_t next_output = 0;
    while (next_output < options.output_times.size()) {
        if (options.max_steps > 0 && step >= options.max_steps)
            break;
        if (two_phase && step > 0 && step % options.pressure_cadence == 0) {
            std::vector<double> mobility(static_cast<std::size_t>(grid.num_cells()));
            for (int c = 0; c < grid.num_cells(); ++c)
                mobility[static_cast<std::size_t>(c)] = options.model.eta(s[c]);
            flux = velocity(kappa.scaled(mobility));
        }
        const double target = options.output_times[next_output];
        const double dt = std::min(cfl_dt(grid, flux, cfl), target - t);
        const Eigen::VectorXd next = two_phase
                                         ? step_two_phase(grid, s, flux, rate, dt, options.model, options.exec)
                                         : step_single_phase(grid, s, flux, rate, dt, options.exec);
        StepRecord rec;
        rec.step = ++step;
        rec.dt = dt;
        rec.balance = balance_defect(grid, s, next, rate, dt);
        rec.min_s = next.minCoeff();
        rec.max_s = next.maxCoeff();
        if (rec.min_s < -tol || (two_phase && rec.max_s > 1.0 + tol))
            throw NumericError("saturation left its admissible range at step " + std::to_string(step) +
                               " (min " + std::to_string(rec.min_s) + ", max " +
                               std::to_string(rec.max_s) + "); reduce the time step");
        s = next;
        t = (dt == target - t) ? target : t + dt;
        rec.t = t;
        result.log.push_back(rec);
        if (t >= target) {
            result.times.push_back(target);
            result.saturations.push_back(s);
            ++next_output;
        }
    }
    result.final_saturation = s;
    result.final_time = t;
    return result;
}

Eigen::VectorXd corner_rate(const GridHierarchy& grid)
{
    Eigen::VectorXd r = Eigen::VectorXd::Zero(grid.num_cells());
    r[grid.cell(0, grid.n() - 1)] = 1.0;
    return r;
}

double relative_saturation_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const double denom = b.norm();
    if (!(denom > 0.0))
        throw NumericError("relative saturation error undefined: reference saturation is zero");
    return (a - b).norm() / denom;
}

} // namespace msfem
