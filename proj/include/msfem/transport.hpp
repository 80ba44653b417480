#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "msfem/fine_solver.hpp"
#include "msfem/parallel.hpp"

namespace msfem {

/// Water/oil relative permeabilities S^2 and (1-S)^2 with viscosities mu_w, mu_o.
struct FluidModel {
    double mu_w = 1.0;
    double mu_o = 5.0;

    double krw(double s) const { return s * s; }
    double kro(double s) const { return (1.0 - s) * (1.0 - s); }
    /// total mobility
    double eta(double s) const { return krw(s) / mu_w + kro(s) / mu_o; }
    /// fractional flow of water
    double F(double s) const { return (krw(s) / mu_w) / eta(s); }
    double dF(double s) const;
    /// max of F' on [0, 1], sampled
    double max_dF() const;
};

inline constexpr double unbounded_step = std::numeric_limits<double>::infinity();

/// cfl * min over cells of |tau| / (outflow of the cell); +inf when nothing flows.
double cfl_dt(const GridHierarchy& grid, const Eigen::VectorXd& flux, double cfl);

/// One explicit upwind step: |tau|(S' - S)/dt + sum of upwind S (v.n) = r |tau|.
/// `rate` holds r per cell.
Eigen::VectorXd step_single_phase(const GridHierarchy& grid, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& flux, const Eigen::VectorXd& rate,
                                  double dt, Execution exec = Execution::parallel);

/// Same with F(upwind S) in the face flux.
Eigen::VectorXd step_two_phase(const GridHierarchy& grid, const Eigen::VectorXd& s,
                               const Eigen::VectorXd& flux, const Eigen::VectorXd& rate,
                               double dt, const FluidModel& model,
                               Execution exec = Execution::parallel);

/// |sum |tau| (S' - S) - dt sum r |tau|| relative to dt sum |r| |tau|.
double balance_defect(const GridHierarchy& grid, const Eigen::VectorXd& before,
                      const Eigen::VectorXd& after, const Eigen::VectorXd& rate, double dt);

enum class TransportMode { single_phase, two_phase };

struct TransportOptions {
    TransportMode mode = TransportMode::single_phase;
    double cfl = 0.5;
    std::vector<double> output_times;  ///< ascending; the run stops at the last one
    int pressure_cadence = 1;          ///< transport steps per pressure update (two-phase)
    long max_steps = 0;                ///< 0: no limit
    Execution exec = Execution::parallel;
    FluidModel model;
};

struct StepRecord {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double balance = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
};

struct TransportResult {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> saturations;
    std::vector<StepRecord> log;
    Eigen::VectorXd final_saturation;
    double final_time = 0.0;
};

/// Velocity for the total mobility field eta(S) kappa (kappa itself in
/// single-phase mode).
using VelocitySolver = std::function<Eigen::VectorXd(const PermField& mobility)>;

/// Saturation starts at zero. Single-phase mode solves for the velocity
/// once; two-phase mode re-solves every `pressure_cadence` steps.
/// Throws NumericError when a step leaves the admissible saturation range.
TransportResult impes_loop(const GridHierarchy& grid, const PermField& kappa,
                           const Eigen::VectorXd& rate, const TransportOptions& options,
                           const VelocitySolver& velocity);

/// r = 1 on the top-left fine cell, 0 elsewhere.
Eigen::VectorXd corner_rate(const GridHierarchy& grid);

/// Relative L2 difference ||a - b|| / ||b|| of two cell fields.
double relative_saturation_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

} // namespace msfem
