#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "msfem/coarse_solver.hpp"
#include "msfem/config.hpp"
#include "msfem/transport.hpp"

namespace msfem {

PermField make_permeability(const RunConfig& config);
Eigen::VectorXd make_source(const RunConfig& config, const GridHierarchy& grid);

/// Velocity from the fine mixed solve.
VelocitySolver fine_velocity_solver(const GridHierarchy& grid, const Eigen::VectorXd& source);

/// Velocity from a fixed multiscale space R, optionally postprocessed to
/// fine-grid conservation.
VelocitySolver offline_velocity_solver(const GridHierarchy& grid, const Eigen::VectorXd& source,
                                       SparseMatrix R, bool postprocess,
                                       Execution exec = Execution::parallel);

/// Offline coefficient matrix with l functions per interior edge.
SparseMatrix offline_coefficients(const GridHierarchy& grid, const PermField& kappa,
                                  SpectralKind kind, int l, Execution exec = Execution::parallel);

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"fine",      "table",     "eigens",
                                                "oversample", "transport", "twophase"};
    return names;
}

/// Runs one experiment family and writes its CSV files plus manifest.json
/// into out_dir. Returns the files written (manifest last).
std::vector<std::filesystem::path> run(const std::string& subcommand, const RunConfig& config,
                                       const std::filesystem::path& out_dir, std::ostream& log);

} // namespace msfem
