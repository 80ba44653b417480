#include "msfem/run.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "msfem/csv.hpp"
#include "msfem/error.hpp"
#include "msfem/oversample.hpp"
#include "msfem/postprocess.hpp"

namespace msfem {

PermField make_permeability(const RunConfig& config)
{
    const auto& p = config.perm;
    if (p.kind == "synthetic")
        return synthetic_field(config.n, config.seed, p.contrast);
    if (p.kind == "periodic")
        return periodic_field(config.n, p.epsilon);
    if (p.kind == "file")
        return load_layer(p.path, p.layer, config.n);
    if (p.kind == "constant")
        return PermField::constant(config.n, p.value);
    throw ConfigError("unknown permeability kind '" + p.kind + "'");
}

Eigen::VectorXd make_source(const RunConfig& config, const GridHierarchy& grid)
{
    if (config.source == "corner")
        return corner_source(grid);
    if (config.source == "corner_blocks") {
        std::vector<double> values(static_cast<std::size_t>(grid.num_blocks()), 0.0);
        values[static_cast<std::size_t>(grid.block(0, grid.N() - 1))] = 1.0;
        values[static_cast<std::size_t>(grid.block(grid.N() - 1, 0))] = -1.0;
        return block_source(grid, values);
    }
    if (config.source == "blocks") {
        std::mt19937_64 rng(config.seed ^ 0x5eedb10c5ull);
        std::vector<double> values(static_cast<std::size_t>(grid.num_blocks()));
        double mean = 0.0;
        for (double& v : values) {
            v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            mean += v;
        }
        mean /= static_cast<double>(values.size());
        for (double& v : values)
            v -= mean;
        return block_source(grid, values);
    }
    throw ConfigError("unknown source '" + config.source + "'");
}

VelocitySolver fine_velocity_solver(const GridHierarchy& grid, const Eigen::VectorXd& source)
{
    return [&grid, source](const PermField& mobility) {
        return solve_global(assemble(grid, mobility), source).flux;
    };
}

VelocitySolver offline_velocity_solver(const GridHierarchy& grid, const Eigen::VectorXd& source,
                                       SparseMatrix R, bool postprocess_flux, Execution exec)
{
    return [&grid, source, R = std::move(R), postprocess_flux, exec](const PermField& mobility) {
        const SaddleSystem system = assemble(grid, mobility);
        Eigen::VectorXd flux = solve_coarse(system, R, source).fine.flux;
        if (postprocess_flux) {
            const BlockSolvers blocks(grid, mobility, exec);
            flux = postprocess(blocks, flux, source, false, exec).flux;
        }
        return flux;
    };
}

SparseMatrix offline_coefficients(const GridHierarchy& grid, const PermField& kappa,
                                  SpectralKind kind, int l, Execution exec)
{
    const SaddleSystem system = assemble(grid, kappa);
    const BlockSolvers blocks(grid, kappa, exec);
    const SnapshotSpace snap = build_snapshot_space(blocks, exec);
    const auto spectra = compute_spectra(kind, system, snap.blocks, exec);
    return assemble_offline(grid, snap.blocks, spectra, l).R;
}

namespace {

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> files;

    std::filesystem::path add(const std::string& name)
    {
        files.push_back(dir / name);
        return files.back();
    }
};

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read back '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void run_fine(const RunConfig& config, const GridHierarchy& grid, const PermField& kappa,
              const Eigen::VectorXd& source, Outputs& out, std::ostream& log)
{
    const SaddleSystem system = assemble(grid, kappa);
    const MixedSolution fine = solve_global(system, source);
    CsvTable summary({"quantity", "value"});
    summary.add_row({"velocity_norm", format_number(energy_norm(system, fine.flux))});
    summary.add_row({"pressure_norm", format_number(pressure_norm(grid, fine.pressure))});
    summary.add_row({"max_cell_defect",
                     format_number(conservation_defect(system, fine.flux, source).lpNorm<Eigen::Infinity>())});
    summary.write(out.add("fine_summary.csv"));
    if (config.write_fields) {
        write_cell_grid(out.add("fine_pressure.csv"), grid.n(), fine.pressure);
        CsvTable flux({"edge", "flux"});
        for (int e = 0; e < grid.num_edges(); ++e)
            flux.add_row({std::to_string(e), format_number(fine.flux[e])});
        flux.write(out.add("fine_flux.csv"));
    }
    log << "fine: |v| = " << format_number(energy_norm(system, fine.flux)) << '\n';
}

void run_table(const RunConfig& config, const GridHierarchy& grid, const PermField& kappa,
               const Eigen::VectorXd& source, Execution exec, Outputs& out, std::ostream& log)
{
    const SaddleSystem system = assemble(grid, kappa);
    const BlockSolvers blocks(grid, kappa, exec);
    const SnapshotSpace snap = build_snapshot_space(blocks, exec);
    const MixedSolution fine = solve_global(system, source);
    const MixedSolution snapshot =
        solve_coarse(system, assemble_coefficients(grid, snap.blocks), source).fine;
    const auto spectra = compute_spectra(config.spectral, system, snap.blocks, exec);

    std::vector<std::string> header{"dof_per_E", "E_of_v", "E_of_p", "E_os_v", "E_os_p"};
    if (config.postprocess)
        header.push_back("E_pf_v");
    CsvTable table(header);
    CsvTable diag({"dof_per_E", "M_off", "Lambda", "coarse_residual", "infsup_sigma"});
    for (int l : config.dofs) {
        const OfflineSpace off =
            assemble_offline(grid, snap.blocks, spectra, l, config.multiplicity_tolerance);
        const CoarseSolution coarse = solve_coarse(system, off.R, source, &off.column_edge);
        Eigen::VectorXd post;
        if (config.postprocess)
            post = postprocess(blocks, coarse.fine.flux, source, config.force_all, exec).flux;
        const ErrorReport err =
            error_report(system, fine, snapshot, coarse.fine, config.postprocess ? &post : nullptr);
        std::vector<double> row{static_cast<double>(l), err.E_of_v, err.E_of_p, err.E_os_v, err.E_os_p};
        if (config.postprocess)
            row.push_back(err.E_pf_v);
        table.add_numbers(row);
        diag.add_numbers({static_cast<double>(l), static_cast<double>(off.size()), off.Lambda,
                          coarse_conservation_residual(system, coarse.fine.flux, source),
                          coarse_infsup_sigma(assemble_coarse(system, off.R, source))});
        log << "table: dof " << l << " E_of(v) = " << format_number(err.E_of_v) << '\n';
    }
    table.write(out.add("table.csv"));
    diag.write(out.add("table_diagnostics.csv"));
}

void run_eigens(const RunConfig& config, const GridHierarchy& grid, const PermField& kappa,
                Execution exec, Outputs& out, std::ostream& log)
{
    const SaddleSystem system = assemble(grid, kappa);
    const BlockSolvers blocks(grid, kappa, exec);
    const SnapshotSpace snap = build_snapshot_space(blocks, exec);
    const auto spectra = compute_spectra(config.spectral, system, snap.blocks, exec);
    CsvTable table({"edge_id", "k", "lambda", "inv_lambda"});
    for (const EdgeSpectrum& s : spectra) {
        const Eigenpairs& pairs = config.spectral == SpectralKind::spectral2 ? s.complement : s.full;
        for (Eigen::Index k = 0; k < pairs.lambda.size(); ++k) {
            const double lam = pairs.lambda[k];
            table.add_row({std::to_string(s.edge_id), std::to_string(k + 1), format_number(lam),
                           format_number(1.0 / lam)});
        }
    }
    table.write(out.add("eigenvalues.csv"));
    log << "eigens: " << spectra.size() << " edges\n";
}

void run_oversample(const RunConfig& config, const GridHierarchy& grid, const PermField& kappa,
                    const Eigen::VectorXd& source, Execution exec, Outputs& out, std::ostream& log)
{
    OversamplingStudy::Options options;
    options.layers = config.oversample.layers;
    options.case2_modes = config.oversample.case2_modes;
    options.exec = exec;
    const OversamplingStudy study(grid, kappa, source, options);

    CsvTable sv({"edge_id", "k", "sigma"});
    for (const PodModes& m : study.modes())
        for (Eigen::Index k = 0; k < m.sigma.size(); ++k)
            sv.add_row({std::to_string(m.edge_id), std::to_string(k + 1), format_number(m.sigma[k])});
    sv.write(out.add("singular_values.csv"));

    CsvTable table({"dof_per_E", "case1", "case2", "case3", "case4"});
    for (int l : config.oversample.dofs) {
        std::vector<double> row{static_cast<double>(l)};
        for (int c = 1; c <= 4; ++c) {
            const bool fits = c != 2 || l <= config.oversample.case2_modes;
            row.push_back(fits ? study.run_case(c, l).E_of_v : std::numeric_limits<double>::quiet_NaN());
        }
        table.add_numbers(row);
        log << "oversample: dof " << l << " case1 " << format_number(row[1]) << '\n';
    }
    table.write(out.add("oversample.csv"));
}

void run_transport(const RunConfig& config, const GridHierarchy& grid, const PermField& kappa,
                   const Eigen::VectorXd& source, Execution exec, bool two_phase, Outputs& out,
                   std::ostream& log)
{
    TransportOptions options;
    options.mode = two_phase ? TransportMode::two_phase : TransportMode::single_phase;
    options.cfl = config.transport.cfl;
    options.output_times = config.output_times();
    options.pressure_cadence = config.transport.pressure_cadence;
    options.max_steps = config.transport.max_steps;
    options.exec = exec;
    const Eigen::VectorXd rate = corner_rate(grid);
    const std::string tag = two_phase ? "twophase" : "transport";

    const TransportResult reference =
        impes_loop(grid, kappa, rate, options, fine_velocity_solver(grid, source));
    if (config.write_fields)
        for (std::size_t k = 0; k < reference.times.size(); ++k)
            write_cell_grid(out.add(tag + "_fine_t" + std::to_string(k + 1) + ".csv"), grid.n(),
                            reference.saturations[k]);

    CsvTable summary({"dof_per_E", "time", "relative_error"});
    for (int l : config.transport.dofs) {
        SparseMatrix R = offline_coefficients(grid, kappa, SpectralKind::spectral1, l, exec);
        const TransportResult run = impes_loop(
            grid, kappa, rate, options,
            offline_velocity_solver(grid, source, std::move(R), config.transport.postprocess, exec));
        for (std::size_t k = 0; k < run.times.size() && k < reference.times.size(); ++k) {
            summary.add_numbers({static_cast<double>(l), run.times[k],
                                 relative_saturation_error(run.saturations[k], reference.saturations[k])});
            if (config.write_fields)
                write_cell_grid(out.add(tag + "_dof" + std::to_string(l) + "_t" + std::to_string(k + 1) + ".csv"),
                                grid.n(), run.saturations[k]);
        }
        log << tag << ": dof " << l << " done\n";
    }
    summary.write(out.add(tag + "_summary.csv"));
}

} // namespace

std::vector<std::filesystem::path> run(const std::string& subcommand, const RunConfig& config,
                                       const std::filesystem::path& out_dir, std::ostream& log)
{
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end())
        throw ConfigError("unknown subcommand '" + subcommand +
                          "' (expected fine, table, eigens, oversample, transport or twophase)");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    set_thread_count(config.threads);
    const Execution exec = Execution::parallel;
    const GridHierarchy grid(config.n, config.N);
    const PermField kappa = make_permeability(config);
    const Eigen::VectorXd source = make_source(config, grid);

    Outputs out{out_dir, {}};
    if (subcommand == "fine")
        run_fine(config, grid, kappa, source, out, log);
    else if (subcommand == "table")
        run_table(config, grid, kappa, source, exec, out, log);
    else if (subcommand == "eigens")
        run_eigens(config, grid, kappa, exec, out, log);
    else if (subcommand == "oversample")
        run_oversample(config, grid, kappa, source, exec, out, log);
    else
        run_transport(config, grid, kappa, source, exec, subcommand == "twophase", out, log);

    nlohmann::ordered_json manifest;
    const std::string config_text = to_json(config);
    manifest["subcommand"] = subcommand;
    manifest["config"] = nlohmann::json::parse(config_text);
    manifest["config_hash"] = fnv1a_hex(config_text);
    manifest["files"] = nlohmann::json::array();
    for (const auto& f : out.files)
        manifest["files"].push_back({{"name", f.filename().string()}, {"fnv1a64", fnv1a_hex(read_file(f))}});
    const auto path = out.add("manifest.json");
    std::ofstream m(path, std::ios::binary);
    if (!m)
        throw IoError("cannot write '" + path.string() + "'");
    m << manifest.dump(2) << '\n';
    return out.files;
}

} // namespace msfem
