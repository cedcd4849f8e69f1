// Command-line front end: simulate measurements, reconstruct with any solver,
// compute metrics on stored images, and reproduce the solver comparison table.

#include "lapvard/experiment.hpp"
#include "lapvard/io.hpp"
#include "lapvard/metrics.hpp"
#include "lapvard/parallel.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <vector>

namespace {

using namespace lapvard;

struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_output = true) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_output)
        cmd->add_option("-o,--out", opts.output_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "noise seed (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker thread count")
        ->check(CLI::PositiveNumber);
}

ExperimentConfig load_with_overrides(const CommonOpts& opts) {
    set_num_threads(opts.threads);
    ExperimentConfig cfg = load_config(opts.config_path);
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (opts.seed) cfg.noise.seed = *opts.seed;
    return cfg;
}

int cmd_simulate(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const SimulationArtifacts art = build_simulation(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const std::string dir = cfg.output_dir + "/";

    RawHeader h;
    h.rows = cfg.grid.n_pixels_per_side;
    h.cols = cfg.grid.n_pixels_per_side;
    h.units = "mm^-1";
    write_raw(dir + "truth", art.truth.pixels, h);
    write_pgm(dir + "truth.pgm", art.truth.pixels, h.rows, h.cols);

    RawHeader hs;
    hs.rows = cfg.geometry.n_angles;
    hs.cols = cfg.geometry.n_detectors;
    hs.units = "counts";
    hs.extra["intensity"] = std::to_string(cfg.noise.intensity);
    hs.extra["seed"] = std::to_string(cfg.noise.seed);
    write_raw(dir + "sinogram", art.sinogram.counts, hs);
    write_pgm(dir + "sinogram.pgm", art.sinogram.counts, hs.rows, hs.cols);

    std::cout << "wrote truth and sinogram to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_reconstruct(const CommonOpts& opts, const std::string& solver_override) {
    ExperimentConfig cfg = load_with_overrides(opts);
    if (!solver_override.empty()) cfg.solver = solver_override;
    const SolveReport report = run_experiment(cfg);
    std::printf("%s: rmse=%.6g psnr=%.4f dB (%zu iterations, outputs in %s)\n",
                report.solver.c_str(), report.rmse, report.psnr_db,
                report.rows.empty() ? size_t(0) : size_t(report.rows.back().iteration),
                cfg.output_dir.c_str());
    if (report.diverged) {
        std::cerr << "warning: objective diverged; see iterations.csv\n";
        return 1;
    }
    return 0;
}

int cmd_metrics(const std::string& recon_base, const std::string& truth_base,
                std::optional<Real> peak) {
    RawHeader hr, ht;
    const Vector recon = read_raw(recon_base, &hr);
    const Vector truth = read_raw(truth_base, &ht);
    if (hr.rows != ht.rows || hr.cols != ht.cols)
        throw std::runtime_error("metrics: image dimensions differ");
    const Real peak_value = peak ? *peak : truth.maxCoeff();
    const Real e = rmse(recon, truth);
    std::printf("rmse %.9g\npsnr_db %.6f\npeak %.9g\n", e, psnr_from_rmse(peak_value, e),
                peak_value);
    return 0;
}

int cmd_reproduce_table(const CommonOpts& opts) {
    const ExperimentConfig base = load_with_overrides(opts);
    struct Row {
        std::string solver;
        std::string label;
        bool present;
    };
    const std::vector<Row> solvers = {
        {"lapvard", "Lap-VARD", base.lapvard_present},
        {"am", "AM", base.am.present},
        {"am-wavelet", "wav-AM", base.am_wavelet.present},
        {"am-neighborhood", "nbhd-AM", base.am_neighborhood.present},
    };
    std::vector<std::pair<std::string, SolveReport>> results;
    for (const Row& row : solvers) {
        if (!row.present) {
            std::cerr << "skipping " << row.solver << " (no config block)\n";
            continue;
        }
        ExperimentConfig cfg = base;
        cfg.solver = row.solver;
        cfg.output_dir = base.output_dir + "/" + row.solver;
        std::cout << "running " << row.solver << "...\n";
        results.emplace_back(row.label, run_experiment(cfg));
    }

    std::printf("\n%-10s", "");
    for (const auto& [label, rep] : results) std::printf("%14s", label.c_str());
    std::printf("\n%-10s", "RMSE");
    for (const auto& [label, rep] : results) std::printf("%14.4e", rep.rmse);
    std::printf("\n%-10s", "PSNR(dB)");
    for (const auto& [label, rep] : results) std::printf("%14.2f", rep.psnr_db);
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet-domain statistical CT reconstruction toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_opts, rec_opts, table_opts;
    std::string solver_override;
    std::string recon_base, truth_base;
    std::optional<Real> peak;

    CLI::App* sim = app.add_subcommand("simulate", "generate phantom and sinogram");
    add_common(sim, sim_opts);

    CLI::App* rec = app.add_subcommand("reconstruct", "run a solver end to end");
    add_common(rec, rec_opts);
    rec->add_option("--solver", solver_override,
                    "solver override: lapvard | am | am-wavelet | am-neighborhood");

    CLI::App* met = app.add_subcommand("metrics", "RMSE/PSNR of a stored reconstruction");
    met->add_option("--recon", recon_base, "reconstruction raw base path (no extension)")
        ->required();
    met->add_option("--truth", truth_base, "ground-truth raw base path (no extension)")
        ->required();
    met->add_option("--peak", peak, "PSNR peak (default: ground-truth maximum)");

    CLI::App* table = app.add_subcommand(
        "reproduce-table1", "run all configured solvers and print the comparison table");
    add_common(table, table_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts);
        if (rec->parsed()) return cmd_reconstruct(rec_opts, solver_override);
        if (met->parsed()) return cmd_metrics(recon_base, truth_base, peak);
        if (table->parsed()) return cmd_reproduce_table(table_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
