#pragma once

#include "lapvard/baselines.hpp"
#include "lapvard/lap_vard.hpp"
#include "lapvard/phantom.hpp"
#include "lapvard/report.hpp"
#include "lapvard/simulate.hpp"
#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

#include <string>

namespace lapvard {

struct MetricsOptions {
    enum class PeakMode { TruthMax, Explicit };
    PeakMode peak_mode = PeakMode::TruthMax;
    Real peak = 0;  // used when Explicit
};

// Full description of one experiment: scene, measurement, solver selection
// with per-solver blocks, and output options. Loadable from a JSON file.
struct ExperimentConfig {
    GridSpec grid;
    ScanGeometry geometry;
    EllipsePhantomSpec phantom;
    NoiseSpec noise;
    Index wavelet_levels = 3;

    std::string solver = "lapvard";  // lapvard | am | am-wavelet | am-neighborhood

    struct AmBlock {
        AmConfig cfg;
        Real weight = 0;
        bool present = false;
    };
    LapVardConfig lapvard;
    bool lapvard_present = false;
    std::string lapvard_init_image;  // raw base path analyzed into init_mu; empty -> zeros
    AmBlock am, am_wavelet, am_neighborhood;

    std::string output_dir = "out";
    MetricsOptions metrics;
    Index profile_column = -1;  // -1 -> side / 2

    void validate() const;
};

ExperimentConfig load_config(const std::string& path);

struct SimulationArtifacts {
    SystemMatrix system;
    Image truth;
    Sinogram sinogram;
};

// Builds geometry, phantom and simulated counts for a config.
SimulationArtifacts build_simulation(const ExperimentConfig& cfg);

// Runs the configured solver end to end: writes ground truth, sinogram,
// reconstruction, profile CSV, per-iteration CSV and a metrics summary into
// cfg.output_dir, and returns the report. Deterministic given the config;
// partial outputs are removed if the run fails.
SolveReport run_experiment(const ExperimentConfig& cfg);

}  // namespace lapvard
