#include "lapvard/experiment.hpp"

#include "lapvard/io.hpp"
#include "lapvard/metrics.hpp"
#include "lapvard/projector.hpp"
#include "lapvard/wavelet.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

namespace lapvard {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_real(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

GridSpec parse_grid(const json& j) {
    GridSpec g;
    g.n_pixels_per_side = j.at("side").get<Index>();
    g.pixel_size = j.value("pixel_size_mm", 1.0);
    return g;
}

ScanGeometry parse_geometry(const json& j) {
    ScanGeometry g;
    g.n_angles = j.at("n_angles").get<Index>();
    g.n_detectors = j.at("n_detectors").get<Index>();
    g.detector_spacing = j.value("detector_spacing_mm", 1.0);
    return g;
}

EllipsePhantomSpec parse_phantom(const json& j) {
    EllipsePhantomSpec spec;
    spec.background = j.value("background", 0.0);
    for (const json& e : j.value("ellipses", json::array())) {
        Ellipse el;
        el.center_x = e.value("center_x", 0.0);
        el.center_y = e.value("center_y", 0.0);
        el.semi_axis_x = e.at("semi_axis_x").get<Real>();
        el.semi_axis_y = e.at("semi_axis_y").get<Real>();
        el.rotation_rad = e.value("rotation_deg", 0.0) * std::numbers::pi_v<Real> / 180;
        el.value = e.at("value").get<Real>();
        spec.ellipses.push_back(el);
    }
    return spec;
}

ExperimentConfig::AmBlock parse_am_block(const json& j) {
    ExperimentConfig::AmBlock block;
    block.cfg.n_iterations = j.value("n_iterations", Index(100));
    block.cfg.damping = j.value("damping", 1.0);
    block.weight = j.value("weight", 0.0);
    block.present = true;
    return block;
}

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    geometry.validate();
    noise.validate();
    if (solver == "lapvard") {
        if (!lapvard_present)
            throw std::invalid_argument("config: solver 'lapvard' selected but block missing");
    } else if (solver == "am") {
        if (!am.present) throw std::invalid_argument("config: solver 'am' selected but block missing");
    } else if (solver == "am-wavelet") {
        if (!am_wavelet.present)
            throw std::invalid_argument("config: solver 'am-wavelet' selected but block missing");
    } else if (solver == "am-neighborhood") {
        if (!am_neighborhood.present)
            throw std::invalid_argument(
                "config: solver 'am-neighborhood' selected but block missing");
    } else {
        throw std::invalid_argument("config: unknown solver '" + solver + "'");
    }
    if (metrics.peak_mode == MetricsOptions::PeakMode::Explicit && !(metrics.peak > 0))
        throw std::invalid_argument("config: explicit metrics peak must be > 0");
    if (profile_column >= grid.n_pixels_per_side)
        throw std::invalid_argument("config: profile_column out of range");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config: failed to parse " + path + ": " + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.grid = parse_grid(j.at("grid"));
        cfg.geometry = parse_geometry(j.at("geometry"));
        cfg.phantom = parse_phantom(j.at("phantom"));
        cfg.noise.seed = j.at("noise").value("seed", 0ULL);
        cfg.noise.intensity = j.at("noise").value("intensity", 1e5);
        cfg.wavelet_levels = j.value("wavelet_levels", Index(3));
        cfg.solver = j.value("solver", "lapvard");
        cfg.output_dir = j.value("output_dir", "out");
        cfg.profile_column = j.value("profile_column", Index(-1));

        if (j.contains("metrics")) {
            const json& m = j.at("metrics");
            const std::string mode = m.value("peak_mode", "truth-max");
            if (mode == "truth-max") {
                cfg.metrics.peak_mode = MetricsOptions::PeakMode::TruthMax;
            } else if (mode == "explicit") {
                cfg.metrics.peak_mode = MetricsOptions::PeakMode::Explicit;
                cfg.metrics.peak = m.at("peak").get<Real>();
            } else {
                throw std::runtime_error("config: unknown peak_mode '" + mode + "'");
            }
        }

        if (j.contains("lapvard")) {
            const json& l = j.at("lapvard");
            cfg.lapvard.n_outer = l.value("n_outer", Index(50));
            cfg.lapvard.newton_steps_mu = l.value("newton_steps_mu", 20);
            cfg.lapvard.newton_steps_b = l.value("newton_steps_b", 20);
            cfg.lapvard.b_domain_margin = l.value("b_domain_margin", 1e-3);
            cfg.lapvard.init_b_scale = l.value("init_b_scale", 1e-3);
            cfg.lapvard.tol_fve = l.value("tol_fve", 0.0);
            const std::string init = l.value("init_mu", "zeros");
            if (init == "from-image")
                cfg.lapvard_init_image = l.at("init_image").get<std::string>();
            else if (init != "zeros")
                throw std::runtime_error("config: init_mu must be 'zeros' or 'from-image'");
            cfg.lapvard_present = true;
        }
        if (j.contains("am")) cfg.am = parse_am_block(j.at("am"));
        if (j.contains("am-wavelet")) cfg.am_wavelet = parse_am_block(j.at("am-wavelet"));
        if (j.contains("am-neighborhood"))
            cfg.am_neighborhood = parse_am_block(j.at("am-neighborhood"));
    } catch (const json::exception& e) {
        throw std::runtime_error("config: invalid " + path + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

SimulationArtifacts build_simulation(const ExperimentConfig& cfg) {
    SimulationArtifacts art;
    art.system = build_parallel_beam(cfg.grid, cfg.geometry);
    art.truth = rasterize_phantom(cfg.phantom, cfg.grid);
    art.sinogram = simulate_counts(art.system, art.truth, cfg.noise);
    return art;
}

namespace {

// Tracks files written by one run so that failures leave no partial outputs.
class OutputSet {
public:
    explicit OutputSet(std::string dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        const std::string p = (fs::path(dir_) / name).string();
        written_.push_back(p);
        return p;
    }
    std::string raw_base(const std::string& name) {
        const std::string p = (fs::path(dir_) / name).string();
        written_.push_back(p + ".raw");
        written_.push_back(p + ".hdr");
        return p;
    }

    void discard_all() {
        for (const std::string& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
};

void write_image_outputs(OutputSet& out, const std::string& name, const Image& img,
                         const std::string& units) {
    RawHeader h;
    h.rows = img.side;
    h.cols = img.side;
    h.units = units;
    write_raw(out.raw_base(name), img.pixels, h);
    write_pgm(out.path(name + ".pgm"), img.pixels, img.side, img.side);
}

void write_iterations_csv(const std::string& path, const SolveReport& report) {
    std::ofstream csv(path);
    csv << "iteration,objective,cumulative_ms\n";
    for (const IterationRow& row : report.rows)
        csv << row.iteration << ',' << format_real(row.objective) << ',' << row.cumulative_ms
            << '\n';
}

}  // namespace

SolveReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    OutputSet out(cfg.output_dir);
    try {
        const SimulationArtifacts art = build_simulation(cfg);
        const Index side = cfg.grid.n_pixels_per_side;

        write_image_outputs(out, "truth", art.truth, "mm^-1");
        {
            RawHeader h;
            h.rows = cfg.geometry.n_angles;
            h.cols = cfg.geometry.n_detectors;
            h.units = "counts";
            h.extra["intensity"] = format_real(cfg.noise.intensity);
            h.extra["seed"] = std::to_string(cfg.noise.seed);
            write_raw(out.raw_base("sinogram"), art.sinogram.counts, h);
            write_pgm(out.path("sinogram.pgm"), art.sinogram.counts, cfg.geometry.n_angles,
                      cfg.geometry.n_detectors);
        }

        Image recon;
        SolveReport report;
        if (cfg.solver == "lapvard") {
            const WaveletBasis basis{cfg.wavelet_levels, side};
            basis.validate();
            LapVardConfig lv = cfg.lapvard;
            if (!cfg.lapvard_init_image.empty()) {
                RawHeader h;
                const Vector pixels = read_raw(cfg.lapvard_init_image, &h);
                if (h.rows != side || h.cols != side)
                    throw std::runtime_error("init_image dimensions do not match the grid");
                lv.init_mu = analyze(basis, Image{side, pixels});
            }
            const SystemMatrix composed = compose_with_basis(art.system, basis);
            auto [state, rep] = run_lapvard(composed, art.sinogram, lv);
            recon = synthesize(basis, state.mu);
            report = std::move(rep);

            RawHeader h;
            h.rows = side;
            h.cols = side;
            h.extra["content"] = "coefficients";
            write_raw(out.raw_base("state_mu"), state.mu, h);
            write_raw(out.raw_base("state_b"), state.b, h);
            write_raw(out.raw_base("state_gamma"), state.gamma, h);
        } else {
            PenaltyConfig penalty;
            AmConfig am_cfg;
            if (cfg.solver == "am") {
                penalty = {PenaltyKind::None, cfg.am.weight, cfg.wavelet_levels};
                am_cfg = cfg.am.cfg;
            } else if (cfg.solver == "am-wavelet") {
                penalty = {PenaltyKind::WaveletL1, cfg.am_wavelet.weight, cfg.wavelet_levels};
                am_cfg = cfg.am_wavelet.cfg;
            } else {
                penalty = {PenaltyKind::NeighborhoodQuadratic, cfg.am_neighborhood.weight,
                           cfg.wavelet_levels};
                am_cfg = cfg.am_neighborhood.cfg;
            }
            auto [img, rep] = run_am(art.system, art.sinogram, penalty, am_cfg);
            recon = std::move(img);
            report = std::move(rep);
            report.solver = cfg.solver;
        }

        write_image_outputs(out, "recon", recon, "mm^-1");

        report.peak = cfg.metrics.peak_mode == MetricsOptions::PeakMode::Explicit
                          ? cfg.metrics.peak
                          : art.truth.pixels.maxCoeff();
        if (!(report.peak > 0))
            throw std::runtime_error("metrics peak is not positive; set an explicit peak");
        report.rmse = rmse(recon, art.truth);
        report.psnr_db = psnr_from_rmse(report.peak, report.rmse);

        const Index column = cfg.profile_column >= 0 ? cfg.profile_column : side / 2;
        const Vector profile_truth = extract_profile(art.truth, column);
        const Vector profile_recon = extract_profile(recon, column);
        {
            std::ofstream csv(out.path("profile.csv"));
            csv << "row,truth,reconstruction\n";
            for (Index r = 0; r < side; ++r)
                csv << r << ',' << format_real(profile_truth[r]) << ','
                    << format_real(profile_recon[r]) << '\n';
        }

        write_iterations_csv(out.path("iterations.csv"), report);

        {
            json m;
            m["solver"] = report.solver;
            m["rmse"] = report.rmse;
            m["psnr_db"] = std::isfinite(report.psnr_db) ? json(report.psnr_db) : json("inf");
            m["peak"] = report.peak;
            m["profile_column"] = column;
            m["early_stop"] = report.early_stop;
            m["diverged"] = report.diverged;
            m["clamps_triggered"] = report.clamps_triggered;
            std::ofstream mf(out.path("metrics.json"));
            mf << m.dump(2) << '\n';
        }
        return report;
    } catch (...) {
        out.discard_all();
        throw;
    }
}

}  // namespace lapvard
