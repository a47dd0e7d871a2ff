#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bistab/analysis.hpp"
#include "bistab/config.hpp"
#include "bistab/csv_io.hpp"
#include "bistab/dynamics.hpp"
#include "bistab/errors.hpp"
#include "bistab/params.hpp"
#include "bistab/rng.hpp"
#include "bistab/steady_state.hpp"

namespace {

using namespace bistab;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<double> scan_grid(const ScanSpec& spec, ScanDirection direction) {
    std::vector<double> grid(spec.points);
    for (int i = 0; i < spec.points; ++i) {
        grid[i] = spec.start + (spec.end - spec.start) * i / (spec.points - 1);
    }
    if ((direction == ScanDirection::increasing) != (spec.end > spec.start)) {
        std::reverse(grid.begin(), grid.end());
    }
    return grid;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw FileError("cannot create output directory: " + cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

void run_params(const RunConfig& cfg) {
    const PhysicalParams& p = cfg.physical;
    const ModelParams m = cfg.model();
    std::printf("kappa_hz=%s\n", num(p.kappa / two_pi).c_str());
    std::printf("gamma_hz=%s\n", num(p.gamma / two_pi).c_str());
    std::printf("tau_s=%s\n", num(p.tau).c_str());
    std::printf("g0_hz=%s\n", num(p.g0 / two_pi).c_str());
    std::printf("delta_ca_hz=%s\n", num(p.delta_ca / two_pi).c_str());
    std::printf("n_atoms=%s\n", num(p.n_atoms).c_str());
    std::printf("i_sat_w_m2=%s\n", num(p.i_sat).c_str());
    std::printf("pump_power_w=%s\n", num(p.pump_power).c_str());
    std::printf("waist_m=%s\n", num(p.waist).c_str());
    std::printf("enhancement=%s\n", num(p.enhancement).c_str());
    std::printf("s_calibration=%s\n", num(p.s_calibration).c_str());
    std::printf("pump_peak_intensity_w_m2=%s\n", num(pump_peak_intensity(p)).c_str());
    std::printf("effective_saturation_intensity_w_m2=%s\n",
                num(effective_saturation_intensity(p)).c_str());
    std::printf("a_param=%s\n", num(m.a).c_str());
    std::printf("a_source=%s\n", cfg.a_override ? "override" : "derived");
    std::printf("s_param=%s\n", num(m.s).c_str());
    std::printf("s_source=%s\n", cfg.s_override ? "override" : "derived");
    std::printf("shift_sign=%s\n",
                m.sign == ShiftSign::figure_convention ? "figure_convention" : "as_written");
}

void run_steady(const RunConfig& cfg, double detuning) {
    const SteadySolution sol = steady_roots(detuning, cfg.model(), cfg.physical);
    std::printf("detuning=%s\n", num(sol.detuning).c_str());
    std::printf("count=%zu\n", sol.roots.size());
    for (const SteadyRoot& root : sol.roots) {
        std::printf("intensity=%s stable=%s\n", num(root.intensity).c_str(),
                    root.stable ? "true" : "false");
    }
}

void run_region(const RunConfig& cfg, double lo, double hi) {
    const auto region = bistable_region(cfg.model(), lo, hi);
    if (!region) {
        std::printf("none\n");
        return;
    }
    std::printf("lower=%s\n", num(region->lower).c_str());
    std::printf("upper=%s\n", num(region->upper).c_str());
    std::printf("width=%s\n", num(region->width()).c_str());
}

void run_scan(const RunConfig& cfg, double noise_rms, std::uint64_t seed) {
    if (noise_rms < 0.0) throw ConfigError("--noise-rms must be non-negative");
    Rng rng(seed);
    auto emit = [&](ScanDirection direction, const std::string& name) {
        ScanTrace trace =
            hysteresis_scan(scan_grid(cfg.scan, direction), direction, cfg.model(), cfg.physical);
        if (noise_rms > 0.0) {
            for (ScanSample& s : trace.samples) s.intensity += noise_rms * rng.gaussian();
        }
        const std::string path = out_path(cfg, name);
        write_trace(path, trace);
        std::printf("wrote %s\n", path.c_str());
    };
    if (cfg.scan.direction != ScanSelection::decreasing) {
        emit(ScanDirection::increasing, "scan_up.csv");
    }
    if (cfg.scan.direction != ScanSelection::increasing) {
        emit(ScanDirection::decreasing, "scan_down.csv");
    }
}

void run_dynamics(const RunConfig& cfg) {
    const ChirpSpec chirp{cfg.dynamics.chirp_start, cfg.dynamics.chirp_end,
                          cfg.dynamics.duration};
    IntegratorOptions opt;
    opt.fixed_step = cfg.dynamics.fixed_step;
    opt.fixed_dt = cfg.dynamics.fixed_dt;
    opt.saturation = cfg.dynamics.saturation;
    const Trajectory traj = integrate(NormalizedState{0.0, 0.0, 1.0}, chirp, cfg.model(),
                                      cfg.physical, cfg.dynamics.output_dt, opt);
    const std::string path = out_path(cfg, "trajectory.csv");
    write_trajectory(path, traj);
    std::printf("wrote %s (%zu samples)\n", path.c_str(), traj.times.size());
}

void run_spectrogram(const RunConfig& cfg, const std::string& input, const std::string& output,
                     const std::string& dominant_out, double band_lo, double band_hi) {
    const std::string in_path = input.empty() ? out_path(cfg, "trajectory.csv") : input;
    const TrajectoryData data = read_trajectory(in_path);
    if (data.times.size() < 2) throw ConfigError("trajectory too short: " + in_path);
    const double dt = data.times[1] - data.times[0];
    const Spectrogram spec =
        stft(data.intensities, dt, cfg.analysis.window_len, cfg.analysis.hop);
    const std::string spec_path = output.empty() ? out_path(cfg, "spectrogram.csv") : output;
    write_spectrogram(spec_path, spec);
    std::printf("wrote %s (%zu time bins, %zu frequency bins)\n", spec_path.c_str(),
                spec.times.size(), spec.freqs.size());
    if (!dominant_out.empty()) {
        const auto points = dominant_frequency(spec, band_lo, band_hi);
        write_frequency_points(dominant_out, points);
        std::printf("wrote %s\n", dominant_out.c_str());
    }
}

void run_fit(const RunConfig& cfg, const std::string& up_path, const std::string& down_path) {
    const ScanTrace up = read_trace(up_path);
    const ScanTrace down = read_trace(down_path);
    FitOptions options;
    options.a_lo = cfg.analysis.fit_a_min;
    options.a_hi = cfg.analysis.fit_a_max;
    options.s_lo = cfg.analysis.fit_s_min;
    options.s_hi = cfg.analysis.fit_s_max;
    options.sign = cfg.shift_sign;
    const FitResult fit = fit_model(up, down, cfg.physical, options);
    std::printf("a_est=%s\n", num(fit.a_est).c_str());
    std::printf("s_est=%s\n", num(fit.s_est).c_str());
    std::printf("residual_rms=%s\n", num(fit.residual_rms).c_str());
    std::printf("converged=%s\n", fit.converged ? "true" : "false");
    std::printf("iterations=%d\n", fit.iterations);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven-cavity dispersive bistability toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 12345;
    app.add_option("--config", config_path, "INI config file");
    app.add_option("--output-dir", output_dir, "Output directory (overrides config)");
    app.add_option("--seed", seed, "Seed for synthetic noise");

    CLI::App* cmd_params = app.add_subcommand("params", "Echo physical and derived parameters");
    CLI::App* cmd_steady = app.add_subcommand("steady", "Steady-state roots at one detuning");
    double detuning = 0.0;
    cmd_steady->add_option("--detuning", detuning, "Normalized detuning")->required();
    CLI::App* cmd_region = app.add_subcommand("region", "Bistable detuning interval");
    double region_lo = -20.0, region_hi = 80.0;
    cmd_region->add_option("--lo", region_lo, "Search range lower edge");
    cmd_region->add_option("--hi", region_hi, "Search range upper edge");
    CLI::App* cmd_scan = app.add_subcommand("scan", "Hysteresis scan to CSV");
    double noise_rms = 0.0;
    cmd_scan->add_option("--noise-rms", noise_rms, "Additive Gaussian intensity noise RMS");
    CLI::App* cmd_dynamics = app.add_subcommand("dynamics", "Chirped-drive trajectory to CSV");
    CLI::App* cmd_spectrogram =
        app.add_subcommand("spectrogram", "STFT of a trajectory file to CSV");
    std::string spec_input, spec_output, dominant_out;
    double band_lo = 10e3, band_hi = 150e3;
    cmd_spectrogram->add_option("--input", spec_input, "Trajectory CSV (default from output dir)");
    cmd_spectrogram->add_option("--output", spec_output, "Spectrogram CSV path");
    cmd_spectrogram->add_option("--dominant-out", dominant_out,
                                "Also write dominant-frequency CSV here");
    cmd_spectrogram->add_option("--band-lo", band_lo, "Dominant-frequency band low edge (Hz)");
    cmd_spectrogram->add_option("--band-hi", band_hi, "Dominant-frequency band high edge (Hz)");
    CLI::App* cmd_fit = app.add_subcommand("fit", "Fit (A, S) to an up/down trace pair");
    std::string up_path, down_path;
    cmd_fit->add_option("--up", up_path, "Increasing-scan CSV")->required();
    cmd_fit->add_option("--down", down_path, "Decreasing-scan CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        cfg.validate();

        if (*cmd_params) run_params(cfg);
        if (*cmd_steady) run_steady(cfg, detuning);
        if (*cmd_region) run_region(cfg, region_lo, region_hi);
        if (*cmd_scan) run_scan(cfg, noise_rms, seed);
        if (*cmd_dynamics) run_dynamics(cfg);
        if (*cmd_spectrogram) {
            run_spectrogram(cfg, spec_input, spec_output, dominant_out, band_lo, band_hi);
        }
        if (*cmd_fit) run_fit(cfg, up_path, down_path);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const FileError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    return 0;
}
