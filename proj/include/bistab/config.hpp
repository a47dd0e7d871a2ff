#pragma once

#include <istream>
#include <optional>
#include <string>

#include "bistab/analysis.hpp"
#include "bistab/dynamics.hpp"
#include "bistab/params.hpp"

namespace bistab {

enum class ScanSelection { increasing, decreasing, both };

struct ScanSpec {
    double start = -5.0;
    double end = 12.0;
    int points = 341;
    ScanSelection direction = ScanSelection::both;
};

struct DynamicsSpec {
    double chirp_start = 30.0;
    double chirp_end = -5.0;
    double duration = 0.068;     // s
    double output_dt = 0.5e-6;   // s
    bool fixed_step = false;
    double fixed_dt = 10e-9;     // s
    SaturationReference saturation = SaturationReference::detuned;
};

struct AnalysisSpec {
    int window_len = 256;
    int hop = 128;
    int average_window = 11;
    double fit_a_min = 0.0;
    double fit_a_max = 60.0;
    double fit_s_min = 0.0;
    double fit_s_max = 30.0;
};

/// One run's full configuration. Model parameter overrides are exclusive with
/// their physical counterparts: a_param vs n_atoms, s_param vs pump_power_w.
struct RunConfig {
    PhysicalParams physical;
    std::optional<double> a_override;
    std::optional<double> s_override;
    ShiftSign shift_sign = ShiftSign::figure_convention;
    ScanSpec scan;
    DynamicsSpec dynamics;
    AnalysisSpec analysis;
    std::string output_dir = ".";

    /// Effective model parameters: overrides where given, else derived.
    ModelParams model() const;

    /// Throws ConfigError on any violated constraint.
    void validate() const;
};

/// Parses the strict INI config format. Unknown sections or keys, duplicate
/// keys, type errors and exclusivity violations all raise ConfigError naming
/// the offender; dimensional keys carry unit suffixes (_hz, _s, _w, _m).
/// An empty stream yields the defaults above.
RunConfig parse_config(std::istream& in, const std::string& origin);

/// parse_config on a file; FileError if unreadable.
RunConfig load_config(const std::string& path);

}  // namespace bistab
