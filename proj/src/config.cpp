#include "bistab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include "bistab/errors.hpp"

namespace bistab {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

const std::map<std::string, std::vector<std::string>> k_schema = {
    {"physical",
     {"kappa_hz", "gamma_hz", "tau_s", "g0_hz", "delta_ca_hz", "n_atoms", "i_sat_w_m2",
      "pump_power_w", "waist_m", "enhancement", "s_calibration", "mirror_t", "mirror_r"}},
    {"model", {"a_param", "s_param", "shift_sign"}},
    {"scan", {"start", "end", "points", "direction"}},
    {"dynamics",
     {"chirp_start", "chirp_end", "duration_s", "output_dt_s", "fixed_step", "fixed_dt_s",
      "saturation_reference"}},
    {"analysis",
     {"window_len", "hop", "average_window", "fit_a_min", "fit_a_max", "fit_s_min",
      "fit_s_max"}},
    {"output", {"dir"}},
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

class ParsedFile {
public:
    ParsedFile(std::istream& in, const std::string& origin) : origin_(origin) {
        std::string section;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string text = trim(line);
            if (text.empty() || text[0] == '#' || text[0] == ';') continue;
            if (text.front() == '[') {
                if (text.back() != ']') fail(line_no, "malformed section header '" + text + "'");
                section = text.substr(1, text.size() - 2);
                if (k_schema.find(section) == k_schema.end()) {
                    fail(line_no, "unknown section [" + section + "]");
                }
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos) fail(line_no, "expected key = value, got '" + text + "'");
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (key.empty()) fail(line_no, "empty key");
            if (section.empty()) fail(line_no, "key '" + key + "' appears before any section");
            check_known(line_no, section, key);
            if (!entries_[section].emplace(key, Entry{value, line_no}).second) {
                fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
            }
        }
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto sec = entries_.find(section);
        return sec != entries_.end() && sec->second.count(key) > 0;
    }

    const Entry& get(const std::string& section, const std::string& key) const {
        return entries_.at(section).at(key);
    }

    double number(const std::string& section, const std::string& key) const {
        const Entry& e = get(section, key);
        double value = 0.0;
        const char* begin = e.value.data();
        const char* end = begin + e.value.size();
        const auto result = std::from_chars(begin, end, value);
        if (result.ec != std::errc{} || result.ptr != end) {
            fail(e.line, "value of " + section + "." + key + " is not a number: '" + e.value +
                             "'");
        }
        return value;
    }

    int integer(const std::string& section, const std::string& key) const {
        const Entry& e = get(section, key);
        int value = 0;
        const char* begin = e.value.data();
        const char* end = begin + e.value.size();
        const auto result = std::from_chars(begin, end, value);
        if (result.ec != std::errc{} || result.ptr != end) {
            fail(e.line, "value of " + section + "." + key + " is not an integer: '" + e.value +
                             "'");
        }
        return value;
    }

    bool boolean(const std::string& section, const std::string& key) const {
        const Entry& e = get(section, key);
        if (e.value == "true") return true;
        if (e.value == "false") return false;
        fail(e.line, "value of " + section + "." + key + " must be true or false");
        return false;
    }

    std::string text(const std::string& section, const std::string& key) const {
        return get(section, key).value;
    }

    [[noreturn]] void fail(std::size_t line_no, const std::string& message) const {
        throw ConfigError(origin_ + ":" + std::to_string(line_no) + ": " + message);
    }

private:
    void check_known(std::size_t line_no, const std::string& section,
                     const std::string& key) const {
        const std::vector<std::string>& known = k_schema.at(section);
        if (std::find(known.begin(), known.end(), key) != known.end()) return;
        // Missing unit suffix is the common mistake; suggest the suffixed key.
        for (const std::string& candidate : known) {
            if (candidate.rfind(key + "_", 0) == 0) {
                fail(line_no, "unknown key '" + key + "' in [" + section +
                                  "]; dimensional keys carry a unit suffix (did you mean '" +
                                  candidate + "'?)");
            }
        }
        for (const auto& [other, keys] : k_schema) {
            if (other != section && std::find(keys.begin(), keys.end(), key) != keys.end()) {
                fail(line_no, "key '" + key + "' does not belong in [" + section +
                                  "] (it belongs in [" + other + "])");
            }
        }
        fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> entries_;
};

}  // namespace

ModelParams RunConfig::model() const {
    return ModelParams{a_override ? *a_override : derive_a(physical),
                       s_override ? *s_override : derive_s(physical), shift_sign};
}

void RunConfig::validate() const {
    physical.validate();
    model().validate();

    if (!std::isfinite(scan.start) || !std::isfinite(scan.end) || scan.start == scan.end) {
        throw ConfigError("scan range must be a finite non-degenerate interval");
    }
    if (scan.points < 2) throw ConfigError("scan.points must be at least 2");
    if (std::abs(scan.end - scan.start) / (scan.points - 1) > 0.1 + 1e-12) {
        throw ConfigError("scan grid step exceeds 0.1 normalized detuning");
    }

    ChirpSpec{dynamics.chirp_start, dynamics.chirp_end, dynamics.duration}.validate();
    if (!(dynamics.output_dt > 0.0) || dynamics.output_dt > dynamics.duration) {
        throw ConfigError("dynamics.output_dt_s must lie in (0, duration_s]");
    }
    if (!(dynamics.fixed_dt > 0.0)) throw ConfigError("dynamics.fixed_dt_s must be positive");

    if (analysis.window_len < 2) throw ConfigError("analysis.window_len must be at least 2");
    if (analysis.hop < 1 || analysis.hop > analysis.window_len) {
        throw ConfigError("analysis.hop must lie in [1, window_len]");
    }
    if (analysis.average_window < 1 || analysis.average_window % 2 == 0) {
        throw ConfigError("analysis.average_window must be odd and positive");
    }
    if (!(analysis.fit_a_min < analysis.fit_a_max) || analysis.fit_a_min < 0.0 ||
        !(analysis.fit_s_min < analysis.fit_s_max) || analysis.fit_s_min < 0.0) {
        throw ConfigError("analysis fit bounds must satisfy 0 <= min < max");
    }
    if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    const ParsedFile file(in, origin);
    RunConfig cfg;

    if (file.has("physical", "kappa_hz")) cfg.physical.kappa = two_pi * file.number("physical", "kappa_hz");
    const bool has_gamma = file.has("physical", "gamma_hz");
    const bool has_tau = file.has("physical", "tau_s");
    if (has_gamma) cfg.physical.gamma = two_pi * file.number("physical", "gamma_hz");
    if (has_tau) cfg.physical.tau = file.number("physical", "tau_s");
    if (has_gamma && !has_tau) cfg.physical.tau = 1.0 / cfg.physical.gamma;
    if (has_tau && !has_gamma) cfg.physical.gamma = 1.0 / cfg.physical.tau;
    if (has_tau && has_gamma &&
        std::abs(cfg.physical.tau * cfg.physical.gamma - 1.0) > 1e-12) {
        throw ConfigError(origin + ": physical.tau_s and physical.gamma_hz are inconsistent; "
                                   "tau must equal 1/gamma");
    }
    if (file.has("physical", "g0_hz")) cfg.physical.g0 = two_pi * file.number("physical", "g0_hz");
    if (file.has("physical", "delta_ca_hz")) {
        cfg.physical.delta_ca = two_pi * file.number("physical", "delta_ca_hz");
    }
    if (file.has("physical", "n_atoms")) cfg.physical.n_atoms = file.number("physical", "n_atoms");
    if (file.has("physical", "i_sat_w_m2")) cfg.physical.i_sat = file.number("physical", "i_sat_w_m2");
    if (file.has("physical", "pump_power_w")) {
        cfg.physical.pump_power = file.number("physical", "pump_power_w");
    }
    if (file.has("physical", "waist_m")) cfg.physical.waist = file.number("physical", "waist_m");
    if (file.has("physical", "s_calibration")) {
        cfg.physical.s_calibration = file.number("physical", "s_calibration");
    }
    const bool has_mirror_t = file.has("physical", "mirror_t");
    const bool has_mirror_r = file.has("physical", "mirror_r");
    if (has_mirror_t != has_mirror_r) {
        throw ConfigError(origin + ": physical.mirror_t and physical.mirror_r must be supplied "
                                   "together");
    }
    if (has_mirror_t) {
        cfg.physical.mirror_t = file.number("physical", "mirror_t");
        cfg.physical.mirror_r = file.number("physical", "mirror_r");
    }
    if (file.has("physical", "enhancement")) {
        cfg.physical.enhancement = file.number("physical", "enhancement");
    } else if (has_mirror_t && has_mirror_r) {
        const double one_minus_r = 1.0 - *cfg.physical.mirror_r;
        cfg.physical.enhancement = *cfg.physical.mirror_t / (one_minus_r * one_minus_r);
    }

    if (file.has("model", "a_param")) {
        if (file.has("physical", "n_atoms")) {
            throw ConfigError(origin + ": both physical.n_atoms and model.a_param supplied; "
                                       "set exactly one");
        }
        cfg.a_override = file.number("model", "a_param");
    }
    if (file.has("model", "s_param")) {
        if (file.has("physical", "pump_power_w")) {
            throw ConfigError(origin + ": both physical.pump_power_w and model.s_param supplied; "
                                       "set exactly one");
        }
        cfg.s_override = file.number("model", "s_param");
    }
    if (file.has("model", "shift_sign")) {
        const std::string v = file.text("model", "shift_sign");
        if (v == "figure_convention") {
            cfg.shift_sign = ShiftSign::figure_convention;
        } else if (v == "as_written") {
            cfg.shift_sign = ShiftSign::as_written;
        } else {
            file.fail(file.get("model", "shift_sign").line,
                      "model.shift_sign must be figure_convention or as_written");
        }
    }

    if (file.has("scan", "start")) cfg.scan.start = file.number("scan", "start");
    if (file.has("scan", "end")) cfg.scan.end = file.number("scan", "end");
    if (file.has("scan", "points")) cfg.scan.points = file.integer("scan", "points");
    if (file.has("scan", "direction")) {
        const std::string v = file.text("scan", "direction");
        if (v == "increasing") {
            cfg.scan.direction = ScanSelection::increasing;
        } else if (v == "decreasing") {
            cfg.scan.direction = ScanSelection::decreasing;
        } else if (v == "both") {
            cfg.scan.direction = ScanSelection::both;
        } else {
            file.fail(file.get("scan", "direction").line,
                      "scan.direction must be increasing, decreasing or both");
        }
    }

    if (file.has("dynamics", "chirp_start")) {
        cfg.dynamics.chirp_start = file.number("dynamics", "chirp_start");
    }
    if (file.has("dynamics", "chirp_end")) {
        cfg.dynamics.chirp_end = file.number("dynamics", "chirp_end");
    }
    if (file.has("dynamics", "duration_s")) {
        cfg.dynamics.duration = file.number("dynamics", "duration_s");
    }
    if (file.has("dynamics", "output_dt_s")) {
        cfg.dynamics.output_dt = file.number("dynamics", "output_dt_s");
    }
    if (file.has("dynamics", "fixed_step")) {
        cfg.dynamics.fixed_step = file.boolean("dynamics", "fixed_step");
    }
    if (file.has("dynamics", "fixed_dt_s")) {
        cfg.dynamics.fixed_dt = file.number("dynamics", "fixed_dt_s");
    }
    if (file.has("dynamics", "saturation_reference")) {
        const std::string v = file.text("dynamics", "saturation_reference");
        if (v == "detuned") {
            cfg.dynamics.saturation = SaturationReference::detuned;
        } else if (v == "on_resonance") {
            cfg.dynamics.saturation = SaturationReference::on_resonance;
        } else {
            file.fail(file.get("dynamics", "saturation_reference").line,
                      "dynamics.saturation_reference must be detuned or on_resonance");
        }
    }

    if (file.has("analysis", "window_len")) {
        cfg.analysis.window_len = file.integer("analysis", "window_len");
    }
    if (file.has("analysis", "hop")) cfg.analysis.hop = file.integer("analysis", "hop");
    if (file.has("analysis", "average_window")) {
        cfg.analysis.average_window = file.integer("analysis", "average_window");
    }
    if (file.has("analysis", "fit_a_min")) cfg.analysis.fit_a_min = file.number("analysis", "fit_a_min");
    if (file.has("analysis", "fit_a_max")) cfg.analysis.fit_a_max = file.number("analysis", "fit_a_max");
    if (file.has("analysis", "fit_s_min")) cfg.analysis.fit_s_min = file.number("analysis", "fit_s_min");
    if (file.has("analysis", "fit_s_max")) cfg.analysis.fit_s_max = file.number("analysis", "fit_s_max");

    if (file.has("output", "dir")) cfg.output_dir = file.text("output", "dir");

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open config: " + path);
    return parse_config(in, path);
}

}  // namespace bistab
