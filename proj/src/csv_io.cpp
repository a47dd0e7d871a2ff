#include "bistab/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "bistab/errors.hpp"

namespace bistab {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open for reading: " + path);
    return in;
}

double parse_double(std::string_view field, const std::string& path, std::size_t line_no) {
    double value = 0.0;
    const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
    if (result.ec != std::errc{} || result.ptr != field.data() + field.size()) {
        throw FileError("malformed number '" + std::string(field) + "' at line " +
                        std::to_string(line_no) + " in " + path);
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void expect_header(std::ifstream& in, const std::string& expected, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line != expected) {
        throw FileError("expected header '" + expected + "' in " + path);
    }
}

}  // namespace

void write_trace(const std::string& path, const ScanTrace& trace) {
    std::ofstream out = open_out(path);
    out << "detuning_norm,intensity_norm\n";
    for (const ScanSample& s : trace.samples) {
        out << fmt(s.detuning) << ',' << fmt(s.intensity) << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

ScanTrace read_trace(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "detuning_norm,intensity_norm", path);
    ScanTrace trace;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 2) {
            throw FileError("expected 2 fields at line " + std::to_string(line_no) + " in " +
                            path);
        }
        trace.samples.push_back(ScanSample{parse_double(fields[0], path, line_no),
                                           parse_double(fields[1], path, line_no)});
    }
    if (trace.samples.size() >= 2) {
        const bool increasing = trace.samples[1].detuning > trace.samples[0].detuning;
        trace.direction = increasing ? ScanDirection::increasing : ScanDirection::decreasing;
        for (std::size_t i = 1; i < trace.samples.size(); ++i) {
            const double diff = trace.samples[i].detuning - trace.samples[i - 1].detuning;
            if (increasing ? diff <= 0.0 : diff >= 0.0) {
                throw FileError("detunings not monotone in " + path);
            }
        }
    }
    return trace;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t_s,detuning_norm,intensity_norm,pop_fraction\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt(traj.times[i]) << ',' << fmt(traj.detunings[i]) << ','
            << fmt(traj.states[i].intensity()) << ',' << fmt(traj.states[i].pop) << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

TrajectoryData read_trajectory(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "t_s,detuning_norm,intensity_norm,pop_fraction", path);
    TrajectoryData data;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 4) {
            throw FileError("expected 4 fields at line " + std::to_string(line_no) + " in " +
                            path);
        }
        data.times.push_back(parse_double(fields[0], path, line_no));
        data.detunings.push_back(parse_double(fields[1], path, line_no));
        data.intensities.push_back(parse_double(fields[2], path, line_no));
        data.pops.push_back(parse_double(fields[3], path, line_no));
    }
    return data;
}

void write_spectrogram(const std::string& path, const Spectrogram& spec) {
    std::ofstream out = open_out(path);
    out << "t_s,freq_hz,magnitude\n";
    for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
        for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
            out << fmt(spec.times[ti]) << ',' << fmt(spec.freqs[k]) << ','
                << fmt(spec.magnitude[ti][k]) << '\n';
        }
    }
    if (!out) throw FileError("write failed: " + path);
}

Spectrogram read_spectrogram(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "t_s,freq_hz,magnitude", path);
    Spectrogram spec;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 3) {
            throw FileError("expected 3 fields at line " + std::to_string(line_no) + " in " +
                            path);
        }
        const double t = parse_double(fields[0], path, line_no);
        const double f = parse_double(fields[1], path, line_no);
        const double mag = parse_double(fields[2], path, line_no);
        if (spec.times.empty() || t != spec.times.back()) {
            spec.times.push_back(t);
            spec.magnitude.emplace_back();
        }
        if (spec.times.size() == 1) {
            spec.freqs.push_back(f);
        } else {
            const std::size_t k = spec.magnitude.back().size();
            if (k >= spec.freqs.size() || std::abs(spec.freqs[k] - f) > 1e-9 * (1.0 + f)) {
                throw FileError("inconsistent frequency grid at line " + std::to_string(line_no) +
                                " in " + path);
            }
        }
        spec.magnitude.back().push_back(mag);
    }
    for (const std::vector<double>& row : spec.magnitude) {
        if (row.size() != spec.freqs.size()) {
            throw FileError("ragged spectrogram blocks in " + path);
        }
    }
    return spec;
}

void write_frequency_points(const std::string& path, const std::vector<FrequencyPoint>& points) {
    std::ofstream out = open_out(path);
    out << "t_s,frequency_hz\n";
    for (const FrequencyPoint& pt : points) {
        out << fmt(pt.time) << ',';
        if (pt.frequency) out << fmt(*pt.frequency);
        out << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace bistab
