#pragma once

#include <string>
#include <vector>

#include "bistab/analysis.hpp"
#include "bistab/dynamics.hpp"
#include "bistab/steady_state.hpp"

namespace bistab {

/// Column view of a trajectory file.
struct TrajectoryData {
    std::vector<double> times;
    std::vector<double> detunings;
    std::vector<double> intensities;
    std::vector<double> pops;
};

/// All writers emit a header row and %.9g floats; readers validate the header
/// and reject malformed rows. Failures throw FileError with the path.

void write_trace(const std::string& path, const ScanTrace& trace);
ScanTrace read_trace(const std::string& path);

void write_trajectory(const std::string& path, const Trajectory& traj);
TrajectoryData read_trajectory(const std::string& path);

void write_spectrogram(const std::string& path, const Spectrogram& spec);
Spectrogram read_spectrogram(const std::string& path);

void write_frequency_points(const std::string& path, const std::vector<FrequencyPoint>& points);

}  // namespace bistab
