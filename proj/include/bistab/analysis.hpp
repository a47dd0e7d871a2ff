#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bistab/params.hpp"
#include "bistab/steady_state.hpp"

namespace bistab {

/// Short-time Fourier magnitudes; magnitude[ti][fi] belongs to times[ti] and
/// freqs[fi]. Frequencies run from 0 to the Nyquist frequency.
struct Spectrogram {
    std::vector<double> times;   // section centers (s)
    std::vector<double> freqs;   // Hz
    std::vector<std::vector<double>> magnitude;
};

struct FrequencyPoint {
    double time = 0.0;                  // s
    std::optional<double> frequency;    // Hz, nullopt when no oscillation
};

struct FitOptions {
    double a_lo = 0.0, a_hi = 60.0;    // bounds on A
    double s_lo = 0.0, s_hi = 30.0;    // bounds on S
    ShiftSign sign = ShiftSign::figure_convention;
    std::optional<std::pair<double, double>> seed;  // (A, S) start, else grid search
    int max_iter = 600;
    double tol = 1e-6;                 // simplex spread for convergence, absolute
};

struct FitResult {
    double a_est = 0.0;
    double s_est = 0.0;
    double residual_rms = 0.0;  // weighted, dimensionless intensity units
    bool converged = false;
    int iterations = 0;
};

/// In-place-size DFT of a complex series; radix-2 FFT for power-of-two lengths,
/// direct evaluation otherwise.
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> series);

/// STFT with periodic Hann window and per-section mean subtraction. Sections of
/// window_len samples start every hop samples; one-sided magnitudes.
Spectrogram stft(std::span<const double> series, double sample_dt, int window_len, int hop);

/// Per time bin, the frequency of the largest magnitude inside [f_lo, f_hi].
/// Bins whose peak is below 5x the median band magnitude report no oscillation.
std::vector<FrequencyPoint> dominant_frequency(const Spectrogram& spec, double f_lo,
                                               double f_hi);

/// Centered moving average of the intensities; window must be odd and no larger
/// than the trace. Endpoints use symmetrically shrunk windows, so the output
/// length equals the input length.
ScanTrace average_trace(const ScanTrace& trace, int window);

/// Weighted sum of squared differences between measured traces and the model
/// hysteresis scan at (a, s); samples within two grid steps of a model fold
/// jump (successive intensity change above 0.1) are weighted 0.25. This is the
/// objective fit_model minimizes. Returns {objective, weight_sum}.
std::pair<double, double> fit_objective(const ScanTrace& up, const ScanTrace& down, double a,
                                        double s, ShiftSign sign, const PhysicalParams& p);

/// Fits (A, S) to an up/down trace pair by Nelder-Mead with bound clamping,
/// seeded from options.seed or a 20x20 bound-box grid search. The traces must
/// cover the same detuning grid in opposite directions.
FitResult fit_model(const ScanTrace& up, const ScanTrace& down, const PhysicalParams& p,
                    const FitOptions& options = {});

}  // namespace bistab
