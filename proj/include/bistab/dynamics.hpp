#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "bistab/params.hpp"

namespace bistab {

/// State of the normalized model: cavity field quadratures and the population
/// difference fraction n = N_delta / N.
struct NormalizedState {
    double field_re = 0.0;
    double field_im = 0.0;
    double pop = 1.0;

    double intensity() const { return field_re * field_re + field_im * field_im; }
};

/// Linear detuning ramp in normalized units; equal endpoints give a fixed drive.
struct ChirpSpec {
    double start = 0.0;     // normalized detuning at t = 0
    double end = 0.0;       // normalized detuning at t = duration
    double duration = 0.0;  // s

    static ChirpSpec fixed(double detuning, double duration) {
        return ChirpSpec{detuning, detuning, duration};
    }

    double detuning_at(double t) const {
        return start + (end - start) * (t / duration);
    }

    /// Throws ConfigError on non-positive duration or non-finite endpoints.
    void validate() const;
};

/// Which saturation intensity enters the population equation. `detuned` uses
/// the effective detuned value, making the dynamic fixed point coincide with
/// the steady-state cubic root; `on_resonance` is the literal on-resonance
/// reading, kept for comparison.
enum class SaturationReference { detuned, on_resonance };

struct IntegratorOptions {
    double abs_tol = 1e-9;        // absolute tolerance per component
    bool fixed_step = false;      // classic RK4 fallback when true
    double fixed_dt = 10e-9;      // s, fixed-step size
    SaturationReference saturation = SaturationReference::detuned;
};

/// Uniformly resampled trajectory; states[i] belongs to times[i] and the
/// instantaneous drive detunings[i].
struct Trajectory {
    std::vector<double> times;
    std::vector<double> detunings;
    std::vector<NormalizedState> states;
};

/// de/dt = (kappa/2) [ i - e + i (detuning + sigma A n) e ].
std::complex<double> field_derivative(const NormalizedState& st, double detuning,
                                      const ModelParams& m, const PhysicalParams& p);

/// dn/dt = (1/tau) [ 1 - n (1 + S_eff |e|^2) ].
double population_derivative(const NormalizedState& st, const ModelParams& m,
                             const PhysicalParams& p,
                             SaturationReference ref = SaturationReference::detuned);

/// Analytic Jacobian of (field_re, field_im, pop) dynamics at the given state.
Eigen::Matrix3d jacobian(const NormalizedState& st, double detuning, const ModelParams& m,
                         const PhysicalParams& p,
                         SaturationReference ref = SaturationReference::detuned);

/// Integrates the coupled equations with an adaptive Dormand-Prince 5(4) pair
/// (or fixed-step RK4) and resamples onto a uniform grid of spacing output_dt
/// by cubic Hermite interpolation. The adaptive step never exceeds
/// 0.05 min(1/kappa, tau). Throws NumericalError with the failure time on
/// step-size underflow.
Trajectory integrate(const NormalizedState& initial, const ChirpSpec& chirp,
                     const ModelParams& m, const PhysicalParams& p, double output_dt,
                     const IntegratorOptions& opt = {});

}  // namespace bistab
