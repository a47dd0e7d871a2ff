#pragma once

#include <optional>
#include <vector>

#include "bistab/dynamics.hpp"
#include "bistab/params.hpp"

namespace bistab {

struct SteadyRoot {
    double intensity = 0.0;  // normalized |e|^2
    bool stable = false;
};

/// Steady-state roots at one detuning, intensities ascending.
struct SteadySolution {
    double detuning = 0.0;  // normalized, 2 delta_pc / kappa
    std::vector<SteadyRoot> roots;
};

enum class ScanDirection { increasing, decreasing };

struct ScanSample {
    double detuning = 0.0;
    double intensity = 0.0;
};

/// Branch-following scan; samples ordered as visited.
struct ScanTrace {
    ScanDirection direction = ScanDirection::increasing;
    std::vector<ScanSample> samples;
};

struct BistableRegion {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
};

/// Normalized transmission of the empty cavity, 1 / (1 + detuning^2).
double empty_cavity_intensity(double detuning);

/// Residual g(x) = x (1 + D(x)^2) - 1 with D = detuning + sigma A / (1 + S x);
/// its zeros on [0, 1] are the steady-state intensities.
double steady_residual(double intensity, double detuning, const ModelParams& m);

/// Steady-state intensities at one detuning, ascending, without stability
/// classification. Each value satisfies |steady_residual| < 1e-10. Throws
/// NumericalError when S > 0 but the cubic degenerates.
std::vector<double> steady_intensities(double detuning, const ModelParams& m);

/// Full state at the fixed point carrying the given steady intensity:
/// e = (-D + i) / (1 + D^2), n = 1 / (1 + S |e|^2).
NormalizedState fixed_point(double intensity, double detuning, const ModelParams& m);

/// Linear stability of one steady root via the eigenvalues of the analytic
/// Jacobian at the corresponding fixed point. Eigenvalues with |Re| below
/// 1e-9 kappa count as marginal and report unstable. The intensity must solve
/// the steady-state condition to 1e-9 (std::invalid_argument otherwise).
bool classify_stability(double intensity, double detuning, const ModelParams& m,
                        const PhysicalParams& p);

/// Roots plus stability flags at one detuning.
SteadySolution steady_roots(double detuning, const ModelParams& m, const PhysicalParams& p);

/// Widest contiguous detuning interval inside [search_lo, search_hi] with three
/// steady roots, located by coarse scan plus bisection to 1e-9; nullopt when the
/// response is single-valued everywhere. Edges touching the search boundary are
/// clipped to it.
std::optional<BistableRegion> bistable_region(const ModelParams& m, double search_lo,
                                              double search_hi);

/// Quasi-static sweep over the detuning grid (visited in order, which must be
/// monotone in the scan direction with steps no larger than 0.1). Each point
/// takes the stable root nearest the previous intensity; where no root is
/// stable (limit-cycle windows) the nearest root of any stability is used,
/// since a static scan cannot represent a cycle. The first point takes the
/// lowest-intensity stable root, matching a cavity filling from darkness.
ScanTrace hysteresis_scan(const std::vector<double>& grid, ScanDirection direction,
                          const ModelParams& m, const PhysicalParams& p);

}  // namespace bistab
