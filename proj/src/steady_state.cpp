#include "bistab/steady_state.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bistab/cubic.hpp"
#include "bistab/dynamics.hpp"
#include "bistab/errors.hpp"

namespace bistab {

namespace {

constexpr double k_residual_bound = 1e-10;

double residual_prime(double x, double detuning, double a, double s) {
    const double sat = 1.0 + s * x;
    const double d = detuning + a / sat;
    const double dd = -a * s / (sat * sat);
    return (1.0 + d * d) + 2.0 * x * d * dd;
}

std::vector<double> intensities_impl(double detuning, const ModelParams& m) {
    const double a = m.signed_a();
    const double s = m.s;
    const double one_p2 = 1.0 + detuning * detuning;

    std::vector<double> roots;
    if (s == 0.0) {
        const double d = detuning + a;
        roots.push_back(1.0 / (1.0 + d * d));
        return roots;
    }

    const double c3 = s * s * one_p2;
    const double c2 = s * (2.0 * one_p2 - s + 2.0 * detuning * a);
    const double c1 = 1.0 + (detuning + a) * (detuning + a) - 2.0 * s;
    const double c0 = -1.0;
    if (c3 == 0.0 || !std::isfinite(c3)) {
        throw NumericalError("steady-state cubic degenerates at detuning " +
                             std::to_string(detuning));
    }

    const CubicRoots raw = solve_cubic_real(c3, c2, c1, c0);
    for (int i = 0; i < raw.count; ++i) {
        double x = raw.roots[i];
        if (x < -1e-9 || x > 1.0 + 1e-9) continue;  // pole artifacts and out-of-range
        x = std::clamp(x, 0.0, 1.0);
        // Newton polish against the residual itself.
        double best = x;
        double best_abs = std::abs(steady_residual(x, detuning, m));
        for (int it = 0; it < 2; ++it) {
            const double gp = residual_prime(x, detuning, a, s);
            if (std::abs(gp) < 1e-300) break;
            x = std::clamp(x - steady_residual(x, detuning, m) / gp, 0.0, 1.0);
            const double g_abs = std::abs(steady_residual(x, detuning, m));
            if (g_abs < best_abs) {
                best = x;
                best_abs = g_abs;
            }
        }
        roots.push_back(best);
    }
    std::sort(roots.begin(), roots.end());
    // Collapse tangency duplicates.
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double u, double v) { return std::abs(u - v) < 1e-12; }),
                roots.end());
    if (roots.empty()) {
        throw NumericalError("no physical steady-state root at detuning " +
                             std::to_string(detuning));
    }
    return roots;
}

}  // namespace

NormalizedState fixed_point(double intensity, double detuning, const ModelParams& m) {
    const double n = 1.0 / (1.0 + m.s * intensity);
    const double d = detuning + m.signed_a() * n;
    const double den = 1.0 + d * d;
    return NormalizedState{-d / den, 1.0 / den, n};
}

namespace {

// Routh-Hurwitz test on J + eps I, algebraically equivalent to demanding all
// eigenvalue real parts below -eps. Used on scan hot paths; classify_stability
// is the eigenvalue-based reference.
bool stable_fast(double intensity, double detuning, const ModelParams& m,
                 const PhysicalParams& p) {
    const double eps = 1e-9 * p.kappa;
    const double k2 = 0.5 * p.kappa;
    const double a = m.signed_a();
    const NormalizedState st = fixed_point(intensity, detuning, m);
    const double d = detuning + a * st.pop;

    const double j00 = -k2 + eps, j01 = -k2 * d, j02 = -k2 * a * st.field_im;
    const double j10 = k2 * d, j11 = -k2 + eps, j12 = k2 * a * st.field_re;
    const double j20 = -2.0 * st.pop * m.s * st.field_re / p.tau;
    const double j21 = -2.0 * st.pop * m.s * st.field_im / p.tau;
    const double j22 = -(1.0 + m.s * intensity) / p.tau + eps;

    const double c2 = -(j00 + j11 + j22);
    const double c1 = (j00 * j11 - j01 * j10) + (j00 * j22 - j02 * j20) + (j11 * j22 - j12 * j21);
    const double det = j00 * (j11 * j22 - j12 * j21) - j01 * (j10 * j22 - j12 * j20) +
                       j02 * (j10 * j21 - j11 * j20);
    const double c0 = -det;
    return c2 > 0.0 && c0 > 0.0 && c2 * c1 > c0;
}

std::size_t nearest_root(const std::vector<double>& roots, const std::vector<char>& eligible,
                         double previous) {
    std::size_t pick = roots.size();
    double best = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (!eligible[i]) continue;
        const double dist = std::abs(roots[i] - previous);
        if (pick == roots.size() || dist < best) {
            pick = i;
            best = dist;
        }
    }
    return pick;
}

}  // namespace

double empty_cavity_intensity(double detuning) {
    return 1.0 / (1.0 + detuning * detuning);
}

double steady_residual(double intensity, double detuning, const ModelParams& m) {
    const double d = detuning + m.signed_a() / (1.0 + m.s * intensity);
    return intensity * (1.0 + d * d) - 1.0;
}

std::vector<double> steady_intensities(double detuning, const ModelParams& m) {
    m.validate();
    if (!std::isfinite(detuning)) throw ConfigError("detuning must be finite");
    return intensities_impl(detuning, m);
}

bool classify_stability(double intensity, double detuning, const ModelParams& m,
                        const PhysicalParams& p) {
    m.validate();
    p.validate();
    if (std::abs(steady_residual(intensity, detuning, m)) >= 1e-9) {
        throw std::invalid_argument("classify_stability: intensity is not a steady root");
    }
    const NormalizedState st = fixed_point(intensity, detuning, m);
    const Eigen::Matrix3d j = jacobian(st, detuning, m, p);
    Eigen::EigenSolver<Eigen::Matrix3d> solver(j, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("stability eigenvalue solver failed to converge");
    }
    const double eps = 1e-9 * p.kappa;
    for (int i = 0; i < 3; ++i) {
        const double re = solver.eigenvalues()(i).real();
        if (re >= 0.0 || std::abs(re) < eps) return false;  // marginal counts unstable
    }
    return true;
}

SteadySolution steady_roots(double detuning, const ModelParams& m, const PhysicalParams& p) {
    p.validate();
    SteadySolution out;
    out.detuning = detuning;
    for (double x : steady_intensities(detuning, m)) {
        out.roots.push_back(SteadyRoot{x, classify_stability(x, detuning, m, p)});
    }
    return out;
}

std::optional<BistableRegion> bistable_region(const ModelParams& m, double search_lo,
                                              double search_hi) {
    m.validate();
    if (!std::isfinite(search_lo) || !std::isfinite(search_hi) || search_lo >= search_hi) {
        throw ConfigError("bistable_region: search range must be a finite interval");
    }

    const int n_coarse = 2000;
    const double step = (search_hi - search_lo) / n_coarse;
    auto count_at = [&](double d) { return intensities_impl(d, m).size(); };

    std::vector<char> multi(n_coarse + 1);
    for (int i = 0; i <= n_coarse; ++i) {
        multi[i] = count_at(search_lo + i * step) == 3;
    }

    int best_start = -1, best_len = 0;
    for (int i = 0; i <= n_coarse;) {
        if (!multi[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j <= n_coarse && multi[j]) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_start = i;
        }
        i = j;
    }
    if (best_start < 0) return std::nullopt;

    auto bisect_edge = [&](double outside, double inside) {
        for (int it = 0; it < 80 && std::abs(inside - outside) > 1e-9; ++it) {
            const double mid = 0.5 * (outside + inside);
            (count_at(mid) == 3 ? inside : outside) = mid;
        }
        return 0.5 * (outside + inside);
    };

    BistableRegion region;
    const int last = best_start + best_len - 1;
    region.lower = best_start == 0 ? search_lo
                                   : bisect_edge(search_lo + (best_start - 1) * step,
                                                 search_lo + best_start * step);
    region.upper = last == n_coarse ? search_hi
                                    : bisect_edge(search_lo + (last + 1) * step,
                                                  search_lo + last * step);
    return region;
}

ScanTrace hysteresis_scan(const std::vector<double>& grid, ScanDirection direction,
                          const ModelParams& m, const PhysicalParams& p) {
    m.validate();
    p.validate();
    if (grid.empty()) throw ConfigError("hysteresis_scan: empty detuning grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double diff = grid[i] - grid[i - 1];
        if (direction == ScanDirection::increasing ? diff <= 0.0 : diff >= 0.0) {
            throw ConfigError("hysteresis_scan: grid not monotone in the scan direction");
        }
        if (std::abs(diff) > 0.1 + 1e-12) {
            throw ConfigError("hysteresis_scan: grid step exceeds 0.1 at index " +
                              std::to_string(i));
        }
    }

    ScanTrace trace;
    trace.direction = direction;
    trace.samples.reserve(grid.size());

    double previous = 0.0;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const double d = grid[gi];
        const std::vector<double> roots = intensities_impl(d, m);
        std::vector<char> stable(roots.size());
        bool any_stable = false;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            stable[i] = stable_fast(roots[i], d, m, p);
            any_stable |= stable[i];
        }
        const std::vector<char> all(roots.size(), 1);
        const std::vector<char>& eligible = any_stable ? stable : all;

        std::size_t pick;
        if (gi == 0) {
            // Cavity fills from darkness: lowest eligible intensity.
            pick = 0;
            while (!eligible[pick]) ++pick;
        } else {
            pick = nearest_root(roots, eligible, previous);
        }
        previous = roots[pick];
        trace.samples.push_back(ScanSample{d, previous});
    }
    return trace;
}

}  // namespace bistab
