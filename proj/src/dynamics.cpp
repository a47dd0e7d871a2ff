#include "bistab/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "bistab/errors.hpp"

namespace bistab {

namespace {

using State = std::array<double, 3>;

double effective_s(const ModelParams& m, const PhysicalParams& p, SaturationReference ref) {
    if (ref == SaturationReference::detuned) return m.s;
    const double ratio = 2.0 * p.delta_ca / p.gamma;
    return m.s * ratio * ratio;  // literal reading rescales by I_sat_eff / I_sat
}

struct Rhs {
    double half_kappa;
    double inv_tau;
    double signed_a;
    double s_eff;
    const ChirpSpec* chirp;

    State operator()(double t, const State& y) const {
        const double d = chirp->detuning_at(t) + signed_a * y[2];
        const double isq = y[0] * y[0] + y[1] * y[1];
        return State{half_kappa * (-y[0] - d * y[1]),
                     half_kappa * (1.0 - y[1] + d * y[0]),
                     inv_tau * (1.0 - y[2] * (1.0 + s_eff * isq))};
    }
};

std::string format_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9e s", t);
    return buf;
}

// Cubic Hermite interpolation on [t0, t0+h] at fraction theta.
State hermite(const State& y0, const State& f0, const State& y1, const State& f1, double h,
              double theta) {
    const double t2 = theta * theta;
    const double h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
    const double h10 = theta * (1.0 - theta) * (1.0 - theta);
    const double h01 = t2 * (3.0 - 2.0 * theta);
    const double h11 = t2 * (theta - 1.0);
    State out;
    for (int i = 0; i < 3; ++i) {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    return out;
}

}  // namespace

void ChirpSpec::validate() const {
    if (!std::isfinite(start) || !std::isfinite(end)) {
        throw ConfigError("chirp endpoints must be finite");
    }
    if (!std::isfinite(duration) || duration <= 0.0) {
        throw ConfigError("chirp duration must be positive");
    }
}

std::complex<double> field_derivative(const NormalizedState& st, double detuning,
                                      const ModelParams& m, const PhysicalParams& p) {
    const std::complex<double> e{st.field_re, st.field_im};
    const std::complex<double> i{0.0, 1.0};
    const double d = detuning + m.signed_a() * st.pop;
    return 0.5 * p.kappa * (i - e + i * d * e);
}

double population_derivative(const NormalizedState& st, const ModelParams& m,
                             const PhysicalParams& p, SaturationReference ref) {
    return (1.0 - st.pop * (1.0 + effective_s(m, p, ref) * st.intensity())) / p.tau;
}

Eigen::Matrix3d jacobian(const NormalizedState& st, double detuning, const ModelParams& m,
                         const PhysicalParams& p, SaturationReference ref) {
    const double k2 = 0.5 * p.kappa;
    const double a = m.signed_a();
    const double s_eff = effective_s(m, p, ref);
    const double d = detuning + a * st.pop;
    const double x = st.field_re;
    const double y = st.field_im;
    const double n = st.pop;

    Eigen::Matrix3d j;
    j << -k2, -k2 * d, -k2 * a * y,
         k2 * d, -k2, k2 * a * x,
         -2.0 * n * s_eff * x / p.tau, -2.0 * n * s_eff * y / p.tau,
         -(1.0 + s_eff * (x * x + y * y)) / p.tau;
    return j;
}

Trajectory integrate(const NormalizedState& initial, const ChirpSpec& chirp,
                     const ModelParams& m, const PhysicalParams& p, double output_dt,
                     const IntegratorOptions& opt) {
    m.validate();
    p.validate();
    chirp.validate();
    if (!std::isfinite(output_dt) || output_dt <= 0.0) {
        throw ConfigError("output_dt must be positive");
    }
    if (!std::isfinite(opt.abs_tol) || opt.abs_tol <= 0.0) {
        throw ConfigError("abs_tol must be positive");
    }
    if (opt.fixed_step && (!std::isfinite(opt.fixed_dt) || opt.fixed_dt <= 0.0)) {
        throw ConfigError("fixed_dt must be positive");
    }
    if (!std::isfinite(initial.field_re) || !std::isfinite(initial.field_im) ||
        !std::isfinite(initial.pop)) {
        throw ConfigError("initial state must be finite");
    }

    const Rhs rhs{0.5 * p.kappa, 1.0 / p.tau, m.signed_a(), effective_s(m, p, opt.saturation),
                  &chirp};
    const double t_end = chirp.duration;
    const double h_max = 0.05 * std::min(1.0 / p.kappa, p.tau);
    const double h_min = std::max(1e-15, 1e-9 * h_max);

    Trajectory traj;
    const auto n_out = static_cast<std::size_t>(std::floor(t_end / output_dt * (1.0 + 1e-12))) + 1;
    traj.times.reserve(n_out);
    traj.detunings.reserve(n_out);
    traj.states.reserve(n_out);

    State y{initial.field_re, initial.field_im, initial.pop};
    double t = 0.0;
    std::size_t next_out = 0;

    auto emit = [&](double t_sample, const State& ys) {
        traj.times.push_back(t_sample);
        traj.detunings.push_back(chirp.detuning_at(t_sample));
        traj.states.push_back(NormalizedState{ys[0], ys[1], ys[2]});
    };
    auto emit_through = [&](double t0, const State& y0, const State& f0, double h,
                            const State& y1, const State& f1) {
        while (next_out < n_out) {
            const double t_sample = static_cast<double>(next_out) * output_dt;
            if (t_sample > t0 + h + 1e-9 * output_dt) break;
            const double theta = std::clamp((t_sample - t0) / h, 0.0, 1.0);
            emit(t_sample, hermite(y0, f0, y1, f1, h, theta));
            ++next_out;
        }
    };

    emit(0.0, y);
    next_out = 1;

    State f = rhs(t, y);

    if (opt.fixed_step) {
        const double dt = opt.fixed_dt;
        while (t < t_end && next_out < n_out) {
            const double h = std::min(dt, t_end - t);
            const State k1 = f;
            State ym;
            for (int i = 0; i < 3; ++i) ym[i] = y[i] + 0.5 * h * k1[i];
            const State k2 = rhs(t + 0.5 * h, ym);
            for (int i = 0; i < 3; ++i) ym[i] = y[i] + 0.5 * h * k2[i];
            const State k3 = rhs(t + 0.5 * h, ym);
            for (int i = 0; i < 3; ++i) ym[i] = y[i] + h * k3[i];
            const State k4 = rhs(t + h, ym);
            State y1;
            for (int i = 0; i < 3; ++i) {
                y1[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if (!std::isfinite(y1[0]) || !std::isfinite(y1[1]) || !std::isfinite(y1[2])) {
                throw NumericalError("non-finite state at t = " + format_time(t + h));
            }
            const State f1 = rhs(t + h, y1);
            emit_through(t, y, f, h, y1, f1);
            t += h;
            y = y1;
            f = f1;
        }
        return traj;
    }

    // Dormand-Prince 5(4), FSAL.
    static constexpr double c[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
    static constexpr double a2[] = {1.0 / 5.0};
    static constexpr double a3[] = {3.0 / 40.0, 9.0 / 40.0};
    static constexpr double a4[] = {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0};
    static constexpr double a5[] = {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0,
                                    -212.0 / 729.0};
    static constexpr double a6[] = {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                    49.0 / 176.0, -5103.0 / 18656.0};
    static constexpr double a7[] = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                                    -2187.0 / 6784.0, 11.0 / 84.0};
    static constexpr double e[] = {35.0 / 384.0 - 5179.0 / 57600.0,
                                   0.0,
                                   500.0 / 1113.0 - 7571.0 / 16695.0,
                                   125.0 / 192.0 - 393.0 / 640.0,
                                   -2187.0 / 6784.0 + 92097.0 / 339200.0,
                                   11.0 / 84.0 - 187.0 / 2100.0,
                                   -1.0 / 40.0};

    double h = h_max;
    State k[7];
    k[0] = f;

    while (t < t_end && next_out < n_out) {
        h = std::min(h, t_end - t);

        State ys;
        auto stage = [&](const double* a, int n_prev, double ci) {
            for (int i = 0; i < 3; ++i) {
                double acc = y[i];
                for (int j = 0; j < n_prev; ++j) acc += h * a[j] * k[j][i];
                ys[i] = acc;
            }
            return rhs(t + ci * h, ys);
        };
        k[1] = stage(a2, 1, c[1]);
        k[2] = stage(a3, 2, c[2]);
        k[3] = stage(a4, 3, c[3]);
        k[4] = stage(a5, 4, c[4]);
        k[5] = stage(a6, 5, c[5]);
        State y1;
        for (int i = 0; i < 3; ++i) {
            double acc = y[i];
            for (int j = 0; j < 6; ++j) acc += h * a7[j] * k[j][i];
            y1[i] = acc;
        }
        k[6] = rhs(t + h, y1);

        double err_sq = 0.0;
        for (int i = 0; i < 3; ++i) {
            double ei = 0.0;
            for (int j = 0; j < 7; ++j) ei += e[j] * k[j][i];
            ei *= h / opt.abs_tol;
            err_sq += ei * ei;
        }
        const double err = std::sqrt(err_sq / 3.0);

        if (err <= 1.0 && std::isfinite(y1[0]) && std::isfinite(y1[1]) && std::isfinite(y1[2])) {
            emit_through(t, y, k[0], h, y1, k[6]);
            t += h;
            y = y1;
            k[0] = k[6];
            const double grow = (err > 0.0) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            h = std::min(h * grow, h_max);
        } else {
            const double shrink =
                std::isfinite(err) && err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9)
                                                : 0.2;
            h *= shrink;
            if (h < h_min) {
                throw NumericalError("step size underflow at t = " + format_time(t));
            }
        }
    }
    return traj;
}

}  // namespace bistab
