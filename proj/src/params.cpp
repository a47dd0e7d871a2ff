#include "bistab/params.hpp"

#include <cmath>
#include <string>

#include "bistab/errors.hpp"

namespace bistab {

namespace {

void require(bool ok, const char* msg, std::string& errors) {
    if (!ok) {
        if (!errors.empty()) errors += "; ";
        errors += msg;
    }
}

}  // namespace

void PhysicalParams::validate() const {
    std::string errors;
    require(std::isfinite(kappa) && kappa > 0, "kappa must be positive", errors);
    require(std::isfinite(gamma) && gamma > 0, "gamma must be positive", errors);
    require(std::isfinite(tau) && tau > 0, "tau must be positive", errors);
    require(std::isfinite(g0) && g0 > 0, "g0 must be positive", errors);
    require(std::isfinite(delta_ca) && delta_ca > 0, "delta_ca must be positive", errors);
    require(std::isfinite(n_atoms) && n_atoms >= 0, "n_atoms must be non-negative", errors);
    require(std::isfinite(i_sat) && i_sat > 0, "i_sat must be positive", errors);
    require(std::isfinite(pump_power) && pump_power > 0, "pump_power must be positive", errors);
    require(std::isfinite(waist) && waist > 0, "waist must be positive", errors);
    require(std::isfinite(enhancement) && enhancement > 0, "enhancement must be positive", errors);
    require(std::isfinite(s_calibration) && s_calibration > 0,
            "s_calibration must be positive", errors);
    if (tau > 0 && gamma > 0) {
        require(std::abs(tau * gamma - 1.0) <= 1e-12, "tau must equal 1/gamma to 1e-12", errors);
    }
    if (mirror_t) {
        require(*mirror_t > 0 && *mirror_t < 1, "mirror_t must lie in (0,1)", errors);
    }
    if (mirror_r) {
        require(*mirror_r > 0 && *mirror_r < 1, "mirror_r must lie in (0,1)", errors);
    }
    if (mirror_t && mirror_r) {
        const double g = *mirror_t / ((1.0 - *mirror_r) * (1.0 - *mirror_r));
        require(std::abs(g - enhancement) <= 1e-9 * enhancement,
                "mirror_t/(1-mirror_r)^2 inconsistent with enhancement", errors);
    }
    if (!errors.empty()) throw ConfigError("invalid physical parameters: " + errors);
}

void ModelParams::validate() const {
    std::string errors;
    require(std::isfinite(a) && a >= 0, "a must be non-negative", errors);
    require(std::isfinite(s) && s >= 0, "s must be non-negative", errors);
    if (!errors.empty()) throw ConfigError("invalid model parameters: " + errors);
}

double pump_peak_intensity(const PhysicalParams& p) {
    return 2.0 * p.pump_power / (std::numbers::pi * p.waist * p.waist);
}

double effective_saturation_intensity(const PhysicalParams& p) {
    const double ratio = 2.0 * p.delta_ca / p.gamma;
    return p.i_sat * ratio * ratio;
}

double dispersive_shift(const PhysicalParams& p, double n_delta) {
    return p.g0 * p.g0 * n_delta / (6.0 * p.delta_ca);
}

double steady_population_difference(const PhysicalParams& p, double i_cav) {
    return p.n_atoms / (1.0 + i_cav / effective_saturation_intensity(p));
}

double derive_a(const PhysicalParams& p) {
    return p.n_atoms * p.g0 * p.g0 / (3.0 * p.delta_ca * p.kappa);
}

double derive_s(const PhysicalParams& p) {
    const double gamma_over_2delta = p.gamma / (2.0 * p.delta_ca);
    return p.s_calibration * p.enhancement * pump_peak_intensity(p) *
           gamma_over_2delta * gamma_over_2delta / p.i_sat;
}

ModelParams derive_model(const PhysicalParams& p, ShiftSign sign) {
    p.validate();
    return ModelParams{derive_a(p), derive_s(p), sign};
}

}  // namespace bistab
