#pragma once

#include "ranspinn/common/error.hpp"

namespace ranspinn::physics {

/// Reference scales for the nondimensional system. Density is fixed to 1 and
/// viscosity is kinematic, so Re = u_inlet * L / mu is dimensionless.
struct RefScales {
    double length = 1.0;
    double u_inlet = 1.0;
    double rho = 1.0;
    double mu = 1.0;

    double reynolds() const { return u_inlet * length / mu; }

    void validate() const {
        if (!(length > 0.0) || !(u_inlet > 0.0) || !(rho > 0.0) || !(mu > 0.0))
            throw ValidationError("reference scales must be strictly positive");
    }

    bool operator==(const RefScales&) const = default;
};

/// One flow sample (dimensional or normalized, depending on context).
struct FlowSample {
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double v = 0.0;
    double p = 0.0;
    double k = 0.0;
    double eps = 0.0;

    bool operator==(const FlowSample&) const = default;
};

/// x/L, U/u_inlet, p/(2 rho u^2), k/(2 rho u^2), eps L/u^3.
inline FlowSample nondimensionalize(const FlowSample& s, const RefScales& refs) {
    refs.validate();
    const double dyn = 2.0 * refs.rho * refs.u_inlet * refs.u_inlet;
    const double eps_scale = refs.length / (refs.u_inlet * refs.u_inlet * refs.u_inlet);
    return {s.x / refs.length, s.y / refs.length, s.u / refs.u_inlet, s.v / refs.u_inlet,
            s.p / dyn,         s.k / dyn,         s.eps * eps_scale};
}

inline FlowSample dimensionalize(const FlowSample& s, const RefScales& refs) {
    refs.validate();
    const double dyn = 2.0 * refs.rho * refs.u_inlet * refs.u_inlet;
    const double eps_scale = refs.length / (refs.u_inlet * refs.u_inlet * refs.u_inlet);
    return {s.x * refs.length, s.y * refs.length, s.u * refs.u_inlet, s.v * refs.u_inlet,
            s.p * dyn,         s.k * dyn,         s.eps / eps_scale};
}

}  // namespace ranspinn::physics
