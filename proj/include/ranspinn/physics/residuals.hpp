#pragma once

// Residual operators of the nondimensional continuity, momentum and k-epsilon
// transport equations, evaluated pointwise from second-order jets. Every
// operator is generic over the jet scalar so it runs on plain doubles and on
// tape-tracked Vars alike.

#include <string>
#include <tuple>
#include <utility>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/physics/flow_state.hpp"

namespace ranspinn::physics {

/// Form of the epsilon-equation sink term.
enum class EpsSinkForm {
    /// (C1 P + C2 eps) eps / k, subtracted from the transport terms.
    AsPrinted,
    /// Textbook signs: -C1 (eps/k) P + C2 eps^2 / k.
    Standard,
};

inline const char* to_string(EpsSinkForm f) { return f == EpsSinkForm::AsPrinted ? "as_printed" : "standard"; }

inline EpsSinkForm eps_sink_from_string(const std::string& s) {
    if (s == "as_printed") return EpsSinkForm::AsPrinted;
    if (s == "standard") return EpsSinkForm::Standard;
    throw ValidationError("unknown eps sink form '" + s + "' (expected as_printed or standard)");
}

struct ModelConstants {
    double c1 = 1.44;
    double c2 = 1.92;
    double sigma_k = 1.0;
    double sigma_eps = 1.3;
    double c_mu = 0.09;
    double k_floor = 1e-8;
    double eps_floor = 1e-8;
    EpsSinkForm eps_sink = EpsSinkForm::AsPrinted;

    void validate() const {
        if (!(k_floor > 0.0) || !(eps_floor > 0.0)) throw ValidationError("k/eps floors must be positive");
        if (!(sigma_k > 0.0) || !(sigma_eps > 0.0)) throw ValidationError("sigma_k and sigma_eps must be positive");
    }

    bool operator==(const ModelConstants&) const = default;
};

/// Manufactured-solution sources subtracted from each residual.
struct SourceTerms {
    double mass = 0.0;
    double mom_x = 0.0;
    double mom_y = 0.0;
    double k = 0.0;
    double eps = 0.0;

    bool operator==(const SourceTerms&) const = default;
};

template <class T>
struct Residuals {
    T mom_x{};
    T mom_y{};
    T cont{};
    T k{};
    T eps{};
};

/// nu_t = C_mu max(k, k_floor)^2 / max(eps, eps_floor).
inline double turbulent_viscosity(double k, double eps, const ModelConstants& c) {
    const double kf = k > c.k_floor ? k : c.k_floor;
    const double ef = eps > c.eps_floor ? eps : c.eps_floor;
    return c.c_mu * kf * kf / ef;
}

/// Jet-valued eddy viscosity; its gradient enters the diffusion terms.
template <class T>
ad::Jet2<T> turbulent_viscosity(const ad::Jet2<T>& k, const ad::Jet2<T>& eps, const ModelConstants& c) {
    const ad::Jet2<T> kf = ad::floor_at(k, c.k_floor);
    const ad::Jet2<T> ef = ad::floor_at(eps, c.eps_floor);
    return (kf * kf) / ef * T(c.c_mu);
}

/// P_k = nu_t [2 u_x^2 + 2 v_y^2 + (u_y + v_x)^2].
template <class T>
T production_term(const FlowState<T>& s, const T& nu_t) {
    const T shear = s.u.dy + s.v.dx;
    return nu_t * ((s.u.dx * s.u.dx) * 2.0 + (s.v.dy * s.v.dy) * 2.0 + shear * shear);
}

template <class T>
T continuity_residual(const FlowState<T>& s, const SourceTerms& src = {}) {
    return s.u.dx + s.v.dy - T(src.mass);
}

/// (U . grad) U + grad p - (1/Re) lap U - s_mom.
template <class T>
std::pair<T, T> momentum_residual(const FlowState<T>& s, const SourceTerms& src = {}) {
    if (!(s.re > 0.0)) throw DomainError("momentum residual: Reynolds number must be positive");
    const double inv_re = 1.0 / s.re;
    const T rx = s.u.value * s.u.dx + s.v.value * s.u.dy + s.p.dx - (s.u.dxx + s.u.dyy) * inv_re - T(src.mom_x);
    const T ry = s.u.value * s.v.dx + s.v.value * s.v.dy + s.p.dy - (s.v.dxx + s.v.dyy) * inv_re - T(src.mom_y);
    return {rx, ry};
}

namespace detail {

// div(U phi), expanded with the product rule.
template <class T>
T convection(const FlowState<T>& s, const ad::Jet2<T>& phi) {
    return s.u.dx * phi.value + s.u.value * phi.dx + s.v.dy * phi.value + s.v.value * phi.dy;
}

// div[(1/Re + nu_t/sigma) grad phi], including the grad(nu_t) . grad(phi) cross terms.
template <class T>
T diffusion(const FlowState<T>& s, const ad::Jet2<T>& nu_t, double sigma, const ad::Jet2<T>& phi) {
    const double inv_sigma = 1.0 / sigma;
    const T coeff = nu_t.value * inv_sigma + 1.0 / s.re;
    return coeff * (phi.dxx + phi.dyy) + (nu_t.dx * inv_sigma) * phi.dx + (nu_t.dy * inv_sigma) * phi.dy;
}

}  // namespace detail

template <class T>
T k_residual(const FlowState<T>& s, const ModelConstants& c, const SourceTerms& src = {}) {
    if (!(s.re > 0.0)) throw DomainError("k residual: Reynolds number must be positive");
    const ad::Jet2<T> nu_t = turbulent_viscosity(s.k, s.eps, c);
    const T pk = production_term(s, nu_t.value);
    return detail::convection(s, s.k) - detail::diffusion(s, nu_t, c.sigma_k, s.k) - pk + s.eps.value - T(src.k);
}

template <class T>
T eps_residual(const FlowState<T>& s, const ModelConstants& c, const SourceTerms& src = {}) {
    if (!(s.re > 0.0)) throw DomainError("eps residual: Reynolds number must be positive");
    const ad::Jet2<T> nu_t = turbulent_viscosity(s.k, s.eps, c);
    const T pk = production_term(s, nu_t.value);
    using ad::primal;
    const T k_safe = primal(s.k.value) > c.k_floor ? s.k.value : T(c.k_floor);
    const T ratio = s.eps.value / k_safe;
    const T sink = c.eps_sink == EpsSinkForm::AsPrinted ? (pk * c.c1 + s.eps.value * c.c2) * ratio
                                                        : (pk * c.c1 - s.eps.value * c.c2) * ratio;
    return detail::convection(s, s.eps) - detail::diffusion(s, nu_t, c.sigma_eps, s.eps) - sink - T(src.eps);
}

/// All five residuals at once.
template <class T>
Residuals<T> residuals(const FlowState<T>& s, const ModelConstants& c, const SourceTerms& src = {}) {
    Residuals<T> r;
    std::tie(r.mom_x, r.mom_y) = momentum_residual(s, src);
    r.cont = continuity_residual(s, src);
    r.k = k_residual(s, c, src);
    r.eps = eps_residual(s, c, src);
    return r;
}

}  // namespace ranspinn::physics
