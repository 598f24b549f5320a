#pragma once

// Loss terms: MSE data losses (log-space for eps), MSE boundary loss, and the
// PDE losses. Momentum residuals of both components are pooled; the eps
// residual enters as ln(1 + r^2).
//
//   total = sum_f L_f + L_BC + l1 L_NS + l2 L_Cont + l3 L_k + l4 L_eps

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/trainer/config.hpp"
#include "ranspinn/trainer/dataset.hpp"

namespace ranspinn::trainer {

using physics::Field;

struct LossOptions {
    double eps_log_delta = 1e-12;
    physics::ModelConstants constants;
};

inline LossOptions loss_options(const TrainConfig& c) { return {c.eps_log_delta, c.constants}; }

struct LossBreakdown {
    std::array<double, 5> data{};      // u, v, p, k, eps
    double bc = 0.0;
    std::array<double, 4> pde{};       // NS, Cont, k, eps
    std::array<double, 4> lambda{};    // effective weights
    double total = 0.0;

    double compose() const {
        double t = 0.0;
        for (double d : data) t += d;
        t += bc;
        for (int i = 0; i < 4; ++i) t += lambda[i] * pde[i];
        return t;
    }
};

/// Per-point contributions before averaging.
template <class S>
struct InteriorTerms {
    std::array<S, 5> data{};
    S mom{};   // r_x^2 + r_y^2
    S cont{};  // r_c^2
    S k{};     // r_k^2
    S eps{};   // ln(1 + r_eps^2)
};

template <class S>
S data_term(Field f, const S& pred, double truth, double delta) {
    using std::log;
    if (f == Field::Eps) {
        if (truth < 0.0) throw ValidationError("eps data loss: ground-truth eps must be nonnegative");
        const S d = log(pred + delta) - std::log(truth + delta);
        return d * d;
    }
    const S d = pred - truth;
    return d * d;
}

/// Transformed flow state from the five raw network output jets.
template <class S>
physics::FlowState<S> state_from_raw(const std::array<ad::Jet2<S>, 5>& raw, double x, double y, double re) {
    physics::FlowState<S> s;
    for (Field f : physics::kAllFields) s[f] = net::apply_output_transform(f, raw[physics::index_of(f)]);
    s.x = x;
    s.y = y;
    s.re = re;
    return s;
}

template <class S>
InteriorTerms<S> interior_terms(const std::array<ad::Jet2<S>, 5>& raw, const InteriorPoint& pt,
                                const LossOptions& opt, bool with_pde) {
    using std::log;
    const auto s = state_from_raw(raw, pt.x, pt.y, pt.re);
    InteriorTerms<S> t;
    for (Field f : physics::kAllFields)
        t.data[physics::index_of(f)] = data_term(f, s[f].value, pt.truth[physics::index_of(f)], opt.eps_log_delta);
    if (with_pde) {
        const auto r = physics::residuals(s, opt.constants, pt.src);
        t.mom = r.mom_x * r.mom_x + r.mom_y * r.mom_y;
        t.cont = r.cont * r.cont;
        t.k = r.k * r.k;
        t.eps = log(r.eps * r.eps + 1.0);
    }
    return t;
}

/// Sum of squared boundary-target errors at one point.
template <class S>
S boundary_term(const S& u, const S& v, const S& p, const BoundaryPoint& b) {
    S t(0.0);
    if (b.u) t = t + (u - *b.u) * (u - *b.u);
    if (b.v) t = t + (v - *b.v) * (v - *b.v);
    if (b.p) t = t + (p - *b.p) * (p - *b.p);
    return t;
}

// ---------------------------------------------------------------------------
// Reference evaluation through the scalar jet path (no batching, no gradients).
// ---------------------------------------------------------------------------

namespace detail {
inline std::array<ad::Jet2<double>, 5> raw_jets(const net::NetworkEnsemble& ens, double x, double y, double re) {
    std::array<ad::Jet2<double>, 5> raw;
    for (Field f : physics::kAllFields) raw[physics::index_of(f)] = ens.raw_jet(f, x, y, re);
    return raw;
}
}  // namespace detail

/// Per-field data losses over a batch: MSE for u, v, p, k; log-space MSE for eps.
inline std::array<double, 5> data_loss(const net::NetworkEnsemble& ens, std::span<const InteriorPoint> batch,
                                       const LossOptions& opt = {}) {
    std::array<double, 5> sums{};
    if (batch.empty()) return sums;
    for (const auto& pt : batch) {
        std::array<ad::Jet2<double>, 5> raw;
        for (Field f : physics::kAllFields) raw[physics::index_of(f)] = ens.raw(f, pt.x, pt.y, pt.re);
        const auto t = interior_terms(raw, pt, opt, false);
        for (int i = 0; i < 5; ++i) sums[i] += t.data[i];
    }
    for (double& s : sums) s /= static_cast<double>(batch.size());
    return sums;
}

/// Unweighted PDE losses (NS, Cont, k, eps). All zero during warm start.
inline std::array<double, 4> pde_loss(const net::NetworkEnsemble& ens, std::span<const InteriorPoint> batch,
                                      Phase phase, const LossOptions& opt = {}) {
    std::array<double, 4> sums{};
    if (phase == Phase::WarmStart || batch.empty()) return sums;
    for (const auto& pt : batch) {
        const auto t = interior_terms(detail::raw_jets(ens, pt.x, pt.y, pt.re), pt, opt, true);
        sums[0] += t.mom;
        sums[1] += t.cont;
        sums[2] += t.k;
        sums[3] += t.eps;
    }
    const double n = static_cast<double>(batch.size());
    sums[0] /= 2.0 * n;
    sums[1] /= n;
    sums[2] /= n;
    sums[3] /= n;
    return sums;
}

/// Effective PDE weights of a phase: none in warm start, eps held at zero before its introduction.
inline std::array<double, 4> effective_weights(Phase phase, const std::array<double, 4>& lambda) {
    switch (phase) {
        case Phase::WarmStart: return {0.0, 0.0, 0.0, 0.0};
        case Phase::PdeNoEps: return {lambda[0], lambda[1], lambda[2], 0.0};
        default: return lambda;
    }
}

inline constexpr double kMinCalibrationLoss = 1e-12;

/// lambda_i = 1 / max(L_i, 1e-12).
inline std::array<double, 4> inverse_weights(const std::array<double, 4>& losses) {
    std::array<double, 4> lambda{};
    for (int i = 0; i < 4; ++i) lambda[i] = 1.0 / std::max(losses[i], kMinCalibrationLoss);
    return lambda;
}

/// Inverse-residual weights from the unweighted PDE losses on a calibration batch.
inline std::array<double, 4> calibrate_weights(const net::NetworkEnsemble& ens,
                                               std::span<const InteriorPoint> calibration_batch,
                                               const LossOptions& opt = {}) {
    return inverse_weights(pde_loss(ens, calibration_batch, Phase::Full, opt));
}

}  // namespace ranspinn::trainer
