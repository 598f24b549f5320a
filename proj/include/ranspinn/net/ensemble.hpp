#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/common/rng.hpp"
#include "ranspinn/net/dense_net.hpp"
#include "ranspinn/physics/flow_state.hpp"

namespace ranspinn::net {

using physics::Field;

/// Default per-field architecture.
inline LayerSizes default_layer_sizes() { return {3, 32, 32, 32, 32, 1}; }

/// Affine map of (x, y, Re) onto roughly [-1, 1]: (in - center) * scale, scale = 1 / half-width.
struct InputNormalization {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::array<double, 3> scale{1.0, 1.0, 1.0};

    /// Constants from a bounding box; a degenerate axis keeps unit scale.
    static InputNormalization from_bounds(double x_min, double x_max, double y_min, double y_max, double re_min,
                                          double re_max) {
        InputNormalization n;
        const std::array<std::array<double, 2>, 3> box = {{{x_min, x_max}, {y_min, y_max}, {re_min, re_max}}};
        for (int i = 0; i < 3; ++i) {
            n.center[i] = 0.5 * (box[i][0] + box[i][1]);
            const double half = 0.5 * (box[i][1] - box[i][0]);
            n.scale[i] = half > 0.0 ? 1.0 / half : 1.0;
        }
        return n;
    }

    template <class X>
    std::array<X, 3> apply(const X& x, const X& y, const X& re) const {
        return {(x - center[0]) * scale[0], (y - center[1]) * scale[1], (re - center[2]) * scale[2]};
    }

    bool operator==(const InputNormalization&) const = default;
};

/// Output transform per field: identity for u, v, p; softplus for k; exp for eps.
/// The eps network therefore predicts ln(eps).
template <class X>
X apply_output_transform(Field f, const X& raw) {
    using ad::softplus;
    using std::exp;
    switch (f) {
        case Field::K: return softplus(raw);
        case Field::Eps: return exp(raw);
        default: return raw;
    }
}

/// Five independent networks sharing the input (x, y, Re).
class NetworkEnsemble {
public:
    NetworkEnsemble() = default;

    NetworkEnsemble(std::array<DenseNet, 5> nets, InputNormalization norm) : nets_(std::move(nets)), norm_(norm) {
        for (const auto& n : nets_) {
            if (n.layer_sizes().front() != 3 || n.layer_sizes().back() != 1)
                throw ValidationError("ensemble members must map 3 inputs to 1 output");
        }
    }

    /// Glorot initialization; member i is seeded with a sub-seed derived from (seed, i).
    static NetworkEnsemble initialize(const LayerSizes& sizes, std::uint64_t seed, InputNormalization norm = {}) {
        std::array<DenseNet, 5> nets;
        for (int i = 0; i < 5; ++i) nets[i] = DenseNet::glorot(sizes, mix_seed(seed, static_cast<std::uint64_t>(i)));
        return NetworkEnsemble(std::move(nets), norm);
    }

    const DenseNet& net(Field f) const { return nets_[physics::index_of(f)]; }
    DenseNet& net(Field f) { return nets_[physics::index_of(f)]; }
    const std::array<DenseNet, 5>& nets() const noexcept { return nets_; }
    std::array<DenseNet, 5>& nets() noexcept { return nets_; }

    const InputNormalization& normalization() const noexcept { return norm_; }
    void set_normalization(const InputNormalization& n) { norm_ = n; }

    /// Untransformed network output at a point.
    double raw(Field f, double x, double y, double re) const {
        const auto in = norm_.apply(x, y, re);
        return DenseNet::forward<double, double>(net(f).layer_sizes(), net(f).params(), in);
    }

    /// Untransformed output jet; derivatives are with respect to the unnormalized x and y.
    ad::Jet2<double> raw_jet(Field f, double x, double y, double re) const {
        const auto p = ad::seed_point<double>(x, y, re);
        const auto in = norm_.apply(p.x, p.y, p.re);
        return DenseNet::forward<ad::Jet2<double>, double>(net(f).layer_sizes(), net(f).params(), in);
    }

    double predict(Field f, double x, double y, double re) const { return apply_output_transform(f, raw(f, x, y, re)); }

    ad::Jet2<double> predict_jet(Field f, double x, double y, double re) const {
        return apply_output_transform(f, raw_jet(f, x, y, re));
    }

private:
    std::array<DenseNet, 5> nets_;
    InputNormalization norm_;
};

/// All five transformed fields with jets at one point.
inline physics::FlowState<double> ensemble_predict(const NetworkEnsemble& ens, double x, double y, double re) {
    physics::FlowState<double> s;
    for (Field f : physics::kAllFields) s[f] = ens.predict_jet(f, x, y, re);
    s.x = x;
    s.y = y;
    s.re = re;
    return s;
}

}  // namespace ranspinn::net
