#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/common/rng.hpp"

namespace ranspinn::net {

/// Layer widths, input first. Every network here maps 3 inputs to 1 output.
using LayerSizes = std::vector<int>;

inline void validate_layer_sizes(const LayerSizes& sizes) {
    if (sizes.size() < 2) throw ValidationError("layer sizes need at least an input and an output layer");
    for (int n : sizes)
        if (n <= 0) throw ValidationError("layer sizes must be positive");
}

/// Number of parameters: sum over layers of (n_in * n_out + n_out).
inline std::size_t parameter_count(const LayerSizes& sizes) {
    validate_layer_sizes(sizes);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        n += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
    return n;
}

/// Glorot-uniform weights in +-sqrt(6 / (n_in + n_out)) and zero biases.
inline std::vector<double> init_params(const LayerSizes& sizes, std::uint64_t seed) {
    std::vector<double> params(parameter_count(sizes), 0.0);
    Rng rng(seed);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int n_in = sizes[l];
        const int n_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (n_in + n_out));
        const std::size_t n_w = static_cast<std::size_t>(n_in) * n_out;
        for (std::size_t i = 0; i < n_w; ++i) params[offset + i] = rng.uniform(-limit, limit);
        offset += n_w + n_out;
    }
    return params;
}

/// Dense tanh network with a linear output layer.
///
/// Parameter layout, per layer l mapping n_in -> n_out, layers in order:
///   weights  W[o][i] row-major (n_out * n_in values), then biases b[o] (n_out values).
class DenseNet {
public:
    DenseNet() = default;

    explicit DenseNet(LayerSizes sizes) : sizes_(std::move(sizes)), params_(parameter_count(sizes_), 0.0) {}

    DenseNet(LayerSizes sizes, std::vector<double> params) : sizes_(std::move(sizes)), params_(std::move(params)) {
        if (params_.size() != parameter_count(sizes_))
            throw ValidationError("parameter vector length " + std::to_string(params_.size()) +
                                  " does not match layer sizes (expected " +
                                  std::to_string(parameter_count(sizes_)) + ")");
    }

    static DenseNet glorot(LayerSizes sizes, std::uint64_t seed) {
        auto params = init_params(sizes, seed);
        return DenseNet(std::move(sizes), std::move(params));
    }

    const LayerSizes& layer_sizes() const noexcept { return sizes_; }
    std::size_t layer_count() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    int input_size() const { return sizes_.front(); }

    std::span<const double> params() const noexcept { return params_; }
    std::span<double> params() noexcept { return params_; }

    /// Offset of layer l's weight block within params().
    std::size_t weight_offset(std::size_t l) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < l; ++k) off += static_cast<std::size_t>(sizes_[k]) * sizes_[k + 1] + sizes_[k + 1];
        return off;
    }

    /// Forward pass, generic over the input element type X (double, Jet2<double>, ...)
    /// and the parameter scalar P. The accumulation order is fixed, so the value
    /// component of a jet-valued call equals the plain call bit for bit.
    template <class X, class P>
    static X forward(const LayerSizes& sizes, std::span<const P> params, std::span<const X> input) {
        using std::tanh;
        std::vector<X> current(input.begin(), input.end());
        std::vector<X> next;
        std::size_t off = 0;
        const std::size_t n_layers = sizes.size() - 1;
        for (std::size_t l = 0; l < n_layers; ++l) {
            const int n_in = sizes[l];
            const int n_out = sizes[l + 1];
            const std::size_t bias_off = off + static_cast<std::size_t>(n_in) * n_out;
            next.assign(n_out, X{});
            for (int o = 0; o < n_out; ++o) {
                X z = X(params[bias_off + o]);
                const std::size_t row = off + static_cast<std::size_t>(o) * n_in;
                for (int i = 0; i < n_in; ++i) z = z + current[i] * params[row + i];
                next[o] = (l + 1 < n_layers) ? X(tanh(z)) : z;
            }
            current.swap(next);
            off = bias_off + n_out;
        }
        return current.front();
    }

    double operator()(double x, double y, double re) const {
        const double in[3] = {x, y, re};
        return forward<double, double>(sizes_, params_, in);
    }

    ad::Jet2<double> operator()(const ad::SpatialPoint<double>& p) const {
        const ad::Jet2<double> in[3] = {p.x, p.y, p.re};
        return forward<ad::Jet2<double>, double>(sizes_, params_, in);
    }

private:
    LayerSizes sizes_;
    std::vector<double> params_;
};

}  // namespace ranspinn::net
