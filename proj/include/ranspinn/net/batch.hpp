#pragma once

// Batched jet evaluation of a DenseNet and its hand-written adjoint.
//
// A batch of B points is stored as a matrix with `ncomp` column blocks of width
// B. With ncomp == 6 the blocks are the jet components in Jet2 order (value,
// dx, dy, dxx, dyy, dxy); with ncomp == 1 only values are propagated. Each
// linear layer is then one GEMM over all blocks, and the tanh layers apply the
// second-order chain rule blockwise. backward() pulls an adjoint of the output
// jets back to the parameters; it is the exact transpose of forward() and is
// checked against the scalar tape in the tests.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ranspinn/net/dense_net.hpp"
#include "ranspinn/net/ensemble.hpp"

namespace ranspinn::net {

inline constexpr int kJetComponents = 6;

enum JetBlock : int { kValue = 0, kDx = 1, kDy = 2, kDxx = 3, kDyy = 4, kDxy = 5 };

/// Intermediate state kept by forward() for backward().
struct BatchCache {
    int ncomp = 1;
    Eigen::Index batch = 0;
    std::vector<Eigen::MatrixXd> act;  // act[l]: input of layer l
    std::vector<Eigen::MatrixXd> pre;  // pre[l]: pre-activation of hidden layer l
    std::vector<Eigen::ArrayXXd> s;    // tanh(value block)
    std::vector<Eigen::ArrayXXd> s1;   // 1 - s^2
    std::vector<Eigen::ArrayXXd> s2;   // -2 s s1
    // Scratch reused by backward(); kept here so repeated calls do not reallocate.
    std::vector<Eigen::MatrixXd> zbar;
    Eigen::MatrixXd abar;
    Eigen::ArrayXXd s3;
    // The row sum goes through aligned scratch: its summation order follows pointer alignment.
    Eigen::VectorXd gb;
};

/// Input matrix (3 x ncomp*B) for points (x, y, Re), normalized by `norm`.
/// Derivative blocks hold d(input)/dx and d(input)/dy, i.e. the normalization scales.
inline Eigen::MatrixXd make_batch_input(const InputNormalization& norm, std::span<const double> x,
                                        std::span<const double> y, std::span<const double> re, int ncomp) {
    const Eigen::Index b = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd in = Eigen::MatrixXd::Zero(3, ncomp * b);
    for (Eigen::Index i = 0; i < b; ++i) {
        in(0, i) = (x[i] - norm.center[0]) * norm.scale[0];
        in(1, i) = (y[i] - norm.center[1]) * norm.scale[1];
        in(2, i) = (re[i] - norm.center[2]) * norm.scale[2];
    }
    if (ncomp == kJetComponents) {
        in.block(0, kDx * b, 1, b).setConstant(norm.scale[0]);
        in.block(1, kDy * b, 1, b).setConstant(norm.scale[1]);
    }
    return in;
}

namespace detail {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// tanh via exp, vectorized by Eigen. Saturates cleanly to +-1.
template <class Expr>
auto fast_tanh(const Expr& v) {
    return 1.0 - 2.0 / ((2.0 * v).exp() + 1.0);
}

}  // namespace detail

/// Forward pass of one network over a batch; returns the output row (1 x ncomp*B).
inline Eigen::RowVectorXd batch_forward(const DenseNet& net, const Eigen::MatrixXd& input, int ncomp,
                                        BatchCache& cache) {
    const auto& sizes = net.layer_sizes();
    const std::size_t n_layers = sizes.size() - 1;
    const Eigen::Index b = input.cols() / ncomp;
    cache.ncomp = ncomp;
    cache.batch = b;
    cache.act.resize(n_layers);
    cache.pre.resize(n_layers - 1);
    cache.s.resize(n_layers - 1);
    cache.s1.resize(n_layers - 1);
    cache.s2.resize(n_layers - 1);
    cache.act[0] = input;

    const double* params = net.params().data();
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int n_in = sizes[l];
        const int n_out = sizes[l + 1];
        detail::RowMajorMap w(params + off, n_out, n_in);
        Eigen::Map<const Eigen::VectorXd> bias(params + off + static_cast<std::size_t>(n_in) * n_out, n_out);
        off += static_cast<std::size_t>(n_in) * n_out + n_out;

        if (l + 1 == n_layers) {
            Eigen::MatrixXd z(n_out, ncomp * b);
            z.noalias() = w * cache.act[l];
            z.leftCols(b).colwise() += bias;
            return z.row(0);
        }
        Eigen::MatrixXd& z = cache.pre[l];
        z.resize(n_out, ncomp * b);
        z.noalias() = w * cache.act[l];
        z.leftCols(b).colwise() += bias;

        Eigen::ArrayXXd& s = cache.s[l];
        Eigen::ArrayXXd& s1 = cache.s1[l];
        Eigen::ArrayXXd& s2 = cache.s2[l];
        s = detail::fast_tanh(z.leftCols(b).array());
        s1 = 1.0 - s.square();
        s2 = -2.0 * s * s1;

        Eigen::MatrixXd& a = cache.act[l + 1];
        a.resize(n_out, ncomp * b);
        a.leftCols(b) = s.matrix();
        if (ncomp == kJetComponents) {
            auto blk = [&](Eigen::MatrixXd& m, int c) { return m.middleCols(c * b, b).array(); };
            const auto zx = blk(z, kDx);
            const auto zy = blk(z, kDy);
            blk(a, kDx) = s1 * zx;
            blk(a, kDy) = s1 * zy;
            blk(a, kDxx) = s1 * blk(z, kDxx) + s2 * zx.square();
            blk(a, kDyy) = s1 * blk(z, kDyy) + s2 * zy.square();
            blk(a, kDxy) = s1 * blk(z, kDxy) + s2 * zx * zy;
        }
    }
    return {};
}

/// Accumulates d(sum over batch of out_adj . output)/d(params) into `grad`
/// (same layout as DenseNet::params()).
inline void batch_backward(const DenseNet& net, BatchCache& cache, const Eigen::RowVectorXd& out_adj,
                           std::span<double> grad) {
    const auto& sizes = net.layer_sizes();
    const std::size_t n_layers = sizes.size() - 1;
    const Eigen::Index b = cache.batch;
    const int ncomp = cache.ncomp;
    const double* params = net.params().data();

    std::vector<std::size_t> offsets(n_layers);
    for (std::size_t l = 0, off = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
    }

    cache.zbar.resize(n_layers);
    cache.zbar[n_layers - 1] = out_adj;
    Eigen::MatrixXd& abar = cache.abar;
    for (std::size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd& zbar = cache.zbar[l];
        const int n_in = sizes[l];
        const int n_out = sizes[l + 1];
        const std::size_t off = offsets[l];
        detail::RowMajorMutMap gw(grad.data() + off, n_out, n_in);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + static_cast<std::size_t>(n_in) * n_out, n_out);
        gw.noalias() += zbar * cache.act[l].transpose();
        cache.gb = zbar.leftCols(b).rowwise().sum();
        gb += cache.gb;
        if (l == 0) break;

        detail::RowMajorMap w(params + off, n_out, n_in);
        abar.noalias() = w.transpose() * zbar;

        // Pull the adjoint back through the tanh jet of hidden layer l-1.
        const std::size_t h = l - 1;
        const auto& s = cache.s[h];
        const auto& s1 = cache.s1[h];
        const auto& s2 = cache.s2[h];
        Eigen::MatrixXd& next = cache.zbar[l - 1];
        next.resize(n_in, ncomp * b);
        auto blk = [&](const Eigen::MatrixXd& m, int c) { return m.middleCols(c * b, b).array(); };
        auto out = [&](int c) { return next.middleCols(c * b, b).array(); };
        if (ncomp == kJetComponents) {
            const Eigen::MatrixXd& z = cache.pre[h];
            const auto zx = blk(z, kDx);
            const auto zy = blk(z, kDy);
            const auto ax = blk(abar, kDx);
            const auto ay = blk(abar, kDy);
            const auto axx = blk(abar, kDxx);
            const auto ayy = blk(abar, kDyy);
            const auto axy = blk(abar, kDxy);
            Eigen::ArrayXXd& s3 = cache.s3;
            s3 = -2.0 * s1.square() - 2.0 * s * s2;
            out(kValue) = blk(abar, kValue) * s1 + s2 * (ax * zx + ay * zy) +
                          axx * (s2 * blk(z, kDxx) + s3 * zx.square()) +
                          ayy * (s2 * blk(z, kDyy) + s3 * zy.square()) + axy * (s2 * blk(z, kDxy) + s3 * zx * zy);
            out(kDx) = ax * s1 + s2 * (2.0 * axx * zx + axy * zy);
            out(kDy) = ay * s1 + s2 * (2.0 * ayy * zy + axy * zx);
            out(kDxx) = axx * s1;
            out(kDyy) = ayy * s1;
            out(kDxy) = axy * s1;
        } else {
            out(kValue) = blk(abar, kValue) * s1;
        }
    }
}

}  // namespace ranspinn::net
