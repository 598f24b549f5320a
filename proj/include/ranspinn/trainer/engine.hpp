#pragma once

// Batched loss and gradient evaluation.
//
// Points are processed in fixed-size chunks. For each chunk the five networks
// run a batched jet forward pass; a small per-point ParamTape over the 30 raw
// output-jet components yields the loss adjoints, which are pulled back to the
// parameters by batch_backward(). Chunk results are reduced in chunk order, so
// the outcome is independent of the number of worker threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "ranspinn/autodiff/tape.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/common/parallel.hpp"
#include "ranspinn/net/batch.hpp"
#include "ranspinn/trainer/dataset.hpp"
#include "ranspinn/trainer/loss.hpp"

namespace ranspinn::trainer {

/// One gradient vector per ensemble member, laid out like DenseNet::params().
using EnsembleGradient = std::array<std::vector<double>, 5>;

struct Evaluation {
    LossBreakdown loss;
    EnsembleGradient grad;
};

class GradientEngine {
public:
    GradientEngine(const TrainingData& data, LossOptions options, unsigned threads = 1, std::size_t chunk_size = 128)
        : data_(&data), opt_(options), threads_(std::max(1u, threads)), chunk_(std::max<std::size_t>(1, chunk_size)) {}

    /// Loss breakdown (and gradient when requested) over the given interior points plus all
    /// boundary points. `lambda` are the effective PDE weights; PDE terms are skipped in warm start.
    Evaluation evaluate(const net::NetworkEnsemble& ens, std::span<const std::size_t> interior, Phase phase,
                        const std::array<double, 4>& lambda, bool with_grad) const {
        const bool with_pde = phase != Phase::WarmStart;
        const std::size_t n_int = interior.size();
        const std::size_t n_bc_targets = data_->boundary_target_count();
        Weights w;
        w.data = n_int ? 1.0 / static_cast<double>(n_int) : 0.0;
        w.bc = n_bc_targets ? 1.0 / static_cast<double>(n_bc_targets) : 0.0;
        w.pde = {lambda[0] * w.data * 0.5, lambda[1] * w.data, lambda[2] * w.data, lambda[3] * w.data};

        const std::size_t n_int_chunks = (n_int + chunk_ - 1) / chunk_;
        const std::size_t n_bc_chunks = (data_->boundary.size() + chunk_ - 1) / chunk_;
        std::vector<ChunkResult> results(n_int_chunks + n_bc_chunks);
        parallel_for(results.size(), threads_, [&](std::size_t c) {
            ChunkResult& r = results[c];
            if (with_grad)
                for (int f = 0; f < 5; ++f) r.grad[f].assign(ens.nets()[f].params().size(), 0.0);
            if (c < n_int_chunks) {
                const std::size_t lo = c * chunk_;
                const std::size_t hi = std::min(n_int, lo + chunk_);
                interior_chunk(ens, interior.subspan(lo, hi - lo), with_pde, w, with_grad, r);
            } else {
                const std::size_t lo = (c - n_int_chunks) * chunk_;
                const std::size_t hi = std::min(data_->boundary.size(), lo + chunk_);
                boundary_chunk(ens, lo, hi, w, with_grad, r);
            }
        });

        Evaluation out;
        ChunkSums sums;
        if (with_grad)
            for (int f = 0; f < 5; ++f) out.grad[f].assign(ens.nets()[f].params().size(), 0.0);
        for (const ChunkResult& r : results) {
            sums += r.sums;
            if (with_grad)
                for (int f = 0; f < 5; ++f)
                    for (std::size_t i = 0; i < r.grad[f].size(); ++i) out.grad[f][i] += r.grad[f][i];
        }
        for (int f = 0; f < 5; ++f) out.loss.data[f] = sums.data[f] * w.data;
        out.loss.bc = sums.bc * w.bc;
        if (with_pde) {
            out.loss.pde[0] = sums.pde[0] * w.data * 0.5;
            for (int i = 1; i < 4; ++i) out.loss.pde[i] = sums.pde[i] * w.data;
        }
        out.loss.lambda = with_pde ? lambda : std::array<double, 4>{};
        out.loss.total = out.loss.compose();
        return out;
    }

private:
    struct Weights {
        double data = 0.0;
        double bc = 0.0;
        std::array<double, 4> pde{};
    };

    struct ChunkSums {
        std::array<double, 5> data{};
        double bc = 0.0;
        std::array<double, 4> pde{};

        ChunkSums& operator+=(const ChunkSums& o) {
            for (int i = 0; i < 5; ++i) data[i] += o.data[i];
            bc += o.bc;
            for (int i = 0; i < 4; ++i) pde[i] += o.pde[i];
            return *this;
        }
    };

    struct ChunkResult {
        ChunkSums sums;
        EnsembleGradient grad;
    };

    void interior_chunk(const net::NetworkEnsemble& ens, std::span<const std::size_t> idx, bool with_pde,
                        const Weights& w, bool with_grad, ChunkResult& r) const {
        const int ncomp = with_pde ? net::kJetComponents : 1;
        const Eigen::Index b = static_cast<Eigen::Index>(idx.size());
        std::vector<double> xs(b), ys(b), res(b);
        for (Eigen::Index i = 0; i < b; ++i) {
            const auto& p = data_->interior[idx[i]];
            xs[i] = p.x;
            ys[i] = p.y;
            res[i] = p.re;
        }
        const Eigen::MatrixXd input = net::make_batch_input(ens.normalization(), xs, ys, res, ncomp);
        thread_local std::array<net::BatchCache, 5> cache;
        std::array<Eigen::RowVectorXd, 5> out;
        for (int f = 0; f < 5; ++f) out[f] = net::batch_forward(ens.nets()[f], input, ncomp, cache[f]);

        std::array<Eigen::RowVectorXd, 5> adj;
        for (auto& a : adj) a = Eigen::RowVectorXd::Zero(ncomp * b);

        ad::ParamTape tape;
        std::vector<double> leaves(5 * ncomp);
        for (Eigen::Index i = 0; i < b; ++i) {
            const InteriorPoint& pt = data_->interior[idx[i]];
            for (int f = 0; f < 5; ++f)
                for (int c = 0; c < ncomp; ++c) leaves[f * ncomp + c] = out[f](c * b + i);
            tape.reset();
            const std::vector<ad::Var> vars = tape.register_params(leaves);
            std::array<ad::Jet2<ad::Var>, 5> raw;
            for (int f = 0; f < 5; ++f) {
                const ad::Var* v = vars.data() + f * ncomp;
                raw[f] = ncomp == 1 ? ad::Jet2<ad::Var>(v[0]) : ad::Jet2<ad::Var>(v[0], v[1], v[2], v[3], v[4], v[5]);
            }
            const InteriorTerms<ad::Var> t = interior_terms(raw, pt, opt_, with_pde);
            ad::Var weighted(0.0);
            for (int f = 0; f < 5; ++f) {
                r.sums.data[f] += t.data[f].value();
                weighted = weighted + t.data[f] * w.data;
            }
            if (with_pde) {
                const std::array<const ad::Var*, 4> pde = {&t.mom, &t.cont, &t.k, &t.eps};
                for (int j = 0; j < 4; ++j) {
                    r.sums.pde[j] += pde[j]->value();
                    if (w.pde[j] != 0.0) weighted = weighted + *pde[j] * w.pde[j];
                }
            }
            if (!with_grad) continue;
            tape.backward(weighted);
            const auto g = tape.gradient();
            for (int f = 0; f < 5; ++f)
                for (int c = 0; c < ncomp; ++c) adj[f](c * b + i) = g[f * ncomp + c];
        }
        if (with_grad)
            for (int f = 0; f < 5; ++f) net::batch_backward(ens.nets()[f], cache[f], adj[f], r.grad[f]);
    }

    void boundary_chunk(const net::NetworkEnsemble& ens, std::size_t lo, std::size_t hi, const Weights& w,
                        bool with_grad, ChunkResult& r) const {
        const Eigen::Index b = static_cast<Eigen::Index>(hi - lo);
        std::vector<double> xs(b), ys(b), res(b);
        for (Eigen::Index i = 0; i < b; ++i) {
            const auto& p = data_->boundary[lo + i];
            xs[i] = p.x;
            ys[i] = p.y;
            res[i] = p.re;
        }
        const Eigen::MatrixXd input = net::make_batch_input(ens.normalization(), xs, ys, res, 1);
        constexpr std::array<Field, 3> fields = {Field::U, Field::V, Field::P};
        thread_local std::array<net::BatchCache, 3> cache;
        std::array<Eigen::RowVectorXd, 3> out;
        std::array<Eigen::RowVectorXd, 3> adj;
        for (int j = 0; j < 3; ++j) {
            out[j] = net::batch_forward(ens.net(fields[j]), input, 1, cache[j]);
            adj[j] = Eigen::RowVectorXd::Zero(b);
        }
        for (Eigen::Index i = 0; i < b; ++i) {
            const BoundaryPoint& bp = data_->boundary[lo + i];
            const std::array<std::optional<double>, 3> target = {bp.u, bp.v, bp.p};
            for (int j = 0; j < 3; ++j) {
                if (!target[j]) continue;
                const double d = out[j](i) - *target[j];
                r.sums.bc += d * d;
                adj[j](i) = 2.0 * d * w.bc;
            }
        }
        if (with_grad)
            for (int j = 0; j < 3; ++j)
                net::batch_backward(ens.net(fields[j]), cache[j], adj[j], r.grad[physics::index_of(fields[j])]);
    }

    const TrainingData* data_;
    LossOptions opt_;
    unsigned threads_;
    std::size_t chunk_;
};

}  // namespace ranspinn::trainer
