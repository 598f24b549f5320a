#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/rng.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/trainer/adam.hpp"
#include "ranspinn/trainer/config.hpp"
#include "ranspinn/trainer/dataset.hpp"
#include "ranspinn/trainer/engine.hpp"
#include "ranspinn/trainer/loss.hpp"

namespace ranspinn::trainer {

struct EpochRecord {
    std::size_t epoch = 0;
    Phase phase = Phase::WarmStart;
    LossBreakdown loss;
    double lr = 0.0;
};

/// Weights chosen at a phase switch, with the unweighted losses they were computed from.
struct CalibrationRecord {
    std::size_t epoch = 0;
    std::array<double, 4> losses{};
    std::array<double, 4> lambda{};
};

enum class TrainStatus { Completed, Diverged };

struct TrainResult {
    net::NetworkEnsemble ensemble;
    std::vector<EpochRecord> history;
    std::vector<CalibrationRecord> calibrations;
    std::array<double, 4> lambda{};  // weights in force at the end of training
    TrainStatus status = TrainStatus::Completed;
    std::size_t epochs_completed = 0;
    std::string message;
};

inline bool all_finite(const EnsembleGradient& g) {
    for (const auto& v : g)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    return true;
}

/// Two-phase training: warm start on data and boundary losses, then joint
/// training with inverse-residual PDE weights; the eps PDE joins at eps_pde_start.
/// On a non-finite loss or gradient the ensemble from before the offending step is returned.
inline TrainResult train(const TrainConfig& config, const TrainingData& data, net::NetworkEnsemble ensemble) {
    config.validate();
    TrainResult result;
    if (config.epochs == 0) {
        result.ensemble = std::move(ensemble);
        return result;
    }
    if (data.interior.empty()) throw ValidationError("training data has no interior points");

    const LossOptions opt = loss_options(config);
    const GradientEngine engine(data, opt, config.threads, config.chunk_size);

    std::array<AdamMoments, 5> moments;
    for (int f = 0; f < 5; ++f) moments[f] = AdamMoments(ensemble.nets()[f].params().size());

    std::vector<std::size_t> all(data.interior.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t batch = config.batch_size == 0 ? all.size() : std::min(config.batch_size, all.size());
    Rng shuffle_rng(mix_seed(config.seed, 0x5348554646ull));

    std::array<double, 4> lambda = {1.0, 1.0, 1.0, 1.0};
    std::size_t step = 0;
    std::size_t moment_step = 0;  // age of the moment estimates, for bias correction

    auto calibrate = [&](std::size_t epoch, bool eps_only) {
        if (config.lambda_policy != LambdaPolicy::CalibrateOnce) return;
        const Evaluation e = engine.evaluate(ensemble, all, Phase::Full, {0.0, 0.0, 0.0, 0.0}, false);
        const auto inv = inverse_weights(e.loss.pde);
        if (eps_only) {
            lambda[3] = inv[3];
        } else {
            lambda = inv;
        }
        result.calibrations.push_back({epoch, e.loss.pde, lambda});
    };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const Phase phase = phase_of(epoch, config);
        if (epoch == config.warmstart_end) calibrate(epoch, false);
        if (epoch == config.eps_pde_start) calibrate(epoch, true);
        const std::array<double, 4> weights = effective_weights(phase, lambda);
        if (config.reset_moments && epoch > 0 && phase != phase_of(epoch - 1, config)) {
            for (auto& m : moments) m = AdamMoments(m.m.size());
            moment_step = 0;
        }

        std::vector<std::size_t> order = all;
        if (batch < all.size())
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.phase = phase;
        rec.lr = learning_rate(step, config);
        std::size_t n_steps = 0;
        bool diverged = false;
        for (std::size_t lo = 0; lo < order.size(); lo += batch) {
            const std::size_t hi = std::min(order.size(), lo + batch);
            const std::span<const std::size_t> idx(order.data() + lo, hi - lo);
            Evaluation e;
            try {
                e = engine.evaluate(ensemble, idx, phase, weights, true);
            } catch (const DomainError& err) {
                diverged = true;
                result.message = err.what();
                break;
            }
            if (!std::isfinite(e.loss.total) || !all_finite(e.grad)) {
                diverged = true;
                break;
            }
            for (int i = 0; i < 5; ++i) rec.loss.data[i] += e.loss.data[i];
            rec.loss.bc += e.loss.bc;
            for (int i = 0; i < 4; ++i) rec.loss.pde[i] += e.loss.pde[i];
            for (int f = 0; f < 5; ++f)
                adam_step(ensemble.nets()[f].params(), e.grad[f], moments[f], moment_step, learning_rate(step, config));
            ++step;
            ++moment_step;
            ++n_steps;
        }
        if (diverged) {
            result.status = TrainStatus::Diverged;
            result.message = "non-finite loss or gradient at epoch " + std::to_string(epoch) +
                             (result.message.empty() ? "" : " (" + result.message + ")");
            break;
        }
        const double inv_steps = 1.0 / static_cast<double>(n_steps);
        for (double& d : rec.loss.data) d *= inv_steps;
        rec.loss.bc *= inv_steps;
        for (double& p : rec.loss.pde) p *= inv_steps;
        rec.loss.lambda = weights;
        rec.loss.total = rec.loss.compose();
        result.history.push_back(rec);
        result.epochs_completed = epoch + 1;
    }
    result.lambda = lambda;
    result.ensemble = std::move(ensemble);
    return result;
}

inline constexpr const char* kLossHistoryHeader =
    "epoch,phase,L_u,L_v,L_p,L_k,L_eps_data,L_BC,L_NS,L_Cont,L_k_pde,L_eps_pde,lambda1,lambda2,lambda3,lambda4,lr,total";

inline void write_loss_history(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << kLossHistoryHeader << '\n';
    for (const auto& r : history) {
        out << r.epoch << ',' << to_string(r.phase);
        for (double d : r.loss.data) out << ',' << csv::format_double(d);
        out << ',' << csv::format_double(r.loss.bc);
        for (double p : r.loss.pde) out << ',' << csv::format_double(p);
        for (double l : r.loss.lambda) out << ',' << csv::format_double(l);
        out << ',' << csv::format_double(r.lr) << ',' << csv::format_double(r.loss.total) << '\n';
    }
}

}  // namespace ranspinn::trainer
