#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "ranspinn/common/error.hpp"
#include "ranspinn/physics/residuals.hpp"

namespace ranspinn::trainer {

enum class Phase { WarmStart, PdeNoEps, Full };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::WarmStart: return "warmstart";
        case Phase::PdeNoEps: return "pde_no_eps";
        default: return "full";
    }
}

/// How the PDE weights lambda_1..lambda_4 are chosen.
enum class LambdaPolicy {
    /// lambda_i = 1 / L_i on the calibration batch at the phase switch, then frozen.
    CalibrateOnce,
    /// lambda_i = 1 throughout.
    Unit,
};

inline const char* to_string(LambdaPolicy p) { return p == LambdaPolicy::CalibrateOnce ? "calibrate_once" : "unit"; }

inline LambdaPolicy lambda_policy_from_string(const std::string& s) {
    if (s == "calibrate_once") return LambdaPolicy::CalibrateOnce;
    if (s == "unit") return LambdaPolicy::Unit;
    throw ValidationError("unknown lambda policy '" + s + "' (expected calibrate_once or unit)");
}

inline constexpr std::size_t kNoDecay = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
    std::size_t epochs = 4000;
    std::size_t warmstart_end = 800;   // first epoch with PDE losses
    std::size_t eps_pde_start = 1600;  // first epoch with the epsilon PDE loss
    std::size_t batch_size = 256;      // interior points per step; 0 = full batch
    double lr0 = 1e-3;
    double decay = 0.95;
    std::size_t decay_interval = 12000;  // optimizer steps per decay; kNoDecay disables decay
    std::uint64_t seed = 0;
    double eps_log_delta = 1e-12;      // delta in ln(eps + delta) for the eps data loss
    LambdaPolicy lambda_policy = LambdaPolicy::CalibrateOnce;
    unsigned threads = 1;
    std::size_t chunk_size = 128;      // points per work item; fixes the reduction order
    bool reset_moments = true;         // fresh Adam moments at each phase switch
    physics::ModelConstants constants;

    /// Warm start at 20% and eps introduction at 40% of the epochs.
    static TrainConfig with_epochs(std::size_t epochs) {
        TrainConfig c;
        c.epochs = epochs;
        c.warmstart_end = epochs / 5;
        c.eps_pde_start = (2 * epochs) / 5;
        return c;
    }

    void validate() const {
        if (epochs > 0 && !(0 < warmstart_end && warmstart_end < eps_pde_start && eps_pde_start <= epochs))
            throw ValidationError("schedule requires 0 < warmstart_end < eps_pde_start <= epochs (got " +
                                  std::to_string(warmstart_end) + ", " + std::to_string(eps_pde_start) + ", " +
                                  std::to_string(epochs) + ")");
        if (!(lr0 > 0.0)) throw ValidationError("lr0 must be positive");
        if (!(decay > 0.0 && decay <= 1.0)) throw ValidationError("decay must lie in (0, 1]");
        if (decay_interval == 0) throw ValidationError("decay_interval must be positive");
        if (!(eps_log_delta >= 0.0)) throw ValidationError("eps_log_delta must be nonnegative");
        if (chunk_size == 0) throw ValidationError("chunk_size must be positive");
        constants.validate();
    }
};

/// Training phase of an epoch; the switch epochs belong to the later phase.
inline Phase phase_of(std::size_t epoch, const TrainConfig& c) {
    if (epoch < c.warmstart_end) return Phase::WarmStart;
    if (epoch < c.eps_pde_start) return Phase::PdeNoEps;
    return Phase::Full;
}

/// lr(t) = lr0 * decay^floor(t / decay_interval).
inline double learning_rate(std::size_t step, const TrainConfig& c) {
    if (c.decay_interval == kNoDecay || c.decay == 1.0) return c.lr0;
    return c.lr0 * std::pow(c.decay, static_cast<double>(step / c.decay_interval));
}

}  // namespace ranspinn::trainer
