#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ranspinn/common/error.hpp"

namespace ranspinn::evalreport {

inline constexpr double kMinErrorRange = 1e-12;

struct ErrorField {
    std::vector<double> errors;
    double range = 0.0;       // max(truth) - min(truth) before flooring
    bool degenerate = false;  // range fell below the floor
};

/// e_i = |pred_i - truth_i| / max(range(truth), 1e-12).
inline ErrorField normalized_error_field(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw ValidationError("prediction and truth have different lengths");
    if (truth.empty()) throw ValidationError("empty evaluation set");
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    ErrorField f;
    f.range = *hi - *lo;
    f.degenerate = !(f.range >= kMinErrorRange);
    const double denom = f.degenerate ? kMinErrorRange : f.range;
    f.errors.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) f.errors[i] = std::abs(pred[i] - truth[i]) / denom;
    return f;
}

struct ErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

/// 1-based nearest rank ceil(q N) for q = percent / 100, computed in integers.
inline std::size_t nearest_rank(std::size_t n, unsigned percent) {
    const std::size_t r = (static_cast<std::size_t>(percent) * n + 99) / 100;
    return std::clamp<std::size_t>(r, 1, n);
}

inline ErrorStats error_stats(std::span<const double> errors) {
    if (errors.empty()) throw ValidationError("error_stats: empty input");
    std::vector<double> v(errors.begin(), errors.end());
    double sum = 0.0;
    for (double e : v) sum += e;
    ErrorStats s;
    s.mean = sum / static_cast<double>(v.size());
    const std::size_t r50 = nearest_rank(v.size(), 50);
    const std::size_t r95 = nearest_rank(v.size(), 95);
    std::nth_element(v.begin(), v.begin() + (r95 - 1), v.end());
    s.p95 = v[r95 - 1];
    std::nth_element(v.begin(), v.begin() + (r50 - 1), v.begin() + (r95 - 1));
    s.median = v[r50 - 1];
    return s;
}

struct Histogram {
    std::vector<double> edges;  // n_bins + 1
    std::vector<std::size_t> counts;
    std::vector<double> fractions;
};

/// Uniform bins over [0, max(errors)]. Bins are closed on the right, the first also on the left,
/// so the maximum lands in the last bin. If every error is zero the bins span [0, 1].
inline Histogram histogram(std::span<const double> errors, std::size_t n_bins) {
    if (n_bins == 0) throw ValidationError("histogram needs at least one bin");
    if (errors.empty()) throw ValidationError("histogram: empty input");
    double top = 0.0;
    for (double e : errors) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw ValidationError("histogram: errors must be finite and nonnegative");
        top = std::max(top, e);
    }
    const double upper = top > 0.0 ? top : 1.0;
    const double width = upper / static_cast<double>(n_bins);
    Histogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) h.edges[i] = width * static_cast<double>(i);
    h.edges.back() = upper;
    h.counts.assign(n_bins, 0);
    for (double e : errors) {
        std::size_t bin = 0;
        if (e > 0.0) {
            const double c = std::ceil(e / width) - 1.0;
            bin = c <= 0.0 ? 0 : std::min(n_bins - 1, static_cast<std::size_t>(c));
        }
        ++h.counts[bin];
    }
    h.fractions.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        h.fractions[i] = static_cast<double>(h.counts[i]) / static_cast<double>(errors.size());
    return h;
}

/// Sample variance (n - 1) of each column across runs. Values are shifted by the first
/// run before the two-pass sum, so identical runs give exactly zero.
inline std::vector<double> sample_variance(const std::vector<std::vector<double>>& runs) {
    if (runs.size() < 2) throw ValidationError("sample variance needs at least two runs");
    const std::size_t n = runs.front().size();
    for (const auto& r : runs)
        if (r.size() != n) throw ValidationError("runs have different lengths");
    const double m = static_cast<double>(runs.size());
    std::vector<double> var(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double ref = runs[0][i];
        double mean = 0.0;
        for (const auto& r : runs) mean += r[i] - ref;
        mean /= m;
        double ss = 0.0;
        for (const auto& r : runs) {
            const double d = (r[i] - ref) - mean;
            ss += d * d;
        }
        var[i] = ss / (m - 1.0);
    }
    return var;
}

}  // namespace ranspinn::evalreport
