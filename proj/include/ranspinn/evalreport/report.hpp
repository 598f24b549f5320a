#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/parallel.hpp"
#include "ranspinn/evalreport/metrics.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/sampler/point_cloud.hpp"

namespace ranspinn::evalreport {

using physics::Field;

inline constexpr std::array<Field, 3> kReportFields = {Field::U, Field::V, Field::P};

struct VariableReport {
    std::string name;
    ErrorField field;
    ErrorStats stats;
    Histogram hist;
};

struct ErrorReport {
    std::vector<double> x;
    std::vector<double> y;
    std::array<VariableReport, 3> vars;  // u, v, p
    double re = 0.0;
    bool in_training_range = false;
    std::vector<double> training_re;
    net::InputNormalization input_normalization;
};

/// Evaluates the ensemble on every point of a cloud with ground truth (same units as training).
inline ErrorReport evaluate_cloud(const net::NetworkEnsemble& ens, const sampler::ZonedPointCloud& cloud,
                                  const std::vector<double>& training_re, std::size_t n_bins = 20) {
    if (!cloud.has_truth()) throw ValidationError("evaluation cloud has no ground-truth columns");
    if (cloud.size() == 0) throw ValidationError("evaluation cloud is empty");
    ErrorReport r;
    r.re = cloud.re;
    r.training_re = training_re;
    r.input_normalization = ens.normalization();
    if (!training_re.empty()) {
        const auto [lo, hi] = std::minmax_element(training_re.begin(), training_re.end());
        r.in_training_range = cloud.re >= *lo && cloud.re <= *hi;
    }
    const std::size_t n = cloud.size();
    r.x.resize(n);
    r.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.x[i] = cloud.points[i].x;
        r.y[i] = cloud.points[i].y;
    }
    for (std::size_t j = 0; j < kReportFields.size(); ++j) {
        const Field f = kReportFields[j];
        const int fi = physics::index_of(f);
        std::vector<double> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = ens.predict(f, r.x[i], r.y[i], cloud.re);
            truth[i] = cloud.truth[i][fi];
        }
        VariableReport& v = r.vars[j];
        v.name = physics::name_of(f);
        v.field = normalized_error_field(pred, truth);
        v.stats = error_stats(v.field.errors);
        v.hist = histogram(v.field.errors, n_bins);
    }
    return r;
}

inline void write_stats_csv(std::ostream& out, const ErrorReport& r) {
    out << "variable,mean,p95,median\n";
    for (const auto& v : r.vars)
        out << v.name << ',' << csv::format_double(v.stats.mean) << ',' << csv::format_double(v.stats.p95) << ','
            << csv::format_double(v.stats.median) << '\n';
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_lo,bin_hi,fraction\n";
    for (std::size_t i = 0; i < h.fractions.size(); ++i)
        out << csv::format_double(h.edges[i]) << ',' << csv::format_double(h.edges[i + 1]) << ','
            << csv::format_double(h.fractions[i]) << '\n';
}

inline void write_error_field_csv(std::ostream& out, const ErrorReport& r) {
    out << "x,y,err_u,err_v,err_p\n";
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        out << csv::format_double(r.x[i]) << ',' << csv::format_double(r.y[i]);
        for (const auto& v : r.vars) out << ',' << csv::format_double(v.field.errors[i]);
        out << '\n';
    }
}

/// Key-value summary of how the report was produced.
inline void write_report_metadata(std::ostream& out, const ErrorReport& r) {
    out << "Re = " << csv::format_double(r.re) << '\n';
    out << "in_training_range = " << (r.in_training_range ? "true" : "false") << '\n';
    out << "training_re = [";
    for (std::size_t i = 0; i < r.training_re.size(); ++i)
        out << (i ? ", " : "") << csv::format_double(r.training_re[i]);
    out << "]\n";
    for (const auto& v : r.vars) {
        out << "range_" << v.name << " = " << csv::format_double(v.field.range) << '\n';
        if (v.field.degenerate) out << "degenerate_" << v.name << " = true\n";
    }
    const auto& n = r.input_normalization;
    out << "input_center = [" << csv::format_double(n.center[0]) << ", " << csv::format_double(n.center[1]) << ", "
        << csv::format_double(n.center[2]) << "]\n";
    out << "input_scale = [" << csv::format_double(n.scale[0]) << ", " << csv::format_double(n.scale[1]) << ", "
        << csv::format_double(n.scale[2]) << "]\n";
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

inline void write_histogram_svg(std::ostream& out, const Histogram& h, const std::string& title) {
    const double w = 480, ht = 320, m = 40;
    double top = 0.0;
    for (double f : h.fractions) top = std::max(top, f);
    if (top <= 0.0) top = 1.0;
    const double bw = (w - 2 * m) / static_cast<double>(h.fractions.size());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\">\n";
    out << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    out << "<line x1=\"" << m << "\" y1=\"" << ht - m << "\" x2=\"" << w - m << "\" y2=\"" << ht - m
        << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < h.fractions.size(); ++i) {
        const double bh = (ht - 2 * m) * h.fractions[i] / top;
        out << "<rect x=\"" << m + bw * static_cast<double>(i) << "\" y=\"" << ht - m - bh << "\" width=\"" << bw
            << "\" height=\"" << bh << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
    }
    out << "<text x=\"" << m << "\" y=\"" << ht - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
    out << "<text x=\"" << w - m - 40 << "\" y=\"" << ht - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << csv::format_double(h.edges.back()) << "</text>\n";
    out << "</svg>\n";
}

/// Scatter of the points colored from blue (0) to red (max error).
inline void write_error_scatter_svg(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
                                    const std::vector<double>& err, const std::string& title) {
    const double w = 560, ht = 360, m = 30;
    if (x.empty()) return;
    const auto [x0, x1] = std::minmax_element(x.begin(), x.end());
    const auto [y0, y1] = std::minmax_element(y.begin(), y.end());
    const double sx = *x1 > *x0 ? (w - 2 * m) / (*x1 - *x0) : 1.0;
    const double sy = *y1 > *y0 ? (ht - 2 * m) / (*y1 - *y0) : 1.0;
    const double emax = std::max(*std::max_element(err.begin(), err.end()), 1e-300);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\">\n";
    out << "<text x=\"" << m << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << " (max " << csv::format_double(emax) << ")</text>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = std::clamp(err[i] / emax, 0.0, 1.0);
        const int red = static_cast<int>(255 * t);
        const int blue = 255 - red;
        out << "<circle cx=\"" << m + (x[i] - *x0) * sx << "\" cy=\"" << ht - m - (y[i] - *y0) * sy
            << "\" r=\"2.5\" fill=\"rgb(" << red << ",0," << blue << ")\"/>\n";
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Multi-seed variance
// ---------------------------------------------------------------------------

/// Predictions of one trained model on the evaluation points, one vector per field (u, v, p, k, eps).
using FieldPredictions = std::array<std::vector<double>, 5>;

struct VarianceStudy {
    std::array<std::vector<double>, 5> variance;  // per field, per point
    std::vector<std::uint64_t> used_seeds;
    std::vector<std::uint64_t> excluded_seeds;    // runs that diverged
};

/// Runs `run(seed)` for each seed (nullopt marks a diverged run) and returns the per-point
/// sample variance over the runs that completed. Runs may execute on `workers` threads.
inline VarianceStudy variance_study(const std::vector<std::uint64_t>& seeds,
                                    const std::function<std::optional<FieldPredictions>(std::uint64_t)>& run,
                                    unsigned workers = 1) {
    if (seeds.size() < 2) throw ValidationError("a variance study needs at least two seeds");
    std::vector<std::optional<FieldPredictions>> results(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) { results[i] = run(seeds[i]); });
    VarianceStudy st;
    std::array<std::vector<std::vector<double>>, 5> runs;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!results[i]) {
            st.excluded_seeds.push_back(seeds[i]);
            continue;
        }
        st.used_seeds.push_back(seeds[i]);
        for (int f = 0; f < 5; ++f) runs[f].push_back(std::move((*results[i])[f]));
    }
    if (st.used_seeds.size() < 2)
        throw Error("variance study: fewer than two runs completed (" + std::to_string(st.excluded_seeds.size()) +
                    " diverged)");
    for (int f = 0; f < 5; ++f) st.variance[f] = sample_variance(runs[f]);
    return st;
}

inline FieldPredictions predict_fields(const net::NetworkEnsemble& ens, const sampler::ZonedPointCloud& cloud) {
    FieldPredictions out;
    for (Field f : physics::kAllFields) {
        auto& v = out[physics::index_of(f)];
        v.resize(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            v[i] = ens.predict(f, cloud.points[i].x, cloud.points[i].y, cloud.re);
    }
    return out;
}

inline void write_variance_csv(std::ostream& out, const sampler::ZonedPointCloud& cloud, const VarianceStudy& st) {
    out << "x,y,var_u,var_v,var_p,var_k,var_eps\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << csv::format_double(cloud.points[i].x) << ',' << csv::format_double(cloud.points[i].y);
        for (int f = 0; f < 5; ++f) out << ',' << csv::format_double(st.variance[f][i]);
        out << '\n';
    }
}

}  // namespace ranspinn::evalreport
