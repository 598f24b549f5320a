// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ranspinn/ranspinn.hpp"

using namespace ranspinn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

// |a - b| / max(|b|, floor)
double rel(double a, double b, double floor = 1e-3) { return std::abs(a - b) / std::max(std::abs(b), floor); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::current_path() / "acceptance_work" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
    std::vector<std::string> argv = {"ranspinn"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    const int code = workbench::run_cli(argv, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

net::DenseNet random_net(const net::LayerSizes& sizes, Rng& rng) {
    net::DenseNet n(sizes);
    for (double& p : n.params()) p = rng.uniform(-0.9, 0.9);
    return n;
}

// ---------------------------------------------------------------------------

Outcome derivative_correctness() {
    const auto t0 = Clock::now();
    Rng rng(2024);
    double worst1 = 0.0, worst2 = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        net::LayerSizes sizes = {3};
        const int depth = 1 + static_cast<int>(rng.below(3));
        for (int d = 0; d < depth; ++d) sizes.push_back(2 + static_cast<int>(rng.below(9)));
        sizes.push_back(1);
        const auto n = random_net(sizes, rng);
        const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1), re = rng.uniform(-1, 1);
        const auto jet = n(ad::seed_point<double>(x, y, re));

        std::vector<long double> lp(n.params().begin(), n.params().end());
        auto f = [&](long double a, long double b) {
            const long double in[3] = {a, b, static_cast<long double>(re)};
            return net::DenseNet::forward<long double, long double>(sizes, lp, in);
        };
        const long double h1 = 1e-5L, h2 = 1e-4L, X = x, Y = y;
        const long double fx = (f(X + h1, Y) - f(X - h1, Y)) / (2 * h1);
        const long double fy = (f(X, Y + h1) - f(X, Y - h1)) / (2 * h1);
        const long double fxx = (f(X + h2, Y) - 2 * f(X, Y) + f(X - h2, Y)) / (h2 * h2);
        const long double fyy = (f(X, Y + h2) - 2 * f(X, Y) + f(X, Y - h2)) / (h2 * h2);
        const long double fxy =
            (f(X + h2, Y + h2) - f(X + h2, Y - h2) - f(X - h2, Y + h2) + f(X - h2, Y - h2)) / (4 * h2 * h2);
        worst1 = std::max({worst1, rel(jet.dx, double(fx)), rel(jet.dy, double(fy))});
        worst2 = std::max({worst2, rel(jet.dxx, double(fxx)), rel(jet.dyy, double(fyy)), rel(jet.dxy, double(fxy))});
    }

    // Parameter gradients of a loss built from second derivatives: tape vs fourth-order differences.
    double worst_p = 0.0;
    const net::LayerSizes sizes = {3, 6, 6, 1};
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 4; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    auto loss_d = [&](std::span<const double> p) {
        double s = 0.0;
        for (const auto& q : pts) {
            const auto sp = ad::seed_point<double>(q[0], q[1], q[2]);
            const ad::Jet2<double> in[3] = {sp.x, sp.y, sp.re};
            const auto j = net::DenseNet::forward<ad::Jet2<double>, double>(sizes, p, in);
            const double lap = j.dxx + j.dyy;
            s += lap * lap + j.dx * j.dxy + 0.5 * j.value;
        }
        return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
        auto n = random_net(sizes, rng);
        const auto grad = ad::loss_gradient(n.params(), [&](std::span<const ad::Var> p) {
            ad::Var s(0.0);
            for (const auto& q : pts) {
                using JV = ad::Jet2<ad::Var>;
                const JV in[3] = {JV::seed_x(q[0]), JV::seed_y(q[1]), JV::constant(q[2])};
                const auto j = net::DenseNet::forward<JV, ad::Var>(sizes, p, in);
                const ad::Var lap = j.dxx + j.dyy;
                s = s + lap * lap + j.dx * j.dxy + j.value * 0.5;
            }
            return s;
        });
        auto params = n.params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i], h = 1e-4;
            auto at = [&](double v) {
                params[i] = v;
                return loss_d(params);
            };
            const double fd = (-at(keep + 2 * h) + 8 * at(keep + h) - 8 * at(keep - h) + at(keep - 2 * h)) / (12 * h);
            params[i] = keep;
            worst_p = std::max(worst_p, rel(grad[i], fd));
        }
    }

    // The batched training gradient, on a loss with every PDE term active.
    workbench::MmsSpec spec;
    spec.points_x = 8;
    spec.points_y = 6;
    spec.re_list = {1200, 1800};
    trainer::TrainingData data;
    for (const auto& d : workbench::mms_generate(spec)) {
        const auto c = sampler::nondimensionalize(d.cloud, workbench::mms_reference_scales(d.cloud.re));
        trainer::append_cloud(data, c, sampler::zone_sample(c, sampler::equal_split_caps(c, 3000), 0), d.sources);
    }
    auto ens = net::NetworkEnsemble::initialize({3, 8, 8, 1}, 5, data.normalization());
    const trainer::GradientEngine engine(data, {}, 1, 16);
    std::vector<std::size_t> idx(data.interior.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::array<double, 4> lam = {2.0, 3.0, 50.0, 0.5};
    const auto eval = engine.evaluate(ens, idx, trainer::Phase::Full, lam, true);
    double worst_e = 0.0;
    for (int f = 0; f < 5; ++f) {
        auto params = ens.nets()[f].params();
        for (std::size_t i = 0; i < params.size(); i += 3) {
            const double keep = params[i], h = 1e-4;
            auto at = [&](double v) {
                params[i] = v;
                return engine.evaluate(ens, idx, trainer::Phase::Full, lam, false).loss.total;
            };
            const double fd = (-at(keep + 2 * h) + 8 * at(keep + h) - 8 * at(keep - h) + at(keep - 2 * h)) / (12 * h);
            params[i] = keep;
            worst_e = std::max(worst_e, rel(eval.grad[f][i], fd));
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst1 <= 1e-6 && worst2 <= 1e-4 && worst_p <= 1e-5 && worst_e <= 1e-5 && secs < 60.0;
    o.detail = "max rel err d1 " + fmt(worst1) + ", d2 " + fmt(worst2) + ", param grad (tape) " + fmt(worst_p) +
               ", param grad (batched) " + fmt(worst_e) + ", " + fmt(secs) + " s";
    return o;
}

Outcome analytic_residual_zeros() {
    using J = ad::Jet2<double>;
    const physics::ModelConstants c;
    auto state = [](double u, double v, double p, double k, double eps) {
        physics::FlowState<double> s;
        s.u = J(u);
        s.v = J(v);
        s.p = J(p);
        s.k = J(k);
        s.eps = J(eps);
        s.re = 1500.0;
        return s;
    };
    double worst = 0.0;
    auto uniform = state(1.0, 0.3, 0.7, 0.5, 0.2);
    auto r = physics::residuals(uniform, c);
    worst = std::max({worst, std::abs(r.mom_x), std::abs(r.mom_y), std::abs(r.cont)});
    auto shear = state(0.0, 0.0, 0.4, 0.5, 0.2);
    shear.u = J::seed_y(0.6) * 2.0;
    r = physics::residuals(shear, c);
    worst = std::max({worst, std::abs(r.mom_x), std::abs(r.mom_y), std::abs(r.cont)});

    const auto constant = state(0.0, 0.0, 0.0, 0.37, 0.21);
    const double rk = physics::k_residual(constant, c);
    const double re = physics::eps_residual(state(0.0, 0.0, 0.0, 1.0, 1.0), c);
    Outcome o;
    o.pass = worst < 1e-12 && rk == 0.21 && std::abs(re + 1.92) < 1e-15;
    o.detail = "flow residuals max " + fmt(worst) + ", k residual " + fmt(rk) + " (eps 0.21), eps residual " + fmt(re);
    return o;
}

Outcome mms_closure() {
    Rng rng(7);
    double worst = 0.0, grid_secs = 0.0;
    for (int trial = 0; trial < 12; ++trial) {
        workbench::MmsSpec s;
        if (trial > 0) {
            s.a = rng.uniform(-0.2, 0.2);
            s.m = 1 + static_cast<int>(rng.below(3));
            s.n = 1 + static_cast<int>(rng.below(3));
            s.u0 = rng.uniform(0.5, 2.0);
            s.re_exponent = rng.uniform(0.0, 1.0);
            s.p0 = rng.uniform(-1, 1);
            s.p1 = rng.uniform(-0.5, 0.5);
            s.k0 = rng.uniform(0.01, 0.1);
            s.k1 = rng.uniform(-0.9, 0.9) * s.k0;
            s.e0 = rng.uniform(0.005, 0.05);
            s.e1 = rng.uniform(-0.9, 0.9) * s.e0;
            s.x_min = rng.uniform(-1, 0);
            s.x_max = s.x_min + rng.uniform(0.5, 3);
            s.y_min = rng.uniform(-1, 0);
            s.y_max = s.y_min + rng.uniform(0.5, 2);
            s.re_list = {rng.uniform(100, 5000)};
            if (trial % 2) s.constants.eps_sink = physics::EpsSinkForm::Standard;
        } else {
            s.re_list = {1500};
        }
        s.points_x = 50;
        s.points_y = 50;
        const auto t0 = Clock::now();
        const auto data = workbench::mms_generate(s);
        for (const auto& d : data) {
            for (std::size_t i = 0; i < d.cloud.size(); ++i) {
                const auto& p = d.cloud.points[i];
                const auto st = workbench::mms_state(s, p.x, p.y, d.cloud.re);
                const auto r = physics::residuals(st, s.constants, d.sources[i]);
                worst = std::max({worst, std::abs(r.mom_x), std::abs(r.mom_y), std::abs(r.cont), std::abs(r.k),
                                  std::abs(r.eps)});
            }
        }
        if (trial == 0) grid_secs = seconds_since(t0);
    }
    Outcome o;
    o.pass = worst < 1e-10 && grid_secs < 10.0;
    o.detail = "max |residual| " + fmt(worst) + " over 12 specs, 50x50 grid in " + fmt(grid_secs) + " s";
    return o;
}

Outcome end_to_end() {
    const fs::path dir = scratch("end_to_end");
    write_file(dir / "mms.cfg", "re_list = [1000, 1200, 1400, 1600, 1800, 2000, 1500, 2200]\nout_dir = data\n");
    std::string err;
    if (cli({"mms-gen", (dir / "mms.cfg").string()}, &err) != 0) return {false, "mms-gen failed: " + err};
    std::string clouds, sources;
    for (int re = 1000; re <= 2000; re += 200) {
        const std::string stem = "data/mms_re" + std::to_string(re);
        clouds += (clouds.empty() ? "" : ", ") + stem + ".csv";
        sources += (sources.empty() ? "" : ", ") + stem + "_sources.csv";
    }
    write_file(dir / "train.cfg", "clouds = [" + clouds + "]\nsources = [" + sources + "]\nout_dir = run\n");
    const auto t0 = Clock::now();
    if (cli({"train", (dir / "train.cfg").string()}, &err) != 0) return {false, "train failed: " + err};
    const double secs = seconds_since(t0);

    const auto ck = workbench::load_checkpoint((dir / "run" / "checkpoint.json").string());
    auto mean_errors = [&](int re) {
        const auto raw = sampler::load_point_cloud((dir / "data" / ("mms_re" + std::to_string(re) + ".csv")).string());
        const auto cloud = sampler::nondimensionalize(raw, ck.meta.refs);
        const auto rep = evalreport::evaluate_cloud(ck.ensemble, cloud, {});
        return std::array<double, 3>{rep.vars[0].stats.mean, rep.vars[1].stats.mean, rep.vars[2].stats.mean};
    };
    const auto in = mean_errors(1500);
    const auto out = mean_errors(2200);
    Outcome o;
    o.pass = secs <= 900.0;
    for (double e : in) o.pass = o.pass && e <= 0.05;
    for (double e : out) o.pass = o.pass && e <= 0.15;
    o.detail = "Re 1500 mean u/v/p " + fmt(in[0]) + "/" + fmt(in[1]) + "/" + fmt(in[2]) + " (<= 0.05), Re 2200 " +
               fmt(out[0]) + "/" + fmt(out[1]) + "/" + fmt(out[2]) + " (<= 0.15), training " + fmt(secs) + " s";
    return o;
}

trainer::TrainingData small_mms_data() {
    workbench::MmsSpec spec;
    spec.points_x = 12;
    spec.points_y = 10;
    spec.re_list = {1000, 1500, 2000};
    trainer::TrainingData data;
    for (const auto& d : workbench::mms_generate(spec)) {
        const auto c = sampler::nondimensionalize(d.cloud, workbench::mms_reference_scales(d.cloud.re));
        trainer::append_cloud(data, c, sampler::zone_sample(c, sampler::equal_split_caps(c, 3000), 0), d.sources);
    }
    return data;
}

Outcome schedule_semantics() {
    const auto data = small_mms_data();
    auto cfg = trainer::TrainConfig::with_epochs(40);
    cfg.decay_interval = 5;
    cfg.batch_size = 0;
    const auto ens0 = net::NetworkEnsemble::initialize({3, 10, 10, 1}, 3, data.normalization());
    const auto r = trainer::train(cfg, data, ens0);

    bool zeros = true, eps_weight = true;
    for (const auto& rec : r.history) {
        if (rec.epoch < cfg.warmstart_end)
            for (double p : rec.loss.pde) zeros = zeros && p == 0.0;
        if (rec.epoch < cfg.eps_pde_start) eps_weight = eps_weight && rec.loss.lambda[3] == 0.0;
        else eps_weight = eps_weight && rec.loss.lambda[3] > 0.0;
    }

    // Replay the full-batch warm start by hand, then check lambda_i L_i = 1 on the calibration batch.
    auto ens = ens0;
    const trainer::GradientEngine engine(data, trainer::loss_options(cfg), 1, cfg.chunk_size);
    std::vector<std::size_t> all(data.interior.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::array<trainer::AdamMoments, 5> mom;
    for (int f = 0; f < 5; ++f) mom[f] = trainer::AdamMoments(ens.nets()[f].params().size());
    for (std::size_t step = 0; step < cfg.warmstart_end; ++step) {
        const auto e = engine.evaluate(ens, all, trainer::Phase::WarmStart, {}, true);
        for (int f = 0; f < 5; ++f)
            trainer::adam_step(ens.nets()[f].params(), e.grad[f], mom[f], step, trainer::learning_rate(step, cfg));
    }
    const auto l = trainer::pde_loss(ens, data.interior, trainer::Phase::Full, trainer::loss_options(cfg));
    double worst = 0.0;
    bool calibrated = r.calibrations.size() == 2 && r.calibrations[0].epoch == cfg.warmstart_end &&
                      r.calibrations[1].epoch == cfg.eps_pde_start;
    if (calibrated) {
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(r.calibrations[0].lambda[i] * l[i] - 1.0));
        worst = std::max(worst, std::abs(r.calibrations[1].lambda[3] * r.calibrations[1].losses[3] - 1.0));
    }
    Outcome o;
    o.pass = zeros && eps_weight && calibrated && worst < 1e-9;
    o.detail = std::string("PDE terms zero in warm start: ") + (zeros ? "yes" : "no") +
               ", eps weight zero until its start: " + (eps_weight ? "yes" : "no") + ", max |lambda L - 1| " +
               fmt(worst);
    return o;
}

Outcome sampling_properties() {
    workbench::MmsSpec spec;
    spec.points_x = 30;
    spec.points_y = 20;
    spec.zones_x = 3;
    spec.zones_y = 2;
    const auto cloud = workbench::mms_generate_one(spec, 1500.0).cloud;
    const auto zones = sampler::interior_by_zone(cloud);
    Rng rng(99);
    bool caps_ok = true, same_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        sampler::ZoneCaps caps;
        for (std::size_t z = 0; z < zones.size(); ++z) caps[static_cast<int>(z)] = rng.below(150);
        const auto a = sampler::zone_sample(cloud, caps, trial);
        std::vector<std::size_t> count(zones.size(), 0);
        for (auto i : a.interior) ++count[cloud.points[i].zone];
        for (std::size_t z = 0; z < zones.size(); ++z)
            caps_ok = caps_ok && count[z] <= caps[static_cast<int>(z)] &&
                      count[z] == std::min<std::size_t>(caps[static_cast<int>(z)], zones[z].size());
        same_ok = same_ok && a == sampler::zone_sample(cloud, caps, trial);
    }

    const int draws = 10000;
    sampler::ZoneCaps caps;
    for (std::size_t z = 0; z < zones.size(); ++z) caps[static_cast<int>(z)] = zones[z].size() / 4;
    std::vector<int> hits(cloud.size(), 0);
    for (int s = 0; s < draws; ++s)
        for (auto i : sampler::zone_sample(cloud, caps, 1000 + s).interior) ++hits[i];
    double worst_p = 1.0;
    for (std::size_t z = 0; z < zones.size(); ++z) {
        const double expected = double(draws) * caps[static_cast<int>(z)] / zones[z].size();
        double chi2 = 0.0;
        for (auto i : zones[z]) chi2 += (hits[i] - expected) * (hits[i] - expected) / expected;
        const boost::math::chi_squared dist(static_cast<double>(zones[z].size() - 1));
        worst_p = std::min(worst_p, boost::math::cdf(boost::math::complement(dist, chi2)));
    }
    Outcome o;
    o.pass = caps_ok && same_ok && worst_p > 0.01;
    o.detail = std::string("caps respected: ") + (caps_ok ? "yes" : "no") + ", reproducible: " +
               (same_ok ? "yes" : "no") + ", smallest chi-square p-value over " + std::to_string(zones.size()) +
               " zones " + fmt(worst_p);
    return o;
}

Outcome stats_oracle() {
    Rng rng(31);
    std::size_t mismatches = 0;
    double worst_sum = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng.below(trial % 10 == 0 ? 5000 : 100);
        std::vector<double> e(n);
        for (auto& v : e) v = rng.uniform01() < 0.05 ? 0.0 : rng.uniform(0, 1);
        const auto s = evalreport::error_stats(e);
        std::vector<double> sorted = e;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t r95 = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.95 * n - 1e-9)));
        const std::size_t r50 = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.50 * n - 1e-9)));
        double sum = 0.0;
        for (double v : e) sum += v;
        if (s.p95 != sorted[r95 - 1] || s.median != sorted[r50 - 1] || s.mean != sum / n) ++mismatches;
        const auto h = evalreport::histogram(e, 1 + rng.below(40));
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(h.fractions.begin(), h.fractions.end(), 0.0) - 1.0));
    }
    Outcome o;
    o.pass = mismatches == 0 && worst_sum <= 1e-12;
    o.detail = std::to_string(mismatches) + " mismatches on 10000 arrays, max |sum(fractions) - 1| " + fmt(worst_sum);
    return o;
}

Outcome determinism() {
    const fs::path dir = scratch("determinism");
    write_file(dir / "mms.cfg", "re_list = [1000, 2000]\npoints_x = 16\npoints_y = 12\nout_dir = data\n");
    std::string err;
    if (cli({"mms-gen", (dir / "mms.cfg").string()}, &err) != 0) return {false, "mms-gen failed: " + err};
    write_file(dir / "train.cfg",
               "clouds = [data/mms_re1000.csv, data/mms_re2000.csv]\n"
               "sources = [data/mms_re1000_sources.csv, data/mms_re2000_sources.csv]\n"
               "epochs = 30\nwarmstart_end = 6\neps_pde_start = 12\nbatch_size = 64\nchunk_size = 16\n"
               "hidden_layers = [12, 12]\nseed = 4\n");
    std::vector<std::pair<std::string, std::string>> runs;
    for (const char* threads : {"1", "1", "4"}) {
        const fs::path out = dir / ("run_" + std::to_string(runs.size()));
        if (cli({"train", (dir / "train.cfg").string(), "--threads", threads}, &err) != 0)
            return {false, "train failed: " + err};
        fs::rename(dir / "run", out);
        runs.emplace_back(read_file(out / "loss_history.csv"), read_file(out / "checkpoint.json"));
    }
    const bool rerun = runs[0] == runs[1];
    const bool threads = runs[0] == runs[2];
    Outcome o;
    o.pass = rerun && threads && !runs[0].first.empty();
    o.detail = std::string("rerun identical: ") + (rerun ? "yes" : "no") + ", 1 vs 4 threads identical: " +
               (threads ? "yes" : "no") + " (loss history and checkpoint bytes)";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"derivative correctness", derivative_correctness},
        {"analytic residual zeros", analytic_residual_zeros},
        {"manufactured-solution closure", mms_closure},
        {"end-to-end surrogate quality", end_to_end},
        {"schedule semantics", schedule_semantics},
        {"sampling properties", sampling_properties},
        {"stats oracle", stats_oracle},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
