#pragma once

// Command-line front end.
//
//   mms-gen <spec>                          manufactured datasets
//   train <config> [--seed N] [--threads N] train and write loss history + checkpoint
//   evaluate <checkpoint> <cloud> --out D   error report
//   variance <config> --seeds a,b,...       per-point variance over seeds
//   sample-preview <cloud> --caps ...       zone sampling summary
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/evalreport/report.hpp"
#include "ranspinn/workbench/pipeline.hpp"

namespace ranspinn::workbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto item : csv::split(text)) out.emplace_back(item);
    return out;
}

inline std::uint64_t parse_u64(const std::string& s, const char* what) {
    long v = 0;
    if (!csv::parse_int(csv::trim(s), v) || v < 0)
        throw ValidationError(std::string(what) + ": '" + s + "' is not a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

inline void log_resolved(const ConfigFile& cfg, std::ostream& err) {
    err << "# resolved configuration\n";
    cfg.write_resolved(err);
}

inline std::string join(const std::filesystem::path& dir, const std::string& name) { return (dir / name).string(); }

inline int cmd_mms_gen(const std::string& spec_path, std::ostream& out, std::ostream& err) {
    auto cfg = ConfigFile::load(spec_path);
    const MmsJob job = read_mms_job(cfg);
    cfg.finish();
    log_resolved(cfg, err);
    write_resolved_config(cfg, job.out_dir);
    for (const auto& f : write_mms_datasets(job.spec, job.out_dir))
        out << "Re " << csv::format_double(f.re) << ": " << f.cloud << ", " << f.sources << '\n';
    return kExitOk;
}

inline int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
                     std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
    auto cfg = ConfigFile::load(config_path);
    const TrainSettings settings = read_train_settings(cfg, seed, threads);
    cfg.finish();
    log_resolved(cfg, err);
    write_resolved_config(cfg, settings.out_dir);
    const TrainJobResult job = run_training(settings);
    for (const auto& w : job.warnings) err << "warning: " << w << '\n';
    write_training_outputs(job, settings.out_dir);
    out << "wrote " << join(settings.out_dir, "loss_history.csv") << " and " << join(settings.out_dir, "checkpoint.json")
        << '\n';
    if (job.result.status == trainer::TrainStatus::Diverged) {
        err << "error: training diverged: " << job.result.message << "; outputs hold the last finite state\n";
        return kExitFailure;
    }
    if (!job.result.history.empty()) {
        const auto& last = job.result.history.back();
        out << "epochs " << job.result.epochs_completed << ", final loss " << csv::format_double(last.loss.total)
            << '\n';
    }
    return kExitOk;
}

inline int cmd_evaluate(const std::string& checkpoint_path, const std::string& cloud_path, const std::string& out_dir,
                        std::size_t bins, bool svg, std::ostream& out, std::ostream&) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const auto raw = sampler::load_point_cloud(cloud_path);
    const auto cloud = sampler::nondimensionalize(raw, ck.meta.refs);
    std::vector<double> training_re;
    for (const auto& c : ck.meta.clouds) training_re.push_back(c.re);
    const auto report = evalreport::evaluate_cloud(ck.ensemble, cloud, training_re, bins);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    {
        auto f = csv::open_output(join(dir, "stats.csv"));
        evalreport::write_stats_csv(f, report);
    }
    {
        auto f = csv::open_output(join(dir, "error_field.csv"));
        evalreport::write_error_field_csv(f, report);
    }
    {
        auto f = csv::open_output(join(dir, "report.txt"));
        evalreport::write_report_metadata(f, report);
    }
    for (const auto& v : report.vars) {
        auto f = csv::open_output(join(dir, "histogram_" + v.name + ".csv"));
        evalreport::write_histogram_csv(f, v.hist);
        if (svg) {
            auto h = csv::open_output(join(dir, "histogram_" + v.name + ".svg"));
            evalreport::write_histogram_svg(h, v.hist, "normalized " + v.name + " error");
            auto s = csv::open_output(join(dir, "error_field_" + v.name + ".svg"));
            evalreport::write_error_scatter_svg(s, report.x, report.y, v.field.errors, "normalized " + v.name + " error");
        }
    }
    out << "Re " << csv::format_double(report.re) << (report.in_training_range ? " (inside" : " (outside")
        << " training range)\n";
    evalreport::write_stats_csv(out, report);
    return kExitOk;
}

inline int cmd_variance(const std::string& config_path, const std::string& seeds_text,
                        const std::string& cloud_override, const std::string& out_override,
                        std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(seeds_text)) seeds.push_back(parse_u64(s, "--seeds"));
    if (seeds.size() < 2) throw ValidationError("--seeds needs at least two seeds");

    auto cfg = ConfigFile::load(config_path);
    TrainSettings base = read_train_settings(cfg, std::nullopt, threads);
    cfg.finish();
    log_resolved(cfg, err);
    const std::string out_dir = out_override.empty() ? join(base.out_dir, "variance") : out_override;
    write_resolved_config(cfg, out_dir);

    const std::string eval_path = cloud_override.empty() ? base.clouds.front() : cloud_override;
    const auto eval_cloud = sampler::nondimensionalize(sampler::load_point_cloud(eval_path), base.refs);

    // Only the initialization seed varies; the training sample stays fixed.
    const auto study = evalreport::variance_study(
        seeds,
        [&](std::uint64_t seed) -> std::optional<evalreport::FieldPredictions> {
            TrainSettings s = base;
            s.train.seed = seed;
            const TrainJobResult job = run_training(s);
            if (job.result.status == trainer::TrainStatus::Diverged) return std::nullopt;
            return evalreport::predict_fields(job.result.ensemble, eval_cloud);
        },
        1);
    for (auto s : study.excluded_seeds) err << "warning: seed " << s << " diverged and was excluded\n";

    std::filesystem::create_directories(out_dir);
    {
        auto f = csv::open_output(join(out_dir, "variance.csv"));
        evalreport::write_variance_csv(f, eval_cloud, study);
    }
    auto f = csv::open_output(join(out_dir, "variance_summary.txt"));
    for (std::ostream* o : {static_cast<std::ostream*>(&out), static_cast<std::ostream*>(&f)}) {
        *o << "seeds used:";
        for (auto s : study.used_seeds) *o << ' ' << s;
        *o << '\n';
        for (int v = 0; v < 5; ++v) {
            const auto& var = study.variance[v];
            std::size_t low = 0;
            double mx = 0.0;
            for (double x : var) {
                low += x < 1e-3;
                mx = std::max(mx, x);
            }
            *o << physics::kFieldNames[v] << ": max " << csv::format_double(mx) << ", fraction below 1e-3 "
               << csv::format_double(static_cast<double>(low) / static_cast<double>(var.size())) << '\n';
        }
    }
    return kExitOk;
}

inline int cmd_sample_preview(const std::string& cloud_path, const std::string& caps_text,
                              std::optional<std::size_t> budget, std::uint64_t seed, std::ostream& out,
                              std::ostream& err) {
    const auto cloud = sampler::load_point_cloud(cloud_path);
    sampler::ZoneCaps caps;
    if (budget) {
        if (!caps_text.empty()) throw ValidationError("give either --caps or --budget, not both");
        caps = sampler::equal_split_caps(cloud, *budget);
    } else {
        if (caps_text.empty()) throw ValidationError("sample-preview needs --caps or --budget");
        const auto items = split_list(caps_text);
        if (items.size() == 1) {
            const auto c = parse_u64(items[0], "--caps");
            for (int z = 0; z < cloud.zone_count(); ++z) caps[z] = c;
        } else {
            if (static_cast<int>(items.size()) != cloud.zone_count())
                throw ValidationError("--caps lists " + std::to_string(items.size()) + " caps but the cloud has " +
                                      std::to_string(cloud.zone_count()) + " zones");
            for (std::size_t z = 0; z < items.size(); ++z) caps[static_cast<int>(z)] = parse_u64(items[z], "--caps");
        }
    }
    const auto set = sampler::zone_sample(cloud, caps, seed);
    for (const auto& w : set.boundary.warnings) err << "warning: " << w << '\n';
    const auto zones = sampler::interior_by_zone(cloud);
    std::vector<std::size_t> selected(zones.size(), 0);
    for (std::size_t i : set.interior) ++selected[cloud.points[i].zone];
    out << "zone,interior,cap,selected\n";
    for (std::size_t z = 0; z < zones.size(); ++z)
        out << z << ',' << zones[z].size() << ',' << caps[static_cast<int>(z)] << ',' << selected[z] << '\n';
    out << "boundary: inlet " << set.boundary.inlet.size() << ", outlet " << set.boundary.outlet.size() << ", wall "
        << set.boundary.wall.size() << ", freestream " << set.boundary.freestream.size() << '\n';
    return kExitOk;
}

}  // namespace detail

/// Runs the tool on argv-style arguments (args[0] is the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"RANS k-epsilon physics-informed network workbench", "ranspinn"};
    app.require_subcommand(1);

    std::string spec_path;
    auto* mms = app.add_subcommand("mms-gen", "generate manufactured-solution datasets");
    mms->add_option("spec", spec_path, "MMS spec file")->required();

    std::string train_cfg;
    std::optional<std::uint64_t> train_seed;
    std::optional<unsigned> train_threads;
    auto* train = app.add_subcommand("train", "train an ensemble from a config file");
    train->add_option("config", train_cfg, "training config file")->required();
    train->add_option("--seed", train_seed, "initialization seed (overrides the config)");
    train->add_option("--threads", train_threads, "worker threads (results do not depend on it)");

    std::string ck_path, eval_cloud, eval_out;
    std::size_t bins = 20;
    bool no_svg = false;
    auto* evaluate = app.add_subcommand("evaluate", "error report of a checkpoint on a point cloud");
    evaluate->add_option("checkpoint", ck_path, "checkpoint file")->required();
    evaluate->add_option("cloud", eval_cloud, "point cloud with ground truth")->required();
    evaluate->add_option("--out", eval_out, "output directory")->required();
    evaluate->add_option("--bins", bins, "histogram bins");
    evaluate->add_flag("--no-svg", no_svg, "skip SVG plots");

    std::string var_cfg, var_seeds, var_cloud, var_out;
    std::optional<unsigned> var_threads;
    auto* variance = app.add_subcommand("variance", "prediction variance over initialization seeds");
    variance->add_option("config", var_cfg, "training config file")->required();
    variance->add_option("--seeds", var_seeds, "comma-separated seeds")->required();
    variance->add_option("--cloud", var_cloud, "evaluation cloud (default: first training cloud)");
    variance->add_option("--out", var_out, "output directory (default: <out_dir>/variance)");
    variance->add_option("--threads", var_threads, "worker threads per training run");

    std::string prev_cloud, prev_caps;
    std::optional<std::size_t> prev_budget;
    std::uint64_t prev_seed = 0;
    auto* preview = app.add_subcommand("sample-preview", "show what zone sampling would select");
    preview->add_option("cloud", prev_cloud, "point cloud")->required();
    preview->add_option("--caps", prev_caps, "one cap for every zone, or one per zone (comma-separated)");
    preview->add_option("--budget", prev_budget, "total interior budget, split equally across zones");
    preview->add_option("--seed", prev_seed, "sampling seed");

    std::vector<std::string> argv_rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        if (mms->parsed()) return detail::cmd_mms_gen(spec_path, out, err);
        if (train->parsed()) return detail::cmd_train(train_cfg, train_seed, train_threads, out, err);
        if (evaluate->parsed()) return detail::cmd_evaluate(ck_path, eval_cloud, eval_out, bins, !no_svg, out, err);
        if (variance->parsed())
            return detail::cmd_variance(var_cfg, var_seeds, var_cloud, var_out, var_threads, out, err);
        if (preview->parsed())
            return detail::cmd_sample_preview(prev_cloud, prev_caps, prev_budget, prev_seed, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitInvalid;
}

}  // namespace ranspinn::workbench
