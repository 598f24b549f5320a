#pragma once

// Config-driven glue shared by the command-line tool and the tests: reading
// MMS specs and training settings from config files, assembling training data
// from point clouds, and running a training job end to end.

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/sampler/point_cloud.hpp"
#include "ranspinn/sampler/source_terms.hpp"
#include "ranspinn/sampler/zone_sampler.hpp"
#include "ranspinn/trainer/train.hpp"
#include "ranspinn/workbench/checkpoint.hpp"
#include "ranspinn/workbench/config_file.hpp"
#include "ranspinn/workbench/mms.hpp"

namespace ranspinn::workbench {

inline physics::ModelConstants read_constants(ConfigFile& cfg) {
    physics::ModelConstants c;
    c.c1 = cfg.get_double("c1", c.c1);
    c.c2 = cfg.get_double("c2", c.c2);
    c.sigma_k = cfg.get_double("sigma_k", c.sigma_k);
    c.sigma_eps = cfg.get_double("sigma_eps", c.sigma_eps);
    c.c_mu = cfg.get_double("c_mu", c.c_mu);
    c.k_floor = cfg.get_double("k_floor", c.k_floor);
    c.eps_floor = cfg.get_double("eps_floor", c.eps_floor);
    c.eps_sink = physics::eps_sink_from_string(cfg.get_string("eps_sink", physics::to_string(c.eps_sink)));
    c.validate();
    return c;
}

struct MmsJob {
    MmsSpec spec;
    std::string out_dir;
};

inline MmsJob read_mms_job(ConfigFile& cfg) {
    MmsJob job;
    MmsSpec& s = job.spec;
    s.a = cfg.get_double("a", s.a);
    s.m = static_cast<int>(cfg.get_int("m", s.m));
    s.n = static_cast<int>(cfg.get_int("n", s.n));
    s.u0 = cfg.get_double("u0", s.u0);
    s.re_ref = cfg.get_double("re_ref", s.re_ref);
    s.re_exponent = cfg.get_double("re_exponent", s.re_exponent);
    s.p0 = cfg.get_double("p0", s.p0);
    s.p1 = cfg.get_double("p1", s.p1);
    s.k0 = cfg.get_double("k0", s.k0);
    s.k1 = cfg.get_double("k1", s.k1);
    s.e0 = cfg.get_double("e0", s.e0);
    s.e1 = cfg.get_double("e1", s.e1);
    s.x_min = cfg.get_double("x_min", s.x_min);
    s.x_max = cfg.get_double("x_max", s.x_max);
    s.y_min = cfg.get_double("y_min", s.y_min);
    s.y_max = cfg.get_double("y_max", s.y_max);
    s.re_list = cfg.get_doubles("re_list", s.re_list);
    s.points_x = cfg.get_size("points_x", s.points_x);
    s.points_y = cfg.get_size("points_y", s.points_y);
    s.zones_x = static_cast<int>(cfg.get_int("zones_x", s.zones_x));
    s.zones_y = static_cast<int>(cfg.get_int("zones_y", s.zones_y));
    s.constants = read_constants(cfg);
    job.out_dir = cfg.get_path("out_dir", ".");
    s.validate();
    return job;
}

struct MmsFiles {
    double re = 0.0;
    std::string cloud;
    std::string sources;
};

/// Writes <stem>.csv and <stem>_sources.csv per Reynolds number into `dir`.
inline std::vector<MmsFiles> write_mms_datasets(const MmsSpec& spec, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<MmsFiles> files;
    for (const auto& d : mms_generate(spec)) {
        const std::string stem = (std::filesystem::path(dir) / mms_file_stem(d.cloud.re)).string();
        MmsFiles f{d.cloud.re, stem + ".csv", stem + "_sources.csv"};
        sampler::save_point_cloud(f.cloud, d.cloud);
        auto out = csv::open_output(f.sources);
        sampler::write_source_terms(out, d.cloud, d.sources);
        if (!out) throw Error("failed writing '" + f.sources + "'");
        files.push_back(f);
    }
    return files;
}

struct TrainSettings {
    std::vector<std::string> clouds;
    std::vector<std::string> sources;  // empty, or one per cloud
    std::string out_dir;
    physics::RefScales refs;
    std::size_t sample_budget = 3000;  // interior points per cloud, split equally across zones
    std::vector<long> zone_caps;       // per-zone caps; overrides sample_budget when given
    std::uint64_t sample_seed = 0;
    double inlet_velocity = 1.0;
    std::vector<long> hidden_layers = {32, 32, 32, 32};
    trainer::TrainConfig train;

    net::LayerSizes layer_sizes() const {
        net::LayerSizes s = {3};
        for (long h : hidden_layers) s.push_back(static_cast<int>(h));
        s.push_back(1);
        return s;
    }
};

/// Reads training settings. `seed_override` and `threads_override` (when set)
/// replace the file values and are what the resolved log shows.
inline TrainSettings read_train_settings(ConfigFile& cfg, std::optional<std::uint64_t> seed_override = {},
                                         std::optional<unsigned> threads_override = {}) {
    TrainSettings s;
    trainer::TrainConfig& t = s.train;
    s.clouds = cfg.get_paths("clouds", {});
    s.sources = cfg.get_paths("sources", {});
    s.out_dir = cfg.get_path("out_dir", "run");
    s.refs.length = cfg.get_double("ref_length", s.refs.length);
    s.refs.u_inlet = cfg.get_double("ref_velocity", s.refs.u_inlet);
    s.refs.mu = cfg.get_double("ref_viscosity", s.refs.mu);
    s.refs.validate();

    t.epochs = cfg.get_size("epochs", t.epochs);
    t.warmstart_end = cfg.get_size("warmstart_end", t.warmstart_end);
    t.eps_pde_start = cfg.get_size("eps_pde_start", t.eps_pde_start);
    t.batch_size = cfg.get_size("batch_size", t.batch_size);
    t.lr0 = cfg.get_double("lr0", t.lr0);
    t.decay = cfg.get_double("decay", t.decay);
    t.decay_interval = cfg.get_size("decay_interval", t.decay_interval);
    long seed = 0;
    if (seed_override) {
        seed = static_cast<long>(*seed_override);
        cfg.override_value("seed", std::to_string(seed));
    } else {
        seed = cfg.get_int("seed", 0);
    }
    if (seed < 0) throw ValidationError("seed must be nonnegative");
    t.seed = static_cast<std::uint64_t>(seed);
    const long sample_seed = cfg.get_int("sample_seed", seed);
    if (sample_seed < 0) throw ValidationError("sample_seed must be nonnegative");
    s.sample_seed = static_cast<std::uint64_t>(sample_seed);
    t.eps_log_delta = cfg.get_double("eps_log_delta", t.eps_log_delta);
    t.lambda_policy = trainer::lambda_policy_from_string(cfg.get_string("lambda_policy", to_string(t.lambda_policy)));
    if (threads_override) {
        t.threads = *threads_override;
        cfg.override_value("threads", std::to_string(t.threads));
    } else {
        t.threads = static_cast<unsigned>(cfg.get_size("threads", t.threads));
    }
    t.chunk_size = cfg.get_size("chunk_size", t.chunk_size);
    t.reset_moments = cfg.get_bool("reset_moments", t.reset_moments);
    s.hidden_layers = cfg.get_ints("hidden_layers", s.hidden_layers);
    s.sample_budget = cfg.get_size("sample_budget", s.sample_budget);
    s.zone_caps = cfg.get_ints("zone_caps", {});
    s.inlet_velocity = cfg.get_double("inlet_velocity", s.inlet_velocity);
    t.constants = read_constants(cfg);

    if (s.clouds.empty()) throw ValidationError("config: 'clouds' must list at least one training point cloud");
    if (!s.sources.empty() && s.sources.size() != s.clouds.size())
        throw ValidationError("config: 'sources' must be empty or list one file per cloud");
    for (long z : s.zone_caps)
        if (z < 0) throw ValidationError("config: zone_caps must be nonnegative");
    for (long h : s.hidden_layers)
        if (h <= 0) throw ValidationError("config: hidden_layers must be positive");
    if (!(s.inlet_velocity > 0.0)) throw ValidationError("config: inlet_velocity must be positive");
    t.validate();
    return s;
}

inline sampler::ZoneCaps caps_for(const sampler::ZonedPointCloud& cloud, const TrainSettings& s) {
    if (s.zone_caps.empty()) return sampler::equal_split_caps(cloud, s.sample_budget);
    sampler::ZoneCaps caps;
    if (s.zone_caps.size() == 1) {
        for (int z = 0; z < cloud.zone_count(); ++z) caps[z] = static_cast<std::size_t>(s.zone_caps[0]);
    } else {
        if (static_cast<int>(s.zone_caps.size()) != cloud.zone_count())
            throw ValidationError("zone_caps lists " + std::to_string(s.zone_caps.size()) + " caps but the cloud has " +
                                  std::to_string(cloud.zone_count()) + " zones");
        for (std::size_t z = 0; z < s.zone_caps.size(); ++z)
            caps[static_cast<int>(z)] = static_cast<std::size_t>(s.zone_caps[z]);
    }
    return caps;
}

struct PreparedData {
    trainer::TrainingData data;
    std::vector<CloudProvenance> provenance;
    std::vector<std::string> warnings;
};

/// Loads, normalizes and samples every training cloud. Cloud i uses sampling seed mix(sample_seed, i).
inline PreparedData prepare_training_data(const TrainSettings& s) {
    PreparedData out;
    for (std::size_t i = 0; i < s.clouds.size(); ++i) {
        const auto raw = sampler::load_point_cloud(s.clouds[i]);
        const auto cloud = sampler::nondimensionalize(raw, s.refs);
        std::vector<physics::SourceTerms> src;
        if (!s.sources.empty()) src = sampler::load_source_terms(s.sources[i], raw);
        const std::uint64_t seed = mix_seed(s.sample_seed, i);
        const auto caps = caps_for(cloud, s);
        const auto set = sampler::zone_sample(cloud, caps, seed, s.inlet_velocity);
        for (const auto& w : set.boundary.warnings) out.warnings.push_back(s.clouds[i] + ": " + w);
        trainer::append_cloud(out.data, cloud, set, src);
        out.provenance.push_back({s.clouds[i], cloud.re, seed, caps});
    }
    return out;
}

struct TrainJobResult {
    trainer::TrainResult result;
    CheckpointMeta meta;
    std::vector<std::string> warnings;
};

inline TrainJobResult run_training(const TrainSettings& s) {
    PreparedData prep = prepare_training_data(s);
    auto ens = net::NetworkEnsemble::initialize(s.layer_sizes(), s.train.seed, prep.data.normalization());
    TrainJobResult job;
    job.result = trainer::train(s.train, prep.data, std::move(ens));
    job.warnings = std::move(prep.warnings);
    job.meta.constants = s.train.constants;
    job.meta.refs = s.refs;
    job.meta.seed = s.train.seed;
    job.meta.clouds = std::move(prep.provenance);
    job.meta.lambda = job.result.lambda;
    job.meta.epochs_completed = job.result.epochs_completed;
    job.meta.diverged = job.result.status == trainer::TrainStatus::Diverged;
    return job;
}

/// loss_history.csv and checkpoint.json in `dir`.
inline void write_training_outputs(const TrainJobResult& job, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = csv::open_output((std::filesystem::path(dir) / "loss_history.csv").string());
        trainer::write_loss_history(out, job.result.history);
        if (!out) throw Error("failed writing loss history");
    }
    save_checkpoint(job.result.ensemble, job.meta, (std::filesystem::path(dir) / "checkpoint.json").string());
}

inline void write_resolved_config(const ConfigFile& cfg, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto out = csv::open_output((std::filesystem::path(dir) / "resolved_config.txt").string());
    cfg.write_resolved(out);
}

}  // namespace ranspinn::workbench
