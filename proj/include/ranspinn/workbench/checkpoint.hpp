#pragma once

// Checkpoints are single JSON documents:
//
//   { "format": "ranspinn-checkpoint", "version": 1, "checksum": "<fnv1a-64 hex>", "body": {...} }
//
// The checksum covers the compact serialization of "body". Doubles are written
// with 17 significant digits and read back exactly.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranspinn/common/error.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/physics/scales.hpp"

namespace ranspinn::workbench {

inline constexpr const char* kCheckpointFormat = "ranspinn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Where the training set of one cloud came from.
struct CloudProvenance {
    std::string path;
    double re = 0.0;
    std::uint64_t sample_seed = 0;
    std::map<int, std::size_t> caps;

    bool operator==(const CloudProvenance&) const = default;
};

struct CheckpointMeta {
    physics::ModelConstants constants;
    physics::RefScales refs;
    std::uint64_t seed = 0;
    std::vector<CloudProvenance> clouds;
    std::array<double, 4> lambda{};
    std::size_t epochs_completed = 0;
    bool diverged = false;

    bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
    net::NetworkEnsemble ensemble;
    CheckpointMeta meta;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

using nlohmann::json;

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json body_json(const net::NetworkEnsemble& ens, const CheckpointMeta& m) {
    json nets = json::array();
    for (physics::Field f : physics::kAllFields) {
        const auto& n = ens.net(f);
        nets.push_back({{"field", physics::name_of(f)},
                        {"layer_sizes", n.layer_sizes()},
                        {"params", std::vector<double>(n.params().begin(), n.params().end())}});
    }
    const auto& norm = ens.normalization();
    json clouds = json::array();
    for (const auto& c : m.clouds) {
        json caps = json::object();
        for (const auto& [z, cap] : c.caps) caps[std::to_string(z)] = cap;
        clouds.push_back({{"path", c.path}, {"re", c.re}, {"sample_seed", c.sample_seed}, {"caps", caps}});
    }
    const auto& k = m.constants;
    return {
        {"nets", nets},
        {"normalization", {{"center", norm.center}, {"scale", norm.scale}}},
        {"constants",
         {{"c1", k.c1},
          {"c2", k.c2},
          {"sigma_k", k.sigma_k},
          {"sigma_eps", k.sigma_eps},
          {"c_mu", k.c_mu},
          {"k_floor", k.k_floor},
          {"eps_floor", k.eps_floor},
          {"eps_sink", physics::to_string(k.eps_sink)}}},
        {"refs", {{"length", m.refs.length}, {"u_inlet", m.refs.u_inlet}, {"rho", m.refs.rho}, {"mu", m.refs.mu}}},
        {"seed", m.seed},
        {"clouds", clouds},
        {"lambda", m.lambda},
        {"epochs_completed", m.epochs_completed},
        {"diverged", m.diverged},
    };
}

inline Checkpoint from_body(const json& b) {
    Checkpoint c;
    const json& nets = b.at("nets");
    if (!nets.is_array() || nets.size() != 5) throw CorruptionError("checkpoint: expected 5 networks");
    std::array<net::DenseNet, 5> members;
    for (std::size_t i = 0; i < 5; ++i) {
        const json& n = nets[i];
        if (n.at("field").get<std::string>() != physics::kFieldNames[i])
            throw CorruptionError("checkpoint: networks are out of order");
        members[i] = net::DenseNet(n.at("layer_sizes").get<net::LayerSizes>(), n.at("params").get<std::vector<double>>());
    }
    net::InputNormalization norm;
    norm.center = b.at("normalization").at("center").get<std::array<double, 3>>();
    norm.scale = b.at("normalization").at("scale").get<std::array<double, 3>>();
    c.ensemble = net::NetworkEnsemble(std::move(members), norm);

    const json& k = b.at("constants");
    auto& mc = c.meta.constants;
    mc.c1 = k.at("c1").get<double>();
    mc.c2 = k.at("c2").get<double>();
    mc.sigma_k = k.at("sigma_k").get<double>();
    mc.sigma_eps = k.at("sigma_eps").get<double>();
    mc.c_mu = k.at("c_mu").get<double>();
    mc.k_floor = k.at("k_floor").get<double>();
    mc.eps_floor = k.at("eps_floor").get<double>();
    mc.eps_sink = physics::eps_sink_from_string(k.at("eps_sink").get<std::string>());

    const json& r = b.at("refs");
    c.meta.refs = {r.at("length").get<double>(), r.at("u_inlet").get<double>(), r.at("rho").get<double>(),
                   r.at("mu").get<double>()};
    c.meta.seed = b.at("seed").get<std::uint64_t>();
    for (const json& cj : b.at("clouds")) {
        CloudProvenance p;
        p.path = cj.at("path").get<std::string>();
        p.re = cj.at("re").get<double>();
        p.sample_seed = cj.at("sample_seed").get<std::uint64_t>();
        for (const auto& [z, cap] : cj.at("caps").items()) p.caps[std::stoi(z)] = cap.get<std::size_t>();
        c.meta.clouds.push_back(std::move(p));
    }
    c.meta.lambda = b.at("lambda").get<std::array<double, 4>>();
    c.meta.epochs_completed = b.at("epochs_completed").get<std::size_t>();
    c.meta.diverged = b.at("diverged").get<bool>();
    return c;
}

}  // namespace detail

inline std::string serialize_checkpoint(const net::NetworkEnsemble& ens, const CheckpointMeta& meta) {
    const detail::json body = detail::body_json(ens, meta);
    const detail::json doc = {{"format", kCheckpointFormat},
                              {"version", kCheckpointVersion},
                              {"checksum", detail::hex64(fnv1a64(body.dump()))},
                              {"body", body}};
    return doc.dump(1) + "\n";
}

inline Checkpoint deserialize_checkpoint(const std::string& text, const std::string& source = "<checkpoint>") {
    detail::json doc;
    try {
        doc = detail::json::parse(text);
    } catch (const detail::json::exception& e) {
        throw CorruptionError(source + ": checkpoint is truncated or not valid JSON (" + e.what() + ")");
    }
    try {
        if (!doc.is_object() || doc.value("format", std::string()) != kCheckpointFormat)
            throw CorruptionError(source + ": not a checkpoint file");
        const int version = doc.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw CorruptionError(source + ": unsupported checkpoint version " + std::to_string(version) +
                                  " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
        const detail::json& body = doc.at("body");
        if (doc.at("checksum").get<std::string>() != detail::hex64(fnv1a64(body.dump())))
            throw CorruptionError(source + ": checksum mismatch, checkpoint is damaged");
        return detail::from_body(body);
    } catch (const detail::json::exception& e) {
        throw CorruptionError(source + ": malformed checkpoint (" + e.what() + ")");
    }
}

inline void save_checkpoint(const net::NetworkEnsemble& ens, const CheckpointMeta& meta, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << serialize_checkpoint(ens, meta);
    if (!out) throw Error("failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str(), path);
}

}  // namespace ranspinn::workbench
