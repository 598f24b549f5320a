#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ranspinn/common/error.hpp"
#include "ranspinn/common/rng.hpp"
#include "ranspinn/sampler/point_cloud.hpp"

namespace ranspinn::sampler {

/// Per-zone sample caps, zone id -> maximum number of points. Zones absent from the map get 0.
using ZoneCaps = std::map<int, std::size_t>;

/// Dirichlet targets for one boundary point, in normalized units.
struct BoundaryTarget {
    std::size_t index = 0;
    std::optional<double> u;
    std::optional<double> v;
    std::optional<double> p;

    bool operator==(const BoundaryTarget&) const = default;
};

struct BoundarySets {
    std::vector<BoundaryTarget> inlet;
    std::vector<BoundaryTarget> outlet;
    std::vector<BoundaryTarget> wall;
    std::vector<BoundaryTarget> freestream;
    std::vector<std::string> warnings;

    std::size_t size() const { return inlet.size() + outlet.size() + wall.size() + freestream.size(); }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const auto* set : {&inlet, &outlet, &wall, &freestream})
            for (const auto& t : *set) fn(t);
    }

    bool operator==(const BoundarySets& o) const {
        return inlet == o.inlet && outlet == o.outlet && wall == o.wall && freestream == o.freestream;
    }
};

/// Sampled interior points plus boundary targets of one cloud.
struct TrainingSet {
    /// Indices into the cloud, grouped by zone in ascending zone order, ascending within a zone.
    std::vector<std::size_t> interior;
    BoundarySets boundary;
    std::uint64_t seed = 0;
    ZoneCaps caps;

    bool operator==(const TrainingSet& o) const {
        return interior == o.interior && boundary == o.boundary && seed == o.seed && caps == o.caps;
    }
};

/// Inlet and freestream points target (inlet_velocity, 0); walls (0, 0); outlets p = 0.
/// Interior points belong to no set.
inline BoundarySets split_boundary_sets(const ZonedPointCloud& cloud, double inlet_velocity = 1.0,
                                        bool inlet_loss_configured = true) {
    BoundarySets sets;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        switch (cloud.points[i].tag) {
            case BoundaryTag::Inlet: sets.inlet.push_back({i, inlet_velocity, 0.0, std::nullopt}); break;
            case BoundaryTag::Freestream: sets.freestream.push_back({i, inlet_velocity, 0.0, std::nullopt}); break;
            case BoundaryTag::Wall: sets.wall.push_back({i, 0.0, 0.0, std::nullopt}); break;
            case BoundaryTag::Outlet: sets.outlet.push_back({i, std::nullopt, std::nullopt, 0.0}); break;
            case BoundaryTag::Interior: break;
        }
    }
    if (inlet_loss_configured && sets.inlet.empty())
        sets.warnings.push_back("point cloud has no inlet points; inlet boundary loss is empty");
    return sets;
}

/// Interior point indices per zone, ascending.
inline std::vector<std::vector<std::size_t>> interior_by_zone(const ZonedPointCloud& cloud) {
    std::vector<std::vector<std::size_t>> zones(static_cast<std::size_t>(cloud.zone_count()));
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (cloud.points[i].tag == BoundaryTag::Interior) zones[cloud.points[i].zone].push_back(i);
    return zones;
}

/// Equal split of `budget` across zones; the remainder goes to the zone with the most
/// interior points (lowest id on ties).
inline ZoneCaps equal_split_caps(const ZonedPointCloud& cloud, std::size_t budget) {
    const auto zones = interior_by_zone(cloud);
    ZoneCaps caps;
    if (zones.empty()) return caps;
    const std::size_t share = budget / zones.size();
    std::size_t largest = 0;
    for (std::size_t z = 0; z < zones.size(); ++z) {
        caps[static_cast<int>(z)] = share;
        if (zones[z].size() > zones[largest].size()) largest = z;
    }
    caps[static_cast<int>(largest)] += budget % zones.size();
    return caps;
}

/// Draws min(cap, zone size) interior points from every zone uniformly without
/// replacement. Each zone uses its own random stream derived from (seed, zone).
inline TrainingSet zone_sample(const ZonedPointCloud& cloud, const ZoneCaps& caps, std::uint64_t seed,
                               double inlet_velocity = 1.0) {
    cloud.validate();
    TrainingSet set;
    set.seed = seed;
    set.caps = caps;
    const auto zones = interior_by_zone(cloud);
    for (std::size_t z = 0; z < zones.size(); ++z) {
        const auto it = caps.find(static_cast<int>(z));
        const std::size_t cap = it == caps.end() ? 0 : it->second;
        std::vector<std::size_t> pool = zones[z];
        const std::size_t n = std::min(cap, pool.size());
        Rng rng(mix_seed(seed, z));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(n);
        std::sort(pool.begin(), pool.end());
        set.interior.insert(set.interior.end(), pool.begin(), pool.end());
    }
    set.boundary = split_boundary_sets(cloud, inlet_velocity);
    return set;
}

}  // namespace ranspinn::sampler
