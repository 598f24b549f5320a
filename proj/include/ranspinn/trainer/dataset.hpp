#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "ranspinn/common/error.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/sampler/point_cloud.hpp"
#include "ranspinn/sampler/zone_sampler.hpp"

namespace ranspinn::trainer {

/// A data + collocation point in normalized units.
struct InteriorPoint {
    double x = 0.0;
    double y = 0.0;
    double re = 1.0;
    sampler::FieldValues truth{};
    physics::SourceTerms src;
};

/// A boundary point with its Dirichlet targets.
struct BoundaryPoint {
    double x = 0.0;
    double y = 0.0;
    double re = 1.0;
    std::optional<double> u;
    std::optional<double> v;
    std::optional<double> p;

    std::size_t target_count() const { return u.has_value() + v.has_value() + p.has_value(); }
};

struct TrainingData {
    std::vector<InteriorPoint> interior;
    std::vector<BoundaryPoint> boundary;
    std::vector<double> reynolds;  // one per contributing cloud, in input order

    std::size_t boundary_target_count() const {
        std::size_t n = 0;
        for (const auto& b : boundary) n += b.target_count();
        return n;
    }

    /// Normalization from the bounding box of all points and the Re range.
    net::InputNormalization normalization() const {
        double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity()};
        double hi[3] = {-lo[0], -lo[1], -lo[2]};
        auto grow = [&](double x, double y, double re) {
            const double v[3] = {x, y, re};
            for (int i = 0; i < 3; ++i) {
                lo[i] = std::min(lo[i], v[i]);
                hi[i] = std::max(hi[i], v[i]);
            }
        };
        for (const auto& p : interior) grow(p.x, p.y, p.re);
        for (const auto& p : boundary) grow(p.x, p.y, p.re);
        if (interior.empty() && boundary.empty()) return {};
        return net::InputNormalization::from_bounds(lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]);
    }
};

/// Adds the sampled points of one normalized cloud. `sources` may be empty (no MMS sources).
inline void append_cloud(TrainingData& data, const sampler::ZonedPointCloud& cloud, const sampler::TrainingSet& set,
                         const std::vector<physics::SourceTerms>& sources) {
    if (!cloud.has_truth()) throw ValidationError("training clouds need ground-truth columns");
    if (!sources.empty() && sources.size() != cloud.size())
        throw ValidationError("source terms are not aligned with the point cloud");
    for (std::size_t idx : set.interior) {
        InteriorPoint p;
        p.x = cloud.points[idx].x;
        p.y = cloud.points[idx].y;
        p.re = cloud.re;
        p.truth = cloud.truth[idx];
        if (p.truth[4] < 0.0) throw ValidationError("ground-truth eps must be nonnegative");
        if (!sources.empty()) p.src = sources[idx];
        data.interior.push_back(p);
    }
    set.boundary.for_each([&](const sampler::BoundaryTarget& t) {
        data.boundary.push_back(
            {cloud.points[t.index].x, cloud.points[t.index].y, cloud.re, t.u, t.v, t.p});
    });
    data.reynolds.push_back(cloud.re);
}

}  // namespace ranspinn::trainer
