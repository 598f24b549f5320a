#pragma once

// Zoned point clouds and their CSV form.
//
//   x,y,zone,tag,Re[,u,v,p,k,eps]
//
// The header row is mandatory. Truth columns are all present or all absent.
// `tag` is one of interior, inlet, outlet, wall, freestream. One file holds a
// single Reynolds number.

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/physics/scales.hpp"

namespace ranspinn::sampler {

enum class BoundaryTag { Interior, Inlet, Outlet, Wall, Freestream };

inline constexpr std::array<const char*, 5> kTagNames = {"interior", "inlet", "outlet", "wall", "freestream"};

inline const char* to_string(BoundaryTag t) { return kTagNames[static_cast<int>(t)]; }

inline bool parse_tag(std::string_view s, BoundaryTag& out) {
    for (std::size_t i = 0; i < kTagNames.size(); ++i) {
        if (s == kTagNames[i]) {
            out = static_cast<BoundaryTag>(i);
            return true;
        }
    }
    return false;
}

struct CloudPoint {
    double x = 0.0;
    double y = 0.0;
    int zone = 0;
    BoundaryTag tag = BoundaryTag::Interior;

    bool operator==(const CloudPoint&) const = default;
};

/// Ground-truth fields at a point, in u, v, p, k, eps order.
using FieldValues = std::array<double, 5>;

struct ZonedPointCloud {
    std::vector<CloudPoint> points;
    std::vector<FieldValues> truth;  // empty, or one entry per point
    double re = 1.0;

    std::size_t size() const noexcept { return points.size(); }
    bool has_truth() const noexcept { return !truth.empty(); }

    int zone_count() const {
        int z = 0;
        for (const auto& p : points) z = std::max(z, p.zone + 1);
        return z;
    }

    /// Checks the contiguity, truth, and Reynolds-number invariants.
    void validate() const {
        if (!(re > 0.0) || !std::isfinite(re)) throw ValidationError("point cloud: Reynolds number must be positive");
        if (!truth.empty() && truth.size() != points.size())
            throw ValidationError("point cloud: ground truth must be present for every point");
        const int z = zone_count();
        std::vector<bool> seen(static_cast<std::size_t>(z), false);
        for (const auto& p : points) {
            if (p.zone < 0) throw ValidationError("point cloud: negative zone id");
            seen[p.zone] = true;
        }
        for (int i = 0; i < z; ++i)
            if (!seen[i])
                throw ValidationError("point cloud: zone ids are not contiguous (zone " + std::to_string(i) +
                                      " is missing)");
    }

    /// Truth of point i in normalized units.
    physics::FlowSample sample(std::size_t i) const {
        const auto& t = truth.at(i);
        return {points[i].x, points[i].y, t[0], t[1], t[2], t[3], t[4]};
    }
};

namespace detail {
inline constexpr std::array<const char*, 5> kBaseColumns = {"x", "y", "zone", "tag", "Re"};
inline constexpr std::array<const char*, 5> kTruthColumns = {"u", "v", "p", "k", "eps"};
}  // namespace detail

inline ZonedPointCloud parse_point_cloud(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    long row = 0;
    if (!std::getline(in, line)) throw SchemaError(source + ": empty file, header row is mandatory", 1);
    ++row;
    const auto header = csv::split(line);

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(header[i]);
        const bool known = std::find(detail::kBaseColumns.begin(), detail::kBaseColumns.end(), name) !=
                               detail::kBaseColumns.end() ||
                           std::find(detail::kTruthColumns.begin(), detail::kTruthColumns.end(), name) !=
                               detail::kTruthColumns.end();
        if (!known) throw SchemaError(source + ": unknown column '" + name + "'", row);
        if (!column.emplace(name, i).second) throw SchemaError(source + ": duplicate column '" + name + "'", row);
    }
    for (const char* c : detail::kBaseColumns)
        if (!column.count(c)) throw SchemaError(source + ": missing required column '" + std::string(c) + "'", row);
    std::size_t n_truth = 0;
    for (const char* c : detail::kTruthColumns) n_truth += column.count(c);
    if (n_truth != 0 && n_truth != detail::kTruthColumns.size()) {
        std::string missing;
        for (const char* c : detail::kTruthColumns)
            if (!column.count(c)) missing += std::string(missing.empty() ? "" : ",") + c;
        throw SchemaError(source + ": truth columns must be all of u,v,p,k,eps; missing " + missing, row);
    }
    const bool with_truth = n_truth != 0;

    ZonedPointCloud cloud;
    bool have_re = false;
    auto number = [&](const std::vector<std::string_view>& f, const char* name) {
        double v = 0.0;
        if (!csv::parse_double(f[column.at(name)], v) || !std::isfinite(v))
            throw SchemaError(source + ": column '" + name + "' is not a finite number", row);
        return v;
    };
    while (std::getline(in, line)) {
        ++row;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != header.size())
            throw SchemaError(source + ": expected " + std::to_string(header.size()) + " fields, found " +
                                  std::to_string(f.size()),
                              row);
        CloudPoint p;
        p.x = number(f, "x");
        p.y = number(f, "y");
        long zone = 0;
        if (!csv::parse_int(f[column.at("zone")], zone) || zone < 0 || zone > 1'000'000)
            throw SchemaError(source + ": zone must be a nonnegative integer", row);
        p.zone = static_cast<int>(zone);
        if (!parse_tag(f[column.at("tag")], p.tag))
            throw SchemaError(source + ": unknown tag '" + std::string(f[column.at("tag")]) + "'", row);
        const double re = number(f, "Re");
        if (!(re > 0.0)) throw SchemaError(source + ": Re must be positive", row);
        if (!have_re) {
            cloud.re = re;
            have_re = true;
        } else if (re != cloud.re) {
            throw SchemaError(source + ": all rows must share one Reynolds number", row);
        }
        cloud.points.push_back(p);
        if (with_truth) {
            FieldValues t{};
            for (std::size_t c = 0; c < t.size(); ++c) t[c] = number(f, detail::kTruthColumns[c]);
            cloud.truth.push_back(t);
        }
    }
    if (cloud.points.empty()) throw SchemaError(source + ": no data rows", row);
    cloud.validate();
    return cloud;
}

inline ZonedPointCloud load_point_cloud(const std::string& path) {
    auto in = csv::open_input(path);
    return parse_point_cloud(in, path);
}

inline void write_point_cloud(std::ostream& out, const ZonedPointCloud& cloud) {
    out << "x,y,zone,tag,Re";
    if (cloud.has_truth()) out << ",u,v,p,k,eps";
    out << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        out << csv::format_double(p.x) << ',' << csv::format_double(p.y) << ',' << p.zone << ',' << to_string(p.tag)
            << ',' << csv::format_double(cloud.re);
        if (cloud.has_truth())
            for (double v : cloud.truth[i]) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

inline void save_point_cloud(const std::string& path, const ZonedPointCloud& cloud) {
    auto out = csv::open_output(path);
    write_point_cloud(out, cloud);
    if (!out) throw Error("failed writing '" + path + "'");
}

/// Converts a cloud holding dimensional coordinates and truth into normalized units.
inline ZonedPointCloud nondimensionalize(const ZonedPointCloud& cloud, const physics::RefScales& refs) {
    refs.validate();
    ZonedPointCloud out = cloud;
    for (std::size_t i = 0; i < out.size(); ++i) {
        physics::FlowSample s{cloud.points[i].x, cloud.points[i].y, 0, 0, 0, 0, 0};
        if (cloud.has_truth()) s = cloud.sample(i);
        const auto n = physics::nondimensionalize(s, refs);
        out.points[i].x = n.x;
        out.points[i].y = n.y;
        if (cloud.has_truth()) out.truth[i] = {n.u, n.v, n.p, n.k, n.eps};
    }
    return out;
}

}  // namespace ranspinn::sampler
