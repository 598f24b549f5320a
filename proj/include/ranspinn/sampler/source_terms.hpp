#pragma once

// Per-point manufactured sources, aligned by row with a point-cloud file:
//
//   x,y,s_momx,s_momy,s_k,s_eps
//
// Continuity sources are identically zero for streamfunction-derived fields and
// are not stored.

#include <istream>
#include <string>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/sampler/point_cloud.hpp"

namespace ranspinn::sampler {

inline constexpr const char* kSourceHeader = "x,y,s_momx,s_momy,s_k,s_eps";

inline std::vector<physics::SourceTerms> parse_source_terms(std::istream& in, const ZonedPointCloud& cloud,
                                                            const std::string& source = "<stream>") {
    std::string line;
    long row = 1;
    if (!std::getline(in, line)) throw SchemaError(source + ": empty source file", row);
    const auto header = csv::split(line);
    const auto expected = csv::split(kSourceHeader);
    if (header != expected) throw SchemaError(source + ": header must be '" + std::string(kSourceHeader) + "'", row);
    std::vector<physics::SourceTerms> out;
    out.reserve(cloud.size());
    while (std::getline(in, line)) {
        ++row;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 6) throw SchemaError(source + ": expected 6 fields", row);
        double v[6];
        for (int i = 0; i < 6; ++i)
            if (!csv::parse_double(f[i], v[i]) || !std::isfinite(v[i]))
                throw SchemaError(source + ": field " + std::to_string(i + 1) + " is not a finite number", row);
        const std::size_t i = out.size();
        if (i >= cloud.size()) throw SchemaError(source + ": more rows than the point cloud", row);
        if (v[0] != cloud.points[i].x || v[1] != cloud.points[i].y)
            throw SchemaError(source + ": coordinates do not match point-cloud row " + std::to_string(i + 2), row);
        out.push_back({0.0, v[2], v[3], v[4], v[5]});
    }
    if (out.size() != cloud.size())
        throw SchemaError(source + ": " + std::to_string(out.size()) + " rows, point cloud has " +
                          std::to_string(cloud.size()));
    return out;
}

inline std::vector<physics::SourceTerms> load_source_terms(const std::string& path, const ZonedPointCloud& cloud) {
    auto in = csv::open_input(path);
    return parse_source_terms(in, cloud, path);
}

inline void write_source_terms(std::ostream& out, const ZonedPointCloud& cloud,
                               const std::vector<physics::SourceTerms>& src) {
    out << kSourceHeader << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& s = src[i];
        out << csv::format_double(cloud.points[i].x) << ',' << csv::format_double(cloud.points[i].y) << ','
            << csv::format_double(s.mom_x) << ',' << csv::format_double(s.mom_y) << ',' << csv::format_double(s.k)
            << ',' << csv::format_double(s.eps) << '\n';
    }
}

}  // namespace ranspinn::sampler
