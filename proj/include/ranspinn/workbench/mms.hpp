#pragma once

// Manufactured solutions on a rectangle [x_min, x_max] x [y_min, y_max].
//
// With xi = (x - x_min)/Lx and eta = (y - y_min)/Ly,
//
//   psi = u0 (y - y_min) + a(Re) sin^2(m pi xi) sin^2(n pi eta),  a(Re) = a (Re/re_ref)^gamma
//   u   =  d psi/dy,  v = -d psi/dx
//   p   = s(Re) (1 - xi) (p0 + p1 sin(pi xi) cos(pi eta)),        s(Re) = (Re/re_ref)^gamma
//   k   = k0 + k1 cos(pi xi) cos(pi eta)
//   eps = e0 + e1 cos(pi xi) sin(pi eta)
//
// The velocity equals (u0, 0) on the whole boundary and p vanishes on the
// right edge, so the fields meet the inlet, freestream and outlet targets when
// u0 = 1. Left edge points are tagged inlet, right edge outlet, top and bottom
// freestream. Sources are the residuals of the fields with zero sources.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/physics/scales.hpp"
#include "ranspinn/sampler/point_cloud.hpp"

namespace ranspinn::workbench {

struct MmsSpec {
    double a = 0.08;
    int m = 1;
    int n = 1;
    double u0 = 1.0;
    double re_ref = 1500.0;
    double re_exponent = 0.5;
    double p0 = 0.2;
    double p1 = 0.05;
    double k0 = 0.02;
    double k1 = 0.008;
    double e0 = 0.01;
    double e1 = 0.004;
    double x_min = 0.0;
    double x_max = 2.0;
    double y_min = 0.0;
    double y_max = 1.0;
    std::vector<double> re_list = {1000, 1200, 1400, 1600, 1800, 2000, 1500, 2200};
    std::size_t points_x = 24;
    std::size_t points_y = 24;
    int zones_x = 2;
    int zones_y = 2;
    physics::ModelConstants constants;

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        for (double v : {a, u0, re_ref, re_exponent, p0, p1, k0, k1, e0, e1, x_min, x_max, y_min, y_max})
            if (!finite(v)) throw ValidationError("mms spec: coefficients must be finite");
        if (m < 1 || n < 1) throw ValidationError("mms spec: wavenumbers m and n must be positive integers");
        if (!(x_max > x_min) || !(y_max > y_min)) throw ValidationError("mms spec: empty domain rectangle");
        if (!(re_ref > 0.0)) throw ValidationError("mms spec: re_ref must be positive");
        if (re_list.empty()) throw ValidationError("mms spec: re_list is empty");
        for (double re : re_list)
            if (!(re > 0.0) || !finite(re)) throw ValidationError("mms spec: Reynolds numbers must be positive");
        if (points_x < 2 || points_y < 2) throw ValidationError("mms spec: need at least 2 points per axis");
        if (zones_x < 1 || zones_y < 1) throw ValidationError("mms spec: zone counts must be positive");
        if (static_cast<std::size_t>(zones_x) > points_x || static_cast<std::size_t>(zones_y) > points_y)
            throw ValidationError("mms spec: more zones than points along an axis");
        if (!(k0 - std::abs(k1) > 0.0))
            throw ValidationError("mms spec: k = k0 + k1 cos cos is not strictly positive (need k0 > |k1|)");
        if (!(e0 - std::abs(e1) > 0.0))
            throw ValidationError("mms spec: eps = e0 + e1 cos sin is not strictly positive (need e0 > |e1|)");
        constants.validate();
    }

    double amplitude(double re) const { return a * std::pow(re / re_ref, re_exponent); }
    double pressure_scale(double re) const { return std::pow(re / re_ref, re_exponent); }
};

/// Normalized fields and their spatial jets at one point.
inline physics::FlowState<double> mms_state(const MmsSpec& s, double x, double y, double re) {
    using J = ad::Jet2<double>;
    constexpr double pi = std::numbers::pi;
    const double lx = s.x_max - s.x_min;
    const double ly = s.y_max - s.y_min;
    const J xi = (J::seed_x(x) - s.x_min) * (1.0 / lx);
    const J eta = (J::seed_y(y) - s.y_min) * (1.0 / ly);
    const double amp = s.amplitude(re);
    const double mk = s.m * pi;
    const double nk = s.n * pi;

    const J sx = ad::sin(xi * mk);
    const J sy = ad::sin(eta * nk);

    physics::FlowState<double> st;
    st.u = J(s.u0) + sx * sx * ad::sin(eta * (2.0 * nk)) * (amp * nk / ly);
    st.v = ad::sin(xi * (2.0 * mk)) * sy * sy * (-amp * mk / lx);
    st.p = (J(1.0) - xi) * (J(s.p0) + ad::sin(xi * pi) * ad::cos(eta * pi) * s.p1) * s.pressure_scale(re);
    st.k = J(s.k0) + ad::cos(xi * pi) * ad::cos(eta * pi) * s.k1;
    st.eps = J(s.e0) + ad::cos(xi * pi) * ad::sin(eta * pi) * s.e1;
    st.x = x;
    st.y = y;
    st.re = re;
    return st;
}

/// Sources that close the residual operators on the manufactured fields.
inline physics::SourceTerms mms_sources(const MmsSpec& s, const physics::FlowState<double>& st) {
    const auto r = physics::residuals(st, s.constants);
    return {0.0, r.mom_x, r.mom_y, r.k, r.eps};
}

struct MmsDataset {
    sampler::ZonedPointCloud cloud;              // dimensional, reference scales all 1
    std::vector<physics::SourceTerms> sources;   // normalized units
};

/// Unit reference scales used by the generator: L = 1, u_inlet = 1, rho = 1.
inline physics::RefScales mms_reference_scales(double re) { return {1.0, 1.0, 1.0, 1.0 / re}; }

inline sampler::BoundaryTag mms_tag(std::size_t i, std::size_t j, std::size_t nx, std::size_t ny) {
    if (i == 0) return sampler::BoundaryTag::Inlet;
    if (i + 1 == nx) return sampler::BoundaryTag::Outlet;
    if (j == 0 || j + 1 == ny) return sampler::BoundaryTag::Freestream;
    return sampler::BoundaryTag::Interior;
}

/// One dataset for a single Reynolds number. Rows run x-fastest over a regular grid.
inline MmsDataset mms_generate_one(const MmsSpec& s, double re) {
    s.validate();
    const physics::RefScales refs = mms_reference_scales(re);
    MmsDataset d;
    d.cloud.re = re;
    const std::size_t nx = s.points_x;
    const std::size_t ny = s.points_y;
    d.cloud.points.reserve(nx * ny);
    d.cloud.truth.reserve(nx * ny);
    d.sources.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double fx = static_cast<double>(i) / static_cast<double>(nx - 1);
            const double fy = static_cast<double>(j) / static_cast<double>(ny - 1);
            const double x = i + 1 == nx ? s.x_max : s.x_min + fx * (s.x_max - s.x_min);
            const double y = j + 1 == ny ? s.y_max : s.y_min + fy * (s.y_max - s.y_min);
            const auto st = mms_state(s, x, y, re);
            if (!(st.k.value > 0.0) || !(st.eps.value > 0.0))
                throw ValidationError("mms spec: generated k or eps is not positive");
            sampler::CloudPoint p;
            p.x = x;
            p.y = y;
            const int zx = std::min(s.zones_x - 1, static_cast<int>(fx * s.zones_x));
            const int zy = std::min(s.zones_y - 1, static_cast<int>(fy * s.zones_y));
            p.zone = zx + s.zones_x * zy;
            p.tag = mms_tag(i, j, nx, ny);
            d.cloud.points.push_back(p);
            const physics::FlowSample dim =
                physics::dimensionalize({x, y, st.u.value, st.v.value, st.p.value, st.k.value, st.eps.value}, refs);
            d.cloud.truth.push_back({dim.u, dim.v, dim.p, dim.k, dim.eps});
            d.sources.push_back(mms_sources(s, st));
        }
    }
    d.cloud.validate();
    return d;
}

inline std::vector<MmsDataset> mms_generate(const MmsSpec& s) {
    s.validate();
    std::vector<MmsDataset> out;
    out.reserve(s.re_list.size());
    for (double re : s.re_list) out.push_back(mms_generate_one(s, re));
    return out;
}

/// File stem for the dataset of one Reynolds number, e.g. "mms_re1500".
inline std::string mms_file_stem(double re) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "mms_re%.10g", re);
    return buf;
}

}  // namespace ranspinn::workbench
