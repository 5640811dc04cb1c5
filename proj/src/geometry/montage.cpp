// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/geometry/montage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace eegpipe::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vec3 {
    double x, y, z;
};

// Inclination from the vertex and azimuth from the nasion direction
// (positive toward the right ear), both in degrees.
Vec3 from_angles(double incl_deg, double az_deg) {
    const double incl = incl_deg * kPi / 180.0;
    const double az = az_deg * kPi / 180.0;
    return {std::sin(incl) * std::sin(az), std::sin(incl) * std::cos(az), std::cos(incl)};
}

// Great-circle interpolation; endpoints must be unit vectors.
Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
    double dot = a.x * b.x + a.y * b.y + a.z * b.z;
    dot = std::clamp(dot, -1.0, 1.0);
    const double omega = std::acos(dot);
    if (omega < 1e-12) return a;
    const double sa = std::sin((1.0 - t) * omega) / std::sin(omega);
    const double sb = std::sin(t * omega) / std::sin(omega);
    return {sa * a.x + sb * b.x, sa * a.y + sb * b.y, sa * a.z + sb * b.z};
}

}  // namespace

const ElectrodePosition& MontageLayout::find(const std::string& name) const {
    for (const auto& p : positions)
        if (p.label.name == name) return p;
    throw UnknownLabel("electrode " + name + " not in montage");
}

void MontageLayout::validate() const {
    if (size() < 2) throw InvalidConfig("montage needs at least 2 electrodes");
    for (const auto& p : positions) {
        const double norm = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
        if (std::abs(norm - r) > 1e-4)
            throw OffSphere("electrode " + p.label.name + " at radius " + std::to_string(norm) +
                            ", montage radius " + std::to_string(r));
    }
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (positions[i].label.name == positions[j].label.name)
                throw DuplicateLabel("duplicate electrode " + positions[i].label.name);
}

double spherical_distance(const ElectrodePosition& a, const ElectrodePosition& b, double r) {
    if (!(r > 0.0)) throw InvalidConfig("sphere radius must be positive");
    for (const ElectrodePosition* p : {&a, &b}) {
        const double norm = std::sqrt(p->x * p->x + p->y * p->y + p->z * p->z);
        if (std::abs(norm - r) > 1e-4)
            throw OffSphere("point " + p->label.name + " at radius " + std::to_string(norm) +
                            " is not on the sphere of radius " + std::to_string(r));
    }
    double cosang = (a.x * b.x + a.y * b.y + a.z * b.z) / (r * r);
    cosang = std::clamp(cosang, -1.0, 1.0);
    return std::acos(cosang);
}

MontageLayout standard_62_layout() {
    // Ring electrodes sit 72 degrees from the vertex; crossing arcs are
    // interpolated between their ring endpoint and the midline electrode.
    MontageLayout layout;
    std::vector<std::pair<std::string, Vec3>> pts;

    auto ring = [](double az_deg) { return from_angles(72.0, az_deg); };
    auto midline_front = [](double incl_deg) { return from_angles(incl_deg, 0.0); };
    auto midline_back = [](double incl_deg) { return from_angles(incl_deg, 180.0); };

    // arc helper: left-hemisphere names from the ring endpoint inward,
    // midline electrode, then the mirrored right hemisphere.
    auto add_arc = [&pts](const std::vector<std::string>& left, const std::string& mid_name,
                          const std::vector<std::string>& right, const Vec3& ring_left,
                          const Vec3& mid) {
        const std::size_t steps = left.size();
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(steps);
            pts.emplace_back(left[i], slerp(ring_left, mid, t));
        }
        pts.emplace_back(mid_name, mid);
        // right[i] mirrors left[steps-1-i]
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = static_cast<double>(steps - 1 - i) / static_cast<double>(steps);
            Vec3 p = slerp(ring_left, mid, t);
            p.x = -p.x;
            pts.emplace_back(right[i], p);
        }
    };

    pts.emplace_back("FP1", ring(-18.0));
    pts.emplace_back("FPZ", ring(0.0));
    pts.emplace_back("FP2", ring(18.0));

    {
        Vec3 af3 = slerp(ring(-36.0), midline_front(54.0), 0.5);
        pts.emplace_back("AF3", af3);
        pts.emplace_back("AF4", Vec3{-af3.x, af3.y, af3.z});
    }

    add_arc({"F7", "F5", "F3", "F1"}, "FZ", {"F2", "F4", "F6", "F8"}, ring(-54.0),
            midline_front(36.0));
    add_arc({"FT7", "FC5", "FC3", "FC1"}, "FCZ", {"FC2", "FC4", "FC6", "FT8"}, ring(-72.0),
            midline_front(18.0));
    add_arc({"T7", "C5", "C3", "C1"}, "CZ", {"C2", "C4", "C6", "T8"}, ring(-90.0),
            from_angles(0.0, 0.0));
    add_arc({"TP7", "CP5", "CP3", "CP1"}, "CPZ", {"CP2", "CP4", "CP6", "TP8"}, ring(-108.0),
            midline_back(18.0));
    add_arc({"P7", "P5", "P3", "P1"}, "PZ", {"P2", "P4", "P6", "P8"}, ring(-126.0),
            midline_back(36.0));
    add_arc({"PO7", "PO5", "PO3"}, "POZ", {"PO4", "PO6", "PO8"}, ring(-144.0),
            midline_back(54.0));

    pts.emplace_back("CB1", from_angles(90.0, -153.0));
    pts.emplace_back("O1", ring(-162.0));
    pts.emplace_back("OZ", ring(180.0));
    pts.emplace_back("O2", ring(162.0));
    pts.emplace_back("CB2", from_angles(90.0, 153.0));

    int idx = 0;
    for (auto& [name, v] : pts)
        layout.positions.push_back({{name, idx++}, v.x, v.y, v.z});
    layout.r = 1.0;
    layout.validate();
    return layout;
}

MontageLayout load_layout(const std::filesystem::path& path, double r) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open layout " + path.string());
    MontageLayout layout;
    layout.r = r;
    std::string line;
    int idx = 0;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string name, xs, ys, zs;
        if (!std::getline(ss, name, ',') || !std::getline(ss, xs, ',') ||
            !std::getline(ss, ys, ',') || !std::getline(ss, zs))
            throw ParseError("layout line " + std::to_string(lineno) + ": expected label,x,y,z");
        try {
            layout.positions.push_back({{name, idx}, std::stod(xs), std::stod(ys), std::stod(zs)});
        } catch (const std::exception&) {
            throw ParseError("layout line " + std::to_string(lineno) + ": bad coordinate");
        }
        ++idx;
    }
    layout.validate();
    return layout;
}

void write_layout(const MontageLayout& layout, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out.precision(17);
    for (const auto& p : layout.positions)
        out << p.label.name << ',' << p.x << ',' << p.y << ',' << p.z << '\n';
}

}  // namespace eegpipe::geometry
