#include "gldeg/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gldeg/errors.hpp"
#include "gldeg/mesh.hpp"
#include "gldeg/vec2.hpp"

namespace gldeg {

namespace {
constexpr double kPi = std::numbers::pi;
}

EnergyReport energy_GL_serial(const ComplexField& u, double eps) {
    if (eps <= 0) throw ParameterError("eps must be positive");
    const Mesh& mesh = *u.mesh;
    EnergyReport rep;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        auto [d1u, d2u] = u.gradient(t);
        rep.dirichlet += 0.5 * mesh.tri_area[t] * (std::norm(d1u) + std::norm(d2u));
        const auto& tr = mesh.triangles[t];
        double p = 0.0;
        for (int e = 0; e < 3; ++e) {
            cplx m = 0.5 * (u.values[tr[e]] + u.values[tr[(e + 1) % 3]]);
            double s = 1.0 - std::norm(m);
            p += s * s;
        }
        rep.potential += mesh.tri_area[t] * p / (3.0 * 4.0 * eps * eps);
    }
    rep.total = rep.dirichlet + rep.potential;
    return rep;
}

std::vector<double> abdeg_serial(const ComplexField& u, const std::vector<ScalarField>& V) {
    const Mesh& mesh = *u.mesh;
    for (const auto& Vi : V)
        if (Vi.mesh != u.mesh) throw std::runtime_error("abdeg: fields on different meshes");
    std::vector<double> out;
    for (const ScalarField& Vi : V) {
        double s = 0.0;
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            auto [d1u, d2u] = u.gradient(t);
            Vec2 gv = Vi.gradient(t);
            cplx uc = u.at_centroid(t);
            s += mesh.tri_area[t] * cross2(uc, gv.x * d2u - gv.y * d1u);
        }
        out.push_back(s / (2 * kPi));
    }
    return out;
}

double l2_distance_serial(const ComplexField& u, const ComplexField& v) {
    const Mesh& mesh = *u.mesh;
    double acc = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx a = u.values[tr[i]] - v.values[tr[i]];
            cplx b = u.values[tr[(i + 1) % 3]] - v.values[tr[(i + 1) % 3]];
            s += std::norm(0.5 * (a + b));
        }
        acc += mesh.tri_area[t] * s / 3.0;
    }
    return std::sqrt(acc);
}

} // namespace gldeg
