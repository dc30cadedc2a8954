#include "bsvie/generator.hpp"

#include "bsvie/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bsvie {

double GeneratorSpec::K() const {
    return std::sqrt(std::max({std::sqrt(lip.varpi), lip.theta_z, lip.theta_u}));
}

double GeneratorSpec::zero_point(const World& w, std::size_t t, std::size_t s, std::size_t atom) const {
    const std::vector<double> zeros(w.marks(), 0.0);
    DriverPoint p;
    p.t = t;
    p.s = s;
    p.atom = atom;
    p.u = zeros;
    p.u_rev = zeros;
    return (*this)(w, p);
}

GeneratorSpec zero_generator() {
    GeneratorSpec g;
    g.name = "zero";
    g.eval = [](const World&, const DriverPoint&) { return 0.0; };
    return g;
}

LipschitzCheck spot_check_lipschitz(const GeneratorSpec& f, const World& w, std::size_t samples, std::uint64_t seed) {
    LipschitzCheck out;
    const Philox4x32 gen(seed);
    const std::size_t m = w.marks();
    const std::size_t n = w.steps();
    std::vector<double> u1(m), u2(m), r1(m), r2(m);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto a = gen.uniforms(k, 0, 0);
        const auto b = gen.uniforms(k, 0, 1);
        DriverPoint p, q;
        p.t = q.t = static_cast<std::size_t>(a[0] * static_cast<double>(n));
        p.s = q.s = p.t + static_cast<std::size_t>(a[1] * static_cast<double>(n - p.t));
        p.atom = q.atom = static_cast<std::size_t>(a[2] * static_cast<double>(w.atoms(p.s)));
        p.y = 6.0 * (b[0] - 0.5);
        q.y = 6.0 * (b[1] - 0.5);
        p.z = 6.0 * (b[2] - 0.5);
        q.z = 6.0 * (b[3] - 0.5);
        p.z_rev = q.z_rev = 6.0 * (a[3] - 0.5);
        double du2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto d = gen.uniforms(k, 1 + static_cast<std::uint32_t>(j), 0);
            u1[j] = 6.0 * (d[0] - 0.5);
            u2[j] = 6.0 * (d[1] - 0.5);
            r1[j] = r2[j] = 6.0 * (d[2] - 0.5);
            du2 += (u1[j] - u2[j]) * (u1[j] - u2[j]) * w.jumps().intensities[j];
        }
        p.u = u1;
        q.u = u2;
        p.u_rev = r1;
        q.u_rev = r2;
        const double df = f(w, p) - f(w, q);
        const double bound = f.lip.varpi * (p.y - q.y) * (p.y - q.y) + f.lip.theta_z * (p.z - q.z) * (p.z - q.z) + f.lip.theta_u * du2;
        const double ratio = bound > 0.0 ? df * df / bound : (df == 0.0 ? 0.0 : INFINITY);
        out.worst_ratio = std::max(out.worst_ratio, ratio);
        if (df * df > bound * (1.0 + 1e-9) + 1e-300) {
            ++out.violations;
        }
        ++out.samples;
    }
    return out;
}

}  // namespace bsvie
