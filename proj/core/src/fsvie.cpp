#include "bsvie/analysis.hpp"

#include "bsvie/errors.hpp"

#include <cmath>

namespace bsvie {

std::vector<Values> solve_fsvie(const std::vector<Values>& psi, const FSVIECoefficients& coeff, const World& w) {
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    if (psi.size() != n + 1) {
        throw DomainError("solve_fsvie: Psi needs one variable per grid time");
    }
    const auto& t = w.clock().times;
    std::vector<Values> x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        if (psi[i].size() != w.atoms(i)) {
            throw DomainError("solve_fsvie: Psi must be adapted (one value per atom of its level)");
        }
        x[i] = psi[i];
        for (std::size_t j = 0; j < i; ++j) {
            const double a0 = coeff.a0 ? coeff.a0(t[i], t[j]) * w.clock().dB(j) : 0.0;
            const double a1 = coeff.a1 ? coeff.a1(t[i], t[j]) : 0.0;
            std::vector<double> aj(m, 0.0);
            for (std::size_t k = 0; k < m && coeff.jump; ++k) {
                aj[k] = coeff.jump(t[i], t[j], k);
            }
            for (std::size_t a = 0; a < x[i].size(); ++a) {
                const std::size_t pj = w.ancestor(i, a, j);
                const std::size_t pn = w.ancestor(i, a, j + 1);
                double kernel = a0 + a1 * w.dW(j + 1)[pn];
                for (std::size_t k = 0; k < m; ++k) {
                    kernel += aj[k] * w.dpi(j + 1, k)[pn];
                }
                x[i][a] += x[j][pj] * kernel;
            }
        }
    }
    return x;
}

GeneratorSpec adjoint_driver(const FSVIECoefficients& coeff, const World& w) {
    const std::size_t n = w.steps();
    double zscale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w.clock().dB(i) > 0.0)) {
            throw DomainError("adjoint_driver requires dB > 0 on every step");
        }
        zscale = std::max(zscale, w.dw_var(i) / w.clock().dB(i));
    }
    double lam = 0.0;
    for (double l : w.jumps().intensities) {
        lam += l;
    }
    GeneratorSpec f;
    f.name = "fsvie-adjoint";
    f.uses_y = true;
    f.two_sided = true;
    const double b2 = coeff.bound * coeff.bound;
    f.lip = {3.0 * b2, 3.0 * b2 * zscale * zscale, 3.0 * b2 * lam};
    f.eval = [coeff](const World& world, const DriverPoint& p) {
        if (p.s == p.t) {
            return 0.0;
        }
        const auto& t = world.clock().times;
        const double ts = t[p.s], tt = t[p.t];
        const double db = world.clock().dB(p.t);
        double v = 0.0;
        if (coeff.a0) {
            v += coeff.a0(ts, tt) * p.y;
        }
        if (coeff.a1) {
            v += coeff.a1(ts, tt) * p.z_rev * world.dw_var(p.t) / db;
        }
        if (coeff.jump) {
            for (std::size_t k = 0; k < p.u_rev.size(); ++k) {
                v += coeff.jump(ts, tt, k) * p.u_rev[k] * world.jump_var(p.t, k) / db;
            }
        }
        return v;
    };
    return f;
}

DualityReport duality_gap(const std::vector<Values>& psi, const FreeTerm& phi, const FSVIECoefficients& coeff,
                          const World& w, const Projector& proj, const Type2Options& opts) {
    DualityReport r;
    const std::size_t n = w.steps();
    const std::vector<Values> x = solve_fsvie(psi, coeff, w);
    r.adjoint = solve_type2(phi, adjoint_driver(coeff, w), w, proj, opts);
    const std::vector<Values>& y = r.adjoint.solution.Y;
    const std::size_t leaves = w.atoms(n);
    const Values& prob = w.prob(n);
    Values diff(leaves, 0.0);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        double back = 0.0, fwd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ai = w.ancestor(n, leaf, i);
            const double db = w.clock().dB(i);
            back += db * psi[i][ai] * y[i][ai];
            fwd += db * x[i][ai] * phi.phi[i][leaf];
        }
        r.backward_pairing += prob[leaf] * back;
        r.forward_pairing += prob[leaf] * fwd;
        diff[leaf] = back - fwd;
    }
    r.gap = std::abs(r.backward_pairing - r.forward_pairing);
    const double mean = r.backward_pairing - r.forward_pairing;
    double var = 0.0, p2 = 0.0;
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        var += prob[leaf] * (diff[leaf] - mean) * (diff[leaf] - mean);
        p2 += prob[leaf] * prob[leaf];
    }
    r.standard_error = w.is_tree() ? 0.0 : std::sqrt(var * p2);
    return r;
}

}  // namespace bsvie
