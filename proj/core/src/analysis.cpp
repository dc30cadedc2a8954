#include "bsvie/analysis.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsvie {

namespace {

/// Integrand energy of cell (i, j) along a path: Z^2 dB + |U|^2 (mu or pi) + m^2.
struct CellEnergy {
    double z = 0.0;
    double u_mu = 0.0;
    double u_pi = 0.0;
    double m = 0.0;
};

CellEnergy cell_energy(const World& w, const Cell& c, std::size_t j, std::size_t aj, std::size_t an) {
    CellEnergy e;
    const double db = w.clock().dB(j);
    e.z = c.z[aj] * c.z[aj] * db;
    for (std::size_t k = 0; k < w.marks(); ++k) {
        const double u2 = c.u[k][aj] * c.u[k][aj];
        e.u_mu += u2 * w.jumps().intensities[k] * db;
        e.u_pi += u2 * w.dN(j + 1, k)[an];
    }
    e.m = c.m[an] * c.m[an];
    return e;
}

double pw(double x, double p) { return p == 2.0 ? x * x : std::pow(std::abs(x), p); }
double half_pw(double x, double p) { return p == 2.0 ? x : std::pow(x, p / 2.0); }

/// Driver arguments of a solution at (i, j) on the path through `leaf`.
struct PointBuilder {
    const World& w;
    const BSVIESolution& sol;
    std::vector<double> u, urev;

    PointBuilder(const World& world, const BSVIESolution& s) : w(world), sol(s), u(world.marks()), urev(world.marks()) {}

    DriverPoint at(std::size_t i, std::size_t j, std::size_t leaf, bool two_sided) {
        const std::size_t n = w.steps();
        const std::size_t aj = w.ancestor(n, leaf, j);
        const Cell& c = sol.cells[i][j];
        DriverPoint p;
        p.t = i;
        p.s = j;
        p.atom = aj;
        p.y = sol.Y[j][aj];
        p.z = c.z[aj];
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = c.u[k][aj];
        }
        p.u = u;
        std::fill(urev.begin(), urev.end(), 0.0);
        if (two_sided) {
            const Cell& rc = sol.cells[j][i];
            const std::size_t ai = w.ancestor(n, leaf, i);
            if (!rc.empty()) {
                p.z_rev = rc.z[ai];
                for (std::size_t k = 0; k < urev.size(); ++k) {
                    urev[k] = rc.u[k][ai];
                }
            }
        }
        p.u_rev = urev;
        return p;
    }
};

}  // namespace

NormReport norm_Sp(const BSVIESolution& sol, const World& w, double p, std::optional<double> beta, std::size_t from,
                   std::optional<std::size_t> to) {
    if (!(p > 1.0)) {
        throw DomainError("norm_Sp requires p > 1");
    }
    const std::size_t n = w.steps();
    const std::size_t end = to.value_or(n);
    if (from > end || end > n) {
        throw DomainError("norm_Sp: invalid outer range");
    }
    const Clock& c = w.clock();
    NormReport r;
    r.p = p;
    r.beta = beta;
    const std::size_t leaves = w.atoms(n);
    const Values& prob = w.prob(n);
    const std::size_t lower = sol.lower_from.value_or(n + 1);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        const double pl = prob[leaf];
        for (std::size_t i = from; i < end; ++i) {
            const double wo = beta ? std::exp(*beta * c.A[i]) * c.dA(i) : c.dB(i);
            r.y_part += pl * wo * pw(sol.Y[i][w.ancestor(n, leaf, i)], p);
            CellEnergy up, lo;
            for (std::size_t j = 0; j < n; ++j) {
                const bool in_upper = j >= i;
                if (!in_upper && j < lower) {
                    continue;
                }
                const Cell& cell = sol.cells[i][j];
                if (cell.empty()) {
                    continue;
                }
                const double wi = beta ? std::exp(*beta * c.A[j]) : 1.0;
                const CellEnergy e = cell_energy(w, cell, j, w.ancestor(n, leaf, j), w.ancestor(n, leaf, j + 1));
                CellEnergy& acc = in_upper ? up : lo;
                acc.z += wi * e.z;
                acc.u_mu += wi * e.u_mu;
                acc.u_pi += wi * e.u_pi;
                acc.m += wi * e.m;
            }
            r.z_part += pl * wo * half_pw(up.z, p);
            r.u_part_mu += pl * wo * half_pw(up.u_mu, p);
            r.u_part_pi += pl * wo * half_pw(up.u_pi, p);
            r.m_part += pl * wo * half_pw(up.m, p);
            r.z_lower += pl * wo * half_pw(lo.z, p);
            r.u_lower += pl * wo * half_pw(lo.u_mu, p);
            r.m_lower += pl * wo * half_pw(lo.m, p);
        }
    }
    return r;
}

AprioriCheck apriori_check(const BSVIESolution& sol, const FreeTerm& phi, const GeneratorSpec& f, const World& w,
                           std::optional<WellPosednessConstants> constants, double p) {
    if (constants && p != 2.0) {
        throw DomainError("apriori_check: the weighted estimate is stated for p = 2");
    }
    if (constants && !constants->type1_ok) {
        throw DomainError("apriori_check: the constants do not satisfy the Type-I condition");
    }
    const std::size_t n = w.steps();
    const Clock& c = w.clock();
    const std::size_t leaves = w.atoms(n);
    const Values& prob = w.prob(n);
    const double beta = constants ? constants->beta : 0.0;
    const double delta = constants ? constants->delta_star : 0.0;
    AprioriCheck r;
    double lhs_y = 0.0, lhs_int = 0.0;
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        const double pl = prob[leaf];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ai = w.ancestor(n, leaf, i);
            const double wy = constants ? std::exp(beta * c.A[i]) * c.dA(i) : c.dB(i);
            const double wz = constants ? std::exp((beta - delta) * c.A[i]) * c.dA(i) : c.dB(i);
            lhs_y += pl * wy * pw(sol.Y[i][ai], p);
            r.rhs_phi += pl * wy * pw(phi.phi[i][leaf], p);
            double inner = 0.0, inner_f = 0.0;
            for (std::size_t j = i; j < n; ++j) {
                const std::size_t aj = w.ancestor(n, leaf, j);
                const double wi = constants ? std::exp(delta * c.A[j]) : 1.0;
                const CellEnergy e = cell_energy(w, sol.cells[i][j], j, aj, w.ancestor(n, leaf, j + 1));
                inner += wi * (e.z + e.u_mu + e.m);
                const double f0 = f.zero_point(w, i, j, aj);
                const double al = c.alpha[j];
                inner_f += wi * f0 * f0 / (al * al) * c.dB(j);
            }
            lhs_int += pl * wz * half_pw(inner, p);
            r.rhs_f += pl * wz * half_pw(inner_f, p);
        }
    }
    r.lhs = lhs_y + lhs_int;
    const double rhs = r.rhs_phi + r.rhs_f;
    if (rhs == 0.0) {
        r.degenerate = true;
        r.ratio = r.lhs == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    } else {
        r.ratio = r.lhs / rhs;
    }
    if (constants) {
        r.constant = 0.5 * delta * constants->sigma;
        r.violated = r.lhs > *r.constant * rhs * (1.0 + 1e-12);
    }
    return r;
}

StabilityReport stability_gap(const BSVIESolution& s1, const BSVIESolution& s2, const FreeTerm& phi1,
                              const FreeTerm& phi2, const GeneratorSpec& f1, const GeneratorSpec& f2, const World& w,
                              double p) {
    const std::size_t n = w.steps();
    if (s1.steps() != n || s2.steps() != n) {
        throw DomainError("stability_gap: solutions live on a different world");
    }
    const Clock& c = w.clock();
    const std::size_t leaves = w.atoms(n);
    const Values& prob = w.prob(n);
    const bool two_sided = f1.two_sided || f2.two_sided;
    StabilityReport r;
    PointBuilder b1(w, s1), b2(w, s2);
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t a = 0; a < s1.Y[i].size(); ++a) {
            r.y_sup_gap = std::max(r.y_sup_gap, std::abs(s1.Y[i][a] - s2.Y[i][a]));
        }
    }
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        const double pl = prob[leaf];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ai = w.ancestor(n, leaf, i);
            const double db = c.dB(i);
            double lhs_y = pw(s1.Y[i][ai] - s2.Y[i][ai], p);
            double inner = 0.0, df = 0.0;
            for (std::size_t j = i; j < n; ++j) {
                const std::size_t aj = w.ancestor(n, leaf, j);
                const std::size_t an = w.ancestor(n, leaf, j + 1);
                const Cell& c1 = s1.cells[i][j];
                const Cell& c2 = s2.cells[i][j];
                const double dz = c1.z[aj] - c2.z[aj];
                inner += dz * dz * c.dB(j);
                for (std::size_t k = 0; k < w.marks(); ++k) {
                    const double du = c1.u[k][aj] - c2.u[k][aj];
                    inner += du * du * w.jumps().intensities[k] * c.dB(j);
                }
                const double dm = c1.m[an] - c2.m[an];
                inner += dm * dm;
                const DriverPoint q1 = b1.at(i, j, leaf, two_sided);
                const double g1 = std::abs(f1(w, q1) - f2(w, q1));
                const DriverPoint q2 = b2.at(i, j, leaf, two_sided);
                const double g2 = std::abs(f1(w, q2) - f2(w, q2));
                df += std::max(g1, g2) * c.dB(j);
            }
            r.lhs += pl * db * (lhs_y + half_pw(inner, p));
            r.rhs_phi += pl * db * pw(phi1.phi[i][leaf] - phi2.phi[i][leaf], p);
            r.rhs_f += pl * db * pw(df, p);
        }
    }
    const double rhs = r.rhs_phi + r.rhs_f;
    r.ratio = rhs > 0.0 ? r.lhs / rhs : (r.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return r;
}

ExpBoundReport exp_bound_check(const FreeTerm& phi, const GeneratorSpec& f, const World& w, const Projector& proj,
                               double beta) {
    if (!(beta > 0.0)) {
        throw DomainError("exp_bound_check requires beta > 0");
    }
    if (f.uses_y) {
        throw DomainError("exp_bound_check: the driver must not depend on (y, z, u)");
    }
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    {
        const std::vector<double> ones(m, 1.7);
        for (std::size_t s = 0; s < n; ++s) {
            DriverPoint p;
            p.t = 0;
            p.s = s;
            p.y = 1.3;
            p.z = -0.9;
            p.z_rev = 0.4;
            p.u = ones;
            p.u_rev = ones;
            if (std::abs(f(w, p) - f.zero_point(w, 0, s, 0)) > 1e-14) {
                throw DomainError("exp_bound_check: the driver must not depend on (y, z, u)");
            }
        }
    }
    const Clock& c = w.clock();
    const BSVIESolution sol = solve_type1_noY(phi, f, w, proj);
    ExpBoundReport r;
    r.beta = beta;
    r.min_slack_value = std::numeric_limits<double>::infinity();
    r.min_slack_integrands = std::numeric_limits<double>::infinity();
    const double eT = std::exp(beta * c.B[n]);
    for (std::size_t t = 0; t < n; ++t) {
        // Backward accumulation of E_j[sum_{r>=j} ...] for the driver and the integrand energies.
        Values sf(w.atoms(n), 0.0), sq(w.atoms(n), 0.0);
        for (std::size_t j = n; j-- > t;) {
            Values nf = proj.condexp(sf, j + 1, j);
            Values nq = proj.condexp(sq, j + 1, j);
            const Cell& cell = sol.cells[t][j];
            Values m2(cell.m.size());
            for (std::size_t x = 0; x < m2.size(); ++x) {
                m2[x] = cell.m[x] * cell.m[x];
            }
            const Values em2 = proj.condexp(m2, j + 1, j);
            const double wf = std::exp(beta * c.B[j + 1]) * c.dB(j);
            const double wq = std::exp(beta * c.B[j]);
            for (std::size_t a = 0; a < nf.size(); ++a) {
                const double fv = f.zero_point(w, t, j, a);
                nf[a] += wf * fv * fv;
                double q = cell.z[a] * cell.z[a] * w.dw_var(j) + em2[a];
                for (std::size_t k = 0; k < m; ++k) {
                    q += cell.u[k][a] * cell.u[k][a] * w.jump_var(j, k);
                }
                nq[a] += wq * q;
            }
            sf = std::move(nf);
            sq = std::move(nq);
        }
        Values phi2(phi.phi[t].size());
        for (std::size_t x = 0; x < phi2.size(); ++x) {
            phi2[x] = phi.phi[t][x] * phi.phi[t][x];
        }
        const Values ephi2 = proj.condexp(phi2, n, t);
        const double et = std::exp(beta * c.B[t]);
        for (std::size_t a = 0; a < w.atoms(t); ++a) {
            const double rhs = eT * ephi2[a] + sf[a] / beta;
            const double scale = std::max(1.0, std::abs(rhs));
            const double y2 = et * sol.Y[t][a] * sol.Y[t][a];
            r.min_slack_value = std::min(r.min_slack_value, (rhs - y2) / scale);
            r.min_slack_integrands = std::min(r.min_slack_integrands, (rhs - sq[a]) / scale);
            ++r.checked;
        }
    }
    return r;
}

}  // namespace bsvie
