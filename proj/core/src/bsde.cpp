#include "bsvie/bsde.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bsvie {

namespace {

BSDESolution backward(std::size_t t_index, bool driver_at_s, const Values& terminal, std::size_t end,
                      const GeneratorSpec& f, const World& w, const Projector& proj, std::size_t stop,
                      const SolveOptions& opts) {
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    if (end > n || terminal.size() != w.atoms(end)) {
        throw DomainError("terminal value does not match its level of the world");
    }
    if (stop > end) {
        throw DomainError("stop step after the terminal step");
    }
    BSDESolution sol;
    sol.from_step = stop;
    sol.Y.assign(n + 1, {});
    sol.Z.assign(n, {});
    sol.U.assign(n, std::vector<Values>(m));
    sol.M.assign(n, {});
    sol.Y[end] = terminal;

    const double lip_y = std::sqrt(f.lip.varpi);
    std::vector<double> u(m);
    for (std::size_t i = end; i-- > stop;) {
        StepDecomposition d = proj.step(sol.Y[i + 1], i);
        const double db = w.clock().dB(i);
        bool implicit = opts.implicit && f.uses_y;
        if (implicit && lip_y * db >= 1.0) {
            implicit = false;
            std::ostringstream os;
            os << "step " << i << ": sqrt(varpi)*dB = " << lip_y * db << " >= 1, explicit step used";
            sol.warnings.push_back(os.str());
        }
        const std::size_t na = w.atoms(i);
        Values y(na);
        DriverPoint p;
        p.t = driver_at_s ? i : t_index;
        p.s = i;
        for (std::size_t a = 0; a < na; ++a) {
            for (std::size_t k = 0; k < m; ++k) {
                u[k] = d.u[k][a];
            }
            p.atom = a;
            p.z = d.z[a];
            p.u = u;
            p.y = d.mean[a];
            double cur = d.mean[a] + f(w, p) * db;
            if (implicit) {
                int it = 0;
                for (; it < opts.inner_max; ++it) {
                    p.y = cur;
                    const double next = d.mean[a] + f(w, p) * db;
                    const double diff = std::abs(next - cur);
                    cur = next;
                    if (diff <= opts.inner_tol * (1.0 + std::abs(cur))) {
                        break;
                    }
                }
                sol.max_inner_iterations = std::max(sol.max_inner_iterations, it + 1);
            }
            y[a] = cur;
        }
        sol.Y[i] = std::move(y);
        sol.Z[i] = std::move(d.z);
        sol.U[i] = std::move(d.u);
        sol.M[i] = std::move(d.m_incr);
    }
    return sol;
}

}  // namespace

BSDESolution solve_bsde(const Values& xi, const GeneratorSpec& f, const World& world, const Projector& proj,
                        const SolveOptions& opts) {
    return backward(0, true, xi, world.steps(), f, world, proj, 0, opts);
}

BSDESolution solve_parametrized(std::size_t t_index, const Values& phi_t, const GeneratorSpec& f, const World& world,
                                const Projector& proj, std::size_t stop_step, const SolveOptions& opts) {
    if (t_index > world.steps()) {
        throw DomainError("parametrized BSDE: t index beyond the horizon");
    }
    return backward(t_index, false, phi_t, world.steps(), f, world, proj, stop_step, opts);
}

BSDESolution solve_parametrized_window(std::size_t t_index, const Values& terminal, std::size_t end_step,
                                       const GeneratorSpec& f, const World& world, const Projector& proj,
                                       std::size_t stop_step, const SolveOptions& opts) {
    return backward(t_index, false, terminal, end_step, f, world, proj, stop_step, opts);
}

double bsde_residual(const BSDESolution& sol, std::size_t t_index, const GeneratorSpec& f, const World& w,
                     bool driver_at_s) {
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    double worst = 0.0;
    std::vector<double> u(m);
    for (std::size_t i = sol.from_step; i < n && !sol.Y[i + 1].empty(); ++i) {
        const std::size_t na = w.atoms(i + 1);
        for (std::size_t a = 0; a < na; ++a) {
            const std::size_t par = w.parent(i + 1, a);
            DriverPoint p;
            p.t = driver_at_s ? i : t_index;
            p.s = i;
            p.atom = par;
            p.y = sol.Y[i][par];
            p.z = sol.Z[i][par];
            for (std::size_t k = 0; k < m; ++k) {
                u[k] = sol.U[i][k][par];
            }
            p.u = u;
            double r = sol.Y[i + 1][a] - sol.Y[i][par] + f(w, p) * w.clock().dB(i) - sol.Z[i][par] * w.dW(i + 1)[a] -
                       sol.M[i][a];
            for (std::size_t k = 0; k < m; ++k) {
                r -= u[k] * w.dpi(i + 1, k)[a];
            }
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

AprioriReport bsde_apriori_check(const BSDESolution& sol, const Values& xi, const GeneratorSpec& f, const World& w,
                                 double p) {
    if (!(p >= 2.0)) {
        throw DomainError("bsde_apriori_check requires p >= 2");
    }
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    const std::size_t leaves = w.atoms(n);
    const Values& prob = w.prob(n);
    AprioriReport r;
    for (std::size_t a = 0; a < leaves; ++a) {
        double sup_y = 0.0, qz = 0.0, qu = 0.0, qm = 0.0, f0 = 0.0;
        for (std::size_t i = sol.from_step; i <= n; ++i) {
            const std::size_t ai = w.ancestor(n, a, i);
            sup_y = std::max(sup_y, std::abs(sol.Y[i][ai]));
            if (i == n) {
                break;
            }
            const std::size_t an = w.ancestor(n, a, i + 1);
            const double db = w.clock().dB(i);
            qz += sol.Z[i][ai] * sol.Z[i][ai] * db;
            for (std::size_t k = 0; k < m; ++k) {
                qu += sol.U[i][k][ai] * sol.U[i][k][ai] * w.dN(i + 1, k)[an];
            }
            qm += sol.M[i][an] * sol.M[i][an];
            f0 += std::abs(f.zero_point(w, i, i, ai)) * db;
        }
        r.lhs += prob[a] * (std::pow(sup_y, p) + std::pow(qz, p / 2) + std::pow(qu, p / 2) + std::pow(qm, p / 2));
        r.rhs += prob[a] * (std::pow(std::abs(xi[a]), p) + std::pow(f0, p));
    }
    r.finite = std::isfinite(r.lhs) && std::isfinite(r.rhs);
    if (r.rhs == 0.0) {
        r.degenerate = true;
        r.ratio = r.lhs == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    } else {
        r.ratio = r.lhs / r.rhs;
    }
    return r;
}

}  // namespace bsvie
