#include "bsvie/bsvie.hpp"

#include "bsvie/errors.hpp"
#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsvie {

namespace detail {

GeneratorSpec wrap_driver(const GeneratorSpec& f, std::size_t t, const std::vector<Values>* y, const BSVIESolution* rev) {
    GeneratorSpec h;
    h.name = f.name;
    h.lip = f.lip;
    h.uses_y = y == nullptr && f.uses_y;
    h.two_sided = false;
    if (y != nullptr) {
        h.lip.varpi = 0.0;
    }
    const bool read_rev = rev != nullptr && f.two_sided;
    h.eval = [f, t, y, rev, read_rev](const World& w, const DriverPoint& p) {
        DriverPoint q = p;
        if (t != kKeepT) {
            q.t = t;
        }
        if (y != nullptr) {
            q.y = (*y)[p.s][p.atom];
        }
        thread_local std::vector<double> urev;
        if (read_rev) {
            const Cell& c = rev->cells[p.s][q.t];
            const std::size_t a = w.ancestor(p.s, p.atom, q.t);
            if (!c.z.empty()) {
                q.z_rev = c.z[a];
                urev.resize(c.u.size());
                for (std::size_t k = 0; k < c.u.size(); ++k) {
                    urev[k] = c.u[k][a];
                }
                q.u_rev = urev;
            } else {
                urev.assign(w.marks(), 0.0);
                q.z_rev = 0.0;
                q.u_rev = urev;
            }
        }
        return f(w, q);
    };
    return h;
}

void store_cells(BSVIESolution& sol, std::size_t t, const BSDESolution& lambda, std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
        Cell& c = sol.cells[t][j];
        c.z = lambda.Z[j];
        c.u = lambda.U[j];
        c.m = lambda.M[j];
    }
}

std::vector<Values> constant_family(const World& w, double c) {
    std::vector<Values> out(w.steps() + 1);
    for (std::size_t j = 0; j <= w.steps(); ++j) {
        out[j].assign(w.atoms(j), c);
    }
    return out;
}

}  // namespace detail

FreeTerm constant_free_term(const World& w, const Values& xi) {
    FreeTerm f;
    f.phi.assign(w.steps() + 1, xi);
    return f;
}

BSVIESolution empty_solution(const World& w) {
    BSVIESolution s;
    const std::size_t n = w.steps();
    s.Y.assign(n + 1, {});
    s.cells.assign(n + 1, std::vector<Cell>(n));
    return s;
}

namespace {

void check_free_term(const FreeTerm& phi, const World& w) {
    const std::size_t n = w.steps();
    if (phi.phi.size() != n + 1) {
        throw DomainError("free term needs one variable per grid time");
    }
    for (const Values& v : phi.phi) {
        if (v.size() != w.atoms(n)) {
            throw DomainError("free term variables must live on the final level");
        }
    }
}

}  // namespace

BSVIESolution solve_type1_noY(const FreeTerm& phi, const GeneratorSpec& h, const World& world, const Projector& proj,
                              std::size_t from, const SolveOptions& opts) {
    if (h.uses_y) {
        throw DomainError("solve_type1_noY: driver depends on y");
    }
    check_free_term(phi, world);
    const std::size_t n = world.steps();
    BSVIESolution sol = empty_solution(world);
    sol.from = from;
    sol.Y[n] = phi.phi[n];
    for (std::size_t t = from; t < n; ++t) {
        BSDESolution lambda = solve_parametrized(t, phi.phi[t], h, world, proj, t, opts);
        sol.Y[t] = std::move(lambda.Y[t]);
        detail::store_cells(sol, t, lambda, t, n);
        for (auto& wmsg : lambda.warnings) {
            sol.warnings.push_back(std::move(wmsg));
        }
    }
    return sol;
}

GeneratorSpec freeze_y(const GeneratorSpec& f, const std::vector<Values>& y) {
    return detail::wrap_driver(f, detail::kKeepT, &y, nullptr);
}

double solution_gap(const World& w, const std::vector<Values>& y1, const std::vector<Values>& y2,
                    std::optional<double> beta, std::size_t from) {
    const std::size_t n = w.steps();
    const Clock& c = w.clock();
    double acc = 0.0;
    for (std::size_t i = from; i < n; ++i) {
        const double wt = beta ? std::exp(*beta * c.A[i]) * c.dA(i) : c.dB(i);
        double e = 0.0;
        const Values& p = w.prob(i);
        for (std::size_t a = 0; a < p.size(); ++a) {
            const double d = y1[i][a] - y2[i][a];
            e += p[a] * d * d;
        }
        acc += wt * e;
    }
    return std::sqrt(acc);
}

PicardResult picard_type1(const FreeTerm& phi, const GeneratorSpec& f, const World& world, const Projector& proj,
                          const PicardOptions& opts) {
    PicardResult r;
    if (!f.uses_y) {
        r.solution = solve_type1_noY(phi, f, world, proj, 0, opts.inner);
        r.gaps = {0.0};
        r.converged = true;
        r.iterations = 1;
        return r;
    }
    std::vector<Values> y = detail::constant_family(world, opts.init);
    for (int it = 1; it <= opts.max_iter; ++it) {
        BSVIESolution next = solve_type1_noY(phi, freeze_y(f, y), world, proj, 0, opts.inner);
        const double gap = solution_gap(world, next.Y, y, opts.beta);
        r.gaps.push_back(gap);
        r.iterations = it;
        y = next.Y;
        y[world.steps()] = phi.phi[world.steps()];
        r.solution = std::move(next);
        if (gap <= opts.tol) {
            r.converged = true;
            break;
        }
        if (!std::isfinite(gap)) {
            break;
        }
    }
    if (!r.converged && opts.throw_on_failure) {
        std::ostringstream os;
        os << "picard_type1: no convergence after " << r.iterations << " iterations (last gap "
           << (r.gaps.empty() ? 0.0 : r.gaps.back()) << ")";
        throw ConvergenceError(os.str());
    }
    return r;
}

void complete_M(BSVIESolution& sol, std::size_t S, const World& world, const Projector& proj) {
    const std::size_t n = world.steps();
    for (std::size_t i = S; i <= n; ++i) {
        if (sol.Y[i].empty()) {
            throw DomainError("complete_M: Y is not defined on the requested range");
        }
        OrthoDecomposition d = represent(proj, sol.Y[i], i, S);
        for (std::size_t j = S; j < i; ++j) {
            StepDecomposition& s = d.steps[j - S];
            Cell& c = sol.cells[i][j];
            c.z = std::move(s.z);
            c.u = std::move(s.u);
            c.m = std::move(s.m_incr);
        }
    }
    sol.lower_from = sol.lower_from ? std::min(*sol.lower_from, S) : S;
}

SFIEResult solve_sfie(const FreeTerm& phi, const GeneratorSpec& h, std::size_t R, std::size_t S, const World& world,
                      const Projector& proj, const SolveOptions& opts) {
    check_free_term(phi, world);
    const std::size_t n = world.steps();
    if (!(R <= S && S <= n)) {
        throw DomainError("solve_sfie requires R <= S <= N");
    }
    if (h.uses_y) {
        throw DomainError("solve_sfie: the driver must not depend on y");
    }
    SFIEResult r;
    r.R = R;
    r.S = S;
    for (std::size_t t = R; t <= S; ++t) {
        BSDESolution lambda = solve_parametrized(t, phi.phi[t], h, world, proj, S, opts);
        r.psi.push_back(std::move(lambda.Y[S]));
        std::vector<Cell> row(n - S);
        for (std::size_t j = S; j < n; ++j) {
            row[j - S].z = std::move(lambda.Z[j]);
            row[j - S].u = std::move(lambda.U[j]);
            row[j - S].m = std::move(lambda.M[j]);
        }
        r.cells.push_back(std::move(row));
    }
    return r;
}

double equation_residual(const BSVIESolution& sol, const FreeTerm& phi, const GeneratorSpec& f, const World& w) {
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    const std::size_t leaves = w.atoms(n);
    std::vector<double> u(m), urev(m);
    double worst = 0.0;
    for (std::size_t i = sol.from; i < n; ++i) {
        for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
            double r = sol.Y[i][w.ancestor(n, leaf, i)] - phi.phi[i][leaf];
            for (std::size_t j = i; j < n; ++j) {
                const std::size_t aj = w.ancestor(n, leaf, j);
                const std::size_t an = w.ancestor(n, leaf, j + 1);
                const Cell& c = sol.cells[i][j];
                DriverPoint p;
                p.t = i;
                p.s = j;
                p.atom = aj;
                p.y = sol.Y[j][aj];
                p.z = c.z[aj];
                for (std::size_t k = 0; k < m; ++k) {
                    u[k] = c.u[k][aj];
                }
                p.u = u;
                if (f.two_sided) {
                    const Cell& rc = sol.cells[j][i];
                    const std::size_t ai = w.ancestor(n, leaf, i);
                    p.z_rev = rc.z.empty() ? 0.0 : rc.z[ai];
                    for (std::size_t k = 0; k < m; ++k) {
                        urev[k] = rc.z.empty() ? 0.0 : rc.u[k][ai];
                    }
                    p.u_rev = urev;
                }
                r -= f(w, p) * w.clock().dB(j);
                r += c.z[aj] * w.dW(j + 1)[an] + c.m[an];
                for (std::size_t k = 0; k < m; ++k) {
                    r += u[k] * w.dpi(j + 1, k)[an];
                }
            }
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

double msolution_residual(const BSVIESolution& sol, const World& w, const Projector& proj) {
    if (!sol.lower_from) {
        throw DomainError("msolution_residual: the lower region has not been completed");
    }
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    const std::size_t L = *sol.lower_from;
    double worst = 0.0;
    for (std::size_t i = L; i <= n; ++i) {
        const std::size_t na = w.atoms(i);
        for (std::size_t S = L; S < i; ++S) {
            const Values mean = w.lift(proj.condexp(sol.Y[i], i, S), S, i);
            Values acc(na, 0.0);
            for (std::size_t j = S; j < i; ++j) {
                const Cell& c = sol.cells[i][j];
                for (std::size_t a = 0; a < na; ++a) {
                    const std::size_t aj = w.ancestor(i, a, j);
                    const std::size_t an = w.ancestor(i, a, j + 1);
                    double v = c.z[aj] * w.dW(j + 1)[an] + c.m[an];
                    for (std::size_t k = 0; k < m; ++k) {
                        v += c.u[k][aj] * w.dpi(j + 1, k)[an];
                    }
                    acc[a] += v;
                }
            }
            for (std::size_t a = 0; a < na; ++a) {
                worst = std::max(worst, std::abs(sol.Y[i][a] - mean[a] - acc[a]));
            }
        }
    }
    return worst;
}

}  // namespace bsvie
