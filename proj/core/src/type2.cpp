#include "bsvie/bsvie.hpp"

#include "bsvie/errors.hpp"
#include "detail.hpp"

#include <cmath>
#include <limits>

namespace bsvie {

std::vector<std::size_t> make_interval_plan(const World& w, double K, double C) {
    const std::size_t n = w.steps();
    const auto& t = w.clock().times;
    if (!(C > 0.0)) {
        throw DomainError("interval plan constant must be positive");
    }
    const double len = K > 0.0 ? 1.0 / (2.0 * C * K * K) : std::numeric_limits<double>::infinity();
    std::vector<std::size_t> rev{n};
    std::size_t S = n;
    while (S > 0) {
        std::size_t R = S - 1;
        while (R > 0 && t[S] - t[R - 1] <= len) {
            --R;
        }
        rev.push_back(R);
        S = R;
    }
    return {rev.rbegin(), rev.rend()};
}

namespace {

struct BlockOutcome {
    bool converged = false;
    int iterations = 0;
    std::vector<double> gaps;
};

double cell_gap2(const World& w, const Cell& a, const Cell& b, std::size_t j) {
    if (a.z.empty() || b.z.empty()) {
        return a.z.empty() && b.z.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const Values& p = w.prob(j);
    const Values& pn = w.prob(j + 1);
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
        double d = (a.z[x] - b.z[x]) * (a.z[x] - b.z[x]) * w.dw_var(j);
        for (std::size_t k = 0; k < w.marks(); ++k) {
            d += (a.u[k][x] - b.u[k][x]) * (a.u[k][x] - b.u[k][x]) * w.jump_var(j, k);
        }
        s += p[x] * d;
    }
    for (std::size_t x = 0; x < pn.size(); ++x) {
        s += pn[x] * (a.m[x] - b.m[x]) * (a.m[x] - b.m[x]);
    }
    return s;
}

void represent_rows(BSVIESolution& sol, std::size_t row_lo, std::size_t row_hi, std::size_t R, const Projector& proj) {
    for (std::size_t s = row_lo; s <= row_hi; ++s) {
        if (s <= R) {
            continue;
        }
        OrthoDecomposition d = represent(proj, sol.Y[s], s, R);
        for (std::size_t j = R; j < s; ++j) {
            StepDecomposition& st = d.steps[j - R];
            Cell& c = sol.cells[s][j];
            c.z = std::move(st.z);
            c.u = std::move(st.u);
            c.m = std::move(st.m_incr);
        }
    }
}

BlockOutcome solve_block(BSVIESolution& sol, std::size_t R, std::size_t S, const FreeTerm& phi, const GeneratorSpec& f,
                         const World& w, const Projector& proj, const Type2Options& opts) {
    const std::size_t n = w.steps();
    BlockOutcome out;

    // Lower region of the already known Y(s), s >= S, at the steps of this block.
    represent_rows(sol, S, n, R, proj);

    // Free term of the block: psi^S(t) = lambda(t, S) on [S, T] with everything known.
    std::vector<Values> psi(S - R);
    for (std::size_t t = R; t < S; ++t) {
        if (S == n) {
            psi[t - R] = phi.phi[t];
            continue;
        }
        const GeneratorSpec ht = detail::wrap_driver(f, t, &sol.Y, &sol);
        BSDESolution lambda = solve_parametrized(t, phi.phi[t], ht, w, proj, S, opts.inner);
        psi[t - R] = std::move(lambda.Y[S]);
        detail::store_cells(sol, t, lambda, S, n);
    }

    // Outer Picard on the square [R, S): y, the diagonal and the lower cells are frozen.
    for (std::size_t t = R; t < S; ++t) {
        sol.Y[t].assign(w.atoms(t), 0.0);
        Cell& d = sol.cells[t][t];
        d.z.assign(w.atoms(t), 0.0);
        d.u.assign(w.marks(), Values(w.atoms(t), 0.0));
        d.m.assign(w.atoms(t + 1), 0.0);
    }
    represent_rows(sol, R, S - 1, R, proj);

    for (int it = 1; it <= opts.max_outer; ++it) {
        const BSVIESolution prev = sol;
        for (std::size_t t = R; t < S; ++t) {
            const GeneratorSpec ht = detail::wrap_driver(f, t, &prev.Y, &prev);
            BSDESolution lambda = solve_parametrized_window(t, psi[t - R], S, ht, w, proj, t, opts.inner);
            sol.Y[t] = std::move(lambda.Y[t]);
            detail::store_cells(sol, t, lambda, t, S);
        }
        represent_rows(sol, R, S - 1, R, proj);

        double g2 = 0.0;
        for (std::size_t i = R; i < S; ++i) {
            const double db = w.clock().dB(i);
            const Values& p = w.prob(i);
            double e = 0.0;
            for (std::size_t a = 0; a < p.size(); ++a) {
                e += p[a] * (sol.Y[i][a] - prev.Y[i][a]) * (sol.Y[i][a] - prev.Y[i][a]);
            }
            double c = 0.0;
            for (std::size_t j = R; j <= i && j < n; ++j) {
                c += cell_gap2(w, sol.cells[i][j], prev.cells[i][j], j);
            }
            g2 += db * (e + c);
        }
        const double gap = std::sqrt(g2);
        out.gaps.push_back(gap);
        out.iterations = it;
        if (gap <= opts.tol) {
            out.converged = true;
            break;
        }
        if (!std::isfinite(gap) || (it > 8 && gap > 1e6 * out.gaps.front())) {
            break;
        }
    }
    return out;
}

}  // namespace

Type2Result solve_type2(const FreeTerm& phi, const GeneratorSpec& f, const World& world, const Projector& proj,
                        const Type2Options& opts) {
    const std::size_t n = world.steps();
    if (phi.phi.size() != n + 1) {
        throw DomainError("free term needs one variable per grid time");
    }
    Type2Result r;
    r.plan = opts.plan.empty() ? make_interval_plan(world, f.K(), opts.plan_constant) : opts.plan;
    if (r.plan.front() != 0 || r.plan.back() != n) {
        throw DomainError("interval plan must start at 0 and end at N");
    }
    for (std::size_t k = 0; k + 1 < r.plan.size(); ++k) {
        if (r.plan[k + 1] <= r.plan[k]) {
            throw DomainError("interval plan must be strictly increasing");
        }
    }
    BSVIESolution sol = empty_solution(world);
    sol.Y[n] = phi.phi[n];

    struct Pending {
        std::size_t R, S;
        int depth;
    };
    std::vector<Pending> todo;
    for (std::size_t k = 0; k + 1 < r.plan.size(); ++k) {
        todo.push_back({r.plan[k], r.plan[k + 1], 0});
    }
    std::vector<std::size_t> used{n};
    while (!todo.empty()) {
        const Pending b = todo.back();
        todo.pop_back();
        BlockOutcome o = solve_block(sol, b.R, b.S, phi, f, world, proj, opts);
        if (!o.converged && b.depth < opts.max_bisections && b.S - b.R >= 2) {
            ++r.bisections;
            const std::size_t mid = b.R + (b.S - b.R) / 2;
            todo.push_back({b.R, mid, b.depth + 1});
            todo.push_back({mid, b.S, b.depth + 1});
            continue;
        }
        if (!o.converged) {
            r.converged = false;
            sol.warnings.push_back("solve_type2: block [" + std::to_string(b.R) + ", " + std::to_string(b.S) +
                                   ") did not reach the tolerance");
        }
        used.push_back(b.R);
        r.outer_iterations.push_back(o.iterations);
        r.gaps.push_back(std::move(o.gaps));
    }
    r.plan.assign(used.rbegin(), used.rend());
    complete_M(sol, 0, world, proj);
    r.solution = std::move(sol);
    return r;
}

}  // namespace bsvie
