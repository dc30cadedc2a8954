#include "bsvie/analysis.hpp"

#include "bsvie/errors.hpp"
#include "bsvie/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsvie {

namespace {

std::vector<Values> iterate_from(const std::vector<Values>& start, const FreeTerm& phi, const GeneratorSpec& f,
                                 const World& w, const Projector& proj, int iterations, double tol,
                                 std::vector<std::vector<Values>>& out) {
    std::vector<Values> cur = start;
    out.push_back(cur);
    for (int k = 0; k < iterations; ++k) {
        BSVIESolution next = solve_type1_noY(phi, freeze_y(f, cur), w, proj);
        next.Y[w.steps()] = phi.phi[w.steps()];
        const double gap = solution_gap(w, next.Y, cur);
        cur = std::move(next.Y);
        out.push_back(cur);
        if (gap <= tol) {
            break;
        }
    }
    return cur;
}

std::size_t count_order_breaks(const std::vector<std::vector<Values>>& seq, bool decreasing, double tol, double& worst) {
    std::size_t n = 0;
    for (std::size_t k = 1; k < seq.size(); ++k) {
        for (std::size_t i = 0; i < seq[k].size(); ++i) {
            for (std::size_t a = 0; a < seq[k][i].size(); ++a) {
                const double d = decreasing ? seq[k][i][a] - seq[k - 1][i][a] : seq[k - 1][i][a] - seq[k][i][a];
                if (d > tol) {
                    ++n;
                    worst = std::max(worst, d);
                }
            }
        }
    }
    return n;
}

void check_sandwich(const FreeTerm& phi1, const FreeTerm& phi2, const FreeTerm& phi_bar, const GeneratorSpec& f1,
                    const GeneratorSpec& f2, const GeneratorSpec& f_bar, const World& w, MonotoneReport& r) {
    constexpr double tol = 1e-12;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < phi1.phi.size(); ++i) {
        for (std::size_t a = 0; a < phi1.phi[i].size(); ++a) {
            ++r.sandwich_checked;
            if (phi1.phi[i][a] > phi_bar.phi[i][a] + tol || phi_bar.phi[i][a] > phi2.phi[i][a] + tol) {
                ++bad;
            }
        }
    }
    const Philox4x32 gen(11);
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    std::vector<double> u(m), ur(m);
    for (std::size_t k = 0; k < 400; ++k) {
        const auto a = gen.uniforms(k, 0, 0);
        const auto b = gen.uniforms(k, 0, 1);
        DriverPoint p;
        p.t = static_cast<std::size_t>(a[0] * static_cast<double>(n));
        p.s = p.t + static_cast<std::size_t>(a[1] * static_cast<double>(n - p.t));
        p.atom = static_cast<std::size_t>(a[2] * static_cast<double>(w.atoms(p.s)));
        p.y = 8.0 * (b[0] - 0.5);
        p.z = 8.0 * (b[1] - 0.5);
        p.z_rev = 8.0 * (b[2] - 0.5);
        for (std::size_t j = 0; j < m; ++j) {
            const auto c = gen.uniforms(k, 1 + static_cast<std::uint32_t>(j), 0);
            u[j] = 8.0 * (c[0] - 0.5);
            ur[j] = 8.0 * (c[1] - 0.5);
        }
        p.u = u;
        p.u_rev = ur;
        const double lo = f1(w, p), mid = f_bar(w, p), hi = f2(w, p);
        DriverPoint q = p;
        q.y = p.y + 8.0 * b[3];
        r.sandwich_checked += 2;
        if (lo > mid + tol || mid > hi + tol) {
            ++bad;
        }
        if (f_bar(w, q) < mid - tol) {
            ++bad;
        }
    }
    if (bad > 0) {
        std::ostringstream os;
        os << "monotone_picard: ordering of the data fails at " << bad << " of " << r.sandwich_checked
           << " spot checks";
        throw DomainError(os.str());
    }
}

}  // namespace

MonotoneReport monotone_picard(const FreeTerm& phi1, const FreeTerm& phi2, const FreeTerm& phi_bar,
                               const GeneratorSpec& f1, const GeneratorSpec& f2, const GeneratorSpec& f_bar,
                               const World& world, const Projector& proj, int iterations, double tol) {
    MonotoneReport r;
    check_sandwich(phi1, phi2, phi_bar, f1, f2, f_bar, world, r);
    PicardOptions po;
    po.tol = tol;
    po.max_iter = 500;
    r.y1 = picard_type1(phi1, f1, world, proj, po).solution;
    r.y2 = picard_type1(phi2, f2, world, proj, po).solution;
    r.y_bar = picard_type1(phi_bar, f_bar, world, proj, po).solution;

    const std::vector<Values> top = iterate_from(r.y2.Y, phi_bar, f_bar, world, proj, iterations, tol, r.from_above);
    iterate_from(r.y1.Y, phi_bar, f_bar, world, proj, iterations, tol, r.from_below);
    constexpr double order_tol = 1e-12;
    r.increasing_steps = count_order_breaks(r.from_above, true, order_tol, r.max_violation);
    r.decreasing_steps = count_order_breaks(r.from_below, false, order_tol, r.max_violation);
    r.limit_gap = solution_gap(world, top, r.y_bar.Y);
    return r;
}

ComparisonStats compare_solutions(const World& world, const std::vector<Values>& y1, const std::vector<Values>& y2,
                                  double tol, std::size_t from) {
    ComparisonStats s;
    const std::size_t n = world.steps();
    if (y1.size() != n + 1 || y2.size() != n + 1) {
        throw DomainError("compare_solutions: both families need one variable per grid time");
    }
    for (std::size_t i = from; i <= n; ++i) {
        if (y1[i].size() != y2[i].size()) {
            throw DomainError("compare_solutions: families live on different levels");
        }
        for (std::size_t a = 0; a < y1[i].size(); ++a) {
            ++s.checked;
            const double d = y1[i][a] - y2[i][a];
            if (d > tol) {
                ++s.violations;
                if (d > s.max_violation) {
                    s.max_violation = d;
                    s.worst_step = i;
                    s.worst_atom = a;
                }
            }
        }
    }
    return s;
}

GeneratorSpec linear_comparison_driver(const LinearComparisonData& d, int which) {
    if (which != 1 && which != 2) {
        throw DomainError("linear_comparison_driver: which must be 1 or 2");
    }
    GeneratorSpec f;
    f.name = which == 1 ? "linear-g1" : "linear-g2";
    f.uses_y = true;
    // Squared coefficients times the number of argument groups.
    double lam_kappa2 = 0.0;
    f.lip.varpi = 3.0 * d.lip_y * d.lip_y;
    f.lip.theta_z = 3.0 * d.h * d.h;
    auto g = which == 1 ? d.g1 : d.g2;
    const double h = d.h;
    const std::vector<double> kappa = d.kappa;
    f.eval = [g, h, kappa](const World& w, const DriverPoint& p) {
        double v = g(w, p.t, p.s, p.atom, p.y) + h * p.z;
        for (std::size_t k = 0; k < kappa.size(); ++k) {
            v += w.jumps().intensities[k] * kappa[k] * p.u[k];
        }
        return v;
    };
    for (std::size_t k = 0; k < d.kappa.size(); ++k) {
        lam_kappa2 += d.kappa[k] * d.kappa[k];
    }
    f.lip.theta_u = 3.0 * lam_kappa2;
    return f;
}

namespace {

std::vector<std::string> check_partition_hypotheses(const LinearComparisonData& d, const World& w) {
    std::vector<std::string> failed;
    constexpr double tol = 1e-12;
    for (double k : d.kappa) {
        if (!(k > -1.0)) {
            failed.emplace_back("jump coefficient kappa must exceed -1");
            break;
        }
    }
    const std::size_t n = w.steps();
    const double ys[] = {-2.0, -0.5, 0.0, 1.0, 3.0};
    bool c1 = true, c2 = true;
    for (std::size_t s = 0; s < n && (c1 || c2); ++s) {
        const std::size_t na = std::min<std::size_t>(w.atoms(s), 16);
        for (std::size_t a = 0; a < na; ++a) {
            for (std::size_t t = 0; t <= s; ++t) {
                for (std::size_t tau = t; tau <= s; ++tau) {
                    for (double y : ys) {
                        const double gt = d.g2(w, t, s, a, y) - d.g1(w, t, s, a, y);
                        const double gtau = d.g2(w, tau, s, a, y) - d.g1(w, tau, s, a, y);
                        if (gt < gtau - tol || gtau < -tol) {
                            c1 = false;
                        }
                        for (double y2 : ys) {
                            const double lt = (d.g1(w, t, s, a, y) - d.g1(w, t, s, a, y2)) * (y - y2);
                            const double ltau = (d.g1(w, tau, s, a, y) - d.g1(w, tau, s, a, y2)) * (y - y2);
                            if (lt < ltau - tol) {
                                c2 = false;
                            }
                        }
                    }
                }
            }
        }
    }
    if (!c1) {
        failed.emplace_back("g2 - g1 must be nonnegative and nonincreasing in t");
    }
    if (!c2) {
        failed.emplace_back("the y-increments of g1 must be nonincreasing in t");
    }
    bool c4 = true;
    const std::size_t leaves = w.atoms(n);
    for (std::size_t a = 0; a < leaves && c4; ++a) {
        for (std::size_t t = 0; t <= n && c4; ++t) {
            const double dt = d.phi2.phi[t][a] - d.phi1.phi[t][a];
            if (dt < -tol) {
                c4 = false;
            }
            if (t > 0 && d.phi2.phi[t - 1][a] - d.phi1.phi[t - 1][a] < dt - tol) {
                c4 = false;
            }
        }
    }
    if (!c4) {
        failed.emplace_back("Phi2 - Phi1 must be nonnegative and nonincreasing in t");
    }
    return failed;
}

}  // namespace

PartitionComparisonReport partition_comparison(const LinearComparisonData& d, const World& world, const Projector& proj,
                                               const std::vector<std::size_t>& block_counts, double tol) {
    PartitionComparisonReport r;
    r.failed_hypotheses = check_partition_hypotheses(d, world);
    if (!r.failed_hypotheses.empty()) {
        throw DomainError("partition_comparison: " + r.failed_hypotheses.front());
    }
    const std::size_t n = world.steps();
    const std::size_t leaves = world.atoms(n);
    PicardOptions po;
    po.tol = 1e-14;
    po.max_iter = 500;
    const GeneratorSpec f1 = linear_comparison_driver(d, 1);
    const GeneratorSpec f2 = linear_comparison_driver(d, 2);
    const BSVIESolution s1 = picard_type1(d.phi1, f1, world, proj, po).solution;
    const BSVIESolution s2 = picard_type1(d.phi2, f2, world, proj, po).solution;
    r.direct = compare_solutions(world, s1.Y, s2.Y, tol);

    std::vector<Values> dy(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        dy[i].resize(s1.Y[i].size());
        for (std::size_t a = 0; a < dy[i].size(); ++a) {
            dy[i][a] = s2.Y[i][a] - s1.Y[i][a];
        }
    }

    // Free term of the difference equation and the difference quotient of g1.
    std::vector<Values> dphi(n + 1, Values(leaves));
    for (std::size_t t = 0; t <= n; ++t) {
        for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
            double v = d.phi2.phi[t][leaf] - d.phi1.phi[t][leaf];
            for (std::size_t j = t; j < n; ++j) {
                const std::size_t aj = world.ancestor(n, leaf, j);
                const double y2 = s2.Y[j][aj];
                v += (d.g2(world, t, j, aj, y2) - d.g1(world, t, j, aj, y2)) * world.clock().dB(j);
            }
            dphi[t][leaf] = v;
        }
    }
    // quotient[t][s][atom]
    std::vector<std::vector<Values>> quotient(n, std::vector<Values>(n));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = t; s < n; ++s) {
            Values& q = quotient[t][s];
            q.resize(world.atoms(s));
            for (std::size_t a = 0; a < q.size(); ++a) {
                const double y1 = s1.Y[s][a], y2 = s2.Y[s][a];
                if (y1 != y2) {
                    q[a] = (d.g1(world, t, s, a, y2) - d.g1(world, t, s, a, y1)) / (y2 - y1);
                } else {
                    const double e = 1e-7 * (1.0 + std::abs(y1));
                    q[a] = (d.g1(world, t, s, a, y1 + e) - d.g1(world, t, s, a, y1 - e)) / (2.0 * e);
                }
            }
        }
    }

    for (std::size_t K : block_counts) {
        if (K == 0 || K > n) {
            throw DomainError("partition_comparison: block count must lie in [1, N]");
        }
        std::vector<std::size_t> start(n + 1, 0);
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t lo = k * n / K;
            const std::size_t hi = (k + 1) * n / K;
            for (std::size_t t = lo; t < hi; ++t) {
                start[t] = lo;
            }
        }
        start[n] = n;
        FreeTerm phi_pi;
        phi_pi.phi.resize(n + 1);
        for (std::size_t t = 0; t <= n; ++t) {
            phi_pi.phi[t] = dphi[start[t]];
        }
        GeneratorSpec f;
        f.name = "partition-difference";
        f.uses_y = true;
        f.lip = f1.lip;
        const double h = d.h;
        const std::vector<double> kappa = d.kappa;
        f.eval = [&quotient, start, h, kappa](const World& w, const DriverPoint& p) {
            double v = quotient[start[p.t]][p.s][p.atom] * p.y + h * p.z;
            for (std::size_t k = 0; k < kappa.size(); ++k) {
                v += w.jumps().intensities[k] * kappa[k] * p.u[k];
            }
            return v;
        };
        const BSVIESolution sp = picard_type1(phi_pi, f, world, proj, po).solution;
        double lo = INFINITY;
        std::size_t neg = 0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (double v : sp.Y[i]) {
                lo = std::min(lo, v);
                if (v < -tol) {
                    ++neg;
                }
            }
        }
        r.blocks.push_back(K);
        r.errors.push_back(solution_gap(world, sp.Y, dy));
        r.min_value.push_back(lo);
        r.negative.push_back(neg);
    }
    return r;
}

}  // namespace bsvie
