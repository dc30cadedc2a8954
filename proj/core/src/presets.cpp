#include "bsvie/presets.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bsvie {

std::string_view to_string(SolverKind k) {
    switch (k) {
        case SolverKind::bsde: return "bsde";
        case SolverKind::type1: return "type1";
        case SolverKind::type1_noY: return "type1_noY";
        case SolverKind::type2: return "type2";
        case SolverKind::comparison: return "comparison";
        case SolverKind::partition: return "partition";
        case SolverKind::duality: return "duality";
        case SolverKind::regularity: return "regularity";
    }
    return "unknown";
}

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = {
        {"ode-exp", "Type-I fixed point with driver y and unit free term",
         "Y(t) = exp(T - t) from the linear ODE", SolverKind::type1, WorldChoice::deterministic, 2000},
        {"girsanov-drift", "BSDE with drift mu z and terminal W_T",
         "Y(t) = W(t) + mu (T - t), Z = 1", SolverKind::bsde, WorldChoice::tree, 4},
        {"poisson-count", "BSDE with terminal N_T and zero driver",
         "Y(0) = lambda T from the compensator", SolverKind::bsde, WorldChoice::tree, 4},
        {"extra-noise-M", "Type-II M-solution on a filtration with extra noise",
         "brute-force fixed point over all node unknowns; M-solution identity", SolverKind::type2, WorldChoice::tree, 2},
        {"duality-linear", "duality between a linear FSVIE and its adjoint Type-II BSVIE",
         "E sum <Psi, Y> dB = E sum <X, Phi> dB", SolverKind::duality, WorldChoice::tree, 3},
        {"comparison-partition", "comparison of linear Type-I BSVIEs by the partition scheme",
         "Y2 - Y1 >= 0 nodewise; partition error decreasing in the mesh", SolverKind::partition, WorldChoice::tree, 8},
        {"holder-regularity", "time regularity of Y for Hoelder data (alpha = 1/2)",
         "fitted exponent of E|Y(t)-Y(t')|^4 at least 0.8 alpha p; jumps only at noise jumps",
         SolverKind::regularity, WorldChoice::ensemble, 32},
        {"comparison-sandwich", "comparison for Type-I BSVIEs through a nondecreasing middle driver",
         "monotone iterates; Y1 <= Y_bar <= Y2 nodewise", SolverKind::comparison, WorldChoice::tree, 4},
        {"lipschitz-standard", "Type-I Picard contraction for a Lipschitz driver",
         "brute-force fixed point; geometric gap sequence", SolverKind::type1, WorldChoice::tree, 4},
        {"type2-linear", "Type-II M-solution with a linear two-sided driver",
         "brute-force fixed point over all node unknowns", SolverKind::type2, WorldChoice::tree, 3},
    };
    return catalog;
}

const PresetInfo& preset_info(const std::string& name) {
    for (const PresetInfo& p : preset_catalog()) {
        if (p.name == name) {
            return p;
        }
    }
    throw ValidationError("unknown preset '" + name + "'");
}

namespace {

struct Noise {
    bool brownian = true;
    std::vector<double> intensities;
    bool extra = false;
};

std::shared_ptr<const World> make_world(const PresetInfo& info, const PresetParams& p, const Noise& noise) {
    const std::size_t steps = p.steps == 0 ? info.default_steps : p.steps;
    if (!(p.horizon > 0.0)) {
        throw ValidationError("horizon must be positive");
    }
    const Clock clock = ito_clock(p.horizon, steps);
    JumpMeasureSpec jumps;
    for (double l : noise.intensities) {
        jumps.marks.push_back(1.0);
        jumps.intensities.push_back(l);
    }
    const WorldChoice choice = p.world == WorldChoice::preset_default ? info.default_world : p.world;
    switch (choice) {
        case WorldChoice::deterministic:
            return std::make_shared<const World>(World::deterministic(clock));
        case WorldChoice::ensemble: {
            EnsembleSpec es;
            es.n_paths = p.n_paths;
            es.seed = p.seed;
            es.brownian = noise.brownian;
            es.extra_noise = noise.extra;
            return std::make_shared<const World>(World::ensemble(clock, jumps, es));
        }
        default: {
            TreeSpec ts;
            ts.brownian = noise.brownian ? BrownianQuantization::binomial : BrownianQuantization::none;
            ts.extra_noise = noise.extra;
            ts.max_steps = std::max(p.max_tree_steps, info.default_steps);
            return std::make_shared<const World>(World::tree(clock, jumps, ts));
        }
    }
}

/// Free term built leafwise from (t, W_T, N_T, E_T, W_t) on the final level.
template <class F>
FreeTerm leafwise(const World& w, F&& fn) {
    const std::size_t n = w.steps();
    FreeTerm phi;
    phi.phi.resize(n + 1);
    const Values zero(w.atoms(n), 0.0);
    const Values& wt = w.W(n);
    const Values& nt = w.marks() > 0 ? w.N(n, 0) : zero;
    const Values& et = w.E(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const Values ws = w.lift(w.W(i), i, n);
        const double t = w.clock().times[i];
        phi.phi[i].resize(w.atoms(n));
        for (std::size_t a = 0; a < w.atoms(n); ++a) {
            phi.phi[i][a] = fn(t, wt[a], nt[a], et[a], ws[a]);
        }
    }
    return phi;
}

double lam_u(const World& w, const DriverPoint& p, double coef) {
    double v = 0.0;
    for (std::size_t k = 0; k < p.u.size(); ++k) {
        v += coef * w.jumps().intensities[k] * p.u[k];
    }
    return v;
}

Problem ode_exp(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {false, {}, false});
    const World& w = *pr.world;
    pr.phi = constant_free_term(w, Values(w.atoms(w.steps()), 1.0));
    pr.f.name = "y";
    pr.f.uses_y = true;
    pr.f.lip.varpi = 1.0;
    pr.f.eval = [](const World&, const DriverPoint& q) { return q.y; };
    pr.expected_y0 = std::exp(w.clock().horizon());
    return pr;
}

Problem girsanov(const PresetInfo& info, const PresetParams& p) {
    constexpr double mu = 0.5;
    Problem pr;
    pr.world = make_world(info, p, {true, {}, false});
    const World& w = *pr.world;
    pr.phi = constant_free_term(w, w.W(w.steps()));
    pr.f.name = "mu*z";
    pr.f.lip.theta_z = mu * mu;
    pr.f.eval = [](const World&, const DriverPoint& q) { return mu * q.z; };
    pr.expected_y0 = mu * w.clock().horizon();
    return pr;
}

Problem poisson_count(const PresetInfo& info, const PresetParams& p) {
    constexpr double lambda = 0.75;
    Problem pr;
    pr.world = make_world(info, p, {false, {lambda}, false});
    const World& w = *pr.world;
    pr.phi = constant_free_term(w, w.N(w.steps(), 0));
    pr.f = zero_generator();
    pr.expected_y0 = lambda * w.clock().horizon();
    return pr;
}

Problem extra_noise_m(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {}, true});
    pr.phi = leafwise(*pr.world, [](double t, double wT, double, double eT, double) { return (1.0 + t) * eT + 0.5 * wT; });
    pr.f.name = "0.2y+0.3z+0.25z(s,t)";
    pr.f.uses_y = true;
    pr.f.two_sided = true;
    pr.f.lip = {0.12, 0.27, 0.0};
    pr.f.eval = [](const World&, const DriverPoint& q) { return 0.2 * q.y + 0.3 * q.z + 0.25 * q.z_rev; };
    return pr;
}

Problem duality_linear(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {1.0}, false});
    const World& w = *pr.world;
    pr.phi = leafwise(w, [](double t, double wT, double nT, double, double) { return wT * (1.0 + t) + std::cos(nT); });
    FSVIECoefficients c;
    c.a0 = [](double t, double s) { return 0.5 * std::cos(t - s); };
    c.a1 = [](double, double s) { return 0.3 * (1.0 + 0.5 * s); };
    c.jump = [](double t, double s, std::size_t) { return 0.2 * (1.0 + t * s); };
    c.bound = 0.5 * (1.0 + p.horizon * p.horizon);
    c.derivative_bound = 0.5 + 0.2 * p.horizon;
    pr.coeff = c;
    pr.f = adjoint_driver(c, w);
    pr.psi.resize(w.steps() + 1);
    for (std::size_t i = 0; i <= w.steps(); ++i) {
        pr.psi[i].resize(w.atoms(i));
        for (std::size_t a = 0; a < w.atoms(i); ++a) {
            pr.psi[i][a] = 1.0 + w.W(i)[a] + 0.5 * w.N(i, 0)[a];
        }
    }
    return pr;
}

Problem comparison_partition(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {1.0}, false});
    const World& w = *pr.world;
    LinearComparisonData d;
    d.phi1 = leafwise(w, [](double t, double wT, double, double, double) { return std::cos(wT) * (1.0 + t); });
    d.phi2 = leafwise(w, [](double t, double wT, double nT, double, double) {
        return std::cos(wT) * (1.0 + t) + (1.0 + wT * wT + nT) * (2.0 - t) / 2.0;
    });
    d.g1 = [](const World& world, std::size_t t, std::size_t, std::size_t, double y) {
        return (0.8 - 0.3 * world.clock().times[t]) * y;
    };
    d.g2 = [](const World& world, std::size_t t, std::size_t s, std::size_t, double y) {
        const double tt = world.clock().times[t];
        return (0.8 - 0.3 * tt) * y + 0.5 * (2.0 - tt) * (1.0 + world.clock().times[s]);
    };
    d.h = 0.3;
    d.kappa = {0.5};
    d.lip_y = 0.8;
    pr.phi = d.phi2;
    pr.f = linear_comparison_driver(d, 2);
    pr.linear = std::move(d);
    return pr;
}

Problem holder(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    Noise noise{true, {}, false};
    if (p.with_jumps) {
        noise.intensities = {1.0};
    }
    pr.world = make_world(info, p, noise);
    pr.phi = leafwise(*pr.world, [](double, double wT, double nT, double, double ws) { return ws + wT + nT; });
    pr.phi.holder_alpha = 0.5;
    pr.phi.holder_rho = 3.0;
    pr.f.name = "0.2z+0.1cos(s-t)";
    pr.f.lip.theta_z = 0.04;
    pr.f.eval = [](const World& w, const DriverPoint& q) {
        const auto& t = w.clock().times;
        return 0.2 * q.z + 0.1 * std::cos(t[q.s] - t[q.t]);
    };
    return pr;
}

Problem sandwich(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {1.0}, false});
    const World& w = *pr.world;
    SandwichData d;
    d.phi_bar = leafwise(w, [](double t, double wT, double nT, double, double) { return std::cos(wT) + 0.5 * nT + 0.2 * t; });
    d.phi1 = d.phi_bar;
    d.phi2 = d.phi_bar;
    for (std::size_t i = 0; i <= w.steps(); ++i) {
        for (std::size_t a = 0; a < w.atoms(w.steps()); ++a) {
            d.phi1.phi[i][a] -= 0.5;
            d.phi2.phi[i][a] += 0.5;
        }
    }
    auto make = [](double shift, const char* name) {
        GeneratorSpec g;
        g.name = name;
        g.uses_y = true;
        g.lip = {3.0, 0.27, 0.12};
        g.eval = [shift](const World& world, const DriverPoint& q) {
            return std::min(q.y, 1.0) + 0.3 * q.z + lam_u(world, q, 0.2) + shift;
        };
        return g;
    };
    d.f1 = make(-0.1, "min(y,1)+0.3z+0.2u-0.1");
    d.f_bar = make(0.0, "min(y,1)+0.3z+0.2u");
    d.f2 = make(0.1, "min(y,1)+0.3z+0.2u+0.1");
    pr.phi = d.phi_bar;
    pr.f = d.f_bar;
    pr.sandwich = std::move(d);
    return pr;
}

Problem lipschitz_standard(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {1.0}, false});
    pr.phi = leafwise(*pr.world, [](double t, double wT, double nT, double, double) {
        return std::cos(wT) + t * nT / (1.0 + nT);
    });
    pr.f.name = "0.5sin(y)+0.3z+0.2u+0.5cos(t+s)";
    pr.f.uses_y = true;
    pr.f.lip = {0.75, 0.27, 0.12};
    pr.f.eval = [](const World& w, const DriverPoint& q) {
        const auto& t = w.clock().times;
        return 0.5 * std::sin(q.y) + 0.3 * q.z + lam_u(w, q, 0.2) + 0.5 * std::cos(t[q.t] + t[q.s]);
    };
    return pr;
}

Problem type2_linear(const PresetInfo& info, const PresetParams& p) {
    Problem pr;
    pr.world = make_world(info, p, {true, {1.0}, false});
    pr.phi = leafwise(*pr.world, [](double t, double wT, double nT, double, double) { return wT + 0.5 * (1.0 + t) * nT; });
    pr.f.name = "0.4y+0.3z+0.2z(s,t)+0.1u(s,t)+0.1t";
    pr.f.uses_y = true;
    pr.f.two_sided = true;
    pr.f.lip = {0.64, 0.36, 0.04};
    pr.f.eval = [](const World& w, const DriverPoint& q) {
        double v = 0.4 * q.y + 0.3 * q.z + 0.2 * q.z_rev + 0.1 * w.clock().times[q.t];
        for (std::size_t k = 0; k < q.u_rev.size(); ++k) {
            v += 0.1 * w.jumps().intensities[k] * q.u_rev[k];
        }
        return v;
    };
    return pr;
}

}  // namespace

Problem build_preset(const std::string& name, const PresetParams& params) {
    const PresetInfo& info = preset_info(name);
    Problem pr;
    if (name == "ode-exp") {
        pr = ode_exp(info, params);
    } else if (name == "girsanov-drift") {
        pr = girsanov(info, params);
    } else if (name == "poisson-count") {
        pr = poisson_count(info, params);
    } else if (name == "extra-noise-M") {
        pr = extra_noise_m(info, params);
    } else if (name == "duality-linear") {
        pr = duality_linear(info, params);
    } else if (name == "comparison-partition") {
        pr = comparison_partition(info, params);
    } else if (name == "holder-regularity") {
        pr = holder(info, params);
    } else if (name == "comparison-sandwich") {
        pr = sandwich(info, params);
    } else if (name == "lipschitz-standard") {
        pr = lipschitz_standard(info, params);
    } else {
        pr = type2_linear(info, params);
    }
    pr.preset = name;
    pr.solver = info.solver;
    return pr;
}

}  // namespace bsvie
