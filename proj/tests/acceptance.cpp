#include "bsvie/analysis.hpp"
#include "bsvie/constants.hpp"
#include "bsvie/presets.hpp"

#include "brute_force.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace bsvie;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Problem make(const std::string& name, std::size_t steps, WorldChoice world = WorldChoice::preset_default) {
    PresetParams pp;
    pp.steps = steps;
    pp.world = world;
    return build_preset(name, pp);
}

PicardOptions tight_picard() {
    PicardOptions o;
    o.tol = 1e-15;
    o.max_iter = 400;
    return o;
}

Verdict closed_forms() {
    const auto t0 = Clock::now();
    const double r11 = std::sqrt(11.0);
    double worst = 0.0;
    for (double beta : {10.0, 100.0, 1000.0}) {
        const double ds = r11 * beta / (3.0 + r11);
        const double m = (r11 + 3.0) * (r11 + 3.0) / beta;
        worst = std::max(worst, std::abs(solve_delta_star(beta, JumpBound(0.0)) - ds) / ds);
        worst = std::max(worst, std::abs(eval_M(beta, JumpBound(0.0)) - m) / m);
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "max rel err " << worst << ", " << dt << " s";
    return {worst <= 1e-10 && dt < 1.0, os.str()};
}

Verdict asymptotics() {
    double worst = 0.0;
    for (double f : {0.001, 0.01, 0.03}) {
        const double target = 9.0 * std::numbers::e * f;
        worst = std::max(worst, std::abs(eval_M(1e6, JumpBound(f)) - target) / target);
    }
    const double f = 0.001;
    const double ef = std::numbers::e * f;
    const double limit = 18.0 * ef * ef / (1.0 - 18.0 * ef);
    const double st = std::abs(eval_sigmas(1e7, JumpBound(f)).sigma_tilde - limit) / limit;
    std::ostringstream os;
    os << "M rel err " << worst << ", sigma~ rel err " << st;
    return {worst <= 0.01 && st <= 0.01, os.str()};
}

Verdict thresholds() {
    const auto t0 = Clock::now();
    const double b1 = min_beta(Condition::type1, JumpBound(0.0)).beta;
    const double b2 = min_beta(Condition::type2, JumpBound(0.0)).beta;
    const double f1 = admissibility_boundary(Condition::type1);
    const double f2 = admissibility_boundary(Condition::type2);
    const double e1 = std::abs(18.0 * std::numbers::e * f1 - 3.0 * (std::sqrt(11.0) - 3.0));
    const double e2 = std::abs(std::numbers::e * f2 - 1.0 / (3.0 * (51.0 + std::sqrt(2603.0))));
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "type1 " << b1 << ", type2 " << b2 << ", boundary errs " << e1 << " / " << e2 << ", " << dt << " s";
    return {b1 >= 171.0 && b1 <= 174.0 && b2 >= 1356.0 && b2 <= 1358.0 && e1 <= 1e-6 && e2 <= 1e-4 && dt < 5.0,
            os.str()};
}

Verdict oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t cases = 0;
    for (const PresetInfo& info : preset_catalog()) {
        if (info.default_world == WorldChoice::deterministic) {
            continue;
        }
        const std::size_t steps = std::min<std::size_t>(info.default_steps, 3);
        const Problem pr = make(info.name, steps, WorldChoice::tree);
        const World& w = *pr.world;
        const auto proj = make_projector(w);
        const bool uses_y = pr.f.uses_y;
        if (info.solver == SolverKind::bsde) {
            const BSDESolution s = solve_bsde(pr.phi.phi.back(), pr.f, w, *proj);
            worst = std::max(worst, testing::max_abs_difference(testing::brute_force_bsde(pr.phi.phi.back(), pr.f, w), s));
            ++cases;
            continue;
        }
        const testing::BruteForceSolution bf = testing::brute_force_bsvie(pr.phi, pr.f, w);
        if (pr.f.two_sided) {
            const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
            worst = std::max(worst, testing::max_abs_difference(bf, r.solution, true));
            ++cases;
            continue;
        }
        BSVIESolution s;
        if (uses_y) {
            s = picard_type1(pr.phi, pr.f, w, *proj, tight_picard()).solution;
        } else {
            s = solve_type1_noY(pr.phi, pr.f, w, *proj);
        }
        complete_M(s, 0, w, *proj);
        worst = std::max(worst, testing::max_abs_difference(bf, s, true));
        ++cases;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << cases << " tree presets, max abs err " << worst << ", " << dt << " s";
    return {worst <= 1e-12 && dt < 10.0, os.str()};
}

Verdict ode_oracle() {
    double err[3];
    const std::size_t ns[3] = {500, 1000, 2000};
    for (int k = 0; k < 3; ++k) {
        PresetParams pp;
        pp.steps = ns[k];
        const Problem pr = build_preset("ode-exp", pp);
        const auto proj = make_projector(*pr.world);
        PicardOptions o;
        o.tol = 1e-13;
        o.max_iter = 400;
        const PicardResult r = picard_type1(pr.phi, pr.f, *pr.world, *proj, o);
        err[k] = std::abs(r.solution.Y[0][0] - std::numbers::e);
    }
    const double r1 = err[0] / err[1];
    const double r2 = err[1] / err[2];
    std::ostringstream os;
    os << "|Y0 - e| = " << err[0] << ", " << err[1] << ", " << err[2] << "; ratios " << r1 << ", " << r2;
    const bool first_order = std::abs(r1 - 2.0) < 0.1 && std::abs(r2 - 2.0) < 0.1;
    return {err[2] <= 5e-3 && first_order, os.str()};
}

Verdict m_solution() {
    double worst = 0.0;
    for (const auto& [name, steps] : {std::pair<std::string, std::size_t>{"type2-linear", 3}, {"extra-noise-M", 2}}) {
        const Problem pr = make(name, steps);
        const auto proj = make_projector(*pr.world);
        const Type2Result r = solve_type2(pr.phi, pr.f, *pr.world, *proj);
        worst = std::max(worst, msolution_residual(r.solution, *pr.world, *proj));
    }
    {
        const Problem pr = make("lipschitz-standard", 3);
        const auto proj = make_projector(*pr.world);
        BSVIESolution s = picard_type1(pr.phi, pr.f, *pr.world, *proj, tight_picard()).solution;
        complete_M(s, 0, *pr.world, *proj);
        worst = std::max(worst, msolution_residual(s, *pr.world, *proj));
    }
    const Problem pr = make("extra-noise-M", 2);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
    double m = 0.0, eps = 0.0;
    for (const auto& row : r.solution.cells) {
        for (const Cell& c : row) {
            for (double x : c.m) {
                m = std::max(m, std::abs(x));
            }
        }
    }
    for (std::size_t j = 1; j <= w.steps(); ++j) {
        for (double e : w.eps(j)) {
            eps = std::max(eps, std::abs(e));
        }
    }
    std::ostringstream os;
    os << "max residual " << worst << ", max |M| " << m << " vs eps scale " << eps;
    return {worst <= 1e-12 && m >= 0.1 * eps, os.str()};
}

Verdict duality() {
    const Problem pr = make("duality-linear", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
        FSVIECoefficients k;
        k.a0 = [a, b](double t, double s) { return a * std::cos(t - s) + b * s; };
        k.a1 = [c](double t, double s) { return c * (1.0 + 0.5 * t * s); };
        k.jump = [d](double t, double s, std::size_t) { return d * std::cos(t + s); };
        k.bound = 2.0;
        k.derivative_bound = 2.0;
        worst = std::max(worst, std::abs(duality_gap(pr.psi, pr.phi, k, w, *proj).gap));
    }
    PresetParams pp;
    pp.world = WorldChoice::ensemble;
    pp.n_paths = 10000;
    pp.seed = 1;
    const Problem mc = build_preset("duality-linear", pp);
    const auto mproj = make_projector(*mc.world);
    const DualityReport r = duality_gap(mc.psi, mc.phi, *mc.coeff, *mc.world, *mproj);
    const double z = std::abs(r.gap) / r.standard_error;
    std::ostringstream os;
    os << "tree max gap " << worst << " over 20 draws; ensemble gap " << r.gap << " = " << z << " SE";
    return {worst <= 1e-12 && z <= 3.0, os.str()};
}

Verdict comparison() {
    const Problem sp = make("comparison-sandwich", 4);
    const World& w = *sp.world;
    const auto proj = make_projector(w);
    const SandwichData& d = *sp.sandwich;
    const MonotoneReport m = monotone_picard(d.phi1, d.phi2, d.phi_bar, d.f1, d.f2, d.f_bar, w, *proj);
    const std::size_t sandwich = compare_solutions(w, m.y1.Y, m.y_bar.Y).violations +
                                 compare_solutions(w, m.y_bar.Y, m.y2.Y).violations;

    const Problem pp = make("comparison-partition", 8);
    const auto pproj = make_projector(*pp.world);
    const PartitionComparisonReport r = partition_comparison(*pp.linear, *pp.world, *pproj, {1, 2, 4, 8});
    std::size_t negative = 0;
    for (std::size_t n : r.negative) {
        negative += n;
    }
    bool decreasing = r.errors.size() == 4;
    for (std::size_t k = 1; k < r.errors.size(); ++k) {
        decreasing = decreasing && r.errors[k] < r.errors[k - 1];
    }
    std::ostringstream os;
    os << "sandwich violations " << sandwich << ", partition violations " << r.direct.violations << " (negative "
       << negative << "), errors";
    for (double e : r.errors) {
        os << " " << e;
    }
    return {sandwich == 0 && r.direct.violations == 0 && negative == 0 && decreasing, os.str()};
}

Verdict picard_contraction() {
    std::ostringstream os;
    bool ok = true;
    for (const WorldChoice wc : {WorldChoice::tree, WorldChoice::ensemble}) {
        PresetParams pp;
        pp.steps = 4;
        pp.world = wc;
        pp.n_paths = 2000;
        const Problem pr = build_preset("lipschitz-standard", pp);
        const World& w = *pr.world;
        const auto proj = make_projector(w);
        const double tol = wc == WorldChoice::tree ? 1e-10 : 1e-6;
        const auto plan = make_interval_plan(w, pr.f.K());
        PicardOptions o;
        o.tol = tol;
        const PicardResult r = picard_type1(pr.phi, pr.f, w, *proj, o);
        double worst_ratio = 0.0;
        for (std::size_t k = 2; k < r.gaps.size(); ++k) {
            worst_ratio = std::max(worst_ratio, r.gaps[k] / r.gaps[k - 1]);
        }
        const double final_gap = r.gaps.empty() ? 0.0 : r.gaps.back();
        ok = ok && r.converged && worst_ratio < 1.0 && final_gap <= tol && plan.size() >= 2;
        os << (wc == WorldChoice::tree ? "tree" : "ensemble") << ": " << r.iterations << " its, max ratio "
           << worst_ratio << ", final " << final_gap << "; ";
    }
    return {ok, os.str()};
}

Verdict regularity() {
    const Problem pr = build_preset("holder-regularity");
    const auto proj = make_projector(*pr.world);
    const BSVIESolution s = solve_type1_noY(pr.phi, pr.f, *pr.world, *proj);
    const HolderFit fit = regularity_estimate(s.Y, *pr.world, 4.0);
    const double need = 0.8 * 0.5 * 4.0;

    PresetParams tp;
    tp.steps = 5;
    tp.world = WorldChoice::tree;
    tp.with_jumps = true;
    const Problem tr = build_preset("holder-regularity", tp);
    const auto tproj = make_projector(*tr.world);
    const BSVIESolution ts = solve_type1_noY(tr.phi, tr.f, *tr.world, *tproj);
    const CadlagReport c = cadlag_report(ts, tr.phi, *tr.world);
    std::ostringstream os;
    os << "exponent " << fit.exponent << " (SE " << fit.standard_error << ", need " << need << "); tree jumps "
       << c.jumps << ", unexplained " << c.unexplained;
    return {fit.exponent >= need && c.jumps > 0 && c.unexplained == 0, os.str()};
}

Verdict degeneracy() {
    double worst = 0.0;
    for (std::size_t steps : {2u, 3u}) {
        const Problem pr = make("lipschitz-standard", steps);
        const World& w = *pr.world;
        const auto proj = make_projector(w);
        GeneratorSpec f = pr.f;
        f.eval = [](const World& world, const DriverPoint& q) {
            double v = 0.5 * std::sin(q.y) + 0.3 * q.z + 0.5 * std::cos(world.clock().times[q.s]);
            for (std::size_t k = 0; k < q.u.size(); ++k) {
                v += 0.2 * world.jumps().intensities[k] * q.u[k];
            }
            return v;
        };
        const Values& xi = pr.phi.phi.back();
        const PicardResult r = picard_type1(constant_free_term(w, xi), f, w, *proj, tight_picard());
        const BSDESolution b = solve_bsde(xi, f, w, *proj);
        for (std::size_t i = 0; i <= steps; ++i) {
            for (std::size_t a = 0; a < w.atoms(i); ++a) {
                worst = std::max(worst, std::abs(r.solution.Y[i][a] - b.Y[i][a]));
            }
        }
    }
    std::ostringstream os;
    os << "max |Y_bsvie - Y_bsde| " << worst;
    return {worst <= 1e-12, os.str()};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"constants closed forms", closed_forms},
        {"constants asymptotics", asymptotics},
        {"well-posedness thresholds", thresholds},
        {"oracle equivalence on trees", oracle_equivalence},
        {"ode oracle and first-order decay", ode_oracle},
        {"M-solution identity", m_solution},
        {"duality", duality},
        {"comparison", comparison},
        {"picard contraction", picard_contraction},
        {"regularity", regularity},
        {"degeneracy to the BSDE", degeneracy},
    };
    int failures = 0;
    int n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
