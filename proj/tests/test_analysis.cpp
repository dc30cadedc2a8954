#include "bsvie/analysis.hpp"
#include "bsvie/errors.hpp"
#include "bsvie/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bsvie;

namespace {

Problem preset(const std::string& name, std::size_t steps, WorldChoice world = WorldChoice::preset_default,
               bool jumps = false) {
    PresetParams pp;
    pp.steps = steps;
    pp.world = world;
    pp.with_jumps = jumps;
    return build_preset(name, pp);
}

/// Deterministic two-step solution with Y = (2, 3, 0) and unit z on the equation region.
BSVIESolution hand_solution(const World& w) {
    BSVIESolution s = empty_solution(w);
    s.Y = {Values{2.0}, Values{3.0}, Values{0.0}};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = i; j < 2; ++j) {
            s.cells[i][j].z = {1.0};
            s.cells[i][j].m = {0.0};
        }
    }
    return s;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("norm components on a hand example") {
    const World w = World::deterministic(ito_clock(1.0, 2));
    const BSVIESolution s = hand_solution(w);
    const NormReport two = norm_Sp(s, w, 2.0);
    CHECK(two.y_part == doctest::Approx(6.5));
    CHECK(two.z_part == doctest::Approx(0.75));
    CHECK(two.m_part == 0.0);
    CHECK(two.total() == doctest::Approx(7.25));
    const NormReport four = norm_Sp(s, w, 4.0);
    CHECK(four.y_part == doctest::Approx(48.5));
    CHECK(four.z_part == doctest::Approx(0.625));
    const NormReport weighted = norm_Sp(s, w, 2.0, 1.0);
    const double e = std::exp(0.5);
    CHECK(weighted.y_part == doctest::Approx(0.5 * 4.0 + e * 0.5 * 9.0));
    CHECK(weighted.z_part == doctest::Approx(0.5 * (0.5 + e * 0.5) + e * 0.5 * e * 0.5));
    CHECK_THROWS_AS(norm_Sp(s, w, 1.0), DomainError);
    CHECK_THROWS_AS(norm_Sp(s, w, 2.0, std::nullopt, 2, 1), DomainError);
}

TEST_CASE("a priori estimate and stability report") {
    const Problem pr = preset("lipschitz-standard", 4);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const BSVIESolution s1 = picard_type1(pr.phi, pr.f, w, *proj).solution;
    const AprioriCheck plain = apriori_check(s1, pr.phi, pr.f, w);
    CHECK(plain.ratio > 0.0);
    CHECK_FALSE(plain.constant.has_value());
    const AprioriCheck weighted = apriori_check(s1, pr.phi, pr.f, w, check_type1(174.0, JumpBound(0.0)));
    REQUIRE(weighted.constant.has_value());
    CHECK_FALSE(weighted.violated);
    CHECK_THROWS_AS(apriori_check(s1, pr.phi, pr.f, w, check_type1(80.0, JumpBound(0.0))), DomainError);

    GeneratorSpec g = pr.f;
    g.eval = [f = pr.f](const World& world, const DriverPoint& q) { return f(world, q) + 0.1; };
    const BSVIESolution s2 = picard_type1(pr.phi, g, w, *proj).solution;
    const StabilityReport a = stability_gap(s1, s2, pr.phi, pr.phi, pr.f, g, w);
    const StabilityReport b = stability_gap(s2, s1, pr.phi, pr.phi, g, pr.f, w);
    CHECK(a.lhs == doctest::Approx(b.lhs).epsilon(1e-14));
    CHECK(a.rhs_f == doctest::Approx(b.rhs_f).epsilon(1e-14));
    CHECK(a.rhs_phi == 0.0);
    // sum over t_i of dB (0.1 (T - t_i))^2 on four steps
    CHECK(a.rhs_f == doctest::Approx(0.0046875).epsilon(1e-12));
    CHECK(a.y_sup_gap > 0.0);
    const StabilityReport same = stability_gap(s1, s1, pr.phi, pr.phi, pr.f, pr.f, w);
    CHECK(same.lhs == 0.0);
}

TEST_CASE("comparison counts") {
    const World w = World::deterministic(ito_clock(1.0, 1));
    const std::vector<Values> y1 = {Values{1.0}, Values{2.0}};
    const std::vector<Values> y2 = {Values{1.0}, Values{1.5}};
    const ComparisonStats s = compare_solutions(w, y1, y2);
    CHECK(s.checked == 2);
    CHECK(s.violations == 1);
    CHECK(s.max_violation == doctest::Approx(0.5));
    CHECK(s.worst_step == 1);
    CHECK(compare_solutions(w, y2, y1).violations == 0);
    CHECK(compare_solutions(w, y1, y2, 1e-12, 0).checked == 2);
}

TEST_CASE("sandwich comparison through monotone iterates") {
    const Problem pr = preset("comparison-sandwich", 4);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const SandwichData& d = *pr.sandwich;
    const MonotoneReport r = monotone_picard(d.phi1, d.phi2, d.phi_bar, d.f1, d.f2, d.f_bar, w, *proj);
    CHECK(r.increasing_steps == 0);
    CHECK(r.decreasing_steps == 0);
    CHECK(r.limit_gap < 1e-10);
    CHECK(compare_solutions(w, r.y1.Y, r.y_bar.Y).violations == 0);
    CHECK(compare_solutions(w, r.y_bar.Y, r.y2.Y).violations == 0);
    CHECK(compare_solutions(w, r.y2.Y, r.y1.Y).violations > 0);
    CHECK_THROWS_AS(monotone_picard(d.phi2, d.phi1, d.phi_bar, d.f1, d.f2, d.f_bar, w, *proj), DomainError);
    CHECK_THROWS_AS(monotone_picard(d.phi1, d.phi2, d.phi_bar, d.f2, d.f1, d.f_bar, w, *proj), DomainError);
}

TEST_CASE("partition comparison converges and preserves the order") {
    const Problem pr = preset("comparison-partition", 8);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const PartitionComparisonReport r = partition_comparison(*pr.linear, w, *proj, {1, 2, 4, 8});
    CHECK(r.failed_hypotheses.empty());
    CHECK(r.direct.violations == 0);
    REQUIRE(r.errors.size() == 4);
    for (std::size_t k = 1; k < 4; ++k) {
        CHECK(r.errors[k] < r.errors[k - 1]);
    }
    CHECK(r.errors.back() < 1e-12);
    for (std::size_t n : r.negative) {
        CHECK(n == 0);
    }
    CHECK_THROWS_AS(partition_comparison(*pr.linear, w, *proj, {16}), DomainError);
}

TEST_CASE("duality holds exactly on trees for random coefficients") {
    const Problem pr = preset("duality-linear", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int draw = 0; draw < 20; ++draw) {
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng), e = coef(rng);
        FSVIECoefficients k;
        k.a0 = [a, b](double t, double s) { return a * std::cos(t - s) + b * s; };
        k.a1 = [c](double t, double s) { return c * (1.0 + 0.5 * t * s); };
        k.jump = [d, e](double t, double s, std::size_t) { return d + e * std::sin(t + s); };
        k.bound = 2.0;
        k.derivative_bound = 2.0;
        const DualityReport r = duality_gap(pr.psi, pr.phi, k, w, *proj);
        CHECK(r.adjoint.converged);
        CHECK(std::abs(r.gap) <= 1e-12);
        CHECK(r.standard_error == 0.0);
    }
}

TEST_CASE("forward equation on a deterministic world is the explicit recursion") {
    const World w = World::deterministic(ito_clock(1.0, 4));
    FSVIECoefficients k;
    k.a0 = [](double t, double s) { return t - s; };
    k.a1 = [](double, double) { return 0.0; };
    k.jump = [](double, double, std::size_t) { return 0.0; };
    std::vector<Values> psi(5, Values{1.0});
    const std::vector<Values> x = solve_fsvie(psi, k, w);
    const auto& t = w.clock().times;
    for (std::size_t i = 0; i <= 4; ++i) {
        double expect = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            expect += x[j][0] * (t[i] - t[j]) * 0.25;
        }
        CHECK(x[i][0] == doctest::Approx(expect).epsilon(1e-15));
    }
}

TEST_CASE("hoelder fit on known paths") {
    const World d = World::deterministic(ito_clock(1.0, 64));
    std::vector<Values> lin(65);
    for (std::size_t i = 0; i <= 64; ++i) {
        lin[i] = {d.clock().times[i]};
    }
    const HolderFit f = regularity_estimate(lin, d, 2.0);
    CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(regularity_estimate(std::vector<Values>(lin.begin(), lin.begin() + 9),
                                        World::deterministic(ito_clock(1.0, 8)), 2.0),
                    DomainError);

    EnsembleSpec es;
    es.n_paths = 20000;
    es.seed = 3;
    const World w = World::ensemble(ito_clock(1.0, 64), {}, es);
    std::vector<Values> y(65);
    for (std::size_t i = 0; i <= 64; ++i) {
        y[i] = w.W(i);
    }
    const HolderFit g = regularity_estimate(y, w, 2.0);
    CHECK(std::abs(g.exponent - 1.0) < 0.05);
}

TEST_CASE("jumps of Y sit on jumps of the noise") {
    const Problem pr = preset("holder-regularity", 5, WorldChoice::tree, true);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const BSVIESolution s = solve_type1_noY(pr.phi, pr.f, w, *proj);
    const CadlagReport r = cadlag_report(s, pr.phi, w);
    CHECK(r.checked > 0);
    CHECK(r.jumps > 0);
    CHECK(r.unexplained == 0);
    for (const auto& [step, atom] : r.locations) {
        CHECK(w.dN(step + 1, 0)[atom] > 0.0);
    }
    const Problem cont = preset("holder-regularity", 5, WorldChoice::tree, false);
    const auto pc = make_projector(*cont.world);
    const BSVIESolution sc = solve_type1_noY(cont.phi, cont.f, *cont.world, *pc);
    CHECK(cadlag_report(sc, cont.phi, *cont.world).jumps == 0);
}

TEST_CASE("exponential bounds for a state-free driver") {
    const Problem pr = preset("holder-regularity", 4, WorldChoice::tree, true);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    GeneratorSpec f;
    f.eval = [](const World& world, const DriverPoint& q) {
        const auto& t = world.clock().times;
        return 0.1 * std::cos(t[q.s] - t[q.t]) + 0.2 * world.W(q.s)[q.atom];
    };
    for (double beta : {0.5, 2.0, 10.0}) {
        const ExpBoundReport r = exp_bound_check(pr.phi, f, w, *proj, beta);
        CHECK(r.checked > 0);
        CHECK(r.min_slack_value >= -1e-12);
        CHECK(r.min_slack_integrands >= -1e-12);
    }
    CHECK_THROWS_AS(exp_bound_check(pr.phi, pr.f, w, *proj, 1.0), DomainError);
    CHECK_THROWS_AS(exp_bound_check(pr.phi, f, w, *proj, 0.0), DomainError);
}

TEST_CASE("lipschitz spot check flags a misdeclared driver") {
    const Problem pr = preset("lipschitz-standard", 3);
    CHECK(spot_check_lipschitz(pr.f, *pr.world).violations == 0);
    GeneratorSpec bad = pr.f;
    bad.lip = {0.01, 0.01, 0.01};
    CHECK(spot_check_lipschitz(bad, *pr.world).violations > 0);
}

}
