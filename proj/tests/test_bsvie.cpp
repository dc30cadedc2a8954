#include "bsvie/bsvie.hpp"
#include "bsvie/errors.hpp"
#include "bsvie/presets.hpp"

#include "brute_force.hpp"

#include <doctest.h>

#include <cmath>

using namespace bsvie;

namespace {

PicardOptions tight() {
    PicardOptions o;
    o.tol = 1e-15;
    o.max_iter = 400;
    return o;
}

Problem tree_preset(const std::string& name, std::size_t steps) {
    PresetParams pp;
    pp.steps = steps;
    pp.world = WorldChoice::tree;
    return build_preset(name, pp);
}

}  // namespace

TEST_SUITE("bsvie") {

TEST_CASE("driver without y: parametrized solves agree with brute force on both regions") {
    const Problem pr = tree_preset("holder-regularity", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    BSVIESolution s = solve_type1_noY(pr.phi, pr.f, w, *proj);
    CHECK(equation_residual(s, pr.phi, pr.f, w) < 1e-13);
    complete_M(s, 0, w, *proj);
    const testing::BruteForceSolution bf = testing::brute_force_bsvie(pr.phi, pr.f, w);
    CHECK(bf.residual < 1e-13);
    CHECK(testing::max_abs_difference(bf, s, true) <= 1e-12);
    CHECK(msolution_residual(s, w, *proj) <= 1e-12);
}

TEST_CASE("picard fixed point agrees with brute force") {
    const Problem pr = tree_preset("lipschitz-standard", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    PicardResult r = picard_type1(pr.phi, pr.f, w, *proj, tight());
    CHECK(r.converged);
    complete_M(r.solution, 0, w, *proj);
    const testing::BruteForceSolution bf = testing::brute_force_bsvie(pr.phi, pr.f, w);
    CHECK(testing::max_abs_difference(bf, r.solution, true) <= 1e-12);
    CHECK(equation_residual(r.solution, pr.phi, pr.f, w) < 1e-12);
    for (std::size_t k = 2; k < r.gaps.size(); ++k) {
        if (r.gaps[k - 1] > 1e-14) {
            CHECK(r.gaps[k] < r.gaps[k - 1]);
        }
    }
}

TEST_CASE("linear ODE: discrete fixed point equals the implicit Euler product") {
    for (std::size_t n : {10u, 100u}) {
        const World w = World::deterministic(ito_clock(1.0, n));
        const auto proj = make_projector(w);
        const FreeTerm phi = constant_free_term(w, Values{1.0});
        GeneratorSpec f;
        f.uses_y = true;
        f.lip.varpi = 1.0;
        f.eval = [](const World&, const DriverPoint& p) { return p.y; };
        const PicardResult r = picard_type1(phi, f, w, *proj, tight());
        REQUIRE(r.converged);
        const double db = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i <= n; ++i) {
            const double expect = std::pow(1.0 - db, -static_cast<double>(n - i));
            CHECK(r.solution.Y[i][0] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("constant free term and time-free driver reduce to the BSDE") {
    const Problem pr = tree_preset("lipschitz-standard", 3);
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
    const FreeTerm phi = constant_free_term(w, xi);
    const PicardResult r = picard_type1(phi, f, w, *proj, tight());
    const BSDESolution b = solve_bsde(xi, f, w, *proj);
    for (std::size_t i = 0; i <= 3; ++i) {
        for (std::size_t a = 0; a < w.atoms(i); ++a) {
            CHECK(std::abs(r.solution.Y[i][a] - b.Y[i][a]) <= 1e-12);
        }
        for (std::size_t j = i; j < 3; ++j) {
            const Cell& c = r.solution.cell(i, j);
            for (std::size_t a = 0; a < w.atoms(j); ++a) {
                CHECK(std::abs(c.z[a] - b.Z[j][a]) <= 1e-12);
                CHECK(std::abs(c.u[0][a] - b.U[j][0][a]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("fredholm equation on a window matches parametrized BSDEs") {
    const Problem pr = tree_preset("holder-regularity", 4);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const SFIEResult r = solve_sfie(pr.phi, pr.f, 1, 3, w, *proj);
    REQUIRE(r.psi.size() == 3);
    for (std::size_t t = 1; t <= 3; ++t) {
        const BSDESolution b = solve_parametrized(t, pr.phi.phi[t], pr.f, w, *proj, 3);
        for (std::size_t a = 0; a < w.atoms(3); ++a) {
            CHECK(r.psi[t - 1][a] == doctest::Approx(b.Y[3][a]).epsilon(1e-14));
        }
        for (std::size_t a = 0; a < w.atoms(3); ++a) {
            CHECK(r.cells[t - 1][0].z[a] == doctest::Approx(b.Z[3][a]).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(solve_sfie(pr.phi, pr.f, 3, 1, w, *proj), DomainError);
}

TEST_CASE("solution gap on a hand example") {
    const World w = World::deterministic(ito_clock(2.0, 4));
    std::vector<Values> a(5, Values{1.0});
    std::vector<Values> b(5, Values{0.0});
    CHECK(solution_gap(w, a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK(solution_gap(w, a, b, std::nullopt, 2) == doctest::Approx(1.0));
    CHECK(solution_gap(w, a, a) == 0.0);
}

TEST_CASE("input checks") {
    const Problem pr = tree_preset("lipschitz-standard", 2);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    CHECK_THROWS_AS(solve_type1_noY(pr.phi, pr.f, w, *proj), DomainError);
    FreeTerm bad = pr.phi;
    bad.phi.pop_back();
    CHECK_THROWS_AS(picard_type1(bad, pr.f, w, *proj), DomainError);
    PicardOptions once;
    once.max_iter = 1;
    once.throw_on_failure = true;
    CHECK_THROWS_AS(picard_type1(pr.phi, pr.f, w, *proj, once), ConvergenceError);
    BSVIESolution s = picard_type1(pr.phi, pr.f, w, *proj).solution;
    CHECK_THROWS_AS(msolution_residual(s, w, *proj), DomainError);
}

}
