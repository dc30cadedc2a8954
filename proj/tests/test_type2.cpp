#include "bsvie/bsvie.hpp"
#include "bsvie/errors.hpp"
#include "bsvie/presets.hpp"

#include "brute_force.hpp"

#include <doctest.h>

#include <cmath>

using namespace bsvie;

namespace {

Problem tree_preset(const std::string& name, std::size_t steps) {
    PresetParams pp;
    pp.steps = steps;
    return build_preset(name, pp);
}

double max_abs_m(const BSVIESolution& s) {
    double m = 0.0;
    for (const auto& row : s.cells) {
        for (const Cell& c : row) {
            for (double x : c.m) {
                m = std::max(m, std::abs(x));
            }
        }
    }
    return m;
}

}  // namespace

TEST_SUITE("type2") {

TEST_CASE("interval plan respects the block length and is as coarse as allowed") {
    const World w = World::deterministic(ito_clock(1.0, 10));
    const auto plan = make_interval_plan(w, 2.0, 1.0);
    const auto& t = w.clock().times;
    REQUIRE(plan.front() == 0);
    REQUIRE(plan.back() == 10);
    const double len = 1.0 / 8.0;
    for (std::size_t k = 1; k < plan.size(); ++k) {
        CHECK(plan[k] > plan[k - 1]);
        const bool single_step = plan[k] == plan[k - 1] + 1;
        CHECK((t[plan[k]] - t[plan[k - 1]] <= len + 1e-15 || single_step));
        if (plan[k - 1] > 0) {
            CHECK(t[plan[k]] - t[plan[k - 1] - 1] > len);
        }
    }
    CHECK(make_interval_plan(w, 0.0).size() == 2);
    CHECK_THROWS_AS(make_interval_plan(w, 1.0, 0.0), DomainError);
}

TEST_CASE("linear two-sided driver agrees with brute force") {
    const Problem pr = tree_preset("type2-linear", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
    REQUIRE(r.converged);
    const testing::BruteForceSolution bf = testing::brute_force_bsvie(pr.phi, pr.f, w);
    CHECK(bf.residual < 1e-13);
    CHECK(testing::max_abs_difference(bf, r.solution, true) <= 1e-12);
    CHECK(equation_residual(r.solution, pr.phi, pr.f, w) <= 1e-12);
    CHECK(msolution_residual(r.solution, w, *proj) <= 1e-12);
}

TEST_CASE("extra noise: brute force agreement and a nonzero orthogonal martingale") {
    const Problem pr = tree_preset("extra-noise-M", 2);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
    REQUIRE(r.converged);
    const testing::BruteForceSolution bf = testing::brute_force_bsvie(pr.phi, pr.f, w);
    CHECK(testing::max_abs_difference(bf, r.solution, true) <= 1e-12);
    CHECK(msolution_residual(r.solution, w, *proj) <= 1e-12);
    double eps_scale = 0.0;
    for (std::size_t j = 1; j <= w.steps(); ++j) {
        for (double e : w.eps(j)) {
            eps_scale = std::max(eps_scale, std::abs(e));
        }
    }
    CHECK(max_abs_m(r.solution) >= 0.1 * eps_scale);
}

TEST_CASE("block plans give the same M-solution") {
    const Problem pr = tree_preset("type2-linear", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    Type2Options one;
    one.plan = {0, 3};
    Type2Options three;
    three.plan = {0, 1, 2, 3};
    const Type2Result a = solve_type2(pr.phi, pr.f, w, *proj, one);
    const Type2Result b = solve_type2(pr.phi, pr.f, w, *proj, three);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(b.outer_iterations.size() == 3);
    for (std::size_t i = 0; i <= 3; ++i) {
        for (std::size_t x = 0; x < w.atoms(i); ++x) {
            CHECK(std::abs(a.solution.Y[i][x] - b.solution.Y[i][x]) <= 1e-12);
        }
    }
    Type2Options bad;
    bad.plan = {0, 2, 2, 3};
    CHECK_THROWS_AS(solve_type2(pr.phi, pr.f, w, *proj, bad), DomainError);
    bad.plan = {1, 3};
    CHECK_THROWS_AS(solve_type2(pr.phi, pr.f, w, *proj, bad), DomainError);
}

TEST_CASE("outer gaps shrink within each block") {
    const Problem pr = tree_preset("type2-linear", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
    for (const auto& g : r.gaps) {
        for (std::size_t k = 2; k < g.size(); ++k) {
            if (g[k - 1] > 1e-14) {
                CHECK(g[k] < g[k - 1]);
            }
        }
    }
}

TEST_CASE("a type1 driver solved as type2 reproduces picard") {
    const Problem pr = tree_preset("lipschitz-standard", 3);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    PicardOptions po;
    po.tol = 1e-15;
    po.max_iter = 400;
    const PicardResult p = picard_type1(pr.phi, pr.f, w, *proj, po);
    const Type2Result r = solve_type2(pr.phi, pr.f, w, *proj);
    for (std::size_t i = 0; i <= 3; ++i) {
        for (std::size_t x = 0; x < w.atoms(i); ++x) {
            CHECK(std::abs(p.solution.Y[i][x] - r.solution.Y[i][x]) <= 1e-12);
        }
    }
}

}
