#include "bsvie/conditional.hpp"
#include "bsvie/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace bsvie;

namespace {

World small_tree(bool extra) {
    JumpMeasureSpec j;
    j.marks = {1.0, -0.5};
    j.intensities = {0.8, 0.4};
    TreeSpec spec;
    spec.extra_noise = extra;
    return World::tree(ito_clock(1.0, 3), j, spec);
}

Values leaf_function(const World& w) {
    const std::size_t n = w.steps();
    Values v(w.atoms(n));
    for (std::size_t x = 0; x < v.size(); ++x) {
        v[x] = std::sin(w.W(n)[x]) + w.N(n, 0)[x] * w.N(n, 1)[x] + 0.3 * w.E(n)[x] * w.W(n)[x];
    }
    return v;
}

}  // namespace

TEST_SUITE("conditional") {

TEST_CASE("tree conditional expectation equals the weighted average over descendants") {
    for (bool extra : {false, true}) {
        const World w = small_tree(extra);
        const auto proj = make_projector(w);
        const Values v = leaf_function(w);
        for (std::size_t i = 0; i <= 3; ++i) {
            const Values e = proj->condexp(v, 3, i);
            REQUIRE(e.size() == w.atoms(i));
            Values manual(w.atoms(i), 0.0);
            Values mass(w.atoms(i), 0.0);
            for (std::size_t x = 0; x < w.atoms(3); ++x) {
                const std::size_t a = w.ancestor(3, x, i);
                manual[a] += w.prob(3)[x] * v[x];
                mass[a] += w.prob(3)[x];
            }
            for (std::size_t a = 0; a < e.size(); ++a) {
                CHECK(e[a] == doctest::Approx(manual[a] / mass[a]).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("one-step decomposition is orthogonal and reconstructs the variable") {
    const World w = small_tree(true);
    const auto proj = make_projector(w);
    const Values v = leaf_function(w);
    const Values v2 = proj->condexp(v, 3, 2);
    const StepDecomposition d = proj->step(v2, 1);
    for (std::size_t a = 0; a < w.atoms(1); ++a) {
        double m0 = 0.0, mw = 0.0, mp0 = 0.0, mp1 = 0.0;
        for (std::size_t c = 0; c < w.branching(); ++c) {
            const std::size_t x = a * w.branching() + c;
            const double q = w.cond_prob(2, x);
            const double rebuilt =
                d.mean[a] + d.z[a] * w.dW(2)[x] + d.u[0][a] * w.dpi(2, 0)[x] + d.u[1][a] * w.dpi(2, 1)[x] + d.m_incr[x];
            CHECK(rebuilt == doctest::Approx(v2[x]).epsilon(1e-13));
            m0 += q * d.m_incr[x];
            mw += q * d.m_incr[x] * w.dW(2)[x];
            mp0 += q * d.m_incr[x] * w.dpi(2, 0)[x];
            mp1 += q * d.m_incr[x] * w.dpi(2, 1)[x];
        }
        CHECK(std::abs(m0) < 1e-13);
        CHECK(std::abs(mw) < 1e-13);
        CHECK(std::abs(mp0) < 1e-13);
        CHECK(std::abs(mp1) < 1e-13);
    }
}

TEST_CASE("martingale part of a variable in the span of the noise has no orthogonal component") {
    const World w = small_tree(false);
    const auto proj = make_projector(w);
    const std::size_t n = w.steps();
    Values v(w.atoms(n));
    for (std::size_t x = 0; x < v.size(); ++x) {
        v[x] = 2.0 * w.W(n)[x] - 3.0 * w.N(n, 1)[x];
    }
    const OrthoDecomposition d = represent(*proj, v, n, 0);
    CHECK(reconstruction_error(w, d, v) < 1e-13);
    CHECK(d.mean[0] == doctest::Approx(-3.0 * 0.4).epsilon(1e-13));
    for (const StepDecomposition& s : d.steps) {
        for (double z : s.z) {
            CHECK(z == doctest::Approx(2.0).epsilon(1e-13));
        }
        for (double u : s.u[1]) {
            CHECK(u == doctest::Approx(-3.0).epsilon(1e-13));
        }
        for (double m : s.m_incr) {
            CHECK(std::abs(m) < 1e-13);
        }
    }
}

TEST_CASE("extra noise produces a nonzero orthogonal increment") {
    const World w = small_tree(true);
    const auto proj = make_projector(w);
    const std::size_t n = w.steps();
    const OrthoDecomposition d = represent(*proj, w.E(n), n, 0);
    CHECK(reconstruction_error(w, d, w.E(n)) < 1e-13);
    double biggest = 0.0;
    for (const StepDecomposition& s : d.steps) {
        for (double m : s.m_incr) {
            biggest = std::max(biggest, std::abs(m));
        }
    }
    CHECK(biggest > 0.1);
}

TEST_CASE("indicator regression on a tree-shaped ensemble reproduces the tree") {
    const World t = small_tree(false);
    const World e = World::from_tree(t);
    EngineSpec spec;
    spec.kind = EngineKind::regression;
    spec.basis.node_indicators = true;
    const auto pe = make_projector(e, spec);
    const auto pt = make_projector(t);
    const Values v = leaf_function(t);
    for (std::size_t i = 0; i < 3; ++i) {
        const Values et = pt->condexp(v, 3, i);
        const Values ee = pe->condexp(v, 3, i);
        for (std::size_t x = 0; x < e.atoms(3); ++x) {
            CHECK(ee[x] == doctest::Approx(et[t.ancestor(3, x, i)]).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("monomial regression is exact for variables in the span of the basis") {
    EnsembleSpec es;
    es.n_paths = 2000;
    es.seed = 5;
    JumpMeasureSpec j;
    j.marks = {1.0};
    j.intensities = {1.0};
    const World w = World::ensemble(ito_clock(1.0, 4), j, es);
    const auto proj = make_projector(w);
    CHECK(proj->diagnostics().engine.size() > 0);
    Values v(w.atoms(4));
    for (std::size_t x = 0; x < v.size(); ++x) {
        const double a = w.W(2)[x];
        const double b = w.N(2, 0)[x];
        v[x] = 1.0 + 2.0 * a - a * a + 0.5 * a * b;
    }
    const Values e = proj->condexp(v, 4, 2);
    for (std::size_t x = 0; x < v.size(); ++x) {
        CHECK(e[x] == doctest::Approx(v[x]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("engine selection") {
    const World t = small_tree(false);
    CHECK(default_engine(t).kind == EngineKind::exact_tree);
    EnsembleSpec es;
    es.n_paths = 50;
    const World e = World::ensemble(ito_clock(1.0, 2), {}, es);
    CHECK(default_engine(e).kind == EngineKind::regression);
    CHECK_THROWS(make_projector(e, EngineSpec{}));
}

}
