#include "bsvie/constants.hpp"
#include "bsvie/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bsvie;

namespace {

const double kSqrt11 = std::sqrt(11.0);

/// Long double evaluation of kappa straight from its defining expression.
long double naive_kappa(long double delta, long double f) {
    const long double r = std::sqrt(delta * delta * f * f + 4.0L);
    return 9.0L / delta + f * f * (2.0L + 9.0L * delta) / (r - 2.0L) * std::exp((delta * f + 2.0L - r) / 2.0L);
}

/// Plain bisection on the first order condition in x = delta, long double.
long double bisect_delta_star(long double beta, long double f) {
    auto g = [&](long double x) {
        const long double d = beta - x;
        return 11.0L * d * d - 9.0L * std::exp(d * f) * x * x * (1.0L - f * d);
    };
    long double lo = f > 0 ? std::max(0.0L, beta - 1.0L / f) : 0.0L;
    long double hi = beta;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        (g(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

}  // namespace

TEST_SUITE("constants") {

TEST_CASE("pi at hand-computed points") {
    CHECK(eval_pi(2.0, 1.0, JumpBound(0.0)) == doctest::Approx(20.0).epsilon(1e-15));
    const long double expect = 11.0L / 0.5L + 9.0L * std::exp(0.1L);
    CHECK(std::abs(eval_pi(1.5, 0.5, JumpBound(0.1)) - static_cast<double>(expect)) < 1e-13);
    CHECK_THROWS_AS(eval_pi(1.0, 1.0, JumpBound(0.0)), DomainError);
    CHECK_THROWS_AS(eval_pi(1.0, 0.0, JumpBound(0.0)), DomainError);
}

TEST_CASE("kappa matches the defining expression and its f = 0 limit") {
    for (double delta : {0.5, 3.0, 50.0, 91.36}) {
        const double limit = 9.0 / delta + 4.0 * (2.0 + 9.0 * delta) / (delta * delta);
        CHECK(eval_kappa(delta, JumpBound(0.0)) == doctest::Approx(limit).epsilon(1e-14));
        for (double f : {1e-3, 0.01, 0.2, 2.0}) {
            const auto ref = static_cast<double>(naive_kappa(delta, f));
            CHECK(eval_kappa(delta, JumpBound(f)) == doctest::Approx(ref).epsilon(1e-11));
        }
        // Continuity across tiny jump bounds, where the direct form is 0/0.
        CHECK(eval_kappa(delta, JumpBound(1e-9)) == doctest::Approx(limit).epsilon(1e-6));
    }
    CHECK(eval_kappa(91.36, JumpBound(0.0)) == doctest::Approx(0.4935).epsilon(1e-4));
    const double big = 1e7;
    CHECK(eval_kappa(big, JumpBound(0.0)) * big == doctest::Approx(45.0).epsilon(1e-5));
}

TEST_CASE("closed forms at f = 0") {
    for (double beta : {10.0, 100.0, 1000.0, 3.0 + kSqrt11}) {
        const double ds = kSqrt11 * beta / (3.0 + kSqrt11);
        CHECK(std::abs(solve_delta_star(beta, JumpBound(0.0)) - ds) <= 1e-12 * ds);
        const double m = (kSqrt11 + 3.0) * (kSqrt11 + 3.0) / beta;
        CHECK(std::abs(eval_M(beta, JumpBound(0.0)) - m) <= 1e-12 * m);
    }
    CHECK(eval_M((kSqrt11 + 3.0) * (kSqrt11 + 3.0), JumpBound(0.0)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("delta* agrees with an independent bisection and minimises pi") {
    for (double f : {0.001, 0.01, 0.03, 0.5}) {
        for (double beta : {20.0, 100.0, 1000.0}) {
            const JumpBound jb(f);
            const double x = solve_delta_star(beta, jb);
            const auto ref = static_cast<double>(bisect_delta_star(beta, f));
            CHECK(std::abs(x - ref) <= 1e-11 * beta);
            CAPTURE(beta);
            CAPTURE(f);
            // x is the best representable root: no nearby double does much better.
            double best = delta_star_residual(beta, x, jb);
            double probe = x;
            for (int k = 0; k < 10; ++k) {
                probe = std::nextafter(probe, 0.0);
                best = std::min(best, delta_star_residual(beta, probe, jb));
            }
            probe = x;
            for (int k = 0; k < 10; ++k) {
                probe = std::nextafter(probe, beta);
                best = std::min(best, delta_star_residual(beta, probe, jb));
            }
            CHECK(delta_star_residual(beta, x, jb) <= std::max(1e-12, 10.0 * best));
            const double m = eval_M(beta, jb);
            for (int k = 1; k < 50; ++k) {
                const double d = beta * k / 50.0;
                CHECK(eval_pi(beta, d, jb) >= m * (1.0 - 1e-12));
            }
            for (double rel : {1e-3, 1e-6}) {
                const double h = rel * std::min(x, beta - x);
                CHECK(eval_pi(beta, x - h, jb) >= m * (1.0 - 1e-15));
                CHECK(eval_pi(beta, x + h, jb) >= m * (1.0 - 1e-15));
            }
        }
    }
}

TEST_CASE("delta* for beta 100 and f 0.01 sits far below the (90, 100) window") {
    const double x = solve_delta_star(100.0, JumpBound(0.01));
    CHECK(x == doctest::Approx(static_cast<double>(bisect_delta_star(100.0L, 0.01L))).epsilon(1e-12));
    CHECK(x < 90.0);
}

TEST_CASE("M decreases in beta") {
    for (double f : {0.0, 0.01}) {
        double prev = eval_M(1.0, JumpBound(f));
        for (double beta = 2.0; beta < 1e5; beta *= 1.7) {
            const double m = eval_M(beta, JumpBound(f));
            CHECK(m < prev);
            prev = m;
        }
    }
}

TEST_CASE("sigmas") {
    const Sigmas s = eval_sigmas(174.0, JumpBound(0.0));
    CHECK(s.sigma == doctest::Approx(0.847).epsilon(1e-3));
    CHECK(s.sigma_tilde == doctest::Approx(0.0103).epsilon(1e-2));
    // M = 1/4 at f = 0 when beta = 4 (sqrt 11 + 3)^2.
    const double beta = 4.0 * (kSqrt11 + 3.0) * (kSqrt11 + 3.0);
    CHECK(eval_sigmas(beta, JumpBound(0.0)).sigma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval_sigmas(10.0, JumpBound(0.0)), DomainError);
}

TEST_CASE("large beta limits") {
    for (double f : {0.001, 0.01, 0.03}) {
        const double ef = std::numbers::e * f;
        CHECK(std::abs(eval_M(1e6, JumpBound(f)) - 9.0 * ef) <= 0.01 * 9.0 * ef);
    }
    const double f = 0.001;
    const double ef = std::numbers::e * f;
    const double limit = 18.0 * ef * ef / (1.0 - 18.0 * ef);
    CHECK(std::abs(eval_sigmas(1e7, JumpBound(f)).sigma_tilde - limit) <= 0.01 * limit);
    CHECK(asymptotic_limits(JumpBound(f)).sigma_tilde == doctest::Approx(limit).epsilon(1e-14));
}

TEST_CASE("well-posedness flags") {
    CHECK(check_type1(174.0, JumpBound(0.0)).type1_ok);
    CHECK_FALSE(check_type1(80.0, JumpBound(0.0)).type1_ok);
    CHECK(check_type1(80.0, JumpBound(0.0)).kappa > 0.5);
    CHECK(check_type2(1360.0, JumpBound(0.0)).type2_ok);
    CHECK_FALSE(check_type2(1356.0, JumpBound(0.0)).type2_ok);
    CHECK_FALSE(check_type2(100.0, JumpBound(0.0)).type2_ok);
    const WellPosednessConstants c = check_type2(1357.0, JumpBound(0.0));
    CHECK(c.type2_value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_FALSE(asymptotically_admissible(Condition::type1, JumpBound(1.0 / (18.0 * std::numbers::e))));
}

TEST_CASE("minimal beta and admissibility boundaries") {
    const MinBetaResult t1 = min_beta(Condition::type1, JumpBound(0.0));
    CHECK(t1.beta >= 171.0);
    CHECK(t1.beta <= 174.0);
    CHECK(t1.monotone);
    CHECK_FALSE(check_type1(0.999 * t1.beta, JumpBound(0.0)).type1_ok);
    CHECK(check_type1(1.001 * t1.beta, JumpBound(0.0)).type1_ok);
    // The type1 threshold at f = 0 is the kappa root 0.5 d^2 - 45 d - 8 = 0 pulled back through delta*.
    const double droot = 45.0 + std::sqrt(45.0 * 45.0 + 16.0);
    CHECK(t1.beta == doctest::Approx(droot * (3.0 + kSqrt11) / kSqrt11).epsilon(1e-8));

    const MinBetaResult t2 = min_beta(Condition::type2, JumpBound(0.0));
    CHECK(t2.beta >= 1356.0);
    CHECK(t2.beta <= 1358.0);

    const double b1 = admissibility_boundary(Condition::type1);
    CHECK(std::abs(18.0 * std::numbers::e * b1 - 3.0 * (kSqrt11 - 3.0)) <= 1e-6);
    const double b2 = admissibility_boundary(Condition::type2);
    CHECK(std::abs(std::numbers::e * b2 - 1.0 / (3.0 * (51.0 + std::sqrt(2603.0)))) <= 1e-4);

    CHECK_THROWS_AS(min_beta(Condition::type1, JumpBound(1.0 / (18.0 * std::numbers::e))), DomainError);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(JumpBound(-1.0), DomainError);
    CHECK_THROWS_AS(solve_delta_star(0.0, JumpBound(0.0)), DomainError);
    CHECK_THROWS_AS(condition_from_string("type3"), ValidationError);
    CHECK(condition_from_string("type1_noY") == Condition::type1_noY);
}

}
