#include "bsvie/constants.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bsvie {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First order condition written in the gap d = beta - x, which keeps
// full precision when the root sits next to beta.
double foc(double beta, double d, double f) {
    return 11.0 * d * d - 9.0 * std::exp(d * f) * (beta - d) * (beta - d) * (1.0 - f * d);
}

double foc_scale(double beta, double d, double f) {
    return 11.0 * d * d + 9.0 * std::exp(d * f) * (beta - d) * (beta - d) * std::abs(1.0 - f * d);
}

double solve_gap(double beta, double f) {
    // The condition is positive at d_max, where beta - d or 1 - f d vanishes.
    const double d_max = f > 0.0 ? std::min(beta, 1.0 / f) : beta;
    double a = std::min(1e-12 * beta, 0.5 * d_max);
    double b = d_max;
    double ga = foc(beta, a, f);
    double gb = foc(beta, b, f);
    if (!(ga < 0.0 && gb > 0.0)) {
        throw ConvergenceError("delta*: bracket does not change sign");
    }
    // Safeguarded secant: take the secant point when it lands well inside the
    // bracket, and bisect after any step that failed to halve it.
    bool bisect = false;
    for (int it = 0; it < 400; ++it) {
        const double width = b - a;
        double m = 0.5 * (a + b);
        const double s = b - gb * (b - a) / (gb - ga);
        if (!bisect && std::isfinite(s) && s > a + 0.05 * width && s < b - 0.05 * width) {
            m = s;
        }
        const double gm = foc(beta, m, f);
        if (gm == 0.0) {
            return m;
        }
        if (gm < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
        bisect = b - a > 0.5 * width;
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(b, 1e-300)) {
            break;
        }
    }
    return std::abs(ga) < std::abs(gb) ? a : b;
}

void require_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError("beta must be positive and finite");
    }
}

}  // namespace

JumpBound::JumpBound(double frak_f) : value_(frak_f) {
    if (!(frak_f >= 0.0) || !std::isfinite(frak_f)) {
        throw DomainError("jump bound must be finite and nonnegative");
    }
}

double eval_pi(double gamma, double delta, JumpBound f) {
    if (!(delta > 0.0) || !(delta < gamma)) {
        throw DomainError("eval_pi requires 0 < delta < gamma");
    }
    const double gap = gamma - delta;
    return 11.0 / delta + 9.0 * std::exp(gap * f.value()) / gap;
}

double eval_kappa(double delta, JumpBound f) {
    if (!(delta > 0.0)) {
        throw DomainError("eval_kappa requires delta > 0");
    }
    const double a = delta * f.value();
    const double s = std::sqrt(a * a + 4.0);
    return 9.0 / delta + (2.0 + 9.0 * delta) * (s + 2.0) / (delta * delta) * std::exp(1.0 - 2.0 / (a + s));
}

double solve_delta_star(double beta, JumpBound f) {
    require_beta(beta);
    return beta - solve_gap(beta, f.value());
}

double delta_star_residual(double beta, double x, JumpBound f) {
    const double d = beta - x;
    return std::abs(foc(beta, d, f.value())) / foc_scale(beta, d, f.value());
}

double eval_M(double beta, JumpBound f) {
    require_beta(beta);
    const double d = solve_gap(beta, f.value());
    return 11.0 / (beta - d) + 9.0 * std::exp(d * f.value()) / d;
}

Sigmas eval_sigmas(double beta, JumpBound f) {
    require_beta(beta);
    const double d = solve_gap(beta, f.value());
    const double m = 11.0 / (beta - d) + 9.0 * std::exp(d * f.value()) / d;
    if (!(m < 0.5)) {
        throw DomainError("M >= 1/2");
    }
    Sigmas out;
    out.sigma = 2.0 * m / (1.0 - 2.0 * m);
    out.sigma_tilde = out.sigma * std::exp(d * f.value()) / d;
    return out;
}

std::string_view to_string(Condition c) {
    switch (c) {
    case Condition::type1: return "type1";
    case Condition::type1_noY: return "type1_noY";
    case Condition::type2: return "type2";
    }
    return "?";
}

Condition condition_from_string(std::string_view name) {
    if (name == "type1") return Condition::type1;
    if (name == "type1_noY" || name == "type1-noY" || name == "type1_noy") return Condition::type1_noY;
    if (name == "type2") return Condition::type2;
    throw ValidationError("unknown condition '" + std::string(name) + "' (expected type1, type1_noY or type2)");
}

bool WellPosednessConstants::admissible(Condition c) const {
    switch (c) {
    case Condition::type1: return type1_ok;
    case Condition::type1_noY: return type1_noY_ok;
    case Condition::type2: return type2_ok;
    }
    return false;
}

WellPosednessConstants check_type1(double beta, JumpBound f) {
    require_beta(beta);
    WellPosednessConstants w;
    w.beta = beta;
    w.frak_f = f;
    const double d = solve_gap(beta, f.value());
    w.delta_star = beta - d;
    w.kappa = eval_kappa(w.delta_star, f);
    w.big_m = 11.0 / w.delta_star + 9.0 * std::exp(d * f.value()) / d;
    if (w.big_m < 0.5) {
        const double e = std::exp(d * f.value()) / d;
        w.sigma = 2.0 * w.big_m / (1.0 - 2.0 * w.big_m);
        w.sigma_tilde = w.sigma * e;
        w.type2_value = (16.0 + e) * w.sigma;
    } else {
        w.sigma = w.sigma_tilde = w.type2_value = kNaN;
    }
    const bool base = w.kappa < 0.5 && w.big_m < 0.5;
    w.type1_noY_ok = base;
    w.type1_ok = base && w.sigma_tilde < 1.0;
    w.type2_ok = base && w.type2_value < 1.0;
    return w;
}

WellPosednessConstants check_type2(double beta, JumpBound f) {
    return check_type1(beta, f);
}

AsymptoticLimits asymptotic_limits(JumpBound f) {
    const double ef = std::numbers::e * f.value();
    AsymptoticLimits l;
    l.kappa = 9.0 * ef;
    l.big_m = 9.0 * ef;
    if (18.0 * ef < 1.0) {
        l.sigma = 18.0 * ef / (1.0 - 18.0 * ef);
        l.sigma_tilde = ef * l.sigma;
        l.type2_value = (16.0 + ef) * l.sigma;
    } else {
        l.sigma = l.sigma_tilde = l.type2_value = kNaN;
    }
    return l;
}

bool asymptotically_admissible(Condition c, JumpBound f) {
    const AsymptoticLimits l = asymptotic_limits(f);
    const bool base = l.kappa < 0.5 && l.big_m < 0.5;
    switch (c) {
    case Condition::type1_noY: return base;
    case Condition::type1: return base && l.sigma_tilde < 1.0;
    case Condition::type2: return base && l.type2_value < 1.0;
    }
    return false;
}

MinBetaResult min_beta(Condition c, JumpBound f) {
    if (!asymptotically_admissible(c, f)) {
        throw DomainError("never admissible: the large-beta limit of " + std::string(to_string(c)) +
                          " fails for this jump bound");
    }
    auto holds = [&](double beta) { return check_type1(beta, f).admissible(c); };

    double hi = 1.0;
    while (!holds(hi)) {
        hi *= 2.0;
        if (hi > 1e15) {
            throw ConvergenceError("min_beta: no admissible beta found below 1e15");
        }
    }
    double lo = hi;
    while (holds(lo)) {
        lo *= 0.5;
        if (lo < 1e-12) {
            return {lo, true, 0.0};
        }
    }
    while ((hi - lo) > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
    }

    MinBetaResult r;
    r.beta = hi;
    // Diagnostic scan for non-monotone admissibility above the threshold.
    constexpr int kScan = 400;
    for (int k = 1; k <= kScan; ++k) {
        const double b = hi * std::pow(1e4, static_cast<double>(k) / kScan);
        if (!holds(b)) {
            r.monotone = false;
            r.first_failure = b;
            break;
        }
    }
    return r;
}

double admissibility_boundary(Condition c, double beta_probe) {
    require_beta(beta_probe);
    auto holds = [&](double f) { return check_type1(beta_probe, JumpBound(f)).admissible(c); };
    double lo = 0.0;
    double hi = 1.0 / (18.0 * std::numbers::e);
    if (!holds(lo)) {
        throw DomainError("condition fails at f = 0 for this probe beta");
    }
    while (holds(hi)) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace bsvie
