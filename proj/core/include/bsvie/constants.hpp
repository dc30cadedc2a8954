#pragma once

#include <string>
#include <string_view>

namespace bsvie {

/// Uniform bound on the jumps of the clock A. Zero encodes a continuous clock.
class JumpBound {
public:
    constexpr JumpBound() = default;
    explicit JumpBound(double frak_f);

    [[nodiscard]] double value() const noexcept { return value_; }
    [[nodiscard]] bool continuous() const noexcept { return value_ == 0.0; }

private:
    double value_ = 0.0;
};

/// Pi(gamma, delta) = 11/delta + 9 exp((gamma - delta) f) / (gamma - delta), for 0 < delta < gamma.
double eval_pi(double gamma, double delta, JumpBound f);

/// kappa(delta) for the existence condition of the single-jump BSDE.
///
/// Evaluated in the algebraically equivalent form
///   9/delta + (2 + 9 delta)(s + 2)/delta^2 * exp(1 - 2/(a + s)),  a = delta f, s = sqrt(a^2 + 4),
/// which is free of the 0/0 at f = 0 and of cancellation for large delta f.
double eval_kappa(double delta, JumpBound f);

/// Minimiser of delta -> Pi(beta, delta) on ((beta - 1/f)^+, beta).
double solve_delta_star(double beta, JumpBound f);

/// Residual of the first order condition at x, normalised by the size of its two terms.
double delta_star_residual(double beta, double x, JumpBound f);

/// M(beta) = Pi(beta, delta*(beta)).
double eval_M(double beta, JumpBound f);

struct Sigmas {
    double sigma = 0.0;
    double sigma_tilde = 0.0;
};

/// Sigma = 2M/(1-2M) and Sigma~ = Sigma exp((beta - delta*) f)/(beta - delta*). Requires M < 1/2.
Sigmas eval_sigmas(double beta, JumpBound f);

enum class Condition { type1, type1_noY, type2 };

std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view name);

struct WellPosednessConstants {
    double beta = 0.0;
    JumpBound frak_f;
    double delta_star = 0.0;
    double kappa = 0.0;
    double big_m = 0.0;
    /// NaN when big_m >= 1/2.
    double sigma = 0.0;
    double sigma_tilde = 0.0;
    /// (16 + exp((beta - delta*) f)/(beta - delta*)) * sigma; NaN when big_m >= 1/2.
    double type2_value = 0.0;
    bool type1_ok = false;
    bool type1_noY_ok = false;
    bool type2_ok = false;

    [[nodiscard]] bool admissible(Condition c) const;
};

WellPosednessConstants check_type1(double beta, JumpBound f);
WellPosednessConstants check_type2(double beta, JumpBound f);

/// Limits of the constants as beta -> infinity for fixed f.
struct AsymptoticLimits {
    double kappa = 0.0;        ///< 9 e f
    double big_m = 0.0;        ///< 9 e f
    double sigma = 0.0;        ///< 18 e f / (1 - 18 e f), NaN if 18 e f >= 1
    double sigma_tilde = 0.0;  ///< 18 (e f)^2 / (1 - 18 e f)
    double type2_value = 0.0;  ///< (16 + e f) * sigma
};

AsymptoticLimits asymptotic_limits(JumpBound f);
bool asymptotically_admissible(Condition c, JumpBound f);

struct MinBetaResult {
    double beta = 0.0;
    /// False when a scan above beta found a point where the condition fails.
    bool monotone = true;
    double first_failure = 0.0;
};

/// Infimum of the admissible tail [beta, inf) to relative tolerance 1e-9.
/// Throws DomainError("never admissible") if the large-beta limit of the condition fails.
MinBetaResult min_beta(Condition c, JumpBound f);

/// Largest f for which the condition holds at beta_probe, by bisection on f.
/// With a large probe this recovers the asymptotic admissibility boundary.
double admissibility_boundary(Condition c, double beta_probe = 1e9);

}  // namespace bsvie
