#pragma once

#include "bsvie/bsvie.hpp"
#include "bsvie/constants.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsvie {

/// Components of the S^p norm of a BSVIE solution over outer times [from, to).
///
/// Inner integrals are taken pathwise on the leaves and raised to p/2. The U part
/// comes in two forms: against the counting measure (pi) and against its
/// compensator (mu); for p = 2 they agree in expectation.
struct NormReport {
    double p = 2.0;
    std::optional<double> beta;
    double y_part = 0.0;
    double z_part = 0.0;
    double u_part_pi = 0.0;
    double u_part_mu = 0.0;
    double m_part = 0.0;
    /// Lower region parts, present when the solution carries an M-solution completion.
    double z_lower = 0.0;
    double u_lower = 0.0;
    double m_lower = 0.0;

    [[nodiscard]] double total() const noexcept { return y_part + z_part + u_part_mu + m_part; }
};

/// With `beta`, outer weights are exp(beta A_t) dA_t and inner ones exp(beta A_s);
/// otherwise dB_t and 1. `to` defaults to the horizon.
NormReport norm_Sp(const BSVIESolution& sol, const World& world, double p, std::optional<double> beta = std::nullopt,
                   std::size_t from = 0, std::optional<std::size_t> to = std::nullopt);

struct AprioriCheck {
    double lhs = 0.0;
    double rhs_phi = 0.0;
    double rhs_f = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
    /// Reference constant c with the check lhs <= c (rhs_phi + rhs_f); absent without constants.
    std::optional<double> constant;
    bool violated = false;
};

/// Solution norm against the data norm E sum |Phi|^p + E sum (sum |f0|^2 / alpha^2 dB)^{p/2}.
///
/// With constants the p = 2 weights are those of the weighted Type-I estimate:
/// exp(beta A_t) dA_t for Y and Phi, exp((beta - delta*) A_t) dA_t outside and exp(delta* A_s)
/// inside the integrand terms. The reference constant is then delta* Sigma / 2.
AprioriCheck apriori_check(const BSVIESolution& sol, const FreeTerm& phi, const GeneratorSpec& f, const World& world,
                           std::optional<WellPosednessConstants> constants = std::nullopt, double p = 2.0);

struct StabilityReport {
    double lhs = 0.0;
    double rhs_phi = 0.0;
    double rhs_f = 0.0;
    double ratio = 0.0;
    /// max |Y1 - Y2| over all atoms and outer times.
    double y_sup_gap = 0.0;
};

/// Distance of two solutions against the data distance. The driver gap is the
/// larger of |f1 - f2| frozen at either solution, so the report is symmetric.
StabilityReport stability_gap(const BSVIESolution& sol1, const BSVIESolution& sol2, const FreeTerm& phi1,
                              const FreeTerm& phi2, const GeneratorSpec& f1, const GeneratorSpec& f2, const World& world,
                              double p = 2.0);

struct ComparisonStats {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_violation = 0.0;
    std::size_t worst_step = 0;
    std::size_t worst_atom = 0;
};

/// Counts atoms with Y1 > Y2 + tol over outer times [from, N].
ComparisonStats compare_solutions(const World& world, const std::vector<Values>& y1, const std::vector<Values>& y2,
                                  double tol = 1e-12, std::size_t from = 0);

/// Data of two Type-I BSVIEs with drivers g^i(t, s, y) + h z + sum_k lambda_k kappa_k u_k.
struct LinearComparisonData {
    FreeTerm phi1;
    FreeTerm phi2;
    std::function<double(const World&, std::size_t t, std::size_t s, std::size_t atom, double y)> g1;
    std::function<double(const World&, std::size_t t, std::size_t s, std::size_t atom, double y)> g2;
    double h = 0.0;
    std::vector<double> kappa;
    /// Lipschitz constant of g^i in y.
    double lip_y = 1.0;
};

GeneratorSpec linear_comparison_driver(const LinearComparisonData& d, int which);

struct PartitionComparisonReport {
    std::vector<std::size_t> blocks;
    std::vector<double> errors;            ///< ||Y^Pi - (Y2 - Y1)|| per partition
    std::vector<double> min_value;         ///< min of Y^Pi per partition
    std::vector<std::size_t> negative;     ///< atoms with Y^Pi < -tol per partition
    ComparisonStats direct;                ///< Y1 <= Y2 checked directly
    std::vector<std::string> failed_hypotheses;
};

/// Partition scheme for the comparison of two linear BSVIEs: the difference equation
/// is solved with the free term and the linearised coefficient frozen at the left
/// endpoint of each block, for each requested number of uniform blocks.
PartitionComparisonReport partition_comparison(const LinearComparisonData& d, const World& world, const Projector& proj,
                                               const std::vector<std::size_t>& block_counts, double tol = 1e-12);

/// Kernels of the linear forward equation, as functions of (t, s) in time units.
struct FSVIECoefficients {
    std::function<double(double, double)> a0;
    std::function<double(double, double)> a1;
    std::function<double(double, double, std::size_t)> jump;
    double bound = 0.0;
    double derivative_bound = 0.0;
};

/// X(t_i) = Psi(t_i) + sum_{j<i} X(t_j) (A0 dB_j + A1 dW_j + sum_k A(.,k) dpi_{j,k}), level i.
std::vector<Values> solve_fsvie(const std::vector<Values>& psi, const FSVIECoefficients& coeff, const World& world);

/// Adjoint Type-II driver: A0(s,t) y + A1(s,t) Z(s,t) + sum_k A(s,t,k) U(s,t) lambda_k, zero on the diagonal.
GeneratorSpec adjoint_driver(const FSVIECoefficients& coeff, const World& world);

struct DualityReport {
    double backward_pairing = 0.0;   ///< E sum dB <Psi, Y>
    double forward_pairing = 0.0;    ///< E sum dB <X, Phi>
    double gap = 0.0;
    /// Standard error of the pathwise difference of the two pairings; zero on trees.
    double standard_error = 0.0;
    Type2Result adjoint;
};

DualityReport duality_gap(const std::vector<Values>& psi, const FreeTerm& phi, const FSVIECoefficients& coeff,
                          const World& world, const Projector& proj, const Type2Options& opts = {});

struct HolderFit {
    double p = 2.0;
    double exponent = 0.0;
    double standard_error = 0.0;
    std::vector<double> lags;     ///< in time units
    std::vector<double> moments;  ///< mean of E|Y(t+h) - Y(t)|^p over t
    bool flat = false;
};

/// Least squares slope of log E|Y(t + h) - Y(t)|^p against log h over dyadic lags.
/// Throws DomainError when fewer than `min_scales` (at least 4) lags are available.
HolderFit regularity_estimate(const std::vector<Values>& y, const World& world, double p, std::size_t min_scales = 5);

struct CadlagReport {
    std::size_t checked = 0;
    std::size_t jumps = 0;
    std::size_t unexplained = 0;
    /// (step, child atom) of every detected jump.
    std::vector<std::pair<std::size_t, std::size_t>> locations;
};

/// Locates the steps where Y moves by more than its continuous part allows and checks
/// that each one sits on a jump of a mark or of the extra noise.
///
/// The one-step residual removes the conditional mean, the diagonal Brownian term and the
/// martingale increment of the data; what remains is compared with c times the largest
/// drift of Y per unit of clock, times dB.
CadlagReport cadlag_report(const BSVIESolution& sol, const FreeTerm& phi, const World& world, double c = 2.0);

struct ExpBoundReport {
    double beta = 0.0;
    /// Slacks are divided by max(1, rhs).
    double min_slack_value = 0.0;       ///< min of rhs - e^{beta t}|Y(t)|^2
    double min_slack_integrands = 0.0;  ///< min of rhs - weighted integrand energy
    std::size_t checked = 0;
};

/// Nodewise check of the exponential bounds for a driver f(t, s) free of (y, z, u).
/// The driver weight is taken at the right end of each step.
ExpBoundReport exp_bound_check(const FreeTerm& phi, const GeneratorSpec& f, const World& world, const Projector& proj,
                               double beta);

}  // namespace bsvie
