#pragma once

#include "bsvie/bsde.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bsvie {

/// Free term Phi(t_i), i = 0..N, each an F_T-measurable variable on the final level.
struct FreeTerm {
    std::vector<Values> phi;
    /// Hoelder data E|Phi(t) - Phi(t')|^p <= rho |t - t'|^{alpha p}, when known.
    std::optional<double> holder_alpha;
    std::optional<double> holder_rho;
};

/// Phi(t) = xi for every grid time.
FreeTerm constant_free_term(const World& w, const Values& xi);

/// Integrands of the pair (t_i, s_j): z and u on level j, m on level j+1.
struct Cell {
    Values z;
    std::vector<Values> u;
    Values m;

    [[nodiscard]] bool empty() const noexcept { return z.empty(); }
};

/// Y(t_i) on level i and the two-parameter grid of integrands.
///
/// cells[i][j] with j >= i is the equation region (the diagonal is stored there);
/// j < i is filled by the martingale representation of Y(t_i) for M-solutions.
struct BSVIESolution {
    std::vector<Values> Y;
    std::vector<std::vector<Cell>> cells;
    /// First outer time covered by the equation.
    std::size_t from = 0;
    /// Representation start when the lower region has been completed.
    std::optional<std::size_t> lower_from;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t steps() const noexcept { return Y.empty() ? 0 : Y.size() - 1; }
    [[nodiscard]] const Cell& cell(std::size_t i, std::size_t j) const { return cells[i][j]; }
    [[nodiscard]] Cell& cell(std::size_t i, std::size_t j) { return cells[i][j]; }
};

BSVIESolution empty_solution(const World& w);

/// Type-I BSVIE whose driver does not read y: Y(t) = lambda(t, t) from one parametrized BSDE per t.
BSVIESolution solve_type1_noY(const FreeTerm& phi, const GeneratorSpec& h, const World& world, const Projector& proj,
                              std::size_t from = 0, const SolveOptions& opts = {});

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 200;
    /// Initial guess y_0; constant over all atoms and times.
    double init = 0.0;
    /// Weight exp(beta A_t) dA_t in the stopping norm (step clocks); dB_t when absent.
    std::optional<double> beta;
    SolveOptions inner;
    /// Throw ConvergenceError instead of returning an unconverged result.
    bool throw_on_failure = false;
};

struct PicardResult {
    BSVIESolution solution;
    std::vector<double> gaps;
    bool converged = false;
    int iterations = 0;
};

/// Fixed point of y -> Y, where Y solves the Type-I BSVIE with driver f(t, s, y(s), z, u).
PicardResult picard_type1(const FreeTerm& phi, const GeneratorSpec& f, const World& world, const Projector& proj,
                          const PicardOptions& opts = {});

/// Weighted gap sqrt(E sum_{i<N} w_i |Y1(t_i) - Y2(t_i)|^2) from step `from`.
double solution_gap(const World& w, const std::vector<Values>& y1, const std::vector<Values>& y2,
                    std::optional<double> beta = std::nullopt, std::size_t from = 0);

/// Fill cells[i][j], j in [S, i), from the martingale representation of Y(t_i), i in [S, N].
void complete_M(BSVIESolution& sol, std::size_t S, const World& world, const Projector& proj);

struct SFIEResult {
    std::size_t R = 0;
    std::size_t S = 0;
    /// psi[t - R] = lambda(t, S) on level S.
    std::vector<Values> psi;
    /// cells[t - R][j - S] for j in [S, N).
    std::vector<std::vector<Cell>> cells;
};

/// psi^S(t) = Phi(t) + int_S^T h(t, s, Z(t,s), U(t,s)) dB_s - ... for t in [R, S].
SFIEResult solve_sfie(const FreeTerm& phi, const GeneratorSpec& h, std::size_t R, std::size_t S, const World& world,
                      const Projector& proj, const SolveOptions& opts = {});

struct Type2Options {
    /// Block boundaries 0 = b_0 < ... < b_K = N; derived from K and C when empty.
    std::vector<std::size_t> plan;
    double plan_constant = 1.0;
    double tol = 1e-13;
    int max_outer = 200;
    int max_bisections = 8;
    SolveOptions inner;
};

struct Type2Result {
    BSVIESolution solution;
    std::vector<std::size_t> plan;
    std::vector<int> outer_iterations;   ///< per block, in solve order
    std::vector<std::vector<double>> gaps;
    int bisections = 0;
    bool converged = true;
};

/// Block boundaries with sub-interval length at most 1/(2 C K^2).
std::vector<std::size_t> make_interval_plan(const World& w, double K, double C = 1.0);

/// Type-II M-solution, solved block by block from the right.
Type2Result solve_type2(const FreeTerm& phi, const GeneratorSpec& f, const World& world, const Projector& proj,
                        const Type2Options& opts = {});

/// Max pathwise residual of the defining equation on the equation region, over all t < N.
double equation_residual(const BSVIESolution& sol, const FreeTerm& phi, const GeneratorSpec& f, const World& world);

/// Max residual of Y(t) = E_S Y(t) + sum_{j in [S,t)} (Z dW + U dpi + M)(t, j) over t >= S, S >= lower_from.
double msolution_residual(const BSVIESolution& sol, const World& world, const Projector& proj);

struct MonotoneReport {
    std::vector<std::vector<Values>> from_above;  ///< iterates started from Y2
    std::vector<std::vector<Values>> from_below;  ///< iterates started from Y1
    std::size_t increasing_steps = 0;             ///< violations of the decrease from above
    std::size_t decreasing_steps = 0;             ///< violations of the increase from below
    double max_violation = 0.0;
    double limit_gap = 0.0;                       ///< distance of the last iterate to the f_bar solution
    std::size_t sandwich_checked = 0;
    BSVIESolution y1, y2, y_bar;
};

/// Monotone iteration Y~_k = noY solve with driver f_bar(t, s, Y~_{k-1}(s), z, u), from Y~_0 = Y2,
/// and the mirrored sequence from Y1. Throws DomainError when the ordering of the data
/// (f1 <= f_bar <= f2, Phi1 <= Phi_bar <= Phi2, f_bar nondecreasing in y) fails a spot check.
MonotoneReport monotone_picard(const FreeTerm& phi1, const FreeTerm& phi2, const FreeTerm& phi_bar,
                               const GeneratorSpec& f1, const GeneratorSpec& f2, const GeneratorSpec& f_bar,
                               const World& world, const Projector& proj, int iterations = 30, double tol = 1e-12);

/// Driver with y frozen to a given family Y(s) (level s).
GeneratorSpec freeze_y(const GeneratorSpec& f, const std::vector<Values>& y);

}  // namespace bsvie
