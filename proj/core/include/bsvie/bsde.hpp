#pragma once

#include "bsvie/conditional.hpp"
#include "bsvie/generator.hpp"

#include <string>
#include <vector>

namespace bsvie {

struct SolveOptions {
    /// Implicit in y: Y_i = E_i[Y_{i+1}] + f(t_i, Y_i, Z_i, U_i) dB_i, solved by fixed point.
    bool implicit = true;
    int inner_max = 200;
    double inner_tol = 1e-15;
};

/// Discrete BSDE solution. Level i values for Y, Z, U; M[i] holds the orthogonal
/// increment of step i on level i+1. Entries before `from_step` are empty.
struct BSDESolution {
    std::size_t from_step = 0;
    std::vector<Values> Y;
    std::vector<Values> Z;
    std::vector<std::vector<Values>> U;
    std::vector<Values> M;
    std::vector<std::string> warnings;
    int max_inner_iterations = 0;
};

/// Backward scheme for Y(t) = xi + int_t^T f(s, Y, Z, U) dB_s - int Z dW - int U dpi - int dM.
/// The driver is evaluated with t = s.
BSDESolution solve_bsde(const Values& xi, const GeneratorSpec& f, const World& world, const Projector& proj,
                        const SolveOptions& opts = {});

/// Parametrized BSDE lambda(t, .) with the driver frozen at outer time t_index, run from the
/// final step back to `stop_step`. The driver receives y = lambda(t, s) itself.
BSDESolution solve_parametrized(std::size_t t_index, const Values& phi_t, const GeneratorSpec& f, const World& world,
                                const Projector& proj, std::size_t stop_step = 0, const SolveOptions& opts = {});

/// Parametrized BSDE on [stop_step, end_step] with terminal value on level end_step.
BSDESolution solve_parametrized_window(std::size_t t_index, const Values& terminal, std::size_t end_step,
                                       const GeneratorSpec& f, const World& world, const Projector& proj,
                                       std::size_t stop_step = 0, const SolveOptions& opts = {});

/// Max pathwise residual of Y_{i+1} - Y_i + f dB_i - Z dW_i - U dpi_i - M_i over all steps.
double bsde_residual(const BSDESolution& sol, std::size_t t_index, const GeneratorSpec& f, const World& world,
                     bool driver_at_s = false);

struct AprioriReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
    bool finite = true;
};

/// E[sup|Y|^p + (sum Z^2 dB)^{p/2} + (sum |U|^2 dN)^{p/2} + [M]^{p/2}] against E[|xi|^p + (sum |f0| dB)^p].
AprioriReport bsde_apriori_check(const BSDESolution& sol, const Values& xi, const GeneratorSpec& f, const World& world,
                                 double p);

}  // namespace bsvie
