#pragma once

#include "bsvie/bsvie.hpp"

#include <vector>

namespace bsvie::testing {

/// Node-by-node solution of a discrete equation on a tree, found without the library solvers.
///
/// Every value, integrand and orthogonal increment of every node is an unknown. The
/// pathwise one-step identities and the orthogonality of M to (1, dW, dpi) at each parent
/// form one dense nonlinear system, solved by Newton with a finite-difference Jacobian.
struct BruteForceSolution {
    std::vector<Values> Y;
    /// Same layout as BSVIESolution::cells; a BSDE uses row 0 only.
    std::vector<std::vector<Cell>> cells;
    std::size_t unknowns = 0;
    int newton_iterations = 0;
    double residual = 0.0;
};

/// Y_j = E_j Y_{j+1} + f(j, j, Y_j, Z_j, U_j) dB_j with Y_N = xi.
BruteForceSolution brute_force_bsde(const Values& xi, const GeneratorSpec& f, const World& world);

/// M-solution of Y(t) = Phi(t) + sum_{j>=t} f(t, j, Y(j), Z(t,j), Z(j,t), U(t,j), U(j,t)) dB_j - ...,
/// with the lower region given by the martingale representation of every Y(i) from time 0.
BruteForceSolution brute_force_bsvie(const FreeTerm& phi, const GeneratorSpec& f, const World& world);

/// Largest absolute difference over Y and both regions of the integrand grid.
double max_abs_difference(const BruteForceSolution& oracle, const BSVIESolution& sol, bool lower_region);
double max_abs_difference(const BruteForceSolution& oracle, const BSDESolution& sol);

}  // namespace bsvie::testing
