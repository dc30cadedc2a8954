#pragma once

#include "bsvie/bsvie.hpp"

#include <vector>

namespace bsvie::detail {

inline constexpr std::size_t kKeepT = static_cast<std::size_t>(-1);

/// Driver for outer time t (kKeepT leaves the caller's t) with y and/or the reversed integrands read from frozen data.
///
/// When `y` is given, the y argument is y[s] at the evaluation atom. When `rev` is given,
/// Z(s,t) and U(s,t) are read from rev->cells[s][t] on level t; for s == t that is the
/// diagonal cell of the equation region.
GeneratorSpec wrap_driver(const GeneratorSpec& f, std::size_t t, const std::vector<Values>* y, const BSVIESolution* rev);

/// Copy the integrands of a parametrized BSDE into cells[t][j] for j in [lo, hi).
void store_cells(BSVIESolution& sol, std::size_t t, const BSDESolution& lambda, std::size_t lo, std::size_t hi);

std::vector<Values> constant_family(const World& w, double c);

}  // namespace bsvie::detail
