#pragma once

#include "bsvie/constants.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace bsvie {

/// Description of a deterministic clock before validation.
struct ClockSpec {
    std::vector<double> grid;
    /// Absolutely continuous rate of B (1 gives the Ito clock B(t) = t).
    double b_rate = 1.0;
    /// Point masses of B as (time, size); each time must be a grid point t_i with i >= 1,
    /// the mass is attributed to the interval ending at that point.
    std::vector<std::pair<double, double>> b_jumps;
    /// One value per interval, or a single value used for every interval.
    std::vector<double> alpha{1.0};
};

/// Deterministic clock on a grid t_0 = 0 < ... < t_N = T.
struct Clock {
    std::vector<double> times;
    std::vector<double> B;
    std::vector<double> alpha;
    std::vector<double> A;
    /// Largest jump contribution alpha^2 * dB to A.
    JumpBound frak_f;
    /// True when B(t) = t.
    bool ito = true;

    [[nodiscard]] std::size_t steps() const noexcept { return times.size() - 1; }
    [[nodiscard]] double horizon() const noexcept { return times.back(); }
    [[nodiscard]] double dt(std::size_t i) const { return times[i + 1] - times[i]; }
    [[nodiscard]] double dB(std::size_t i) const { return B[i + 1] - B[i]; }
    [[nodiscard]] double dA(std::size_t i) const { return A[i + 1] - A[i]; }
};

Clock build_clock(const ClockSpec& spec);

/// Uniform grid with B(t) = t and constant alpha.
Clock ito_clock(double horizon, std::size_t steps, double alpha = 1.0);

std::vector<double> uniform_grid(double horizon, std::size_t steps);

}  // namespace bsvie
