#include "bsvie/clock.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bsvie {

std::vector<double> uniform_grid(double horizon, std::size_t steps) {
    if (steps == 0 || !(horizon > 0.0)) {
        throw DomainError("uniform grid needs steps >= 1 and horizon > 0");
    }
    std::vector<double> g(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        g[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    }
    g.back() = horizon;
    return g;
}

Clock build_clock(const ClockSpec& spec) {
    const auto& g = spec.grid;
    if (g.size() < 2) {
        throw DomainError("clock grid needs at least two points");
    }
    if (g.front() != 0.0) {
        throw DomainError("clock grid must start at 0");
    }
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (!(g[i + 1] > g[i])) {
            throw DomainError("clock grid must be strictly increasing (index " + std::to_string(i + 1) + ")");
        }
    }
    if (!(spec.b_rate >= 0.0)) {
        throw DomainError("clock b_rate must be nonnegative");
    }
    const std::size_t n = g.size() - 1;
    if (spec.alpha.size() != 1 && spec.alpha.size() != n) {
        throw DomainError("clock alpha must have one value or one per interval");
    }

    Clock c;
    c.times = g;
    c.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.alpha[i] = spec.alpha.size() == 1 ? spec.alpha[0] : spec.alpha[i];
        if (!(c.alpha[i] > 0.0)) {
            throw DomainError("clock alpha must be positive (interval " + std::to_string(i) + ")");
        }
    }

    std::vector<double> jump(n, 0.0);
    for (const auto& [time, size] : spec.b_jumps) {
        if (!(size > 0.0)) {
            throw DomainError("clock jump sizes must be positive");
        }
        auto it = std::find_if(g.begin() + 1, g.end(), [&](double x) { return std::abs(x - time) <= 1e-12 * (1.0 + std::abs(time)); });
        if (it == g.end()) {
            throw DomainError("clock jump time must be a grid point after 0");
        }
        jump[static_cast<std::size_t>(it - g.begin()) - 1] += size;
    }

    c.B.assign(n + 1, 0.0);
    c.A.assign(n + 1, 0.0);
    double frak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double db = spec.b_rate * (g[i + 1] - g[i]) + jump[i];
        const double a2 = c.alpha[i] * c.alpha[i];
        c.B[i + 1] = c.B[i] + db;
        c.A[i + 1] = c.A[i] + a2 * db;
        frak = std::max(frak, a2 * jump[i]);
    }
    c.frak_f = JumpBound(frak);
    c.ito = spec.b_jumps.empty() && spec.b_rate == 1.0;
    return c;
}

Clock ito_clock(double horizon, std::size_t steps, double alpha) {
    ClockSpec s;
    s.grid = uniform_grid(horizon, steps);
    s.alpha = {alpha};
    return build_clock(s);
}

}  // namespace bsvie
