#include "bsvie/analysis.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bsvie {

HolderFit regularity_estimate(const std::vector<Values>& y, const World& w, double p, std::size_t min_scales) {
    const std::size_t n = w.steps();
    if (y.size() != n + 1) {
        throw DomainError("regularity_estimate: one variable per grid time is required");
    }
    if (!(p >= 1.0)) {
        throw DomainError("regularity_estimate requires p >= 1");
    }
    min_scales = std::max<std::size_t>(min_scales, 4);
    const auto& t = w.clock().times;
    HolderFit fit;
    fit.p = p;
    for (std::size_t h = 1; 2 * h <= n; h *= 2) {
        double moment = 0.0, lag = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i + h <= n; ++i) {
            const Values lifted = w.lift(y[i], i, i + h);
            const Values& pr = w.prob(i + h);
            double e = 0.0;
            for (std::size_t a = 0; a < pr.size(); ++a) {
                e += pr[a] * std::pow(std::abs(y[i + h][a] - lifted[a]), p);
            }
            moment += e;
            lag += t[i + h] - t[i];
            ++count;
        }
        fit.lags.push_back(lag / static_cast<double>(count));
        fit.moments.push_back(moment / static_cast<double>(count));
    }
    if (fit.lags.size() < min_scales) {
        throw DomainError("regularity_estimate: fewer than " + std::to_string(min_scales) + " probe scales");
    }
    const double top = *std::max_element(fit.moments.begin(), fit.moments.end());
    if (!(top > 1e-28) || std::any_of(fit.moments.begin(), fit.moments.end(), [](double v) { return !(v > 0.0); })) {
        fit.flat = true;
        return fit;
    }
    const std::size_t k = fit.lags.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += std::log(fit.lags[i]);
        my += std::log(fit.moments[i]);
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = std::log(fit.lags[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.moments[i]) - my);
    }
    fit.exponent = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = std::log(fit.moments[i]) - my - fit.exponent * (std::log(fit.lags[i]) - mx);
        rss += r * r;
    }
    fit.standard_error = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
    return fit;
}

CadlagReport cadlag_report(const BSVIESolution& sol, const FreeTerm& phi, const World& w, double c) {
    if (!w.is_tree()) {
        throw DomainError("cadlag_report requires a tree world");
    }
    const std::size_t n = w.steps();
    const std::size_t m = w.marks();
    const std::size_t b = w.branching();
    const Values& leaf_prob = w.prob(n);
    const std::size_t leaves = w.atoms(n);
    // Drift scale: the largest one-step conditional drift of Y per unit of clock.
    double scale = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double db = w.clock().dB(t);
        if (!(db > 0.0)) {
            continue;
        }
        for (std::size_t a = 0; a < w.atoms(t); ++a) {
            double mean = 0.0;
            for (std::size_t c2 = 0; c2 < b; ++c2) {
                mean += w.cond_prob(t + 1, a * b + c2) * sol.Y[t + 1][a * b + c2];
            }
            scale = std::max(scale, std::abs(mean - sol.Y[t][a]) / db);
        }
    }
    scale += 1.0;
    CadlagReport r;
    for (std::size_t t = 0; t < n; ++t) {
        const double db = w.clock().dB(t);
        const std::size_t below = leaves / w.atoms(t + 1);
        for (std::size_t a = 0; a < w.atoms(t); ++a) {
            // E_t and E_{t+1} of the data increment Phi(t+1) - Phi(t).
            auto data_mean = [&](std::size_t lo, std::size_t hi) {
                double num = 0.0, den = 0.0;
                for (std::size_t leaf = lo; leaf < hi; ++leaf) {
                    num += leaf_prob[leaf] * (phi.phi[t + 1][leaf] - phi.phi[t][leaf]);
                    den += leaf_prob[leaf];
                }
                return num / den;
            };
            const double data_parent = data_mean(a * b * below, (a + 1) * b * below);
            double mean = 0.0;
            for (std::size_t c2 = 0; c2 < b; ++c2) {
                mean += w.cond_prob(t + 1, a * b + c2) * sol.Y[t + 1][a * b + c2];
            }
            const double zd = sol.cells[t][t].z[a];
            for (std::size_t c2 = 0; c2 < b; ++c2) {
                const std::size_t x = a * b + c2;
                const double data = data_mean(x * below, (x + 1) * below) - data_parent;
                const double r0 = sol.Y[t + 1][x] - mean - zd * w.dW(t + 1)[x] - data;
                const double allowance = c * scale * db + 1e-12;
                ++r.checked;
                if (std::abs(r0) <= allowance) {
                    continue;
                }
                ++r.jumps;
                r.locations.emplace_back(t, x);
                bool noise = w.extra_noise() && w.eps(t + 1)[x] != 0.0;
                for (std::size_t k = 0; k < m && !noise; ++k) {
                    noise = w.dN(t + 1, k)[x] > 0.0;
                }
                if (!noise) {
                    ++r.unexplained;
                }
            }
        }
    }
    return r;
}

}  // namespace bsvie
