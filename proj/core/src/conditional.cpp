#include "bsvie/conditional.hpp"

#include "bsvie/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace bsvie {

bool ProjectorDiagnostics::any_ridge() const {
    return std::any_of(ridge_used.begin(), ridge_used.end(), [](bool b) { return b; });
}

Values Projector::condexp(std::span<const double> v, std::size_t j, std::size_t i) const {
    if (i > j) {
        throw DomainError("condexp: target level after source level");
    }
    Values cur(v.begin(), v.end());
    for (std::size_t r = j; r > i; --r) {
        cur = condexp_step(cur, r - 1);
    }
    return cur;
}

namespace {

class TreeProjector final : public Projector {
public:
    explicit TreeProjector(const World& w) : Projector(w) {
        if (!w.is_tree()) {
            throw DomainError("exact_tree engine requires a tree world");
        }
        diag_.engine = "exact_tree";
        diag_.ridge_used.assign(w.steps() + 1, false);
        diag_.dropped.assign(w.steps() + 1, 0);
        const std::size_t n = w.steps();
        const std::size_t m = w.marks();
        const std::size_t b = w.branching();
        gram_inv_.resize(n);
        active_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Every parent has the same branch table, so the Gram matrix of
            // (dW, dpi_1..dpi_m) is computed once per step from the first block.
            std::vector<std::size_t>& act = active_[i];
            if (w.has_brownian() && w.dw_var(i) > 0.0) {
                act.push_back(0);
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (w.jump_var(i, k) > 0.0) {
                    act.push_back(1 + k);
                }
            }
            const std::size_t q = act.size();
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
            for (std::size_t c = 0; c < b; ++c) {
                const double p = w.cond_prob(i + 1, c);
                for (std::size_t r = 0; r < q; ++r) {
                    for (std::size_t s = 0; s < q; ++s) {
                        g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) += p * feature(i, c, act[r]) * feature(i, c, act[s]);
                    }
                }
            }
            gram_inv_[i] = q > 0 ? Eigen::MatrixXd(g.inverse()) : g;
        }
    }

    StepDecomposition step(std::span<const double> v, std::size_t i) const override {
        const World& w = world();
        const std::size_t b = w.branching();
        const std::size_t np = w.atoms(i);
        const std::size_t m = w.marks();
        const auto& act = active_[i];
        const auto q = static_cast<Eigen::Index>(act.size());
        StepDecomposition d;
        d.mean.assign(np, 0.0);
        d.z.assign(np, 0.0);
        d.u.assign(m, Values(np, 0.0));
        d.m_incr.resize(v.size());
        Eigen::VectorXd rhs(q);
        Eigen::VectorXd theta(q);
        for (std::size_t a = 0; a < np; ++a) {
            const std::size_t base = a * b;
            double mean = 0.0;
            for (std::size_t c = 0; c < b; ++c) {
                mean += w.cond_prob(i + 1, base + c) * v[base + c];
            }
            rhs.setZero();
            for (std::size_t c = 0; c < b; ++c) {
                const double pv = w.cond_prob(i + 1, base + c) * (v[base + c] - mean);
                for (Eigen::Index r = 0; r < q; ++r) {
                    rhs(r) += pv * feature(i, base + c, act[static_cast<std::size_t>(r)]);
                }
            }
            theta.noalias() = gram_inv_[i] * rhs;
            d.mean[a] = mean;
            for (Eigen::Index r = 0; r < q; ++r) {
                const std::size_t f = act[static_cast<std::size_t>(r)];
                (f == 0 ? d.z[a] : d.u[f - 1][a]) = theta(r);
            }
            for (std::size_t c = 0; c < b; ++c) {
                const std::size_t x = base + c;
                double r = v[x] - mean - d.z[a] * w.dW(i + 1)[x];
                for (std::size_t k = 0; k < m; ++k) {
                    r -= d.u[k][a] * w.dpi(i + 1, k)[x];
                }
                d.m_incr[x] = r;
            }
        }
        return d;
    }

protected:
    Values condexp_step(std::span<const double> v, std::size_t i) const override {
        const World& w = world();
        const std::size_t b = w.branching();
        const std::size_t np = w.atoms(i);
        Values out(np, 0.0);
        for (std::size_t a = 0; a < np; ++a) {
            double s = 0.0;
            for (std::size_t c = 0; c < b; ++c) {
                s += w.cond_prob(i + 1, a * b + c) * v[a * b + c];
            }
            out[a] = s;
        }
        return out;
    }

private:
    [[nodiscard]] double feature(std::size_t i, std::size_t atom, std::size_t f) const {
        return f == 0 ? world().dW(i + 1)[atom] : world().dpi(i + 1, f - 1)[atom];
    }

    std::vector<Eigen::MatrixXd> gram_inv_;
    std::vector<std::vector<std::size_t>> active_;
};

// Weighted least-squares projection onto a per-level basis of the path state.
class RegressionProjector final : public Projector {
public:
    RegressionProjector(const World& w, const EngineSpec& spec) : Projector(w), spec_(spec) {
        diag_.engine = spec.basis.node_indicators ? "regression(node_indicators)" : "regression(poly" + std::to_string(spec.basis.degree) + ")";
        const std::size_t n = w.steps();
        diag_.ridge_used.assign(n + 1, false);
        diag_.dropped.assign(n + 1, 0);
        if (spec.basis.node_indicators) {
            classes_ = w.prefix_classes();
            class_count_.resize(n + 1);
            for (std::size_t j = 0; j <= n; ++j) {
                class_count_[j] = classes_[j].empty() ? 0 : *std::max_element(classes_[j].begin(), classes_[j].end()) + 1;
            }
            diag_.basis_size = class_count_[n];
            return;
        }
        levels_.resize(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            build_level(j);
        }
    }

    Values condexp(std::span<const double> v, std::size_t j, std::size_t i) const override {
        if (i > j) {
            throw DomainError("condexp: target level after source level");
        }
        if (i == j) {
            return Values(v.begin(), v.end());
        }
        return project(v, i);
    }

    StepDecomposition step(std::span<const double> v, std::size_t i) const override {
        const World& w = world();
        const std::size_t np = v.size();
        const std::size_t m = w.marks();
        StepDecomposition d;
        d.mean = project(v, i);
        d.z.assign(np, 0.0);
        d.u.assign(m, Values(np, 0.0));
        Values tmp(np);
        if (w.has_brownian() && w.dw_var(i) > 0.0) {
            for (std::size_t p = 0; p < np; ++p) {
                tmp[p] = v[p] * w.dW(i + 1)[p];
            }
            d.z = project(tmp, i);
            for (double& x : d.z) {
                x /= w.dw_var(i);
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (!(w.jump_var(i, k) > 0.0)) {
                continue;
            }
            for (std::size_t p = 0; p < np; ++p) {
                tmp[p] = v[p] * w.dpi(i + 1, k)[p];
            }
            d.u[k] = project(tmp, i);
            for (double& x : d.u[k]) {
                x /= w.jump_var(i, k);
            }
        }
        d.m_incr.resize(np);
        for (std::size_t p = 0; p < np; ++p) {
            double r = v[p] - d.mean[p] - d.z[p] * w.dW(i + 1)[p];
            for (std::size_t k = 0; k < m; ++k) {
                r -= d.u[k][p] * w.dpi(i + 1, k)[p];
            }
            d.m_incr[p] = r;
        }
        return d;
    }

protected:
    Values condexp_step(std::span<const double> v, std::size_t i) const override { return project(v, i); }

private:
    struct Level {
        Eigen::MatrixXd X;  // n x k, columns already filtered
        Eigen::LDLT<Eigen::MatrixXd> ldlt;
    };

    [[nodiscard]] std::vector<Values> state_columns(std::size_t j) const {
        const World& w = world();
        std::vector<Values> vars;
        if (w.has_brownian()) {
            vars.push_back(w.W(j));
        }
        for (std::size_t k = 0; k < w.marks(); ++k) {
            vars.push_back(w.N(j, k));
        }
        if (w.extra_noise() && spec_.basis.include_extra) {
            vars.push_back(w.E(j));
        }
        return vars;
    }

    void build_level(std::size_t j) {
        const World& w = world();
        const std::size_t np = w.atoms(j);
        const Values& wt = w.prob(j);
        const std::vector<Values> vars = state_columns(j);
        std::vector<Values> cols;
        cols.emplace_back(np, 1.0);
        // Monomials of total degree <= d, generated by multiplying lower-degree
        // monomials by a variable index >= their last factor.
        std::vector<std::pair<Values, std::size_t>> frontier;
        for (std::size_t v = 0; v < vars.size(); ++v) {
            frontier.emplace_back(vars[v], v);
        }
        for (int deg = 1; deg <= spec_.basis.degree && !frontier.empty(); ++deg) {
            std::vector<std::pair<Values, std::size_t>> next;
            for (const auto& [col, last] : frontier) {
                cols.push_back(col);
                if (deg == spec_.basis.degree) {
                    continue;
                }
                for (std::size_t v = last; v < vars.size(); ++v) {
                    Values c(np);
                    for (std::size_t p = 0; p < np; ++p) {
                        c[p] = col[p] * vars[v][p];
                    }
                    next.emplace_back(std::move(c), v);
                }
            }
            frontier = std::move(next);
        }
        if (spec_.basis.jump_indicators) {
            for (std::size_t k = 0; k < w.marks(); ++k) {
                Values c(np);
                for (std::size_t p = 0; p < np; ++p) {
                    c[p] = w.N(j, k)[p] > 0.0 ? 1.0 : 0.0;
                }
                cols.push_back(std::move(c));
            }
        }
        diag_.basis_size = std::max(diag_.basis_size, cols.size());

        // Normalise columns and drop numerically dependent ones with a rank-revealing QR.
        const auto n = static_cast<Eigen::Index>(np);
        Eigen::MatrixXd Xs(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double nrm = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                nrm += wt[p] * cols[c][p] * cols[c][p];
            }
            nrm = nrm > 0.0 ? std::sqrt(nrm) : 1.0;
            for (std::size_t p = 0; p < np; ++p) {
                Xs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = cols[c][p] / nrm;
            }
        }
        Eigen::MatrixXd weighted = Xs;
        for (Eigen::Index p = 0; p < n; ++p) {
            weighted.row(p) *= std::sqrt(wt[static_cast<std::size_t>(p)]);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
        qr.setThreshold(1e-10);
        const Eigen::Index rank = qr.rank();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index r = 0; r < rank; ++r) {
            keep.push_back(qr.colsPermutation().indices()(r));
        }
        std::sort(keep.begin(), keep.end());
        diag_.dropped[j] = cols.size() - keep.size();

        Level& L = levels_[j];
        L.X.resize(n, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            L.X.col(static_cast<Eigen::Index>(c)) = Xs.col(keep[c]);
        }
        Eigen::MatrixXd G = L.X.transpose() * (Eigen::Map<const Eigen::VectorXd>(wt.data(), n).asDiagonal() * L.X);
        L.ldlt.compute(G);
        if (L.ldlt.info() != Eigen::Success || L.ldlt.rcond() < 1e-13) {
            G.diagonal().array() += spec_.ridge * G.trace();
            L.ldlt.compute(G);
            diag_.ridge_used[j] = true;
        }
    }

    [[nodiscard]] Values project(std::span<const double> v, std::size_t i) const {
        const World& w = world();
        const Values& wt = w.prob(i);
        const std::size_t np = v.size();
        if (spec_.basis.node_indicators) {
            const auto& cls = classes_[i];
            std::vector<double> num(class_count_[i], 0.0);
            std::vector<double> den(class_count_[i], 0.0);
            for (std::size_t p = 0; p < np; ++p) {
                num[cls[p]] += wt[p] * v[p];
                den[cls[p]] += wt[p];
            }
            Values out(np);
            for (std::size_t p = 0; p < np; ++p) {
                out[p] = den[cls[p]] > 0.0 ? num[cls[p]] / den[cls[p]] : 0.0;
            }
            return out;
        }
        const Level& L = levels_[i];
        const auto n = static_cast<Eigen::Index>(np);
        Eigen::VectorXd wv(n);
        for (Eigen::Index p = 0; p < n; ++p) {
            wv(p) = wt[static_cast<std::size_t>(p)] * v[static_cast<std::size_t>(p)];
        }
        const Eigen::VectorXd coef = L.ldlt.solve(L.X.transpose() * wv);
        const Eigen::VectorXd fit = L.X * coef;
        return Values(fit.data(), fit.data() + n);
    }

    EngineSpec spec_;
    std::vector<Level> levels_;
    std::vector<std::vector<std::size_t>> classes_;
    std::vector<std::size_t> class_count_;
};

}  // namespace

std::unique_ptr<Projector> make_projector(const World& world, const EngineSpec& spec) {
    if (spec.kind == EngineKind::exact_tree) {
        return std::make_unique<TreeProjector>(world);
    }
    if (world.is_tree()) {
        throw DomainError("regression engine expects an ensemble world");
    }
    if (spec.basis.degree < 0) {
        throw DomainError("regression basis degree must be nonnegative");
    }
    if (!(spec.ridge >= 0.0)) {
        throw DomainError("ridge must be nonnegative");
    }
    return std::make_unique<RegressionProjector>(world, spec);
}

EngineSpec default_engine(const World& world) {
    EngineSpec s;
    s.kind = world.is_tree() ? EngineKind::exact_tree : EngineKind::regression;
    return s;
}

std::unique_ptr<Projector> make_projector(const World& world) {
    return make_projector(world, default_engine(world));
}

OrthoDecomposition represent(const Projector& proj, std::span<const double> terminal, std::size_t j, std::size_t i) {
    if (i > j) {
        throw DomainError("represent requires from_step <= terminal step");
    }
    OrthoDecomposition d;
    d.from = i;
    d.to = j;
    d.steps.resize(j - i);
    Values cur(terminal.begin(), terminal.end());
    for (std::size_t r = j; r > i; --r) {
        d.steps[r - 1 - i] = proj.step(cur, r - 1);
        cur = d.steps[r - 1 - i].mean;
    }
    d.mean = std::move(cur);
    return d;
}

double reconstruction_error(const World& w, const OrthoDecomposition& d, std::span<const double> terminal) {
    Values rec = w.lift(d.mean, d.from, d.to);
    for (std::size_t r = d.from; r < d.to; ++r) {
        const StepDecomposition& s = d.steps[r - d.from];
        const Values z = w.lift(s.z, r, d.to);
        const Values m = w.lift(s.m_incr, r + 1, d.to);
        const Values dw = w.lift(w.dW(r + 1), r + 1, d.to);
        for (std::size_t a = 0; a < rec.size(); ++a) {
            rec[a] += z[a] * dw[a] + m[a];
        }
        for (std::size_t k = 0; k < w.marks(); ++k) {
            const Values u = w.lift(s.u[k], r, d.to);
            const Values dp = w.lift(w.dpi(r + 1, k), r + 1, d.to);
            for (std::size_t a = 0; a < rec.size(); ++a) {
                rec[a] += u[a] * dp[a];
            }
        }
    }
    double err = 0.0;
    for (std::size_t a = 0; a < rec.size(); ++a) {
        err = std::max(err, std::abs(rec[a] - terminal[a]));
    }
    return err;
}

}  // namespace bsvie
