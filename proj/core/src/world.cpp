#include "bsvie/world.hpp"

#include "bsvie/errors.hpp"
#include "bsvie/rng.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace bsvie {

void JumpMeasureSpec::validate() const {
    if (marks.size() != intensities.size()) {
        throw DomainError("jump measure: marks and intensities differ in length");
    }
    for (double l : intensities) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw DomainError("jump measure: intensities must be positive");
        }
    }
}

namespace {

struct Branch {
    double p = 1.0;
    double dw = 0.0;
    std::vector<double> ind;
    double eps = 0.0;
};

std::vector<Branch> step_branches(double db, BrownianQuantization q, const JumpMeasureSpec& jumps, bool extra) {
    std::vector<std::pair<double, double>> w;  // (value, prob)
    switch (q) {
    case BrownianQuantization::none: w = {{0.0, 1.0}}; break;
    case BrownianQuantization::binomial: w = {{-std::sqrt(db), 0.5}, {std::sqrt(db), 0.5}}; break;
    case BrownianQuantization::trinomial: {
        const double h = std::sqrt(3.0 * db);
        w = {{-h, 1.0 / 6.0}, {0.0, 2.0 / 3.0}, {h, 1.0 / 6.0}};
        break;
    }
    }
    const std::size_t m = jumps.size();
    std::vector<double> qk(m);
    for (std::size_t k = 0; k < m; ++k) {
        qk[k] = jumps.intensities[k] * db;
        if (qk[k] > 1.0) {
            throw DomainError("tree: jump probability lambda*dB exceeds 1; refine the grid");
        }
    }
    std::vector<std::pair<double, double>> e = extra ? std::vector<std::pair<double, double>>{{-1.0, 0.5}, {1.0, 0.5}}
                                                     : std::vector<std::pair<double, double>>{{0.0, 1.0}};
    std::vector<Branch> out;
    for (const auto& [wv, wp] : w) {
        for (std::size_t bits = 0; bits < (std::size_t{1} << m); ++bits) {
            double p = wp;
            std::vector<double> ind(m);
            for (std::size_t k = 0; k < m; ++k) {
                ind[k] = (bits >> k) & 1u ? 1.0 : 0.0;
                p *= ind[k] > 0.0 ? qk[k] : 1.0 - qk[k];
            }
            for (const auto& [ev, ep] : e) {
                out.push_back({p * ep, wv, ind, ev});
            }
        }
    }
    return out;
}

}  // namespace

World World::tree(const Clock& clock, const JumpMeasureSpec& jumps, const TreeSpec& spec) {
    jumps.validate();
    World w;
    w.kind_ = WorldKind::tree;
    w.clock_ = clock;
    w.jumps_ = jumps;
    w.brownian_ = spec.brownian;
    w.extra_noise_ = spec.extra_noise;
    const std::size_t n = clock.steps();
    const std::size_t m = jumps.size();

    std::vector<std::vector<Branch>> branches(n);
    for (std::size_t i = 0; i < n; ++i) {
        branches[i] = step_branches(clock.dB(i), spec.brownian, jumps, spec.extra_noise);
    }
    w.branching_ = branches.empty() ? 1 : branches[0].size();
    if (w.branching_ > 1 && n > spec.max_steps) {
        throw DomainError("tree: " + std::to_string(n) + " steps exceeds the cap of " + std::to_string(spec.max_steps));
    }
    w.stride_.assign(n + 1, 1);
    for (std::size_t j = 1; j <= n; ++j) {
        w.stride_[j] = w.stride_[j - 1] * w.branching_;
    }

    w.prob_.assign(n + 1, {});
    w.cond_prob_.assign(n + 1, {});
    w.dW_.assign(n + 1, {});
    w.dN_.assign(n + 1, std::vector<Values>(m));
    w.dpi_.assign(n + 1, std::vector<Values>(m));
    w.eps_.assign(n + 1, {});
    w.prob_[0] = {1.0};
    w.cond_prob_[0] = {1.0};
    w.dW_[0] = {0.0};
    w.eps_[0] = {0.0};
    for (std::size_t k = 0; k < m; ++k) {
        w.dN_[0][k] = {0.0};
        w.dpi_[0][k] = {0.0};
    }
    w.dw_var_.assign(n, 0.0);
    w.jump_var_.assign(n, std::vector<double>(m, 0.0));
    w.jump_mean_.assign(n, std::vector<double>(m, 0.0));

    for (std::size_t i = 0; i < n; ++i) {
        const auto& br = branches[i];
        const std::size_t b = br.size();
        const std::size_t na = w.prob_[i].size() * b;
        auto& prob = w.prob_[i + 1];
        prob.resize(na);
        w.cond_prob_[i + 1].resize(na);
        w.dW_[i + 1].resize(na);
        w.eps_[i + 1].resize(na);
        for (std::size_t k = 0; k < m; ++k) {
            w.dN_[i + 1][k].resize(na);
            w.dpi_[i + 1][k].resize(na);
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double q = jumps.intensities[k] * clock.dB(i);
            w.jump_mean_[i][k] = q;
            w.jump_var_[i][k] = q * (1.0 - q);
        }
        double var = 0.0;
        for (const auto& x : br) {
            var += x.p * x.dw * x.dw;
        }
        w.dw_var_[i] = var;
        for (std::size_t a = 0; a < na; ++a) {
            const Branch& x = br[a % b];
            const std::size_t par = a / b;
            prob[a] = w.prob_[i][par] * x.p;
            w.cond_prob_[i + 1][a] = x.p;
            w.dW_[i + 1][a] = x.dw;
            w.eps_[i + 1][a] = x.eps;
            for (std::size_t k = 0; k < m; ++k) {
                w.dN_[i + 1][k][a] = x.ind[k];
                w.dpi_[i + 1][k][a] = x.ind[k] - w.jump_mean_[i][k];
            }
        }
    }
    w.finish_states();
    return w;
}

World World::deterministic(const Clock& clock) {
    TreeSpec s;
    s.brownian = BrownianQuantization::none;
    return tree(clock, {}, s);
}

World World::ensemble(const Clock& clock, const JumpMeasureSpec& jumps, const EnsembleSpec& spec) {
    jumps.validate();
    if (spec.n_paths == 0) {
        throw DomainError("ensemble needs at least one path");
    }
    Raw raw;
    raw.clock = clock;
    raw.jumps = jumps;
    raw.brownian = spec.brownian ? BrownianQuantization::binomial : BrownianQuantization::none;
    raw.extra_noise = spec.extra_noise;
    raw.seed = spec.seed;
    raw.n_paths = spec.n_paths;
    const std::size_t n = clock.steps();
    const std::size_t m = jumps.size();
    const std::size_t np = spec.n_paths;
    raw.weights.assign(np, 1.0 / static_cast<double>(np));
    raw.dW.assign(n, Values(np, 0.0));
    raw.dN.assign(n, std::vector<Values>(m, Values(np, 0.0)));
    raw.eps.assign(n, Values(np, 0.0));
    raw.dw_var.assign(n, 0.0);
    raw.jump_var.assign(n, std::vector<double>(m, 0.0));

    const Philox4x32 gen(spec.seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double db = clock.dB(i);
        raw.dw_var[i] = spec.brownian ? db : 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            raw.jump_var[i][k] = jumps.intensities[k] * db;
        }
        const double sd = std::sqrt(db);
        const auto step = static_cast<std::uint32_t>(i);
        for (std::size_t p = 0; p < np; ++p) {
            const auto u = gen.uniforms(p, step, 0);
            if (spec.brownian) {
                raw.dW[i][p] = sd * box_muller(u[0], u[1])[0];
            }
            if (spec.extra_noise) {
                raw.eps[i][p] = u[2] < 0.5 ? -1.0 : 1.0;
            }
            for (std::size_t k = 0; k < m; ++k) {
                const auto v = gen.uniforms(p, step, static_cast<std::uint32_t>(1 + k / 4));
                raw.dN[i][k][p] = poisson_inverse(jumps.intensities[k] * db, v[k % 4]);
            }
        }
    }
    return from_raw(std::move(raw));
}

World World::from_tree(const World& t) {
    if (!t.is_tree()) {
        throw DomainError("from_tree expects a tree world");
    }
    const std::size_t n = t.steps();
    const std::size_t m = t.marks();
    const std::size_t np = t.atoms(n);
    Raw raw;
    raw.clock = t.clock_;
    raw.jumps = t.jumps_;
    raw.brownian = t.brownian_;
    raw.extra_noise = t.extra_noise_;
    raw.seed = 0;
    raw.n_paths = np;
    raw.weights = t.prob_[n];
    raw.dW.assign(n, Values(np));
    raw.dN.assign(n, std::vector<Values>(m, Values(np)));
    raw.eps.assign(n, Values(np));
    raw.dw_var = t.dw_var_;
    raw.jump_var = t.jump_var_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < np; ++p) {
            const std::size_t a = t.ancestor(n, p, i + 1);
            raw.dW[i][p] = t.dW_[i + 1][a];
            raw.eps[i][p] = t.eps_[i + 1][a];
            for (std::size_t k = 0; k < m; ++k) {
                raw.dN[i][k][p] = t.dN_[i + 1][k][a];
            }
        }
    }
    return from_raw(std::move(raw));
}

World World::from_raw(Raw raw) {
    raw.jumps.validate();
    const std::size_t n = raw.clock.steps();
    const std::size_t m = raw.jumps.size();
    const std::size_t np = raw.n_paths;
    if (raw.weights.size() != np || raw.dW.size() != n || raw.dN.size() != n || raw.eps.size() != n ||
        raw.dw_var.size() != n || raw.jump_var.size() != n) {
        throw ValidationError("ensemble data has inconsistent dimensions");
    }
    World w;
    w.kind_ = WorldKind::ensemble;
    w.clock_ = std::move(raw.clock);
    w.jumps_ = std::move(raw.jumps);
    w.brownian_ = raw.brownian;
    w.extra_noise_ = raw.extra_noise;
    w.seed_ = raw.seed;
    w.branching_ = 1;
    w.prob_.assign(n + 1, raw.weights);
    w.cond_prob_.assign(n + 1, Values(np, 1.0));
    w.dW_.assign(n + 1, Values(np, 0.0));
    w.dN_.assign(n + 1, std::vector<Values>(m, Values(np, 0.0)));
    w.dpi_.assign(n + 1, std::vector<Values>(m, Values(np, 0.0)));
    w.eps_.assign(n + 1, Values(np, 0.0));
    w.dw_var_ = std::move(raw.dw_var);
    w.jump_var_ = std::move(raw.jump_var);
    w.jump_mean_.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (raw.dW[i].size() != np || raw.eps[i].size() != np || raw.dN[i].size() != m) {
            throw ValidationError("ensemble data has inconsistent dimensions");
        }
        w.dW_[i + 1] = std::move(raw.dW[i]);
        w.eps_[i + 1] = std::move(raw.eps[i]);
        for (std::size_t k = 0; k < m; ++k) {
            w.jump_mean_[i][k] = w.jumps_.intensities[k] * w.clock_.dB(i);
            w.dN_[i + 1][k] = std::move(raw.dN[i][k]);
            for (std::size_t p = 0; p < np; ++p) {
                w.dpi_[i + 1][k][p] = w.dN_[i + 1][k][p] - w.jump_mean_[i][k];
            }
        }
    }
    w.finish_states();
    return w;
}

World::Raw World::to_raw() const {
    if (is_tree()) {
        return from_tree(*this).to_raw();
    }
    const std::size_t n = steps();
    Raw raw;
    raw.clock = clock_;
    raw.jumps = jumps_;
    raw.brownian = brownian_;
    raw.extra_noise = extra_noise_;
    raw.seed = seed_;
    raw.n_paths = atoms(0);
    raw.weights = prob_[0];
    raw.dw_var = dw_var_;
    raw.jump_var = jump_var_;
    for (std::size_t i = 0; i < n; ++i) {
        raw.dW.push_back(dW_[i + 1]);
        raw.dN.push_back(dN_[i + 1]);
        raw.eps.push_back(eps_[i + 1]);
    }
    return raw;
}

void World::finish_states() {
    const std::size_t n = steps();
    const std::size_t m = marks();
    W_.assign(n + 1, {});
    E_.assign(n + 1, {});
    N_.assign(n + 1, std::vector<Values>(m));
    W_[0].assign(atoms(0), 0.0);
    E_[0].assign(atoms(0), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        N_[0][k].assign(atoms(0), 0.0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t na = atoms(j);
        W_[j].resize(na);
        E_[j].resize(na);
        for (std::size_t k = 0; k < m; ++k) {
            N_[j][k].resize(na);
        }
        for (std::size_t a = 0; a < na; ++a) {
            const std::size_t p = parent(j, a);
            W_[j][a] = W_[j - 1][p] + dW_[j][a];
            E_[j][a] = E_[j - 1][p] + eps_[j][a];
            for (std::size_t k = 0; k < m; ++k) {
                N_[j][k][a] = N_[j - 1][k][p] + dN_[j][k][a];
            }
        }
    }
}

double World::cond_prob(std::size_t level, std::size_t atom) const {
    return cond_prob_[level][atom];
}

std::size_t World::parent(std::size_t level, std::size_t atom) const {
    (void)level;
    return is_tree() ? atom / branching_ : atom;
}

std::size_t World::ancestor(std::size_t level, std::size_t atom, std::size_t to) const {
    if (!is_tree()) {
        return atom;
    }
    return atom / stride_[level - to];
}

Values World::lift(std::span<const double> v, std::size_t from, std::size_t to) const {
    if (to < from) {
        throw DomainError("lift: target level precedes source level");
    }
    if (v.size() != atoms(from)) {
        throw DomainError("lift: value vector does not match its level");
    }
    const std::size_t na = atoms(to);
    Values out(na);
    for (std::size_t a = 0; a < na; ++a) {
        out[a] = v[ancestor(to, a, from)];
    }
    return out;
}

double World::expect(std::span<const double> v, std::size_t level) const {
    const Values& p = prob_[level];
    double s = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        s += p[a] * v[a];
    }
    return s;
}

std::vector<std::vector<std::size_t>> World::prefix_classes() const {
    const std::size_t n = steps();
    std::vector<std::vector<std::size_t>> cls(n + 1);
    if (is_tree()) {
        for (std::size_t j = 0; j <= n; ++j) {
            cls[j].resize(atoms(j));
            for (std::size_t a = 0; a < atoms(j); ++a) {
                cls[j][a] = a;
            }
        }
        return cls;
    }
    const std::size_t np = atoms(0);
    cls[0].assign(np, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        std::map<std::vector<double>, std::size_t> ids;
        cls[j].resize(np);
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<double> key{static_cast<double>(cls[j - 1][p]), dW_[j][p], eps_[j][p]};
            for (std::size_t k = 0; k < marks(); ++k) {
                key.push_back(dN_[j][k][p]);
            }
            auto [it, inserted] = ids.emplace(std::move(key), ids.size());
            cls[j][p] = it->second;
        }
    }
    return cls;
}

std::string World::describe() const {
    std::ostringstream os;
    os << (is_tree() ? "tree" : "ensemble") << " steps=" << steps() << " atoms=" << atoms(steps())
       << " marks=" << marks() << " brownian=" << (has_brownian() ? "yes" : "no")
       << " extra_noise=" << (extra_noise_ ? "yes" : "no");
    return os.str();
}

}  // namespace bsvie
