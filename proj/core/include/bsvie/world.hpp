#pragma once

#include "bsvie/clock.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsvie {

/// A random variable measurable at some level of a world: one value per atom of that level.
using Values = std::vector<double>;

/// Finite-mark jump measure mu = sum_k lambda_k delta_{x_k}.
struct JumpMeasureSpec {
    std::vector<double> marks;
    std::vector<double> intensities;

    [[nodiscard]] std::size_t size() const noexcept { return marks.size(); }
    void validate() const;
};

enum class BrownianQuantization { none, binomial, trinomial };

struct TreeSpec {
    BrownianQuantization brownian = BrownianQuantization::binomial;
    bool extra_noise = false;
    /// Cap on the number of steps of a branching tree.
    std::size_t max_steps = 6;
};

struct EnsembleSpec {
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    bool brownian = true;
    bool extra_noise = false;
};

enum class WorldKind { tree, ensemble };

/// Discrete noise model on a clock: a scenario tree or a weighted path ensemble.
///
/// Level j holds the atoms generating F_{t_j}: tree nodes, or paths for ensembles.
/// Increments of step i (from t_i to t_{i+1}) are stored on the atoms of level i+1.
/// Atoms of a tree level are ordered so that the children of atom a at level j are
/// a*b, ..., a*b + b - 1 at level j+1, with b the branching factor.
class World {
public:
    static World tree(const Clock& clock, const JumpMeasureSpec& jumps, const TreeSpec& spec);
    static World ensemble(const Clock& clock, const JumpMeasureSpec& jumps, const EnsembleSpec& spec);
    /// One-atom world with no noise at all.
    static World deterministic(const Clock& clock);
    /// Weighted ensemble whose paths are the leaves of a tree.
    static World from_tree(const World& tree);

    [[nodiscard]] WorldKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_tree() const noexcept { return kind_ == WorldKind::tree; }
    [[nodiscard]] const Clock& clock() const noexcept { return clock_; }
    [[nodiscard]] const JumpMeasureSpec& jumps() const noexcept { return jumps_; }
    [[nodiscard]] std::size_t marks() const noexcept { return jumps_.size(); }
    [[nodiscard]] std::size_t steps() const noexcept { return clock_.steps(); }
    [[nodiscard]] bool has_brownian() const noexcept { return brownian_ != BrownianQuantization::none; }
    [[nodiscard]] BrownianQuantization brownian() const noexcept { return brownian_; }
    [[nodiscard]] bool extra_noise() const noexcept { return extra_noise_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] std::size_t atoms(std::size_t level) const { return prob_[level].size(); }
    [[nodiscard]] std::size_t branching() const noexcept { return branching_; }
    [[nodiscard]] const Values& prob(std::size_t level) const { return prob_[level]; }
    /// Probability of the atom given its parent (1 on ensembles).
    [[nodiscard]] double cond_prob(std::size_t level, std::size_t atom) const;
    [[nodiscard]] std::size_t parent(std::size_t level, std::size_t atom) const;
    /// Ancestor at level `to` of an atom at level `level` (to <= level).
    [[nodiscard]] std::size_t ancestor(std::size_t level, std::size_t atom, std::size_t to) const;

    [[nodiscard]] const Values& dW(std::size_t level) const { return dW_[level]; }
    [[nodiscard]] const Values& dN(std::size_t level, std::size_t k) const { return dN_[level][k]; }
    [[nodiscard]] const Values& dpi(std::size_t level, std::size_t k) const { return dpi_[level][k]; }
    [[nodiscard]] const Values& eps(std::size_t level) const { return eps_[level]; }
    [[nodiscard]] const Values& W(std::size_t level) const { return W_[level]; }
    [[nodiscard]] const Values& N(std::size_t level, std::size_t k) const { return N_[level][k]; }
    [[nodiscard]] const Values& E(std::size_t level) const { return E_[level]; }

    /// Variance of the Brownian increment over step i.
    [[nodiscard]] double dw_var(std::size_t step) const { return dw_var_[step]; }
    /// Variance of the compensated jump increment of mark k over step i.
    [[nodiscard]] double jump_var(std::size_t step, std::size_t k) const { return jump_var_[step][k]; }
    /// Compensator lambda_k dB_i of mark k over step i.
    [[nodiscard]] double jump_mean(std::size_t step, std::size_t k) const { return jump_mean_[step][k]; }

    /// Re-index a level-`from` variable on the atoms of level `to` >= from.
    [[nodiscard]] Values lift(std::span<const double> v, std::size_t from, std::size_t to) const;
    /// Expectation of a level-`level` variable.
    [[nodiscard]] double expect(std::span<const double> v, std::size_t level) const;

    /// Equivalence classes of paths sharing the same history up to each level
    /// (identity on trees). Used by indicator regression bases.
    [[nodiscard]] std::vector<std::vector<std::size_t>> prefix_classes() const;

    [[nodiscard]] std::string describe() const;

    struct Raw;
    static World from_raw(Raw raw);
    [[nodiscard]] Raw to_raw() const;

private:
    void finish_states();

    WorldKind kind_ = WorldKind::tree;
    Clock clock_;
    JumpMeasureSpec jumps_;
    BrownianQuantization brownian_ = BrownianQuantization::binomial;
    bool extra_noise_ = false;
    std::uint64_t seed_ = 0;
    std::size_t branching_ = 1;
    std::vector<std::size_t> stride_;  // branching^j, trees only

    std::vector<Values> prob_;
    std::vector<Values> cond_prob_;
    std::vector<Values> dW_;
    std::vector<std::vector<Values>> dN_;
    std::vector<std::vector<Values>> dpi_;
    std::vector<Values> eps_;
    std::vector<Values> W_;
    std::vector<std::vector<Values>> N_;
    std::vector<Values> E_;
    std::vector<double> dw_var_;
    std::vector<std::vector<double>> jump_var_;
    std::vector<std::vector<double>> jump_mean_;
};

/// Plain ensemble data used for binary export and import.
struct World::Raw {
    Clock clock;
    JumpMeasureSpec jumps;
    BrownianQuantization brownian = BrownianQuantization::binomial;
    bool extra_noise = false;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    Values weights;
    std::vector<Values> dW;                // [step][path]
    std::vector<std::vector<Values>> dN;   // [step][mark][path]
    std::vector<Values> eps;               // [step][path]
    std::vector<double> dw_var;
    std::vector<std::vector<double>> jump_var;
};

/// Columnar binary ensemble file: magic, JSON header length, JSON header, then
/// little-endian float64 columns (weights, then per step dW, dN per mark, eps).
void export_ensemble(const World& ensemble, const std::string& path);
World import_ensemble(const std::string& path);

}  // namespace bsvie
