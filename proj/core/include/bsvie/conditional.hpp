#pragma once

#include "bsvie/world.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bsvie {

struct BasisSpec {
    /// Total degree of the monomials in (W, N_k, E).
    int degree = 2;
    bool jump_indicators = true;
    /// Include the extra-noise state E among the regressors.
    bool include_extra = true;
    /// Use indicators of path-prefix classes instead of monomials (exact on tree-shaped ensembles).
    bool node_indicators = false;
};

enum class EngineKind { exact_tree, regression };

struct EngineSpec {
    EngineKind kind = EngineKind::exact_tree;
    BasisSpec basis;
    /// Relative ridge added to near-singular normal equations (times the trace).
    double ridge = 1e-10;
};

/// One-step orthogonal decomposition of a level-(i+1) variable V:
/// V = mean + z dW + sum_k u_k dpi_k + m_incr.
struct StepDecomposition {
    Values mean;               ///< level i
    Values z;                  ///< level i
    std::vector<Values> u;     ///< per mark, level i
    Values m_incr;             ///< level i+1
};

/// Decomposition of a level-j variable from level i:
/// V = E_i[V] + sum_{r=i}^{j-1} (Z_r dW_r + U_r dpi_r + M_r).
struct OrthoDecomposition {
    std::size_t from = 0;
    std::size_t to = 0;
    Values mean;
    std::vector<StepDecomposition> steps;  ///< steps[r - from]
};

struct ProjectorDiagnostics {
    std::string engine;
    std::size_t basis_size = 0;
    std::vector<bool> ridge_used;          ///< per level
    std::vector<std::size_t> dropped;      ///< collinear columns removed per level

    [[nodiscard]] bool any_ridge() const;
};

/// Conditional expectation engine over a world. The world must outlive the projector.
class Projector {
public:
    explicit Projector(const World& world) : world_(&world) {}
    virtual ~Projector() = default;
    Projector(const Projector&) = delete;
    Projector& operator=(const Projector&) = delete;

    [[nodiscard]] const World& world() const noexcept { return *world_; }

    /// E[V | F_{t_i}] for V measurable at level j >= i.
    [[nodiscard]] virtual Values condexp(std::span<const double> v, std::size_t j, std::size_t i) const;
    /// One-step decomposition of a level-(i+1) variable.
    [[nodiscard]] virtual StepDecomposition step(std::span<const double> v, std::size_t i) const = 0;

    [[nodiscard]] const ProjectorDiagnostics& diagnostics() const noexcept { return diag_; }

protected:
    /// E_i of a level-(i+1) variable.
    [[nodiscard]] virtual Values condexp_step(std::span<const double> v, std::size_t i) const = 0;

    const World* world_;
    ProjectorDiagnostics diag_;
};

std::unique_ptr<Projector> make_projector(const World& world, const EngineSpec& spec);

/// Default engine for the world: exact on trees, degree-2 regression on ensembles.
EngineSpec default_engine(const World& world);

/// Projector with the default engine of the world.
std::unique_ptr<Projector> make_projector(const World& world);

OrthoDecomposition represent(const Projector& proj, std::span<const double> terminal, std::size_t j, std::size_t i);

/// Pathwise reconstruction error of a decomposition, max over level-j atoms.
double reconstruction_error(const World& world, const OrthoDecomposition& d, std::span<const double> terminal);

}  // namespace bsvie
