#pragma once

#include "bsvie/world.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace bsvie {

/// Arguments of a driver evaluation f(t, s, y, Z(t,s), Z(s,t), U(t,s), U(s,t)).
///
/// `t` and `s` are grid indices; the driver is evaluated on atom `atom` of level `s`,
/// so state-dependent drivers may read the world at (s, atom).
struct DriverPoint {
    std::size_t t = 0;
    std::size_t s = 0;
    std::size_t atom = 0;
    double y = 0.0;
    double z = 0.0;
    std::span<const double> u;
    double z_rev = 0.0;
    std::span<const double> u_rev;
};

/// Lipschitz data |f - f'|^2 <= varpi |y - y'|^2 + theta_z |z - z'|^2 + theta_u ||u - u'||^2.
struct Lipschitz {
    double varpi = 0.0;
    double theta_z = 0.0;
    double theta_u = 0.0;
};

struct GeneratorSpec {
    std::string name = "zero";
    std::function<double(const World&, const DriverPoint&)> eval;
    Lipschitz lip;
    bool uses_y = false;
    /// Reads Z(s,t) or U(s,t).
    bool two_sided = false;

    double operator()(const World& w, const DriverPoint& p) const { return eval ? eval(w, p) : 0.0; }

    /// Uniform constant with K^2 >= max(sqrt(varpi), theta_z, theta_u).
    [[nodiscard]] double K() const;

    /// f(t, s, 0, 0, 0) at an atom of level s.
    [[nodiscard]] double zero_point(const World& w, std::size_t t, std::size_t s, std::size_t atom) const;
};

GeneratorSpec zero_generator();

struct LipschitzCheck {
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Largest observed |df|^2 / (varpi dy^2 + theta_z dz^2 + theta_u du^2).
    double worst_ratio = 0.0;
};

/// Spot check of the declared Lipschitz data on random argument pairs.
LipschitzCheck spot_check_lipschitz(const GeneratorSpec& f, const World& w, std::size_t samples = 200, std::uint64_t seed = 7);

}  // namespace bsvie
