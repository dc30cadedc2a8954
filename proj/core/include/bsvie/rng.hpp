#pragma once

#include <array>
#include <cstdint>

namespace bsvie {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stream rule: the 64-bit seed is the key; the 128-bit counter is
/// (path_lo, path_hi, step, slot). Every draw is addressed by (seed, path, step, slot),
/// so paths can be simulated in any order or in parallel blocks with identical results.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed) noexcept;

    [[nodiscard]] Block operator()(Block counter) const noexcept;

    /// Four uniforms in (0, 1) for the given address.
    [[nodiscard]] std::array<double, 4> uniforms(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
};

/// Two independent standard normals from two uniforms (Box-Muller).
std::array<double, 2> box_muller(double u1, double u2) noexcept;

/// Poisson(mean) by sequential inversion of one uniform.
unsigned poisson_inverse(double mean, double u) noexcept;

/// Reads BSVIE_SEED from the environment; returns fallback when unset or malformed.
std::uint64_t seed_from_env(std::uint64_t fallback);

}  // namespace bsvie
