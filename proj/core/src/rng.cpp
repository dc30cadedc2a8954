#include "bsvie/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace bsvie {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// Maps a 32-bit word to the open interval (0, 1).
inline double to_unit(std::uint32_t x) noexcept {
    return (static_cast<double>(x) + 0.5) * 0x1p-32;
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

Philox4x32::Block Philox4x32::operator()(Block ctr) const noexcept {
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, ctr[0], hi0, lo0);
        mulhilo(kM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kW0;
        k1 += kW1;
    }
    return ctr;
}

std::array<double, 4> Philox4x32::uniforms(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const noexcept {
    const Block b = (*this)({static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), step, slot});
    return {to_unit(b[0]), to_unit(b[1]), to_unit(b[2]), to_unit(b[3])};
}

std::array<double, 2> box_muller(double u1, double u2) noexcept {
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

unsigned poisson_inverse(double mean, double u) noexcept {
    if (mean <= 0.0) {
        return 0;
    }
    double p = std::exp(-mean);
    double cdf = p;
    unsigned k = 0;
    while (u > cdf && k < 10000) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p == 0.0) {
            break;
        }
    }
    return k;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* v = std::getenv("BSVIE_SEED");
    if (v == nullptr || *v == '\0') {
        return fallback;
    }
    try {
        std::size_t pos = 0;
        const unsigned long long s = std::stoull(v, &pos);
        return pos == std::string(v).size() ? s : fallback;
    } catch (...) {
        return fallback;
    }
}

}  // namespace bsvie
