#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace etsim {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();
inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

/// (e^{a*t} - 1) / a, continuous at a = 0.
[[nodiscard]] inline Real phi_exact(Real a, Real t) noexcept {
    if (std::abs(a * t) < 1e-8) {
        return t * (1.0 + 0.5 * a * t + a * a * t * t / 6.0);
    }
    return std::expm1(a * t) / a;
}

/// Complex counterpart of phi_exact.
[[nodiscard]] inline Complex phi_exact(Complex a, Real t) noexcept {
    const Complex at = a * t;
    if (std::abs(at) < 1e-8) {
        return t * (1.0 + 0.5 * at + at * at / 6.0);
    }
    return (std::exp(at) - 1.0) / a;
}

/// Per-step overshoot factor of the exponential hold: e^{A*dt} - 1.
/// Grid-triggered events may exceed their continuous-time level by this
/// multiplicative amount; invariant checks carry it as slack.
[[nodiscard]] inline Real step_growth_slack(Real a, Real dt) noexcept {
    return std::expm1(a * dt);
}

[[nodiscard]] inline Real magnitude(Real v) noexcept { return std::abs(v); }
[[nodiscard]] inline Real magnitude(const Complex& v) noexcept { return std::abs(v); }

/// Deterministic PRNG with a portable uniform mapping. The standard
/// distributions are implementation-defined, which would break
/// byte-identical reruns across toolchains; the raw 64-bit stream of
/// mt19937_64 is specified, so we map it ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed)), inc_(splitmix(seed ^ 0x9e3779b97f4a7c15ull) | 1u) {}

    /// Uniform in [0, 1).
    Real uniform01() noexcept {
        return static_cast<Real>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    Real uniform(Real lo, Real hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return n == 0 ? 0 : next() % n;
    }

private:
    // pcg64-style xsl-rr output on a 64-bit LCG state; small, fast, and
    // fully pinned by this file (no library dependence).
    std::uint64_t next() noexcept {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ull + inc_;
        std::uint64_t xorshifted = ((old >> 18u) ^ old) >> 27u;
        std::uint64_t rot = old >> 59u;
        std::uint64_t out = (xorshifted >> rot) | (xorshifted << ((64u - rot) & 63u));
        return out * 0x2545f4914f6cdd1dull;
    }

    static std::uint64_t splitmix(std::uint64_t x) noexcept {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
    std::uint64_t inc_;
};

}  // namespace etsim
