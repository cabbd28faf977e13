#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etsim/numeric.hpp"

namespace etsim::codec {

/// One transmitted packet. Bit layout, most-significant index first:
///   real mode:    [sign][interval parity][sub-interval index...]
///   complex mode: [phase cell index...][interval parity][sub-interval index...]
/// `lambda` is 0 in real mode (the single sign bit plays that role).
struct Packet {
    std::vector<std::uint8_t> bits;  // each entry 0 or 1
    Real t_generated = 0.0;
    int lambda = 0;

    [[nodiscard]] int g() const noexcept { return static_cast<int>(bits.size()); }

    /// "g:lambda:HEX" with bits packed most-significant-first into nibbles,
    /// zero-padded at the tail. Bit-exact round trip via parse().
    [[nodiscard]] std::string to_hex() const;
    [[nodiscard]] static Packet parse(const std::string& text);
};

struct DecodedEvent {
    Real q_ts = 0.0;          // triggering-time estimate
    Real sign_or_phase = 0.0; // decoded sign (+-1) or phase-cell center (radians)
    Complex zbar{0.0, 0.0};   // reconstructed estimation error (complex decode)
};

struct CodecError {
    std::string message;
};

/// Encode a real-mode event. The positive time line is split into
/// intervals of length b*gamma; bit 2 stores the parity of the interval
/// index, the remaining g-2 bits index one of 2^{g-2} equal sub-intervals
/// (half-open, final one closed). Requires g >= 2.
[[nodiscard]] Packet encode_real(Real t_s, int sign_z, int g, Real gamma, Real b);

/// Inverse of encode_real given the reception time. The window
/// [t_c - gamma, t_c] is shorter than b*gamma, so at most two consecutive
/// intervals overlap it and the parity bit picks the right one. Throws
/// CodecError when no overlapping interval matches the parity.
[[nodiscard]] DecodedEvent decode_real(const Packet& p, Real t_c, Real gamma, Real b);

/// sign * J * e^{A (t_c - q_ts)}.
[[nodiscard]] Real reconstruct_zbar_real(const DecodedEvent& dec, Real t_c, Real A, Real J);

/// Complex-mode encode: the first lambda bits index one of 2^lambda phase
/// cells of width 2*pi/2^lambda anchored at angle 0, then parity, then
/// g - lambda - 1 sub-interval bits. Requires g >= lambda + 1, lambda >= 1.
[[nodiscard]] Packet encode_complex(Real t_s, Real phase_z, int g, int lambda, Real gamma, Real b);

/// Complex-mode decode; also reconstructs zbar = e^{A(t_c - q_ts)} J e^{i phi_q}.
[[nodiscard]] DecodedEvent decode_complex(const Packet& p, Real t_c, Real gamma, Real b,
                                          Complex A, Real J);

/// Timing-estimate error bound |t_s - q_ts| for a g-bit real-mode packet.
[[nodiscard]] inline Real timing_error_bound_real(int g, Real gamma, Real b) noexcept {
    return std::ldexp(b * gamma, -(g - 1));
}

/// Complex-mode counterpart, lambda of the g bits spent on the phase.
[[nodiscard]] inline Real timing_error_bound_complex(int g, int lambda, Real gamma, Real b) noexcept {
    return std::ldexp(b * gamma, -(g - lambda));
}

}  // namespace etsim::codec
