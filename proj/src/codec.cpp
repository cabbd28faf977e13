#include "etsim/codec.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace etsim::codec {

namespace {

/// Index of the width-`w` half-open cell containing x >= 0, clamped so the
/// final cell of an n-cell partition is closed on the right.
long cell_index(Real x, Real w, long n) {
    long i = static_cast<long>(std::floor(x / w));
    if (i < 0) i = 0;
    if (i > n - 1) i = n - 1;
    return i;
}

void push_index_bits(std::vector<std::uint8_t>& bits, long idx, int nbits) {
    for (int k = nbits - 1; k >= 0; --k)
        bits.push_back(static_cast<std::uint8_t>((idx >> k) & 1));
}

long read_index_bits(const std::vector<std::uint8_t>& bits, std::size_t from, int nbits) {
    long idx = 0;
    for (int k = 0; k < nbits; ++k) idx = (idx << 1) | bits[from + static_cast<std::size_t>(k)];
    return idx;
}

/// Pick the b*gamma-interval index whose parity matches, among those
/// overlapping [t_c - gamma, t_c]. Returns -1 when none matches.
long match_interval(Real t_c, Real gamma, Real bg, int parity) {
    const long j_hi = std::max(0L, static_cast<long>(std::floor(t_c / bg)));
    const long j_lo = std::max(0L, static_cast<long>(std::floor((t_c - gamma) / bg)));
    for (long j = j_hi; j >= j_lo; --j)
        if ((j & 1L) == parity) return j;
    return -1;
}

}  // namespace

std::string Packet::to_hex() const {
    char head[64];
    std::snprintf(head, sizeof(head), "%d:%d:", g(), lambda);
    std::string out = head;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            nibble <<= 1;
            if (i + k < bits.size()) nibble |= bits[i + k];
        }
        out.push_back("0123456789abcdef"[nibble]);
    }
    return out;
}

Packet Packet::parse(const std::string& text) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CodecError{"packet parse: expected g:lambda:HEX"};
    Packet p;
    const int g = std::stoi(text.substr(0, c1));
    p.lambda = std::stoi(text.substr(c1 + 1, c2 - c1 - 1));
    const std::string hex = text.substr(c2 + 1);
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else throw CodecError{"packet parse: bad hex digit"};
        for (int k = 3; k >= 0; --k) p.bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
    }
    if (static_cast<int>(p.bits.size()) < g) throw CodecError{"packet parse: truncated bits"};
    p.bits.resize(static_cast<std::size_t>(g));
    return p;
}

Packet encode_real(Real t_s, int sign_z, int g, Real gamma, Real b) {
    if (g < 2) throw CodecError{"encode_real: g must be >= 2 (1-bit packets are event markers)"};
    if (g > 56) throw CodecError{"encode_real: g too large for the sub-interval index"};
    if (t_s < 0.0 || !(gamma > 0.0) || !(b > 1.0))
        throw CodecError{"encode_real: need t_s >= 0, gamma > 0, b > 1"};

    const Real bg = b * gamma;
    const long j = static_cast<long>(std::floor(t_s / bg));
    const long nsub = 1L << (g - 2);
    const Real width = bg / static_cast<Real>(nsub);

    Packet p;
    p.t_generated = t_s;
    p.lambda = 0;
    p.bits.reserve(static_cast<std::size_t>(g));
    p.bits.push_back(sign_z > 0 ? 1 : 0);
    p.bits.push_back(static_cast<std::uint8_t>(j & 1L));
    push_index_bits(p.bits, cell_index(t_s - static_cast<Real>(j) * bg, width, nsub), g - 2);
    return p;
}

DecodedEvent decode_real(const Packet& p, Real t_c, Real gamma, Real b) {
    const int g = p.g();
    if (g < 2) throw CodecError{"decode_real: g must be >= 2"};
    const Real bg = b * gamma;

    const long j = match_interval(t_c, gamma, bg, p.bits[1]);
    if (j < 0) throw CodecError{"undecodable: no window interval matches the parity bit"};

    const long nsub = 1L << (g - 2);
    const Real width = bg / static_cast<Real>(nsub);
    const long idx = read_index_bits(p.bits, 2, g - 2);

    DecodedEvent dec;
    dec.q_ts = static_cast<Real>(j) * bg + (static_cast<Real>(idx) + 0.5) * width;
    dec.sign_or_phase = p.bits[0] ? 1.0 : -1.0;
    return dec;
}

Real reconstruct_zbar_real(const DecodedEvent& dec, Real t_c, Real A, Real J) {
    return dec.sign_or_phase * J * std::exp(A * (t_c - dec.q_ts));
}

Packet encode_complex(Real t_s, Real phase_z, int g, int lambda, Real gamma, Real b) {
    if (lambda < 1) throw CodecError{"encode_complex: lambda must be >= 1"};
    if (g <= lambda) throw CodecError{"encode_complex: g must be >= lambda + 1"};
    if (g - lambda > 56 || lambda > 56) throw CodecError{"encode_complex: bit widths too large"};
    if (t_s < 0.0 || !(gamma > 0.0) || !(b > 1.0))
        throw CodecError{"encode_complex: need t_s >= 0, gamma > 0, b > 1"};

    Real ph = std::fmod(phase_z, 2.0 * M_PI);
    if (ph < 0.0) ph += 2.0 * M_PI;

    const long ncell = 1L << lambda;
    const Real cell = 2.0 * M_PI / static_cast<Real>(ncell);
    const Real bg = b * gamma;
    const long j = static_cast<long>(std::floor(t_s / bg));
    const long nsub = 1L << (g - lambda - 1);
    const Real width = bg / static_cast<Real>(nsub);

    Packet p;
    p.t_generated = t_s;
    p.lambda = lambda;
    p.bits.reserve(static_cast<std::size_t>(g));
    push_index_bits(p.bits, cell_index(ph, cell, ncell), lambda);
    p.bits.push_back(static_cast<std::uint8_t>(j & 1L));
    push_index_bits(p.bits, cell_index(t_s - static_cast<Real>(j) * bg, width, nsub), g - lambda - 1);
    return p;
}

DecodedEvent decode_complex(const Packet& p, Real t_c, Real gamma, Real b, Complex A, Real J) {
    const int g = p.g();
    const int lambda = p.lambda;
    if (lambda < 1 || g <= lambda) throw CodecError{"decode_complex: malformed packet"};

    const Real bg = b * gamma;
    const long j = match_interval(t_c, gamma, bg, p.bits[static_cast<std::size_t>(lambda)]);
    if (j < 0) throw CodecError{"undecodable: no window interval matches the parity bit"};

    const long ncell = 1L << lambda;
    const Real cell = 2.0 * M_PI / static_cast<Real>(ncell);
    const long phase_idx = read_index_bits(p.bits, 0, lambda);

    const long nsub = 1L << (g - lambda - 1);
    const Real width = bg / static_cast<Real>(nsub);
    const long idx = read_index_bits(p.bits, static_cast<std::size_t>(lambda) + 1, g - lambda - 1);

    DecodedEvent dec;
    dec.q_ts = static_cast<Real>(j) * bg + (static_cast<Real>(idx) + 0.5) * width;
    dec.sign_or_phase = (static_cast<Real>(phase_idx) + 0.5) * cell;
    dec.zbar = std::exp(A * (t_c - dec.q_ts)) * std::polar(J, dec.sign_or_phase);
    return dec;
}

}  // namespace etsim::codec
