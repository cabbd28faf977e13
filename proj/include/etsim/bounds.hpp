#pragma once

#include <string>
#include <vector>

#include "etsim/numeric.hpp"

namespace etsim::bounds {

/// Closed-form packet-size / rate calculators for the real scalar plant.
/// All take the open-loop gain A > 0, delay bound gamma, disturbance
/// bound M, triggering radius J, contraction rho0 and timeline scale b
/// as applicable. Rates are bits (or events) per second.

/// Real bits sufficient for the rho0-contraction at every reception:
/// max{0, 1 + log2( A b gamma / ln(1 + eta) )} with
/// eta = e^{-A gamma} (rho0 - (M/(J A))(e^{A gamma} - 1)).
/// Requires J > (M/(A rho0))(e^{A gamma} - 1) so that eta > 0.
[[nodiscard]] Real sufficient_bits_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b);

/// Integer packet size actually transmitted: max{1, ceil(sufficient bits)}.
[[nodiscard]] int practical_bits_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b);

/// Sufficient transmission rate: trigger-rate bound times sufficient bits.
[[nodiscard]] Real sufficient_rate_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b);

/// Bits any policy must send per event: max{0, log2((M/(AJ)+1)(e^{A gamma}-1))}.
/// Requires M <= A J.
[[nodiscard]] Real necessary_bits(Real A, Real gamma, Real M, Real J);

/// Uniform upper bound on the triggering rate, A / ln((JA+M)/(rho0 JA+M)).
/// Returns +inf as rho0 -> 1 (the log vanishes).
[[nodiscard]] Real trig_rate_upper(Real A, Real M, Real J, Real rho0);

/// Lower bound on the triggering rate when some realization keeps the
/// post-reception error at least Upsilon with delays at most alpha:
/// A / ln( e^{A alpha} (JA+M) / (Upsilon A + M) ). +inf when the log
/// argument is 1 (error never contracts).
[[nodiscard]] Real trig_rate_lower_general(Real A, Real M, Real J, Real alpha, Real Upsilon);

/// Necessary rate valid for every quantization policy. Degenerates at
/// M = 0 (infinite log denominator); returns 0 there.
[[nodiscard]] Real necessary_rate_general(Real A, Real gamma, Real M, Real J);

/// Tighter necessary rate for minimum-packet-size policies; requires
/// beta(A, M, J) <= gamma.
[[nodiscard]] Real necessary_rate_restricted(Real A, Real gamma, Real M, Real J);

/// Critical delay after which the estimation error has swept one full
/// quantization cell of measure 2J: ln(1 + 2AJ/(AJ+M)) / A.
[[nodiscard]] Real beta(Real A, Real M, Real J);

/// Minimum access rate from the data-rate theorem: A/ln2 for real plants.
[[nodiscard]] Real datarate_baseline(Real A);
/// Complex plants: 2 Re(A) / ln 2.
[[nodiscard]] Real datarate_baseline(Complex A);

/// Raw complex packet-size expression at a fixed phase/timing mismatch
/// zeta = 1 - cos(Im(A) * timing error). Returns +inf when the log
/// argument is <= 1, i.e. no finite packet size achieves the contraction
/// with this lambda. No constraint validation.
[[nodiscard]] Real complex_bits_formula(Complex A, Real gamma, Real M, Real J, Real rho0,
                                        Real b, int lambda, Real zeta);

/// The log argument of the above, exposed for reduction checks:
/// (1 + e^{-Re(A) gamma}(rho0 - (M/(Re(A) J))(e^{Re(A) gamma}-1))) /
/// (2 sin(pi/2^{lambda+1}) + 1 + sqrt(2 zeta)).
[[nodiscard]] Real complex_log_argument(Complex A, Real gamma, Real M, Real J, Real rho0,
                                        int lambda, Real zeta);

struct ComplexBitsFixedPoint {
    Real bits = kNaN;   // resolved packet-size expression
    Real zeta = 0.0;    // phase/timing mismatch at the fixed point
    bool converged = false;
    int iterations = 0;
};

/// zeta depends on the timing-error bound, which depends on the packet
/// size itself. Iterates g -> formula(zeta(g)) from g0 = lambda + 1; the
/// map is non-increasing in g, so it settles or oscillates within one
/// integer, in which case the larger (conservative) value is kept.
[[nodiscard]] ComplexBitsFixedPoint complex_bits_fixed_point(Complex A, Real gamma, Real M,
                                                             Real J, Real rho0, Real b,
                                                             int lambda);

/// Smallest phase-bit count satisfying the phase-resolution constraint
/// lambda > log2(pi / arcsin((1 - chi - chi')/(2 e^{Re(A) gamma}))) - 1.
/// Throws when the chi split leaves no admissible count.
[[nodiscard]] int min_phase_bits(Complex A, Real gamma, Real chi, Real chi_prime);

/// Feasibility inequalities of the complex design at a given zeta; empty
/// when all hold. chi, chi_prime split the contraction budget between the
/// disturbance and the phase/timing mismatch.
[[nodiscard]] std::vector<std::string> complex_constraint_violations(
    Complex A, Real gamma, Real M, Real J, Real rho0, int lambda, Real chi, Real chi_prime,
    Real zeta);

/// Validated complex sufficient bits: runs the fixed point, checks the
/// constraints, throws std::invalid_argument on violation.
[[nodiscard]] Real sufficient_bits_complex(Complex A, Real gamma, Real M, Real J, Real rho0,
                                           Real b, int lambda, Real chi, Real chi_prime);

/// Integer complex packet size: max{lambda + 1, ceil(bits)}.
[[nodiscard]] int practical_bits_complex(Complex A, Real gamma, Real M, Real J, Real rho0,
                                         Real b, int lambda);

/// Sufficient complex rate: Re(A) bits / ln((J Re(A)+M)/(rho0 J Re(A)+M)).
[[nodiscard]] Real sufficient_rate_complex(Complex A, Real gamma, Real M, Real J, Real rho0,
                                           Real b, int lambda, Real chi, Real chi_prime);

/// One row of every applicable bound at a parameter point.
struct RateReport {
    Real gamma = kNaN;
    Real sufficient_bits = kNaN;
    int practical_bits = 0;
    Real sufficient_rate = kNaN;
    Real necessary_bits = kNaN;
    Real necessary_rate_general = kNaN;
    Real necessary_rate_restricted = kNaN;
    Real trig_rate_upper = kNaN;
    Real trig_rate_lower_restricted = kNaN;
    Real beta = kNaN;
    Real datarate_baseline = kNaN;
    std::vector<std::string> warnings;
};

/// Evaluates every real-plant bound at one point, soft-failing columns
/// whose domain conditions do not hold (NaN + warning).
[[nodiscard]] RateReport rate_report_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b);

/// Complex variant: sufficiency columns from the complex design, the
/// necessary columns are left NaN (real-plant theory only).
[[nodiscard]] RateReport rate_report_complex(Complex A, Real gamma, Real M, Real J, Real rho0,
                                             Real b, int lambda, Real chi, Real chi_prime);

}  // namespace etsim::bounds
