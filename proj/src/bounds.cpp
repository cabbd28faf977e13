#include "etsim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etsim::bounds {

namespace {

Real require_positive_eta(Real A, Real gamma, Real M, Real J, Real rho0) {
    const Real eta = std::exp(-A * gamma) * (rho0 - (M / (J * A)) * std::expm1(A * gamma));
    if (!(eta > 0.0))
        throw std::invalid_argument("sufficient bits: J must exceed (M/(A rho0))(e^{A gamma}-1)");
    return eta;
}

}  // namespace

Real sufficient_bits_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b) {
    if (!(A > 0.0) || !(b > 1.0) || !(J > 0.0) || !(rho0 > 0.0 && rho0 < 1.0) || gamma < 0.0)
        throw std::invalid_argument("sufficient_bits_real: invalid parameters");
    if (gamma == 0.0) return 0.0;  // numerator A b gamma vanishes
    const Real eta = require_positive_eta(A, gamma, M, J, rho0);
    const Real raw = 1.0 + std::log2(A * b * gamma / std::log1p(eta));
    return std::max(0.0, raw);
}

int practical_bits_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b) {
    const Real s = sufficient_bits_real(A, gamma, M, J, rho0, b);
    const Real c = std::ceil(s);
    if (c > 56.0) throw std::invalid_argument("practical_bits_real: packet size out of range");
    return std::max(1, static_cast<int>(c));
}

Real sufficient_rate_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b) {
    return trig_rate_upper(A, M, J, rho0) * sufficient_bits_real(A, gamma, M, J, rho0, b);
}

Real necessary_bits(Real A, Real gamma, Real M, Real J) {
    if (!(A > 0.0) || !(J > 0.0) || gamma < 0.0)
        throw std::invalid_argument("necessary_bits: invalid parameters");
    if (M > A * J) throw std::invalid_argument("necessary_bits: requires M <= A J");
    if (gamma == 0.0) return 0.0;
    return std::max(0.0, std::log2((M / (A * J) + 1.0) * std::expm1(A * gamma)));
}

Real trig_rate_upper(Real A, Real M, Real J, Real rho0) {
    if (!(rho0 > 0.0 && rho0 < 1.0))
        throw std::invalid_argument("trig_rate_upper: rho0 must lie in (0,1)");
    const Real den = std::log((J * A + M) / (rho0 * J * A + M));
    if (den <= 0.0) return kInf;
    return A / den;
}

Real trig_rate_lower_general(Real A, Real M, Real J, Real alpha, Real Upsilon) {
    if (Upsilon < 0.0 || alpha < 0.0)
        throw std::invalid_argument("trig_rate_lower_general: need Upsilon >= 0, alpha >= 0");
    if (Upsilon * A + M == 0.0)
        throw std::invalid_argument("trig_rate_lower_general: Upsilon A + M must be positive");
    const Real den = A * alpha + std::log((J * A + M) / (Upsilon * A + M));
    if (den <= 0.0) return kInf;  // error never contracts
    return A / den;
}

Real necessary_rate_general(Real A, Real gamma, Real M, Real J) {
    const Real num = necessary_bits(A, gamma, M, J);
    if (M == 0.0) return 0.0;  // log denominator diverges; vacuous bound
    const Real den = A * gamma + std::log((J * A + M) / M);
    return A * num / den;
}

Real necessary_rate_restricted(Real A, Real gamma, Real M, Real J) {
    if (beta(A, M, J) > gamma)
        throw std::invalid_argument("necessary_rate_restricted: requires beta <= gamma");
    const Real num = necessary_bits(A, gamma, M, J);
    const Real den =
        std::log((1.0 + 2.0 * A * J / (A * J + M)) * (J * A + M) / (0.5 * J * A + M));
    return A * num / den;
}

Real beta(Real A, Real M, Real J) {
    if (!(A > 0.0)) throw std::invalid_argument("beta: A must be > 0");
    return std::log1p(2.0 * A * J / (A * J + M)) / A;
}

Real datarate_baseline(Real A) {
    if (!(A > 0.0)) throw std::invalid_argument("datarate_baseline: A must be > 0");
    return A / std::log(2.0);
}

Real datarate_baseline(Complex A) {
    if (!(A.real() >= 0.0)) throw std::invalid_argument("datarate_baseline: Re(A) must be >= 0");
    return 2.0 * A.real() / std::log(2.0);
}

Real complex_log_argument(Complex A, Real gamma, Real M, Real J, Real rho0, int lambda,
                          Real zeta) {
    const Real a = A.real();
    const Real budget = rho0 - (M / (a * J)) * std::expm1(a * gamma);
    const Real num = 1.0 + std::exp(-a * gamma) * budget;
    const Real den = 2.0 * std::sin(M_PI / std::ldexp(2.0, lambda)) + 1.0 + std::sqrt(2.0 * zeta);
    return num / den;
}

Real complex_bits_formula(Complex A, Real gamma, Real M, Real J, Real rho0, Real b, int lambda,
                          Real zeta) {
    if (!(A.real() > 0.0) || !(b > 1.0) || !(J > 0.0) || lambda < 1 || zeta < 0.0)
        throw std::invalid_argument("complex_bits_formula: invalid parameters");
    if (gamma == 0.0) return 0.0;
    const Real arg = complex_log_argument(A, gamma, M, J, rho0, lambda, zeta);
    if (!(arg > 1.0)) return kInf;  // phase error alone exceeds the budget
    const Real raw = static_cast<Real>(lambda) + std::log2(A.real() * b * gamma / std::log(arg));
    return std::max(0.0, raw);
}

ComplexBitsFixedPoint complex_bits_fixed_point(Complex A, Real gamma, Real M, Real J, Real rho0,
                                               Real b, int lambda) {
    ComplexBitsFixedPoint out;
    const Real im = A.imag();
    auto zeta_of = [&](Real g) {
        if (im == 0.0) return 0.0;
        // timing error bound b gamma / 2^{g - lambda}, g may be fractional here
        const Real tau = b * gamma * std::exp2(-(g - static_cast<Real>(lambda)));
        return 1.0 - std::cos(im * tau);
    };
    Real g = static_cast<Real>(lambda) + 1.0;
    Real prev = kNaN;
    for (int it = 1; it <= 64; ++it) {
        out.iterations = it;
        const Real zeta = zeta_of(g);
        const Real next = complex_bits_formula(A, gamma, M, J, rho0, b, lambda, zeta);
        if (std::isinf(next)) {
            // larger packets only shrink zeta; if even the current zeta is
            // infeasible, retry with the zeta of a very large packet before
            // giving up.
            const Real zeta_floor = zeta_of(56.0);
            const Real best = complex_bits_formula(A, gamma, M, J, rho0, b, lambda, zeta_floor);
            out.bits = best;
            out.zeta = zeta_floor;
            out.converged = !std::isinf(best);
            if (out.converged) {
                g = std::max(best, static_cast<Real>(lambda) + 1.0);
                prev = kNaN;
                continue;
            }
            return out;
        }
        const Real effective = std::max(next, static_cast<Real>(lambda) + 1.0);
        if (std::abs(effective - g) < 1e-12) {
            out.bits = next;
            out.zeta = zeta;
            out.converged = true;
            return out;
        }
        if (!std::isnan(prev) && std::abs(effective - prev) < 1e-12) {
            // two-cycle: keep the larger iterate (its bits more than suffice)
            const Real hi = std::max(g, effective);
            out.zeta = zeta_of(hi);
            out.bits = complex_bits_formula(A, gamma, M, J, rho0, b, lambda, out.zeta);
            out.converged = true;
            return out;
        }
        prev = g;
        g = effective;
    }
    out.converged = false;
    return out;
}

int min_phase_bits(Complex A, Real gamma, Real chi, Real chi_prime) {
    const Real asin_arg = (1.0 - chi - chi_prime) / (2.0 * std::exp(A.real() * gamma));
    if (!(asin_arg > 0.0 && asin_arg < 1.0))
        throw std::invalid_argument("min_phase_bits: chi split leaves no admissible count");
    const Real floor_expr = std::log2(M_PI / std::asin(asin_arg)) - 1.0;
    return std::max(1, static_cast<int>(std::floor(floor_expr)) + 1);
}

std::vector<std::string> complex_constraint_violations(Complex A, Real gamma, Real M, Real J,
                                                       Real rho0, int lambda, Real chi,
                                                       Real chi_prime, Real zeta) {
    std::vector<std::string> out;
    const Real a = A.real();
    const Real ea = std::exp(a * gamma);
    const Real sin_term = 2.0 * std::sin(M_PI / std::ldexp(2.0, lambda));
    const Real sq = std::sqrt(2.0 * zeta);

    if (rho0 < (M / (a * J)) * (ea - 1.0) + ea * (sin_term + sq))
        out.emplace_back("rho0 below the disturbance + phase/timing floor");
    if (J < (M / (a * chi)) * (ea - 1.0))
        out.emplace_back("J below the chi disturbance budget");
    if (sq * ea > chi_prime)
        out.emplace_back("timing mismatch sqrt(2 zeta) e^{Re(A) gamma} exceeds chi'");
    const Real asin_arg = (1.0 - chi - chi_prime) / (2.0 * ea);
    if (!(asin_arg > 0.0 && asin_arg < 1.0)) {
        out.emplace_back("chi split leaves no admissible phase-bit count");
    } else if (!(static_cast<Real>(lambda) > std::log2(M_PI / std::asin(asin_arg)) - 1.0)) {
        out.emplace_back("lambda below the phase-resolution floor");
    }
    return out;
}

Real sufficient_bits_complex(Complex A, Real gamma, Real M, Real J, Real rho0, Real b,
                             int lambda, Real chi, Real chi_prime) {
    auto fp = complex_bits_fixed_point(A, gamma, M, J, rho0, b, lambda);
    if (!fp.converged)
        throw std::invalid_argument("sufficient_bits_complex: fixed point did not converge");
    auto viol = complex_constraint_violations(A, gamma, M, J, rho0, lambda, chi, chi_prime, fp.zeta);
    if (!viol.empty()) throw std::invalid_argument("sufficient_bits_complex: " + viol.front());
    return fp.bits;
}

int practical_bits_complex(Complex A, Real gamma, Real M, Real J, Real rho0, Real b, int lambda) {
    auto fp = complex_bits_fixed_point(A, gamma, M, J, rho0, b, lambda);
    if (!fp.converged)
        throw std::invalid_argument("practical_bits_complex: fixed point did not converge");
    const Real c = std::ceil(fp.bits);
    if (c > 56.0) throw std::invalid_argument("practical_bits_complex: packet size out of range");
    return std::max(lambda + 1, static_cast<int>(c));
}

Real sufficient_rate_complex(Complex A, Real gamma, Real M, Real J, Real rho0, Real b,
                             int lambda, Real chi, Real chi_prime) {
    const Real a = A.real();
    const Real bits = sufficient_bits_complex(A, gamma, M, J, rho0, b, lambda, chi, chi_prime);
    const Real den = std::log((J * a + M) / (rho0 * J * a + M));
    if (den <= 0.0) return kInf;
    return a * bits / den;
}

RateReport rate_report_real(Real A, Real gamma, Real M, Real J, Real rho0, Real b) {
    RateReport r;
    r.gamma = gamma;
    try {
        r.sufficient_bits = sufficient_bits_real(A, gamma, M, J, rho0, b);
        r.practical_bits = practical_bits_real(A, gamma, M, J, rho0, b);
        r.sufficient_rate = sufficient_rate_real(A, gamma, M, J, rho0, b);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(std::string("sufficiency: ") + e.what());
    }
    try {
        r.necessary_bits = necessary_bits(A, gamma, M, J);
        r.necessary_rate_general = necessary_rate_general(A, gamma, M, J);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(std::string("necessity: ") + e.what());
    }
    try {
        r.beta = beta(A, M, J);
        r.necessary_rate_restricted = necessary_rate_restricted(A, gamma, M, J);
        r.trig_rate_lower_restricted = trig_rate_lower_general(A, M, J, r.beta, 0.5 * J);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(std::string("restricted necessity: ") + e.what());
    }
    try {
        r.trig_rate_upper = trig_rate_upper(A, M, J, rho0);
        r.datarate_baseline = datarate_baseline(A);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(e.what());
    }
    return r;
}

RateReport rate_report_complex(Complex A, Real gamma, Real M, Real J, Real rho0, Real b,
                               int lambda, Real chi, Real chi_prime) {
    RateReport r;
    r.gamma = gamma;
    try {
        r.sufficient_bits = sufficient_bits_complex(A, gamma, M, J, rho0, b, lambda, chi, chi_prime);
        r.practical_bits = practical_bits_complex(A, gamma, M, J, rho0, b, lambda);
        r.sufficient_rate = sufficient_rate_complex(A, gamma, M, J, rho0, b, lambda, chi, chi_prime);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(std::string("sufficiency: ") + e.what());
    }
    try {
        const Real a = A.real();
        r.trig_rate_upper = trig_rate_upper(a, M, J, rho0);
        r.datarate_baseline = datarate_baseline(A);
    } catch (const std::exception& e) {
        r.warnings.emplace_back(e.what());
    }
    return r;
}

}  // namespace etsim::bounds
