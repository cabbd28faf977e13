#include "etsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "etsim/bounds.hpp"

namespace etsim {

long ChannelModel::draw_steps(Rng& rng, std::size_t k, Real gamma, Real dt) const {
    const long max_steps = static_cast<long>(std::floor(gamma / dt + 1e-9));
    if (max_steps <= 0) return 0;
    auto quantize = [&](Real delay) {
        long s = std::lround(delay / dt);
        return std::clamp(s, 1L, max_steps);
    };
    switch (kind) {
        case ChannelKind::Constant: {
            long s = std::lround(constant_delay / dt);
            return std::clamp(s, 0L, max_steps);
        }
        case ChannelKind::UniformOnGrid:
            return 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(max_steps)));
        case ChannelKind::AdversarialMax:
            return max_steps;
        case ChannelKind::Scripted: {
            if (script.empty()) return max_steps;
            const Real d = script[std::min(k, script.size() - 1)];
            return quantize(d);
        }
    }
    return max_steps;
}

Real DisturbanceModel::sample_real(Rng& rng, std::size_t step, Real t, Real M) const {
    switch (kind) {
        case DisturbanceKind::Zero: return 0.0;
        case DisturbanceKind::ConstantMax: return M;
        case DisturbanceKind::Uniform: return rng.uniform(-M, M);
        case DisturbanceKind::Sinusoid: return M * std::sin(2.0 * M_PI * freq * t + phase);
        case DisturbanceKind::Scripted: {
            if (script.empty()) return 0.0;
            Real w = script[std::min(step, script.size() - 1)];
            return std::clamp(w, -M, M);
        }
    }
    return 0.0;
}

Complex DisturbanceModel::sample_complex(Rng& rng, std::size_t step, Real t, Real M) const {
    switch (kind) {
        case DisturbanceKind::Zero: return {0.0, 0.0};
        case DisturbanceKind::ConstantMax: return {M, 0.0};
        case DisturbanceKind::Uniform: {
            // uniform on the disc of radius M
            const Real r = M * std::sqrt(rng.uniform01());
            const Real a = rng.uniform(0.0, 2.0 * M_PI);
            return std::polar(r, a);
        }
        case DisturbanceKind::Sinusoid:
            return std::polar(M, 2.0 * M_PI * freq * t + phase);
        case DisturbanceKind::Scripted: {
            if (script.empty()) return {0.0, 0.0};
            Real w = script[std::min(step, script.size() - 1)];
            return {std::clamp(w, -M, M), 0.0};
        }
    }
    return {0.0, 0.0};
}

namespace {

void check_common(const PlantConfig& plant, const TriggerConfig& trig,
                  std::vector<std::string>& out) {
    if (plant.B == Complex{0.0, 0.0}) out.emplace_back("B must be nonzero");
    if (plant.M < 0.0) out.emplace_back("M must be >= 0");
    if (!(trig.J > 0.0)) out.emplace_back("J must be > 0");
    if (!(trig.rho0 > 0.0 && trig.rho0 < 1.0)) out.emplace_back("rho0 must lie in (0,1)");
    if (!(trig.b > 1.0)) out.emplace_back("b must be > 1");
    if (trig.gamma < 0.0) out.emplace_back("gamma must be >= 0");
}

}  // namespace

std::vector<std::string> validate_config(const PlantConfig& plant, const TriggerConfig& trig,
                                         ValidationMode mode) {
    std::vector<std::string> out;
    check_common(plant, trig, out);

    const Real A = plant.a();
    switch (mode) {
        case ValidationMode::SufficientReal: {
            if (!(A > 0.0)) out.emplace_back("A must be > 0 (unstable plant)");
            if (!(plant.closed_loop().real() < 0.0)) out.emplace_back("A - B*K must be < 0");
            if (A > 0.0 && trig.rho0 > 0.0) {
                const Real floor = plant.M / (A * trig.rho0) * std::expm1(A * trig.gamma);
                if (!(trig.J > floor))
                    out.emplace_back("J must exceed (M/(A*rho0))(e^{A*gamma}-1)");
            }
            break;
        }
        case ValidationMode::NecessaryReal: {
            if (!(A > 0.0)) out.emplace_back("A must be > 0 (unstable plant)");
            if (A > 0.0 && plant.M > A * trig.J) out.emplace_back("M <= AJ fails");
            break;
        }
        case ValidationMode::SufficientComplex: {
            if (!(A >= 0.0)) out.emplace_back("Re(A) must be >= 0");
            if (!(plant.closed_loop().real() < 0.0)) out.emplace_back("Re(A - B*K) must be < 0");
            if (trig.lambda < 1) out.emplace_back("lambda must be >= 1");
            const Real cs = trig.chi + trig.chi_prime;
            if (!(trig.chi > 0.0 && trig.chi_prime > 0.0 && cs < 1.0))
                out.emplace_back("chi and chi' must be positive with chi + chi' < 1");
            if (out.empty()) {
                auto fp = bounds::complex_bits_fixed_point(plant.A, trig.gamma, plant.M, trig.J,
                                                           trig.rho0, trig.b, trig.lambda);
                if (!fp.converged) {
                    out.emplace_back("phase/timing packet-size fixed point did not converge");
                } else {
                    for (auto& v : bounds::complex_constraint_violations(
                             plant.A, trig.gamma, plant.M, trig.J, trig.rho0, trig.lambda,
                             trig.chi, trig.chi_prime, fp.zeta))
                        out.push_back(v);
                }
            }
            break;
        }
    }
    return out;
}

Real IspsEnvelope::psi(Real w_sup) const noexcept {
    const Real c = -decay_rate();
    return w_sup / c;
}

Real IspsEnvelope::iota() const noexcept {
    const Real c = -decay_rate();
    const Real bk = std::abs(plant.B * plant.K);
    return bk * trig.J * std::exp(plant.a() * trig.gamma) / c;
}

Real IspsEnvelope::vartheta(Real w_sup) const noexcept {
    const Real c = -decay_rate();
    const Real bk = std::abs(plant.B * plant.K);
    return bk * w_sup * phi_exact(plant.a(), trig.gamma) / c;
}

Real IspsEnvelope::eval(Real x0_abs, Real w_sup, Real t) const {
    return std::exp(decay_rate() * t) * x0_abs + psi(w_sup) + iota() + vartheta(w_sup);
}

Real isps_envelope(const PlantConfig& plant, const TriggerConfig& trig, Real x0_abs,
                   Real w_sup, Real t) {
    if (!(plant.closed_loop().real() < 0.0))
        throw std::invalid_argument("isps_envelope: Re(A - B*K) must be < 0");
    IspsEnvelope env{plant, trig};
    return env.eval(x0_abs, w_sup, t);
}

}  // namespace etsim
