#include "etsim/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "etsim/bounds.hpp"

namespace etsim::adversary {

UncertaintySet uncertainty_set(Real A, Real gamma, Real M, Real J, int sign) {
    if (!(A > 0.0) || !(J > 0.0) || gamma < 0.0 || M < 0.0)
        throw std::invalid_argument("uncertainty_set: invalid parameters");
    if (M > A * J)
        throw std::invalid_argument("uncertainty_set: requires M <= A J");
    UncertaintySet s;
    s.sign = sign >= 0 ? 1 : -1;
    s.lo = J;
    s.hi = J * std::exp(A * gamma) + (M / A) * std::expm1(A * gamma);
    return s;
}

MinimalQuantizer minimal_quantizer(Real A, Real gamma, Real M, Real J) {
    const auto set = uncertainty_set(A, gamma, M, J, +1);
    MinimalQuantizer q;
    q.cells.lo = set.lo;
    q.cells.hi = set.hi;
    const Real measure = set.measure_one_sided();
    q.cells.n_cells = std::max(1L, static_cast<long>(std::ceil(measure / (2.0 * J) - 1e-12)));
    return q;
}

namespace {

constexpr Real kReplayB = 1.0;
constexpr Real kReplayRho0 = 0.5;

Real replay_feedback_gain(Real A) { return A + 1.0; }

}  // namespace

WorstCaseRealization worst_case_realization(Real A, Real gamma, Real M, Real J,
                                            RealizationTarget target, Real dt, Real T,
                                            Real alpha, Real upsilon) {
    const Real beta = bounds::beta(A, M, J);
    if (target == RealizationTarget::HalfRadiusResidual) {
        alpha = beta;
        upsilon = 0.5 * J;
    }
    if (std::isnan(alpha) || std::isnan(upsilon))
        throw std::invalid_argument("worst_case_realization: IntervalCap needs alpha, upsilon");
    if (beta > gamma)
        throw std::invalid_argument("worst_case_realization: infeasible, beta > gamma");
    if (alpha > gamma)
        throw std::invalid_argument("worst_case_realization: delay cap exceeds gamma");

    const auto quant = minimal_quantizer(A, gamma, M, J);
    const long cap_steps =
        std::min(static_cast<long>(std::ceil(alpha / dt)),
                 static_cast<long>(std::floor(gamma / dt + 1e-9)));
    if (cap_steps < 1)
        throw std::invalid_argument("worst_case_realization: delay cap below one grid step");

    WorstCaseRealization out;
    out.disturbance_value = M;
    out.residual_target = upsilon;
    out.delay_cap = static_cast<Real>(cap_steps) * dt;

    // Mirror the engine arithmetic op-for-op so the scripted replay lands
    // on the same floating-point trajectory.
    const Complex Ac{A, 0.0};
    const auto hold = engine::HoldFactors::make(Ac, dt);
    const Complex B{kReplayB, 0.0};
    const Complex K{replay_feedback_gain(A), 0.0};
    Complex x{0.995 * J, 0.0};
    Complex xh{0.0, 0.0};
    Complex u = -K * xh;

    const long n_steps = std::lround(T / dt);
    long pending_rx = -1;
    for (long i = 0; i < n_steps; ++i) {
        const Complex w{M, 0.0};
        engine::hold_step(x, xh, u, w, B, hold);
        if (pending_rx == i + 1) {
            const Real z = (x - xh).real();
            xh += quant.reconstruct(z);
            pending_rx = -1;
        }
        u = -K * xh;
        const Real z = (x - xh).real();
        if (pending_rx < 0 && std::abs(z) >= J) {
            // scan grid delays; smallest one whose reception sits at least
            // upsilon from its cell center (fall back to the best seen)
            const Real zs = std::abs(z);
            long best_k = 1;
            Real best_res = -1.0;
            long chosen = -1;
            for (long k = 1; k <= cap_steps; ++k) {
                const Real grow = std::exp(A * static_cast<Real>(k) * dt);
                const Real zk = zs * grow + (M / A) * (grow - 1.0);
                const Real res = std::abs(zk - std::abs(quant.reconstruct(zk)));
                if (res > best_res) {
                    best_res = res;
                    best_k = k;
                }
                if (res >= upsilon) {
                    chosen = k;
                    break;
                }
            }
            if (chosen < 0) chosen = best_k;
            out.delays.push_back(static_cast<Real>(chosen) * dt);
            pending_rx = i + 1 + chosen;
        }
    }
    return out;
}

engine::RunConfig replay_config(Real A, Real gamma, Real M, Real J,
                                const WorstCaseRealization& wcr, Real dt, Real T) {
    engine::RunConfig cfg;
    cfg.plant.A = {A, 0.0};
    cfg.plant.B = {kReplayB, 0.0};
    cfg.plant.K = {replay_feedback_gain(A), 0.0};
    cfg.plant.M = M;
    cfg.trig.J = J;
    cfg.trig.rho0 = kReplayRho0;
    cfg.trig.gamma = gamma;
    cfg.trig.b = 1.0001;
    cfg.channel.kind = ChannelKind::Scripted;
    cfg.channel.script = wcr.delays;
    cfg.disturbance.kind = DisturbanceKind::ConstantMax;
    cfg.reception = engine::ReceptionPolicy::MinimalQuantizer;
    cfg.quantizer = minimal_quantizer(A, gamma, M, J).cells;
    cfg.packet_policy = engine::PacketPolicy::Fixed;
    cfg.fixed_bits = std::max(
        1, static_cast<int>(std::ceil(std::log2(static_cast<Real>(2 * cfg.quantizer.n_cells)))));
    cfg.dt = dt;
    cfg.T = T;
    cfg.x0 = {0.995 * J, 0.0};
    cfg.xhat0 = {0.0, 0.0};
    return cfg;
}

}  // namespace etsim::adversary
