#include "etsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "etsim/bounds.hpp"

namespace etsim::engine {

Real QuantizerSpec::center_for(Real v) const noexcept {
    const Real s = v < 0.0 ? -1.0 : 1.0;
    const Real m = std::clamp(std::abs(v), lo, hi);
    const Real w = width();
    long idx = static_cast<long>(std::floor((m - lo) / w));
    idx = std::clamp(idx, 0L, n_cells - 1);
    return s * (lo + (static_cast<Real>(idx) + 0.5) * w);
}

std::vector<Real> EventLog::intervals() const {
    std::vector<Real> out;
    for (std::size_t k = 1; k < ts.size(); ++k) out.push_back(ts[k] - ts[k - 1]);
    return out;
}

int resolve_packet_bits(const RunConfig& cfg) {
    if (cfg.packet_policy == PacketPolicy::Fixed) {
        if (cfg.fixed_bits < 1) throw std::invalid_argument("fixed packet size must be >= 1");
        return cfg.fixed_bits;
    }
    if (cfg.reception == ReceptionPolicy::MinimalQuantizer) {
        // sign plus a cell index over both signed branches
        const Real total = static_cast<Real>(2 * cfg.quantizer.n_cells);
        return std::max(1, static_cast<int>(std::ceil(std::log2(total))));
    }
    if (cfg.plant.complex_mode)
        return bounds::practical_bits_complex(cfg.plant.A, cfg.trig.gamma, cfg.plant.M,
                                              cfg.trig.J, cfg.trig.rho0, cfg.trig.b,
                                              cfg.trig.lambda);
    if (cfg.trig.gamma == 0.0) return 1;  // pure event marker, timestamps are exact
    return bounds::practical_bits_real(cfg.plant.a(), cfg.trig.gamma, cfg.plant.M, cfg.trig.J,
                                       cfg.trig.rho0, cfg.trig.b);
}

TriggerChannel::TriggerChannel(const TriggerConfig& trig, const ChannelModel& channel,
                               ReceptionPolicy reception, const QuantizerSpec& quantizer,
                               int packet_bits, bool complex_mode, Real dt)
    : trig_(trig),
      channel_(channel),
      reception_(reception),
      quantizer_(quantizer),
      g_(packet_bits),
      complex_mode_(complex_mode),
      dt_(dt) {
    if (complex_mode_ && reception_ == ReceptionPolicy::Codec && g_ <= trig_.lambda)
        throw std::invalid_argument("complex packets need at least lambda + 1 bits");
}

Complex TriggerChannel::decode_correction(Real t_c, Complex z) const {
    if (reception_ == ReceptionPolicy::MinimalQuantizer)
        return quantizer_.center_for(z.real());
    if (!complex_mode_ && packet_pending_.g() == 1) {
        // event marker: timing from the window midpoint, sign payload
        const Real sign = packet_pending_.bits[0] ? 1.0 : -1.0;
        return sign * trig_.J * std::exp(plant_A_.real() * (trig_.gamma / 2.0));
    }
    if (!complex_mode_) {
        auto dec = codec::decode_real(packet_pending_, t_c, trig_.gamma, trig_.b);
        return codec::reconstruct_zbar_real(dec, t_c, plant_A_.real(), trig_.J);
    }
    auto dec = codec::decode_complex(packet_pending_, t_c, trig_.gamma, trig_.b, plant_A_,
                                     trig_.J);
    return dec.zbar;
}

std::optional<Complex> TriggerChannel::try_receive(long step, Real t_c, Complex z) {
    if (!rx_step_ || *rx_step_ != step) return std::nullopt;
    const Complex zbar = decode_correction(t_c, z);
    log_.tc.push_back(t_c);
    log_.delay.push_back(t_c - ts_pending_);
    log_.z_post_jump.push_back(std::abs(z - zbar));
    rx_step_.reset();
    return zbar;
}

std::optional<Complex> TriggerChannel::maybe_trigger(long step, Real t_s, Complex z, Rng& rng) {
    if (rx_step_ || std::abs(z) < trig_.J) return std::nullopt;
    codec::Packet p;
    if (reception_ == ReceptionPolicy::MinimalQuantizer || (!complex_mode_ && g_ == 1)) {
        p.bits.assign(1, z.real() >= 0.0 ? 1 : 0);
        p.t_generated = t_s;
    } else if (!complex_mode_) {
        p = codec::encode_real(t_s, z.real() >= 0.0 ? 1 : -1, g_, trig_.gamma, trig_.b);
    } else {
        p = codec::encode_complex(t_s, std::arg(z), g_, trig_.lambda, trig_.gamma, trig_.b);
    }
    log_.ts.push_back(t_s);
    log_.g_bits.push_back(g_);
    log_.packets_hex.push_back(p.to_hex());
    packet_pending_ = std::move(p);
    ts_pending_ = t_s;

    const long steps = channel_.draw_steps(rng, log_.ts.size() - 1, trig_.gamma, dt_);
    rx_step_ = step + steps;
    if (steps == 0) return try_receive(step, t_s, z);
    return std::nullopt;
}

static RunResult run_loop(const RunConfig& cfg, bool complex_mode) {
    RunResult res;
    if (!(cfg.dt > 0.0)) {
        res.error = "dt must be positive";
        return res;
    }
    const Real dt = cfg.dt;
    const long n_steps = cfg.T > 0.0 ? std::lround(cfg.T / dt) : 0;

    const Complex A = cfg.plant.A;
    const Complex B = cfg.plant.B;
    const Complex K = cfg.plant.K;
    const Real M = cfg.plant.M;

    res.packet_bits = resolve_packet_bits(cfg);
    TriggerChannel chan(cfg.trig, cfg.channel, cfg.reception, cfg.quantizer, res.packet_bits,
                        complex_mode, dt);
    chan.set_plant_gain(A);

    const auto hold = HoldFactors::make(A, dt);

    Rng rng(cfg.seed);
    Complex x = cfg.x0;
    Complex xh_ctrl = cfg.xhat0;
    Complex xh_sensor = cfg.xhat0;
    Complex u = -K * xh_ctrl;

    auto record = [&](Real t, Complex w) {
        if (!cfg.record_trajectory) return;
        res.traj.t.push_back(t);
        res.traj.x.push_back(x);
        res.traj.xhat.push_back(xh_ctrl);
        res.traj.z.push_back(x - xh_ctrl);
        res.traj.u.push_back(u);
        res.traj.w.push_back(w);
    };
    auto track_sup = [&] {
        res.sup_abs_z = std::max(res.sup_abs_z, std::abs(x - xh_ctrl));
        res.sup_abs_x = std::max(res.sup_abs_x, std::abs(x));
    };

    track_sup();
    if (n_steps == 0) {
        res.events = std::move(chan.log());
        return res;
    }

    for (long i = 0; i < n_steps; ++i) {
        const Real t = static_cast<Real>(i) * dt;
        const Complex w =
            complex_mode
                ? cfg.disturbance.sample_complex(rng, static_cast<std::size_t>(i), t, M)
                : Complex{cfg.disturbance.sample_real(rng, static_cast<std::size_t>(i), t, M), 0.0};
        res.w_sup_realized = std::max(res.w_sup_realized, std::abs(w));
        record(t, w);

        hold_step(x, xh_ctrl, u, w, B, hold);
        xh_sensor = hold.E * xh_sensor + hold.PHI * (B * u);  // the sensor mirror
        const Real t_next = static_cast<Real>(i + 1) * dt;

        if (auto zbar = chan.try_receive(i + 1, t_next, x - xh_ctrl)) {
            xh_ctrl += *zbar;
            xh_sensor += *zbar;
        }
        u = -K * xh_ctrl;

        if (chan.idle()) {
            if (static_cast<long>(chan.log().ts.size()) >= n_steps) {
                res.zeno_aborted = true;
                res.error = "zeno guard: more events than grid steps";
                res.events = std::move(chan.log());
                return res;
            }
            if (auto zbar = chan.maybe_trigger(i + 1, t_next, x - xh_ctrl, rng)) {
                xh_ctrl += *zbar;
                xh_sensor += *zbar;
                u = -K * xh_ctrl;
            }
        }
        track_sup();
        if (xh_ctrl != xh_sensor) res.mirror_ok = false;
    }
    record(static_cast<Real>(n_steps) * dt, Complex{0.0, 0.0});

    res.events = std::move(chan.log());
    long total_bits = 0;
    for (int gb : res.events.g_bits) total_bits += gb;
    res.realized_rate = cfg.T > 0.0 ? static_cast<Real>(total_bits) / cfg.T : 0.0;
    if (res.events.count() >= 2) {
        const Real span = res.events.ts.back() - res.events.ts.front();
        if (span > 0.0)
            res.realized_trigger_rate = static_cast<Real>(res.events.count() - 1) / span;
    }
    return res;
}

RunResult run_real(const RunConfig& cfg) {
    if (cfg.plant.A.imag() != 0.0 || cfg.plant.B.imag() != 0.0 || cfg.plant.K.imag() != 0.0)
        throw std::invalid_argument("run_real: plant parameters must be real");
    return run_loop(cfg, false);
}

RunResult run_complex(const RunConfig& cfg) { return run_loop(cfg, true); }

InvariantReport check_invariants(const RunResult& res, const RunConfig& cfg) {
    InvariantReport rep;
    const Real A = cfg.plant.a();
    if (!(A > 0.0)) return rep;  // bounds below are for unstable plants
    const Real M = cfg.plant.M;
    const Real J = cfg.trig.J;
    const Real gamma = cfg.trig.gamma;
    const Real rho0 = cfg.trig.rho0;
    const Real slack = step_growth_slack(A, cfg.dt);
    const Real w_sup = res.w_sup_realized;

    // one hold step of trigger overshoot, amplified over the delay
    const Real overshoot = std::exp(A * gamma) * (J + M / A) * slack;

    if (cfg.reception == ReceptionPolicy::Codec) {
        rep.jump_bound = rho0 * J * (1.0 + slack);
        for (Real zp : res.events.z_post_jump)
            if (zp > rep.jump_bound) rep.jump_contract_ok = false;
    }
    for (Real zp : res.events.z_post_jump)
        if (zp > J + overshoot) rep.jump_radius_ok = false;

    rep.envelope_bound = J * std::exp(A * gamma) + (w_sup / A) * std::expm1(A * gamma) + overshoot;
    if (res.sup_abs_z > rep.envelope_bound) rep.error_envelope_ok = false;

    rep.min_interval_bound = std::log((J * A + M) / (rho0 * J * A + M)) / A - 2.0 * cfg.dt;
    if (cfg.reception == ReceptionPolicy::Codec)
        for (Real d : res.events.intervals())
            if (d < rep.min_interval_bound) rep.min_interval_ok = false;

    if (cfg.reception == ReceptionPolicy::Codec && res.events.count() >= 2) {
        const Real upper = bounds::trig_rate_upper(A, M, J, rho0);
        const Real min_cycle = 1.0 / upper - 2.0 * cfg.dt;
        if (min_cycle > 0.0) {
            rep.rate_bound = static_cast<Real>(res.packet_bits) / min_cycle;
            if (res.realized_rate > rep.rate_bound) rep.rate_ok = false;
        }
    }

    if (cfg.plant.closed_loop().real() < 0.0) {
        const Real env = isps_envelope(cfg.plant, cfg.trig, std::abs(cfg.x0), w_sup, 0.0);
        if (res.sup_abs_x > env + overshoot * std::abs(cfg.plant.B * cfg.plant.K) /
                                 (-cfg.plant.closed_loop().real()))
            rep.state_bound_ok = false;
    }
    return rep;
}

}  // namespace etsim::engine
