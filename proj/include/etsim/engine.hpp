#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etsim/codec.hpp"
#include "etsim/model.hpp"

namespace etsim::engine {

enum class PacketPolicy { Practical, Fixed };
enum class ReceptionPolicy { Codec, MinimalQuantizer };

/// Exact zero-order-hold factors for one grid step: e^{A dt} and
/// (e^{A dt} - 1)/A.
struct HoldFactors {
    Complex E{1.0, 0.0};
    Complex PHI{0.0, 0.0};

    [[nodiscard]] static HoldFactors make(Complex A, Real dt) {
        return {std::exp(A * dt), phi_exact(A, dt)};
    }
};

/// One exact hold step: the state integrates the held input plus the
/// held disturbance, the estimator the held input only. The estimation
/// error therefore advances as z <- E z + PHI w, independent of u.
inline void hold_step(Complex& x, Complex& xhat, Complex u, Complex w, Complex B,
                      const HoldFactors& h) noexcept {
    x = h.E * x + h.PHI * (B * u + w);
    xhat = h.E * xhat + h.PHI * (B * u);
}

/// Equal-width quantization cells on [lo, hi], mirrored onto [-hi, -lo]
/// for negative errors. Consumed by the minimal-quantizer reception path.
struct QuantizerSpec {
    Real lo = 0.0;
    Real hi = 0.0;
    long n_cells = 1;

    [[nodiscard]] Real width() const noexcept {
        return (hi - lo) / static_cast<Real>(n_cells);
    }
    /// Center of the cell containing v (clamped into [lo, hi]), sign-mirrored.
    [[nodiscard]] Real center_for(Real v) const noexcept;
};

struct RunConfig {
    PlantConfig plant;
    TriggerConfig trig;
    ChannelModel channel;
    DisturbanceModel disturbance;
    PacketPolicy packet_policy = PacketPolicy::Practical;
    int fixed_bits = 0;
    ReceptionPolicy reception = ReceptionPolicy::Codec;
    QuantizerSpec quantizer;  // MinimalQuantizer reception only
    Real dt = 0.005;
    Real T = 5.0;
    std::uint64_t seed = 1;
    Complex x0{1.0, 0.0};
    Complex xhat0{0.0, 0.0};
    bool record_trajectory = true;
};

/// Sampled series on the simulation grid; one entry per grid instant,
/// w holds the hold value applied over the step starting there.
struct Trajectory {
    std::vector<Real> t;
    std::vector<Complex> x, xhat, z, u, w;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
};

struct EventLog {
    std::vector<Real> ts;          // triggering times
    std::vector<Real> tc;          // reception times
    std::vector<Real> delay;       // tc - ts
    std::vector<int> g_bits;       // payload size per event
    std::vector<Real> z_post_jump; // |z(tc+)|
    std::vector<std::string> packets_hex;

    [[nodiscard]] std::size_t count() const noexcept { return ts.size(); }
    [[nodiscard]] std::vector<Real> intervals() const;  // consecutive ts differences
};

/// Per-step state machine for one triggered link: event detection with an
/// idle-channel gate, packet generation, delay realization and the jump
/// correction at reception. Shared by the scalar runs and the modal
/// pipeline's unstable coordinates.
class TriggerChannel {
public:
    TriggerChannel(const TriggerConfig& trig, const ChannelModel& channel,
                   ReceptionPolicy reception, const QuantizerSpec& quantizer, int packet_bits,
                   bool complex_mode, Real dt);

    /// Jump correction when a packet is scheduled to arrive at this grid
    /// instant; z is the current estimation error (pre-jump).
    [[nodiscard]] std::optional<Complex> try_receive(long step, Real t, Complex z);

    /// Fires an event when |z| >= J and the link is idle. A zero-delay
    /// realization is delivered immediately and its correction returned.
    [[nodiscard]] std::optional<Complex> maybe_trigger(long step, Real t, Complex z, Rng& rng);

    [[nodiscard]] bool idle() const noexcept { return !rx_step_.has_value(); }
    [[nodiscard]] int packet_bits() const noexcept { return g_; }
    [[nodiscard]] EventLog& log() noexcept { return log_; }
    [[nodiscard]] const EventLog& log() const noexcept { return log_; }

private:
    [[nodiscard]] Complex decode_correction(Real t_c, Complex z) const;

    TriggerConfig trig_;
    ChannelModel channel_;
    ReceptionPolicy reception_;
    QuantizerSpec quantizer_;
    int g_;
    bool complex_mode_;
    Real dt_;
    Complex plant_A_{0.0, 0.0};  // set via set_plant_gain, used by the codec paths
    std::optional<long> rx_step_;
    Real ts_pending_ = 0.0;
    codec::Packet packet_pending_;
    EventLog log_;

public:
    void set_plant_gain(Complex A) noexcept { plant_A_ = A; }
};

struct RunResult {
    Trajectory traj;
    EventLog events;
    int packet_bits = 0;            // g used for every event
    Real realized_rate = 0.0;       // transmitted payload bits / T
    Real realized_trigger_rate = kNaN;  // (N-1) / (ts_N - ts_1)
    Real sup_abs_z = 0.0;
    Real sup_abs_x = 0.0;
    Real w_sup_realized = 0.0;      // realized sup |w|
    bool mirror_ok = true;          // sensor estimate stayed identical
    bool zeno_aborted = false;
    std::string error;              // nonempty on abort
};

/// Deterministic closed-loop run for a real scalar plant. The state and
/// estimator advance by the exact exponential hold on the dt grid; an
/// event fires at the first grid instant with |z| >= J and an idle
/// channel; reception applies the jump update to the controller estimate
/// and, through the acknowledgment, to the sensor mirror in the same
/// instant.
[[nodiscard]] RunResult run_real(const RunConfig& cfg);

/// Complex-plant counterpart (phase codec, complex magnitudes).
[[nodiscard]] RunResult run_complex(const RunConfig& cfg);

struct InvariantReport {
    bool jump_contract_ok = true;   // |z(tc+)| <= rho0 J (1 + slack), codec runs
    bool jump_radius_ok = true;     // |z(tc+)| <= J + slack, all runs
    bool error_envelope_ok = true;  // sup|z| <= J e^{A gamma} + (w_sup/A)(e^{A gamma}-1) + slack
    bool min_interval_ok = true;    // min dt' >= ln((JA+M)/(rho0 JA+M))/A - 2 dt
    bool rate_ok = true;            // realized rate <= g * trigger-rate bound + grid slack
    bool state_bound_ok = true;     // sup|x| <= ISpS envelope at the realized w_sup
    Real jump_bound = kNaN;
    Real envelope_bound = kNaN;
    Real min_interval_bound = kNaN;
    Real rate_bound = kNaN;

    [[nodiscard]] bool all_ok() const noexcept {
        return jump_contract_ok && jump_radius_ok && error_envelope_ok && min_interval_ok &&
               rate_ok && state_bound_ok;
    }
};

/// Post-hoc invariant suite over a finished run. Grid-triggered events may
/// overshoot the radius by one hold step, so every bound carries the
/// (e^{A dt} - 1) slack.
[[nodiscard]] InvariantReport check_invariants(const RunResult& result, const RunConfig& cfg);

/// Packet size the run will use, resolved from the policy.
[[nodiscard]] int resolve_packet_bits(const RunConfig& cfg);

}  // namespace etsim::engine
