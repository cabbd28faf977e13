#pragma once

#include <string>
#include <vector>

#include "etsim/numeric.hpp"

namespace etsim {

/// Scalar plant dx/dt = A x + B u + w with |w| <= M. A, B, K may be
/// complex; `complex_mode` selects which invariant set applies.
struct PlantConfig {
    Complex A{1.0, 0.0};
    Complex B{1.0, 0.0};
    Complex K{2.0, 0.0};
    Real M = 0.0;
    bool complex_mode = false;

    [[nodiscard]] Real a() const noexcept { return A.real(); }
    [[nodiscard]] Complex closed_loop() const noexcept { return A - B * K; }
};

/// Event-trigger and codec parameters. `lambda` (phase bits) and the
/// chi split are used only in complex mode.
struct TriggerConfig {
    Real J = 1.0;        // triggering radius, |z| = J fires an event
    Real rho0 = 0.5;     // post-reception contraction target, in (0,1)
    Real gamma = 0.1;    // delay upper bound (seconds)
    Real b = 2.0;        // timeline interval scale, > 1
    int lambda = 1;      // phase bits (complex mode)
    Real chi = 0.125;
    Real chi_prime = 0.125;
    // sweep option: the radius tracks the delay bound as
    //   J(gamma) = (M/(A rho0))(e^{A gamma}-1) + J      (real)
    //   J(gamma) = (M/(Re(A) chi))(e^{Re(A) gamma}-1) + J   (complex)
    // with the configured J acting as the additive margin.
    bool J_follows_gamma = false;
};

enum class ChannelKind { Constant, UniformOnGrid, AdversarialMax, Scripted };

/// Delay model. Every realized delay is quantized to the simulation grid
/// and lies in [0, gamma]; random kinds keep at least one grid step.
struct ChannelModel {
    ChannelKind kind = ChannelKind::UniformOnGrid;
    Real constant_delay = 0.0;          // Constant kind
    std::vector<Real> script;           // Scripted kind, per event

    /// Delay for event index k, in whole grid steps.
    [[nodiscard]] long draw_steps(Rng& rng, std::size_t k, Real gamma, Real dt) const;
};

enum class DisturbanceKind { Zero, ConstantMax, Uniform, Sinusoid, Scripted };

/// Disturbance realization; every sample has magnitude <= M.
struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::Zero;
    Real freq = 1.0;                    // Sinusoid
    Real phase = 0.0;
    std::vector<Real> script;           // Scripted, per grid step

    [[nodiscard]] Real sample_real(Rng& rng, std::size_t step, Real t, Real M) const;
    [[nodiscard]] Complex sample_complex(Rng& rng, std::size_t step, Real t, Real M) const;
};

enum class ValidationMode { SufficientReal, NecessaryReal, SufficientComplex };

/// Checks the mode-specific feasibility inequalities. Returns a list of
/// human-readable violations; empty means the configuration is admissible.
[[nodiscard]] std::vector<std::string> validate_config(const PlantConfig& plant,
                                                       const TriggerConfig& trig,
                                                       ValidationMode mode);

/// Input-to-state practical-stability envelope of the closed loop: a
/// decaying term in |x(0)| plus gains in the disturbance sup-norm and the
/// delay bound. The component forms come from bounding |z| along the run.
struct IspsEnvelope {
    PlantConfig plant;
    TriggerConfig trig;

    [[nodiscard]] Real decay_rate() const noexcept { return plant.closed_loop().real(); }
    [[nodiscard]] Real psi(Real w_sup) const noexcept;        // disturbance gain
    [[nodiscard]] Real iota() const noexcept;                 // delay-dependent offset
    [[nodiscard]] Real vartheta(Real w_sup) const noexcept;   // joint disturbance/delay gain

    /// e^{Re(A-BK) t} x0 + psi(w) + iota + vartheta(w).
    [[nodiscard]] Real eval(Real x0_abs, Real w_sup, Real t) const;
};

/// Envelope bound at time t; rejects closed loops with Re(A - BK) >= 0.
[[nodiscard]] Real isps_envelope(const PlantConfig& plant, const TriggerConfig& trig,
                                 Real x0_abs, Real w_sup, Real t);

}  // namespace etsim
