#pragma once

#include <vector>

#include "etsim/engine.hpp"
#include "etsim/numeric.hpp"

namespace etsim::adversary {

/// Interval of estimation-error values at reception that are consistent
/// with a positive trigger, the delay bound and the disturbance bound.
/// The negative-trigger set is the mirror image.
struct UncertaintySet {
    Real lo = 0.0;  // J
    Real hi = 0.0;  // J e^{A gamma} + (M/A)(e^{A gamma} - 1)
    int sign = 1;

    [[nodiscard]] Real measure_one_sided() const noexcept { return hi - lo; }
    /// Both signed branches together: 2 (M/A + J)(e^{A gamma} - 1).
    [[nodiscard]] Real measure_two_sided() const noexcept { return 2.0 * (hi - lo); }
};

/// Requires M <= A J (otherwise the sweep is not monotone in the delay
/// and the interval characterization fails).
[[nodiscard]] UncertaintySet uncertainty_set(Real A, Real gamma, Real M, Real J, int sign);

/// Fewest equal-width cells of measure <= 2J covering each signed
/// uncertainty interval, centers used as the reconstruction.
struct MinimalQuantizer {
    engine::QuantizerSpec cells;  // positive branch; mirrored for negative

    [[nodiscard]] long cell_count() const noexcept { return cells.n_cells; }
    [[nodiscard]] Real cell_measure() const noexcept { return cells.width(); }
    [[nodiscard]] Real reconstruct(Real z_at_reception) const noexcept {
        return cells.center_for(z_at_reception);
    }
};

[[nodiscard]] MinimalQuantizer minimal_quantizer(Real A, Real gamma, Real M, Real J);

enum class RealizationTarget { HalfRadiusResidual, IntervalCap };

/// Delay/disturbance scripts certifying the necessary-condition side.
struct WorstCaseRealization {
    std::vector<Real> delays;      // per-event delays (seconds, grid-aligned)
    Real disturbance_value = 0.0;  // held constant: w = M
    Real residual_target = 0.0;    // guaranteed |z(tc+)| level (before grid slack)
    Real delay_cap = 0.0;          // every scripted delay <= this
};

/// HalfRadiusResidual: against the minimal quantizer, a constant w = M
/// and per-event delays at most beta force |z(tc+)| >= J/2 at every
/// reception. IntervalCap generalizes to a target residual `upsilon`
/// under a delay cap `alpha`. Built by simulating the loop forward with
/// the given grid, choosing per event the smallest grid delay whose
/// reception lands at least `upsilon` away from its quantization-cell
/// center. Throws when beta > gamma (infeasible).
[[nodiscard]] WorstCaseRealization worst_case_realization(Real A, Real gamma, Real M, Real J,
                                                          RealizationTarget target, Real dt,
                                                          Real T, Real alpha = kNaN,
                                                          Real upsilon = kNaN);

/// Engine configuration that replays a realization against the minimal
/// quantizer: scripted channel, constant-max disturbance, quantizer
/// reception.
[[nodiscard]] engine::RunConfig replay_config(Real A, Real gamma, Real M, Real J,
                                              const WorstCaseRealization& wcr, Real dt, Real T);

}  // namespace etsim::adversary
