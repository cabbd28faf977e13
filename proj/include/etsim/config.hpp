#pragma once

#include <optional>
#include <string>

#include "etsim/engine.hpp"
#include "etsim/modal.hpp"

namespace etsim::config {

enum class Mode { ScalarReal, ScalarComplex, Pendulum, CustomVector };

struct Sweep {
    std::string param = "gamma";
    Real lo = 0.0;
    Real hi = 0.0;
    int points = 0;
};

/// Parsed experiment description. Scalar modes populate `run`; pendulum
/// populates `pendulum`; custom-vector additionally holds the plant
/// matrices.
struct ExperimentConfig {
    Mode mode = Mode::ScalarReal;
    engine::RunConfig run;
    modal::PendulumOptions pendulum;
    std::optional<modal::VectorPlant> vector_plant;
    std::optional<Eigen::VectorXd> vector_s0, vector_shat0;
    std::optional<Sweep> sweep;
};

/// Parses a JSON config file. Unknown keys anywhere in the tree are
/// rejected with a descriptive error (std::runtime_error).
[[nodiscard]] ExperimentConfig load_file(const std::string& path);
[[nodiscard]] ExperimentConfig parse_text(const std::string& json_text);

/// "gamma:lo:hi:n" command-line sweep descriptor.
[[nodiscard]] Sweep parse_sweep_flag(const std::string& text);

}  // namespace etsim::config
