#pragma once

// JSON scenario configuration shared by all CLI subcommands.
//
// {
//   "model":     {"bath": "independent|common|single", "axes": "z", "gamma": [[..3x3..]],
//                 "gamma2": [[..]], "lambda": 1.0, "scale": "composite|total_spin",
//                 "field_z": [w1, w2]},
//   "ensembles": {"j1": 1, "j2": 1},
//   "state":     {"kind": "uniform|alternating_uniform|singlet|gaussian|custom|fock|coupled",
//                 "width": 2.0, "coeffs": [[re, im], ...], "m1": 0, "m2": 0, "L": 0, "M": 0},
//                 (with one ensemble, "custom" coeffs are the |j, m> amplitudes, descending m)
//   "evolution": {"t_final": 1.0, "mode": "fixed|adaptive", "step": 0.0, "tol": 1e-10,
//                 "stride": 1, "snapshots": false},
//   "sweep":     {"parameter": "lambda|Ntilde|L|gamma.<ab>|gamma2.<ab>", "values": [...]},
//   "dfs":       {"candidates": "fock_basis|singlet|coupled_basis|state"},
//   "output":    {"path": "", "format": "csv|json"}
// }

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinbath/generator.hpp"
#include "spinbath/states.hpp"

namespace spinbath {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Gamma3 = std::array<std::array<double, 3>, 3>;

struct ModelConfig {
    std::string bath = "independent";
    std::string axes = "z";
    Gamma3 gamma{};
    Gamma3 gamma2{};
    double lambda = 1.0;
    std::string scale = "composite";
    std::vector<double> field_z;

    bool operator==(const ModelConfig&) const = default;
};

struct EnsembleConfig {
    double j1 = 0.5;
    std::optional<double> j2;

    bool operator==(const EnsembleConfig&) const = default;
};

struct StateConfig {
    std::string kind = "uniform";
    double width = 1.0;
    std::vector<std::array<double, 2>> coeffs;
    double m1 = 0.0;
    double m2 = 0.0;
    double L = 0.0;
    double M = 0.0;

    bool operator==(const StateConfig&) const = default;
};

struct EvolutionConfig {
    double t_final = 1.0;
    std::string mode = "fixed";
    double step = 0.0;
    double tol = 1e-10;
    int stride = 1;
    bool snapshots = false;

    bool operator==(const EvolutionConfig&) const = default;
};

struct SweepConfig {
    std::string parameter;
    std::vector<double> values;

    bool operator==(const SweepConfig&) const = default;
};

struct DfsConfig {
    std::string candidates = "state";

    bool operator==(const DfsConfig&) const = default;
};

struct OutputConfig {
    std::string path;
    std::string format = "csv";

    bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
    ModelConfig model;
    EnsembleConfig ensembles;
    StateConfig state;
    EvolutionConfig evolution;
    std::optional<SweepConfig> sweep;
    DfsConfig dfs;
    OutputConfig output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError on unknown keys or wrongly typed values.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical JSON serialization, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// Physical objects a config describes.
struct ResolvedState {
    Vector psi;
    std::optional<EntangledStateSpec> spec;
    std::string label;
};

EnsemblePair resolve_ensembles(const ScenarioConfig& config);
DecoherenceModel resolve_model(const ScenarioConfig& config);
ResolvedState resolve_state(const ScenarioConfig& config);

/// Resolves model, ensembles and state, rethrowing any failure as ConfigError.
void validate_config(const ScenarioConfig& config);

/// Applies one sweep value to a copy of the config.
ScenarioConfig apply_sweep_value(const ScenarioConfig& config, const std::string& parameter, double value);

} // namespace spinbath
