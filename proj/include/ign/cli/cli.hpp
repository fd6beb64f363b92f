#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ign/envs/mdp.hpp"
#include "ign/envs/policy.hpp"
#include "ign/evaluation/evaluation.hpp"
#include "ign/networks/networks.hpp"
#include "ign/trainer/trainer.hpp"

namespace ign::cli {

inline constexpr int kFormatVersion = 1;

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIncompatible = 4;

int exit_code_for(const std::exception& e);

struct EvalSection {
    std::vector<std::size_t> schedule;  // steps at which the online side is evaluated
    eval::Representation representation = eval::Representation::Generator;
    std::size_t samples = 2048;
    std::size_t max_probes = 256;
    std::vector<double> taus = {0.1, 0.25, 0.5, 0.75, 0.9};
    double oracle_tolerance = 1e-6;
    // Report W1 between the model and the exact oracle of `policy` in the metric stream.
    bool w1_in_metrics = false;

    nlohmann::ordered_json to_json() const;
};

struct WarmStartSection {
    std::optional<std::string> checkpoint;
    std::vector<std::string> freeze;
    std::vector<std::string> reinitialize;

    nlohmann::ordered_json to_json() const;
};

// Everything a run needs, with every default materialised after loading.
struct RunConfig {
    std::string env = "chain";
    std::optional<double> env_gamma;  // replaces the environment's discount
    std::uint64_t seed = 0;
    std::optional<std::string> policy;  // fixed policy; required in evaluation mode
    net::ModelConfig model;
    train::TrainConfig train;
    train::GanConfig gan;
    EvalSection eval;
    WarmStartSection warm_start;
    std::optional<std::string> offline_dataset;
    std::size_t checkpoint_period = 0;
    std::string output_dir = "runs/default";

    // Resolved snapshot; feeding it back to load_run_config reproduces this config.
    nlohmann::ordered_json to_json() const;
    // Hex digest of the snapshot without output_dir.
    std::string hash() const;
};

// Validates the whole document and throws one ConfigError listing every problem.
RunConfig load_run_config(const nlohmann::json& document);

// Applies "a.b.c=value" overrides; values parse as JSON when possible, otherwise as strings.
void apply_overrides(nlohmann::json& document, const std::vector<std::string>& overrides);

nlohmann::json read_json_file(const std::filesystem::path& path);

env::MdpSpec make_environment(const std::string& name, std::optional<double> gamma = std::nullopt);

// "uniform", "optimal", "constant:<a>", "epsilon-optimal:<eps>" (optimal mixed with
// eps-uniform), or "right:<p>" for two-action MDPs (action 1 with probability p).
env::Policy make_policy(const env::MdpSpec& spec, const std::string& text);

// Relative directories resolve under $IGN_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::string& dir);

// Header record written first in every line-delimited output file.
nlohmann::ordered_json header_record(const std::string& kind, const std::string& config_hash);

struct TrainOutcome {
    std::filesystem::path output_dir;
    std::size_t steps = 0;
    std::size_t metric_records = 0;
};

// Writes metrics.jsonl, config.resolved.json, final.json and checkpoints/step_<n>.json.
TrainOutcome cmd_train(const RunConfig& config, std::ostream& log);

// fixed: a checkpoint path or "oracle"; online: a checkpoint path or "live" (train
// with `config` and evaluate on eval.schedule). Writes eval.jsonl.
eval::EvalReport cmd_evaluate(const RunConfig& config, const std::string& fixed, const std::string& online,
                              std::ostream& log);

struct OracleRequest {
    std::string env = "chain";
    std::optional<double> env_gamma;
    std::string policy = "uniform";
    double tolerance = 1e-6;
};

// Writes <output>/oracle.jsonl.
eval::ExactReturnDistribution cmd_oracle(const OracleRequest& request, const std::filesystem::path& output,
                                         std::ostream& log);

struct McRequest {
    std::string env = "chain";
    std::optional<double> env_gamma;
    std::string policy = "uniform";
    std::size_t state = 0;
    std::size_t rollouts = 10000;
    std::uint64_t seed = 0;
    std::size_t bins = 20;
    double tolerance = 1e-6;
};

// Writes <output>/mc_summary.jsonl and <output>/mc_histogram.jsonl.
std::vector<dist::EmpiricalDistribution> cmd_mc_estimate(const McRequest& request, const std::filesystem::path& output,
                                                         std::ostream& log);

// Full command line: train, evaluate, oracle, mc-estimate. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ign::cli
