#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ign/autodiff/adam.hpp"
#include "ign/envs/dataset.hpp"
#include "ign/envs/mdp.hpp"
#include "ign/envs/policy.hpp"
#include "ign/networks/networks.hpp"
#include "ign/rng.hpp"

namespace ign::train {

// Ring buffer of transitions. Sampling is uniform and without replacement
// within one minibatch.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void add(const env::Transition& t);
    std::vector<std::size_t> sample_indices(std::size_t m, Rng& rng) const;

    const env::Transition& operator[](std::size_t i) const { return items_[i]; }
    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::uint64_t inserted() const noexcept { return inserted_; }

private:
    std::size_t capacity_;
    std::vector<env::Transition> items_;
    std::uint64_t inserted_ = 0;
};

// Minibatch of (s, a, r, s', a') with a' resolved at sampling time.
struct Batch {
    std::vector<std::size_t> indices;
    std::vector<std::size_t> states, actions, next_states, next_actions;
    std::vector<double> rewards;
    std::vector<bool> terminal;

    std::size_t size() const noexcept { return states.size(); }
};

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices,
                 const std::function<std::size_t(std::size_t state)>& next_action);

struct GanConfig {
    double lambda = 10.0;        // gradient-penalty coefficient
    std::size_t n_critic = 5;    // critic steps per generator step
    std::size_t batch_size = 32; // m
    double learning_rate = 1e-4;
    // Generator step size; defaults to learning_rate.
    std::optional<double> generator_learning_rate;
    double beta1 = 0.5;
    double beta2 = 0.9;
    std::string noise = "uniform";  // P_z; only uniform(0,1) is supported
    // Let the generator objective differentiate through r + gamma G(z'|s',a') as
    // well as G(z|s,a). Off treats the bootstrap sample as a constant.
    bool bootstrap_gradient = true;
    // Experimental: add the quantile TD loss to the critic objective and step the
    // quantile network with the critic instead of in its own update.
    bool quantile_in_critic = false;
    double clip_norm = 10.0;  // <= 0 disables

    void validate() const;
    void collect_problems(std::vector<std::string>& problems) const;
    nlohmann::json to_json() const;
    // Keys missing from `j` keep their defaults; type errors and unknown keys are appended to `problems`.
    static GanConfig from_json(const nlohmann::json& j, std::vector<std::string>& problems);
};

enum class Algorithm { Ign, Iqn, Dqn };
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

// Control learns the greedy policy; evaluation learns the return distribution of
// a fixed policy (targets use a' ~ policy, behaviour mixes the policy with
// epsilon-uniform actions).
enum class Mode { Control, Evaluation };
std::string to_string(Mode m);
Mode parse_mode(const std::string& name);

struct TrainConfig {
    Algorithm algorithm = Algorithm::Ign;
    Mode mode = Mode::Control;
    std::uint64_t seed = 0;
    std::size_t total_steps = 10000;
    std::size_t learning_starts = 100;  // environment steps before the first update
    std::size_t update_period = 1;      // environment steps per update round
    std::size_t target_sync = 1000;     // quantile updates between target copies
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t epsilon_decay_steps = 10000;
    std::size_t num_tau = 8;
    std::size_t num_tau_target = 8;
    std::size_t num_tau_act = 32;  // K draws for action selection
    double delta = 1.0;
    std::optional<double> gamma;  // defaults to the environment's discount
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;  // quantile network
    std::size_t buffer_capacity = 50000;
    std::size_t max_episode_steps = 200;
    double sticky = 0.0;
    std::size_t metric_period = 100;
    bool record_wallclock = false;
    dist::Distortion distortion;
    std::vector<std::string> freeze;  // parameter-name prefixes excluded from updates
    double clip_norm = 10.0;

    void validate() const;
    void collect_problems(std::vector<std::string>& problems) const;
    nlohmann::json to_json() const;
    // Keys missing from `j` keep their defaults; type errors and unknown keys are appended to `problems`.
    static TrainConfig from_json(const nlohmann::json& j, std::vector<std::string>& problems);
};

struct QuantileStepConfig {
    std::size_t num_tau = 8;
    std::size_t num_tau_target = 8;
    double delta = 1.0;
    double gamma = 0.9;
    // Fixed tau for both online and target draws (the N = N' = 1 DQN case).
    std::optional<double> fixed_tau;
    // Take a' from the batch instead of the online network's greedy action.
    bool next_action_from_batch = false;
    double clip_norm = 0.0;
};

struct GanNoise {
    ad::Array z, z_next, eps;  // each (m x 1)
};

GanNoise draw_noise(std::size_t m, Rng& rng);

// x~ = eps * x + (1 - eps) * x', elementwise.
ad::Array interpolate(const ad::Array& x, const ad::Array& x_next, const ad::Array& eps);

// One critic step. Returns the pre-step critic objective
//   mean[f(x) - f(x') + lambda (||grad f(x~)|| - 1)^2].
double critic_update(const env::MdpSpec& spec, net::Generator& generator, net::Critic& critic,
                     ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma,
                     const GanNoise& noise);
double critic_update(const env::MdpSpec& spec, net::Generator& generator, net::Critic& critic,
                     ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma, Rng& rng);

// One generator step on -mean[f(x) - f(x')]. Returns the pre-step objective.
double generator_update(const env::MdpSpec& spec, net::Generator& generator, const net::Critic& critic,
                        ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma,
                        const GanNoise& noise);
double generator_update(const env::MdpSpec& spec, net::Generator& generator, const net::Critic& critic,
                        ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma, Rng& rng);

// Critic objective on a fresh tape (generator samples enter as constants).
ad::Var critic_objective(ad::Tape& tape, const env::MdpSpec& spec, const net::Generator& generator,
                         const net::Critic& critic, const Batch& batch, const GanConfig& cfg, double gamma,
                         const GanNoise& noise);

// Generator objective -mean[f(x) - f(x')] over the generator's parameters.
ad::Var generator_objective(ad::Tape& tape, const env::MdpSpec& spec, const net::Generator& generator,
                            const net::Critic& critic, const Batch& batch, const GanConfig& cfg, double gamma,
                            const GanNoise& noise);

// The quantile TD loss on a batch as a graph node over the online network's
// parameters (targets are constants). Draws taus from rng.
ad::Var quantile_loss(ad::Tape& tape, const env::MdpSpec& spec, const net::QuantileNetwork& online,
                      const net::QuantileNetwork& target, const Batch& batch, const QuantileStepConfig& cfg,
                      Rng& rng);

// One Adam step on the quantile TD loss. Returns the pre-step loss.
double quantile_update(const env::MdpSpec& spec, net::QuantileNetwork& online, const net::QuantileNetwork& target,
                       ad::AdamState& adam, const Batch& batch, const QuantileStepConfig& cfg, Rng& rng);

struct TrainHooks {
    std::function<void(const nlohmann::ordered_json&)> metrics;
    // Optional W1 between the model and the exact oracle, reported with metrics.
    std::function<std::optional<double>(const net::Model&)> w1_to_oracle;
    std::function<void(std::size_t step, const net::Model&)> checkpoint;
    std::size_t checkpoint_period = 0;
    // Called with the model as it was when an update failed, before the error propagates.
    std::function<void(std::size_t step, const net::Model&)> on_abort;
};

// Critic, generator and quantile TD updates driven by environment interaction
// (or, after load_offline, by a fixed dataset).
class Trainer {
public:
    Trainer(std::shared_ptr<const env::MdpSpec> spec, TrainConfig cfg, GanConfig gan, net::Model model,
            std::optional<env::Policy> policy = std::nullopt, TrainHooks hooks = {});

    // Advances to `total_steps` (or by `steps` for advance()).
    void run();
    void advance(std::size_t steps);
    void step();

    // Replaces environment interaction by the dataset's transitions.
    void load_offline(const env::OfflineDataset& data);

    std::size_t greedy_action(std::size_t state, Rng& rng) const;
    std::vector<std::size_t> greedy_policy() const;

    const net::Model& model() const noexcept { return model_; }
    net::Model& model() noexcept { return model_; }
    const net::QuantileNetwork& target() const noexcept { return target_; }
    const TrainConfig& config() const noexcept { return cfg_; }
    const GanConfig& gan_config() const noexcept { return gan_; }
    const ReplayBuffer& buffer() const noexcept { return buffer_; }
    double gamma() const noexcept { return gamma_; }
    std::size_t steps_done() const noexcept { return steps_; }
    std::size_t quantile_updates() const noexcept { return quantile_updates_; }
    std::size_t critic_updates() const noexcept { return critic_updates_; }
    std::size_t generator_updates() const noexcept { return generator_updates_; }

private:
    void act();
    void update();
    void emit_metrics();
    double epsilon() const;
    std::size_t next_action(std::size_t state, Rng& rng) const;

    std::shared_ptr<const env::MdpSpec> spec_;
    TrainConfig cfg_;
    GanConfig gan_;
    net::Model model_;
    net::QuantileNetwork target_;
    std::optional<env::Policy> policy_;
    TrainHooks hooks_;
    double gamma_;
    QuantileStepConfig qcfg_;

    env::Environment env_;
    ReplayBuffer buffer_;
    ad::AdamState quantile_adam_, critic_adam_, generator_adam_;
    Rng env_rng_, act_rng_, replay_rng_, tau_rng_, gan_rng_;

    bool offline_ = false;
    bool episode_open_ = false;
    std::size_t steps_ = 0;
    std::size_t episode_steps_ = 0;
    double episode_return_ = 0.0;
    double episode_discount_ = 1.0;
    std::optional<double> last_episode_return_;
    std::size_t quantile_updates_ = 0, critic_updates_ = 0, generator_updates_ = 0;
    std::optional<double> last_quantile_loss_, last_critic_loss_, last_generator_loss_;
    std::chrono::steady_clock::time_point started_;
};

struct TrainResult {
    net::Model model;
    std::size_t steps = 0;
};

TrainResult train(std::shared_ptr<const env::MdpSpec> spec, const TrainConfig& cfg, const GanConfig& gan,
                  const net::ModelConfig& model_config, TrainHooks hooks = {},
                  std::optional<env::Policy> policy = std::nullopt);

// Loads a checkpoint into a fresh model for `config`. Parameters under `reinitialize`
// prefixes keep their fresh initialisation (seeded by `seed`); parameters under
// `freeze` prefixes are loaded and marked non-trainable.
net::Model warm_start(const std::filesystem::path& checkpoint, const net::ModelConfig& config,
                      std::span<const std::string> freeze, std::span<const std::string> reinitialize = {},
                      std::uint64_t seed = 0);

}  // namespace ign::train
