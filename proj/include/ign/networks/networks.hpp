#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ign/autodiff/tape.hpp"
#include "ign/distributions/distributions.hpp"
#include "ign/envs/mdp.hpp"
#include "ign/rng.hpp"

namespace ign::net {

enum class Activation { Identity, Relu, LeakyRelu, Softplus };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);
ad::Var activate(const ad::Var& x, Activation a);

// y = x W + b with W stored (in x out). Parameters are named "<name>.weight" and
// "<name>.bias". Initialised uniformly in +-1/sqrt(in) unless zero is requested.
struct Linear {
    ad::Parameter weight;
    ad::Parameter bias;

    Linear() = default;
    Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool zero = false);

    std::size_t in() const { return weight.value.rows(); }
    std::size_t out() const { return weight.value.cols(); }
    ad::Var operator()(const ad::Var& x) const;
};

// Layers are "<name>.layer<k>"; `sizes` lists every width including input and output.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::string& name, const std::vector<std::size_t>& sizes, Activation hidden, Activation output, Rng& rng,
        bool zero_output = false);

    ad::Var forward(const ad::Var& x) const;
    void collect(std::vector<ad::Parameter*>& out);
    void collect(std::vector<const ad::Parameter*>& out) const;

    const std::vector<Linear>& layers() const { return layers_; }

private:
    std::vector<Linear> layers_;
    Activation hidden_ = Activation::Relu;
    Activation output_ = Activation::Identity;
};

struct ModelConfig {
    std::size_t state_dim = 0;
    std::size_t num_actions = 0;
    std::size_t embedding_dim = 64;   // d
    std::size_t cosine_basis = 64;    // n
    std::size_t quantile_hidden = 128;
    std::size_t gan_hidden = 64;
    std::size_t gan_layers = 3;  // hidden layers; 0 gives a linear map
    Activation generator_activation = Activation::Relu;
    Activation critic_activation = Activation::Softplus;
    bool zero_init_generator_output = false;

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
    bool operator==(const ModelConfig&) const = default;
};

// IQN: theta(s, tau) = f(psi(s) * phi(tau)) with phi_j(tau) = ReLU(sum_i cos(pi i tau) w_ij + b_j).
class QuantileNetwork {
public:
    QuantileNetwork() = default;
    QuantileNetwork(const ModelConfig& config, Rng& rng);

    // tau: (K x 1). Returns (K x d).
    ad::Var cosine_embed(const ad::Var& tau) const;
    // states: (B x state_dim), tau: (B*N x 1) with the N draws of state b in rows
    // b*N .. b*N+N-1. Returns (B*N x |A|).
    ad::Var quantile_values(const ad::Var& states, const ad::Var& tau) const;

    // Single-state convenience without gradients. Returns (N x |A|).
    ad::Array quantile_values(std::span<const double> state, std::span<const double> taus) const;
    // Q(s, a) = mean over k of theta(s, beta(tau_k), a).
    std::vector<double> q_values(std::span<const double> state, std::span<const double> taus,
                                 const dist::Distortion& distortion = {}) const;

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;

    std::size_t num_actions() const { return num_actions_; }

private:
    Mlp psi_;
    Linear phi_;
    Mlp head_;
    std::size_t cosine_basis_ = 0;
    std::size_t num_actions_ = 0;
};

// G(z | s, a): input row [z, encode(s), onehot(a)], scalar output.
class Generator {
public:
    Generator() = default;
    Generator(const ModelConfig& config, Rng& rng);

    // z: (B x 1), cond: (B x state_dim + |A|). Returns (B x 1).
    ad::Var forward(const ad::Var& z, const ad::Var& cond) const;
    double generate(double z, std::span<const double> cond) const;

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;

private:
    Mlp mlp_;
};

// f(x | s, a): input row [x, encode(s), onehot(a)], scalar score.
class Critic {
public:
    Critic() = default;
    Critic(const ModelConfig& config, Rng& rng);

    ad::Var forward(const ad::Var& x, const ad::Var& cond) const;
    double criticize(double x, std::span<const double> cond) const;

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;

private:
    Mlp mlp_;
};

// Every learnable function of one agent. Parameter names are prefixed
// "quantile.", "generator." and "critic.".
struct Model {
    ModelConfig config;
    QuantileNetwork quantile;
    Generator generator;
    Critic critic;

    Model() = default;
    Model(const ModelConfig& config, std::uint64_t seed);

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;
};

ModelConfig model_config_for(const env::MdpSpec& spec);

// Rows of encode(s) for each state: (B x state_dim).
ad::Array encode_states(const env::MdpSpec& spec, std::span<const std::size_t> states);
// Rows of [encode(s), onehot(a)]: (B x state_dim + |A|).
ad::Array conditioning(const env::MdpSpec& spec, std::span<const std::size_t> states,
                       std::span<const std::size_t> actions);

// Single JSON document: {format_version, architecture, metadata, parameters: [{name, shape, values}]}.
// Doubles are written in shortest round-trip form, so loading reproduces every bit.
void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& metadata = {});

struct Checkpoint {
    ModelConfig config;
    nlohmann::json metadata;
    std::vector<std::pair<std::string, ad::Array>> parameters;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

// Copies checkpoint values into `model` for every parameter whose name does not
// start with one of `skip`. Shape or name mismatches raise IncompatibleArtifactError.
void assign_parameters(const Checkpoint& checkpoint, Model& model, std::span<const std::string> skip = {});

// Marks parameters whose names start with any prefix as non-trainable. Returns
// the number of parameters affected; a prefix that matches nothing is a config error.
std::size_t freeze(Model& model, std::span<const std::string> prefixes);

}  // namespace ign::net
