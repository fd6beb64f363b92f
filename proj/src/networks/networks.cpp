#include "ign/networks/networks.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "ign/errors.hpp"

namespace ign::net {

namespace {

constexpr int kCheckpointFormatVersion = 1;
constexpr double kLeakySlope = 0.01;

template <class P>
void append(std::vector<P>& out, const std::vector<P>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

bool has_prefix(const std::string& name, std::span<const std::string> prefixes) {
    for (const auto& p : prefixes)
        if (name.rfind(p, 0) == 0) return true;
    return false;
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Softplus: return "softplus";
    }
    return "identity";
}

Activation parse_activation(const std::string& name) {
    for (auto a : {Activation::Identity, Activation::Relu, Activation::LeakyRelu, Activation::Softplus}) {
        if (to_string(a) == name) return a;
    }
    throw ConfigError("unknown activation '" + name + "' (expected identity, relu, leaky_relu or softplus)");
}

ad::Var activate(const ad::Var& x, Activation a) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Relu: return ad::relu(x);
        case Activation::LeakyRelu: return ad::leaky_relu(x, kLeakySlope);
        case Activation::Softplus: return ad::softplus(x);
    }
    return x;
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool zero)
    : weight{name + ".weight", ad::Array(ad::Shape{in, out})}, bias{name + ".bias", ad::Array(ad::Shape{1, out})} {
    if (zero) return;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : weight.value.values()) w = rng.uniform(-bound, bound);
    for (auto& b : bias.value.values()) b = rng.uniform(-bound, bound);
}

ad::Var Linear::operator()(const ad::Var& x) const {
    ad::Tape& tape = x.tape();
    return ad::add_row(ad::matmul(x, tape.parameter(weight)), tape.parameter(bias));
}

Mlp::Mlp(const std::string& name, const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
         Rng& rng, bool zero_output)
    : hidden_(hidden), output_(output) {
    if (sizes.size() < 2) throw ConfigError(name + ": an MLP needs at least input and output widths");
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const bool last = k + 2 == sizes.size();
        layers_.emplace_back(name + ".layer" + std::to_string(k), sizes[k], sizes[k + 1], rng, last && zero_output);
    }
}

ad::Var Mlp::forward(const ad::Var& x) const {
    ad::Var h = x;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        h = activate(layers_[k](h), k + 1 == layers_.size() ? output_ : hidden_);
    }
    return h;
}

void Mlp::collect(std::vector<ad::Parameter*>& out) {
    for (auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

void Mlp::collect(std::vector<const ad::Parameter*>& out) const {
    for (const auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

void ModelConfig::validate() const {
    std::string problems;
    if (state_dim == 0) problems += " state_dim must be positive;";
    if (num_actions == 0) problems += " num_actions must be positive;";
    if (embedding_dim == 0) problems += " embedding_dim must be positive;";
    if (cosine_basis == 0) problems += " cosine_basis must be positive;";
    if (quantile_hidden == 0) problems += " quantile_hidden must be positive;";
    if (gan_hidden == 0) problems += " gan_hidden must be positive;";
    if (critic_activation == Activation::Relu) {
        problems += " critic_activation relu has no usable second derivative for the gradient penalty;";
    }
    if (!problems.empty()) throw ConfigError("invalid model config:" + problems);
}

nlohmann::json ModelConfig::to_json() const {
    return {{"state_dim", state_dim},
            {"num_actions", num_actions},
            {"embedding_dim", embedding_dim},
            {"cosine_basis", cosine_basis},
            {"quantile_hidden", quantile_hidden},
            {"gan_hidden", gan_hidden},
            {"gan_layers", gan_layers},
            {"generator_activation", to_string(generator_activation)},
            {"critic_activation", to_string(critic_activation)},
            {"zero_init_generator_output", zero_init_generator_output}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.state_dim = j.at("state_dim").get<std::size_t>();
    c.num_actions = j.at("num_actions").get<std::size_t>();
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.cosine_basis = j.at("cosine_basis").get<std::size_t>();
    c.quantile_hidden = j.at("quantile_hidden").get<std::size_t>();
    c.gan_hidden = j.at("gan_hidden").get<std::size_t>();
    c.gan_layers = j.at("gan_layers").get<std::size_t>();
    c.generator_activation = parse_activation(j.at("generator_activation").get<std::string>());
    c.critic_activation = parse_activation(j.at("critic_activation").get<std::string>());
    c.zero_init_generator_output = j.at("zero_init_generator_output").get<bool>();
    return c;
}

// ---------------------------------------------------------------------------

QuantileNetwork::QuantileNetwork(const ModelConfig& config, Rng& rng)
    : psi_("quantile.psi", {config.state_dim, config.quantile_hidden, config.embedding_dim}, Activation::Relu,
           Activation::Relu, rng),
      phi_("quantile.phi", config.cosine_basis, config.embedding_dim, rng),
      head_("quantile.f", {config.embedding_dim, config.quantile_hidden, config.num_actions}, Activation::Relu,
            Activation::Identity, rng, true),
      cosine_basis_(config.cosine_basis),
      num_actions_(config.num_actions) {}

ad::Var QuantileNetwork::cosine_embed(const ad::Var& tau) const {
    if (tau.value().cols() != 1) throw ShapeError("cosine_embed: tau must be a column, got " + ad::to_string(tau.shape()));
    for (double t : tau.value().values()) {
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("tau " + std::to_string(t) + " outside [0, 1]");
    }
    ad::Array freq(ad::Shape{1, cosine_basis_});
    for (std::size_t i = 0; i < cosine_basis_; ++i) freq[i] = std::numbers::pi * static_cast<double>(i);
    const ad::Var features = ad::cos(ad::matmul(tau, tau.tape().constant(std::move(freq))));
    return ad::relu(phi_(features));
}

ad::Var QuantileNetwork::quantile_values(const ad::Var& states, const ad::Var& tau) const {
    const std::size_t B = states.value().rows(), K = tau.value().rows();
    if (B == 0 || K % B != 0) {
        throw ShapeError("quantile_values: " + std::to_string(K) + " tau rows for " + std::to_string(B) + " states");
    }
    const ad::Var psi = ad::repeat_rows(psi_.forward(states), K / B);
    return head_.forward(ad::mul(psi, cosine_embed(tau)));
}

ad::Array QuantileNetwork::quantile_values(std::span<const double> state, std::span<const double> taus) const {
    ad::Tape tape;
    const ad::Var s = tape.constant(ad::Array(ad::Shape{1, state.size()}, {state.begin(), state.end()}));
    const ad::Var t = tape.constant(ad::Array(ad::Shape{taus.size(), 1}, {taus.begin(), taus.end()}));
    return quantile_values(s, t).value();
}

std::vector<double> QuantileNetwork::q_values(std::span<const double> state, std::span<const double> taus,
                                              const dist::Distortion& distortion) const {
    if (taus.empty()) throw ConfigError("q_values needs at least one tau draw");
    std::vector<double> distorted(taus.begin(), taus.end());
    for (auto& t : distorted) t = dist::distort_tau(t, distortion);
    const ad::Array theta = quantile_values(state, distorted);
    std::vector<double> q(num_actions_, 0.0);
    for (std::size_t k = 0; k < theta.rows(); ++k)
        for (std::size_t a = 0; a < num_actions_; ++a) q[a] += theta(k, a);
    for (auto& v : q) v /= static_cast<double>(theta.rows());
    return q;
}

std::vector<ad::Parameter*> QuantileNetwork::parameters() {
    std::vector<ad::Parameter*> out;
    psi_.collect(out);
    out.push_back(&phi_.weight);
    out.push_back(&phi_.bias);
    head_.collect(out);
    return out;
}

std::vector<const ad::Parameter*> QuantileNetwork::parameters() const {
    std::vector<const ad::Parameter*> out;
    psi_.collect(out);
    out.push_back(&phi_.weight);
    out.push_back(&phi_.bias);
    head_.collect(out);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> gan_sizes(const ModelConfig& c) {
    std::vector<std::size_t> sizes{1 + c.state_dim + c.num_actions};
    for (std::size_t k = 0; k < c.gan_layers; ++k) sizes.push_back(c.gan_hidden);
    sizes.push_back(1);
    return sizes;
}

ad::Var joined(const ad::Var& x, const ad::Var& cond) {
    const ad::Var parts[] = {x, cond};
    return ad::concat_cols(parts);
}

double scalar_forward(const Mlp& mlp, double x, std::span<const double> cond) {
    ad::Tape tape;
    std::vector<double> row{x};
    row.insert(row.end(), cond.begin(), cond.end());
    const auto width = row.size();
    return mlp.forward(tape.constant(ad::Array(ad::Shape{1, width}, std::move(row)))).value().item();
}

}  // namespace

Generator::Generator(const ModelConfig& config, Rng& rng)
    : mlp_("generator", gan_sizes(config), config.generator_activation, Activation::Identity, rng,
           config.zero_init_generator_output) {}

ad::Var Generator::forward(const ad::Var& z, const ad::Var& cond) const {
    return mlp_.forward(joined(z, cond));
}

double Generator::generate(double z, std::span<const double> cond) const {
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("generator noise " + std::to_string(z) + " outside [0, 1]");
    return scalar_forward(mlp_, z, cond);
}

std::vector<ad::Parameter*> Generator::parameters() {
    std::vector<ad::Parameter*> out;
    mlp_.collect(out);
    return out;
}

std::vector<const ad::Parameter*> Generator::parameters() const {
    std::vector<const ad::Parameter*> out;
    mlp_.collect(out);
    return out;
}

Critic::Critic(const ModelConfig& config, Rng& rng)
    : mlp_("critic", gan_sizes(config), config.critic_activation, Activation::Identity, rng) {}

ad::Var Critic::forward(const ad::Var& x, const ad::Var& cond) const {
    return mlp_.forward(joined(x, cond));
}

double Critic::criticize(double x, std::span<const double> cond) const {
    return scalar_forward(mlp_, x, cond);
}

std::vector<ad::Parameter*> Critic::parameters() {
    std::vector<ad::Parameter*> out;
    mlp_.collect(out);
    return out;
}

std::vector<const ad::Parameter*> Critic::parameters() const {
    std::vector<const ad::Parameter*> out;
    mlp_.collect(out);
    return out;
}

// ---------------------------------------------------------------------------

Model::Model(const ModelConfig& c, std::uint64_t seed) : config(c) {
    config.validate();
    Rng q = Rng::stream(seed, "init.quantile");
    Rng g = Rng::stream(seed, "init.generator");
    Rng f = Rng::stream(seed, "init.critic");
    quantile = QuantileNetwork(config, q);
    generator = Generator(config, g);
    critic = Critic(config, f);
}

std::vector<ad::Parameter*> Model::parameters() {
    auto out = quantile.parameters();
    append(out, generator.parameters());
    append(out, critic.parameters());
    return out;
}

std::vector<const ad::Parameter*> Model::parameters() const {
    auto out = quantile.parameters();
    append(out, generator.parameters());
    append(out, critic.parameters());
    return out;
}

ModelConfig model_config_for(const env::MdpSpec& spec) {
    ModelConfig c;
    c.state_dim = spec.encoding_dim();
    c.num_actions = spec.num_actions;
    return c;
}

ad::Array encode_states(const env::MdpSpec& spec, std::span<const std::size_t> states) {
    const std::size_t width = spec.encoding_dim();
    ad::Array out(ad::Shape{states.size(), width});
    for (std::size_t i = 0; i < states.size(); ++i) {
        spec.encode(states[i], out.values().subspan(i * width, width));
    }
    return out;
}

ad::Array conditioning(const env::MdpSpec& spec, std::span<const std::size_t> states,
                       std::span<const std::size_t> actions) {
    if (states.size() != actions.size()) throw ShapeError("conditioning: states and actions differ in length");
    const std::size_t sdim = spec.encoding_dim(), width = sdim + spec.num_actions;
    ad::Array out(ad::Shape{states.size(), width});
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (actions[i] >= spec.num_actions) {
            throw IndexError("action index " + std::to_string(actions[i]) + " out of range [0, " +
                             std::to_string(spec.num_actions) + ")");
        }
        spec.encode(states[i], out.values().subspan(i * width, sdim));
        out(i, sdim + actions[i]) = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& metadata) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto* p : model.parameters()) {
        params.push_back({{"name", p->name},
                          {"shape", p->value.shape()},
                          {"trainable", p->trainable},
                          {"values", std::vector<double>(p->value.values().begin(), p->value.values().end())}});
    }
    const nlohmann::json doc = {{"format_version", kCheckpointFormatVersion},
                                {"architecture", model.config.to_json()},
                                {"metadata", metadata.is_null() ? nlohmann::json::object() : metadata},
                                {"parameters", params}};
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write checkpoint " + path.string());
        out << doc.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IncompatibleArtifactError("cannot open checkpoint " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifactError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.contains("format_version") || doc["format_version"] != kCheckpointFormatVersion) {
        throw IncompatibleArtifactError("checkpoint " + path.string() + " has unsupported format version");
    }
    Checkpoint ck;
    try {
        ck.config = ModelConfig::from_json(doc.at("architecture"));
        ck.metadata = doc.value("metadata", nlohmann::json::object());
        for (const auto& p : doc.at("parameters")) {
            ck.parameters.emplace_back(p.at("name").get<std::string>(),
                                       ad::Array(p.at("shape").get<ad::Shape>(), p.at("values").get<std::vector<double>>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifactError("malformed checkpoint " + path.string() + ": " + e.what());
    } catch (const ShapeError& e) {
        throw IncompatibleArtifactError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    return ck;
}

void assign_parameters(const Checkpoint& checkpoint, Model& model, std::span<const std::string> skip) {
    std::string problems;
    for (auto* p : model.parameters()) {
        if (has_prefix(p->name, skip)) continue;
        const auto it = std::find_if(checkpoint.parameters.begin(), checkpoint.parameters.end(),
                                     [&](const auto& e) { return e.first == p->name; });
        if (it == checkpoint.parameters.end()) {
            problems += "\n  - " + p->name + " missing from checkpoint";
        } else if (it->second.shape() != p->value.shape()) {
            problems += "\n  - " + p->name + ": checkpoint " + ad::to_string(it->second.shape()) + " vs model " +
                        ad::to_string(p->value.shape());
        }
    }
    if (!problems.empty()) throw IncompatibleArtifactError("checkpoint does not fit the model:" + problems);
    for (auto* p : model.parameters()) {
        if (has_prefix(p->name, skip)) continue;
        for (const auto& [name, value] : checkpoint.parameters) {
            if (name == p->name) p->value = value;
        }
    }
}

Model load_model(const std::filesystem::path& path) {
    const Checkpoint ck = read_checkpoint(path);
    Model model(ck.config, 0);
    assign_parameters(ck, model);
    return model;
}

std::size_t freeze(Model& model, std::span<const std::string> prefixes) {
    std::size_t count = 0;
    for (const auto& prefix : prefixes) {
        std::size_t matched = 0;
        for (auto* p : model.parameters()) {
            if (p->name.rfind(prefix, 0) == 0) {
                if (p->trainable) ++count;
                p->trainable = false;
                ++matched;
            }
        }
        if (matched == 0) throw ConfigError("freeze directive '" + prefix + "' matches no parameter");
    }
    return count;
}

}  // namespace ign::net
