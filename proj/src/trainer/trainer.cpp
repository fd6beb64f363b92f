#include "ign/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ign/distributions/distributions.hpp"
#include "ign/errors.hpp"

namespace ign::train {

namespace {

ad::Array column(std::vector<double> values) {
    return ad::Array::column(std::move(values));
}

ad::Array stack_rows(const ad::Array& a, const ad::Array& b) {
    std::vector<double> v(a.values().begin(), a.values().end());
    v.insert(v.end(), b.values().begin(), b.values().end());
    return ad::Array(ad::Shape{a.rows() + b.rows(), a.cols()}, std::move(v));
}

// +1/m on the first m rows, -1/m on the next m: sum(f * w) = mean f(x) - mean f(x').
ad::Array difference_weights(std::size_t m) {
    ad::Array w(ad::Shape{2 * m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = 1.0 / static_cast<double>(m);
        w[m + i] = -1.0 / static_cast<double>(m);
    }
    return w;
}

std::string diagnostics(const Batch& batch, std::span<ad::Parameter* const> params) {
    std::ostringstream out;
    out << "batch indices [";
    for (std::size_t i = 0; i < batch.indices.size(); ++i) out << (i ? "," : "") << batch.indices[i];
    out << "]; parameter norms:";
    for (const auto* p : params) {
        double n = 0.0;
        for (double v : p->value.values()) n += v * v;
        out << ' ' << p->name << '=' << std::sqrt(n);
    }
    return out.str();
}

void require_finite(double loss, const char* what, const Batch& batch, std::span<ad::Parameter* const> params) {
    if (!std::isfinite(loss)) {
        throw NumericalError(std::string(what) + " is not finite (" + std::to_string(loss) + "); step aborted; " +
                             diagnostics(batch, params));
    }
}

void apply(ad::AdamState& adam, std::span<ad::Parameter* const> params, ad::Gradients& grads, double clip,
           const Batch& batch) {
    ad::clip_global_norm(grads, params, clip);
    try {
        ad::adam_step(adam, params, grads);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + "; " + diagnostics(batch, params));
    }
}

std::vector<double> mean_rows_per_group(const ad::Array& values, std::size_t groups, std::size_t per_group) {
    const std::size_t A = values.cols();
    std::vector<double> out(groups * A, 0.0);
    for (std::size_t b = 0; b < groups; ++b)
        for (std::size_t k = 0; k < per_group; ++k)
            for (std::size_t a = 0; a < A; ++a) out[b * A + a] += values(b * per_group + k, a);
    for (auto& v : out) v /= static_cast<double>(per_group);
    return out;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(const env::Transition& t) {
    if (items_.size() < capacity_) {
        items_.push_back(t);
    } else {
        items_[inserted_ % capacity_] = t;
    }
    ++inserted_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t m, Rng& rng) const {
    if (m > items_.size()) {
        throw ContractError("cannot sample " + std::to_string(m) + " transitions from a buffer of " +
                            std::to_string(items_.size()));
    }
    std::vector<std::size_t> out;
    out.reserve(m);
    if (4 * m >= items_.size()) {
        // Partial Fisher-Yates over all indices.
        std::vector<std::size_t> all(items_.size());
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            std::swap(all[i], all[i + rng.below(all.size() - i)]);
            out.push_back(all[i]);
        }
        return out;
    }
    while (out.size() < m) {
        const std::size_t k = rng.below(items_.size());
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
}

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices,
                 const std::function<std::size_t(std::size_t state)>& next_action) {
    Batch b;
    b.indices.assign(indices.begin(), indices.end());
    for (std::size_t i : indices) {
        const env::Transition& t = buffer[i];
        b.states.push_back(t.state);
        b.actions.push_back(t.action);
        b.rewards.push_back(t.reward);
        b.next_states.push_back(t.next_state);
        b.terminal.push_back(t.terminal);
        b.next_actions.push_back(next_action(t.next_state));
    }
    return b;
}

// ---------------------------------------------------------------------------
// GAN updates

GanNoise draw_noise(std::size_t m, Rng& rng) {
    GanNoise n{ad::Array(ad::Shape{m, 1}), ad::Array(ad::Shape{m, 1}), ad::Array(ad::Shape{m, 1})};
    for (auto& v : n.z.values()) v = rng.uniform();
    for (auto& v : n.z_next.values()) v = rng.uniform();
    for (auto& v : n.eps.values()) v = rng.uniform();
    return n;
}

ad::Array interpolate(const ad::Array& x, const ad::Array& x_next, const ad::Array& eps) {
    if (x.shape() != x_next.shape() || x.shape() != eps.shape()) throw ShapeError("interpolate: shape mismatch");
    ad::Array out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = eps[i] * x[i] + (1.0 - eps[i]) * x_next[i];
    return out;
}

namespace {

struct GanInputs {
    ad::Array cond;       // (s, a)
    ad::Array next_cond;  // (s', a')
    ad::Array rewards;
    ad::Array bootstrap;  // gamma, or 0 for terminal transitions
};

GanInputs gan_inputs(const env::MdpSpec& spec, const Batch& batch, double gamma) {
    GanInputs in;
    in.cond = net::conditioning(spec, batch.states, batch.actions);
    in.next_cond = net::conditioning(spec, batch.next_states, batch.next_actions);
    in.rewards = column(batch.rewards);
    in.bootstrap = ad::Array(ad::Shape{batch.size(), 1});
    for (std::size_t i = 0; i < batch.size(); ++i) in.bootstrap[i] = batch.terminal[i] ? 0.0 : gamma;
    return in;
}

void check_noise(const GanNoise& noise, std::size_t m) {
    const ad::Shape want{m, 1};
    if (noise.z.shape() != want || noise.z_next.shape() != want || noise.eps.shape() != want) {
        throw ShapeError("GAN noise must be (" + std::to_string(m) + " x 1)");
    }
}

}  // namespace

ad::Var critic_objective(ad::Tape& tape, const env::MdpSpec& spec, const net::Generator& generator,
                         const net::Critic& critic, const Batch& batch, const GanConfig& cfg, double gamma,
                         const GanNoise& noise) {
    const std::size_t m = batch.size();
    check_noise(noise, m);
    const GanInputs in = gan_inputs(spec, batch, gamma);

    // Generator samples for (s, a) and the bootstrapped target r + gamma G(z'|s', a').
    ad::Array generated;
    {
        ad::Tape gen;
        generated = generator.forward(gen.constant(stack_rows(noise.z, noise.z_next)),
                                      gen.constant(stack_rows(in.cond, in.next_cond)))
                        .value();
    }
    ad::Array x(ad::Shape{m, 1}), x_next(ad::Shape{m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = generated[i];
        x_next[i] = in.rewards[i] + in.bootstrap[i] * generated[m + i];
    }
    const ad::Array x_mix = interpolate(x, x_next, noise.eps);  // penalty points

    // Both samples are scored as returns of (s, a).
    const ad::Var scores = critic.forward(tape.constant(stack_rows(x, x_next)), tape.constant(stack_rows(in.cond, in.cond)));
    ad::Var loss = ad::sum(ad::mul(scores, tape.constant(difference_weights(m))));
    if (cfg.lambda > 0.0) {
        const ad::Var mixed = tape.input(x_mix, true, "x_mix");
        const ad::Var grad = tape.input_gradient(ad::sum(critic.forward(mixed, tape.constant(in.cond))), mixed);
        const ad::Var penalty = ad::mean(ad::square(ad::add_scalar(ad::norm_rows(grad), -1.0)));
        loss = ad::add(loss, ad::scale(penalty, cfg.lambda));
    }
    return loss;
}

double critic_update(const env::MdpSpec& spec, net::Generator& generator, net::Critic& critic,
                     ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma,
                     const GanNoise& noise) {
    ad::Tape tape;
    const ad::Var loss = critic_objective(tape, spec, generator, critic, batch, cfg, gamma, noise);
    const double value = loss.value().item();
    auto params = critic.parameters();
    require_finite(value, "critic loss", batch, params);
    ad::Gradients grads = tape.backward(loss);
    apply(adam, params, grads, cfg.clip_norm, batch);
    return value;
}

double critic_update(const env::MdpSpec& spec, net::Generator& generator, net::Critic& critic,
                     ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma, Rng& rng) {
    return critic_update(spec, generator, critic, adam, batch, cfg, gamma, draw_noise(batch.size(), rng));
}

ad::Var generator_objective(ad::Tape& tape, const env::MdpSpec& spec, const net::Generator& generator,
                            const net::Critic& critic, const Batch& batch, const GanConfig& cfg, double gamma,
                            const GanNoise& noise) {
    const std::size_t m = batch.size();
    check_noise(noise, m);
    const GanInputs in = gan_inputs(spec, batch, gamma);

    const ad::Var generated = generator.forward(tape.constant(stack_rows(noise.z, noise.z_next)),
                                                tape.constant(stack_rows(in.cond, in.next_cond)));
    const ad::Var x = ad::slice_rows(generated, 0, m);
    ad::Var next = ad::slice_rows(generated, m, m);
    if (!cfg.bootstrap_gradient) next = tape.constant(next.value());
    const ad::Var x_next = ad::add(tape.constant(in.rewards), ad::mul(tape.constant(in.bootstrap), next));
    const ad::Var parts[] = {x, x_next};
    const ad::Var scores = critic.forward(ad::concat_rows(parts), tape.constant(stack_rows(in.cond, in.cond)));
    return ad::neg(ad::sum(ad::mul(scores, tape.constant(difference_weights(m)))));
}

double generator_update(const env::MdpSpec& spec, net::Generator& generator, const net::Critic& critic,
                        ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma,
                        const GanNoise& noise) {
    ad::Tape tape;
    const ad::Var objective = generator_objective(tape, spec, generator, critic, batch, cfg, gamma, noise);
    const double value = objective.value().item();
    auto params = generator.parameters();
    require_finite(value, "generator loss", batch, params);
    ad::Gradients grads = tape.backward(objective);
    apply(adam, params, grads, cfg.clip_norm, batch);
    return value;
}

double generator_update(const env::MdpSpec& spec, net::Generator& generator, const net::Critic& critic,
                        ad::AdamState& adam, const Batch& batch, const GanConfig& cfg, double gamma, Rng& rng) {
    return generator_update(spec, generator, critic, adam, batch, cfg, gamma, draw_noise(batch.size(), rng));
}

// ---------------------------------------------------------------------------
// Quantile TD update

ad::Var quantile_loss(ad::Tape& tape, const env::MdpSpec& spec, const net::QuantileNetwork& online,
                      const net::QuantileNetwork& target, const Batch& batch, const QuantileStepConfig& cfg,
                      Rng& rng) {
    const std::size_t B = batch.size(), N = cfg.num_tau, Np = cfg.num_tau_target;
    if (B == 0 || N == 0 || Np == 0) throw ConfigError("quantile update needs a batch and N, N' >= 1");
    auto draw = [&](std::size_t count) {
        ad::Array t(ad::Shape{count, 1});
        for (auto& v : t.values()) v = cfg.fixed_tau ? *cfg.fixed_tau : rng.uniform();
        return t;
    };
    const ad::Array tau = draw(B * N);
    const ad::Array tau_next = draw(B * Np);
    const ad::Array states = net::encode_states(spec, batch.states);
    const ad::Array next_states = net::encode_states(spec, batch.next_states);

    // Targets r + gamma theta'_{tau'_j}(s', a*), constant for this step.
    ad::Array targets(ad::Shape{B, Np});
    {
        ad::Tape t;
        const ad::Array theta_next = target.quantile_values(t.constant(next_states), t.constant(tau_next)).value();
        std::vector<std::size_t> best(B);
        if (cfg.next_action_from_batch) {
            best = batch.next_actions;
        } else {
            const ad::Array online_next = online.quantile_values(t.constant(next_states), t.constant(tau_next)).value();
            const auto q = mean_rows_per_group(online_next, B, Np);
            const std::size_t A = online_next.cols();
            for (std::size_t b = 0; b < B; ++b) best[b] = argmax(std::span(q).subspan(b * A, A));
        }
        for (std::size_t b = 0; b < B; ++b) {
            const double bootstrap = batch.terminal[b] ? 0.0 : cfg.gamma;
            for (std::size_t j = 0; j < Np; ++j) {
                targets(b, j) = batch.rewards[b] + bootstrap * theta_next(b * Np + j, best[b]);
            }
        }
    }

    const ad::Var theta = online.quantile_values(tape.constant(states), tape.constant(tau));
    std::vector<std::size_t> action_rows(B * N);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < N; ++i) action_rows[b * N + i] = batch.actions[b];
    const ad::Var predicted = ad::reshape(ad::gather_cols(theta, action_rows), ad::Shape{B, N});
    return dist::quantile_huber_loss(predicted, ad::Array(ad::Shape{B, N}, std::vector<double>(tau.values().begin(), tau.values().end())), targets, cfg.delta);
}

double quantile_update(const env::MdpSpec& spec, net::QuantileNetwork& online, const net::QuantileNetwork& target,
                       ad::AdamState& adam, const Batch& batch, const QuantileStepConfig& cfg, Rng& rng) {
    ad::Tape tape;
    const ad::Var loss = quantile_loss(tape, spec, online, target, batch, cfg, rng);
    const double value = loss.value().item();
    auto params = online.parameters();
    require_finite(value, "quantile loss", batch, params);
    ad::Gradients grads = tape.backward(loss);
    apply(adam, params, grads, cfg.clip_norm, batch);
    return value;
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

ad::AdamState adam_for(std::vector<ad::Parameter*> params, double lr, double beta1 = 0.9, double beta2 = 0.999) {
    ad::AdamConfig c;
    c.learning_rate = lr;
    c.beta1 = beta1;
    c.beta2 = beta2;
    return ad::make_adam_state(c, params);
}

}  // namespace

Trainer::Trainer(std::shared_ptr<const env::MdpSpec> spec, TrainConfig cfg, GanConfig gan, net::Model model,
                 std::optional<env::Policy> policy, TrainHooks hooks)
    : spec_(std::move(spec)),
      cfg_(std::move(cfg)),
      gan_(std::move(gan)),
      model_(std::move(model)),
      policy_(std::move(policy)),
      hooks_(std::move(hooks)),
      env_(spec_, 0.0),
      buffer_(std::max<std::size_t>(cfg_.buffer_capacity, 1)),
      env_rng_(Rng::stream(cfg_.seed, "env")),
      act_rng_(Rng::stream(cfg_.seed, "act")),
      replay_rng_(Rng::stream(cfg_.seed, "replay")),
      tau_rng_(Rng::stream(cfg_.seed, "tau")),
      gan_rng_(Rng::stream(cfg_.seed, "gan-noise")),
      started_(std::chrono::steady_clock::now()) {
    spec_->validate();
    cfg_.validate();
    gan_.validate();
    env_ = env::sticky_wrap(spec_, cfg_.sticky);
    if (model_.config.state_dim != spec_->encoding_dim() || model_.config.num_actions != spec_->num_actions) {
        throw IncompatibleArtifactError("model expects state_dim " + std::to_string(model_.config.state_dim) +
                                        " and " + std::to_string(model_.config.num_actions) + " actions; environment '" +
                                        spec_->name + "' has " + std::to_string(spec_->encoding_dim()) + " and " +
                                        std::to_string(spec_->num_actions));
    }
    if (cfg_.mode == Mode::Evaluation) {
        if (!policy_) throw ConfigError("evaluation mode needs a fixed policy");
        if (policy_->num_states() != spec_->num_states || policy_->num_actions() != spec_->num_actions) {
            throw ConfigError("policy '" + policy_->id() + "' does not match environment '" + spec_->name + "'");
        }
    }
    if (!cfg_.freeze.empty()) net::freeze(model_, cfg_.freeze);
    gamma_ = cfg_.gamma.value_or(spec_->gamma);

    qcfg_.num_tau = cfg_.num_tau;
    qcfg_.num_tau_target = cfg_.num_tau_target;
    qcfg_.delta = cfg_.delta;
    qcfg_.gamma = gamma_;
    qcfg_.clip_norm = cfg_.clip_norm;
    qcfg_.next_action_from_batch = cfg_.mode == Mode::Evaluation;
    if (cfg_.algorithm == Algorithm::Dqn) {
        qcfg_.num_tau = qcfg_.num_tau_target = 1;
        qcfg_.fixed_tau = 0.5;
    }

    target_ = model_.quantile;
    quantile_adam_ = adam_for(model_.quantile.parameters(), cfg_.learning_rate);
    critic_adam_ = adam_for(model_.critic.parameters(), gan_.learning_rate, gan_.beta1, gan_.beta2);
    generator_adam_ = adam_for(model_.generator.parameters(), gan_.generator_learning_rate.value_or(gan_.learning_rate),
                               gan_.beta1, gan_.beta2);
}

void Trainer::load_offline(const env::OfflineDataset& data) {
    if (data.spec_hash != spec_->hash()) {
        throw IncompatibleArtifactError("offline dataset was generated for a different environment than '" +
                                        spec_->name + "'");
    }
    for (const auto& traj : data.trajectories) {
        for (const auto& t : traj) {
            if (spec_->is_absorbing(t.state)) continue;  // padding
            buffer_.add(t);
        }
    }
    offline_ = true;
}

double Trainer::epsilon() const {
    const double frac = std::min(1.0, static_cast<double>(steps_) / static_cast<double>(cfg_.epsilon_decay_steps));
    return cfg_.epsilon_start + frac * (cfg_.epsilon_end - cfg_.epsilon_start);
}

std::size_t Trainer::greedy_action(std::size_t state, Rng& rng) const {
    std::vector<double> taus;
    if (cfg_.algorithm == Algorithm::Dqn) {
        taus = {0.5};
    } else {
        taus.resize(cfg_.num_tau_act);
        for (auto& t : taus) t = rng.uniform();
    }
    const auto q = model_.quantile.q_values(spec_->encode(state), taus, cfg_.distortion);
    return argmax(q);
}

std::vector<std::size_t> Trainer::greedy_policy() const {
    // Fixed midpoint grid, so the reported policy does not depend on an RNG.
    const std::size_t K = cfg_.algorithm == Algorithm::Dqn ? 1 : cfg_.num_tau_act;
    std::vector<double> taus(K);
    for (std::size_t k = 0; k < K; ++k) taus[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    std::vector<std::size_t> out(spec_->num_states);
    for (std::size_t s = 0; s < spec_->num_states; ++s) {
        out[s] = argmax(model_.quantile.q_values(spec_->encode(s), taus, cfg_.distortion));
    }
    return out;
}

std::size_t Trainer::next_action(std::size_t state, Rng& rng) const {
    if (cfg_.mode == Mode::Evaluation) return policy_->sample(state, rng);
    return greedy_action(state, rng);
}

void Trainer::act() {
    if (!episode_open_) {
        env_.reset(env_rng_);
        episode_open_ = true;
        episode_steps_ = 0;
        episode_return_ = 0.0;
        episode_discount_ = 1.0;
    }
    const std::size_t s = env_.state();
    std::size_t a;
    if (act_rng_.uniform() < epsilon()) {
        a = act_rng_.below(spec_->num_actions);
    } else if (cfg_.mode == Mode::Evaluation) {
        a = policy_->sample(s, act_rng_);
    } else {
        a = greedy_action(s, act_rng_);
    }
    const auto result = env_.step(a, env_rng_);
    buffer_.add(result.transition);
    episode_return_ += episode_discount_ * result.transition.reward;
    episode_discount_ *= gamma_;
    ++episode_steps_;
    if (result.transition.terminal || episode_steps_ >= cfg_.max_episode_steps) {
        episode_open_ = false;
        last_episode_return_ = episode_return_;
    }
}

void Trainer::update() {
    // Greedy next actions for the GAN targets are resolved once per update round.
    std::vector<std::size_t> greedy_table;
    auto resolve = [&](std::size_t state) -> std::size_t {
        if (cfg_.mode == Mode::Evaluation) return policy_->sample(state, replay_rng_);
        if (greedy_table.empty()) {
            greedy_table.resize(spec_->num_states);
            for (std::size_t s = 0; s < spec_->num_states; ++s) greedy_table[s] = greedy_action(s, replay_rng_);
        }
        return greedy_table[state];
    };
    auto sample = [&](std::size_t m) { return make_batch(buffer_, buffer_.sample_indices(m, replay_rng_), resolve); };

    if (cfg_.algorithm == Algorithm::Ign) {
        for (std::size_t k = 0; k < gan_.n_critic; ++k) {
            const Batch batch = sample(gan_.batch_size);
            if (gan_.quantile_in_critic) {
                ad::Tape tape;
                const ad::Var critic_loss = critic_objective(tape, *spec_, model_.generator, model_.critic, batch, gan_,
                                                             gamma_, draw_noise(batch.size(), gan_rng_));
                const ad::Var td = quantile_loss(tape, *spec_, model_.quantile, target_, batch, qcfg_, tau_rng_);
                const ad::Var total = ad::add(critic_loss, td);
                auto critic_params = model_.critic.parameters();
                auto quantile_params = model_.quantile.parameters();
                require_finite(total.value().item(), "critic loss", batch, critic_params);
                ad::Gradients grads = tape.backward(total);
                apply(critic_adam_, critic_params, grads, gan_.clip_norm, batch);
                apply(quantile_adam_, quantile_params, grads, cfg_.clip_norm, batch);
                last_critic_loss_ = critic_loss.value().item();
                last_quantile_loss_ = td.value().item();
                ++quantile_updates_;
                if (quantile_updates_ % cfg_.target_sync == 0) target_ = model_.quantile;
            } else {
                last_critic_loss_ = critic_update(*spec_, model_.generator, model_.critic, critic_adam_, batch, gan_,
                                                  gamma_, gan_rng_);
            }
            ++critic_updates_;
        }
        const Batch batch = sample(gan_.batch_size);
        last_generator_loss_ = generator_update(*spec_, model_.generator, model_.critic, generator_adam_, batch, gan_,
                                                gamma_, gan_rng_);
        ++generator_updates_;
        if (gan_.quantile_in_critic) return;
    }

    const Batch batch = sample(cfg_.batch_size);
    last_quantile_loss_ = quantile_update(*spec_, model_.quantile, target_, quantile_adam_, batch, qcfg_, tau_rng_);
    ++quantile_updates_;
    if (quantile_updates_ % cfg_.target_sync == 0) target_ = model_.quantile;
}

void Trainer::emit_metrics() {
    if (!hooks_.metrics) return;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::ordered_json rec;
    rec["step"] = steps_;
    rec["episode_return"] = opt(last_episode_return_);
    rec["quantile_loss"] = opt(last_quantile_loss_);
    rec["critic_loss"] = opt(last_critic_loss_);
    rec["generator_loss"] = opt(last_generator_loss_);
    if (hooks_.w1_to_oracle) rec["w1_to_oracle"] = opt(hooks_.w1_to_oracle(model_));
    if (cfg_.record_wallclock) {
        rec["wallclock"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    }
    hooks_.metrics(rec);
}

void Trainer::step() {
    if (!offline_) act();
    ++steps_;
    const std::size_t needed =
        std::max(cfg_.batch_size, cfg_.algorithm == Algorithm::Ign ? gan_.batch_size : std::size_t{0});
    if (steps_ >= cfg_.learning_starts && steps_ % cfg_.update_period == 0 && buffer_.size() >= needed) {
        const net::Model before = hooks_.on_abort ? model_ : net::Model{};
        try {
            update();
        } catch (const Error&) {
            if (hooks_.on_abort) hooks_.on_abort(steps_, before);
            throw;
        }
    }
    if (steps_ % cfg_.metric_period == 0) emit_metrics();
    if (hooks_.checkpoint && hooks_.checkpoint_period > 0 && steps_ % hooks_.checkpoint_period == 0) {
        hooks_.checkpoint(steps_, model_);
    }
}

void Trainer::advance(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) step();
}

void Trainer::run() {
    while (steps_ < cfg_.total_steps) step();
}

TrainResult train(std::shared_ptr<const env::MdpSpec> spec, const TrainConfig& cfg, const GanConfig& gan,
                  const net::ModelConfig& model_config, TrainHooks hooks, std::optional<env::Policy> policy) {
    Trainer trainer(std::move(spec), cfg, gan, net::Model(model_config, cfg.seed), std::move(policy), std::move(hooks));
    trainer.run();
    return {trainer.model(), trainer.steps_done()};
}

net::Model warm_start(const std::filesystem::path& checkpoint, const net::ModelConfig& config,
                      std::span<const std::string> freeze, std::span<const std::string> reinitialize,
                      std::uint64_t seed) {
    const net::Checkpoint ck = net::read_checkpoint(checkpoint);
    net::Model model(config, seed);
    net::assign_parameters(ck, model, reinitialize);
    if (!freeze.empty()) net::freeze(model, freeze);
    return model;
}

}  // namespace ign::train
