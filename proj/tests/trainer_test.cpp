#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "ign/distributions/distributions.hpp"
#include "ign/envs/builtin.hpp"
#include "ign/envs/policy.hpp"
#include "ign/errors.hpp"
#include "ign/trainer/trainer.hpp"
#include "support/finite_difference.hpp"

using namespace ign;
using namespace ign::train;

namespace {

net::ModelConfig small_config(const env::MdpSpec& spec, std::size_t gan_layers = 2) {
    net::ModelConfig c = net::model_config_for(spec);
    c.embedding_dim = 16;
    c.cosine_basis = 8;
    c.quantile_hidden = 32;
    c.gan_hidden = 16;
    c.gan_layers = gan_layers;
    return c;
}

ad::Parameter& param(std::vector<ad::Parameter*> params, const std::string& name) {
    for (auto* p : params)
        if (p->name == name) return *p;
    throw std::runtime_error("no parameter " + name);
}

const ad::Parameter& param(std::vector<const ad::Parameter*> params, const std::string& name) {
    for (const auto* p : params)
        if (p->name == name) return *p;
    throw std::runtime_error("no parameter " + name);
}

void fill(std::vector<ad::Parameter*> params, double value) {
    for (auto* p : params)
        for (auto& v : p->value.values()) v = value;
}

std::vector<ad::Array> snapshot(std::vector<ad::Parameter*> params) {
    std::vector<ad::Array> out;
    for (auto* p : params) out.push_back(p->value);
    return out;
}

// A single hand-built transition (s, a, r, s', a').
Batch one_transition(std::size_t s, std::size_t a, double r, std::size_t s_next, std::size_t a_next,
                     bool terminal = false) {
    Batch b;
    b.indices = {0};
    b.states = {s};
    b.actions = {a};
    b.rewards = {r};
    b.next_states = {s_next};
    b.next_actions = {a_next};
    b.terminal = {terminal};
    return b;
}

GanNoise fixed_noise(double z, double z_next, double eps) {
    return {ad::Array::column({z}), ad::Array::column({z_next}), ad::Array::column({eps})};
}

// Linear GAN pair: G(z|s,a) = bias, f(x|s,a) = w * x.
void make_linear(net::Model& m, double generator_bias, double w) {
    fill(m.generator.parameters(), 0.0);
    param(m.generator.parameters(), "generator.layer0.bias").value[0] = generator_bias;
    fill(m.critic.parameters(), 0.0);
    param(m.critic.parameters(), "critic.layer0.weight").value[0] = w;
}

ad::AdamState adam_for(std::vector<ad::Parameter*> params, double lr = 1e-3) {
    ad::AdamConfig c;
    c.learning_rate = lr;
    return ad::make_adam_state(c, params);
}

GanConfig unclipped(double lambda) {
    GanConfig g;
    g.lambda = lambda;
    g.clip_norm = 0.0;
    return g;
}

std::shared_ptr<const env::MdpSpec> shared(env::MdpSpec spec) {
    return std::make_shared<const env::MdpSpec>(std::move(spec));
}

std::string metric_stream(const TrainConfig& cfg, const GanConfig& gan) {
    auto spec = shared(env::make_chain());
    std::ostringstream out;
    TrainHooks hooks;
    hooks.metrics = [&](const nlohmann::ordered_json& rec) { out << rec.dump() << '\n'; };
    train::train(spec, cfg, gan, small_config(*spec), hooks);
    return out.str();
}

}  // namespace

TEST(ReplayBufferTest, RingOverwritesOldest) {
    ReplayBuffer buffer(3);
    for (std::size_t i = 0; i < 5; ++i) buffer.add({i, 0, 0.0, i, false});
    EXPECT_EQ(buffer.size(), 3u);
    EXPECT_EQ(buffer.inserted(), 5u);
    std::set<std::size_t> states;
    for (std::size_t i = 0; i < buffer.size(); ++i) states.insert(buffer[i].state);
    EXPECT_EQ(states, (std::set<std::size_t>{2, 3, 4}));
}

TEST(ReplayBufferTest, FullBatchReturnsEveryTransitionOnce) {
    ReplayBuffer buffer(10);
    for (std::size_t i = 0; i < 7; ++i) buffer.add({i, 0, 0.0, i, false});
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto idx = buffer.sample_indices(7, rng);
        std::sort(idx.begin(), idx.end());
        EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
    }
}

TEST(ReplayBufferTest, SmallBatchesHaveNoDuplicatesAndCoverUniformly) {
    ReplayBuffer buffer(100);
    for (std::size_t i = 0; i < 100; ++i) buffer.add({i, 0, 0.0, i, false});
    Rng rng(4);
    std::vector<int> counts(100, 0);
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
        const auto idx = buffer.sample_indices(5, rng);
        EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 5u);
        for (auto i : idx) ++counts[i];
    }
    // Each index is included with probability 0.05 per batch.
    const double expected = draws * 0.05, sd = std::sqrt(draws * 0.05 * 0.95);
    for (int c : counts) EXPECT_NEAR(c, expected, 5 * sd);
}

TEST(ReplayBufferTest, OversizedBatchIsAContractError) {
    ReplayBuffer buffer(4);
    buffer.add({});
    Rng rng(1);
    EXPECT_THROW(buffer.sample_indices(2, rng), ContractError);
}

TEST(ConfigTest, DefaultsAndValidation) {
    GanConfig g;
    EXPECT_EQ(g.lambda, 10.0);
    EXPECT_EQ(g.n_critic, 5u);
    EXPECT_EQ(g.batch_size, 32u);
    EXPECT_EQ(g.learning_rate, 1e-4);
    TrainConfig t;
    EXPECT_EQ(t.num_tau, 8u);
    EXPECT_EQ(t.num_tau_target, 8u);
    EXPECT_EQ(t.delta, 1.0);
    EXPECT_EQ(t.buffer_capacity, 50000u);
    EXPECT_EQ(t.target_sync, 1000u);

    g.lambda = -1;
    g.n_critic = 0;
    try {
        g.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("n_critic"), std::string::npos);
    }
    t.epsilon_end = 1.5;
    t.target_sync = 0;
    EXPECT_THROW(t.validate(), ConfigError);
}

TEST(ConfigTest, JsonRoundTripAndUnknownKeys) {
    TrainConfig t;
    t.algorithm = Algorithm::Iqn;
    t.gamma = 0.95;
    t.distortion = dist::Distortion::cvar(0.25);
    t.freeze = {"generator.layer0"};
    std::vector<std::string> problems;
    const TrainConfig back = TrainConfig::from_json(t.to_json(), problems);
    EXPECT_TRUE(problems.empty());
    EXPECT_EQ(back.to_json(), t.to_json());

    nlohmann::json j = {{"lambda", "ten"}, {"bogus", 1}};
    GanConfig::from_json(j, problems);
    ASSERT_EQ(problems.size(), 2u);
    EXPECT_NE(problems[0].find("gan.lambda"), std::string::npos);
    EXPECT_NE(problems[1].find("gan.bogus"), std::string::npos);
}

TEST(CriticUpdateTest, InterpolationArithmetic) {
    const ad::Array mixed = interpolate(ad::Array::column({0.0}), ad::Array::column({4.0}), ad::Array::column({0.25}));
    EXPECT_EQ(mixed[0], 3.0);
}

TEST(CriticUpdateTest, PenaltyIsEvaluatedAtInterpolatedSample) {
    // x = G = 0, x' = r + gamma * G = 4, eps = 0.25 -> x~ = 3. Oracle: finite-difference
    // slope of the (nonlinear) critic at 3.
    const auto spec = env::make_chain();
    net::Model m(small_config(spec, 1), 5);
    fill(m.generator.parameters(), 0.0);
    const Batch batch = one_transition(1, 1, 4.0, 2, 0);
    const auto cond = net::conditioning(spec, batch.states, batch.actions);
    const std::vector<double> c(cond.values().begin(), cond.values().end());
    const double h = 1e-5;
    const double slope = (m.critic.criticize(3.0 + h, c) - m.critic.criticize(3.0 - h, c)) / (2 * h);
    const double expected = m.critic.criticize(0.0, c) - m.critic.criticize(4.0, c) + 10.0 * std::pow(std::abs(slope) - 1, 2);

    ad::Tape tape;
    const double loss =
        critic_objective(tape, spec, m.generator, m.critic, batch, unclipped(10.0), 0.9, fixed_noise(0.3, 0.6, 0.25))
            .value()
            .item();
    EXPECT_NEAR(loss, expected, 1e-8);
}

TEST(CriticUpdateTest, ConstantCriticWithoutPenaltyLeavesParametersUnchanged) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 6);
    fill(m.critic.parameters(), 0.0);
    for (auto* p : m.critic.parameters())
        if (p->name == "critic.layer2.bias") p->value[0] = 0.7;
    const auto before = snapshot(m.critic.parameters());
    auto adam = adam_for(m.critic.parameters());
    Rng rng(6);
    const Batch batch = one_transition(0, 1, 0.5, 1, 1);
    ad::Tape tape;
    const ad::Var loss = critic_objective(tape, spec, m.generator, m.critic, batch, unclipped(0.0), 0.9,
                                          draw_noise(1, rng));
    for (const auto& [p, g] : tape.backward(loss))
        for (double v : g.values()) EXPECT_EQ(v, 0.0) << p->name;
    critic_update(spec, m.generator, m.critic, adam, batch, unclipped(0.0), 0.9, rng);
    EXPECT_EQ(snapshot(m.critic.parameters()), before);
}

TEST(CriticUpdateTest, LinearCriticMatchesAnalyticGradient) {
    const auto spec = env::make_chain();
    for (double w : {1.7, 0.4, -0.6, -2.5}) {
        net::Model m(small_config(spec, 0), 7);
        make_linear(m, 0.8, w);
        const Batch batch = one_transition(1, 0, 0.3, 0, 1);
        const double x = 0.8, x_next = 0.3 + 0.9 * 0.8;
        ad::Tape tape;
        const ad::Var loss =
            critic_objective(tape, spec, m.generator, m.critic, batch, unclipped(10.0), 0.9, fixed_noise(0.1, 0.9, 0.4));
        EXPECT_NEAR(loss.value().item(), w * (x - x_next) + 10.0 * std::pow(std::abs(w) - 1, 2), 1e-12);
        const auto grads = tape.backward(loss);
        const auto* weight = &param(m.critic.parameters(), "critic.layer0.weight");
        const double sign = w > 0 ? 1.0 : -1.0;
        EXPECT_NEAR(grads.at(weight)[0], 20.0 * (std::abs(w) - 1) * sign + (x - x_next), 1e-12) << "w=" << w;
    }
}

TEST(CriticUpdateTest, ZeroObjectiveForIdenticalSamples) {
    // lambda = 0, z = z', r = 0, gamma = 1, s = s', a = a'.
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 8);
    Rng rng(8);
    for (auto* p : m.parameters())
        for (auto& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
    const Batch batch = one_transition(2, 1, 0.0, 2, 1);
    ad::Tape tape;
    const ad::Var loss =
        critic_objective(tape, spec, m.generator, m.critic, batch, unclipped(0.0), 1.0, fixed_noise(0.4, 0.4, 0.7));
    EXPECT_EQ(loss.value().item(), 0.0);
    for (const auto& [p, g] : tape.backward(loss))
        for (double v : g.values()) EXPECT_EQ(v, 0.0) << p->name;
}

TEST(CriticUpdateTest, NonFiniteLossAbortsWithDiagnostics) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 9);
    param(m.critic.parameters(), "critic.layer0.bias").value[0] = std::nan("");
    auto adam = adam_for(m.critic.parameters());
    Rng rng(9);
    Batch batch = one_transition(0, 0, 0.0, 1, 0);
    batch.indices = {42};
    try {
        critic_update(spec, m.generator, m.critic, adam, batch, GanConfig{}, 0.9, rng);
        FAIL();
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("42"), std::string::npos);
        EXPECT_NE(msg.find("critic.layer0.weight="), std::string::npos);
    }
    EXPECT_EQ(adam.step, 0u);
}

TEST(GeneratorUpdateTest, ConstantCriticGivesZeroGradient) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 10);
    fill(m.critic.parameters(), 0.0);
    Rng rng(10);
    const Batch batch = one_transition(0, 1, 0.5, 1, 0);
    ad::Tape tape;
    const ad::Var obj =
        generator_objective(tape, spec, m.generator, m.critic, batch, unclipped(10.0), 0.9, draw_noise(1, rng));
    for (const auto& [p, g] : tape.backward(obj))
        for (double v : g.values()) EXPECT_EQ(v, 0.0) << p->name;
}

TEST(GeneratorUpdateTest, ScalarBiasGradientAndDirection) {
    // f(x) = x, G = theta: objective -(theta - (r + 0.9 theta)) has slope -0.1.
    const auto spec = env::make_chain();
    net::Model m(small_config(spec, 0), 11);
    make_linear(m, 0.5, 1.0);
    const Batch batch = one_transition(1, 1, 0.2, 2, 1);
    const GanNoise noise = fixed_noise(0.3, 0.8, 0.5);
    ad::Tape tape;
    const ad::Var obj = generator_objective(tape, spec, m.generator, m.critic, batch, unclipped(10.0), 0.9, noise);
    EXPECT_NEAR(obj.value().item(), -(0.5 - (0.2 + 0.9 * 0.5)), 1e-15);
    auto* bias = &param(m.generator.parameters(), "generator.layer0.bias");
    EXPECT_NEAR(tape.backward(obj).at(bias)[0], -0.1, 1e-14);

    auto adam = adam_for(m.generator.parameters(), 1e-3);
    generator_update(spec, m.generator, m.critic, adam, batch, unclipped(10.0), 0.9, noise);
    EXPECT_NEAR(bias->value[0], 0.5 + 1e-3, 1e-9);
}

TEST(GeneratorUpdateTest, FrozenOutputLayerIsBitIdentical) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 12);
    const std::string prefix[] = {"generator.layer2"};
    EXPECT_EQ(net::freeze(m, prefix), 2u);
    const auto frozen = param(m.generator.parameters(), "generator.layer2.weight").value;
    const auto hidden = param(m.generator.parameters(), "generator.layer0.weight").value;
    auto adam = adam_for(m.generator.parameters());
    Rng rng(12);
    for (int k = 0; k < 5; ++k) {
        generator_update(spec, m.generator, m.critic, adam, one_transition(0, 1, 0.5, 1, 0), GanConfig{}, 0.9, rng);
    }
    EXPECT_EQ(param(m.generator.parameters(), "generator.layer2.weight").value, frozen);
    EXPECT_NE(param(m.generator.parameters(), "generator.layer0.weight").value, hidden);
}

TEST(QuantileUpdateTest, ZeroNetworksAndRewardGiveZeroLoss) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 13);  // zero-initialised head: theta == 0
    Rng rng(13);
    ad::Tape tape;
    QuantileStepConfig q;
    const auto loss = quantile_loss(tape, spec, m.quantile, m.quantile, one_transition(1, 0, 0.0, 2, 1), q, rng);
    EXPECT_EQ(loss.value().item(), 0.0);
}

TEST(QuantileUpdateTest, MedianDqnCaseIsHalfHuber) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 14);
    Rng init(14);
    for (auto* p : m.quantile.parameters())
        for (auto& v : p->value.values()) v = init.uniform(-0.5, 0.5);
    net::Model target(small_config(spec), 15);
    for (auto* p : target.quantile.parameters())
        for (auto& v : p->value.values()) v = init.uniform(-0.5, 0.5);

    QuantileStepConfig q;
    q.num_tau = q.num_tau_target = 1;
    q.fixed_tau = 0.5;
    q.gamma = 0.9;
    const double median[] = {0.5};
    for (double delta : {1.0, 0.3}) {
        q.delta = delta;
        for (double r : {-3.0, -0.2, 0.0, 0.05, 0.7, 2.5}) {
            const Batch batch = one_transition(1, 0, r, 2, 1);
            // a* is greedy under the online net at s'.
            const auto q_next = m.quantile.q_values(spec.encode(2), median);
            const std::size_t best = q_next[1] > q_next[0] ? 1 : 0;
            const double a = r + 0.9 * target.quantile.quantile_values(spec.encode(2), median)(0, best) -
                             m.quantile.quantile_values(spec.encode(1), median)(0, 0);
            Rng rng(0);
            ad::Tape tape;
            const double loss = quantile_loss(tape, spec, m.quantile, target.quantile, batch, q, rng).value().item();
            EXPECT_NEAR(loss, dist::huber(a, delta) / (2 * delta), 1e-14) << "r=" << r << " delta=" << delta;
        }
    }
}

TEST(QuantileUpdateTest, TerminalTransitionsDropBootstrap) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 16);
    Rng init(16);
    for (auto* p : m.quantile.parameters())
        for (auto& v : p->value.values()) v = init.uniform(-0.5, 0.5);
    QuantileStepConfig q;
    q.num_tau = q.num_tau_target = 1;
    q.fixed_tau = 0.5;
    const double median[] = {0.5};
    const double a = 1.0 - m.quantile.quantile_values(spec.encode(3), median)(0, 1);
    Rng rng(0);
    ad::Tape tape;
    const double loss =
        quantile_loss(tape, spec, m.quantile, m.quantile, one_transition(3, 1, 1.0, 4, 0, true), q, rng).value().item();
    EXPECT_NEAR(loss, dist::huber(a, 1.0) / 2, 1e-14);
}

TEST(QuantileUpdateTest, LossIsNonNegative) {
    const auto spec = env::make_chain();
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        net::Model m(small_config(spec), 100 + trial);
        for (auto* p : m.quantile.parameters())
            for (auto& v : p->value.values()) v = rng.uniform(-1, 1);
        Batch batch;
        for (int i = 0; i < 4; ++i) {
            batch.indices.push_back(i);
            batch.states.push_back(rng.below(4));
            batch.actions.push_back(rng.below(2));
            batch.rewards.push_back(rng.uniform(-1, 1));
            batch.next_states.push_back(rng.below(5));
            batch.next_actions.push_back(rng.below(2));
            batch.terminal.push_back(rng.bernoulli(0.3));
        }
        ad::Tape tape;
        EXPECT_GE(quantile_loss(tape, spec, m.quantile, m.quantile, batch, QuantileStepConfig{}, rng).value().item(), 0.0);
    }
}

TEST(QuantileUpdateTest, CoinQuantilesConvergeToAtoms) {
    // With delta small relative to the atom gap the Huber-quantile fixed point is
    // within delta/3 of the true quantile (at delta = 1 it would be -2/3, not -1).
    auto spec = shared(env::make_coin());
    TrainConfig cfg;
    cfg.algorithm = Algorithm::Iqn;
    cfg.seed = 3;
    cfg.total_steps = 20000;
    cfg.learning_starts = 32;
    cfg.delta = 0.05;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 16;
    cfg.num_tau = cfg.num_tau_target = 8;
    cfg.metric_period = 100000;
    Trainer trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 3));
    trainer.run();
    const double taus[] = {0.25, 0.75};
    const ad::Array theta = trainer.model().quantile.quantile_values(spec->encode(0), taus);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_NEAR(theta(0, a), -1.0, 0.1);
        EXPECT_NEAR(theta(1, a), 1.0, 0.1);
    }
}

TEST(TrainTest, ZeroStepsReturnsInitialModelAndNoMetrics) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.total_steps = 0;
    cfg.seed = 4;
    int records = 0;
    TrainHooks hooks;
    hooks.metrics = [&](const nlohmann::ordered_json&) { ++records; };
    const auto result = train::train(spec, cfg, GanConfig{}, small_config(*spec), hooks);
    EXPECT_EQ(records, 0);
    EXPECT_EQ(result.steps, 0u);
    const net::Model fresh(small_config(*spec), 4);
    const auto a = result.model.parameters();
    const auto b = fresh.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
}

TEST(TrainTest, SameSeedGivesIdenticalMetricStreams) {
    TrainConfig cfg;
    cfg.total_steps = 300;
    cfg.learning_starts = 50;
    cfg.metric_period = 25;
    cfg.seed = 21;
    cfg.target_sync = 40;
    GanConfig gan;
    gan.batch_size = 8;
    gan.n_critic = 2;
    cfg.batch_size = 8;
    const std::string first = metric_stream(cfg, gan);
    EXPECT_EQ(first, metric_stream(cfg, gan));
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 12);
    cfg.seed = 22;
    EXPECT_NE(first, metric_stream(cfg, gan));

    const auto rec = nlohmann::json::parse(first.substr(0, first.find('\n')));
    EXPECT_EQ(rec["step"], 25);
    EXPECT_TRUE(rec.contains("episode_return"));
    EXPECT_TRUE(rec["critic_loss"].is_null());  // no update before learning_starts
    EXPECT_FALSE(rec.contains("wallclock"));
}

TEST(TrainTest, CriticUpdatesPerGeneratorUpdateEqualNCritic) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.total_steps = 60;
    cfg.learning_starts = 10;
    cfg.update_period = 5;
    cfg.batch_size = 4;
    GanConfig gan;
    gan.n_critic = 3;
    gan.batch_size = 4;
    Trainer trainer(spec, cfg, gan, net::Model(small_config(*spec), 1));
    trainer.run();
    EXPECT_EQ(trainer.generator_updates(), 11u);  // steps 10, 15, ..., 60
    EXPECT_EQ(trainer.critic_updates(), 3 * trainer.generator_updates());
    EXPECT_EQ(trainer.quantile_updates(), trainer.generator_updates());
}

TEST(TrainTest, TargetSyncCopiesOnlineNetwork) {
    auto spec = shared(env::make_coin());
    TrainConfig cfg;
    cfg.algorithm = Algorithm::Iqn;
    cfg.learning_starts = 4;
    cfg.batch_size = 4;
    cfg.target_sync = 5;
    Trainer trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 2));
    trainer.advance(7);  // 4 updates
    const auto online = trainer.model().quantile.parameters();
    const auto target = trainer.target().parameters();
    EXPECT_NE(online.back()->value, target.back()->value);
    trainer.advance(1);  // 5th update syncs
    for (std::size_t i = 0; i < online.size(); ++i) EXPECT_EQ(online[i]->value, target[i]->value);
}

TEST(TrainTest, FrozenParametersSurviveTraining) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.total_steps = 40;
    cfg.learning_starts = 8;
    cfg.batch_size = 8;
    cfg.freeze = {"generator.layer0", "critic.layer1", "quantile.psi"};
    GanConfig gan;
    gan.batch_size = 8;
    gan.n_critic = 2;
    const net::Model initial(small_config(*spec), 5);
    Trainer trainer(spec, cfg, gan, initial);
    trainer.run();
    const auto before = initial.parameters();
    const auto after = trainer.model().parameters();
    for (std::size_t i = 0; i < after.size(); ++i) {
        const bool frozen = after[i]->name.rfind("generator.layer0", 0) == 0 ||
                            after[i]->name.rfind("critic.layer1", 0) == 0 ||
                            after[i]->name.rfind("quantile.psi", 0) == 0;
        EXPECT_EQ(after[i]->trainable, !frozen) << after[i]->name;
        if (frozen) {
            EXPECT_EQ(after[i]->value, before[i]->value) << after[i]->name;
        }
    }
    EXPECT_NE(param(trainer.model().generator.parameters(), "generator.layer1.weight").value,
              param(initial.generator.parameters(), "generator.layer1.weight").value);
}

TEST(TrainTest, EvaluationModeNeedsMatchingPolicy) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.mode = Mode::Evaluation;
    EXPECT_THROW(Trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 1)), ConfigError);
    EXPECT_THROW(Trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 1), env::Policy::uniform(3, 2)),
                 ConfigError);
    EXPECT_NO_THROW(Trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 1), env::Policy::uniform(5, 2)));
}

TEST(TrainTest, ModelMustMatchEnvironment) {
    auto spec = shared(env::make_chain());
    auto coin = env::make_coin();
    EXPECT_THROW(Trainer(spec, TrainConfig{}, GanConfig{}, net::Model(small_config(coin), 1)),
                 IncompatibleArtifactError);
}

TEST(TrainTest, AbortHookReceivesPreUpdateModel) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.learning_starts = 4;
    cfg.batch_size = 4;
    GanConfig gan;
    gan.batch_size = 4;
    net::Model model(small_config(*spec), 6);
    param(model.critic.parameters(), "critic.layer0.bias").value[0] = std::nan("");
    std::optional<std::size_t> aborted_at;
    TrainHooks hooks;
    hooks.on_abort = [&](std::size_t step, const net::Model& m) {
        aborted_at = step;
        EXPECT_TRUE(std::isnan(param(m.critic.parameters(), "critic.layer0.bias").value[0]));
    };
    Trainer trainer(spec, cfg, gan, model, std::nullopt, hooks);
    EXPECT_THROW(trainer.advance(10), NumericalError);
    EXPECT_EQ(aborted_at, 4u);
}

TEST(TrainTest, OfflineDatasetDrivesUpdates) {
    auto spec = shared(env::make_chain());
    const auto data = env::generate_offline(*spec, env::Policy::uniform(5, 2), 20, 10, 7);
    TrainConfig cfg;
    cfg.algorithm = Algorithm::Iqn;
    cfg.mode = Mode::Evaluation;
    cfg.learning_starts = 1;
    cfg.batch_size = 8;
    Trainer trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 7), env::Policy::uniform(5, 2));
    trainer.load_offline(data);
    const std::size_t stored = trainer.buffer().size();
    EXPECT_GT(stored, 20u);
    trainer.advance(5);
    EXPECT_EQ(trainer.buffer().size(), stored);
    EXPECT_EQ(trainer.quantile_updates(), 5u);

    auto other = env::generate_offline(env::make_coin(), env::Policy::uniform(2, 2), 2, 2, 7);
    EXPECT_THROW(trainer.load_offline(other), IncompatibleArtifactError);
}

TEST(TrainTest, ChainControlFindsOptimalPolicy) {
    auto spec = shared(env::make_chain());
    TrainConfig cfg;
    cfg.algorithm = Algorithm::Iqn;
    cfg.seed = 2;
    cfg.total_steps = 50000;
    cfg.learning_starts = 200;
    cfg.update_period = 4;
    cfg.epsilon_decay_steps = 20000;
    cfg.learning_rate = 1e-3;
    cfg.target_sync = 200;
    cfg.batch_size = 16;
    cfg.max_episode_steps = 50;
    cfg.metric_period = 100000;
    Trainer trainer(spec, cfg, GanConfig{}, net::Model(small_config(*spec), 2));
    trainer.run();
    const auto greedy = trainer.greedy_policy();
    const auto optimal = env::optimal_policy(*spec);
    for (std::size_t s = 0; s < 4; ++s) EXPECT_EQ(optimal.probability(s, greedy[s]), 1.0) << "state " << s;
}

TEST(WarmStartTest, FreezeNothingEqualsPlainLoad) {
    const auto spec = env::make_chain();
    const auto path = std::filesystem::temp_directory_path() / "ign_warm_start.json";
    const net::Model source(small_config(spec), 30);
    net::save_checkpoint(path, source);
    const net::Model warm = warm_start(path, small_config(spec), {});
    const net::Model loaded = net::load_model(path);
    const auto a = warm.parameters();
    const auto b = loaded.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i]->value, b[i]->value);
        EXPECT_TRUE(a[i]->trainable);
    }

    // Frozen everything: training changes nothing.
    const std::vector<std::string> all = {"quantile", "generator", "critic"};
    TrainConfig cfg;
    cfg.total_steps = 30;
    cfg.learning_starts = 4;
    cfg.batch_size = 4;
    GanConfig gan;
    gan.batch_size = 4;
    Trainer trainer(std::make_shared<const env::MdpSpec>(spec), cfg, gan, warm_start(path, small_config(spec), all));
    trainer.run();
    EXPECT_GT(trainer.generator_updates(), 0u);
    const auto c = trainer.model().parameters();
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i]->value, b[i]->value) << c[i]->name;
    std::filesystem::remove(path);
}

TEST(WarmStartTest, ReinitializedLayersKeepFreshValuesAndShapeMismatchFails) {
    const auto spec = env::make_coin();
    const auto path = std::filesystem::temp_directory_path() / "ign_warm_start_coin.json";
    net::save_checkpoint(path, net::Model(small_config(spec), 31));
    const std::vector<std::string> reinit = {"generator.layer2"};
    const std::vector<std::string> freeze = {"generator.layer0", "critic.layer0"};
    const net::Model warm = warm_start(path, small_config(spec), freeze, reinit, 99);
    const net::Model fresh(small_config(spec), 99);
    const net::Model saved = net::load_model(path);
    EXPECT_EQ(param(warm.generator.parameters(), "generator.layer2.weight").value,
              param(fresh.generator.parameters(), "generator.layer2.weight").value);
    EXPECT_EQ(param(warm.generator.parameters(), "generator.layer0.weight").value,
              param(saved.generator.parameters(), "generator.layer0.weight").value);
    EXPECT_FALSE(param(warm.critic.parameters(), "critic.layer0.bias").trainable);

    auto wider = small_config(spec);
    wider.gan_hidden = 20;
    EXPECT_THROW(warm_start(path, wider, freeze), IncompatibleArtifactError);
    std::filesystem::remove(path);
}
