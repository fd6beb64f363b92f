#include <gtest/gtest.h>

#include <cmath>

#include "ign/envs/builtin.hpp"
#include "ign/errors.hpp"
#include "ign/evaluation/evaluation.hpp"
#include "support/policy_values.hpp"

using namespace ign;
using namespace ign::eval;

namespace {

net::ModelConfig small_config(const env::MdpSpec& spec) {
    net::ModelConfig c = net::model_config_for(spec);
    c.embedding_dim = 8;
    c.cosine_basis = 4;
    c.quantile_hidden = 16;
    c.gan_hidden = 8;
    c.gan_layers = 2;
    return c;
}

void constant_generator(net::Model& m, double c) {
    for (auto* p : m.generator.parameters())
        for (auto& v : p->value.values()) v = 0.0;
    m.generator.parameters().back()->value[0] = c;
}

env::Policy right_biased(const env::MdpSpec& spec, double p_right) {
    std::vector<double> probs;
    for (std::size_t s = 0; s < spec.num_states; ++s) {
        probs.push_back(1 - p_right);
        probs.push_back(p_right);
    }
    return env::Policy(spec.num_states, 2, probs, "right-" + std::to_string(p_right));
}

double total_probability(const Atoms& atoms) {
    double t = 0.0;
    for (const auto& [v, p] : atoms) t += p;
    return t;
}

}  // namespace

TEST(PseudoSamplesTest, ConstantGeneratorRepeatsConstant) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 1);
    constant_generator(m, 0.42);
    Rng rng(1);
    const auto d = pseudo_samples(m.generator, spec, 2, 1, 50, rng);
    ASSERT_EQ(d.size(), 50u);
    for (double v : d.samples()) EXPECT_EQ(v, 0.42);
    const auto single = pseudo_samples(m.generator, spec, 0, 0, 1, rng);
    EXPECT_EQ(single.size(), 1u);
    EXPECT_THROW(pseudo_samples(m.generator, spec, 0, 0, 0, rng), ConfigError);
}

TEST(PseudoSamplesTest, SameSeedSameSamplesAndMatchesScalarPath) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 2);
    Rng a(7), b(7), c(7);
    const auto x = pseudo_samples(m.generator, spec, 1, 0, 20, a);
    const auto y = pseudo_samples(m.generator, spec, 1, 0, 20, b);
    EXPECT_TRUE(std::equal(x.samples().begin(), x.samples().end(), y.samples().begin()));
    const std::vector<std::size_t> s = {1}, act = {0};
    const auto cond = net::conditioning(spec, s, act);
    const double z = c.uniform();
    EXPECT_NEAR(x.samples()[0], m.generator.generate(z, cond.values()), 1e-14);
}

TEST(ExactDistributionTest, SelfLoopGeometricSeries) {
    const auto spec = env::make_self_loop(1.0, 0.5);
    const auto exact = exact_distribution(spec, env::Policy::uniform(1, 1), 1e-6);
    ASSERT_EQ(exact.at(0, 0).size(), 1u);
    EXPECT_NEAR(exact.at(0, 0)[0].first, 2.0, 1e-6);
    EXPECT_LT(exact.tail_bound, 1e-6);
}

TEST(ExactDistributionTest, CoinIsTwoEqualAtoms) {
    const auto spec = env::make_coin();
    const auto exact = exact_distribution(spec, env::Policy::uniform(2, 2), 1e-6);
    for (std::size_t a = 0; a < 2; ++a) {
        const Atoms expected = {{-1.0, 0.5}, {1.0, 0.5}};
        EXPECT_EQ(exact.at(0, a), expected);
        EXPECT_EQ(exact.at(1, a), (Atoms{{0.0, 1.0}}));
    }
}

TEST(ExactDistributionTest, MeansMatchLinearSolveOnChain) {
    const auto spec = env::make_chain();
    for (const auto& policy : {env::Policy::uniform(5, 2), right_biased(spec, 0.8), env::optimal_policy(spec),
                               right_biased(spec, 0.1)}) {
        const auto exact = exact_distribution(spec, policy, 1e-8);
        const auto q = oracle::policy_q_values(spec, policy);
        for (std::size_t s = 0; s < 5; ++s)
            for (std::size_t a = 0; a < 2; ++a)
                EXPECT_NEAR(exact.mean(s, a), q[s * 2 + a], 1e-6) << policy.id() << " s=" << s << " a=" << a;
    }
}

TEST(ExactDistributionTest, ProbabilityAndSupportInvariants) {
    for (const auto& name : env::builtin_names()) {
        const auto spec = env::make_builtin(name);
        const auto policy = env::Policy::uniform(spec.num_states, spec.num_actions);
        const auto exact = exact_distribution(spec, policy, 1e-6);
        const double bound = spec.return_bound();
        for (const auto& atoms : exact.atoms) {
            EXPECT_NEAR(total_probability(atoms), 1.0, 1e-9) << name;
            for (const auto& [v, p] : atoms) {
                EXPECT_LE(std::abs(v), bound) << name;
                EXPECT_GT(p, 0.0);
            }
        }
        const auto q = oracle::policy_q_values(spec, policy);
        for (std::size_t i = 0; i < q.size(); ++i)
            EXPECT_NEAR(exact.mean(i / spec.num_actions, i % spec.num_actions), q[i], 1e-6) << name;
    }
}

TEST(ExactDistributionTest, BellmanReassemblyIsConsistent) {
    const double tol = 1e-6;
    for (const auto& name : env::builtin_names()) {
        const auto spec = env::make_builtin(name);
        const auto policy = env::Policy::uniform(spec.num_states, spec.num_actions);
        const auto exact = exact_distribution(spec, policy, tol);
        EXPECT_LE(bellman_residual(spec, policy, exact), 2 * tol) << name;
        EXPECT_EQ(dist::wasserstein(exact.distribution(0, 0), exact.distribution(0, 0), 1), 0.0);
    }
}

TEST(ExactDistributionTest, BudgetExceededIsInfeasible) {
    const auto spec = env::make_chain();
    try {
        exact_distribution(spec, env::Policy::uniform(5, 2), 1e-6, 50);
        FAIL();
    } catch (const InfeasibleError& e) {
        EXPECT_NE(std::string(e.what()).find("budget of 50"), std::string::npos);
    }
}

TEST(ProbeSetTest, AllNonAbsorbingPairsOrSeededSubset) {
    const auto chain = env::make_chain();
    const auto probes = probe_set(chain, 256, 1);
    EXPECT_EQ(probes.size(), 8u);
    const auto cliff = env::make_cliff();
    const auto few = probe_set(cliff, 10, 3);
    EXPECT_EQ(few.size(), 10u);
    const auto again = probe_set(cliff, 10, 3);
    for (std::size_t i = 0; i < few.size(); ++i) {
        EXPECT_EQ(few[i].state, again[i].state);
        EXPECT_EQ(few[i].action, again[i].action);
        EXPECT_FALSE(cliff.is_absorbing(few[i].state));
    }
}

TEST(EvaluateFixedTest, IdenticalRepresentationsGiveZeroDistances) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 3);
    const auto sampler = model_sampler(m, spec, Representation::Generator);
    EvalConfig cfg;
    cfg.samples = 64;
    const std::size_t schedule[] = {0, 10, 20};
    std::size_t sunk = 0;
    const auto report = evaluate_fixed(spec, sampler, [&](std::size_t) { return sampler; }, schedule, cfg,
                                       [&](const EvalRecord&) { ++sunk; });
    EXPECT_EQ(report.records.size(), 24u);
    EXPECT_EQ(sunk, 24u);
    for (const auto& r : report.records) {
        EXPECT_EQ(r.w1, 0.0);
        EXPECT_EQ(r.w2, 0.0);
        EXPECT_EQ(r.mean_gap, 0.0);
    }
    EXPECT_EQ(report.w1_curve().size(), 3u);
}

TEST(EvaluateFixedTest, UntrainedOnlineIsFarFromOracle) {
    const auto spec = env::make_chain();
    const auto policy = right_biased(spec, 0.8);
    const auto exact = exact_distribution(spec, policy, 1e-6);
    net::Model m(small_config(spec), 4);
    EvalConfig cfg;
    cfg.samples = 128;
    const auto records = evaluate_probes(0, probe_set(spec, 256, 0), exact_sampler(exact),
                                         model_sampler(m, spec, Representation::Quantile), cfg);
    EXPECT_GT(mean_w1(records), 0.0);
    for (const auto& r : records) {
        EXPECT_GE(r.w1, 0.0);
        EXPECT_GE(r.w2, r.w1 - 1e-12);  // W2 >= W1
        EXPECT_NEAR(r.mean_gap, -exact.mean(r.state, r.action), 1e-12);  // zero-initialised head
    }
    const auto j = records[0].to_json();
    EXPECT_EQ(j["q_tau_hat"].size(), cfg.taus.size());
    EXPECT_TRUE(j.contains("var_hat"));
}

TEST(EvaluateFixedTest, ProbeOutsideEnvironmentIsConfigError) {
    const auto spec = env::make_chain();
    net::Model m(small_config(spec), 5);
    const auto sampler = model_sampler(m, spec, Representation::Generator);
    const Probe bad[] = {{9, 0}};
    EXPECT_THROW(evaluate_probes(0, bad, sampler, sampler, EvalConfig{}), ConfigError);
}

TEST(MonteCarloTest, DeterministicMdpGivesIdenticalSamples) {
    const auto spec = env::make_self_loop(1.0, 0.5);
    Rng rng(1);
    const auto d = monte_carlo_estimate(spec, env::Policy::uniform(1, 1), 0, 100, rng);
    ASSERT_EQ(d.size(), 1u);
    for (double v : d[0].samples()) EXPECT_EQ(v, d[0].samples()[0]);
    EXPECT_NEAR(d[0].samples()[0], 2.0, 1e-6);
}

TEST(MonteCarloTest, CoinMeanShrinksWithCltBound) {
    const auto spec = env::make_coin();
    Rng rng(2);
    const std::size_t M = 40000;
    for (const auto& d : monte_carlo_estimate(spec, env::Policy::uniform(2, 2), 0, M, rng)) {
        EXPECT_LT(std::abs(d.mean()), 3.0 / std::sqrt(static_cast<double>(M)));
    }
}

TEST(MonteCarloTest, ChainMeansWithinThreeStandardErrors) {
    const auto spec = env::make_chain();
    const auto policy = right_biased(spec, 0.8);
    const auto exact = exact_distribution(spec, policy, 1e-8);
    Rng rng(3);
    const std::size_t M = 100000;
    for (std::size_t s = 0; s < 4; ++s) {
        const auto per_action = monte_carlo_estimate(spec, policy, s, M, rng);
        for (std::size_t a = 0; a < 2; ++a) {
            const double se = std::sqrt(per_action[a].variance() / static_cast<double>(M));
            EXPECT_LT(std::abs(per_action[a].mean() - exact.mean(s, a)), 3 * se) << "s=" << s << " a=" << a;
        }
    }
}

TEST(HistogramTest, CountsCoverEverySample) {
    const dist::EmpiricalDistribution d({0.0, 0.1, 0.5, 0.9, 1.0, 1.0});
    const auto bins = histogram(d, 4);
    ASSERT_EQ(bins.size(), 4u);
    EXPECT_EQ(bins.front().left, 0.0);
    EXPECT_EQ(bins.back().right, 1.0);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    EXPECT_EQ(total, 6u);
    EXPECT_EQ(bins[0].count, 2u);
    EXPECT_EQ(bins[3].count, 3u);
    EXPECT_EQ(histogram(dist::EmpiricalDistribution({2.0, 2.0}), 3)[0].count, 2u);
}
