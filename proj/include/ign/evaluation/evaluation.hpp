#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ign/distributions/distributions.hpp"
#include "ign/envs/mdp.hpp"
#include "ign/envs/policy.hpp"
#include "ign/networks/networks.hpp"
#include "ign/rng.hpp"

namespace ign::eval {

// M draws G(z, s, a) with z ~ U(0, 1).
dist::EmpiricalDistribution pseudo_samples(const net::Generator& generator, const env::MdpSpec& spec, std::size_t s,
                                           std::size_t a, std::size_t m, Rng& rng);

// M draws theta(s, tau, a) with tau ~ U(0, 1): samples from the IQN's implied distribution.
dist::EmpiricalDistribution quantile_samples(const net::QuantileNetwork& network, const env::MdpSpec& spec,
                                             std::size_t s, std::size_t a, std::size_t m, Rng& rng);

// Atoms (return, probability) of Z(s, a), sorted by return.
using Atoms = std::vector<std::pair<double, double>>;

struct ExactReturnDistribution {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    double gamma = 0.0;
    double tolerance = 0.0;
    std::size_t horizon = 0;   // transitions enumerated
    double tail_bound = 0.0;   // gamma^H R_max / (1 - gamma), W1 error bound of the truncation
    std::vector<Atoms> atoms;  // at [s * A + a]

    const Atoms& at(std::size_t s, std::size_t a) const { return atoms[s * num_actions + a]; }
    dist::EmpiricalDistribution distribution(std::size_t s, std::size_t a) const;
    double mean(std::size_t s, std::size_t a) const;
};

inline constexpr std::size_t kEnumerationBudget = 10'000'000;

// Forward enumeration of trajectories from every (s, a), following `policy` after
// the first action, to the horizon H at which gamma^H R_max / (1 - gamma) < tolerance.
// Paths reaching the same state with the same partial return are merged. Absorbing
// states have the single atom 0. InfeasibleError when the number of enumerated
// (state, partial return) nodes exceeds `budget`.
ExactReturnDistribution exact_distribution(const env::MdpSpec& spec, const env::Policy& policy, double tolerance,
                                           std::size_t budget = kEnumerationBudget);

// Law of r + gamma Y(s', a') with r ~ R(s, a), s' ~ P(.|s, a), a' ~ pi(.|s') and Y
// taken from `exact` (zero at absorbing states).
dist::EmpiricalDistribution bellman_reassemble(const env::MdpSpec& spec, const env::Policy& policy,
                                               const ExactReturnDistribution& exact, std::size_t s, std::size_t a);

// Largest W1(bellman_reassemble(s, a), exact(s, a)) over all pairs.
double bellman_residual(const env::MdpSpec& spec, const env::Policy& policy, const ExactReturnDistribution& exact);

struct Probe {
    std::size_t state = 0;
    std::size_t action = 0;
};

// All (s, a) with s non-absorbing when there are at most `max_probes` of them;
// otherwise `max_probes` distinct pairs drawn once from the seed.
std::vector<Probe> probe_set(const env::MdpSpec& spec, std::size_t max_probes, std::uint64_t seed);

// A return-distribution representation that can be queried at (s, a) with M draws.
using ReturnSampler = std::function<dist::EmpiricalDistribution(std::size_t s, std::size_t a, std::size_t m, Rng& rng)>;

enum class Representation { Generator, Quantile };
std::string to_string(Representation r);
Representation parse_representation(const std::string& name);

// Samplers hold references; the model or oracle must outlive them.
ReturnSampler model_sampler(const net::Model& model, const env::MdpSpec& spec, Representation representation);
// Ignores M and returns the exact weighted atoms.
ReturnSampler exact_sampler(const ExactReturnDistribution& exact);

struct EvalConfig {
    std::size_t samples = 2048;  // M per probe
    std::size_t max_probes = 256;
    std::vector<double> taus = {0.1, 0.25, 0.5, 0.75, 0.9};
    std::uint64_t seed = 0;
};

struct EvalRecord {
    std::size_t step = 0;
    std::size_t probe_id = 0;
    std::size_t state = 0;
    std::size_t action = 0;
    double w1 = 0.0;
    double w2 = 0.0;
    double mean_gap = 0.0;  // online mean - fixed mean
    dist::Summary online;   // v_hat, q_tau_hat, var_hat of the online samples

    nlohmann::ordered_json to_json() const;
};

// W1, W2 and mean gap between the fixed and online representations on each probe.
// Both sides draw from the same per-probe stream, so identical representations
// give zero distances.
std::vector<EvalRecord> evaluate_probes(std::size_t step, std::span<const Probe> probes, const ReturnSampler& fixed,
                                        const ReturnSampler& online, const EvalConfig& cfg);

double mean_w1(std::span<const EvalRecord> records);

struct EvalReport {
    std::vector<EvalRecord> records;

    // Mean W1 over probes, one entry per evaluated step in order.
    std::vector<std::pair<std::size_t, double>> w1_curve() const;
};

// Evaluates at every scheduled step: `advance_to(step)` moves the online
// representation forward and returns its sampler. Records are also passed to
// `sink` as they are produced.
EvalReport evaluate_fixed(const env::MdpSpec& spec, const ReturnSampler& fixed,
                          const std::function<ReturnSampler(std::size_t step)>& advance_to,
                          std::span<const std::size_t> schedule, const EvalConfig& cfg,
                          const std::function<void(const EvalRecord&)>& sink = {});

// For each action: M rollouts from `state` forcing that first action and then
// following `policy`, stopped at absorption or at the horizon where the tail
// gamma^H R_max / (1 - gamma) drops below `tolerance`. Action a draws from
// rng.split("mc", a).
std::vector<dist::EmpiricalDistribution> monte_carlo_estimate(const env::MdpSpec& spec, const env::Policy& policy,
                                                              std::size_t state, std::size_t m, Rng& rng,
                                                              double tolerance = 1e-6);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

// Equal-width bins over [min, max] of the samples; the last bin is closed.
std::vector<HistogramBin> histogram(const dist::EmpiricalDistribution& samples, std::size_t bins);

// Smallest H with gamma^H R_max / (1 - gamma) < tolerance.
std::size_t truncation_horizon(const env::MdpSpec& spec, double tolerance);

}  // namespace ign::eval
