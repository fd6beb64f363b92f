#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ign/envs/mdp.hpp"
#include "ign/rng.hpp"

namespace ign::env {

// Stationary policy: one probability vector over actions per state.
class Policy {
public:
    Policy(std::size_t num_states, std::size_t num_actions, std::vector<double> probabilities, std::string id);

    static Policy uniform(std::size_t num_states, std::size_t num_actions);
    static Policy deterministic(std::span<const std::size_t> actions, std::size_t num_actions, std::string id);
    static Policy constant(std::size_t num_states, std::size_t num_actions, std::size_t action);

    std::span<const double> row(std::size_t s) const { return {probs_.data() + s * num_actions_, num_actions_}; }
    double probability(std::size_t s, std::size_t a) const { return probs_[s * num_actions_ + a]; }
    std::size_t sample(std::size_t s, Rng& rng) const { return rng.categorical(row(s)); }

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    const std::string& id() const noexcept { return id_; }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> probs_;
    std::string id_;
};

// Optimal action values by value iteration, stored at [s * A + a].
std::vector<double> optimal_action_values(const MdpSpec& spec, double tolerance = 1e-12);

// Greedy policy with respect to optimal_action_values; ties go to the lowest action.
Policy optimal_policy(const MdpSpec& spec);

}  // namespace ign::env
