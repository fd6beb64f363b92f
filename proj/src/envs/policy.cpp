#include "ign/envs/policy.hpp"

#include <algorithm>
#include <cmath>

#include "ign/errors.hpp"

namespace ign::env {

Policy::Policy(std::size_t num_states, std::size_t num_actions, std::vector<double> probabilities, std::string id)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probabilities)), id_(std::move(id)) {
    if (probs_.size() != num_states_ * num_actions_) {
        throw ConfigError("policy '" + id_ + "' has " + std::to_string(probs_.size()) + " entries, expected " +
                          std::to_string(num_states_ * num_actions_));
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
        double total = 0.0;
        for (double p : row(s)) {
            if (p < 0.0) throw ConfigError("policy '" + id_ + "' has a negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw ConfigError("policy '" + id_ + "' row " + std::to_string(s) + " sums to " + std::to_string(total));
        }
    }
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions) {
    return Policy(num_states, num_actions,
                  std::vector<double>(num_states * num_actions, 1.0 / static_cast<double>(num_actions)), "uniform");
}

Policy Policy::deterministic(std::span<const std::size_t> actions, std::size_t num_actions, std::string id) {
    std::vector<double> probs(actions.size() * num_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] >= num_actions) throw IndexError("policy action " + std::to_string(actions[s]) + " out of range");
        probs[s * num_actions + actions[s]] = 1.0;
    }
    return Policy(actions.size(), num_actions, std::move(probs), std::move(id));
}

Policy Policy::constant(std::size_t num_states, std::size_t num_actions, std::size_t action) {
    std::vector<std::size_t> actions(num_states, action);
    return deterministic(actions, num_actions, "constant:" + std::to_string(action));
}

std::vector<double> optimal_action_values(const MdpSpec& spec, double tolerance) {
    const std::size_t S = spec.num_states, A = spec.num_actions;
    std::vector<double> q(S * A, 0.0);
    std::vector<double> v(S, 0.0);
    for (int iter = 0; iter < 100000; ++iter) {
        double change = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                double value = spec.mean_reward(s, a);
                const auto row = spec.transition_row(s, a);
                for (std::size_t n = 0; n < S; ++n) value += spec.gamma * row[n] * v[n];
                change = std::max(change, std::abs(value - q[s * A + a]));
                q[s * A + a] = value;
            }
        }
        for (std::size_t s = 0; s < S; ++s) {
            v[s] = *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(s * A),
                                     q.begin() + static_cast<std::ptrdiff_t>((s + 1) * A));
        }
        if (change < tolerance) break;
    }
    return q;
}

Policy optimal_policy(const MdpSpec& spec) {
    const auto q = optimal_action_values(spec);
    const std::size_t A = spec.num_actions;
    std::vector<std::size_t> actions(spec.num_states);
    for (std::size_t s = 0; s < spec.num_states; ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < A; ++a) {
            if (q[s * A + a] > q[s * A + best] + 1e-12) best = a;
        }
        actions[s] = best;
    }
    return Policy::deterministic(actions, A, "optimal");
}

}  // namespace ign::env
