#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ign/rng.hpp"

namespace ign::env {

struct RewardOutcome {
    double value = 0.0;
    double probability = 1.0;
};

// Finite MDP with per-(s, a) reward distributions of finite support.
// Absorbing states self-loop with zero reward.
struct MdpSpec {
    std::string name;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> transitions;                   // P(s'|s,a) at [(s * A + a) * S + s']
    std::vector<std::vector<RewardOutcome>> rewards;   // at [s * A + a]
    std::vector<double> initial;                       // initial-state distribution
    double gamma = 0.9;
    double reward_bound = 1.0;
    std::vector<bool> absorbing;
    std::vector<std::array<double, 2>> coordinates;    // optional, one per state

    double transition(std::size_t s, std::size_t a, std::size_t next) const {
        return transitions[(s * num_actions + a) * num_states + next];
    }
    std::span<const double> transition_row(std::size_t s, std::size_t a) const {
        return {transitions.data() + (s * num_actions + a) * num_states, num_states};
    }
    const std::vector<RewardOutcome>& reward(std::size_t s, std::size_t a) const {
        return rewards[s * num_actions + a];
    }
    double mean_reward(std::size_t s, std::size_t a) const;
    bool is_absorbing(std::size_t s) const { return !absorbing.empty() && absorbing[s]; }

    // Largest possible |return|: R_max / (1 - gamma).
    double return_bound() const { return reward_bound / (1.0 - gamma); }

    // Throws ConfigError listing every violated invariant.
    void validate() const;

    // Network input: one-hot state, followed by (x, y) when coordinates are present.
    std::size_t encoding_dim() const { return num_states + (coordinates.empty() ? 0 : 2); }
    void encode(std::size_t s, std::span<double> out) const;
    std::vector<double> encode(std::size_t s) const;

    // Stable content hash, used in dataset and checkpoint metadata.
    std::uint64_t hash() const;
};

struct Transition {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0;
    std::size_t next_state = 0;
    bool terminal = false;

    bool operator==(const Transition&) const = default;
};

// Samples one transition: reward from the (s, a) reward table, then the next state.
Transition step(const MdpSpec& spec, std::size_t state, std::size_t action, Rng& rng);

// Stateful simulator with optional sticky actions: with probability p the agent's
// previously submitted action is executed instead of the current one. The first
// step after reset always executes the submitted action. With p == 0 no extra
// random numbers are drawn.
class Environment {
public:
    explicit Environment(std::shared_ptr<const MdpSpec> spec, double sticky = 0.0);

    struct StepResult {
        Transition transition;  // action field holds the executed action
        std::size_t submitted = 0;
        bool repeated = false;  // the sticky override fired
    };

    std::size_t reset(Rng& rng);
    std::size_t reset_to(std::size_t state);
    StepResult step(std::size_t action, Rng& rng);

    std::size_t state() const noexcept { return state_; }
    bool done() const;
    const MdpSpec& spec() const noexcept { return *spec_; }
    std::shared_ptr<const MdpSpec> spec_ptr() const noexcept { return spec_; }
    double sticky() const noexcept { return sticky_; }

private:
    std::shared_ptr<const MdpSpec> spec_;
    double sticky_;
    std::size_t state_ = 0;
    std::optional<std::size_t> previous_;
};

// Config error unless 0 <= p < 1.
Environment sticky_wrap(std::shared_ptr<const MdpSpec> spec, double repeat_probability);

}  // namespace ign::env
