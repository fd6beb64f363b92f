#include "ign/envs/mdp.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "ign/errors.hpp"

namespace ign::env {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_index(std::size_t value, std::size_t bound, const char* what) {
    if (value >= bound) {
        throw IndexError(std::string(what) + " index " + std::to_string(value) + " out of range [0, " +
                         std::to_string(bound) + ")");
    }
}

}  // namespace

double MdpSpec::mean_reward(std::size_t s, std::size_t a) const {
    double m = 0.0;
    for (const auto& o : reward(s, a)) m += o.value * o.probability;
    return m;
}

void MdpSpec::validate() const {
    std::vector<std::string> problems;
    const std::size_t S = num_states, A = num_actions;
    if (S == 0) problems.push_back("num_states must be positive");
    if (A == 0) problems.push_back("num_actions must be positive");
    if (transitions.size() != S * A * S) problems.push_back("transition table has wrong size");
    if (rewards.size() != S * A) problems.push_back("reward table has wrong size");
    if (initial.size() != S) problems.push_back("initial distribution has wrong size");
    if (!absorbing.empty() && absorbing.size() != S) problems.push_back("absorbing flags have wrong size");
    if (!coordinates.empty() && coordinates.size() != S) problems.push_back("coordinates have wrong size");
    const bool tables_ok = problems.empty();
    if (!(gamma > 0.0 && gamma < 1.0)) problems.push_back("gamma must lie strictly inside (0, 1)");
    if (!(reward_bound > 0.0)) problems.push_back("reward bound must be positive");

    if (tables_ok) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const std::string at = "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
                double total = 0.0;
                for (double p : transition_row(s, a)) {
                    if (p < 0.0) problems.push_back("negative transition probability at " + at);
                    total += p;
                }
                if (std::abs(total - 1.0) > kSumTolerance) problems.push_back("transition row does not sum to 1 at " + at);

                double mass = 0.0;
                for (const auto& o : reward(s, a)) {
                    if (o.probability < 0.0) problems.push_back("negative reward probability at " + at);
                    if (std::abs(o.value) > reward_bound) {
                        problems.push_back("reward " + std::to_string(o.value) + " exceeds R_max at " + at);
                    }
                    mass += o.probability;
                }
                if (reward(s, a).empty() || std::abs(mass - 1.0) > kSumTolerance) {
                    problems.push_back("reward distribution does not sum to 1 at " + at);
                }
                if (is_absorbing(s)) {
                    if (transition(s, a, s) != 1.0) problems.push_back("absorbing state must self-loop at " + at);
                    for (const auto& o : reward(s, a)) {
                        if (o.value != 0.0 && o.probability > 0.0) {
                            problems.push_back("absorbing state must pay zero reward at " + at);
                        }
                    }
                }
            }
        }
        double init = 0.0;
        for (double p : initial) init += p;
        if (std::abs(init - 1.0) > kSumTolerance) problems.push_back("initial distribution does not sum to 1");
    }

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid MDP '" << name << "':";
        for (const auto& p : problems) msg << "\n  - " << p;
        throw ConfigError(msg.str());
    }
}

void MdpSpec::encode(std::size_t s, std::span<double> out) const {
    check_index(s, num_states, "state");
    std::fill(out.begin(), out.end(), 0.0);
    out[s] = 1.0;
    if (!coordinates.empty()) {
        out[num_states] = coordinates[s][0];
        out[num_states + 1] = coordinates[s][1];
    }
}

std::vector<double> MdpSpec::encode(std::size_t s) const {
    std::vector<double> out(encoding_dim());
    encode(s, out);
    return out;
}

std::uint64_t MdpSpec::hash() const {
    std::uint64_t h = detail::fnv1a(name);
    auto mix = [&h](std::uint64_t v) { h = detail::splitmix64(h ^ v); };
    auto mix_double = [&mix](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        mix(bits);
    };
    mix(num_states);
    mix(num_actions);
    for (double p : transitions) mix_double(p);
    for (const auto& row : rewards) {
        mix(row.size());
        for (const auto& o : row) {
            mix_double(o.value);
            mix_double(o.probability);
        }
    }
    for (double p : initial) mix_double(p);
    mix_double(gamma);
    mix_double(reward_bound);
    for (bool b : absorbing) mix(b ? 1 : 0);
    for (const auto& c : coordinates) {
        mix_double(c[0]);
        mix_double(c[1]);
    }
    return h;
}

Transition step(const MdpSpec& spec, std::size_t state, std::size_t action, Rng& rng) {
    check_index(state, spec.num_states, "state");
    check_index(action, spec.num_actions, "action");
    Transition t;
    t.state = state;
    t.action = action;
    const auto& outcomes = spec.reward(state, action);
    if (outcomes.size() == 1) {
        t.reward = outcomes.front().value;
    } else {
        std::vector<double> probs;
        probs.reserve(outcomes.size());
        for (const auto& o : outcomes) probs.push_back(o.probability);
        t.reward = outcomes[rng.categorical(probs)].value;
    }
    t.next_state = rng.categorical(spec.transition_row(state, action));
    t.terminal = spec.is_absorbing(t.next_state);
    return t;
}

Environment::Environment(std::shared_ptr<const MdpSpec> spec, double sticky)
    : spec_(std::move(spec)), sticky_(sticky) {
    if (!(sticky_ >= 0.0 && sticky_ < 1.0)) {
        throw ConfigError("sticky repeat probability must lie in [0, 1), got " + std::to_string(sticky_));
    }
}

std::size_t Environment::reset(Rng& rng) {
    state_ = rng.categorical(spec_->initial);
    previous_.reset();
    return state_;
}

std::size_t Environment::reset_to(std::size_t state) {
    check_index(state, spec_->num_states, "state");
    state_ = state;
    previous_.reset();
    return state_;
}

Environment::StepResult Environment::step(std::size_t action, Rng& rng) {
    check_index(action, spec_->num_actions, "action");
    StepResult result;
    result.submitted = action;
    std::size_t executed = action;
    if (sticky_ > 0.0 && previous_.has_value()) {
        if (rng.bernoulli(sticky_)) {
            executed = *previous_;
            result.repeated = true;
        }
    }
    previous_ = action;
    result.transition = env::step(*spec_, state_, executed, rng);
    state_ = result.transition.next_state;
    return result;
}

bool Environment::done() const {
    return spec_->is_absorbing(state_);
}

Environment sticky_wrap(std::shared_ptr<const MdpSpec> spec, double repeat_probability) {
    return Environment(std::move(spec), repeat_probability);
}

}  // namespace ign::env
