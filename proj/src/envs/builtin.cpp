#include "ign/envs/builtin.hpp"

#include "ign/errors.hpp"

namespace ign::env {

namespace {

MdpSpec blank(std::string name, std::size_t states, std::size_t actions, double gamma, double reward_bound) {
    MdpSpec spec;
    spec.name = std::move(name);
    spec.num_states = states;
    spec.num_actions = actions;
    spec.transitions.assign(states * actions * states, 0.0);
    spec.rewards.assign(states * actions, {RewardOutcome{0.0, 1.0}});
    spec.initial.assign(states, 0.0);
    spec.absorbing.assign(states, false);
    spec.gamma = gamma;
    spec.reward_bound = reward_bound;
    return spec;
}

void set_transition(MdpSpec& spec, std::size_t s, std::size_t a, std::size_t next, double p) {
    spec.transitions[(s * spec.num_actions + a) * spec.num_states + next] += p;
}

void make_absorbing(MdpSpec& spec, std::size_t s) {
    spec.absorbing[s] = true;
    for (std::size_t a = 0; a < spec.num_actions; ++a) {
        set_transition(spec, s, a, s, 1.0);
        spec.rewards[s * spec.num_actions + a] = {RewardOutcome{0.0, 1.0}};
    }
}

}  // namespace

MdpSpec make_chain(double gamma) {
    constexpr std::size_t kEnd = 4;
    constexpr std::size_t kLeft = 0, kRight = 1;
    MdpSpec spec = blank("chain", 5, 2, gamma, 1.0);
    for (std::size_t s = 0; s < kEnd; ++s) {
        if (s == 0) {
            set_transition(spec, s, kLeft, kEnd, 1.0);
            spec.rewards[s * 2 + kLeft] = {{0.0, 0.5}, {0.5, 0.5}};
        } else {
            set_transition(spec, s, kLeft, s - 1, 0.8);
            set_transition(spec, s, kLeft, s, 0.2);
        }
        if (s == kEnd - 1) {
            set_transition(spec, s, kRight, kEnd, 1.0);
            spec.rewards[s * 2 + kRight] = {{-1.0, 0.2}, {1.0, 0.8}};
        } else {
            set_transition(spec, s, kRight, s + 1, 0.8);
            set_transition(spec, s, kRight, s, 0.2);
        }
        spec.initial[s] = 0.25;
    }
    make_absorbing(spec, kEnd);
    return spec;
}

MdpSpec make_cliff(double gamma) {
    constexpr std::size_t kRows = 4, kCols = 6;
    constexpr std::size_t kCells = kRows * kCols;
    constexpr std::size_t kEnd = kCells;
    constexpr double kStepCost = -0.05;
    constexpr double kSlip = 0.1;
    MdpSpec spec = blank("cliff", kCells + 1, 4, gamma, 1.0);
    auto cell = [](std::size_t r, std::size_t c) { return r * kCols + c; };
    auto clamp_move = [](std::size_t r, std::size_t c, std::size_t a) {
        // 0 up, 1 right, 2 down, 3 left
        if (a == 0 && r > 0) --r;
        if (a == 1 && c + 1 < kCols) ++c;
        if (a == 2 && r + 1 < kRows) ++r;
        if (a == 3 && c > 0) --c;
        return std::pair{r, c};
    };
    spec.coordinates.assign(kCells + 1, {0.0, 0.0});
    for (std::size_t r = 0; r < kRows; ++r) {
        for (std::size_t c = 0; c < kCols; ++c) {
            const std::size_t s = cell(r, c);
            spec.coordinates[s] = {static_cast<double>(c) / (kCols - 1), static_cast<double>(r) / (kRows - 1)};
            const bool cliff = r == kRows - 1 && c > 0 && c + 1 < kCols;
            const bool goal = r == kRows - 1 && c + 1 == kCols;
            for (std::size_t a = 0; a < 4; ++a) {
                if (cliff || goal) {
                    set_transition(spec, s, a, kEnd, 1.0);
                    spec.rewards[s * 4 + a] = {RewardOutcome{cliff ? -1.0 : 1.0, 1.0}};
                    continue;
                }
                const auto [ir, ic] = clamp_move(r, c, a);
                const auto [sr, sc] = clamp_move(r, c, 2);
                set_transition(spec, s, a, cell(ir, ic), 1.0 - kSlip);
                set_transition(spec, s, a, cell(sr, sc), kSlip);
                spec.rewards[s * 4 + a] = {RewardOutcome{kStepCost, 1.0}};
            }
        }
    }
    spec.coordinates[kEnd] = {-1.0, -1.0};
    spec.initial[cell(kRows - 1, 0)] = 1.0;
    make_absorbing(spec, kEnd);
    return spec;
}

MdpSpec make_coin(double reward_scale, double gamma) {
    if (!(reward_scale > 0.0)) throw ConfigError("coin reward scale must be positive");
    MdpSpec spec = blank(reward_scale == 1.0 ? "coin" : "coin:" + std::to_string(reward_scale), 2, 2, gamma,
                         reward_scale);
    for (std::size_t a = 0; a < 2; ++a) {
        set_transition(spec, 0, a, 1, 1.0);
        spec.rewards[a] = {{-reward_scale, 0.5}, {reward_scale, 0.5}};
    }
    spec.initial[0] = 1.0;
    make_absorbing(spec, 1);
    return spec;
}

MdpSpec make_self_loop(double reward, double gamma) {
    MdpSpec spec = blank("self_loop", 1, 1, gamma, std::max(1.0, std::abs(reward)));
    set_transition(spec, 0, 0, 0, 1.0);
    spec.rewards[0] = {RewardOutcome{reward, 1.0}};
    spec.initial[0] = 1.0;
    return spec;
}

std::vector<std::string> builtin_names() {
    return {"chain", "cliff", "coin"};
}

MdpSpec make_builtin(const std::string& name) {
    if (name == "chain") return make_chain();
    if (name == "cliff") return make_cliff();
    if (name == "coin") return make_coin();
    if (name.rfind("coin:", 0) == 0) {
        try {
            return make_coin(std::stod(name.substr(5)));
        } catch (const std::logic_error&) {
            throw ConfigError("bad coin reward scale in environment name '" + name + "'");
        }
    }
    if (name.rfind("self-loop:", 0) == 0) {
        try {
            return make_self_loop(std::stod(name.substr(10)), 0.9);
        } catch (const std::logic_error&) {
            throw ConfigError("bad reward in environment name '" + name + "'");
        }
    }
    throw ConfigError("unknown environment '" + name +
                      "' (expected chain, cliff, coin, coin:<scale> or self-loop:<reward>)");
}

}  // namespace ign::env
