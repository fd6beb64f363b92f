#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ign/envs/mdp.hpp"

namespace ign::env {

// Five-state stochastic chain. States 0..3 are transient, 4 is absorbing.
// Moves succeed with probability 0.8 and otherwise stay put. Stepping left
// out of state 0 ends the episode with a Bernoulli reward in {0, 0.5}; stepping
// right out of state 3 ends it with +1 (p = 0.8) or -1.
MdpSpec make_chain(double gamma = 0.9);

// 4x6 cliff walk: start bottom-left, goal bottom-right, cliff between them.
// Each move costs 0.05 and slips downward with probability 0.1. Cliff and goal
// cells lead to an absorbing end state paying -1 and +1 respectively.
MdpSpec make_cliff(double gamma = 0.9);

// Two-state coin: from state 0 any action pays +-scale with equal probability
// and lands in the absorbing state 1.
MdpSpec make_coin(double reward_scale = 1.0, double gamma = 0.9);

// Single-state, single-action self-loop with a deterministic reward.
MdpSpec make_self_loop(double reward, double gamma);

std::vector<std::string> builtin_names();

// "chain", "cliff", "coin" (optionally "coin:<scale>"), "self-loop:<reward>" (gamma 0.9).
MdpSpec make_builtin(const std::string& name);

}  // namespace ign::env
