#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ign/envs/mdp.hpp"
#include "ign/envs/policy.hpp"

namespace ign::env {

using Trajectory = std::vector<Transition>;

// Sum of gamma^t * r_t over the trajectory.
double discounted_return(const Trajectory& trajectory, double gamma);

struct RolloutStart {
    std::optional<std::size_t> state;         // default: sample the initial distribution
    std::optional<std::size_t> first_action;  // default: sample the policy
};

// Exactly `horizon` transitions. Once an absorbing state is reached the rest is
// padded with zero-reward terminal self-loops without drawing random numbers.
Trajectory rollout(const MdpSpec& spec, const Policy& policy, std::size_t horizon, Rng& rng,
                   const RolloutStart& start = {});

struct OfflineDataset {
    std::vector<Trajectory> trajectories;
    std::string policy_id;
    std::uint64_t seed = 0;
    std::size_t num_trajectories = 0;
    std::size_t horizon = 0;
    std::uint64_t spec_hash = 0;

    bool operator==(const OfflineDataset&) const = default;
};

// Trajectory i draws from the stream (seed, "offline", i), so datasets are
// reproducible and independent of generation order.
OfflineDataset generate_offline(const MdpSpec& spec, const Policy& behavior, std::size_t num_trajectories,
                                std::size_t horizon, std::uint64_t seed);

// Line-delimited records {traj_id, t, s, a, r, s_next, terminal}, plus a sidecar
// metadata file at `<path>.meta.json`.
void write_dataset(const OfflineDataset& dataset, const std::filesystem::path& path);
OfflineDataset read_dataset(const std::filesystem::path& path);

std::filesystem::path dataset_sidecar(const std::filesystem::path& path);

}  // namespace ign::env
