#include "ign/envs/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ign/errors.hpp"

namespace ign::env {

namespace {

constexpr int kDatasetFormatVersion = 1;

std::string hex(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

}  // namespace

double discounted_return(const Trajectory& trajectory, double gamma) {
    double total = 0.0;
    double discount = 1.0;
    for (const auto& t : trajectory) {
        total += discount * t.reward;
        discount *= gamma;
    }
    return total;
}

Trajectory rollout(const MdpSpec& spec, const Policy& policy, std::size_t horizon, Rng& rng,
                   const RolloutStart& start) {
    if (horizon == 0) throw ConfigError("rollout horizon must be at least 1");
    Trajectory out;
    out.reserve(horizon);
    std::size_t state = start.state ? *start.state : rng.categorical(spec.initial);
    for (std::size_t t = 0; t < horizon; ++t) {
        if (spec.is_absorbing(state)) {
            out.push_back(Transition{state, 0, 0.0, state, true});
            continue;
        }
        const std::size_t action = (t == 0 && start.first_action) ? *start.first_action : policy.sample(state, rng);
        out.push_back(step(spec, state, action, rng));
        state = out.back().next_state;
    }
    return out;
}

OfflineDataset generate_offline(const MdpSpec& spec, const Policy& behavior, std::size_t num_trajectories,
                                std::size_t horizon, std::uint64_t seed) {
    if (num_trajectories == 0 || horizon == 0) throw ConfigError("offline dataset needs N >= 1 and T >= 1");
    OfflineDataset data;
    data.policy_id = behavior.id();
    data.seed = seed;
    data.num_trajectories = num_trajectories;
    data.horizon = horizon;
    data.spec_hash = spec.hash();
    data.trajectories.reserve(num_trajectories);
    for (std::size_t i = 0; i < num_trajectories; ++i) {
        Rng rng = Rng::stream(seed, "offline", i);
        data.trajectories.push_back(rollout(spec, behavior, horizon, rng));
    }
    return data;
}

std::filesystem::path dataset_sidecar(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".meta.json");
}

void write_dataset(const OfflineDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset to " + path.string());
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
        const auto& traj = dataset.trajectories[i];
        for (std::size_t t = 0; t < traj.size(); ++t) {
            const auto& tr = traj[t];
            nlohmann::json rec = {{"traj_id", i}, {"t", t},       {"s", tr.state},
                                  {"a", tr.action}, {"r", tr.reward}, {"s_next", tr.next_state},
                                  {"terminal", tr.terminal}};
            out << rec.dump() << '\n';
        }
    }
    std::ofstream meta(dataset_sidecar(path));
    nlohmann::json m = {{"format_version", kDatasetFormatVersion},
                        {"spec_hash", hex(dataset.spec_hash)},
                        {"policy_id", dataset.policy_id},
                        {"seed", dataset.seed},
                        {"N", dataset.num_trajectories},
                        {"T", dataset.horizon}};
    meta << m.dump() << '\n';
}

OfflineDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream meta_in(dataset_sidecar(path));
    if (!meta_in) throw ConfigError("missing dataset metadata " + dataset_sidecar(path).string());
    const auto meta = nlohmann::json::parse(meta_in);
    if (meta.at("format_version").get<int>() != kDatasetFormatVersion) {
        throw IncompatibleArtifactError("unsupported dataset format version in " + path.string());
    }
    OfflineDataset data;
    data.policy_id = meta.at("policy_id").get<std::string>();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.num_trajectories = meta.at("N").get<std::size_t>();
    data.horizon = meta.at("T").get<std::size_t>();
    data.spec_hash = std::stoull(meta.at("spec_hash").get<std::string>(), nullptr, 16);
    data.trajectories.assign(data.num_trajectories, {});

    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dataset " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = nlohmann::json::parse(line);
        const auto id = rec.at("traj_id").get<std::size_t>();
        if (id >= data.num_trajectories) throw IncompatibleArtifactError("trajectory id out of range in " + path.string());
        data.trajectories[id].push_back(Transition{rec.at("s").get<std::size_t>(), rec.at("a").get<std::size_t>(),
                                                   rec.at("r").get<double>(), rec.at("s_next").get<std::size_t>(),
                                                   rec.at("terminal").get<bool>()});
    }
    for (const auto& traj : data.trajectories) {
        if (traj.size() != data.horizon) throw IncompatibleArtifactError("trajectory length differs from T in " + path.string());
    }
    return data;
}

}  // namespace ign::env
