#include "ign/config_fields.hpp"
#include "ign/errors.hpp"
#include "ign/trainer/trainer.hpp"

namespace ign::train {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Ign: return "ign";
        case Algorithm::Iqn: return "iqn";
        case Algorithm::Dqn: return "dqn";
    }
    return "ign";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "ign") return Algorithm::Ign;
    if (name == "iqn") return Algorithm::Iqn;
    if (name == "dqn") return Algorithm::Dqn;
    throw ConfigError("unknown algorithm '" + name + "' (expected ign, iqn or dqn)");
}

std::string to_string(Mode m) {
    return m == Mode::Control ? "control" : "evaluation";
}

Mode parse_mode(const std::string& name) {
    if (name == "control") return Mode::Control;
    if (name == "evaluation") return Mode::Evaluation;
    throw ConfigError("unknown mode '" + name + "' (expected control or evaluation)");
}

void GanConfig::collect_problems(std::vector<std::string>& problems) const {
    if (!(lambda >= 0.0)) problems.push_back("gan.lambda must be >= 0");
    if (n_critic < 1) problems.push_back("gan.n_critic must be >= 1");
    if (batch_size < 1) problems.push_back("gan.batch_size must be >= 1");
    if (!(learning_rate > 0.0)) problems.push_back("gan.learning_rate must be positive");
    if (generator_learning_rate && !(*generator_learning_rate > 0.0))
        problems.push_back("gan.generator_learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) problems.push_back("gan.beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) problems.push_back("gan.beta2 must lie in [0, 1)");
    if (noise != "uniform") problems.push_back("gan.noise '" + noise + "' is not supported (only uniform)");
}

void GanConfig::validate() const {
    std::vector<std::string> problems;
    collect_problems(problems);
    throw_if_problems(problems, "GAN config");
}

nlohmann::json GanConfig::to_json() const {
    nlohmann::json j = {{"lambda", lambda},
                        {"n_critic", n_critic},
                        {"batch_size", batch_size},
                        {"learning_rate", learning_rate},
                        {"beta1", beta1},
                        {"beta2", beta2},
                        {"noise", noise},
                        {"bootstrap_gradient", bootstrap_gradient},
                        {"quantile_in_critic", quantile_in_critic},
                        {"clip_norm", clip_norm}};
    if (generator_learning_rate) j["generator_learning_rate"] = *generator_learning_rate;
    return j;
}

GanConfig GanConfig::from_json(const nlohmann::json& j, std::vector<std::string>& problems) {
    GanConfig c;
    FieldReader r(j, "gan", problems);
    r.read("lambda", c.lambda);
    r.read("n_critic", c.n_critic);
    r.read("batch_size", c.batch_size);
    r.read("learning_rate", c.learning_rate);
    r.read("generator_learning_rate", c.generator_learning_rate);
    r.read("beta1", c.beta1);
    r.read("beta2", c.beta2);
    r.read("noise", c.noise);
    r.read("bootstrap_gradient", c.bootstrap_gradient);
    r.read("quantile_in_critic", c.quantile_in_critic);
    r.read("clip_norm", c.clip_norm);
    r.finish();
    return c;
}

void TrainConfig::collect_problems(std::vector<std::string>& problems) const {
    if (update_period < 1) problems.push_back("train.update_period must be >= 1");
    if (target_sync < 1) problems.push_back("train.target_sync must be >= 1");
    if (metric_period < 1) problems.push_back("train.metric_period must be >= 1");
    if (epsilon_decay_steps < 1) problems.push_back("train.epsilon_decay_steps must be >= 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) problems.push_back("train.epsilon_start must lie in [0, 1]");
    if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) problems.push_back("train.epsilon_end must lie in [0, 1]");
    if (num_tau < 1) problems.push_back("train.num_tau must be >= 1");
    if (num_tau_target < 1) problems.push_back("train.num_tau_target must be >= 1");
    if (num_tau_act < 1) problems.push_back("train.num_tau_act must be >= 1");
    if (!(delta > 0.0)) problems.push_back("train.delta must be positive");
    if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) problems.push_back("train.gamma must lie strictly inside (0, 1)");
    if (batch_size < 1) problems.push_back("train.batch_size must be >= 1");
    if (!(learning_rate > 0.0)) problems.push_back("train.learning_rate must be positive");
    if (buffer_capacity < 1) problems.push_back("train.buffer_capacity must be >= 1");
    if (max_episode_steps < 1) problems.push_back("train.max_episode_steps must be >= 1");
    if (!(sticky >= 0.0 && sticky < 1.0)) problems.push_back("train.sticky must lie in [0, 1)");
}

void TrainConfig::validate() const {
    std::vector<std::string> problems;
    collect_problems(problems);
    throw_if_problems(problems, "training config");
}

nlohmann::json TrainConfig::to_json() const {
    return {{"algorithm", to_string(algorithm)},
            {"mode", to_string(mode)},
            {"seed", seed},
            {"total_steps", total_steps},
            {"learning_starts", learning_starts},
            {"update_period", update_period},
            {"target_sync", target_sync},
            {"epsilon_start", epsilon_start},
            {"epsilon_end", epsilon_end},
            {"epsilon_decay_steps", epsilon_decay_steps},
            {"num_tau", num_tau},
            {"num_tau_target", num_tau_target},
            {"num_tau_act", num_tau_act},
            {"delta", delta},
            {"gamma", gamma ? nlohmann::json(*gamma) : nlohmann::json(nullptr)},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"buffer_capacity", buffer_capacity},
            {"max_episode_steps", max_episode_steps},
            {"sticky", sticky},
            {"metric_period", metric_period},
            {"record_wallclock", record_wallclock},
            {"distortion", distortion.to_string()},
            {"freeze", freeze},
            {"clip_norm", clip_norm}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, std::vector<std::string>& problems) {
    TrainConfig c;
    FieldReader r(j, "train", problems);
    r.read_parsed("algorithm", c.algorithm, parse_algorithm);
    r.read_parsed("mode", c.mode, parse_mode);
    r.read("seed", c.seed);
    r.read("total_steps", c.total_steps);
    r.read("learning_starts", c.learning_starts);
    r.read("update_period", c.update_period);
    r.read("target_sync", c.target_sync);
    r.read("epsilon_start", c.epsilon_start);
    r.read("epsilon_end", c.epsilon_end);
    r.read("epsilon_decay_steps", c.epsilon_decay_steps);
    r.read("num_tau", c.num_tau);
    r.read("num_tau_target", c.num_tau_target);
    r.read("num_tau_act", c.num_tau_act);
    r.read("delta", c.delta);
    r.read("gamma", c.gamma);
    r.read("batch_size", c.batch_size);
    r.read("learning_rate", c.learning_rate);
    r.read("buffer_capacity", c.buffer_capacity);
    r.read("max_episode_steps", c.max_episode_steps);
    r.read("sticky", c.sticky);
    r.read("metric_period", c.metric_period);
    r.read("record_wallclock", c.record_wallclock);
    r.read_parsed("distortion", c.distortion, dist::Distortion::parse);
    r.read("freeze", c.freeze);
    r.read("clip_norm", c.clip_norm);
    r.finish();
    return c;
}

}  // namespace ign::train
