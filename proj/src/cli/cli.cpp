#include "ign/cli/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "ign/config_fields.hpp"
#include "ign/envs/builtin.hpp"
#include "ign/envs/dataset.hpp"
#include "ign/errors.hpp"
#include "ign/rng.hpp"

namespace ign::cli {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const InfeasibleError*>(&e)) return kExitNumerical;
    if (dynamic_cast<const IncompatibleArtifactError*>(&e)) return kExitIncompatible;
    return kExitFailure;
}

namespace {

std::string hex_digest(const std::string& text) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << detail::fnv1a(text);
    return out.str();
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw ConfigError("bad number '" + text + "' in " + what);
}

// Line-delimited JSON writer that starts with a header record.
class JsonlWriter {
public:
    JsonlWriter(const std::filesystem::path& path, const nlohmann::ordered_json& header) : path_(path), out_(path) {
        if (!out_) throw ConfigError("cannot write " + path.string());
        write(header);
    }

    template <class J>
    void write(const J& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw ConfigError("write failed for " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

void check_model_matches(const net::Model& model, const env::MdpSpec& spec, const std::string& source) {
    if (model.config.state_dim != spec.encoding_dim() || model.config.num_actions != spec.num_actions) {
        throw IncompatibleArtifactError(source + " has state_dim " + std::to_string(model.config.state_dim) + " and " +
                                        std::to_string(model.config.num_actions) + " actions; environment '" +
                                        spec.name + "' needs " + std::to_string(spec.encoding_dim()) + " and " +
                                        std::to_string(spec.num_actions));
    }
}

eval::EvalConfig eval_config(const RunConfig& config) {
    eval::EvalConfig ec;
    ec.samples = config.eval.samples;
    ec.max_probes = config.eval.max_probes;
    ec.taus = config.eval.taus;
    ec.seed = config.seed;
    return ec;
}

nlohmann::json checkpoint_metadata(const RunConfig& config, const std::string& hash, std::size_t step) {
    return {{"format_version", kFormatVersion},
            {"config_hash", hash},
            {"step", step},
            {"env", config.env},
            {"algorithm", train::to_string(config.train.algorithm)}};
}

net::Model initial_model(const RunConfig& config) {
    if (config.warm_start.checkpoint) {
        return train::warm_start(*config.warm_start.checkpoint, config.model, config.warm_start.freeze,
                                 config.warm_start.reinitialize, config.seed);
    }
    return net::Model(config.model, config.seed);
}

std::optional<env::Policy> fixed_policy(const RunConfig& config, const env::MdpSpec& spec) {
    if (!config.policy) return std::nullopt;
    return make_policy(spec, *config.policy);
}

void write_resolved(const RunConfig& config, const std::filesystem::path& dir) {
    nlohmann::ordered_json doc;
    doc["header"] = header_record("config", config.hash());
    const nlohmann::ordered_json resolved = config.to_json();
    for (const auto& [k, v] : resolved.items()) doc[k] = v;
    std::ofstream out(dir / "config.resolved.json");
    out << doc.dump(2) << '\n';
    if (!out) throw ConfigError("cannot write " + (dir / "config.resolved.json").string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

nlohmann::ordered_json EvalSection::to_json() const {
    nlohmann::ordered_json j;
    j["schedule"] = schedule;
    j["representation"] = eval::to_string(representation);
    j["samples"] = samples;
    j["max_probes"] = max_probes;
    j["taus"] = taus;
    j["oracle_tolerance"] = oracle_tolerance;
    j["w1_in_metrics"] = w1_in_metrics;
    return j;
}

nlohmann::ordered_json WarmStartSection::to_json() const {
    nlohmann::ordered_json j;
    j["checkpoint"] = checkpoint ? nlohmann::ordered_json(*checkpoint) : nlohmann::ordered_json(nullptr);
    j["freeze"] = freeze;
    j["reinitialize"] = reinitialize;
    return j;
}

nlohmann::ordered_json RunConfig::to_json() const {
    auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
    nlohmann::ordered_json j;
    j["env"] = env;
    j["env_gamma"] = opt(env_gamma);
    j["seed"] = seed;
    j["policy"] = opt(policy);
    j["model"] = model.to_json();
    nlohmann::json t = train.to_json();
    t.erase("seed");
    j["train"] = t;
    if (train.algorithm == train::Algorithm::Ign) j["gan"] = gan.to_json();
    j["eval"] = eval.to_json();
    j["warm_start"] = warm_start.to_json();
    j["offline_dataset"] = opt(offline_dataset);
    j["checkpoint_period"] = checkpoint_period;
    j["output_dir"] = output_dir;
    return j;
}

std::string RunConfig::hash() const {
    auto j = to_json();
    j.erase("output_dir");
    return hex_digest(j.dump());
}

RunConfig load_run_config(const nlohmann::json& document) {
    if (!document.is_object()) throw ConfigError("run config must be a JSON object");
    std::vector<std::string> problems;
    RunConfig c;
    FieldReader top(document, "config", problems);

    std::optional<std::uint64_t> seed;
    top.read("seed", seed);
    if (!seed && !(document.contains("seed") && !document.at("seed").is_null())) {
        problems.push_back("config.seed: required field is missing");
    }
    c.seed = seed.value_or(0);
    top.read("env", c.env);
    top.read("env_gamma", c.env_gamma);
    top.read("policy", c.policy);
    top.read("offline_dataset", c.offline_dataset);
    top.read("checkpoint_period", c.checkpoint_period);
    top.read("output_dir", c.output_dir);
    top.take("header");

    std::optional<env::MdpSpec> spec;
    try {
        spec = make_environment(c.env, c.env_gamma);
    } catch (const Error& e) {
        problems.push_back(std::string("config.env: ") + e.what());
    }

    // Model: environment-derived dimensions plus overrides.
    c.model = spec ? net::model_config_for(*spec) : net::ModelConfig{};
    {
        const nlohmann::json section = top.take("model");
        FieldReader r(section, "model", problems);
        std::optional<std::size_t> state_dim, num_actions;
        r.read("state_dim", state_dim);
        r.read("num_actions", num_actions);
        if (spec && state_dim && *state_dim != c.model.state_dim) {
            problems.push_back("model.state_dim: " + std::to_string(*state_dim) + " does not match environment (" +
                               std::to_string(c.model.state_dim) + ")");
        }
        if (spec && num_actions && *num_actions != c.model.num_actions) {
            problems.push_back("model.num_actions: " + std::to_string(*num_actions) + " does not match environment (" +
                               std::to_string(c.model.num_actions) + ")");
        }
        r.read("embedding_dim", c.model.embedding_dim);
        r.read("cosine_basis", c.model.cosine_basis);
        r.read("quantile_hidden", c.model.quantile_hidden);
        r.read("gan_hidden", c.model.gan_hidden);
        r.read("gan_layers", c.model.gan_layers);
        r.read_parsed("generator_activation", c.model.generator_activation, net::parse_activation);
        r.read_parsed("critic_activation", c.model.critic_activation, net::parse_activation);
        r.read("zero_init_generator_output", c.model.zero_init_generator_output);
        r.finish();
        if (spec) {
            try {
                c.model.validate();
            } catch (const ConfigError& e) {
                problems.push_back(e.what());
            }
        }
    }

    const nlohmann::json train_section = top.take("train");
    if (train_section.is_object() && train_section.contains("seed")) {
        problems.push_back("train.seed: set the top-level seed instead");
    }
    nlohmann::json train_json = train_section;
    if (train_json.is_object()) train_json.erase("seed");
    c.train = train::TrainConfig::from_json(train_json, problems);
    c.train.seed = c.seed;
    c.train.collect_problems(problems);

    const nlohmann::json gan_section = top.take("gan");
    if (c.train.algorithm != train::Algorithm::Ign && !gan_section.is_null()) {
        problems.push_back("gan: only used by algorithm ign (train.algorithm is " +
                           train::to_string(c.train.algorithm) + ")");
    }
    c.gan = train::GanConfig::from_json(gan_section, problems);
    c.gan.collect_problems(problems);

    {
        const nlohmann::json section = top.take("eval");
        FieldReader r(section, "eval", problems);
        r.read("schedule", c.eval.schedule);
        r.read_parsed("representation", c.eval.representation, eval::parse_representation);
        r.read("samples", c.eval.samples);
        r.read("max_probes", c.eval.max_probes);
        r.read("taus", c.eval.taus);
        r.read("oracle_tolerance", c.eval.oracle_tolerance);
        r.read("w1_in_metrics", c.eval.w1_in_metrics);
        r.finish();
        if (c.eval.samples < 1) problems.push_back("eval.samples must be >= 1");
        if (c.eval.max_probes < 1) problems.push_back("eval.max_probes must be >= 1");
        if (!(c.eval.oracle_tolerance > 0.0)) problems.push_back("eval.oracle_tolerance must be positive");
        for (double t : c.eval.taus)
            if (!(t >= 0.0 && t <= 1.0)) problems.push_back("eval.taus: " + std::to_string(t) + " outside [0, 1]");
        if (!std::is_sorted(c.eval.schedule.begin(), c.eval.schedule.end())) {
            problems.push_back("eval.schedule must be nondecreasing");
        }
    }
    {
        const nlohmann::json section = top.take("warm_start");
        FieldReader r(section, "warm_start", problems);
        r.read("checkpoint", c.warm_start.checkpoint);
        r.read("freeze", c.warm_start.freeze);
        r.read("reinitialize", c.warm_start.reinitialize);
        r.finish();
        if (!c.warm_start.checkpoint && (!c.warm_start.freeze.empty() || !c.warm_start.reinitialize.empty())) {
            problems.push_back("warm_start: freeze/reinitialize need warm_start.checkpoint");
        }
    }
    top.finish();

    if (c.train.mode == train::Mode::Evaluation && !c.policy) {
        problems.push_back("config.policy: required when train.mode is evaluation");
    }
    if (c.eval.w1_in_metrics && !c.policy) problems.push_back("config.policy: required for eval.w1_in_metrics");
    if (spec && c.policy) {
        try {
            make_policy(*spec, *c.policy);
        } catch (const Error& e) {
            problems.push_back(std::string("config.policy: ") + e.what());
        }
    }
    throw_if_problems(problems, "run config");
    return c;
}

void apply_overrides(nlohmann::json& document, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not of the form key=value");
        const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception&) {
            value = text;
        }
        nlohmann::json* node = &document;
        std::size_t begin = 0;
        while (true) {
            const auto dot = key.find('.', begin);
            const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
            if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
            if (!node->is_object()) *node = nlohmann::json::object();
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            begin = dot + 1;
        }
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
}

env::MdpSpec make_environment(const std::string& name, std::optional<double> gamma) {
    env::MdpSpec spec = env::make_builtin(name);
    if (gamma) {
        spec.gamma = *gamma;
        spec.validate();
    }
    return spec;
}

env::Policy make_policy(const env::MdpSpec& spec, const std::string& text) {
    const std::size_t S = spec.num_states, A = spec.num_actions;
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (text == "uniform") return env::Policy::uniform(S, A);
    if (text == "optimal") return env::optimal_policy(spec);
    if (kind == "constant" && !arg.empty()) {
        const double a = parse_number(arg, "policy '" + text + "'");
        if (a < 0 || a >= static_cast<double>(A) || a != std::floor(a)) {
            throw ConfigError("policy '" + text + "': action must be an integer in [0, " + std::to_string(A) + ")");
        }
        return env::Policy::constant(S, A, static_cast<std::size_t>(a));
    }
    if (kind == "epsilon-optimal" && !arg.empty()) {
        const double eps = parse_number(arg, "policy '" + text + "'");
        if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("policy '" + text + "': epsilon must lie in [0, 1]");
        const env::Policy best = env::optimal_policy(spec);
        std::vector<double> probs(S * A);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a)
                probs[s * A + a] = (1.0 - eps) * best.probability(s, a) + eps / static_cast<double>(A);
        return env::Policy(S, A, std::move(probs), text);
    }
    if (kind == "right" && !arg.empty()) {
        if (A != 2) throw ConfigError("policy '" + text + "' needs a two-action environment");
        const double p = parse_number(arg, "policy '" + text + "'");
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("policy '" + text + "': probability must lie in [0, 1]");
        std::vector<double> probs;
        for (std::size_t s = 0; s < S; ++s) {
            probs.push_back(1.0 - p);
            probs.push_back(p);
        }
        return env::Policy(S, A, std::move(probs), text);
    }
    throw ConfigError("unknown policy '" + text +
                      "' (expected uniform, optimal, constant:<a>, epsilon-optimal:<eps> or right:<p>)");
}

std::filesystem::path resolve_output_dir(const std::string& dir) {
    const std::filesystem::path p(dir);
    if (const char* root = std::getenv("IGN_OUTPUT_ROOT"); root && *root && p.is_relative()) {
        return std::filesystem::path(root) / p;
    }
    return p;
}

nlohmann::ordered_json header_record(const std::string& kind, const std::string& config_hash) {
    nlohmann::ordered_json h;
    h["format_version"] = kFormatVersion;
    h["config_hash"] = config_hash;
    h["kind"] = kind;
    return h;
}

// ---------------------------------------------------------------------------
// Commands

TrainOutcome cmd_train(const RunConfig& config, std::ostream& log) {
    auto spec = std::make_shared<const env::MdpSpec>(make_environment(config.env, config.env_gamma));
    const std::string hash = config.hash();
    TrainOutcome outcome;
    outcome.output_dir = resolve_output_dir(config.output_dir);
    std::filesystem::create_directories(outcome.output_dir);
    write_resolved(config, outcome.output_dir);

    const std::optional<env::Policy> policy = fixed_policy(config, *spec);
    JsonlWriter metrics(outcome.output_dir / "metrics.jsonl", header_record("metrics", hash));

    train::TrainHooks hooks;
    hooks.metrics = [&](const nlohmann::ordered_json& rec) {
        metrics.write(rec);
        ++outcome.metric_records;
    };

    std::optional<eval::ExactReturnDistribution> exact;
    std::vector<eval::Probe> probes;
    const eval::EvalConfig ec = eval_config(config);
    if (config.eval.w1_in_metrics) {
        exact = eval::exact_distribution(*spec, *policy, config.eval.oracle_tolerance);
        probes = eval::probe_set(*spec, ec.max_probes, ec.seed);
        hooks.w1_to_oracle = [&](const net::Model& model) -> std::optional<double> {
            const auto records = eval::evaluate_probes(0, probes, eval::exact_sampler(*exact),
                                                       eval::model_sampler(model, *spec, config.eval.representation), ec);
            return eval::mean_w1(records);
        };
    }
    if (config.checkpoint_period > 0) {
        std::filesystem::create_directories(outcome.output_dir / "checkpoints");
        hooks.checkpoint_period = config.checkpoint_period;
        hooks.checkpoint = [&](std::size_t step, const net::Model& model) {
            net::save_checkpoint(outcome.output_dir / "checkpoints" / ("step_" + std::to_string(step) + ".json"), model,
                                 checkpoint_metadata(config, hash, step));
        };
    }
    hooks.on_abort = [&](std::size_t step, const net::Model& model) {
        const auto path = outcome.output_dir / ("abort_step_" + std::to_string(step) + ".json");
        net::save_checkpoint(path, model, checkpoint_metadata(config, hash, step));
        log << "update failed at step " << step << "; model state saved to " << path.string() << '\n';
    };

    net::Model model = initial_model(config);
    check_model_matches(model, *spec, "initial model");
    train::Trainer trainer(spec, config.train, config.gan, std::move(model), policy, hooks);
    if (config.offline_dataset) trainer.load_offline(env::read_dataset(*config.offline_dataset));
    trainer.run();
    outcome.steps = trainer.steps_done();
    net::save_checkpoint(outcome.output_dir / "final.json", trainer.model(),
                         checkpoint_metadata(config, hash, outcome.steps));
    log << "trained " << outcome.steps << " steps on " << spec->name << "; " << outcome.metric_records
        << " metric records; outputs in " << outcome.output_dir.string() << '\n';
    return outcome;
}

eval::EvalReport cmd_evaluate(const RunConfig& config, const std::string& fixed, const std::string& online,
                              std::ostream& log) {
    auto spec = std::make_shared<const env::MdpSpec>(make_environment(config.env, config.env_gamma));
    const std::string hash = config.hash();
    const std::optional<env::Policy> policy = fixed_policy(config, *spec);
    const eval::EvalConfig ec = eval_config(config);
    const eval::Representation rep = config.eval.representation;

    // Fixed side.
    std::optional<eval::ExactReturnDistribution> exact;
    std::optional<net::Model> fixed_model;
    eval::ReturnSampler fixed_sampler;
    if (fixed == "oracle") {
        if (!policy) throw ConfigError("evaluating against the oracle needs config.policy");
        exact = eval::exact_distribution(*spec, *policy, config.eval.oracle_tolerance);
        fixed_sampler = eval::exact_sampler(*exact);
    } else {
        fixed_model = net::load_model(fixed);
        check_model_matches(*fixed_model, *spec, "fixed checkpoint " + fixed);
        fixed_sampler = eval::model_sampler(*fixed_model, *spec, rep);
    }

    // Online side.
    std::optional<net::Model> online_model;
    std::unique_ptr<train::Trainer> trainer;
    std::vector<std::size_t> schedule;
    std::function<eval::ReturnSampler(std::size_t)> advance_to;
    if (online == "live") {
        trainer = std::make_unique<train::Trainer>(spec, config.train, config.gan, initial_model(config), policy);
        if (config.offline_dataset) trainer->load_offline(env::read_dataset(*config.offline_dataset));
        schedule = config.eval.schedule.empty() ? std::vector<std::size_t>{0, config.train.total_steps}
                                                : config.eval.schedule;
        advance_to = [&](std::size_t step) {
            trainer->advance(step - std::min(step, trainer->steps_done()));
            return eval::model_sampler(trainer->model(), *spec, rep);
        };
    } else {
        const net::Checkpoint ck = net::read_checkpoint(online);
        online_model = net::load_model(online);
        check_model_matches(*online_model, *spec, "online checkpoint " + online);
        schedule = {ck.metadata.value("step", std::size_t{0})};
        advance_to = [&](std::size_t) { return eval::model_sampler(*online_model, *spec, rep); };
    }

    const auto dir = resolve_output_dir(config.output_dir);
    std::filesystem::create_directories(dir);
    JsonlWriter out(dir / "eval.jsonl", header_record("eval", hash));
    const eval::EvalReport report =
        eval::evaluate_fixed(*spec, fixed_sampler, advance_to, schedule, ec,
                             [&](const eval::EvalRecord& r) { out.write(r.to_json()); });
    for (const auto& [step, w1] : report.w1_curve()) log << "step " << step << ": mean W1 " << w1 << '\n';
    log << "report written to " << (dir / "eval.jsonl").string() << '\n';
    return report;
}

eval::ExactReturnDistribution cmd_oracle(const OracleRequest& request, const std::filesystem::path& output,
                                         std::ostream& log) {
    const env::MdpSpec spec = make_environment(request.env, request.env_gamma);
    const env::Policy policy = make_policy(spec, request.policy);
    const auto exact = eval::exact_distribution(spec, policy, request.tolerance);

    nlohmann::ordered_json req;
    req["env"] = request.env;
    req["env_gamma"] = request.env_gamma ? nlohmann::ordered_json(*request.env_gamma) : nlohmann::ordered_json(nullptr);
    req["policy"] = request.policy;
    req["tolerance"] = request.tolerance;
    auto header = header_record("oracle", hex_digest(req.dump()));
    for (const auto& [k, v] : req.items()) header[k] = v;
    header["horizon"] = exact.horizon;
    header["tail_bound"] = exact.tail_bound;

    std::filesystem::create_directories(output);
    JsonlWriter out(output / "oracle.jsonl", header);
    for (std::size_t s = 0; s < spec.num_states; ++s) {
        for (std::size_t a = 0; a < spec.num_actions; ++a) {
            nlohmann::ordered_json rec;
            rec["s"] = s;
            rec["a"] = a;
            rec["mean"] = exact.mean(s, a);
            nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
            for (const auto& [v, p] : exact.at(s, a)) atoms.push_back({v, p});
            rec["atoms"] = std::move(atoms);
            out.write(rec);
        }
    }
    log << "oracle for " << spec.name << " under " << policy.id() << ": horizon " << exact.horizon << ", tail bound "
        << exact.tail_bound << "; written to " << (output / "oracle.jsonl").string() << '\n';
    return exact;
}

std::vector<dist::EmpiricalDistribution> cmd_mc_estimate(const McRequest& request, const std::filesystem::path& output,
                                                         std::ostream& log) {
    const env::MdpSpec spec = make_environment(request.env, request.env_gamma);
    const env::Policy policy = make_policy(spec, request.policy);
    Rng rng = Rng::stream(request.seed, "mc-estimate");
    const auto per_action = eval::monte_carlo_estimate(spec, policy, request.state, request.rollouts, rng,
                                                       request.tolerance);

    nlohmann::ordered_json req;
    req["env"] = request.env;
    req["env_gamma"] = request.env_gamma ? nlohmann::ordered_json(*request.env_gamma) : nlohmann::ordered_json(nullptr);
    req["policy"] = request.policy;
    req["state"] = request.state;
    req["rollouts"] = request.rollouts;
    req["seed"] = request.seed;
    req["bins"] = request.bins;
    req["tolerance"] = request.tolerance;
    const std::string hash = hex_digest(req.dump());
    auto header = [&](const std::string& kind) {
        auto h = header_record(kind, hash);
        for (const auto& [k, v] : req.items()) h[k] = v;
        return h;
    };

    std::filesystem::create_directories(output);
    JsonlWriter summary(output / "mc_summary.jsonl", header("mc_summary"));
    JsonlWriter hist(output / "mc_histogram.jsonl", header("mc_histogram"));
    for (std::size_t a = 0; a < per_action.size(); ++a) {
        const auto& d = per_action[a];
        nlohmann::ordered_json rec;
        rec["action"] = a;
        rec["rollouts"] = d.size();
        rec["mean"] = d.mean();
        rec["variance"] = d.variance();
        rec["std_error"] = std::sqrt(d.variance() / static_cast<double>(d.size()));
        summary.write(rec);
        log << "action " << a << ": mean " << d.mean() << " (se " << rec["std_error"].get<double>() << ")\n";
        for (const auto& bin : eval::histogram(d, request.bins)) {
            nlohmann::ordered_json b;
            b["action"] = a;
            b["bin_left"] = bin.left;
            b["bin_right"] = bin.right;
            b["count"] = bin.count;
            hist.write(b);
        }
    }
    return per_action;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

RunConfig config_from_flags(const std::string& path, const std::vector<std::string>& overrides,
                            const std::string& output) {
    nlohmann::json doc = read_json_file(path);
    apply_overrides(doc, overrides);
    if (!output.empty()) doc["output_dir"] = output;
    return load_run_config(doc);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distributional reinforcement learning on small MDPs", "ign"};
    app.require_subcommand(1);

    std::string config_path, output, fixed, online = "live";
    std::vector<std::string> overrides;

    auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON run config");
    train_cmd->add_option("-c,--config", config_path, "Run config file")->required();
    train_cmd->add_option("--set", overrides, "Override a config key: section.key=value (repeatable)");
    train_cmd->add_option("-o,--output", output, "Output directory (overrides output_dir)");

    auto* eval_cmd = app.add_subcommand("evaluate", "Compare a fixed and an online return distribution");
    eval_cmd->add_option("-c,--config", config_path, "Run config file")->required();
    eval_cmd->add_option("--set", overrides, "Override a config key: section.key=value (repeatable)");
    eval_cmd->add_option("-o,--output", output, "Output directory (overrides output_dir)");
    eval_cmd->add_option("--fixed", fixed, "Fixed side: checkpoint path or 'oracle'")->required();
    eval_cmd->add_option("--online", online, "Online side: checkpoint path or 'live'");

    OracleRequest oracle;
    std::string oracle_output = "runs/oracle";
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact return distribution of a policy by enumeration");
    oracle_cmd->add_option("--env", oracle.env, "Environment name")->capture_default_str();
    oracle_cmd->add_option("--env-gamma", oracle.env_gamma, "Replace the environment's discount");
    oracle_cmd->add_option("--policy", oracle.policy, "Policy spec")->capture_default_str();
    oracle_cmd->add_option("--tolerance", oracle.tolerance, "Tail tolerance")->capture_default_str();
    oracle_cmd->add_option("-o,--output", oracle_output, "Output directory")->capture_default_str();

    McRequest mc;
    std::string mc_output = "runs/mc";
    auto* mc_cmd = app.add_subcommand("mc-estimate", "Monte Carlo per-action return samples from one state");
    mc_cmd->add_option("--env", mc.env, "Environment name")->capture_default_str();
    mc_cmd->add_option("--env-gamma", mc.env_gamma, "Replace the environment's discount");
    mc_cmd->add_option("--policy", mc.policy, "Policy spec")->capture_default_str();
    mc_cmd->add_option("--state", mc.state, "Start state")->capture_default_str();
    mc_cmd->add_option("-m,--rollouts", mc.rollouts, "Rollouts per action")->capture_default_str();
    mc_cmd->add_option("--seed", mc.seed, "Seed")->capture_default_str();
    mc_cmd->add_option("--bins", mc.bins, "Histogram bins")->capture_default_str();
    mc_cmd->add_option("--tolerance", mc.tolerance, "Tail tolerance for the rollout horizon")->capture_default_str();
    mc_cmd->add_option("-o,--output", mc_output, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (train_cmd->parsed()) {
            cmd_train(config_from_flags(config_path, overrides, output), out);
        } else if (eval_cmd->parsed()) {
            cmd_evaluate(config_from_flags(config_path, overrides, output), fixed, online, out);
        } else if (oracle_cmd->parsed()) {
            cmd_oracle(oracle, resolve_output_dir(oracle_output), out);
        } else if (mc_cmd->parsed()) {
            cmd_mc_estimate(mc, resolve_output_dir(mc_output), out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitOk;
}

}  // namespace ign::cli
