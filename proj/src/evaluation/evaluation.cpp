#include "ign/evaluation/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ign/errors.hpp"

namespace ign::eval {

namespace {

void check_pair(const env::MdpSpec& spec, std::size_t s, std::size_t a) {
    if (s >= spec.num_states) {
        throw ConfigError("probe state " + std::to_string(s) + " outside environment '" + spec.name + "' with " +
                          std::to_string(spec.num_states) + " states");
    }
    if (a >= spec.num_actions) {
        throw ConfigError("probe action " + std::to_string(a) + " outside environment '" + spec.name + "' with " +
                          std::to_string(spec.num_actions) + " actions");
    }
}

bool same_value(double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
}

// Sorts atoms by value and merges numerically equal returns.
Atoms merge_atoms(Atoms atoms) {
    std::sort(atoms.begin(), atoms.end());
    Atoms out;
    for (const auto& [v, p] : atoms) {
        if (!out.empty() && same_value(out.back().first, v)) {
            out.back().second += p;
        } else {
            out.emplace_back(v, p);
        }
    }
    return out;
}

struct Node {
    std::size_t state;
    double value;
    double probability;

    bool operator<(const Node& o) const { return state != o.state ? state < o.state : value < o.value; }
};

std::vector<Node> merge_nodes(std::vector<Node> nodes) {
    std::sort(nodes.begin(), nodes.end());
    std::vector<Node> out;
    for (const auto& n : nodes) {
        if (!out.empty() && out.back().state == n.state && same_value(out.back().value, n.value)) {
            out.back().probability += n.probability;
        } else {
            out.push_back(n);
        }
    }
    return out;
}

dist::EmpiricalDistribution from_atoms(const Atoms& atoms) {
    std::vector<double> values, weights;
    double total = 0.0;
    for (const auto& [v, p] : atoms) total += p;
    for (const auto& [v, p] : atoms) {
        values.push_back(v);
        weights.push_back(p / total);
    }
    return dist::EmpiricalDistribution(std::move(values), std::move(weights));
}

}  // namespace

dist::EmpiricalDistribution pseudo_samples(const net::Generator& generator, const env::MdpSpec& spec, std::size_t s,
                                           std::size_t a, std::size_t m, Rng& rng) {
    if (m == 0) throw ConfigError("pseudo_samples needs M >= 1");
    check_pair(spec, s, a);
    ad::Array z(ad::Shape{m, 1});
    for (auto& v : z.values()) v = rng.uniform();
    const std::vector<std::size_t> states(m, s), actions(m, a);
    ad::Tape tape;
    const ad::Array out =
        generator.forward(tape.constant(std::move(z)), tape.constant(net::conditioning(spec, states, actions))).value();
    return dist::EmpiricalDistribution(std::vector<double>(out.values().begin(), out.values().end()));
}

dist::EmpiricalDistribution quantile_samples(const net::QuantileNetwork& network, const env::MdpSpec& spec,
                                             std::size_t s, std::size_t a, std::size_t m, Rng& rng) {
    if (m == 0) throw ConfigError("quantile_samples needs M >= 1");
    check_pair(spec, s, a);
    std::vector<double> taus(m);
    for (auto& t : taus) t = rng.uniform();
    const ad::Array theta = network.quantile_values(spec.encode(s), taus);
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = theta(k, a);
    return dist::EmpiricalDistribution(std::move(out));
}

// ---------------------------------------------------------------------------
// Exact oracle

dist::EmpiricalDistribution ExactReturnDistribution::distribution(std::size_t s, std::size_t a) const {
    return from_atoms(at(s, a));
}

double ExactReturnDistribution::mean(std::size_t s, std::size_t a) const {
    double m = 0.0;
    for (const auto& [v, p] : at(s, a)) m += v * p;
    return m;
}

std::size_t truncation_horizon(const env::MdpSpec& spec, double tolerance) {
    if (!(tolerance > 0.0)) throw ConfigError("tail tolerance must be positive");
    std::size_t h = 0;
    double tail = spec.return_bound();
    while (tail >= tolerance) {
        tail *= spec.gamma;
        ++h;
    }
    return std::max<std::size_t>(h, 1);
}

ExactReturnDistribution exact_distribution(const env::MdpSpec& spec, const env::Policy& policy, double tolerance,
                                           std::size_t budget) {
    spec.validate();
    if (policy.num_states() != spec.num_states || policy.num_actions() != spec.num_actions) {
        throw ConfigError("policy '" + policy.id() + "' does not match environment '" + spec.name + "'");
    }
    const std::size_t S = spec.num_states, A = spec.num_actions;
    ExactReturnDistribution out;
    out.num_states = S;
    out.num_actions = A;
    out.gamma = spec.gamma;
    out.tolerance = tolerance;
    out.horizon = truncation_horizon(spec, tolerance);
    out.tail_bound = std::pow(spec.gamma, static_cast<double>(out.horizon)) * spec.return_bound();
    out.atoms.resize(S * A);

    std::size_t visited = 0;
    auto charge = [&](std::size_t n) {
        visited += n;
        if (visited > budget) {
            throw InfeasibleError("exact enumeration of '" + spec.name + "' exceeds the budget of " +
                                  std::to_string(budget) + " (state, partial return) nodes at horizon " +
                                  std::to_string(out.horizon) + " (tolerance " + std::to_string(tolerance) +
                                  "); raise the tolerance or use a smaller MDP");
        }
    };

    for (std::size_t s0 = 0; s0 < S; ++s0) {
        for (std::size_t a0 = 0; a0 < A; ++a0) {
            if (spec.is_absorbing(s0)) {
                out.atoms[s0 * A + a0] = {{0.0, 1.0}};
                continue;
            }
            Atoms finished;
            std::vector<Node> frontier = {{s0, 0.0, 1.0}};
            double discount = 1.0;
            for (std::size_t t = 0; t < out.horizon && !frontier.empty(); ++t) {
                charge(frontier.size());
                std::vector<Node> next;
                for (const Node& node : frontier) {
                    for (std::size_t a = 0; a < A; ++a) {
                        const double pa = t == 0 ? (a == a0 ? 1.0 : 0.0) : policy.probability(node.state, a);
                        if (pa == 0.0) continue;
                        const auto row = spec.transition_row(node.state, a);
                        for (const auto& outcome : spec.reward(node.state, a)) {
                            if (outcome.probability == 0.0) continue;
                            const double value = node.value + discount * outcome.value;
                            for (std::size_t s2 = 0; s2 < S; ++s2) {
                                if (row[s2] == 0.0) continue;
                                const double p = node.probability * pa * outcome.probability * row[s2];
                                if (spec.is_absorbing(s2)) {
                                    finished.emplace_back(value, p);
                                } else {
                                    next.push_back({s2, value, p});
                                }
                            }
                        }
                    }
                }
                frontier = merge_nodes(std::move(next));
                discount *= spec.gamma;
            }
            // Paths still running at the horizon keep their partial return; the
            // remaining discounted rewards are bounded by tail_bound.
            for (const Node& node : frontier) finished.emplace_back(node.value, node.probability);
            out.atoms[s0 * A + a0] = merge_atoms(std::move(finished));
        }
    }
    return out;
}

dist::EmpiricalDistribution bellman_reassemble(const env::MdpSpec& spec, const env::Policy& policy,
                                               const ExactReturnDistribution& exact, std::size_t s, std::size_t a) {
    check_pair(spec, s, a);
    Atoms atoms;
    const auto row = spec.transition_row(s, a);
    for (const auto& outcome : spec.reward(s, a)) {
        if (outcome.probability == 0.0) continue;
        for (std::size_t s2 = 0; s2 < spec.num_states; ++s2) {
            if (row[s2] == 0.0) continue;
            const double p = outcome.probability * row[s2];
            if (spec.is_absorbing(s2)) {
                atoms.emplace_back(outcome.value, p);
                continue;
            }
            for (std::size_t a2 = 0; a2 < spec.num_actions; ++a2) {
                const double pa = policy.probability(s2, a2);
                if (pa == 0.0) continue;
                for (const auto& [y, q] : exact.at(s2, a2)) {
                    atoms.emplace_back(outcome.value + spec.gamma * y, p * pa * q);
                }
            }
        }
    }
    return from_atoms(merge_atoms(std::move(atoms)));
}

double bellman_residual(const env::MdpSpec& spec, const env::Policy& policy, const ExactReturnDistribution& exact) {
    double worst = 0.0;
    for (std::size_t s = 0; s < spec.num_states; ++s) {
        for (std::size_t a = 0; a < spec.num_actions; ++a) {
            const double w = dist::wasserstein(bellman_reassemble(spec, policy, exact, s, a), exact.distribution(s, a), 1);
            worst = std::max(worst, w);
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Fixed-policy evaluation

std::vector<Probe> probe_set(const env::MdpSpec& spec, std::size_t max_probes, std::uint64_t seed) {
    std::vector<Probe> all;
    for (std::size_t s = 0; s < spec.num_states; ++s) {
        if (spec.is_absorbing(s)) continue;
        for (std::size_t a = 0; a < spec.num_actions; ++a) all.push_back({s, a});
    }
    if (all.size() <= max_probes) return all;
    Rng rng = Rng::stream(seed, "probes");
    for (std::size_t i = 0; i < max_probes; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
    all.resize(max_probes);
    std::sort(all.begin(), all.end(),
              [](const Probe& x, const Probe& y) { return x.state != y.state ? x.state < y.state : x.action < y.action; });
    return all;
}

std::string to_string(Representation r) {
    return r == Representation::Generator ? "generator" : "quantile";
}

Representation parse_representation(const std::string& name) {
    if (name == "generator") return Representation::Generator;
    if (name == "quantile") return Representation::Quantile;
    throw ConfigError("unknown representation '" + name + "' (expected generator or quantile)");
}

ReturnSampler model_sampler(const net::Model& model, const env::MdpSpec& spec, Representation representation) {
    if (representation == Representation::Generator) {
        return [&model, &spec](std::size_t s, std::size_t a, std::size_t m, Rng& rng) {
            return pseudo_samples(model.generator, spec, s, a, m, rng);
        };
    }
    return [&model, &spec](std::size_t s, std::size_t a, std::size_t m, Rng& rng) {
        return quantile_samples(model.quantile, spec, s, a, m, rng);
    };
}

ReturnSampler exact_sampler(const ExactReturnDistribution& exact) {
    return [&exact](std::size_t s, std::size_t a, std::size_t, Rng&) {
        if (s >= exact.num_states || a >= exact.num_actions) {
            throw ConfigError("probe (" + std::to_string(s) + ", " + std::to_string(a) + ") outside the oracle");
        }
        return exact.distribution(s, a);
    };
}

nlohmann::ordered_json EvalRecord::to_json() const {
    nlohmann::ordered_json q = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < online.taus.size(); ++k) q.push_back({online.taus[k], online.quantiles[k]});
    nlohmann::ordered_json j;
    j["step"] = step;
    j["probe_id"] = probe_id;
    j["s"] = state;
    j["a"] = action;
    j["w1"] = w1;
    j["w2"] = w2;
    j["mean_gap"] = mean_gap;
    j["v_hat"] = online.mean;
    j["q_tau_hat"] = std::move(q);
    j["var_hat"] = online.variance;
    return j;
}

std::vector<EvalRecord> evaluate_probes(std::size_t step, std::span<const Probe> probes, const ReturnSampler& fixed,
                                        const ReturnSampler& online, const EvalConfig& cfg) {
    if (cfg.samples == 0) throw ConfigError("evaluation needs M >= 1 samples per probe");
    std::vector<EvalRecord> out;
    out.reserve(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Rng base = Rng::stream(cfg.seed, "eval", i);
        Rng fixed_rng = base, online_rng = base;
        const auto p = fixed(probes[i].state, probes[i].action, cfg.samples, fixed_rng);
        const auto q = online(probes[i].state, probes[i].action, cfg.samples, online_rng);
        EvalRecord r;
        r.step = step;
        r.probe_id = i;
        r.state = probes[i].state;
        r.action = probes[i].action;
        r.w1 = dist::wasserstein(p, q, 1);
        r.w2 = dist::wasserstein(p, q, 2);
        r.mean_gap = q.mean() - p.mean();
        r.online = dist::summarize(q, cfg.taus);
        out.push_back(std::move(r));
    }
    return out;
}

double mean_w1(std::span<const EvalRecord> records) {
    if (records.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : records) total += r.w1;
    return total / static_cast<double>(records.size());
}

std::vector<std::pair<std::size_t, double>> EvalReport::w1_curve() const {
    std::vector<std::pair<std::size_t, double>> out;
    std::size_t begin = 0;
    while (begin < records.size()) {
        std::size_t end = begin;
        while (end < records.size() && records[end].step == records[begin].step) ++end;
        out.emplace_back(records[begin].step, mean_w1(std::span(records).subspan(begin, end - begin)));
        begin = end;
    }
    return out;
}

EvalReport evaluate_fixed(const env::MdpSpec& spec, const ReturnSampler& fixed,
                          const std::function<ReturnSampler(std::size_t step)>& advance_to,
                          std::span<const std::size_t> schedule, const EvalConfig& cfg,
                          const std::function<void(const EvalRecord&)>& sink) {
    const std::vector<Probe> probes = probe_set(spec, cfg.max_probes, cfg.seed);
    EvalReport report;
    for (std::size_t step : schedule) {
        const ReturnSampler online = advance_to(step);
        for (auto& r : evaluate_probes(step, probes, fixed, online, cfg)) {
            if (sink) sink(r);
            report.records.push_back(std::move(r));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<dist::EmpiricalDistribution> monte_carlo_estimate(const env::MdpSpec& spec, const env::Policy& policy,
                                                              std::size_t state, std::size_t m, Rng& rng,
                                                              double tolerance) {
    if (m == 0) throw ConfigError("Monte Carlo estimate needs M >= 1 rollouts");
    check_pair(spec, state, 0);
    const std::size_t horizon = truncation_horizon(spec, tolerance);
    std::vector<dist::EmpiricalDistribution> out;
    for (std::size_t a0 = 0; a0 < spec.num_actions; ++a0) {
        Rng r = rng.split("mc", a0);
        std::vector<double> returns(m, 0.0);
        for (auto& g : returns) {
            std::size_t s = state;
            double discount = 1.0;
            for (std::size_t t = 0; t < horizon && !spec.is_absorbing(s); ++t) {
                const std::size_t a = t == 0 ? a0 : policy.sample(s, r);
                const env::Transition tr = env::step(spec, s, a, r);
                g += discount * tr.reward;
                discount *= spec.gamma;
                s = tr.next_state;
            }
        }
        out.emplace_back(std::move(returns));
    }
    return out;
}

std::vector<HistogramBin> histogram(const dist::EmpiricalDistribution& samples, std::size_t bins) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    const auto values = samples.samples();
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it, width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + width * static_cast<double>(b);
        out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        out[std::min(b, bins - 1)].count += 1;
    }
    return out;
}

}  // namespace ign::eval
