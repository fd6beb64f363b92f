#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ign/autodiff/tape.hpp"

namespace ign::dist {

// Finite mixture of Diracs. Weights default to uniform; when given they must be
// nonnegative and sum to 1 within 1e-12.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> samples);
    EmpiricalDistribution(std::vector<double> samples, std::vector<double> weights);

    std::size_t size() const noexcept { return samples_.size(); }
    std::span<const double> samples() const noexcept { return samples_; }
    bool uniform() const noexcept { return weights_.empty(); }
    double weight(std::size_t i) const;

    double mean() const;
    // Population variance.
    double variance() const;
    // Lower quantile: the smallest sample x with F(x) >= tau. For uniform weights
    // this is the order statistic at ceil(tau * M) (1-based, tau = 0 gives the minimum).
    double quantile(double tau) const;

    // (value, weight) pairs sorted by value, ties kept in input order.
    std::vector<std::pair<double, double>> sorted_atoms() const;

private:
    std::vector<double> samples_;
    std::vector<double> weights_;
};

struct LossConfig {
    double delta = 1.0;
    std::size_t num_tau = 8;         // N, draws for the online quantile values
    std::size_t num_tau_target = 8;  // N', draws for the target quantile values

    void validate() const;
};

double huber(double a, double delta);
// |tau - 1{a < 0}| * huber(a, delta) / delta
double quantile_huber(double a, double tau, double delta);

// Batched IQN loss as a graph op. `predicted` is B x N (values at `tau`, same
// shape), `target` is B x N' and treated as constant. Returns
//   (1/B) sum_b (1/N) sum_i (1/N') sum_j quantile_huber(target(b,j) - predicted(b,i), tau(b,i), delta).
// The backward rule is first order only.
ad::Var quantile_huber_loss(const ad::Var& predicted, const ad::Array& tau, const ad::Array& target, double delta);

// Exact 1-D Wasserstein distance of order 1 or 2.
double wasserstein(const EmpiricalDistribution& p, const EmpiricalDistribution& q, int order);

// Monotone map beta: [0,1] -> [0,1] applied to tau draws. "identity" or
// "cvar" with beta(tau) = alpha * tau, alpha in (0, 1].
struct Distortion {
    std::string name = "identity";
    double parameter = 1.0;

    static Distortion identity() { return {}; }
    static Distortion cvar(double alpha);
    // "identity", "cvar:<alpha>".
    static Distortion parse(const std::string& text);
    std::string to_string() const;
};

double distort_tau(double tau, const Distortion& d);

struct Summary {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> taus;
    std::vector<double> quantiles;  // quantiles[k] at taus[k]
};

Summary summarize(const EmpiricalDistribution& samples, std::span<const double> taus);

}  // namespace ign::dist
