#include "ign/distributions/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ign/errors.hpp"

namespace ign::dist {

namespace {

constexpr double kWeightTolerance = 1e-12;

double power(double x, int order) {
    return order == 1 ? x : x * x;
}

std::vector<double> sorted(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw DomainError("empirical distribution needs at least one sample");
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples, std::vector<double> weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
    if (samples_.empty()) throw DomainError("empirical distribution needs at least one sample");
    if (weights_.size() != samples_.size()) {
        throw DomainError("got " + std::to_string(weights_.size()) + " weights for " + std::to_string(samples_.size()) +
                          " samples");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw DomainError("negative or NaN weight " + std::to_string(w));
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) throw DomainError("weights sum to " + std::to_string(total));
}

double EmpiricalDistribution::weight(std::size_t i) const {
    return weights_.empty() ? 1.0 / static_cast<double>(samples_.size()) : weights_[i];
}

double EmpiricalDistribution::mean() const {
    if (uniform()) return std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(size());
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * samples_[i];
    return m;
}

double EmpiricalDistribution::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < size(); ++i) v += weight(i) * (samples_[i] - m) * (samples_[i] - m);
    return v;
}

std::vector<std::pair<double, double>> EmpiricalDistribution::sorted_atoms() const {
    std::vector<std::pair<double, double>> atoms(size());
    for (std::size_t i = 0; i < size(); ++i) atoms[i] = {samples_[i], weight(i)};
    std::stable_sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return atoms;
}

double EmpiricalDistribution::quantile(double tau) const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("quantile level " + std::to_string(tau) + " outside [0, 1]");
    if (uniform()) {
        const auto xs = sorted(samples_);
        const double m = static_cast<double>(xs.size());
        // tau * M that lands within rounding of an integer counts as that integer.
        double pos = tau * m;
        if (std::abs(pos - std::round(pos)) < 1e-9 * m) pos = std::round(pos);
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(pos)));
        return xs[std::min(k, xs.size()) - 1];
    }
    const auto atoms = sorted_atoms();
    double cumulative = 0.0;
    for (const auto& [x, w] : atoms) {
        cumulative += w;
        if (cumulative >= tau - kWeightTolerance) return x;
    }
    return atoms.back().first;
}

void LossConfig::validate() const {
    std::string problems;
    if (!(delta > 0.0)) problems += " delta must be positive;";
    if (num_tau == 0) problems += " N must be at least 1;";
    if (num_tau_target == 0) problems += " N' must be at least 1;";
    if (!problems.empty()) throw ConfigError("invalid loss config:" + problems);
}

double huber(double a, double delta) {
    if (!(delta > 0.0)) throw ConfigError("huber threshold must be positive, got " + std::to_string(delta));
    const double m = std::abs(a);
    return m <= delta ? 0.5 * a * a : delta * (m - 0.5 * delta);
}

double quantile_huber(double a, double tau, double delta) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau " + std::to_string(tau) + " outside [0, 1]");
    return std::abs(tau - (a < 0.0 ? 1.0 : 0.0)) * huber(a, delta) / delta;
}

ad::Var quantile_huber_loss(const ad::Var& predicted, const ad::Array& tau, const ad::Array& target, double delta) {
    if (!(delta > 0.0)) throw ConfigError("huber threshold must be positive, got " + std::to_string(delta));
    const ad::Array& theta = predicted.value();
    if (theta.shape() != tau.shape()) {
        throw ShapeError("quantile_huber_loss: predictions " + ad::to_string(theta.shape()) + " vs tau " +
                         ad::to_string(tau.shape()));
    }
    const std::size_t B = theta.rows(), N = theta.cols(), Np = target.cols();
    if (target.rows() != B) {
        throw ShapeError("quantile_huber_loss: predictions " + ad::to_string(theta.shape()) + " vs targets " +
                         ad::to_string(target.shape()));
    }
    for (double t : tau.values()) {
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("tau " + std::to_string(t) + " outside [0, 1]");
    }

    const double norm = 1.0 / (static_cast<double>(B) * static_cast<double>(N) * static_cast<double>(Np));
    double loss = 0.0;
    ad::Array dtheta(theta.shape());
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < N; ++i) {
            const double t = tau(b, i);
            double d = 0.0;
            for (std::size_t j = 0; j < Np; ++j) {
                const double a = target(b, j) - theta(b, i);
                const double w = std::abs(t - (a < 0.0 ? 1.0 : 0.0));
                loss += w * huber(a, delta) / delta;
                // d/dtheta of L(target - theta) is -L'(a), with L'(a) = clip(a, -delta, delta).
                d -= w * std::clamp(a, -delta, delta) / delta;
            }
            dtheta(b, i) = d * norm;
        }
    }
    return predicted.tape().record(
        "quantile_huber_loss", ad::Array::scalar(loss * norm), {predicted},
        [dtheta](const ad::Var&, const ad::Var& g) {
            ad::Tape& tape = g.tape();
            return std::vector<ad::Var>{ad::mul(ad::expand(g, dtheta.shape()), tape.constant(dtheta))};
        },
        false);
}

double wasserstein(const EmpiricalDistribution& p, const EmpiricalDistribution& q, int order) {
    if (order != 1 && order != 2) throw DomainError("wasserstein order must be 1 or 2, got " + std::to_string(order));
    double total = 0.0;
    if (p.uniform() && q.uniform() && p.size() == q.size()) {
        const auto xs = sorted(p.samples());
        const auto ys = sorted(q.samples());
        for (std::size_t i = 0; i < xs.size(); ++i) total += power(std::abs(xs[i] - ys[i]), order);
        total /= static_cast<double>(xs.size());
    } else {
        // Integrate |F^-1(u) - G^-1(u)|^k over u by walking both quantile functions.
        const auto xs = p.sorted_atoms();
        const auto ys = q.sorted_atoms();
        std::size_t i = 0, j = 0;
        double ri = xs[0].second, rj = ys[0].second;
        while (i < xs.size() && j < ys.size()) {
            const double cost = power(std::abs(xs[i].first - ys[j].first), order);
            if (ri < rj) {
                total += ri * cost;
                rj -= ri;
                if (++i < xs.size()) ri = xs[i].second;
            } else {
                total += rj * cost;
                ri -= rj;
                if (++j < ys.size()) rj = ys[j].second;
            }
        }
    }
    return order == 1 ? total : std::sqrt(total);
}

Distortion Distortion::cvar(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("CVaR level must lie in (0, 1], got " + std::to_string(alpha));
    return {"cvar", alpha};
}

Distortion Distortion::parse(const std::string& text) {
    if (text == "identity") return identity();
    if (text.rfind("cvar:", 0) == 0) {
        double alpha = 0.0;
        try {
            alpha = std::stod(text.substr(5));
        } catch (const std::logic_error&) {
            throw ConfigError("bad CVaR level in distortion '" + text + "'");
        }
        return cvar(alpha);
    }
    throw ConfigError("unknown distortion '" + text + "' (expected identity or cvar:<alpha>)");
}

std::string Distortion::to_string() const {
    if (name == "identity") return name;
    std::ostringstream out;
    out.precision(17);
    out << name << ':' << parameter;
    return out.str();
}

double distort_tau(double tau, const Distortion& d) {
    if (d.name == "cvar") return d.parameter * tau;
    return tau;
}

Summary summarize(const EmpiricalDistribution& samples, std::span<const double> taus) {
    Summary s;
    s.mean = samples.mean();
    s.variance = samples.variance();
    s.taus.assign(taus.begin(), taus.end());
    for (double t : taus) s.quantiles.push_back(samples.quantile(t));
    return s;
}

}  // namespace ign::dist
