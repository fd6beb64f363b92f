#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ign/distributions/distributions.hpp"
#include "ign/errors.hpp"
#include "ign/rng.hpp"
#include "support/finite_difference.hpp"
#include "support/transport_lp.hpp"

using namespace ign;
using namespace ign::dist;

namespace {

struct Discrete {
    std::vector<double> x, p;
};

Discrete random_discrete(Rng& rng, std::size_t max_atoms = 6) {
    Discrete d;
    const std::size_t n = 1 + rng.below(max_atoms);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Coarse grid so ties between atoms happen.
        d.x.push_back(std::round(rng.uniform(-3, 3) * 4) / 4);
        d.p.push_back(rng.uniform() + 0.01);
        total += d.p.back();
    }
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) partial += (d.p[i] /= total);
    d.p.back() = 1.0 - partial;
    return d;
}

}  // namespace

TEST(HuberTest, Examples) {
    EXPECT_DOUBLE_EQ(huber(0.5, 1.0), 0.125);
    EXPECT_DOUBLE_EQ(huber(2.0, 1.0), 1.5);
    EXPECT_EQ(huber(0.0, 1.0), 0.0);
    EXPECT_THROW(huber(1.0, 0.0), ConfigError);
}

TEST(QuantileHuberTest, Examples) {
    EXPECT_DOUBLE_EQ(quantile_huber(-1.0, 0.5, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(quantile_huber(1.0, 0.9, 1.0), 0.45);
    EXPECT_EQ(quantile_huber(1.0, 0.5, 1.0), 0.5 * huber(1.0, 1.0) / 1.0);
    EXPECT_THROW(quantile_huber(1.0, 1.5, 1.0), DomainError);
    EXPECT_THROW(quantile_huber(1.0, -0.1, 1.0), DomainError);
}

TEST(QuantileHuberTest, NonnegativeAndZeroOnlyAtZero) {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(-5, 5), tau = rng.uniform(), delta = rng.uniform(0.1, 3);
        const double v = quantile_huber(a, tau, delta);
        EXPECT_GE(v, 0.0);
        if (a != 0.0 && tau > 0.0 && tau < 1.0) {
            EXPECT_GT(v, 0.0);
        }
    }
    EXPECT_EQ(quantile_huber(0.0, 0.3, 1.0), 0.0);
}

TEST(QuantileHuberTest, MedianLevelIsScaledHuber) {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(-5, 5), delta = rng.uniform(0.1, 3);
        EXPECT_NEAR(quantile_huber(a, 0.5, delta), huber(a, delta) / (2 * delta), 1e-15);
    }
}

TEST(QuantileHuberTest, ContinuousAtZero) {
    for (double tau : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(quantile_huber(1e-9, tau, 1.0), quantile_huber(-1e-9, tau, 1.0), 1e-17);
    }
}

TEST(QuantileHuberLossTest, ValueMatchesScalarSum) {
    Rng rng(5);
    const std::size_t B = 3, N = 4, Np = 5;
    ad::Array theta({B, N}), tau({B, N}), target({B, Np});
    for (auto& v : theta.values()) v = rng.uniform(-2, 2);
    for (auto& v : tau.values()) v = rng.uniform();
    for (auto& v : target.values()) v = rng.uniform(-2, 2);
    double expected = 0.0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < Np; ++j)
                expected += quantile_huber(target(b, j) - theta(b, i), tau(b, i), 1.0) / Np;
    expected /= B * N;
    ad::Tape tape;
    EXPECT_NEAR(quantile_huber_loss(tape.input(theta), tau, target, 1.0).value().item(), expected, 1e-14);
}

TEST(QuantileHuberLossTest, GradientMatchesFiniteDifferences) {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t B = 2, N = 3, Np = 4;
        ad::Array theta({B, N}), tau({B, N}), target({B, Np});
        for (auto& v : theta.values()) v = rng.uniform(-3, 3);
        for (auto& v : tau.values()) v = rng.uniform();
        for (auto& v : target.values()) v = rng.uniform(-3, 3);
        const double delta = rng.uniform(0.5, 2);
        auto f = [&](const std::vector<ad::Array>& in) {
            ad::Tape t;
            return quantile_huber_loss(t.input(in[0]), tau, target, delta).value().item();
        };
        ad::Tape tape;
        const ad::Var x = tape.input(theta);
        const ad::Var loss = quantile_huber_loss(x, tau, target, delta);
        const auto g = tape.grad(loss, std::vector<ad::Var>{x});
        EXPECT_LT(oracle::relative_error(g[0].value(), oracle::central_difference(f, {theta})[0]), 1e-4);
    }
}

TEST(QuantileHuberLossTest, ShapeMismatchThrows) {
    ad::Tape tape;
    const ad::Var x = tape.input(ad::Array({2, 3}));
    EXPECT_THROW(quantile_huber_loss(x, ad::Array({2, 2}), ad::Array({2, 4}), 1.0), ShapeError);
    EXPECT_THROW(quantile_huber_loss(x, ad::Array({2, 3}), ad::Array({3, 4}), 1.0), ShapeError);
    EXPECT_THROW(quantile_huber_loss(x, ad::Array({2, 3}, 2.0), ad::Array({2, 4}), 1.0), DomainError);
}

TEST(LossConfigTest, Validation) {
    EXPECT_NO_THROW(LossConfig{}.validate());
    EXPECT_THROW((LossConfig{0.0, 1, 1}.validate()), ConfigError);
    EXPECT_THROW((LossConfig{1.0, 0, 1}.validate()), ConfigError);
}

TEST(EmpiricalTest, InvalidInputs) {
    EXPECT_THROW(EmpiricalDistribution(std::vector<double>{}), DomainError);
    EXPECT_THROW(EmpiricalDistribution({1.0, 2.0}, {0.5, 0.6}), DomainError);
    EXPECT_THROW(EmpiricalDistribution({1.0, 2.0}, {1.5, -0.5}), DomainError);
}

TEST(WassersteinTest, Examples) {
    const EmpiricalDistribution a({0.3, -1.0, 2.0});
    EXPECT_EQ(wasserstein(a, a, 1), 0.0);
    EXPECT_EQ(wasserstein(a, EmpiricalDistribution({2.0, 0.3, -1.0}), 2), 0.0);
    const EmpiricalDistribution zero({0.0}), one({1.0});
    EXPECT_DOUBLE_EQ(wasserstein(zero, one, 1), 1.0);
    EXPECT_DOUBLE_EQ(wasserstein(zero, one, 2), 1.0);
    EXPECT_THROW(wasserstein(zero, one, 3), DomainError);
}

TEST(WassersteinTest, MatchesTransportLinearProgram) {
    Rng rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        const Discrete p = random_discrete(rng), q = random_discrete(rng);
        const EmpiricalDistribution dp(p.x, p.p), dq(q.x, q.p);
        for (int k : {1, 2}) {
            EXPECT_NEAR(wasserstein(dp, dq, k), oracle::transport_wasserstein(p.x, p.p, q.x, q.p, k), 1e-8)
                << "trial " << trial << " order " << k;
        }
    }
}

TEST(WassersteinTest, EqualSizeSortedDifferenceMatchesTransportLinearProgram) {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(7);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = rng.uniform(-2, 2);
        for (auto& v : y) v = rng.uniform(-2, 2);
        const std::vector<double> w(n, 1.0 / static_cast<double>(n));
        auto xs = x, ys = y;
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        double mad = 0.0;
        for (std::size_t i = 0; i < n; ++i) mad += std::abs(xs[i] - ys[i]) / static_cast<double>(n);
        const double w1 = wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), 1);
        EXPECT_NEAR(w1, mad, 1e-12);
        EXPECT_NEAR(w1, oracle::transport_wasserstein(x, w, y, w, 1), 1e-8);
    }
}

TEST(WassersteinTest, UniformAndWeightedPathsAgree) {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = rng.uniform(-2, 2);
        for (auto& v : y) v = rng.uniform(-2, 2);
        const std::vector<double> w(5, 0.2);
        for (int k : {1, 2}) {
            EXPECT_NEAR(wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), k),
                        wasserstein(EmpiricalDistribution(x, w), EmpiricalDistribution(y, w), k), 1e-12);
        }
    }
}

TEST(WassersteinTest, MetricProperties) {
    Rng rng(31415);
    for (int trial = 0; trial < 100; ++trial) {
        const Discrete a = random_discrete(rng), b = random_discrete(rng), c = random_discrete(rng);
        const EmpiricalDistribution da(a.x, a.p), db(b.x, b.p), dc(c.x, c.p);
        for (int k : {1, 2}) {
            const double ab = wasserstein(da, db, k);
            EXPECT_GE(ab, 0.0);
            EXPECT_NEAR(ab, wasserstein(db, da, k), 1e-12);
            EXPECT_LE(wasserstein(da, dc, k), ab + wasserstein(db, dc, k) + 1e-10);
        }
    }
}

TEST(WassersteinTest, ZeroForEqualDistributionsWrittenDifferently) {
    // {1, 1, 2} uniform equals {1 w.p. 2/3, 2 w.p. 1/3}.
    const EmpiricalDistribution a({1.0, 1.0, 2.0});
    const EmpiricalDistribution b({2.0, 1.0}, {1.0 / 3.0, 2.0 / 3.0});
    EXPECT_NEAR(wasserstein(a, b, 1), 0.0, 1e-15);
    EXPECT_GT(wasserstein(a, EmpiricalDistribution({1.0, 2.0}), 1), 0.1);
}

TEST(DistortionTest, Examples) {
    EXPECT_EQ(distort_tau(0.37, Distortion::identity()), 0.37);
    EXPECT_DOUBLE_EQ(distort_tau(0.8, Distortion::cvar(0.5)), 0.4);
    for (double t : {0.0, 0.25, 0.9, 1.0}) EXPECT_EQ(distort_tau(t, Distortion::cvar(1.0)), t);
    EXPECT_THROW(Distortion::cvar(0.0), ConfigError);
    EXPECT_THROW(Distortion::cvar(1.5), ConfigError);
}

TEST(DistortionTest, ParseRoundTrip) {
    EXPECT_EQ(Distortion::parse("identity").name, "identity");
    const Distortion d = Distortion::parse("cvar:0.25");
    EXPECT_EQ(d.name, "cvar");
    EXPECT_EQ(d.parameter, 0.25);
    EXPECT_EQ(Distortion::parse(d.to_string()).parameter, 0.25);
    EXPECT_THROW(Distortion::parse("wang:0.1"), ConfigError);
}

TEST(DistortionTest, MonotoneAndEndpoints) {
    for (const auto& d : {Distortion::identity(), Distortion::cvar(0.1), Distortion::cvar(0.7)}) {
        EXPECT_EQ(distort_tau(0.0, d), 0.0);
        double prev = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double b = distort_tau(i / 1000.0, d);
            EXPECT_GE(b, prev);
            EXPECT_LE(b, 1.0);
            prev = b;
        }
    }
}

TEST(SummaryTest, SmallExamples) {
    const std::vector<double> taus = {0.0, 0.5, 1.0};
    const Summary s = summarize(EmpiricalDistribution({3.0, 1.0, 2.0}), taus);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.quantiles[1], 2.0);
    EXPECT_DOUBLE_EQ(s.variance, 2.0 / 3.0);
    EXPECT_EQ(s.quantiles[0], 1.0);
    EXPECT_EQ(s.quantiles[2], 3.0);

    const Summary c = summarize(EmpiricalDistribution({4.5}), taus);
    EXPECT_EQ(c.mean, 4.5);
    EXPECT_EQ(c.variance, 0.0);
    for (double q : c.quantiles) EXPECT_EQ(q, 4.5);
}

TEST(SummaryTest, LowerOrderStatisticConvention) {
    std::vector<double> xs(10);
    for (int i = 0; i < 10; ++i) xs[i] = i + 1;
    const EmpiricalDistribution d(xs);
    EXPECT_EQ(d.quantile(0.3), 3.0);  // ceil(0.3 * 10) = 3 despite 0.3 * 10 rounding above 3
    EXPECT_EQ(d.quantile(0.31), 4.0);
    EXPECT_EQ(d.quantile(0.5), 5.0);
    EXPECT_EQ(EmpiricalDistribution({1.0, 2.0}, {0.5, 0.5}).quantile(0.5), 1.0);
}

TEST(SummaryTest, NormalMixtureWithinStandardErrors) {
    // 0.3 N(-2, 1) + 0.7 N(1, 0.5^2)
    const double w[2] = {0.3, 0.7}, mu[2] = {-2.0, 1.0}, sd[2] = {1.0, 0.5};
    Rng rng(1234);
    constexpr std::size_t M = 100'000;
    std::vector<double> xs(M);
    for (auto& x : xs) {
        const int k = rng.bernoulli(w[0]) ? 0 : 1;
        x = mu[k] + sd[k] * rng.normal();
    }
    const double taus[] = {0.1, 0.5, 0.9};
    const Summary s = summarize(EmpiricalDistribution(xs), taus);

    double mean = 0.0, second = 0.0;
    for (int k = 0; k < 2; ++k) {
        mean += w[k] * mu[k];
        second += w[k] * (sd[k] * sd[k] + mu[k] * mu[k]);
    }
    const double var = second - mean * mean;
    double fourth = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double d = mu[k] - mean, v = sd[k] * sd[k];
        fourth += w[k] * (d * d * d * d + 6 * d * d * v + 3 * v * v);
    }
    EXPECT_LT(std::abs(s.mean - mean), 3 * std::sqrt(var / M));
    EXPECT_LT(std::abs(s.variance - var), 3 * std::sqrt((fourth - var * var) / M));

    auto cdf = [&](double x) {
        double c = 0.0;
        for (int k = 0; k < 2; ++k) c += w[k] * 0.5 * std::erfc(-(x - mu[k]) / (sd[k] * std::numbers::sqrt2));
        return c;
    };
    auto pdf = [&](double x) {
        double p = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double z = (x - mu[k]) / sd[k];
            p += w[k] * std::exp(-0.5 * z * z) / (sd[k] * std::sqrt(2 * std::numbers::pi));
        }
        return p;
    };
    for (std::size_t i = 0; i < 3; ++i) {
        double lo = -20, hi = 20;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < taus[i] ? lo : hi) = mid;
        }
        const double q = 0.5 * (lo + hi);
        const double se = std::sqrt(taus[i] * (1 - taus[i]) / M) / pdf(q);
        EXPECT_LT(std::abs(s.quantiles[i] - q), 3 * se) << "tau " << taus[i];
    }
}
