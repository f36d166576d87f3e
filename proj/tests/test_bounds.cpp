#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bisect_bayes/bounds.hpp"
#include "bisect_bayes/checks.hpp"
#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/posterior.hpp"
#include "oracles.hpp"

using namespace bisect_bayes;

namespace {

LabelVector lv(const std::string& s) { return LabelVector::from_canonical(BitVector::from_string(s)); }

}  // namespace

TEST(Affinity, Values) {
    EXPECT_DOUBLE_EQ(hellinger_affinity(0.5, 0.5), 1.0);
    EXPECT_NEAR(hellinger_affinity(0.9, 0.1), 0.6, 1e-15);
    for (int i = 1; i < 100; ++i) {
        for (int j = 1; j < 100; ++j) {
            const double p = i / 100.0;
            const double q = j / 100.0;
            const double rho = hellinger_affinity(p, q);
            EXPECT_DOUBLE_EQ(rho, hellinger_affinity(q, p));
            EXPECT_GT(rho, 0.0);
            EXPECT_LE(rho, 1.0 + 1e-15);
            if (i != j) {
                EXPECT_LT(rho, 1.0);
            }
            EXPECT_GE(rho_upper_bound(p, q), rho);
        }
    }
    EXPECT_THROW(hellinger_affinity(0.0, 0.5), std::invalid_argument);
}

TEST(Affinity, UpperBound) {
    EXPECT_NEAR(rho_upper_bound(0.3, 0.3), 1.0 + 0.09 / 4.0, 1e-15);
    const double gap = std::sqrt(0.9) - std::sqrt(0.1);
    EXPECT_NEAR(rho_upper_bound(0.9, 0.1), 1.0 - 0.5 * gap * gap + 0.0225, 1e-15);
    EXPECT_NEAR(rho_upper_bound(0.9, 0.1), 0.8225, 1e-12);
}

TEST(Prop21, Examples) {
    const int n = 7;
    const auto theta = lv("0001011");
    const EdgeModel model(0.8, 0.3);
    const PriorSpec uniform{FixedBernoulli{0.5}};
    const std::vector<LabelVector> one{lv("0001010")};
    const auto r = prop21_bound(theta, one, uniform, model);
    EXPECT_NEAR(r.value, std::pow(hellinger_affinity(model), n - 1), 1e-14);
    EXPECT_EQ(r.input("B"), n - 1);

    std::vector<LabelVector> others;
    for (const auto& v : all_labelings(n)) {
        if (v != theta) {
            others.push_back(v);
        }
    }
    EXPECT_NEAR(prop21_bound(theta, others, uniform, EdgeModel(0.4, 0.4)).value, static_cast<double>(others.size()),
                1e-9);
    EXPECT_THROW(prop21_bound(theta, std::vector<LabelVector>{}, uniform, model), std::invalid_argument);
    EXPECT_THROW(prop21_bound(theta, std::vector<LabelVector>{theta}, uniform, model), std::invalid_argument);
}

TEST(Prop21, ComputesBAsMinimumOverPairs) {
    std::mt19937_64 gen(3);
    const int n = 8;
    const PriorSpec prior{BetaBernoulli{1.0, 1.0}};
    const EdgeModel model(0.7, 0.2);
    const auto all = all_labelings(n);
    for (int rep = 0; rep < 20; ++rep) {
        const auto theta = all[gen() % all.size()];
        std::vector<LabelVector> s;
        for (const auto& v : all) {
            if (v != theta && gen() % 5 == 0) {
                s.push_back(v);
            }
        }
        if (s.empty()) {
            continue;
        }
        long b = -1;
        double sum = 0.0;
        for (const auto& eta : s) {
            const auto [d1, d2] = oracle::discrepancy(oracle::bits_of(theta.to_string()), oracle::bits_of(eta.to_string()));
            b = b < 0 ? d1 + d2 : std::min(b, d1 + d2);
            sum += std::sqrt(std::exp(log_prior_mass(eta, prior) - log_prior_mass(theta, prior)));
        }
        const auto r = prop21_bound(theta, s, prior, model);
        EXPECT_EQ(r.input("B"), static_cast<double>(b));
        EXPECT_NEAR(r.value / (std::pow(hellinger_affinity(model), static_cast<double>(b)) * sum), 1.0, 1e-10);
    }
}

TEST(Thm41, UniformBound) {
    EXPECT_NEAR(thm41_uniform_bound(10, 4.0).value, 0.2 * std::exp(0.1), 1e-12);
    EXPECT_NEAR(thm41_uniform_bound(10, 4.0).value, 0.2210, 1e-4);
    for (int n : {2, 10, 1000}) {
        EXPECT_NEAR(thm41_uniform_bound(n, 2.0).value, 2.0 * std::numbers::e, 1e-12);
    }
    EXPECT_THROW(thm41_uniform_bound(1, 3.0), std::invalid_argument);
}

TEST(Thm41, DenseBoundMonotoneAndMatchesNaive) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
        const double c = 0.05 * i;
        const double v = thm41_dense_bound(20, c, 0.0).value;
        EXPECT_LT(v, prev);
        prev = v;
    }
    for (int n : {2, 5, 12, 30}) {
        for (double c : {0.1, 0.5, 1.0, 2.0}) {
            for (double g : {0.0, 1.0 + std::numbers::ln2}) {
                const double naive = 2.0 * std::sqrt(2.0) * n * std::exp(-(2 * c - g) * n / 4.0) *
                                     std::exp(n * std::exp(-c * n / 2.0));
                EXPECT_NEAR(thm41_dense_bound(n, c, g).value / naive, 1.0, 1e-9);
            }
        }
    }
    // Far beyond double range, the log form stays finite.
    EXPECT_TRUE(std::isfinite(thm41_dense_bound(100000, 1.0, 0.0).log_value));
}

TEST(Thm41, ChSufficient) {
    EXPECT_LT(thm41_ch_sufficient(3.0, 3.0, 100), 0.0);
    const double l = std::log(100.0);
    EXPECT_NEAR(thm41_ch_sufficient(16.0, 1.0, 100), (9.0 - 4.0 - 16.0 * l / 200.0) * l, 1e-12);
    EXPECT_NEAR(thm41_ch_sufficient(16.0, 1.0, 100), 21.3, 0.05);
    for (double b : {0.5, 1.0, 2.0}) {
        double prev = -1e300;
        for (int i = 0; i < 100; ++i) {
            const double a = b + 0.1 + 0.2 * i;
            const double v = thm41_ch_sufficient(a, b, 2000);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(Thm42, FormulaAndMonotonicity) {
    const auto r = thm42_bound(50, 0.5, 20.0, 0.0);
    const double exponent = -0.5 * 50 * (std::log(0.5) + 10.0 - 1.0) / 4.0;
    EXPECT_NEAR(r.log_value, std::log(2.0 * std::sqrt(2.0)) + exponent, 1e-12);
    EXPECT_NEAR(exponent, -51.918, 1e-3);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i) {
        const double v = thm42_bound(30, 0.3, 0.5 * i, 1.0).value;
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_THROW(thm42_bound(10, 0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(thm42_bound(10, 1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(thm42_ks_bound(10, 1.5, 9.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_EQ(ball_radius(10, 0.3), 3);
    EXPECT_EQ(ball_radius(10, 0.25), 3);
    const double naive = 2.0 * std::sqrt(2.0) *
                         std::exp(-0.4 * 12 * (std::log(0.4) + 0.25 - 4.0 / 96.0 - 1.0 - 0.5 / 0.4) / 4.0);
    EXPECT_NEAR(thm42_ks_bound(12, 0.4, 4.0, 1.0, 0.5).value / naive, 1.0, 1e-12);
}

TEST(Thm42, KsBoundDominatesTailMass) {
    const int n = 10;
    const double alpha = 0.3;
    const EdgeModel model = edge_probs_from_sparsity({SparsityRegime::KestenStigum, 9.0, 1.0, n});
    const PriorSpec prior{FixedBernoulli{0.5}};
    const double bound = thm42_ks_bound(n, alpha, 9.0, 1.0, 0.0).value;
    const auto truth = lv("0001110010");
    const int k = ball_radius(n, alpha);
    double sum = 0.0;
    double sq = 0.0;
    const int reps = 300;
    for (int s = 0; s < reps; ++s) {
        const auto table = exact_posterior(sample_graph(truth, model, static_cast<std::uint64_t>(s)), prior, model);
        const double tail = posterior_mass(table, sets::Not{sets::Ball{truth, k}});
        sum += tail;
        sq += tail * tail;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    EXPECT_LE(mean, bound + 3.0 * se);
}

TEST(Sandwich, Examples) {
    const auto eq = ks_equivalence_sandwich(3.0, 3.0);
    EXPECT_EQ(eq.lower, 0.0);
    EXPECT_EQ(eq.mid, 0.0);
    EXPECT_EQ(eq.upper, 0.0);
    const auto s = ks_equivalence_sandwich(4.0, 1.0);
    EXPECT_DOUBLE_EQ(s.lower, 1.0);
    EXPECT_DOUBLE_EQ(s.mid, 1.8);
    EXPECT_DOUBLE_EQ(s.upper, 2.0);
    EXPECT_THROW(ks_equivalence_sandwich(0.0, 1.0), std::invalid_argument);
}

TEST(GridChecks, AllPass) {
    for (const auto& g : verify_all()) {
        EXPECT_TRUE(g.passed()) << g.name << ": " << g.first_violation;
        EXPECT_GT(g.points, 0U);
    }
}

TEST(GridChecks, SpotValues) {
    // n = 4, x = 1/2: C(4,1) x^3 + C(4,2) x^4 + C(4,3) x^3.
    EXPECT_NEAR(binomial_power_sum(4, 0.5), 4 * 0.125 + 6 * 0.0625 + 4 * 0.125, 1e-15);
    EXPECT_NEAR(binomial_power_sum(4, 0.5), 1.375, 1e-15);
    EXPECT_NEAR(2.0 * (std::pow(1.25, 4) - 1.0), 2.8828, 1e-4);
    EXPECT_LE(binomial_power_sum(4, 0.5), 2.0 * (std::pow(1.25, 4) - 1.0));
}

TEST(GridCheck, ReportsViolations) {
    GridCheck g{"t"};
    g.check(1.0, 2.0, [] { return std::string("a"); });
    g.check(3.0, 2.0, [] { return std::string("b"); });
    EXPECT_FALSE(g.passed());
    EXPECT_EQ(g.violations, 1U);
    EXPECT_NE(g.first_violation.find("b"), std::string::npos);
}

TEST(HellingerTransform, ExhaustiveIdentity) {
    std::mt19937_64 gen(4);
    for (int n = 2; n <= 5; ++n) {
        const auto all = all_labelings(n);
        for (int rep = 0; rep < 8; ++rep) {
            const auto& t = all[gen() % all.size()];
            const auto& e = all[gen() % all.size()];
            const double p = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
            const double q = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
            const EdgeModel model(p, q);
            const auto d = discrepancy_sets(t, e);
            EXPECT_NEAR(hellinger_transform_exhaustive(t.bits(), e.bits(), model),
                        std::pow(hellinger_affinity(model), static_cast<double>(d.total())), 1e-10);
        }
    }
}
