#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/priors.hpp"
#include "oracles.hpp"

using namespace bisect_bayes;

namespace {

const std::vector<PriorSpec>& prior_battery() {
    static const std::vector<PriorSpec> priors{
        PriorSpec{FixedBernoulli{0.5}},      PriorSpec{FixedBernoulli{0.2}},      PriorSpec{FixedBernoulli{0.93}},
        PriorSpec{BetaBernoulli{1.0, 1.0}},  PriorSpec{BetaBernoulli{2.0, 3.0}},  PriorSpec{BetaBernoulli{0.3, 7.0}},
        PriorSpec{UniformClassSize{}}};
    return priors;
}

/// Independent per-labeling mass: both raw preimages, multiplied out.
double oracle_mass(const PriorSpec& prior, int n, int m) {
    if (const auto* b = std::get_if<FixedBernoulli>(&prior.variant())) {
        return oracle::bernoulli_raw(n, m, b->r) + oracle::bernoulli_raw(n, n - m, b->r);
    }
    if (const auto* b = std::get_if<BetaBernoulli>(&prior.variant())) {
        return oracle::beta_bernoulli_raw(n, m, b->alpha, b->beta) +
               oracle::beta_bernoulli_raw(n, n - m, b->alpha, b->beta);
    }
    int count = 0;
    for (const auto& s : oracle::canonical_strings(n)) {
        count += oracle::ones(oracle::bits_of(s)) == m;
    }
    return 1.0 / (1.0 + n / 2) / count;
}

}  // namespace

TEST(Prior, Examples) {
    const PriorSpec half{FixedBernoulli{0.5}};
    for (const auto& theta : all_labelings(5)) {
        EXPECT_NEAR(log_prior_mass(theta, half), std::log(1.0 / 16.0), 1e-14);
    }
    const PriorSpec beta{BetaBernoulli{1.0, 1.0}};
    EXPECT_NEAR(std::exp(log_class_size_mass(4, 0, beta)), 0.4, 1e-12);
    EXPECT_NEAR(std::exp(log_class_size_mass(4, 1, beta)), 0.4, 1e-12);
    EXPECT_NEAR(std::exp(log_class_size_mass(4, 2, beta)), 0.2, 1e-12);
    const PriorSpec uni{UniformClassSize{}};
    for (int m = 0; m <= 2; ++m) {
        EXPECT_NEAR(std::exp(log_class_size_mass(4, m, uni)), 1.0 / 3.0, 1e-14);
    }
}

TEST(Prior, NormalizedAndMatchesOracle) {
    for (const auto& prior : prior_battery()) {
        for (int n = 1; n <= 12; ++n) {
            double total = 0.0;
            for (const auto& theta : all_labelings(n)) {
                const double mass = std::exp(log_prior_mass(theta, prior));
                total += mass;
                ASSERT_NEAR(mass / oracle_mass(prior, n, theta.class_size()), 1.0, 1e-10)
                    << prior.to_string() << " n=" << n << " " << theta.to_string();
            }
            EXPECT_NEAR(total, 1.0, 1e-10) << prior.to_string() << " n=" << n;
        }
    }
}

TEST(Prior, LargeNIsFinite) {
    for (const auto& prior : prior_battery()) {
        for (int m = 0; m <= 250; m += 25) {
            EXPECT_TRUE(std::isfinite(log_prior_mass_for_class_size(500, m, prior))) << prior.to_string();
        }
    }
}

TEST(Prior, Parse) {
    EXPECT_EQ(PriorSpec::parse("bernoulli:r=0.5").to_string(), "bernoulli:r=0.5");
    EXPECT_EQ(PriorSpec::parse("beta:alpha=1,beta=2").to_string(), "beta:alpha=1,beta=2");
    EXPECT_EQ(PriorSpec::parse("uniform-m").to_string(), "uniform-m");
    EXPECT_TRUE(PriorSpec::parse("bernoulli:r=0.5").is_uniform_on_labelings());
    EXPECT_FALSE(PriorSpec::parse("uniform-m").is_uniform_on_labelings());
    for (const char* bad : {"bernoulli:r=1", "bernoulli:r=0", "bernoulli:r=abc", "beta:alpha=0,beta=1",
                            "beta:alpha=1", "gauss", "bernoulli:r=0.5x", ""}) {
        EXPECT_THROW(PriorSpec::parse(bad), std::invalid_argument) << bad;
    }
}

TEST(GConstant, Values) {
    EXPECT_EQ(g_constant(PriorSpec{FixedBernoulli{0.5}}).value, 0.0);
    EXPECT_NEAR(g_constant(PriorSpec{FixedBernoulli{0.2}}).value, std::log(4.0), 1e-14);
    EXPECT_NEAR(g_constant(PriorSpec{FixedBernoulli{0.8}}).value, std::log(4.0), 1e-14);
    EXPECT_NEAR(g_constant(PriorSpec{BetaBernoulli{2.0, 3.0}}).value, 2.0 + 2.0 * std::numbers::ln2, 1e-14);
    EXPECT_NEAR(g_constant(PriorSpec{UniformClassSize{}}).value, 1.0 + std::numbers::ln2, 1e-14);
}

TEST(PriorRatioBound, DominatesExhaustiveMaximum) {
    EXPECT_EQ(prior_mass_ratio_bound(PriorSpec{FixedBernoulli{0.5}}, 9), 1.0);
    EXPECT_NEAR(prior_mass_ratio_bound(PriorSpec{BetaBernoulli{1.0, 1.0}}, 6), std::pow(2.0 * std::numbers::e, 6), 1e-6);
    EXPECT_NEAR(prior_mass_ratio_bound(PriorSpec{UniformClassSize{}}, 6), std::pow(2.0 * std::numbers::e, 3), 1e-9);
    for (const auto& prior : prior_battery()) {
        for (int n = 1; n <= 12; ++n) {
            double lo = 1e300;
            double hi = -1e300;
            for (int m = 0; m <= n / 2; ++m) {
                const double l = log_prior_mass_for_class_size(n, m, prior);
                lo = std::min(lo, l);
                hi = std::max(hi, l);
            }
            EXPECT_LE(hi - lo, log_prior_mass_ratio_bound(prior, n) + 1e-12) << prior.to_string() << " n=" << n;
        }
    }
}

TEST(PriorBernoulli, DependsOnlyOnClassSize) {
    const PriorSpec prior{FixedBernoulli{0.3}};
    for (int n = 1; n <= 10; ++n) {
        std::vector<double> seen(static_cast<std::size_t>(n / 2 + 1), std::nan(""));
        for (const auto& theta : all_labelings(n)) {
            double& s = seen[static_cast<std::size_t>(theta.class_size())];
            const double l = log_prior_mass(theta, prior);
            if (std::isnan(s)) {
                s = l;
            }
            EXPECT_EQ(l, s);
        }
    }
}

TEST(PriorBernoulli, TieFoldsBothTerms) {
    const double r = 0.3;
    const double want = std::log(2.0 * std::pow(r, 3) * std::pow(1 - r, 3));
    EXPECT_NEAR(log_prior_mass_for_class_size(6, 3, PriorSpec{FixedBernoulli{r}}), want, 1e-13);
}
