#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/posterior.hpp"
#include "oracles.hpp"

using namespace bisect_bayes;

namespace {

LabelVector lv(const std::string& s) { return LabelVector::from_canonical(BitVector::from_string(s)); }

/// Posterior by direct products: prior mass from both raw preimages, pairwise likelihood.
std::vector<double> oracle_posterior(int n, const oracle::Edges& e, double p, double q, double r) {
    std::vector<double> w;
    double total = 0.0;
    for (const auto& s : oracle::canonical_strings(n)) {
        const auto b = oracle::bits_of(s);
        const int m = oracle::ones(b);
        const double prior = oracle::bernoulli_raw(n, m, r) + oracle::bernoulli_raw(n, n - m, r);
        w.push_back(prior * oracle::likelihood_product(b, e, p, q));
        total += w.back();
    }
    for (double& x : w) {
        x /= total;
    }
    return w;
}

const std::vector<PriorSpec> kPriors{PriorSpec{FixedBernoulli{0.5}}, PriorSpec{FixedBernoulli{0.3}},
                                     PriorSpec{BetaBernoulli{2.0, 3.0}}, PriorSpec{UniformClassSize{}}};

}  // namespace

TEST(ExactPosterior, MatchesDirectProductOracle) {
    std::mt19937_64 gen(17);
    for (int n : {2, 3, 4, 5, 7}) {
        for (double r : {0.5, 0.35}) {
            const auto e = oracle::random_edges(n, 0.5, gen);
            const Graph x = Graph::from_edges(n, e);
            const auto table = exact_posterior(x, PriorSpec{FixedBernoulli{r}}, EdgeModel(0.75, 0.2));
            const auto want = oracle_posterior(n, e, 0.75, 0.2, r);
            ASSERT_EQ(table.entries(), want.size());
            const auto strings = oracle::canonical_strings(n);
            for (std::size_t i = 0; i < want.size(); ++i) {
                EXPECT_EQ(table.labeling(i).to_string(), strings[i]);
                EXPECT_NEAR(table.probability(i), want[i], 1e-12);
            }
        }
    }
}

TEST(ExactPosterior, SingleVertex) {
    const auto table = exact_posterior(Graph(1), PriorSpec{UniformClassSize{}}, EdgeModel(0.6, 0.2));
    ASSERT_EQ(table.entries(), 1U);
    EXPECT_EQ(table.probability(0), 1.0);
}

TEST(ExactPosterior, EqualsPriorWhenPEqualsQ) {
    std::mt19937_64 gen(4);
    const Graph x = Graph::from_edges(9, oracle::random_edges(9, 0.5, gen));
    for (const auto& prior : kPriors) {
        const auto table = exact_posterior(x, prior, EdgeModel(0.37, 0.37));
        for (std::size_t i = 0; i < table.entries(); ++i) {
            EXPECT_NEAR(table.probability(i), std::exp(log_prior_mass(table.labeling(i), prior)), 1e-12);
        }
    }
}

TEST(ExactPosterior, NormalizedForAllPriors) {
    std::mt19937_64 gen(8);
    for (int n = 1; n <= 12; ++n) {
        const Graph x = Graph::from_edges(n, oracle::random_edges(n, 0.4, gen));
        for (const auto& prior : kPriors) {
            const auto table = exact_posterior(x, prior, EdgeModel(0.8, 0.1));
            const auto probs = table.probabilities();
            EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-10);
            EXPECT_TRUE(table.has_full_support());
            for (double pr : probs) {
                EXPECT_GE(pr, 0.0);
            }
        }
    }
}

TEST(ExactPosterior, GrayCodeMatchesDirectCount) {
    std::mt19937_64 gen(99);
    for (int n = 1; n <= 12; ++n) {
        const Graph x = Graph::from_edges(n, oracle::random_edges(n, 0.5, gen));
        const auto cuts = cut_counts_gray(x);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            ASSERT_EQ(cuts[mask], cut_edges(x, BitVector::from_mask(mask, n))) << "n=" << n;
        }
        const PriorSpec prior{BetaBernoulli{1.5, 0.7}};
        const EdgeModel model(0.66, 0.31);
        const auto gray = exact_posterior(x, prior, model, {kDefaultEnumerationCap, 1, CutCountMethod::GrayCode});
        const auto direct = exact_posterior(x, prior, model, {kDefaultEnumerationCap, 1, CutCountMethod::Direct});
        for (std::size_t i = 0; i < gray.entries(); ++i) {
            ASSERT_EQ(gray.log_unnormalized(i), direct.log_unnormalized(i));
        }
    }
}

TEST(ExactPosterior, ThreadCountDoesNotChangeBits) {
    std::mt19937_64 gen(1);
    const Graph x = Graph::from_edges(16, oracle::random_edges(16, 0.3, gen));
    const PriorSpec prior{FixedBernoulli{0.5}};
    const EdgeModel model(0.6, 0.2);
    const auto one = exact_posterior(x, prior, model, {kDefaultEnumerationCap, 1, CutCountMethod::GrayCode});
    const auto four = exact_posterior(x, prior, model, {kDefaultEnumerationCap, 4, CutCountMethod::GrayCode});
    EXPECT_EQ(one.log_normalizer(), four.log_normalizer());
    for (std::size_t i = 0; i < one.entries(); ++i) {
        ASSERT_EQ(one.probability(i), four.probability(i));
    }
}

TEST(ExactPosterior, CapEnforced) {
    EXPECT_THROW(exact_posterior(Graph(23), PriorSpec{UniformClassSize{}}, EdgeModel(0.5, 0.4)), std::out_of_range);
    EXPECT_THROW(exact_posterior(Graph(10), PriorSpec{UniformClassSize{}}, EdgeModel(0.5, 0.4), {8, 1, {}}),
                 std::out_of_range);
}

TEST(PosteriorMass, Predicates) {
    std::mt19937_64 gen(6);
    const int n = 8;
    const Graph x = Graph::from_edges(n, oracle::random_edges(n, 0.5, gen));
    const auto table = exact_posterior(x, PriorSpec{FixedBernoulli{0.5}}, EdgeModel(0.7, 0.3));
    const auto theta0 = lv("00110101");
    EXPECT_NEAR(posterior_mass(table, sets::All{}), 1.0, 1e-12);
    EXPECT_NEAR(posterior_mass(table, sets::Ball{theta0, n}), 1.0, 1e-12);
    EXPECT_NEAR(posterior_mass(table, sets::Exactly{theta0}), table.probability_of(theta0), 1e-15);
    double by_class = 0.0;
    for (int m = 0; m <= n / 2; ++m) {
        by_class += posterior_mass(table, sets::ClassSize{m});
    }
    EXPECT_NEAR(by_class, 1.0, 1e-12);
    EXPECT_NEAR(posterior_mass(table, sets::Ball{theta0, 1}), table.probability_of(theta0), 1e-15);
    EXPECT_NEAR(posterior_mass(table, sets::Not{sets::Ball{theta0, 2}}) + posterior_mass(table, sets::Ball{theta0, 2}),
                1.0, 1e-12);
    // A lambda predicate works through the LabelVector path.
    const double lam = posterior_mass(table, [](const LabelVector& v) { return v[0]; });
    EXPECT_NEAR(lam, inclusion_probabilities(table)[0], 1e-12);
    EXPECT_NEAR(std::exp(log_posterior_mass(table, sets::ClassSize{2})), posterior_mass(table, sets::ClassSize{2}),
                1e-12);
}

TEST(PosteriorMode, TieBreakAndScaling) {
    const auto flat = PosteriorTable::from_log_weights(6, canonical_masks(6), std::vector<double>(32, -3.0));
    EXPECT_EQ(posterior_mode(flat).to_string(), "000000");

    const int n = 5;
    std::vector<double> w(16, -50.0);
    w[7] = 0.0;
    const auto masks = canonical_masks(n);
    const auto point = PosteriorTable::from_log_weights(n, masks, w);
    EXPECT_EQ(posterior_mode(point), point.labeling(7));
    std::vector<double> shifted = w;
    for (double& v : shifted) {
        v += 1234.5;
    }
    const auto moved = PosteriorTable::from_log_weights(n, masks, shifted);
    EXPECT_EQ(posterior_mode(moved), point.labeling(7));
    for (std::size_t i = 0; i < point.entries(); ++i) {
        EXPECT_NEAR(point.probability(i), moved.probability(i), 1e-14);
    }
}

TEST(PosteriorTable, RejectsBadInput) {
    const int n = 4;
    auto masks = canonical_masks(n);
    std::vector<double> w(masks.size(), 0.0);
    std::swap(masks[1], masks[2]);
    EXPECT_THROW(PosteriorTable::from_log_weights(n, masks, w), std::invalid_argument);
    masks = canonical_masks(n);
    masks[0] = 0b1111;
    EXPECT_THROW(PosteriorTable::from_log_weights(n, masks, w), std::invalid_argument);
    std::vector<double> none(8, -std::numeric_limits<double>::infinity());
    EXPECT_THROW(PosteriorTable::from_log_weights(n, canonical_masks(n), none), std::invalid_argument);
}

TEST(PosteriorMass, RelabelingInvariance) {
    std::mt19937_64 gen(12);
    const int n = 9;
    const PriorSpec prior{BetaBernoulli{1.0, 1.0}};
    const EdgeModel model(0.8, 0.2);
    for (int rep = 0; rep < 10; ++rep) {
        const auto truth = lv(oracle::str_of(oracle::random_canonical(n, gen)));
        const Graph x = sample_graph(truth, model, gen());
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        const Graph y = permute_vertices(x, perm);
        const auto moved = canonicalize(permute_vertices(truth.bits(), perm));
        const double a = exact_posterior(x, prior, model).probability_of(truth);
        const double b = exact_posterior(y, prior, model).probability_of(moved);
        EXPECT_NEAR(a, b, 1e-12);
    }
}

TEST(PosteriorMass, AssortativeGraphRarelyFavoursEmptyClass) {
    const EdgeModel model(0.9, 0.1);
    const auto truth = lv("0000011111");
    int small = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto table = exact_posterior(sample_graph(truth, model, s), PriorSpec{FixedBernoulli{0.5}}, model);
        small += posterior_mass(table, sets::ClassSize{0}) < 0.01;
    }
    EXPECT_GE(small, 195);
}

TEST(PosteriorMode, RecoversPlantedLabeling) {
    const EdgeModel model(0.9, 0.05);
    std::mt19937_64 gen(77);
    int hits = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto truth = lv(oracle::str_of(oracle::random_canonical(10, gen)));
        const auto table = exact_posterior(sample_graph(truth, model, s), PriorSpec{FixedBernoulli{0.5}}, model);
        hits += posterior_mode(table) == truth;
    }
    EXPECT_GE(hits, 190);
}

TEST(LogSumExp, StableAndOrderFixed) {
    std::vector<double> xs{1000.0, 1000.0, -1e9};
    EXPECT_NEAR(detail::log_sum_exp(xs), 1000.0 + std::log(2.0), 1e-12);
    EXPECT_EQ(detail::log_sum_exp(std::vector<double>{}), -std::numeric_limits<double>::infinity());
    std::vector<double> big(20000);
    std::mt19937_64 gen(5);
    for (double& v : big) {
        v = std::normal_distribution<double>(0.0, 3.0)(gen);
    }
    EXPECT_EQ(detail::log_sum_exp(big, 1), detail::log_sum_exp(big, 3));
}
