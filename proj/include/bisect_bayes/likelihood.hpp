#ifndef BISECT_BAYES_LIKELIHOOD_HPP
#define BISECT_BAYES_LIKELIHOOD_HPP

#include <cstdint>

#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/graph.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/random.hpp"

namespace bisect_bayes {

/// Log-likelihood from sufficient counts: with m ones among n vertices and
/// `cut` of the `edges` crossing the classes, the within-class pairs number
/// C(m,2) + C(n-m,2) and the between-class pairs m(n-m).
inline double log_likelihood_from_counts(std::int64_t n, std::int64_t m, std::int64_t edges, std::int64_t cut,
                                         const EdgeModel& model) noexcept {
    const std::int64_t between_pairs = m * (n - m);
    const std::int64_t within_pairs = n * (n - 1) / 2 - between_pairs;
    const std::int64_t within_edges = edges - cut;
    return static_cast<double>(within_edges) * model.log_p() +
           static_cast<double>(within_pairs - within_edges) * model.log_1mp() +
           static_cast<double>(cut) * model.log_q() + static_cast<double>(between_pairs - cut) * model.log_1mq();
}

/// log p_theta(X): sum over pairs i<j of X_ij log Q_ij + (1 - X_ij) log(1 - Q_ij).
/// Invariant under complementing theta.
inline double log_likelihood(const BitVector& theta, const Graph& x, const EdgeModel& model) {
    check_same_size(theta.size(), x.size(), "log_likelihood");
    return log_likelihood_from_counts(x.size(), theta.count(), static_cast<std::int64_t>(x.edge_count()),
                                      cut_edges(x, theta), model);
}

inline double log_likelihood(const LabelVector& theta, const Graph& x, const EdgeModel& model) {
    return log_likelihood(theta.bits(), x, model);
}

/// S and T count present edges over D_1 and D_2; lambda = log((1-p)/p) + log(q/(1-q)).
struct LikelihoodRatioStats {
    std::int64_t s = 0;
    std::int64_t t = 0;
    std::int64_t d1 = 0;
    std::int64_t d2 = 0;
    double lambda = 0.0;
};

struct LikelihoodRatio {
    double log_ratio = 0.0;
    LikelihoodRatioStats stats;
};

/// log(p_eta / p_theta)(X) through the two binomial counts:
/// (S - T) lambda + (d1 - d2) log((1-q)/(1-p)).
inline LikelihoodRatio log_likelihood_ratio(const BitVector& theta, const BitVector& eta, const Graph& x,
                                            const EdgeModel& model) {
    check_same_size(theta.size(), eta.size(), "log_likelihood_ratio");
    check_same_size(theta.size(), x.size(), "log_likelihood_ratio");
    const int n = x.size();
    const auto& tw = theta.words();
    const auto& ew = eta.words();
    // Each pair is seen from both endpoints, so the sums below double count.
    std::int64_t s2 = 0;
    std::int64_t t2 = 0;
    for (int i = 0; i < n; ++i) {
        const bool ti = theta[i];
        const bool ei = eta[i];
        const auto r = x.row(i);
        for (std::size_t k = 0; k < tw.size(); ++k) {
            const std::uint64_t same_t = ti ? tw[k] : ~tw[k];
            const std::uint64_t same_e = ei ? ew[k] : ~ew[k];
            s2 += std::popcount(r[k] & same_t & ~same_e);
            t2 += std::popcount(r[k] & ~same_t & same_e);
        }
    }
    LikelihoodRatio out;
    const DiscrepancyCounts d = discrepancy_sets(theta, eta);
    out.stats = {s2 / 2, t2 / 2, d.d1, d.d2, model.lambda()};
    out.log_ratio = static_cast<double>(out.stats.s - out.stats.t) * out.stats.lambda +
                    static_cast<double>(d.d1 - d.d2) * (model.log_1mq() - model.log_1mp());
    return out;
}

inline LikelihoodRatio log_likelihood_ratio(const LabelVector& theta, const LabelVector& eta, const Graph& x,
                                            const EdgeModel& model) {
    return log_likelihood_ratio(theta.bits(), eta.bits(), x, model);
}

/// Draws X ~ P_theta: each pair {i,j}, visited in lexicographic order, is an
/// edge with probability p if theta_i = theta_j and q otherwise.
inline Graph sample_graph(const BitVector& theta, const EdgeModel& model, std::uint64_t seed) {
    const int n = theta.size();
    Graph g(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double prob = theta[i] == theta[j] ? model.p() : model.q();
            if (rng.uniform() < prob) {
                g.add_edge(i, j);
            }
        }
    }
    return g;
}

inline Graph sample_graph(const LabelVector& theta, const EdgeModel& model, std::uint64_t seed) {
    return sample_graph(theta.bits(), model, seed);
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_LIKELIHOOD_HPP
