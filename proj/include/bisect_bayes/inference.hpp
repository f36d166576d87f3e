#ifndef BISECT_BAYES_INFERENCE_HPP
#define BISECT_BAYES_INFERENCE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/posterior.hpp"

namespace bisect_bayes {

struct CredibleSet {
    int n = 0;
    /// Members in the order they were added (decreasing posterior mass).
    std::vector<LabelVector> members;
    double gamma = 0.0;
    double achieved_mass = 0.0;

    bool contains(const LabelVector& theta) const {
        return std::find(members.begin(), members.end(), theta) != members.end();
    }
};

namespace detail {

inline void require_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("gamma = " + format_double(gamma) + " must lie in (0, 1)");
    }
}

/// Entry indices by decreasing mass, ties in lexicographic (table) order.
inline std::vector<std::size_t> mass_order(const PosteriorTable& table) {
    std::vector<std::size_t> order(table.entries());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.log_unnormalized(a) > table.log_unnormalized(b);
    });
    return order;
}

}  // namespace detail

/// Highest-posterior-density set: labelings in decreasing mass (ties
/// lexicographic) until the cumulative mass reaches 1 - gamma.
inline CredibleSet hpd_credible_set(const PosteriorTable& table, double gamma) {
    detail::require_gamma(gamma);
    CredibleSet out;
    out.n = table.size();
    out.gamma = gamma;
    const double target = 1.0 - gamma;
    for (std::size_t idx : detail::mass_order(table)) {
        out.members.push_back(table.labeling(idx));
        out.achieved_mass += table.probability(idx);
        if (out.achieved_mass >= target) {
            break;
        }
    }
    return out;
}

struct EnlargedSet {
    CredibleSet base;
    int radius = 0;
    /// Lexicographic order.
    std::vector<LabelVector> members;

    bool contains(const LabelVector& theta) const { return std::binary_search(members.begin(), members.end(), theta); }
};

/// The base set together with every labeling at symmetric distance < k from
/// some base member. k = 0 returns the base.
inline EnlargedSet enlarge(const CredibleSet& set, int k, int cap = kDefaultEnumerationCap) {
    if (k < 0) {
        throw std::invalid_argument("enlargement radius must be nonnegative");
    }
    if (set.members.empty()) {
        throw std::invalid_argument("enlarge: empty credible set");
    }
    EnlargedSet out;
    out.base = set;
    out.radius = k;
    const int n = set.n;
    std::vector<std::uint64_t> base_masks;
    base_masks.reserve(set.members.size());
    for (const auto& m : set.members) {
        base_masks.push_back(m.mask());
    }
    std::sort(base_masks.begin(), base_masks.end());
    for (std::uint64_t mask : canonical_masks(n, cap)) {
        bool keep = std::binary_search(base_masks.begin(), base_masks.end(), mask);
        for (std::size_t b = 0; !keep && b < base_masks.size(); ++b) {
            const int h = std::popcount(mask ^ base_masks[b]);
            keep = std::min(h, n - h) < k;
        }
        if (keep) {
            out.members.push_back(LabelVector::from_mask(mask, n));
        }
    }
    return out;
}

struct ConfidenceBound {
    double value = 0.0;
    double clipped() const noexcept { return std::clamp(value, 0.0, 1.0); }
};

/// 1 - x / (1 - gamma): coverage guaranteed for a (1 - gamma)-credible set
/// when E Pi({theta} | X) >= 1 - x, and for its k-enlargement when
/// E Pi(B_k(theta) | X) >= 1 - x.
inline ConfidenceBound confidence_lower_bound(double x, double gamma) {
    detail::require_gamma(gamma);
    return {1.0 - x / (1.0 - gamma)};
}

/// log Pi(B | X) - log Pi(A | X) for disjoint A and B.
template <class A, class B>
double posterior_odds(const PosteriorTable& table, const A& a_set, const B& b_set) {
    std::vector<double> log_a;
    std::vector<double> log_b;
    for (std::size_t i = 0; i < table.entries(); ++i) {
        const bool in_a = table_contains(table, i, a_set);
        const bool in_b = table_contains(table, i, b_set);
        if (in_a && in_b) {
            throw std::invalid_argument("posterior_odds: the sets overlap at " + table.labeling(i).to_string());
        }
        if (in_a) {
            log_a.push_back(table.log_unnormalized(i));
        } else if (in_b) {
            log_b.push_back(table.log_unnormalized(i));
        }
    }
    const double la = detail::log_sum_exp(log_a);
    if (la == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("posterior_odds: the null set has zero posterior mass");
    }
    return detail::log_sum_exp(log_b) - la;
}

struct OddsErrorBounds {
    double one_sided = 0.0;
    std::optional<double> two_term;
};

/// P(F > t) <= 2a(1 + 1/t) when E Pi(A | X) >= 1 - a, and
/// P(F > t) <= 2a + 2b/t when additionally E Pi(B | X) <= b.
inline OddsErrorBounds odds_error_bounds(double a, double t, std::optional<double> b = std::nullopt) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("odds threshold must be positive");
    }
    OddsErrorBounds out{2.0 * a * (1.0 + 1.0 / t), std::nullopt};
    if (b) {
        out.two_term = 2.0 * a + 2.0 * *b / t;
    }
    return out;
}

struct OddsTestResult {
    double log_f = 0.0;
    double threshold = 1.0;
    bool reject_null = false;
    /// Filled in when the caller supplies estimates of a_n (and b_n).
    std::optional<double> error_bound_one_sided;
    std::optional<double> error_bound_two_term;
};

/// Tests H0: theta in Theta_{n,m0} against H1: theta in Theta_{n,m1}, or
/// against theta not in Theta_{n,m0} when m1 is empty. Rejects H0 when
/// log F > log t.
inline OddsTestResult class_size_test(const PosteriorTable& table, int m0, std::optional<int> m1, double threshold) {
    const int half = table.size() / 2;
    if (m0 < 0 || m0 > half || (m1 && (*m1 < 0 || *m1 > half))) {
        throw std::invalid_argument("class sizes must lie in 0..floor(n/2) = " + std::to_string(half));
    }
    if (m1 && *m1 == m0) {
        throw std::invalid_argument("class_size_test: m0 and m1 must differ");
    }
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("odds threshold must be positive");
    }
    OddsTestResult out;
    out.threshold = threshold;
    out.log_f = m1 ? posterior_odds(table, sets::ClassSize{m0}, sets::ClassSize{*m1})
                   : posterior_odds(table, sets::ClassSize{m0}, sets::Not{sets::ClassSize{m0}});
    out.reject_null = out.log_f > std::log(threshold);
    return out;
}

inline OddsTestResult class_size_test(const Graph& x, const PriorSpec& prior, const EdgeModel& model, int m0,
                                      std::optional<int> m1, double threshold,
                                      const EnumerationOptions& options = {}) {
    return class_size_test(exact_posterior(x, prior, model, options), m0, m1, threshold);
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_INFERENCE_HPP
