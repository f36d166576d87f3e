#ifndef BISECT_BAYES_BOUNDS_HPP
#define BISECT_BAYES_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/priors.hpp"

namespace bisect_bayes {

/// A bound on an expected posterior mass or a probability, as evaluated.
/// The value is not clipped; value_clipped = min(value, 1).
struct BoundReport {
    std::string name;
    double value = 0.0;
    double log_value = 0.0;
    std::vector<std::pair<std::string, double>> inputs;

    double value_clipped() const noexcept { return std::min(value, 1.0); }

    double input(const std::string& key) const {
        for (const auto& [k, v] : inputs) {
            if (k == key) {
                return v;
            }
        }
        throw std::out_of_range("bound report has no input '" + key + "'");
    }
};

namespace detail {

inline BoundReport make_report(std::string name, double log_value, std::vector<std::pair<std::string, double>> inputs) {
    return {std::move(name), std::exp(log_value), log_value, std::move(inputs)};
}

inline constexpr double kLogTwoSqrtTwo = 1.5 * std::numbers::ln2;

}  // namespace detail

/// rho(p, q) = sqrt(pq) + sqrt((1-p)(1-q)), the Hellinger affinity of
/// Bernoulli(p) and Bernoulli(q).
inline double hellinger_affinity(double p, double q) {
    detail::require_open_unit(p, "p");
    detail::require_open_unit(q, "q");
    return std::sqrt(p * q) + std::sqrt((1.0 - p) * (1.0 - q));
}

inline double hellinger_affinity(const EdgeModel& model) { return hellinger_affinity(model.p(), model.q()); }

/// -log rho(p, q), the default dense-phase constant c.
inline double neg_log_affinity(const EdgeModel& model) { return -std::log(hellinger_affinity(model)); }

/// 1 - (sqrt p - sqrt q)^2 / 2 + pq / 4, which dominates rho(p, q).
inline double rho_upper_bound(double p, double q) {
    detail::require_open_unit(p, "p");
    detail::require_open_unit(q, "q");
    const double gap = std::sqrt(p) - std::sqrt(q);
    return 1.0 - 0.5 * gap * gap + 0.25 * p * q;
}

/// Bound on E_theta Pi(S | X) for theta outside S:
/// rho^B * sum_{eta in S} sqrt(pi(eta) / pi(theta)), B = min_{eta in S} k(n - k).
inline BoundReport prop21_bound(const LabelVector& theta, std::span<const LabelVector> s, const PriorSpec& prior,
                                const EdgeModel& model) {
    if (s.empty()) {
        throw std::invalid_argument("prop21_bound: the set S must be nonempty");
    }
    const int n = theta.size();
    std::int64_t b = -1;
    std::vector<double> half_log_ratio;
    half_log_ratio.reserve(s.size());
    const double log_pi_theta = log_prior_mass(theta, prior);
    for (const auto& eta : s) {
        if (eta == theta) {
            throw std::invalid_argument("prop21_bound: theta must not belong to S");
        }
        const std::int64_t k = hamming(theta, eta);
        const std::int64_t d = k * (n - k);
        b = b < 0 ? d : std::min(b, d);
        half_log_ratio.push_back(0.5 * (log_prior_mass(eta, prior) - log_pi_theta));
    }
    const double hi = *std::max_element(half_log_ratio.begin(), half_log_ratio.end());
    double acc = 0.0;
    for (double h : half_log_ratio) {
        acc += std::exp(h - hi);
    }
    const double log_sum = hi + std::log(acc);
    const double rho = hellinger_affinity(model);
    return detail::make_report("prop21", static_cast<double>(b) * std::log(rho) + log_sum,
                               {{"n", n},
                                {"p", model.p()},
                                {"q", model.q()},
                                {"rho", rho},
                                {"B", static_cast<double>(b)},
                                {"set_size", static_cast<double>(s.size())}});
}

/// 2 n^(1 - alpha/2) exp(n^(1 - alpha/2)), valid when -log rho >= alpha log n / n
/// under the uniform prior.
inline BoundReport thm41_uniform_bound(int n, double alpha) {
    if (n < 2) {
        throw std::invalid_argument("thm41_uniform_bound: n must be at least 2");
    }
    const double log_base = (1.0 - alpha / 2.0) * std::log(static_cast<double>(n));
    return detail::make_report("thm41_uniform", std::numbers::ln2 + log_base + std::exp(log_base),
                               {{"n", n}, {"alpha", alpha}});
}

/// alpha with -log rho = alpha log n / n.
inline double thm41_alpha_from_model(int n, const EdgeModel& model) {
    return neg_log_affinity(model) * n / std::log(static_cast<double>(n));
}

/// 2 sqrt(2) n exp(-(2c - g) n / 4) exp(n exp(-c n / 2)), for c <= -log rho
/// and g admissible for the prior.
inline BoundReport thm41_dense_bound(int n, double c, double g) {
    if (n < 2) {
        throw std::invalid_argument("thm41_dense_bound: n must be at least 2");
    }
    const double nn = static_cast<double>(n);
    const double log_value =
        detail::kLogTwoSqrtTwo + std::log(nn) - (2.0 * c - g) * nn / 4.0 + nn * std::exp(-c * nn / 2.0);
    return detail::make_report("thm41_dense", log_value, {{"n", n}, {"c", c}, {"g", g}});
}

/// ((sqrt a - sqrt b)^2 - 4 - a b log n / (2n)) log n; exact recovery under
/// the uniform prior when this diverges.
inline double thm41_ch_sufficient(double a, double b, int n) {
    if (n < 2 || !(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("thm41_ch_sufficient: need a, b > 0 and n >= 2");
    }
    const double ln = std::log(static_cast<double>(n));
    const double gap = std::sqrt(a) - std::sqrt(b);
    return (gap * gap - 4.0 - a * b * ln / (2.0 * n)) * ln;
}

namespace detail {

inline void require_ball_fraction(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ball fraction alpha = " + format_double(alpha) + " must lie in (0, 1)");
    }
}

}  // namespace detail

/// Radius k_n = ceil(alpha n) of the ball whose complement the almost-exact
/// bounds control.
inline int ball_radius(int n, double alpha) {
    detail::require_ball_fraction(alpha);
    return static_cast<int>(std::ceil(alpha * n - 1e-12));
}

/// 2 sqrt(2) exp(-alpha n (log alpha + beta/2 - 1 - g/alpha) / 4), bounding
/// E Pi(complement of B_{k_n} | X) for k_n >= alpha n and -log rho >= beta / n.
inline BoundReport thm42_bound(int n, double alpha, double beta, double g) {
    detail::require_ball_fraction(alpha);
    const double nn = static_cast<double>(n);
    const double log_value = detail::kLogTwoSqrtTwo - alpha * nn * (std::log(alpha) + beta / 2.0 - 1.0 - g / alpha) / 4.0;
    return detail::make_report("thm42", log_value, {{"n", n}, {"alpha", alpha}, {"beta", beta}, {"g", g}});
}

/// Kesten-Stigum form with p = c/n, q = d/n:
/// 2 sqrt(2) exp(-alpha n (log alpha + (sqrt c - sqrt d)^2 / 4 - c d / (8n) - 1 - g/alpha) / 4).
inline BoundReport thm42_ks_bound(int n, double alpha, double c, double d, double g) {
    detail::require_ball_fraction(alpha);
    const double nn = static_cast<double>(n);
    const double gap = std::sqrt(c) - std::sqrt(d);
    const double inner = std::log(alpha) + gap * gap / 4.0 - c * d / (8.0 * nn) - 1.0 - g / alpha;
    return detail::make_report("thm42_ks", detail::kLogTwoSqrtTwo - alpha * nn * inner / 4.0,
                               {{"n", n}, {"alpha", alpha}, {"c", c}, {"d", d}, {"g", g}});
}

struct Sandwich {
    double lower = 0.0;
    double mid = 0.0;
    double upper = 0.0;
};

/// ((sqrt c - sqrt d)^2, (c - d)^2 / (c + d), 2 (sqrt c - sqrt d)^2); the
/// three are ordered, so the Kesten-Stigum signal diverges iff the
/// squared root gap does.
inline Sandwich ks_equivalence_sandwich(double c, double d) {
    if (!(c > 0.0) || !(d > 0.0)) {
        throw std::invalid_argument("ks_equivalence_sandwich: c and d must be positive");
    }
    const double gap = std::sqrt(c) - std::sqrt(d);
    return {gap * gap, (c - d) * (c - d) / (c + d), 2.0 * gap * gap};
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_BOUNDS_HPP
