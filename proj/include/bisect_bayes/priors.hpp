#ifndef BISECT_BAYES_PRIORS_HPP
#define BISECT_BAYES_PRIORS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/labeling.hpp"

namespace bisect_bayes {

namespace detail {

/// log Gamma for positive arguments. glibc's lgamma writes the global
/// signgam, so the reentrant variant is used where it exists.
inline double log_gamma(double x) noexcept {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

inline double log_beta(double a, double b) noexcept { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

inline double log_add_exp(double a, double b) noexcept {
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

/// log C(n, k) through log-gamma.
inline double log_binomial(int n, int k) noexcept {
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

}  // namespace detail

/// log |Theta_{n,m}|.
inline double log_class_count(int n, int m) {
    if (m < 0 || 2 * m > n) {
        throw std::invalid_argument("class size " + std::to_string(m) + " outside 0..floor(n/2) for n = " +
                                    std::to_string(n));
    }
    const double lc = detail::log_binomial(n, m);
    return 2 * m == n ? lc - std::numbers::ln2 : lc;
}

/// Vertex labels iid Bernoulli(r), then folded into canonical form.
struct FixedBernoulli {
    double r = 0.5;
};

/// r ~ Beta(alpha, beta), labels iid Bernoulli(r) given r, then folded.
struct BetaBernoulli {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Smaller-class size uniform on {0, ..., floor(n/2)}, labeling uniform given the size.
struct UniformClassSize {};

/// One of the three hierarchical prior families. Each assigns a labeling a
/// mass that depends only on its class size m.
class PriorSpec {
public:
    using Variant = std::variant<FixedBernoulli, BetaBernoulli, UniformClassSize>;

    PriorSpec() : v_(FixedBernoulli{0.5}) {}
    PriorSpec(FixedBernoulli p) : v_(p) { detail::require_open_unit(p.r, "r"); }
    PriorSpec(BetaBernoulli p) : v_(p) {
        if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.beta)) {
            throw std::invalid_argument("beta prior needs alpha > 0 and beta > 0, got alpha = " +
                                        detail::format_double(p.alpha) + ", beta = " + detail::format_double(p.beta));
        }
    }
    PriorSpec(UniformClassSize p) : v_(p) {}

    /// Parses `bernoulli:r=0.5`, `beta:alpha=1,beta=1` or `uniform-m`.
    static PriorSpec parse(std::string_view text);

    const Variant& variant() const noexcept { return v_; }

    std::string to_string() const {
        return std::visit(
            [](const auto& p) -> std::string {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, FixedBernoulli>) {
                    return "bernoulli:r=" + detail::format_double(p.r);
                } else if constexpr (std::is_same_v<T, BetaBernoulli>) {
                    return "beta:alpha=" + detail::format_double(p.alpha) + ",beta=" + detail::format_double(p.beta);
                } else {
                    return "uniform-m";
                }
            },
            v_);
    }

    bool is_uniform_on_labelings() const noexcept {
        const auto* b = std::get_if<FixedBernoulli>(&v_);
        return b != nullptr && b->r == 0.5;
    }

private:
    Variant v_;
};

namespace detail {

inline double parse_number(std::string_view text, std::string_view what) {
    const std::string s(text);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
    }
    return value;
}

}  // namespace detail

inline PriorSpec PriorSpec::parse(std::string_view text) {
    const auto bad = [&](const std::string& why) {
        return std::invalid_argument("prior '" + std::string(text) + "': " + why);
    };
    if (text == "uniform-m") {
        return UniformClassSize{};
    }
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw bad("expected bernoulli:r=R, beta:alpha=A,beta=B or uniform-m");
    }
    const std::string_view family = text.substr(0, colon);
    std::string_view rest = text.substr(colon + 1);
    std::vector<std::pair<std::string_view, double>> fields;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw bad("expected key=value, got '" + std::string(item) + "'");
        }
        fields.emplace_back(item.substr(0, eq), detail::parse_number(item.substr(eq + 1), item.substr(0, eq)));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    const auto field = [&](std::string_view key) {
        for (const auto& [k, v] : fields) {
            if (k == key) {
                return v;
            }
        }
        throw bad("missing field '" + std::string(key) + "'");
    };
    if (family == "bernoulli") {
        if (fields.size() != 1) {
            throw bad("bernoulli takes exactly one field r");
        }
        return FixedBernoulli{field("r")};
    }
    if (family == "beta") {
        if (fields.size() != 2) {
            throw bad("beta takes exactly the fields alpha and beta");
        }
        return BetaBernoulli{field("alpha"), field("beta")};
    }
    throw bad("unknown prior family '" + std::string(family) + "'");
}

/// log pi_n(theta) for any theta with class size m.
inline double log_prior_mass_for_class_size(int n, int m, const PriorSpec& prior) {
    if (n < 1 || m < 0 || 2 * m > n) {
        throw std::invalid_argument("class size " + std::to_string(m) + " invalid for n = " + std::to_string(n));
    }
    return std::visit(
        [n, m](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedBernoulli>) {
                // Folded Bernoulli: the labeling and its complement both map here.
                const double lr = std::log(p.r);
                const double l1r = std::log1p(-p.r);
                return detail::log_add_exp(m * lr + (n - m) * l1r, (n - m) * lr + m * l1r);
            } else if constexpr (std::is_same_v<T, BetaBernoulli>) {
                return detail::log_add_exp(detail::log_beta(m + p.alpha, n - m + p.beta),
                                           detail::log_beta(n - m + p.alpha, m + p.beta)) -
                       detail::log_beta(p.alpha, p.beta);
            } else {
                return -std::log1p(static_cast<double>(n / 2)) - log_class_count(n, m);
            }
        },
        prior.variant());
}

inline double log_prior_mass(const LabelVector& theta, const PriorSpec& prior) {
    return log_prior_mass_for_class_size(theta.size(), theta.class_size(), prior);
}

/// log pi_n(theta) indexed by class size m = 0..floor(n/2).
inline std::vector<double> log_prior_by_class_size(int n, const PriorSpec& prior) {
    std::vector<double> out(static_cast<std::size_t>(n / 2 + 1));
    for (int m = 0; m <= n / 2; ++m) {
        out[static_cast<std::size_t>(m)] = log_prior_mass_for_class_size(n, m, prior);
    }
    return out;
}

/// log pi_n(m): total prior mass of the class-size slice Theta_{n,m}.
inline double log_class_size_mass(int n, int m, const PriorSpec& prior) {
    return log_class_count(n, m) + log_prior_mass_for_class_size(n, m, prior);
}

struct GConstant {
    double value = 0.0;
};

/// Smallest constant g admissible in the concentration bounds for the prior.
inline GConstant g_constant(const PriorSpec& prior) {
    return std::visit(
        [](const auto& p) -> GConstant {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedBernoulli>) {
                return {std::abs(std::log(p.r) - std::log1p(-p.r))};
            } else if constexpr (std::is_same_v<T, BetaBernoulli>) {
                return {2.0 + 2.0 * std::numbers::ln2};
            } else {
                return {1.0 + std::numbers::ln2};
            }
        },
        prior.variant());
}

/// log of an upper bound on max_{theta, eta} pi_n(eta) / pi_n(theta).
///
/// Bernoulli(r): with L = r/(1-r) v (1-r)/r the folded masses satisfy
///   f(m_eta) / f(m_theta) = L^(m_theta - m_eta) (1 + L^-(n - 2 m_eta)) / (1 + L^-(n - 2 m_theta))
/// and the last factor is at most 1 at the maximising m_eta = 0,
/// m_theta = floor(n/2); the bound is L^floor(n/2).
/// Beta-Bernoulli: (2e)^n. Uniform class size: C(n, m) <= (2e)^(n/2).
inline double log_prior_mass_ratio_bound(const PriorSpec& prior, int n) {
    if (n < 1) {
        throw std::invalid_argument("prior_mass_ratio_bound: n must be positive");
    }
    const double log_2e = 1.0 + std::numbers::ln2;
    return std::visit(
        [n, log_2e](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedBernoulli>) {
                return (n / 2) * std::abs(std::log(p.r) - std::log1p(-p.r));
            } else if constexpr (std::is_same_v<T, BetaBernoulli>) {
                return n * log_2e;
            } else {
                return 0.5 * n * log_2e;
            }
        },
        prior.variant());
}

inline double prior_mass_ratio_bound(const PriorSpec& prior, int n) {
    return std::exp(log_prior_mass_ratio_bound(prior, n));
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_PRIORS_HPP
