#ifndef BISECT_BAYES_CHECKS_HPP
#define BISECT_BAYES_CHECKS_HPP

// Deterministic grid checks of the scalar inequalities behind the
// concentration bounds. A violation on any grid point is a defect.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bisect_bayes/bounds.hpp"
#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/priors.hpp"

namespace bisect_bayes {

/// Grid resolutions. Bump kGridVersion whenever one of them changes.
inline constexpr int kGridVersion = 1;
inline constexpr double kUnitStep = 0.01;
inline constexpr double kRelativeSlack = 1e-12;

struct GridCheck {
    std::string name;
    std::uint64_t points = 0;
    std::uint64_t violations = 0;
    /// Smallest (rhs - lhs) / max(1, |rhs|) seen; negative means violated.
    double min_margin = std::numeric_limits<double>::infinity();
    std::string first_violation;

    explicit GridCheck(std::string check_name) : name(std::move(check_name)) {}

    bool passed() const noexcept { return violations == 0 && points > 0; }

    /// Records lhs <= rhs (up to kRelativeSlack) at the point described by where().
    template <class Where>
    void check(double lhs, double rhs, Where&& where) {
        ++points;
        const double scale = std::max(1.0, std::abs(rhs));
        const double margin = (rhs - lhs) / scale;
        min_margin = std::min(min_margin, margin);
        if (!(margin >= -kRelativeSlack)) {
            if (violations == 0) {
                std::ostringstream os;
                os.precision(17);
                os << where() << ": lhs=" << lhs << " rhs=" << rhs;
                first_violation = os.str();
            }
            ++violations;
        }
    }
};

namespace detail {

inline std::string at(std::initializer_list<std::pair<const char*, double>> coords) {
    std::ostringstream os;
    os.precision(10);
    bool first = true;
    for (const auto& [k, v] : coords) {
        os << (first ? "" : ", ") << k << "=" << v;
        first = false;
    }
    return os.str();
}

}  // namespace detail

/// e^{-Cx} / (1 - e^{-x}) <= e^{-Cx/4} for C >= 2 and x >= sqrt(2/C),
/// compared in log form. Grid: C in [2, 100] step 0.5, x from sqrt(2/C) to
/// 10 in 400 steps.
inline GridCheck check_exp_ratio_inequality() {
    GridCheck g{"exp_ratio (C>=2, x>=sqrt(2/C))"};
    for (int ci = 0; ci <= 196; ++ci) {
        const double c = 2.0 + 0.5 * ci;
        const double x0 = std::sqrt(2.0 / c);
        for (int xi = 0; xi <= 400; ++xi) {
            const double x = x0 + (10.0 - x0) * xi / 400.0;
            const double lhs = -c * x - std::log(-std::expm1(-x));
            g.check(lhs, -c * x / 4.0, [&] { return detail::at({{"C", c}, {"x", x}}); });
        }
    }
    return g;
}

/// sqrt(1 - x) <= 1 - x/2 on [0, 1].
inline GridCheck check_sqrt_inequality() {
    GridCheck g{"sqrt_one_minus (x in [0,1])"};
    const int steps = static_cast<int>(std::lround(1.0 / kUnitStep));
    for (int i = 0; i <= steps; ++i) {
        const double x = i * kUnitStep;
        g.check(std::sqrt(1.0 - x), 1.0 - x / 2.0, [&] { return detail::at({{"x", x}}); });
    }
    return g;
}

/// (1 + x/r)^r <= e^x for integer r >= 1 and x > -r, in log form
/// r log(1 + x/r) <= x. Grid: r = 1..50, x from -r (exclusive) to 50.
inline GridCheck check_power_exp_inequality() {
    GridCheck g{"power_exp (r in 1..50, x in (-r,50])"};
    for (int r = 1; r <= 50; ++r) {
        const int steps = 1000;
        for (int i = 1; i <= steps; ++i) {
            const double x = -r + (50.0 + r) * i / steps;
            g.check(r * std::log1p(x / r), x, [&] { return detail::at({{"r", r}, {"x", x}}); });
        }
        g.check(r * std::log1p(0.0), 0.0, [&] { return detail::at({{"r", r}, {"x", 0.0}}); });
    }
    return g;
}

/// sum_{k=1}^{n-1} C(n,k) x^{k(n-k)}.
inline double binomial_power_sum(int n, double x) {
    double total = 0.0;
    for (int k = 1; k < n; ++k) {
        const double lc = detail::log_binomial(n, k);
        total += x == 0.0 ? 0.0 : std::exp(lc + static_cast<double>(k) * (n - k) * std::log(x));
    }
    return total;
}

/// sum_{k=1}^{n-1} C(n,k) x^{k(n-k)} <= 2((1 + x^{n/2})^n - 1) <= 2 n x^{n/2} e^{n x^{n/2}}
/// for x in [0, 1] and n = 2..40. Both inequalities are checked.
inline std::vector<GridCheck> check_binomial_sum_inequality() {
    GridCheck first{"binomial_sum <= 2((1+x^{n/2})^n - 1)"};
    GridCheck second{"2((1+x^{n/2})^n - 1) <= 2n x^{n/2} e^{n x^{n/2}}"};
    const int steps = static_cast<int>(std::lround(1.0 / kUnitStep));
    for (int n = 2; n <= 40; ++n) {
        for (int i = 0; i <= steps; ++i) {
            const double x = i * kUnitStep;
            const double y = std::pow(x, n / 2.0);
            const double lhs = binomial_power_sum(n, x);
            const double mid = 2.0 * std::expm1(n * std::log1p(y));
            const double rhs = 2.0 * n * y * std::exp(n * y);
            auto where = [&] { return detail::at({{"n", n}, {"x", x}}); };
            first.check(lhs, mid, where);
            second.check(mid, rhs, where);
        }
    }
    return {first, second};
}

/// All four auxiliary inequality grids.
inline std::vector<GridCheck> aux_lemma_suite() {
    std::vector<GridCheck> out{check_exp_ratio_inequality(), check_sqrt_inequality(), check_power_exp_inequality()};
    for (auto& g : check_binomial_sum_inequality()) {
        out.push_back(std::move(g));
    }
    return out;
}

/// lower <= mid <= upper for c, d on (0, 50] in steps of 0.25.
inline GridCheck check_ks_sandwich_grid() {
    GridCheck g{"ks_equivalence_sandwich (c,d in (0,50])"};
    for (int ci = 1; ci <= 200; ++ci) {
        for (int di = 1; di <= 200; ++di) {
            const double c = 0.25 * ci;
            const double d = 0.25 * di;
            const Sandwich s = ks_equivalence_sandwich(c, d);
            auto where = [&] { return detail::at({{"c", c}, {"d", d}}); };
            g.check(s.lower, s.mid, where);
            g.check(s.mid, s.upper, where);
        }
    }
    return g;
}

/// Folded Bernoulli mass ratio f(m1)/f(m2) lies within [R/2, 2R],
/// R = (r/(1-r) v (1-r)/r)^(m2 - m1), for r = 0.05..0.95, n <= 30 and
/// m1, m2 <= floor(n/2). Checked in log form.
inline GridCheck check_bernoulli_ratio_sandwich() {
    GridCheck g{"bernoulli_ratio_sandwich (r in 0.05..0.95, n<=30)"};
    for (int ri = 1; ri <= 19; ++ri) {
        const double r = 0.05 * ri;
        const double log_l = std::abs(std::log(r) - std::log1p(-r));
        const PriorSpec prior{FixedBernoulli{r}};
        for (int n = 1; n <= 30; ++n) {
            for (int m1 = 0; m1 <= n / 2; ++m1) {
                for (int m2 = 0; m2 <= n / 2; ++m2) {
                    const double log_ratio = log_prior_mass_for_class_size(n, m1, prior) -
                                             log_prior_mass_for_class_size(n, m2, prior);
                    const double log_r = (m2 - m1) * log_l;
                    auto where = [&] { return detail::at({{"r", r}, {"n", n}, {"m1", m1}, {"m2", m2}}); };
                    g.check(log_r - std::numbers::ln2, log_ratio, where);
                    g.check(log_ratio, log_r + std::numbers::ln2, where);
                }
            }
        }
    }
    return g;
}

/// Beta-Bernoulli mass ratio <= (2e)^n for n >= alpha + beta - 2, n <= 40,
/// alpha, beta in {0.1, 0.25, 0.5, 1, 1.5, 2, 3, 5, 10, 20}. The grid stops at
/// 0.1: for alpha or beta near 0.01 the inequality fails at small n.
inline GridCheck check_beta_ratio_bound() {
    GridCheck g{"beta_ratio <= (2e)^n (alpha,beta >= 0.1)"};
    const double grid[] = {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0};
    for (double a : grid) {
        for (double b : grid) {
            const PriorSpec prior{BetaBernoulli{a, b}};
            for (int n = 1; n <= 40; ++n) {
                if (n < a + b - 2.0) {
                    continue;
                }
                for (int m1 = 0; m1 <= n / 2; ++m1) {
                    for (int m2 = 0; m2 <= n / 2; ++m2) {
                        const double log_ratio = log_prior_mass_for_class_size(n, m1, prior) -
                                                 log_prior_mass_for_class_size(n, m2, prior);
                        g.check(log_ratio, n * (1.0 + std::numbers::ln2), [&] {
                            return detail::at({{"alpha", a}, {"beta", b}, {"n", n}, {"m1", m1}, {"m2", m2}});
                        });
                    }
                }
            }
        }
    }
    return g;
}

/// Everything the `verify` command runs.
inline std::vector<GridCheck> verify_all() {
    std::vector<GridCheck> out = aux_lemma_suite();
    out.push_back(check_ks_sandwich_grid());
    out.push_back(check_bernoulli_ratio_sandwich());
    out.push_back(check_beta_ratio_bound());
    return out;
}

/// E_theta[sqrt(p_eta / p_theta)(X)] by exact summation over all
/// 2^(n(n-1)/2) graphs. Feasible for n <= 6.
inline double hellinger_transform_exhaustive(const BitVector& theta, const BitVector& eta, const EdgeModel& model) {
    check_same_size(theta.size(), eta.size(), "hellinger_transform_exhaustive");
    const int n = theta.size();
    const int pairs = n * (n - 1) / 2;
    if (pairs > 24) {
        throw std::out_of_range("hellinger_transform_exhaustive: too many graphs");
    }
    struct PairProbs {
        double under_theta;
        double under_eta;
    };
    std::vector<PairProbs> probs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            probs.push_back({theta[i] == theta[j] ? model.p() : model.q(), eta[i] == eta[j] ? model.p() : model.q()});
        }
    }
    double total = 0.0;
    for (std::uint64_t g = 0; g < (std::uint64_t{1} << pairs); ++g) {
        double p_theta = 1.0;
        double p_eta = 1.0;
        for (int e = 0; e < pairs; ++e) {
            const bool present = (g >> e) & 1U;
            const auto& pp = probs[static_cast<std::size_t>(e)];
            p_theta *= present ? pp.under_theta : 1.0 - pp.under_theta;
            p_eta *= present ? pp.under_eta : 1.0 - pp.under_eta;
        }
        total += std::sqrt(p_theta * p_eta);
    }
    return total;
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_CHECKS_HPP
