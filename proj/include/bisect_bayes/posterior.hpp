#ifndef BISECT_BAYES_POSTERIOR_HPP
#define BISECT_BAYES_POSTERIOR_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/graph.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/parallel.hpp"
#include "bisect_bayes/priors.hpp"

namespace bisect_bayes {

/// Entries per log-sum-exp shard. Fixed so that reductions do not depend on
/// the worker count.
inline constexpr std::size_t kReductionShard = 4096;

namespace detail {

/// Two-pass log-sum-exp: global max, then shard-wise sums of exp(x - max)
/// merged in shard order.
inline double log_sum_exp(std::span<const double> xs, unsigned threads = 1) {
    if (xs.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double hi = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(hi)) {
        return hi;
    }
    const std::size_t shards = (xs.size() + kReductionShard - 1) / kReductionShard;
    std::vector<double> partial(shards, 0.0);
    parallel_for(shards, threads, [&](std::size_t s) {
        const std::size_t lo = s * kReductionShard;
        const std::size_t end = std::min(xs.size(), lo + kReductionShard);
        double acc = 0.0;
        for (std::size_t i = lo; i < end; ++i) {
            acc += std::exp(xs[i] - hi);
        }
        partial[s] = acc;
    });
    double total = 0.0;
    for (double v : partial) {
        total += v;
    }
    return hi + std::log(total);
}

inline std::int64_t cut_edges_mask(const Graph& x, std::uint64_t mask) noexcept {
    std::int64_t cut = 0;
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        cut += std::popcount(x.row(i)[0] & ~mask);
    }
    return cut;
}

}  // namespace detail

enum class CutCountMethod {
    /// Recount crossing edges for every labeling.
    Direct,
    /// Walk all 2^n raw labelings in Gray-code order, updating the count
    /// by one vertex move per step.
    GrayCode,
};

/// Above this size the Gray-code table (4 bytes per raw labeling) is skipped
/// in favour of direct counts.
inline constexpr int kMaxGrayCodeVertices = 26;

struct EnumerationOptions {
    int cap = kDefaultEnumerationCap;
    unsigned threads = 1;
    CutCountMethod method = CutCountMethod::GrayCode;
};

/// Crossing-edge counts for every raw labeling, indexed by packed mask.
/// The cube is split into shards by the top vertex bits; each shard starts
/// from a direct count and walks its low bits in Gray-code order.
inline std::vector<std::int32_t> cut_counts_gray(const Graph& x, unsigned threads = 1) {
    const int n = x.size();
    if (n > kMaxEnumerableVertices) {
        throw std::out_of_range("cut_counts_gray: n too large");
    }
    const int prefix_bits = std::min(6, n - 1);
    const int low_bits = n - prefix_bits;
    std::vector<std::int32_t> cut(std::size_t{1} << n);
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(n));
    std::vector<int> degree(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        rows[static_cast<std::size_t>(v)] = x.row(v)[0];
        degree[static_cast<std::size_t>(v)] = x.degree(v);
    }
    parallel_for(std::size_t{1} << prefix_bits, threads, [&](std::size_t prefix) {
        std::uint64_t mask = static_cast<std::uint64_t>(prefix) << low_bits;
        auto c = static_cast<std::int32_t>(detail::cut_edges_mask(x, mask));
        cut[mask] = c;
        const std::uint64_t steps = std::uint64_t{1} << low_bits;
        for (std::uint64_t t = 1; t < steps; ++t) {
            const int v = std::countr_zero(t);
            const std::uint64_t bit = std::uint64_t{1} << v;
            // Neighbours on the other side stop being cut, the rest start.
            const std::uint64_t other_side = (mask & bit) ? ~mask : mask;
            const int across = std::popcount(rows[static_cast<std::size_t>(v)] & other_side);
            c += degree[static_cast<std::size_t>(v)] - 2 * across;
            mask ^= bit;
            cut[mask] = c;
        }
    });
    return cut;
}

/// Exact posterior over all canonical labelings, stored in lexicographic
/// order of the labeling.
class PosteriorTable {
public:
    PosteriorTable() = default;

    /// Normalises unnormalised log weights. masks must be distinct canonical
    /// labelings in lexicographic order.
    static PosteriorTable from_log_weights(int n, std::vector<std::uint64_t> masks,
                                           std::vector<double> log_unnormalized, unsigned threads = 1) {
        check_enumerable(n, kMaxEnumerableVertices);
        if (masks.size() != log_unnormalized.size() || masks.empty()) {
            throw std::invalid_argument("posterior table: need one weight per labeling and at least one labeling");
        }
        for (std::size_t i = 0; i < masks.size(); ++i) {
            if (!is_canonical_mask(masks[i], n) || (masks[i] >> n) != 0) {
                throw std::invalid_argument("posterior table: labeling " + BitVector::from_mask(masks[i], n).to_string() +
                                            " is not canonical");
            }
            if (i > 0 && reverse_bits(masks[i - 1], n) >= reverse_bits(masks[i], n)) {
                throw std::invalid_argument("posterior table: labelings must be distinct and sorted");
            }
        }
        PosteriorTable t;
        t.n_ = n;
        t.masks_ = std::move(masks);
        t.log_unnormalized_ = std::move(log_unnormalized);
        t.log_normalizer_ = detail::log_sum_exp(t.log_unnormalized_, threads);
        if (!std::isfinite(t.log_normalizer_)) {
            throw std::invalid_argument("posterior table: total mass is zero or not finite");
        }
        t.probability_.resize(t.masks_.size());
        for (std::size_t i = 0; i < t.masks_.size(); ++i) {
            t.probability_[i] = std::exp(t.log_unnormalized_[i] - t.log_normalizer_);
        }
        return t;
    }

    int size() const noexcept { return n_; }
    std::size_t entries() const noexcept { return masks_.size(); }
    std::uint64_t mask(std::size_t i) const { return masks_[i]; }
    LabelVector labeling(std::size_t i) const { return LabelVector::from_mask(masks_[i], n_); }
    double probability(std::size_t i) const { return probability_[i]; }
    double log_unnormalized(std::size_t i) const { return log_unnormalized_[i]; }
    double log_probability(std::size_t i) const { return log_unnormalized_[i] - log_normalizer_; }
    double log_normalizer() const noexcept { return log_normalizer_; }
    std::span<const std::uint64_t> masks() const noexcept { return masks_; }
    std::span<const double> probabilities() const noexcept { return probability_; }
    std::span<const double> log_unnormalized() const noexcept { return log_unnormalized_; }

    /// True when every canonical labeling on n vertices has an entry.
    bool has_full_support() const noexcept { return n_ <= 63 && masks_.size() == (std::size_t{1} << (n_ - 1)); }

    std::optional<std::size_t> index_of(std::uint64_t mask) const {
        const std::uint64_t key = reverse_bits(mask, n_);
        auto it = std::lower_bound(masks_.begin(), masks_.end(), key, [this](std::uint64_t m, std::uint64_t k) {
            return reverse_bits(m, n_) < k;
        });
        if (it == masks_.end() || *it != mask) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - masks_.begin());
    }

    std::optional<std::size_t> index_of(const LabelVector& theta) const {
        if (theta.size() != n_) {
            throw std::invalid_argument("posterior table: labeling has the wrong vertex count");
        }
        return index_of(theta.mask());
    }

    double probability_of(const LabelVector& theta) const {
        const auto i = index_of(theta);
        return i ? probability_[*i] : 0.0;
    }

private:
    int n_ = 0;
    std::vector<std::uint64_t> masks_;
    std::vector<double> log_unnormalized_;
    std::vector<double> probability_;
    double log_normalizer_ = 0.0;
};

/// Pi(theta | X) proportional to pi(theta) p_theta(X) for every canonical theta.
inline PosteriorTable exact_posterior(const Graph& x, const PriorSpec& prior, const EdgeModel& model,
                                      const EnumerationOptions& options = {}) {
    const int n = x.size();
    std::vector<std::uint64_t> masks = canonical_masks(n, options.cap);
    const std::vector<double> log_prior = log_prior_by_class_size(n, prior);
    const auto edges = static_cast<std::int64_t>(x.edge_count());
    std::vector<double> log_w(masks.size());

    std::vector<std::int32_t> gray;
    if (options.method == CutCountMethod::GrayCode && n <= kMaxGrayCodeVertices) {
        gray = cut_counts_gray(x, options.threads);
    }
    const std::size_t shards = (masks.size() + kReductionShard - 1) / kReductionShard;
    parallel_for(shards, options.threads, [&](std::size_t s) {
        const std::size_t end = std::min(masks.size(), (s + 1) * kReductionShard);
        for (std::size_t i = s * kReductionShard; i < end; ++i) {
            const std::uint64_t mask = masks[i];
            const int m = std::popcount(mask);
            const std::int64_t cut = gray.empty() ? detail::cut_edges_mask(x, mask) : gray[mask];
            log_w[i] = log_prior[static_cast<std::size_t>(m)] + log_likelihood_from_counts(n, m, edges, cut, model);
        }
    });
    return PosteriorTable::from_log_weights(n, std::move(masks), std::move(log_w), options.threads);
}

/// Subsets of the parameter space usable as posterior_mass arguments. Each
/// answers membership both for a LabelVector and for a packed mask.
namespace sets {

struct All {
    bool contains(std::uint64_t, int) const noexcept { return true; }
    bool operator()(const LabelVector&) const noexcept { return true; }
};

struct Exactly {
    LabelVector theta;
    bool contains(std::uint64_t mask, int) const { return mask == theta.mask(); }
    bool operator()(const LabelVector& v) const { return v == theta; }
};

/// Theta_{n,m}.
struct ClassSize {
    int m = 0;
    bool contains(std::uint64_t mask, int) const noexcept { return std::popcount(mask) == m; }
    bool operator()(const LabelVector& v) const noexcept { return v.class_size() == m; }
};

/// B_k(center): labelings with min(k, n - k) < radius, k the Hamming distance.
struct Ball {
    LabelVector center;
    int radius = 0;
    bool contains(std::uint64_t mask, int n) const {
        const int k = std::popcount(mask ^ center.mask());
        return std::min(k, n - k) < radius;
    }
    bool operator()(const LabelVector& v) const { return sym_distance(v, center) < radius; }
};

template <class Inner>
struct Not {
    Inner inner;
    bool contains(std::uint64_t mask, int n) const { return !inner.contains(mask, n); }
    bool operator()(const LabelVector& v) const { return !inner(v); }
};

template <class Inner>
Not(Inner) -> Not<Inner>;

}  // namespace sets

template <class P>
concept MaskPredicate = requires(const P& p, std::uint64_t mask, int n) {
    { p.contains(mask, n) } -> std::convertible_to<bool>;
};

template <class P>
bool table_contains(const PosteriorTable& table, std::size_t i, const P& pred) {
    if constexpr (MaskPredicate<P>) {
        return pred.contains(table.mask(i), table.size());
    } else {
        return pred(table.labeling(i));
    }
}

/// Pi(S | X): summed in table order.
template <class P>
double posterior_mass(const PosteriorTable& table, const P& pred) {
    double total = 0.0;
    for (std::size_t i = 0; i < table.entries(); ++i) {
        if (table_contains(table, i, pred)) {
            total += table.probability(i);
        }
    }
    return total;
}

/// log Pi(S | X) by log-sum-exp over the members; -inf for an empty set.
template <class P>
double log_posterior_mass(const PosteriorTable& table, const P& pred) {
    std::vector<double> logs;
    for (std::size_t i = 0; i < table.entries(); ++i) {
        if (table_contains(table, i, pred)) {
            logs.push_back(table.log_unnormalized(i));
        }
    }
    return detail::log_sum_exp(logs) - table.log_normalizer();
}

/// Highest-mass labeling; ties go to the lexicographically smallest.
inline LabelVector posterior_mode(const PosteriorTable& table) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.entries(); ++i) {
        if (table.log_unnormalized(i) > table.log_unnormalized(best)) {
            best = i;
        }
    }
    return table.labeling(best);
}

/// Posterior probability that vertex i sits in the smaller class (label 1).
inline std::vector<double> inclusion_probabilities(const PosteriorTable& table) {
    std::vector<double> out(static_cast<std::size_t>(table.size()), 0.0);
    for (std::size_t e = 0; e < table.entries(); ++e) {
        for (std::uint64_t rest = table.mask(e); rest != 0; rest &= rest - 1) {
            out[static_cast<std::size_t>(std::countr_zero(rest))] += table.probability(e);
        }
    }
    return out;
}

/// Posterior law of the class size m = 0..floor(n/2).
inline std::vector<double> class_size_distribution(const PosteriorTable& table) {
    std::vector<double> out(static_cast<std::size_t>(table.size() / 2 + 1), 0.0);
    for (std::size_t e = 0; e < table.entries(); ++e) {
        out[static_cast<std::size_t>(std::popcount(table.mask(e)))] += table.probability(e);
    }
    return out;
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_POSTERIOR_HPP
