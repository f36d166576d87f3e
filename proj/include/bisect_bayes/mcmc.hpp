#ifndef BISECT_BAYES_MCMC_HPP
#define BISECT_BAYES_MCMC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/graph.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/priors.hpp"
#include "bisect_bayes/random.hpp"

namespace bisect_bayes {

struct McmcConfig {
    std::uint64_t burn_in = 0;
    std::uint64_t samples = 10000;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;

    /// burn_in 10 n^2, 10^4 samples, thin n.
    static McmcConfig defaults_for(int n, std::uint64_t seed) {
        const auto nn = static_cast<std::uint64_t>(n);
        return {10 * nn * nn, 10000, nn, seed};
    }

    void validate() const {
        if (burn_in == 0 || samples == 0 || thin == 0) {
            throw std::invalid_argument("MCMC burn_in, samples and thin must all be positive");
        }
    }
};

/// Single-site flip Metropolis chain on the raw cube {0,1}^n with target
/// proportional to pi(canonicalize(theta)) p_theta(X). The flip proposal is
/// symmetric, so a move is accepted with probability min(1, exp(delta)).
class FlipChain {
public:
    FlipChain(const Graph& x, const PriorSpec& prior, const EdgeModel& model, BitVector initial, std::uint64_t seed)
        : graph_(&x),
          model_(model),
          log_prior_(log_prior_by_class_size(x.size(), prior)),
          state_(std::move(initial)),
          ones_(state_.count()),
          rng_(seed) {
        check_same_size(x.size(), state_.size(), "FlipChain");
        if (x.size() < 2) {
            throw std::invalid_argument("MCMC needs at least two vertices");
        }
    }

    /// Starts from a labeling drawn uniformly from the cube.
    FlipChain(const Graph& x, const PriorSpec& prior, const EdgeModel& model, std::uint64_t seed)
        : FlipChain(x, prior, model, random_start(x.size(), seed), derive_seed(seed, {1})) {}

    /// Change in log target if vertex v switched class.
    double flip_delta(int v) const {
        const int n = graph_->size();
        const bool label = state_[v];
        const int same = (label ? ones_ : n - ones_) - 1;
        const int diff = n - 1 - same;
        const int nb_ones = graph_->neighbours_in(v, state_.words());
        const int nb_same = label ? nb_ones : graph_->degree(v) - nb_ones;
        const int nb_diff = graph_->degree(v) - nb_same;
        // Pairs (v, j) with j on v's side become between-class pairs and vice versa.
        const double log_lik_delta =
            (nb_same - nb_diff) * (model_.log_q() - model_.log_p()) +
            ((same - nb_same) - (diff - nb_diff)) * (model_.log_1mq() - model_.log_1mp());
        const int new_ones = label ? ones_ - 1 : ones_ + 1;
        return log_lik_delta + prior_at(new_ones) - prior_at(ones_);
    }

    /// One proposal; returns whether the state moved. With probability
    /// 1/(n+1) the proposal is to stay put, which keeps the chain aperiodic:
    /// without it, a p = q chain accepts every flip and the parity of the
    /// class size alternates deterministically.
    bool step() {
        const int n = graph_->size();
        const int v = static_cast<int>(rng_.below(static_cast<std::uint64_t>(n) + 1));
        if (v == n) {
            last_vertex_ = -1;
            return false;
        }
        last_vertex_ = v;
        const double delta = flip_delta(v);
        if (delta >= 0.0 || rng_.uniform() < std::exp(delta)) {
            ones_ += state_[v] ? -1 : 1;
            state_.flip(v);
            return true;
        }
        return false;
    }

    const BitVector& state() const noexcept { return state_; }
    int last_vertex() const noexcept { return last_vertex_; }

private:
    static BitVector random_start(int n, std::uint64_t seed) {
        Rng rng(derive_seed(seed, {0}));
        BitVector b(n);
        for (int i = 0; i < n; ++i) {
            b.set(i, rng.uniform() < 0.5);
        }
        return b;
    }

    double prior_at(int ones) const {
        const int m = std::min(ones, graph_->size() - ones);
        return log_prior_[static_cast<std::size_t>(m)];
    }

    const Graph* graph_;
    EdgeModel model_;
    std::vector<double> log_prior_;
    BitVector state_;
    int ones_;
    int last_vertex_ = -1;
    Rng rng_;
};

struct McmcResult {
    int n = 0;
    /// Canonicalised states, one every `thin` proposals after burn-in.
    std::vector<LabelVector> samples;
    /// Fraction of samples with vertex i labelled 1.
    std::vector<double> inclusion;
    /// Empirical law of the class size m = 0..floor(n/2).
    std::vector<double> class_size;
    double acceptance_rate = 0.0;
};

inline McmcResult mcmc_posterior(const Graph& x, const PriorSpec& prior, const EdgeModel& model,
                                 const McmcConfig& cfg) {
    cfg.validate();
    const int n = x.size();
    FlipChain chain(x, prior, model, cfg.seed);
    std::uint64_t accepted = 0;
    std::uint64_t proposals = 0;
    for (std::uint64_t i = 0; i < cfg.burn_in; ++i) {
        accepted += chain.step();
        ++proposals;
    }
    McmcResult out;
    out.n = n;
    out.samples.reserve(cfg.samples);
    out.inclusion.assign(static_cast<std::size_t>(n), 0.0);
    out.class_size.assign(static_cast<std::size_t>(n / 2 + 1), 0.0);
    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
        for (std::uint64_t t = 0; t < cfg.thin; ++t) {
            accepted += chain.step();
            ++proposals;
        }
        LabelVector v = canonicalize(chain.state());
        for (int i = 0; i < n; ++i) {
            out.inclusion[static_cast<std::size_t>(i)] += v[i] ? 1.0 : 0.0;
        }
        out.class_size[static_cast<std::size_t>(v.class_size())] += 1.0;
        out.samples.push_back(std::move(v));
    }
    const auto total = static_cast<double>(cfg.samples);
    for (auto& p : out.inclusion) {
        p /= total;
    }
    for (auto& p : out.class_size) {
        p /= total;
    }
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposals);
    return out;
}

/// Visit counts of each distinct sampled labeling, in lexicographic order.
inline std::map<LabelVector, std::uint64_t> sample_counts(std::span<const LabelVector> samples) {
    std::map<LabelVector, std::uint64_t> counts;
    for (const auto& s : samples) {
        ++counts[s];
    }
    return counts;
}

/// Most frequently sampled labeling; ties go to the lexicographically smallest.
inline LabelVector posterior_mode(std::span<const LabelVector> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("posterior_mode: no samples");
    }
    const auto counts = sample_counts(samples);
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) {
            best = it;
        }
    }
    return best->first;
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_MCMC_HPP
