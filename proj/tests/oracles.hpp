#ifndef BISECT_BAYES_TESTS_ORACLES_HPP
#define BISECT_BAYES_TESTS_ORACLES_HPP

// Slow, direct reference computations used as test oracles. Nothing here
// calls into the library's numerical code paths; only plain containers.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Bits = std::vector<int>;
using Edges = std::vector<std::pair<int, int>>;

inline Bits bits_of(const std::string& s) {
    Bits b;
    for (char c : s) {
        b.push_back(c == '1' ? 1 : 0);
    }
    return b;
}

inline std::string str_of(const Bits& b) {
    std::string s;
    for (int v : b) {
        s.push_back(v ? '1' : '0');
    }
    return s;
}

inline bool is_canonical(const Bits& b) {
    const int n = static_cast<int>(b.size());
    int m = 0;
    for (int v : b) {
        m += v;
    }
    if (2 * m > n) {
        return false;
    }
    return !(2 * m == n && b[0] == 1);
}

inline Bits complement(Bits b) {
    for (int& v : b) {
        v = 1 - v;
    }
    return b;
}

/// Every canonical labeling as a string, in lexicographic order.
inline std::vector<std::string> canonical_strings(int n) {
    std::vector<std::string> out;
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << n); ++r) {
        Bits b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            b[static_cast<std::size_t>(i)] = static_cast<int>((r >> (n - 1 - i)) & 1U);
        }
        if (is_canonical(b)) {
            out.push_back(str_of(b));
        }
    }
    return out;
}

inline bool adjacent(const Edges& edges, int i, int j) {
    for (auto [a, b] : edges) {
        if ((a == i && b == j) || (a == j && b == i)) {
            return true;
        }
    }
    return false;
}

/// Product over pairs of Q_ij^X_ij (1 - Q_ij)^(1 - X_ij), multiplied directly.
inline double likelihood_product(const Bits& theta, const Edges& edges, double p, double q) {
    const int n = static_cast<int>(theta.size());
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double pr = theta[static_cast<std::size_t>(i)] == theta[static_cast<std::size_t>(j)] ? p : q;
            prod *= adjacent(edges, i, j) ? pr : 1.0 - pr;
        }
    }
    return prod;
}

/// Sum of log-factors, pair by pair.
inline double log_likelihood_sum(const Bits& theta, const Edges& edges, double p, double q) {
    const int n = static_cast<int>(theta.size());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double pr = theta[static_cast<std::size_t>(i)] == theta[static_cast<std::size_t>(j)] ? p : q;
            total += std::log(adjacent(edges, i, j) ? pr : 1.0 - pr);
        }
    }
    return total;
}

/// (|D1|, |D2|) by classifying every pair: D1 pairs are within-class under
/// theta and between-class under eta; D2 the reverse.
inline std::pair<long, long> discrepancy(const Bits& theta, const Bits& eta) {
    const int n = static_cast<int>(theta.size());
    long d1 = 0;
    long d2 = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool same_t = theta[static_cast<std::size_t>(i)] == theta[static_cast<std::size_t>(j)];
            const bool same_e = eta[static_cast<std::size_t>(i)] == eta[static_cast<std::size_t>(j)];
            d1 += same_t && !same_e;
            d2 += !same_t && same_e;
        }
    }
    return {d1, d2};
}

/// Beta-Bernoulli probability of one raw vector with k ones, as a ratio of
/// rising factorials.
inline double beta_bernoulli_raw(int n, int k, double a, double b) {
    double num = 1.0;
    for (int i = 0; i < k; ++i) {
        num *= a + i;
    }
    for (int j = 0; j < n - k; ++j) {
        num *= b + j;
    }
    double den = 1.0;
    for (int t = 0; t < n; ++t) {
        den *= a + b + t;
    }
    return num / den;
}

inline double bernoulli_raw(int n, int k, double r) { return std::pow(r, k) * std::pow(1.0 - r, n - k); }

inline int ones(const Bits& b) {
    int m = 0;
    for (int v : b) {
        m += v;
    }
    return m;
}

inline Edges random_edges(int n, double density, std::mt19937_64& gen) {
    std::bernoulli_distribution coin(density);
    Edges e;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (coin(gen)) {
                e.emplace_back(i, j);
            }
        }
    }
    return e;
}

inline Bits random_canonical(int n, std::mt19937_64& gen) {
    std::bernoulli_distribution coin(0.5);
    Bits b(static_cast<std::size_t>(n));
    for (auto& v : b) {
        v = coin(gen) ? 1 : 0;
    }
    return is_canonical(b) ? b : complement(b);
}

}  // namespace oracle

#endif  // BISECT_BAYES_TESTS_ORACLES_HPP
