#ifndef BISECT_BAYES_GRAPH_HPP
#define BISECT_BAYES_GRAPH_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bisect_bayes/labeling.hpp"

namespace bisect_bayes {

/// Undirected simple graph stored as one adjacency bit row per vertex.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n) : n_(n), row_words_(detail::words_for(n)) {
        if (n < 1) {
            throw std::invalid_argument("graph needs at least one vertex, got n = " + std::to_string(n));
        }
        adjacency_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(row_words_), 0);
    }

    /// Builds from an edge list. Rejects self-loops, out-of-range endpoints
    /// and repeated pairs.
    static Graph from_edges(int n, std::span<const std::pair<int, int>> edges) {
        Graph g(n);
        for (auto [i, j] : edges) {
            if (i < 0 || j < 0 || i >= n || j >= n) {
                throw std::invalid_argument("edge [" + std::to_string(i) + ", " + std::to_string(j) +
                                            "] out of range for n = " + std::to_string(n));
            }
            if (i == j) {
                throw std::invalid_argument("self-loop at vertex " + std::to_string(i));
            }
            if (g.has_edge(i, j)) {
                throw std::invalid_argument("duplicate edge [" + std::to_string(i) + ", " + std::to_string(j) + "]");
            }
            g.add_edge(i, j);
        }
        return g;
    }

    int size() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_; }

    bool has_edge(int i, int j) const noexcept {
        return (row(i)[static_cast<std::size_t>(j >> 6)] >> (j & 63)) & 1U;
    }

    /// Inserts {i, j}; a no-op if present. i != j is the caller's contract.
    void add_edge(int i, int j) noexcept {
        if (has_edge(i, j)) {
            return;
        }
        word(i, j) |= std::uint64_t{1} << (j & 63);
        word(j, i) |= std::uint64_t{1} << (i & 63);
        ++edges_;
    }

    std::span<const std::uint64_t> row(int i) const noexcept {
        return {adjacency_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(row_words_),
                static_cast<std::size_t>(row_words_)};
    }

    int degree(int i) const noexcept {
        int d = 0;
        for (auto w : row(i)) {
            d += std::popcount(w);
        }
        return d;
    }

    /// Edge list with i < j, sorted lexicographically.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(edges_);
        for (int i = 0; i < n_; ++i) {
            for (int j = i + 1; j < n_; ++j) {
                if (has_edge(i, j)) {
                    out.emplace_back(i, j);
                }
            }
        }
        return out;
    }

    /// Neighbours of i within the vertex set given by words (same packing as
    /// BitVector).
    int neighbours_in(int i, const std::vector<std::uint64_t>& words) const noexcept {
        int c = 0;
        const auto r = row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            c += std::popcount(r[k] & words[k]);
        }
        return c;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::uint64_t& word(int i, int j) noexcept {
        return adjacency_[static_cast<std::size_t>(i) * static_cast<std::size_t>(row_words_) +
                          static_cast<std::size_t>(j >> 6)];
    }

    int n_ = 0;
    int row_words_ = 0;
    std::size_t edges_ = 0;
    std::vector<std::uint64_t> adjacency_;
};

/// Number of edges whose endpoints carry different labels.
inline std::int64_t cut_edges(const Graph& x, const BitVector& labels) {
    check_same_size(x.size(), labels.size(), "cut_edges");
    std::int64_t cut = 0;
    const auto& w = labels.words();
    for (int i = 0; i < x.size(); ++i) {
        if (labels[i]) {
            cut += x.degree(i) - x.neighbours_in(i, w);
        }
    }
    return cut;
}

/// Relabels vertices: vertex v of g becomes vertex perm[v].
inline Graph permute_vertices(const Graph& g, std::span<const int> perm) {
    check_same_size(g.size(), static_cast<int>(perm.size()), "permute_vertices");
    Graph out(g.size());
    for (auto [i, j] : g.edges()) {
        out.add_edge(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return out;
}

inline BitVector permute_vertices(const BitVector& bits, std::span<const int> perm) {
    check_same_size(bits.size(), static_cast<int>(perm.size()), "permute_vertices");
    BitVector out(bits.size());
    for (int v = 0; v < bits.size(); ++v) {
        out.set(perm[static_cast<std::size_t>(v)], bits[v]);
    }
    return out;
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_GRAPH_HPP
