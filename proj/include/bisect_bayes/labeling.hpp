#ifndef BISECT_BAYES_LABELING_HPP
#define BISECT_BAYES_LABELING_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bisect_bayes {

/// Default upper limit on n for anything that enumerates all labelings.
inline constexpr int kDefaultEnumerationCap = 22;
/// Hard limit for enumeration: labelings are packed in one 64-bit word.
inline constexpr int kMaxEnumerableVertices = 62;

namespace detail {

inline constexpr int words_for(int n) { return (n + 63) / 64; }

inline constexpr std::uint64_t low_mask(int bits) {
    return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

}  // namespace detail

/// Raw binary labels on n vertices, packed 64 per word with vertex i at bit
/// (i % 64) of word (i / 64). No class-size convention is imposed.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(int n) : n_(n), words_(static_cast<std::size_t>(detail::words_for(n)), 0) {
        if (n < 0) {
            throw std::invalid_argument("BitVector: negative length " + std::to_string(n));
        }
    }

    /// Parses the text format: one '0' or '1' per vertex.
    static BitVector from_string(std::string_view text) {
        BitVector v(static_cast<int>(text.size()));
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '1') {
                v.set(static_cast<int>(i), true);
            } else if (text[i] != '0') {
                throw std::invalid_argument("labeling: unexpected character '" + std::string(1, text[i]) +
                                            "' at position " + std::to_string(i));
            }
        }
        return v;
    }

    static BitVector from_mask(std::uint64_t mask, int n) {
        if (n > 64) {
            throw std::invalid_argument("BitVector::from_mask: n > 64");
        }
        BitVector v(n);
        if (n > 0) {
            v.words_[0] = mask & detail::low_mask(n);
        }
        return v;
    }

    int size() const noexcept { return n_; }

    bool operator[](int i) const noexcept {
        return (words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1U;
    }

    void set(int i, bool value) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        auto& w = words_[static_cast<std::size_t>(i >> 6)];
        w = value ? (w | bit) : (w & ~bit);
    }

    void flip(int i) noexcept { words_[static_cast<std::size_t>(i >> 6)] ^= std::uint64_t{1} << (i & 63); }

    int count() const noexcept {
        int c = 0;
        for (auto w : words_) {
            c += std::popcount(w);
        }
        return c;
    }

    BitVector complemented() const {
        BitVector out(*this);
        for (std::size_t k = 0; k < out.words_.size(); ++k) {
            out.words_[k] = ~out.words_[k];
        }
        out.trim();
        return out;
    }

    /// Packed word for n <= 64.
    std::uint64_t mask() const {
        if (n_ > 64) {
            throw std::logic_error("BitVector::mask: more than 64 vertices");
        }
        return n_ == 0 ? 0 : words_[0];
    }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(n_), '0');
        for (int i = 0; i < n_; ++i) {
            if ((*this)[i]) {
                s[static_cast<std::size_t>(i)] = '1';
            }
        }
        return s;
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

    /// Lexicographic order on the bit sequence (vertex 0 most significant).
    friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
        const std::size_t common = std::min(a.words_.size(), b.words_.size());
        for (std::size_t k = 0; k < common; ++k) {
            const std::uint64_t diff = a.words_[k] ^ b.words_[k];
            if (diff != 0) {
                const int first = std::countr_zero(diff);
                return ((a.words_[k] >> first) & 1U) ? std::strong_ordering::greater : std::strong_ordering::less;
            }
        }
        return a.n_ <=> b.n_;
    }

private:
    void trim() noexcept {
        if (!words_.empty() && (n_ & 63) != 0) {
            words_.back() &= detail::low_mask(n_ & 63);
        }
    }

    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

// Single-word helpers used by the enumeration hot paths.

/// A packed labeling satisfies the canonical convention: fewer than n/2
/// ones, or exactly n/2 ones with vertex 0 in class 0.
constexpr bool is_canonical_mask(std::uint64_t mask, int n) noexcept {
    const int m = std::popcount(mask);
    return 2 * m < n || (2 * m == n && (mask & 1U) == 0);
}

constexpr std::uint64_t canonical_mask(std::uint64_t mask, int n) noexcept {
    return is_canonical_mask(mask, n) ? mask : (~mask & detail::low_mask(n));
}

/// Reverses the low n bits, mapping a vertex mask to its lexicographic rank
/// among all 2^n bit sequences (and back).
constexpr std::uint64_t reverse_bits(std::uint64_t mask, int n) noexcept {
    std::uint64_t out = 0;
    for (int i = 0; i < n; ++i) {
        out = (out << 1) | ((mask >> i) & 1U);
    }
    return out;
}

/// Class assignment in canonical form: label 1 marks the smaller class, and
/// when both classes have n/2 vertices, vertex 0 carries label 0.
class LabelVector {
public:
    LabelVector() = default;

    /// Returns raw if it already satisfies the convention, else its complement.
    static LabelVector canonicalize(const BitVector& raw) {
        if (raw.size() < 1) {
            throw std::invalid_argument("canonicalize: need at least one vertex");
        }
        return LabelVector(is_canonical(raw) ? raw : raw.complemented());
    }

    /// Validating constructor; rejects bit vectors violating the convention.
    static LabelVector from_canonical(const BitVector& bits) {
        if (bits.size() < 1 || !is_canonical(bits)) {
            throw std::invalid_argument("labeling " + bits.to_string() + " is not in canonical form");
        }
        return LabelVector(bits);
    }

    static LabelVector from_mask(std::uint64_t mask, int n) {
        return from_canonical(BitVector::from_mask(mask, n));
    }

    static bool is_canonical(const BitVector& bits) noexcept {
        const int n = bits.size();
        const int m = bits.count();
        return 2 * m < n || (2 * m == n && !bits[0]);
    }

    const BitVector& bits() const noexcept { return bits_; }
    int size() const noexcept { return bits_.size(); }
    bool operator[](int i) const noexcept { return bits_[i]; }
    int class_size() const noexcept { return bits_.count(); }
    std::uint64_t mask() const { return bits_.mask(); }
    std::string to_string() const { return bits_.to_string(); }

    friend bool operator==(const LabelVector&, const LabelVector&) = default;
    friend std::strong_ordering operator<=>(const LabelVector& a, const LabelVector& b) {
        return a.bits_ <=> b.bits_;
    }

private:
    explicit LabelVector(BitVector bits) : bits_(std::move(bits)) {}

    BitVector bits_;
};

inline LabelVector canonicalize(const BitVector& raw) { return LabelVector::canonicalize(raw); }

/// |Theta_{n,m}|: C(n,m) for m < n/2 and C(n,n/2)/2 at the tie.
inline std::uint64_t class_count(int n, int m) {
    if (m < 0 || 2 * m > n) {
        return 0;
    }
    std::uint64_t c = 1;
    for (int k = 1; k <= m; ++k) {
        c = c * static_cast<std::uint64_t>(n - m + k) / static_cast<std::uint64_t>(k);
    }
    return 2 * m == n ? c / 2 : c;
}

inline void check_enumerable(int n, int cap) {
    if (n < 1) {
        throw std::invalid_argument("enumeration needs n >= 1, got " + std::to_string(n));
    }
    if (n > cap || n > kMaxEnumerableVertices) {
        throw std::out_of_range("n = " + std::to_string(n) + " exceeds the enumeration cap of " +
                                std::to_string(std::min(cap, kMaxEnumerableVertices)));
    }
}

/// All canonical labelings on n vertices as packed masks, in lexicographic
/// order of the bit sequence. There are 2^(n-1) of them.
inline std::vector<std::uint64_t> canonical_masks(int n, int cap = kDefaultEnumerationCap) {
    check_enumerable(n, cap);
    std::vector<std::uint64_t> out;
    out.reserve(std::size_t{1} << (n - 1));
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t rank = 0; rank < total; ++rank) {
        const std::uint64_t mask = reverse_bits(rank, n);
        if (is_canonical_mask(mask, n)) {
            out.push_back(mask);
        }
    }
    return out;
}

/// Streams every canonical labeling in lexicographic order to visit.
inline void enumerate_labelings(int n, const std::function<void(const LabelVector&)>& visit,
                                int cap = kDefaultEnumerationCap) {
    for (std::uint64_t mask : canonical_masks(n, cap)) {
        visit(LabelVector::from_mask(mask, n));
    }
}

inline std::vector<LabelVector> all_labelings(int n, int cap = kDefaultEnumerationCap) {
    std::vector<LabelVector> out;
    enumerate_labelings(n, [&](const LabelVector& v) { out.push_back(v); }, cap);
    return out;
}

inline void check_same_size(int a, int b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": vertex counts differ (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

/// Number of coordinates where the two bit sequences differ.
inline int hamming(const BitVector& a, const BitVector& b) {
    check_same_size(a.size(), b.size(), "hamming");
    int k = 0;
    for (std::size_t w = 0; w < a.words().size(); ++w) {
        k += std::popcount(a.words()[w] ^ b.words()[w]);
    }
    return k;
}

inline int hamming(const LabelVector& a, const LabelVector& b) { return hamming(a.bits(), b.bits()); }

/// min(k, n - k): distance up to the global label swap.
inline int sym_distance(const BitVector& a, const BitVector& b) {
    const int k = hamming(a, b);
    return std::min(k, a.size() - k);
}

inline int sym_distance(const LabelVector& a, const LabelVector& b) { return sym_distance(a.bits(), b.bits()); }

/// Sizes of D_1 (pairs joined under theta, split under eta) and D_2 (split
/// under theta, joined under eta).
struct DiscrepancyCounts {
    std::int64_t d1 = 0;
    std::int64_t d2 = 0;
    std::int64_t total() const noexcept { return d1 + d2; }
    friend bool operator==(const DiscrepancyCounts&, const DiscrepancyCounts&) = default;
};

/// Counts through the partition V_ab = {i : theta_i = a, eta_i = b}.
inline DiscrepancyCounts discrepancy_sets(const BitVector& theta, const BitVector& eta) {
    check_same_size(theta.size(), eta.size(), "discrepancy_sets");
    const int n = theta.size();
    std::int64_t v01 = 0;
    std::int64_t v10 = 0;
    std::int64_t v11 = 0;
    for (std::size_t w = 0; w < theta.words().size(); ++w) {
        const std::uint64_t t = theta.words()[w];
        const std::uint64_t e = eta.words()[w];
        v01 += std::popcount(~t & e);
        v10 += std::popcount(t & ~e);
        v11 += std::popcount(t & e);
    }
    const std::int64_t v00 = n - v01 - v10 - v11;
    return {v00 * v01 + v11 * v10, v00 * v10 + v01 * v11};
}

inline DiscrepancyCounts discrepancy_sets(const LabelVector& theta, const LabelVector& eta) {
    return discrepancy_sets(theta.bits(), eta.bits());
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_LABELING_HPP
