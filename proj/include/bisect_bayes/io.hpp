#ifndef BISECT_BAYES_IO_HPP
#define BISECT_BAYES_IO_HPP

// File formats:
//   graph JSON      {"n": int, "edges": [[i, j], ...]}, 0-based, i < j, sorted
//   labeling text   one '0'/'1' per vertex
//   posterior CSV   labeling,log_unnormalized,probability
//                   sorted by probability descending, then lexicographically
//   marginals CSV   vertex,inclusion_probability

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bisect_bayes/graph.hpp"
#include "bisect_bayes/inference.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/mcmc.hpp"
#include "bisect_bayes/posterior.hpp"

namespace bisect_bayes {

/// Shortest decimal text that parses back to the same double (17 significant digits).
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (auto [i, j] : g.edges()) {
        edges.push_back({i, j});
    }
    return {{"n", g.size()}, {"edges", std::move(edges)}};
}

inline Graph graph_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges")) {
        throw std::invalid_argument("graph JSON: expected an object with fields \"n\" and \"edges\"");
    }
    if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1 || doc["n"].get<long long>() > 1'000'000) {
        throw std::invalid_argument("graph JSON: \"n\" must be a positive integer");
    }
    const int n = doc["n"].get<int>();
    if (!doc["edges"].is_array()) {
        throw std::invalid_argument("graph JSON: \"edges\" must be an array");
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            throw std::invalid_argument("graph JSON: each edge must be a pair of integers");
        }
        const auto i = e[0].get<long long>();
        const auto j = e[1].get<long long>();
        if (i < 0 || j >= n || i >= j) {
            throw std::invalid_argument("graph JSON: edge [" + std::to_string(i) + ", " + std::to_string(j) +
                                        "] must satisfy 0 <= i < j < n");
        }
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
    return Graph::from_edges(n, edges);
}

inline void write_graph_json(std::ostream& os, const Graph& g) { os << graph_to_json(g).dump() << '\n'; }

inline Graph read_graph_json(std::istream& is) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("graph JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

inline LabelVector parse_labeling(std::string_view text) {
    std::string_view t = text;
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r' || t.back() == ' ')) {
        t.remove_suffix(1);
    }
    if (t.empty()) {
        throw std::invalid_argument("labeling: empty string");
    }
    return LabelVector::from_canonical(BitVector::from_string(t));
}

/// Rows sorted by probability descending, then lexicographically.
inline void write_posterior_csv(std::ostream& os, const PosteriorTable& table) {
    std::vector<std::size_t> order(table.entries());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return table.probability(a) > table.probability(b); });
    os << "labeling,log_unnormalized,probability\n";
    for (std::size_t i : order) {
        os << table.labeling(i).to_string() << ',' << format_real(table.log_unnormalized(i)) << ','
           << format_real(table.probability(i)) << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

inline double parse_csv_real(const std::string& text, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("posterior CSV line " + std::to_string(line_no) + ": bad number '" + text + "'");
}

}  // namespace detail

/// Reads a posterior CSV back into a table. The table must cover every
/// canonical labeling; probabilities are recomputed from the log weights and
/// must agree with the stored column.
inline PosteriorTable read_posterior_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || (line != "labeling,log_unnormalized,probability" &&
                                    line != "labeling,log_unnormalized,probability\r")) {
        throw std::invalid_argument("posterior CSV: missing header labeling,log_unnormalized,probability");
    }
    struct Row {
        std::uint64_t mask;
        double log_w;
        double prob;
    };
    std::vector<Row> rows;
    int n = -1;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3) {
            throw std::invalid_argument("posterior CSV line " + std::to_string(line_no) + ": expected 3 columns");
        }
        const LabelVector v = parse_labeling(cells[0]);
        if (n < 0) {
            n = v.size();
            check_enumerable(n, kMaxEnumerableVertices);
        } else if (v.size() != n) {
            throw std::invalid_argument("posterior CSV line " + std::to_string(line_no) + ": inconsistent labeling length");
        }
        rows.push_back({v.mask(), detail::parse_csv_real(cells[1], line_no), detail::parse_csv_real(cells[2], line_no)});
    }
    if (rows.empty()) {
        throw std::invalid_argument("posterior CSV: no rows");
    }
    std::sort(rows.begin(), rows.end(),
              [n](const Row& a, const Row& b) { return reverse_bits(a.mask, n) < reverse_bits(b.mask, n); });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].mask == rows[i - 1].mask) {
            throw std::invalid_argument("posterior CSV: duplicate labeling " +
                                        BitVector::from_mask(rows[i].mask, n).to_string());
        }
    }
    if (rows.size() != (std::size_t{1} << (n - 1))) {
        throw std::invalid_argument("posterior CSV: expected all " + std::to_string(std::size_t{1} << (n - 1)) +
                                    " canonical labelings, found " + std::to_string(rows.size()));
    }
    std::vector<std::uint64_t> masks;
    std::vector<double> log_w;
    for (const auto& r : rows) {
        masks.push_back(r.mask);
        log_w.push_back(r.log_w);
    }
    PosteriorTable table = PosteriorTable::from_log_weights(n, std::move(masks), std::move(log_w));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::abs(table.probability(i) - rows[i].prob) > 1e-9) {
            throw std::invalid_argument("posterior CSV: probability column disagrees with log weights at " +
                                        table.labeling(i).to_string());
        }
    }
    return table;
}

/// Posterior CSV for MCMC output: log_unnormalized is the log visit count and
/// probability the visit frequency. Only visited labelings appear.
inline void write_sample_posterior_csv(std::ostream& os, std::span<const LabelVector> samples) {
    const auto counts = sample_counts(samples);
    std::vector<std::pair<LabelVector, std::uint64_t>> rows(counts.begin(), counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const auto total = static_cast<double>(samples.size());
    os << "labeling,log_unnormalized,probability\n";
    for (const auto& [v, c] : rows) {
        os << v.to_string() << ',' << format_real(std::log(static_cast<double>(c))) << ','
           << format_real(static_cast<double>(c) / total) << '\n';
    }
}

inline void write_marginals_csv(std::ostream& os, std::span<const double> inclusion) {
    os << "vertex,inclusion_probability\n";
    for (std::size_t i = 0; i < inclusion.size(); ++i) {
        os << i << ',' << format_real(inclusion[i]) << '\n';
    }
}

inline nlohmann::json credible_to_json(const CredibleSet& set, std::optional<EnlargedSet> enlarged) {
    nlohmann::json members = nlohmann::json::array();
    const auto& list = enlarged ? enlarged->members : set.members;
    for (const auto& m : list) {
        members.push_back(m.to_string());
    }
    return {{"members", std::move(members)},
            {"achieved_mass", set.achieved_mass},
            {"gamma", set.gamma},
            {"radius", enlarged ? enlarged->radius : 0},
            {"base_size", set.members.size()}};
}

inline nlohmann::json odds_to_json(const OddsTestResult& r) {
    nlohmann::json j = {{"log_f", r.log_f}, {"threshold", r.threshold}, {"reject_null", r.reject_null}};
    j["error_bound_one_sided"] = r.error_bound_one_sided ? nlohmann::json(*r.error_bound_one_sided) : nlohmann::json();
    j["error_bound_two_term"] = r.error_bound_two_term ? nlohmann::json(*r.error_bound_two_term) : nlohmann::json();
    return j;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    writer(os);
    if (!os) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

template <class Reader>
auto read_file(const std::string& path, Reader&& reader) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::invalid_argument("cannot open '" + path + "' for reading");
    }
    return reader(is);
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_IO_HPP
