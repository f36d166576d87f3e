#ifndef BISECT_BAYES_EXPERIMENTS_HPP
#define BISECT_BAYES_EXPERIMENTS_HPP

// Monte Carlo harnesses. Every replication draws its randomness from
// derive_seed(master_seed, {cell, replication, ...}) and writes only its own
// slot, and summaries are reduced in cell-then-replication order, so the CSV
// does not depend on the worker count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bisect_bayes/bounds.hpp"
#include "bisect_bayes/checks.hpp"
#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/inference.hpp"
#include "bisect_bayes/io.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/mcmc.hpp"
#include "bisect_bayes/parallel.hpp"
#include "bisect_bayes/posterior.hpp"
#include "bisect_bayes/priors.hpp"
#include "bisect_bayes/random.hpp"

namespace bisect_bayes {

inline constexpr int kExperimentSchemaVersion = 1;

enum class ExperimentKind { Recovery, Coverage, TestError, PhaseDiagram, BoundCheck };
enum class PosteriorMode { Exact, Mcmc };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Recovery: return "recovery";
        case ExperimentKind::Coverage: return "coverage";
        case ExperimentKind::TestError: return "test_error";
        case ExperimentKind::PhaseDiagram: return "phase_diagram";
        case ExperimentKind::BoundCheck: return "bound_check";
    }
    return "?";
}

/// One (p, q) point of a sweep, with the sparse parametrisation it came from.
struct ModelCell {
    double p = 0.5;
    double q = 0.5;
    std::optional<SparsityParams> sparsity;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Recovery;
    int n = 0;
    PriorSpec prior{FixedBernoulli{0.5}};
    std::vector<ModelCell> cells;
    std::uint64_t replications = 0;
    std::uint64_t master_seed = 0;
    double gamma = 0.05;
    std::vector<double> thresholds{1.0};
    /// Ball B_k = {eta : sym_distance(eta, theta0) < radius}.
    int radius = 1;
    /// Planting: a fixed labeling, a fixed class size, or uniform over Theta_n.
    std::optional<LabelVector> planted_labeling;
    std::optional<int> planted_m;
    PosteriorMode mode = PosteriorMode::Exact;
    std::optional<McmcConfig> mcmc;
    int cap = kDefaultEnumerationCap;
    /// Dense-phase constant; -log rho(p, q) per cell when absent.
    std::optional<double> c;
    int m0 = 0;
    std::optional<int> m1;
    std::optional<std::string> output;
    /// The JSON the config was read from, echoed into the metadata sidecar.
    nlohmann::json source = nlohmann::json::object();

    void validate() const {
        if (n < 2) {
            throw std::invalid_argument("experiment: n must be at least 2");
        }
        if (replications < 1) {
            throw std::invalid_argument("experiment: replications must be at least 1");
        }
        if (cells.empty()) {
            throw std::invalid_argument("experiment: the model grid is empty");
        }
        if (radius < 1 || radius >= n) {
            throw std::invalid_argument("experiment: radius must lie in 1..n-1");
        }
        detail::require_gamma(gamma);
        if (thresholds.empty()) {
            throw std::invalid_argument("experiment: thresholds must be nonempty");
        }
        for (double t : thresholds) {
            if (!(t > 0.0)) {
                throw std::invalid_argument("experiment: thresholds must be positive");
            }
        }
        if (planted_labeling && planted_labeling->size() != n) {
            throw std::invalid_argument("experiment: planted_labeling has the wrong length");
        }
        if (planted_m && (*planted_m < 0 || *planted_m > n / 2)) {
            throw std::invalid_argument("experiment: planted_m must lie in 0..floor(n/2)");
        }
        if (mode == PosteriorMode::Exact) {
            check_enumerable(n, cap);
        } else if (kind == ExperimentKind::Coverage || kind == ExperimentKind::TestError ||
                   kind == ExperimentKind::BoundCheck) {
            throw std::invalid_argument("experiment: " + to_string(kind) + " needs the exact posterior");
        }
        if (kind == ExperimentKind::BoundCheck) {
            check_enumerable(n, std::min(cap, 16));
        }
        if (kind == ExperimentKind::PhaseDiagram) {
            for (const auto& cell : cells) {
                if (!cell.sparsity) {
                    throw std::invalid_argument("experiment: phase_diagram needs a sparsity grid");
                }
            }
        }
        if (kind == ExperimentKind::TestError) {
            if (m0 < 0 || m0 > n / 2 || (m1 && (*m1 < 0 || *m1 > n / 2 || *m1 == m0))) {
                throw std::invalid_argument("experiment: m0 and m1 must be distinct class sizes in 0..floor(n/2)");
            }
        }
    }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw std::invalid_argument(std::string("experiment config: missing field \"") + key + "\"");
    }
    return doc.at(key);
}

template <class T>
T json_number(const nlohmann::json& v, const char* key) {
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            throw std::invalid_argument(std::string("experiment config: \"") + key + "\" must be an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_unsigned()) {
                return v.get<T>();
            }
            if (v.get<long long>() < 0) {
                throw std::invalid_argument(std::string("experiment config: \"") + key + "\" must be nonnegative");
            }
        }
        return static_cast<T>(v.get<long long>());
    } else {
        if (!v.is_number()) {
            throw std::invalid_argument(std::string("experiment config: \"") + key + "\" must be a number");
        }
        return v.get<T>();
    }
}

inline ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::Recovery, ExperimentKind::Coverage, ExperimentKind::TestError,
                   ExperimentKind::PhaseDiagram, ExperimentKind::BoundCheck}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw std::invalid_argument("experiment config: unknown kind '" + s + "'");
}

inline std::vector<ModelCell> parse_grid(const nlohmann::json& grid, int n) {
    if (!grid.is_object()) {
        throw std::invalid_argument("experiment config: \"grid\" must be an object");
    }
    const std::string regime = require_field(grid, "regime").get<std::string>();
    const auto& points = require_field(grid, "points");
    if (!points.is_array() || points.empty()) {
        throw std::invalid_argument("experiment config: grid points must be a nonempty array");
    }
    std::vector<ModelCell> cells;
    for (const auto& pt : points) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
            throw std::invalid_argument("experiment config: each grid point must be a pair of numbers");
        }
        const double a = pt[0].get<double>();
        const double b = pt[1].get<double>();
        if (regime == "pq") {
            const EdgeModel m(a, b);
            cells.push_back({m.p(), m.q(), std::nullopt});
        } else if (regime == "chernoff-hellinger" || regime == "kesten-stigum") {
            const SparsityParams sp{regime == "kesten-stigum" ? SparsityRegime::KestenStigum
                                                              : SparsityRegime::ChernoffHellinger,
                                    a, b, n};
            const EdgeModel m = edge_probs_from_sparsity(sp);
            cells.push_back({m.p(), m.q(), sp});
        } else {
            throw std::invalid_argument("experiment config: grid regime must be pq, chernoff-hellinger or kesten-stigum");
        }
    }
    return cells;
}

}  // namespace detail

/// Parses and validates a schema_version 1 config. Unknown fields are errors.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw std::invalid_argument("experiment config: expected a JSON object");
    }
    static const std::set<std::string> known{
        "schema_version", "kind", "n", "prior", "p", "q", "grid", "replications", "master_seed", "gamma",
        "thresholds", "radius", "planted_labeling", "planted_m", "mode", "mcmc", "cap", "c", "m0", "m1",
        "complement", "output"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("experiment config: unknown field \"" + key + "\"");
        }
    }
    if (detail::json_number<int>(detail::require_field(doc, "schema_version"), "schema_version") !=
        kExperimentSchemaVersion) {
        throw std::invalid_argument("experiment config: unsupported schema_version");
    }
    using detail::json_number;
    ExperimentConfig cfg;
    cfg.source = doc;
    try {
        cfg.kind = detail::parse_kind(detail::require_field(doc, "kind").get<std::string>());
        cfg.n = json_number<int>(detail::require_field(doc, "n"), "n");
        if (cfg.n < 2 || cfg.n > kMaxEnumerableVertices) {
            throw std::invalid_argument("experiment config: n must lie in 2.." +
                                        std::to_string(kMaxEnumerableVertices));
        }
        if (doc.contains("prior")) {
            cfg.prior = PriorSpec::parse(doc["prior"].get<std::string>());
        }
        const bool has_pq = doc.contains("p") || doc.contains("q");
        if (has_pq == doc.contains("grid")) {
            throw std::invalid_argument("experiment config: give either p and q or a grid");
        }
        if (has_pq) {
            const EdgeModel m(json_number<double>(detail::require_field(doc, "p"), "p"),
                              json_number<double>(detail::require_field(doc, "q"), "q"));
            cfg.cells.push_back({m.p(), m.q(), std::nullopt});
        } else {
            cfg.cells = detail::parse_grid(doc["grid"], cfg.n);
        }
        cfg.replications = json_number<std::uint64_t>(detail::require_field(doc, "replications"), "replications");
        if (doc.contains("master_seed")) {
            cfg.master_seed = json_number<std::uint64_t>(doc["master_seed"], "master_seed");
        }
        if (doc.contains("gamma")) {
            cfg.gamma = json_number<double>(doc["gamma"], "gamma");
        }
        if (doc.contains("thresholds")) {
            if (!doc["thresholds"].is_array()) {
                throw std::invalid_argument("experiment config: \"thresholds\" must be an array");
            }
            cfg.thresholds.clear();
            for (const auto& t : doc["thresholds"]) {
                cfg.thresholds.push_back(json_number<double>(t, "thresholds"));
            }
        }
        cfg.radius = doc.contains("radius") ? json_number<int>(doc["radius"], "radius") : std::max(1, cfg.n / 4);
        if (doc.contains("planted_labeling") && doc.contains("planted_m")) {
            throw std::invalid_argument("experiment config: give at most one of planted_labeling and planted_m");
        }
        if (doc.contains("planted_labeling")) {
            cfg.planted_labeling = parse_labeling(doc["planted_labeling"].get<std::string>());
        }
        if (doc.contains("planted_m")) {
            cfg.planted_m = json_number<int>(doc["planted_m"], "planted_m");
        }
        if (doc.contains("mode")) {
            const auto mode = doc["mode"].get<std::string>();
            if (mode != "exact" && mode != "mcmc") {
                throw std::invalid_argument("experiment config: mode must be exact or mcmc");
            }
            cfg.mode = mode == "exact" ? PosteriorMode::Exact : PosteriorMode::Mcmc;
        }
        if (doc.contains("mcmc")) {
            const auto& m = doc["mcmc"];
            McmcConfig mc = McmcConfig::defaults_for(cfg.n, 0);
            if (m.contains("burn_in")) mc.burn_in = json_number<std::uint64_t>(m["burn_in"], "burn_in");
            if (m.contains("samples")) mc.samples = json_number<std::uint64_t>(m["samples"], "samples");
            if (m.contains("thin")) mc.thin = json_number<std::uint64_t>(m["thin"], "thin");
            mc.validate();
            cfg.mcmc = mc;
        }
        if (doc.contains("cap")) {
            cfg.cap = json_number<int>(doc["cap"], "cap");
        }
        if (doc.contains("c")) {
            cfg.c = json_number<double>(doc["c"], "c");
        }
        if (doc.contains("m0")) {
            cfg.m0 = json_number<int>(doc["m0"], "m0");
        } else if (cfg.kind == ExperimentKind::TestError) {
            throw std::invalid_argument("experiment config: test_error needs m0");
        }
        const bool complement = doc.contains("complement") && doc["complement"].get<bool>();
        if (doc.contains("m1") == complement && cfg.kind == ExperimentKind::TestError) {
            throw std::invalid_argument("experiment config: test_error needs exactly one of m1 and complement");
        }
        if (doc.contains("m1")) {
            cfg.m1 = json_number<int>(doc["m1"], "m1");
        }
        if (doc.contains("output")) {
            cfg.output = doc["output"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

/// Rows of formatted cells under a fixed header. NaN is written as an empty field.
struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::Recovery;
    bool approximate = false;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) {
            throw std::out_of_range("experiment result has no column '" + name + "'");
        }
        return static_cast<std::size_t>(it - columns.begin());
    }

    double value(std::size_t row, const std::string& name) const {
        const std::string& s = rows.at(row).at(column_index(name));
        return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            os << (i ? "," : "") << columns[i];
        }
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << row[i];
            }
            os << '\n';
        }
    }
};

namespace detail {

/// Builds one output row column by column.
class RowBuilder {
public:
    RowBuilder(ExperimentResult& result, bool first) : result_(result), first_(first) {}

    void put(const std::string& name, double v) { push(name, std::isnan(v) ? std::string() : format_real(v)); }
    void put(const std::string& name, const std::string& v) { push(name, v); }
    void put_flag(const std::string& name, bool v) { push(name, v ? "1" : "0"); }

    std::vector<std::string> take() { return std::move(row_); }

private:
    void push(const std::string& name, std::string v) {
        if (first_) {
            result_.columns.push_back(name);
        } else if (result_.columns.at(row_.size()) != name) {
            throw std::logic_error("experiment row layout changed at column " + name);
        }
        row_.push_back(std::move(v));
    }

    ExperimentResult& result_;
    bool first_;
    std::vector<std::string> row_;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean with SE sample-sd / sqrt(R).
inline Estimate mean_estimate(const std::vector<double>& xs) {
    const double r = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    const double mean = sum / r;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / (r - 1.0) / r)};
}

/// Frequency of 0/1 outcomes with SE sqrt(p(1-p)/R).
inline Estimate frequency_estimate(const std::vector<double>& xs) {
    const double p = mean_estimate(xs).mean;
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(xs.size()))};
}

inline std::vector<double> column_of(const std::vector<std::vector<double>>& reps, std::size_t j) {
    std::vector<double> out;
    out.reserve(reps.size());
    for (const auto& r : reps) {
        out.push_back(r[j]);
    }
    return out;
}

/// Runs fn(seed) for every replication of a cell; fn returns a fixed-width record.
template <class Fn>
std::vector<std::vector<double>> replicate(const ExperimentConfig& cfg, std::uint64_t cell, std::uint64_t branch,
                                           unsigned threads, Fn&& fn) {
    std::vector<std::vector<double>> out(cfg.replications);
    parallel_for(cfg.replications, threads, [&](std::size_t r) {
        out[r] = fn(derive_seed(cfg.master_seed, {cell, static_cast<std::uint64_t>(r), branch}));
    });
    return out;
}

/// Uniform random canonical labeling with class size m.
inline LabelVector random_labeling_of_size(int n, int m, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        idx[static_cast<std::size_t>(i)] = i;
    }
    BitVector b(n);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        b.set(idx[static_cast<std::size_t>(i)], true);
    }
    // At m = n/2 each canonical labeling has two preimages, so this stays uniform.
    return canonicalize(b);
}

inline LabelVector random_labeling(int n, Rng& rng) {
    BitVector b(n);
    for (int i = 0; i < n; ++i) {
        b.set(i, rng.uniform() < 0.5);
    }
    return canonicalize(b);
}

inline LabelVector plant(const ExperimentConfig& cfg, Rng& rng) {
    if (cfg.planted_labeling) {
        return *cfg.planted_labeling;
    }
    if (cfg.planted_m) {
        return random_labeling_of_size(cfg.n, *cfg.planted_m, rng);
    }
    return random_labeling(cfg.n, rng);
}

/// Canonical labeling of class size m with its ones at the end.
inline LabelVector representative(int n, int m) {
    BitVector b(n);
    for (int i = n - m; i < n; ++i) {
        b.set(i, true);
    }
    return LabelVector::from_canonical(b);
}

struct PosteriorSummary {
    bool recovered = false;
    double truth_mass = 0.0;
    double miss_mass = 0.0;
    double ball_mass = 0.0;
    double ball_miss = 0.0;
};

inline PosteriorSummary summarise(const PosteriorTable& table, const LabelVector& truth, int radius) {
    const sets::Ball ball{truth, radius};
    return {posterior_mode(table) == truth, posterior_mass(table, sets::Exactly{truth}),
            posterior_mass(table, sets::Not{sets::Exactly{truth}}), posterior_mass(table, ball),
            posterior_mass(table, sets::Not{ball})};
}

inline PosteriorSummary summarise(const McmcResult& res, const LabelVector& truth, int radius) {
    double hit = 0.0;
    double in_ball = 0.0;
    for (const auto& s : res.samples) {
        hit += s == truth ? 1.0 : 0.0;
        in_ball += sym_distance(s, truth) < radius ? 1.0 : 0.0;
    }
    const double total = static_cast<double>(res.samples.size());
    return {posterior_mode(std::span<const LabelVector>(res.samples)) == truth, hit / total, 1.0 - hit / total,
            in_ball / total, 1.0 - in_ball / total};
}

inline void put_estimate(RowBuilder& row, const std::string& name, const Estimate& e) {
    row.put(name, e.mean);
    row.put(name + "_se", e.se);
}

inline void put_model(RowBuilder& row, std::size_t cell_index, const ExperimentConfig& cfg, const ModelCell& cell) {
    row.put("cell", static_cast<double>(cell_index));
    row.put("n", cfg.n);
    row.put("prior", cfg.prior.to_string().find(',') == std::string::npos ? cfg.prior.to_string()
                                                                           : "\"" + cfg.prior.to_string() + "\"");
    std::string regime = "pq";
    double first = std::numeric_limits<double>::quiet_NaN();
    double second = first;
    if (cell.sparsity) {
        regime = cell.sparsity->regime == SparsityRegime::KestenStigum ? "kesten-stigum" : "chernoff-hellinger";
        first = cell.sparsity->first;
        second = cell.sparsity->second;
    }
    row.put("regime", regime);
    row.put("first", first);
    row.put("second", second);
    row.put("p", cell.p);
    row.put("q", cell.q);
    row.put("replications", static_cast<double>(cfg.replications));
}

inline void require_fits_bound(double estimate, double se, double bound, bool& pass) {
    pass = std::isnan(bound) || estimate <= bound + 3.0 * se;
}

}  // namespace detail

inline ExperimentResult run_recovery_like(const ExperimentConfig& cfg, unsigned threads) {
    cfg.validate();
    ExperimentResult result;
    result.kind = cfg.kind;
    result.approximate = cfg.mode == PosteriorMode::Mcmc;
    const int n = cfg.n;
    const double g = g_constant(cfg.prior).value;

    for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
        const ModelCell& cell = cfg.cells[ci];
        const EdgeModel model(cell.p, cell.q);

        // The prop21 bound for S = Theta_n \ {theta0} depends on theta0 only
        // through its class size.
        std::vector<double> prop21_by_m;
        if (cfg.kind == ExperimentKind::BoundCheck) {
            const auto all = all_labelings(n, cfg.cap);
            for (int m = 0; m <= n / 2; ++m) {
                const LabelVector rep = detail::representative(n, m);
                std::vector<LabelVector> s;
                s.reserve(all.size() - 1);
                for (const auto& v : all) {
                    if (v != rep) {
                        s.push_back(v);
                    }
                }
                prop21_by_m.push_back(prop21_bound(rep, s, cfg.prior, model).value);
            }
        }

        const auto reps = detail::replicate(cfg, ci, 0, threads, [&](std::uint64_t seed) {
            Rng rng(derive_seed(seed, {0}));
            const LabelVector truth = detail::plant(cfg, rng);
            const Graph x = sample_graph(truth, model, derive_seed(seed, {1}));
            detail::PosteriorSummary s;
            if (cfg.mode == PosteriorMode::Exact) {
                s = detail::summarise(exact_posterior(x, cfg.prior, model, {cfg.cap, 1, CutCountMethod::GrayCode}),
                                      truth, cfg.radius);
            } else {
                McmcConfig mc = cfg.mcmc.value_or(McmcConfig::defaults_for(n, 0));
                mc.seed = derive_seed(seed, {2});
                s = detail::summarise(mcmc_posterior(x, cfg.prior, model, mc), truth, cfg.radius);
            }
            const double prop21 = prop21_by_m.empty() ? 0.0 : prop21_by_m[static_cast<std::size_t>(truth.class_size())];
            return std::vector<double>{s.recovered ? 1.0 : 0.0, s.truth_mass, s.miss_mass, s.ball_mass, s.ball_miss,
                                       prop21};
        });

        const auto recovered = detail::frequency_estimate(detail::column_of(reps, 0));
        const auto truth_mass = detail::mean_estimate(detail::column_of(reps, 1));
        const auto miss_mass = detail::mean_estimate(detail::column_of(reps, 2));
        const auto ball_mass = detail::mean_estimate(detail::column_of(reps, 3));
        const auto ball_miss = detail::mean_estimate(detail::column_of(reps, 4));

        const double c = cfg.c.value_or(neg_log_affinity(model));
        const double dense = thm41_dense_bound(n, c, g).value;
        const double alpha41 = thm41_alpha_from_model(n, model);
        const double uniform = cfg.prior.is_uniform_on_labelings() ? thm41_uniform_bound(n, alpha41).value
                                                                   : std::numeric_limits<double>::quiet_NaN();
        const double thm41 = std::isnan(uniform) ? dense : std::min(dense, uniform);
        const double alpha42 = static_cast<double>(cfg.radius) / n;
        const double beta42 = -n * std::log(hellinger_affinity(model));
        const double thm42 = thm42_bound(n, alpha42, beta42, g).value;

        detail::RowBuilder row(result, ci == 0);
        detail::put_model(row, ci, cfg, cell);
        row.put("mode", cfg.mode == PosteriorMode::Exact ? "exact" : "mcmc");
        detail::put_estimate(row, "recovery_freq", recovered);
        detail::put_estimate(row, "truth_mass", truth_mass);
        detail::put_estimate(row, "miss_mass", miss_mass);
        row.put("radius", cfg.radius);
        detail::put_estimate(row, "ball_mass", ball_mass);
        detail::put_estimate(row, "ball_miss", ball_miss);
        row.put("rho", hellinger_affinity(model));
        row.put("g", g);
        row.put("c", c);
        row.put("thm41_dense_bound", dense);
        row.put("alpha41", alpha41);
        row.put("thm41_uniform_bound", uniform);
        row.put("thm41_bound", thm41);
        row.put("recovery_lower", 1.0 - std::min(thm41, 1.0));
        bool pass = false;
        detail::require_fits_bound(miss_mass.mean, miss_mass.se, thm41, pass);
        row.put_flag("thm41_pass", pass);
        row.put("alpha42", alpha42);
        row.put("beta42", beta42);
        row.put("thm42_bound", thm42);
        row.put("ball_lower", 1.0 - std::min(thm42, 1.0));
        detail::require_fits_bound(ball_miss.mean, ball_miss.se, thm42, pass);
        row.put_flag("thm42_pass", pass);
        if (cfg.kind == ExperimentKind::PhaseDiagram) {
            const auto& sp = *cell.sparsity;
            row.put("theory", sp.regime == SparsityRegime::ChernoffHellinger
                                  ? thm41_ch_sufficient(sp.first, sp.second, n)
                                  : ks_equivalence_sandwich(sp.first, sp.second).lower);
        }
        if (cfg.kind == ExperimentKind::BoundCheck) {
            const double prop21 = detail::mean_estimate(detail::column_of(reps, 5)).mean;
            row.put("prop21_bound", prop21);
            detail::require_fits_bound(miss_mass.mean, miss_mass.se, prop21, pass);
            row.put_flag("prop21_pass", pass);
        }
        result.rows.push_back(row.take());
    }
    return result;
}

/// Exact-recovery frequency, Pi({theta0} | X) and Pi(B_k | X) per cell, with
/// the exact- and almost-exact-recovery bounds alongside.
inline ExperimentResult run_recovery(const ExperimentConfig& cfg, unsigned threads = 1) {
    return run_recovery_like(cfg, threads);
}

/// Recovery statistics over a sparsity grid plus the sufficient-condition
/// value of each cell.
inline ExperimentResult run_phase_diagram(const ExperimentConfig& cfg, unsigned threads = 1) {
    return run_recovery_like(cfg, threads);
}

/// Recovery statistics plus the single-alternative bound for S = Theta_n \ {theta0}.
inline ExperimentResult run_bound_check(const ExperimentConfig& cfg, unsigned threads = 1) {
    return run_recovery_like(cfg, threads);
}

/// Frequentist coverage of HPD credible sets and of their k-enlargements.
inline ExperimentResult run_coverage(const ExperimentConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    ExperimentResult result;
    result.kind = cfg.kind;
    const int n = cfg.n;
    for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
        const ModelCell& cell = cfg.cells[ci];
        const EdgeModel model(cell.p, cell.q);
        const auto reps = detail::replicate(cfg, ci, 0, threads, [&](std::uint64_t seed) {
            Rng rng(derive_seed(seed, {0}));
            const LabelVector truth = detail::plant(cfg, rng);
            const Graph x = sample_graph(truth, model, derive_seed(seed, {1}));
            const PosteriorTable table = exact_posterior(x, cfg.prior, model, {cfg.cap, 1, CutCountMethod::GrayCode});
            const CredibleSet hpd = hpd_credible_set(table, cfg.gamma);
            const bool hpd_cover = hpd.contains(truth);
            bool enlarged_cover = hpd_cover;
            for (std::size_t b = 0; !enlarged_cover && b < hpd.members.size(); ++b) {
                enlarged_cover = sym_distance(hpd.members[b], truth) < cfg.radius;
            }
            const sets::Ball ball{truth, cfg.radius};
            return std::vector<double>{hpd_cover ? 1.0 : 0.0,
                                       enlarged_cover ? 1.0 : 0.0,
                                       posterior_mass(table, sets::Not{sets::Exactly{truth}}),
                                       posterior_mass(table, sets::Not{ball}),
                                       static_cast<double>(hpd.members.size()),
                                       hpd.achieved_mass};
        });
        const auto hpd = detail::frequency_estimate(detail::column_of(reps, 0));
        const auto enlarged = detail::frequency_estimate(detail::column_of(reps, 1));
        const auto x_hat = detail::mean_estimate(detail::column_of(reps, 2));
        const auto x_ball = detail::mean_estimate(detail::column_of(reps, 3));
        bool inclusion_held = true;
        for (const auto& r : reps) {
            inclusion_held = inclusion_held && r[1] >= r[0];
        }
        const double one_minus_gamma = 1.0 - cfg.gamma;
        const double lower = std::max(0.0, confidence_lower_bound(x_hat.mean, cfg.gamma).value);
        const double lower_ball = std::max(0.0, confidence_lower_bound(x_ball.mean, cfg.gamma).value);

        const double g = g_constant(cfg.prior).value;
        const double dense = thm41_dense_bound(n, neg_log_affinity(model), g).value;
        const double uniform = cfg.prior.is_uniform_on_labelings()
                                   ? thm41_uniform_bound(n, thm41_alpha_from_model(n, model)).value
                                   : std::numeric_limits<double>::infinity();
        const double thm41 = std::min(dense, uniform);
        const double thm42 =
            thm42_bound(n, static_cast<double>(cfg.radius) / n, -n * std::log(hellinger_affinity(model)), g).value;

        detail::RowBuilder row(result, ci == 0);
        detail::put_model(row, ci, cfg, cell);
        row.put("gamma", cfg.gamma);
        row.put("radius", cfg.radius);
        detail::put_estimate(row, "hpd_coverage", hpd);
        detail::put_estimate(row, "enlarged_coverage", enlarged);
        detail::put_estimate(row, "x_hat", x_hat);
        row.put("hpd_lower", lower);
        row.put_flag("hpd_pass", hpd.mean >= lower - 3.0 * hpd.se);
        detail::put_estimate(row, "x_hat_ball", x_ball);
        row.put("enlarged_lower", lower_ball);
        row.put_flag("enlarged_pass", enlarged.mean >= lower_ball - 3.0 * enlarged.se);
        row.put_flag("inclusion_held", inclusion_held);
        row.put("thm41_bound", thm41);
        row.put("hpd_theory_lower", std::max(0.0, 1.0 - thm41 / one_minus_gamma));
        row.put("thm42_bound", thm42);
        row.put("enlarged_theory_lower", std::max(0.0, 1.0 - thm42 / one_minus_gamma));
        row.put("mean_set_size", detail::mean_estimate(detail::column_of(reps, 4)).mean);
        row.put("mean_achieved_mass", detail::mean_estimate(detail::column_of(reps, 5)).mean);
        result.rows.push_back(row.take());
    }
    return result;
}

/// Type-I and type-II frequencies of the posterior-odds test
/// H0: theta in Theta_{n,m0} against H1: theta in Theta_{n,m1} (or its
/// complement), one row per (cell, threshold).
inline ExperimentResult run_test_error(const ExperimentConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    ExperimentResult result;
    result.kind = cfg.kind;
    const int n = cfg.n;
    const sets::ClassSize a_set{cfg.m0};
    auto plant_alternative = [&](Rng& rng) {
        if (cfg.m1) {
            return detail::random_labeling_of_size(n, *cfg.m1, rng);
        }
        for (;;) {
            LabelVector v = detail::random_labeling(n, rng);
            if (v.class_size() != cfg.m0) {
                return v;
            }
        }
    };
    std::size_t row_index = 0;
    for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
        const ModelCell& cell = cfg.cells[ci];
        const EdgeModel model(cell.p, cell.q);
        // Record: log F, Pi(A | X), Pi(B | X).
        auto one = [&](std::uint64_t seed, bool under_null) {
            Rng rng(derive_seed(seed, {0}));
            const LabelVector truth =
                under_null ? detail::random_labeling_of_size(n, cfg.m0, rng) : plant_alternative(rng);
            const Graph x = sample_graph(truth, model, derive_seed(seed, {1}));
            const PosteriorTable table = exact_posterior(x, cfg.prior, model, {cfg.cap, 1, CutCountMethod::GrayCode});
            const double pa = posterior_mass(table, a_set);
            const double pb = cfg.m1 ? posterior_mass(table, sets::ClassSize{*cfg.m1}) : 1.0 - pa;
            const double pa_c = posterior_mass(table, sets::Not{a_set});
            const double pb_c = cfg.m1 ? posterior_mass(table, sets::Not{sets::ClassSize{*cfg.m1}}) : pa;
            const double log_f = class_size_test(table, cfg.m0, cfg.m1, 1.0).log_f;
            return std::vector<double>{log_f, pa_c, pb, pb_c};
        };
        const auto null_reps =
            detail::replicate(cfg, ci, 0, threads, [&](std::uint64_t seed) { return one(seed, true); });
        const auto alt_reps =
            detail::replicate(cfg, ci, 1, threads, [&](std::uint64_t seed) { return one(seed, false); });

        const auto a_hat = detail::mean_estimate(detail::column_of(null_reps, 1));
        const auto b_hat = detail::mean_estimate(detail::column_of(null_reps, 2));
        const auto a_alt = detail::mean_estimate(detail::column_of(alt_reps, 3));
        for (double t : cfg.thresholds) {
            const double log_t = std::log(t);
            std::vector<double> type1;
            std::vector<double> type2;
            for (const auto& r : null_reps) {
                type1.push_back(r[0] > log_t ? 1.0 : 0.0);
            }
            for (const auto& r : alt_reps) {
                type2.push_back(r[0] <= log_t ? 1.0 : 0.0);
            }
            const auto e1 = detail::frequency_estimate(type1);
            const auto e2 = detail::frequency_estimate(type2);
            const OddsErrorBounds bound1 = odds_error_bounds(a_hat.mean, t, b_hat.mean);
            // Swapping the hypotheses inverts F, so P(F <= t) is bounded with threshold 1/t.
            const OddsErrorBounds bound2 = odds_error_bounds(a_alt.mean, 1.0 / t);

            detail::RowBuilder row(result, row_index++ == 0);
            detail::put_model(row, ci, cfg, cell);
            row.put("m0", cfg.m0);
            row.put("m1", cfg.m1 ? static_cast<double>(*cfg.m1) : std::numeric_limits<double>::quiet_NaN());
            row.put_flag("complement", !cfg.m1);
            row.put("threshold", t);
            detail::put_estimate(row, "type1_freq", e1);
            detail::put_estimate(row, "a_hat", a_hat);
            detail::put_estimate(row, "b_hat", b_hat);
            row.put("type1_bound", bound1.one_sided);
            row.put("type1_bound_two_term", *bound1.two_term);
            row.put_flag("type1_pass", e1.mean <= bound1.one_sided + 3.0 * e1.se);
            detail::put_estimate(row, "type2_freq", e2);
            detail::put_estimate(row, "a_hat_alt", a_alt);
            row.put("type2_bound", bound2.one_sided);
            row.put_flag("type2_pass", e2.mean <= bound2.one_sided + 3.0 * e2.se);
            result.rows.push_back(row.take());
        }
    }
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
    switch (cfg.kind) {
        case ExperimentKind::Recovery: return run_recovery(cfg, threads);
        case ExperimentKind::Coverage: return run_coverage(cfg, threads);
        case ExperimentKind::TestError: return run_test_error(cfg, threads);
        case ExperimentKind::PhaseDiagram: return run_phase_diagram(cfg, threads);
        case ExperimentKind::BoundCheck: return run_bound_check(cfg, threads);
    }
    throw std::logic_error("unknown experiment kind");
}

/// Sidecar describing a run. Only "created_at" varies between identical runs.
inline nlohmann::json experiment_metadata(const ExperimentConfig& cfg, const ExperimentResult& result,
                                          bool with_timestamp = true) {
    nlohmann::json meta = {{"schema_version", kExperimentSchemaVersion},
                           {"kind", to_string(cfg.kind)},
                           {"master_seed", cfg.master_seed},
                           {"approximate", result.approximate},
                           {"posterior", result.approximate ? "mcmc (approximate)" : "exact"},
                           {"grid_version", kGridVersion},
                           {"rows", result.rows.size()},
                           {"columns", result.columns},
                           {"config", cfg.source}};
    if (with_timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        meta["created_at"] = buf;
    }
    return meta;
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_EXPERIMENTS_HPP
