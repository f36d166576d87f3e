#ifndef BISECT_BAYES_CLI_HPP
#define BISECT_BAYES_CLI_HPP

// Command-line front end. dispatch() never calls exit(), so it can be driven
// from tests with string streams.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bisect_bayes/bounds.hpp"
#include "bisect_bayes/checks.hpp"
#include "bisect_bayes/experiments.hpp"
#include "bisect_bayes/inference.hpp"
#include "bisect_bayes/io.hpp"
#include "bisect_bayes/mcmc.hpp"
#include "bisect_bayes/parallel.hpp"
#include "bisect_bayes/posterior.hpp"
#include "bisect_bayes/priors.hpp"

namespace bisect_bayes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline std::string one_line(std::string s) {
    for (char& ch : s) {
        if (ch == '\n' || ch == '\r') {
            ch = ' ';
        }
    }
    while (!s.empty() && s.back() == ' ') {
        s.pop_back();
    }
    return s;
}

/// Writes to `path`, or to `out` when path is empty or "-".
template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& writer) {
    if (path.empty() || path == "-") {
        writer(out);
    } else {
        write_file(path, writer);
    }
}

inline Graph load_graph(const std::string& path) {
    return read_file(path, [](std::istream& is) { return read_graph_json(is); });
}

/// Options shared by the subcommands that build a posterior from a graph.
struct ModelOptions {
    std::string graph;
    std::string prior = "bernoulli:r=0.5";
    std::optional<double> p;
    std::optional<double> q;
    int cap = kDefaultEnumerationCap;

    void add_to(CLI::App& app, bool graph_required) {
        auto* g = app.add_option("--graph", graph, "Graph JSON file");
        if (graph_required) {
            g->required();
        }
        app.add_option("--prior", prior, "Prior: bernoulli:r=R, beta:alpha=A,beta=B or uniform-m")
            ->capture_default_str();
        app.add_option("--p", p, "Within-class edge probability, in (0,1)");
        app.add_option("--q", q, "Between-class edge probability, in (0,1)");
        app.add_option("--cap", cap, "Largest n for exact enumeration")->capture_default_str()->check(
            CLI::Range(1, kMaxEnumerableVertices));
    }

    EdgeModel model() const {
        if (!p || !q) {
            throw std::invalid_argument("--p and --q are required");
        }
        return EdgeModel(*p, *q);
    }

    PosteriorTable exact(unsigned threads) const {
        const Graph x = load_graph(graph);
        return exact_posterior(x, PriorSpec::parse(prior), model(), {cap, threads, CutCountMethod::GrayCode});
    }
};

/// A posterior table from --posterior CSV, or computed from --graph.
inline PosteriorTable table_from(const std::string& posterior_path, const ModelOptions& mo, unsigned threads) {
    if (!posterior_path.empty()) {
        if (!mo.graph.empty()) {
            throw std::invalid_argument("give either --posterior or --graph, not both");
        }
        return read_file(posterior_path, [](std::istream& is) { return read_posterior_csv(is); });
    }
    if (mo.graph.empty()) {
        throw std::invalid_argument("one of --posterior or --graph is required");
    }
    return mo.exact(threads);
}

inline nlohmann::json report_json(const BoundReport& r) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [k, v] : r.inputs) {
        inputs[k] = v;
    }
    return {{"name", r.name}, {"value", r.value}, {"value_clipped", r.value_clipped()}, {"log_value", r.log_value},
            {"inputs", std::move(inputs)}};
}

}  // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 on success, 2 on a usage or validation error, 1 on any other failure
/// (including a failed `verify`).
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Bayesian community detection in the planted bi-section model", "bisect_bayes"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<unsigned> threads_flag;
    app.add_option("--threads", threads_flag, "Worker threads (default: $BISECT_BAYES_THREADS, else 1)")
        ->check(CLI::Range(1U, 4096U));

    std::function<void()> action;

    // sample
    auto* sample = app.add_subcommand("sample", "Draw a graph from the planted bi-section model");
    int s_n = 0;
    std::optional<int> s_m;
    std::string s_labeling;
    double s_p = 0.0;
    double s_q = 0.0;
    std::uint64_t s_seed = 0;
    std::string s_out;
    std::string s_truth;
    sample->add_option("--n", s_n, "Number of vertices")->required()->check(CLI::Range(1, 1'000'000));
    sample->add_option("--p", s_p, "Within-class edge probability, in (0,1)")->required();
    sample->add_option("--q", s_q, "Between-class edge probability, in (0,1)")->required();
    auto* m_opt = sample->add_option("--m", s_m, "Planted class size (default floor(n/2)); vertices drawn at random");
    sample->add_option("--labeling", s_labeling, "Planted labeling as a 0/1 string")->excludes(m_opt);
    sample->add_option("--seed", s_seed, "Random seed")->capture_default_str();
    sample->add_option("--out", s_out, "Graph JSON output (default stdout)");
    sample->add_option("--truth-out", s_truth, "Write the planted labeling to this file");
    sample->callback([&] {
        action = [&] {
            const EdgeModel model(s_p, s_q);
            LabelVector truth = LabelVector::from_mask(0, 1);
            if (!s_labeling.empty()) {
                truth = parse_labeling(s_labeling);
                if (truth.size() != s_n) {
                    throw std::invalid_argument("--labeling has length " + std::to_string(truth.size()) +
                                                ", expected --n " + std::to_string(s_n));
                }
            } else {
                const int m = s_m.value_or(s_n / 2);
                if (m < 0 || m > s_n / 2) {
                    throw std::invalid_argument("--m must lie in 0..floor(n/2) = " + std::to_string(s_n / 2));
                }
                Rng rng(derive_seed(s_seed, {0}));
                truth = bisect_bayes::detail::random_labeling_of_size(s_n, m, rng);
            }
            const Graph g = sample_graph(truth, model, derive_seed(s_seed, {1}));
            detail::emit(s_out, out, [&](std::ostream& os) { write_graph_json(os, g); });
            if (!s_truth.empty()) {
                write_file(s_truth, [&](std::ostream& os) { os << truth.to_string() << '\n'; });
            }
        };
    });

    // posterior
    auto* posterior = app.add_subcommand("posterior", "Posterior over canonical labelings given a graph");
    detail::ModelOptions p_model;
    p_model.add_to(*posterior, true);
    std::string p_mode = "exact";
    std::string p_out;
    std::string p_marginals;
    std::uint64_t p_seed = 0;
    std::optional<std::uint64_t> p_burn;
    std::optional<std::uint64_t> p_samples;
    std::optional<std::uint64_t> p_thin;
    posterior->add_option("--mode", p_mode, "exact or mcmc")->capture_default_str()->check(
        CLI::IsMember({"exact", "mcmc"}));
    posterior->add_option("--out", p_out, "Posterior CSV output (default stdout)");
    posterior->add_option("--marginals", p_marginals, "Write vertex inclusion probabilities to this CSV");
    posterior->add_option("--seed", p_seed, "MCMC seed")->capture_default_str();
    posterior->add_option("--burn-in", p_burn, "MCMC burn-in proposals (default 10 n^2)");
    posterior->add_option("--samples", p_samples, "MCMC samples kept (default 10000)");
    posterior->add_option("--thin", p_thin, "MCMC proposals per kept sample (default n)");
    posterior->callback([&] {
        action = [&] {
            const unsigned threads = resolve_threads(threads_flag);
            if (p_mode == "exact") {
                const PosteriorTable table = p_model.exact(threads);
                detail::emit(p_out, out, [&](std::ostream& os) { write_posterior_csv(os, table); });
                if (!p_marginals.empty()) {
                    const auto inc = inclusion_probabilities(table);
                    write_file(p_marginals, [&](std::ostream& os) { write_marginals_csv(os, inc); });
                }
                return;
            }
            const Graph x = detail::load_graph(p_model.graph);
            McmcConfig cfg = McmcConfig::defaults_for(x.size(), p_seed);
            cfg.burn_in = p_burn.value_or(cfg.burn_in);
            cfg.samples = p_samples.value_or(cfg.samples);
            cfg.thin = p_thin.value_or(cfg.thin);
            const McmcResult res = mcmc_posterior(x, PriorSpec::parse(p_model.prior), p_model.model(), cfg);
            detail::emit(p_out, out,
                         [&](std::ostream& os) { write_sample_posterior_csv(os, std::span<const LabelVector>(res.samples)); });
            if (!p_marginals.empty()) {
                write_file(p_marginals, [&](std::ostream& os) { write_marginals_csv(os, res.inclusion); });
            }
        };
    });

    // credible
    auto* credible = app.add_subcommand("credible", "Highest-posterior-density credible set and its enlargement");
    detail::ModelOptions c_model;
    c_model.add_to(*credible, false);
    std::string c_posterior;
    double c_gamma = 0.05;
    int c_enlarge = 0;
    std::string c_out;
    credible->add_option("--posterior", c_posterior, "Posterior CSV from the exact mode (alternative to --graph)");
    credible->add_option("--gamma", c_gamma, "Credible level: the set carries mass >= 1 - gamma")
        ->capture_default_str();
    credible->add_option("--enlarge", c_enlarge, "Add labelings within symmetric distance < K of the set")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    credible->add_option("--out", c_out, "JSON output (default stdout)");
    credible->callback([&] {
        action = [&] {
            const PosteriorTable table = detail::table_from(c_posterior, c_model, resolve_threads(threads_flag));
            const CredibleSet set = hpd_credible_set(table, c_gamma);
            std::optional<EnlargedSet> big;
            if (c_enlarge > 0) {
                big = enlarge(set, c_enlarge, kMaxEnumerableVertices);
            }
            detail::emit(c_out, out, [&](std::ostream& os) { os << credible_to_json(set, big).dump(2) << '\n'; });
        };
    });

    // test
    auto* test = app.add_subcommand("test", "Posterior-odds test between class-size hypotheses");
    detail::ModelOptions t_model;
    t_model.add_to(*test, false);
    std::string t_posterior;
    int t_m0 = 0;
    std::optional<int> t_m1;
    bool t_complement = false;
    double t_threshold = 1.0;
    std::optional<double> t_a;
    std::optional<double> t_b;
    std::string t_out;
    test->add_option("--posterior", t_posterior, "Posterior CSV from the exact mode (alternative to --graph)");
    test->add_option("--m0", t_m0, "Null hypothesis: smaller class has m0 vertices")->required();
    auto* m1_opt = test->add_option("--m1", t_m1, "Alternative: smaller class has m1 vertices");
    test->add_flag("--complement", t_complement, "Alternative: smaller class size differs from m0")->excludes(m1_opt);
    test->add_option("--threshold", t_threshold, "Reject the null when the posterior odds exceed this")
        ->capture_default_str();
    test->add_option("--a-hat", t_a, "Estimate of 1 - E Pi(A | X) under the null, for the error bound");
    test->add_option("--b-hat", t_b, "Estimate of E Pi(B | X) under the null, for the two-term bound");
    test->add_option("--out", t_out, "JSON output (default stdout)");
    test->callback([&] {
        action = [&] {
            if (!t_m1 && !t_complement) {
                throw std::invalid_argument("one of --m1 or --complement is required");
            }
            if (t_b && !t_a) {
                throw std::invalid_argument("--b-hat needs --a-hat");
            }
            const PosteriorTable table = detail::table_from(t_posterior, t_model, resolve_threads(threads_flag));
            OddsTestResult r = class_size_test(table, t_m0, t_m1, t_threshold);
            if (t_a) {
                const OddsErrorBounds eb = odds_error_bounds(*t_a, t_threshold, t_b);
                r.error_bound_one_sided = eb.one_sided;
                r.error_bound_two_term = eb.two_term;
            }
            detail::emit(t_out, out, [&](std::ostream& os) { os << odds_to_json(r).dump(2) << '\n'; });
        };
    });

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Evaluate a concentration bound at finite n");
    std::string b_name;
    int b_n = 0;
    std::optional<double> b_alpha;
    std::optional<double> b_beta;
    std::optional<double> b_c;
    std::optional<double> b_g;
    std::optional<double> b_p;
    std::optional<double> b_q;
    std::optional<double> b_ks_c;
    std::optional<double> b_ks_d;
    std::string b_prior = "bernoulli:r=0.5";
    std::string b_theta;
    int b_outside = 1;
    bounds->add_option("--name", b_name, "prop21, thm41_uniform, thm41_dense, thm42 or thm42_ks")
        ->required()
        ->check(CLI::IsMember({"prop21", "thm41_uniform", "thm41_dense", "thm42", "thm42_ks"}));
    bounds->add_option("--n", b_n, "Number of vertices")->check(CLI::Range(2, 1'000'000'000));
    bounds->add_option("--alpha", b_alpha,
                       "thm41_uniform: rate with -log rho = alpha log n / n; thm42*: ball fraction in (0,1)");
    bounds->add_option("--beta", b_beta, "thm42: -n log rho (default from --p, --q)");
    bounds->add_option("--c", b_c, "thm41_dense: constant c (default -log rho(p, q))");
    bounds->add_option("--g", b_g, "Prior constant g (default from --prior)");
    bounds->add_option("--p", b_p, "Within-class edge probability");
    bounds->add_option("--q", b_q, "Between-class edge probability");
    bounds->add_option("--ks-c", b_ks_c, "thm42_ks: p = c / n");
    bounds->add_option("--ks-d", b_ks_d, "thm42_ks: q = d / n");
    bounds->add_option("--prior", b_prior, "Prior, used for g and by prop21")->capture_default_str();
    bounds->add_option("--theta", b_theta, "prop21: true labeling as a 0/1 string");
    bounds->add_option("--outside", b_outside,
                       "prop21: S = labelings at symmetric distance >= K from theta (K = 1: all others)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bounds->callback([&] {
        action = [&] {
            const PriorSpec prior = PriorSpec::parse(b_prior);
            const double g = b_g.value_or(g_constant(prior).value);
            auto need = [](const auto& v, const char* flag) {
                if (!v) {
                    throw std::invalid_argument(std::string(flag) + " is required for this bound");
                }
                return *v;
            };
            auto model = [&] { return EdgeModel(need(b_p, "--p"), need(b_q, "--q")); };
            auto need_n = [&] {
                if (b_n < 2) {
                    throw std::invalid_argument("--n (at least 2) is required for this bound");
                }
                return b_n;
            };
            BoundReport r;
            if (b_name == "prop21") {
                if (b_theta.empty()) {
                    throw std::invalid_argument("--theta is required for prop21");
                }
                const LabelVector theta = parse_labeling(b_theta);
                std::vector<LabelVector> s;
                enumerate_labelings(theta.size(), [&](const LabelVector& eta) {
                    if (sym_distance(eta, theta) >= b_outside) {
                        s.push_back(eta);
                    }
                });
                r = prop21_bound(theta, s, prior, model());
            } else if (b_name == "thm41_uniform") {
                const int n = need_n();
                r = thm41_uniform_bound(n, b_alpha ? *b_alpha : thm41_alpha_from_model(n, model()));
            } else if (b_name == "thm41_dense") {
                r = thm41_dense_bound(need_n(), b_c ? *b_c : neg_log_affinity(model()), g);
            } else if (b_name == "thm42") {
                const int n = need_n();
                r = thm42_bound(n, need(b_alpha, "--alpha"), b_beta ? *b_beta : n * neg_log_affinity(model()), g);
            } else {
                r = thm42_ks_bound(need_n(), need(b_alpha, "--alpha"), need(b_ks_c, "--ks-c"), need(b_ks_d, "--ks-d"),
                                   g);
            }
            out << detail::report_json(r).dump(2) << '\n';
        };
    });

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
    std::string e_config;
    std::string e_out;
    std::string e_meta;
    bool e_no_timestamp = false;
    experiment->add_option("--config", e_config, "Experiment config JSON")->required();
    experiment->add_option("--out", e_out, "Results CSV (default: the config's output, else stdout)");
    experiment->add_option("--meta", e_meta, "Metadata JSON sidecar (default: <out>.meta.json)");
    experiment->add_flag("--no-timestamp", e_no_timestamp, "Leave created_at out of the metadata");
    experiment->callback([&] {
        action = [&] {
            const nlohmann::json doc = read_file(e_config, [](std::istream& is) {
                try {
                    return nlohmann::json::parse(is);
                } catch (const nlohmann::json::parse_error& e) {
                    throw std::invalid_argument(std::string("experiment config: ") + e.what());
                }
            });
            const ExperimentConfig cfg = experiment_config_from_json(doc);
            const ExperimentResult res = run_experiment(cfg, resolve_threads(threads_flag));
            const std::string path = !e_out.empty() ? e_out : cfg.output.value_or("");
            detail::emit(path, out, [&](std::ostream& os) { res.write_csv(os); });
            std::string meta = e_meta;
            if (meta.empty() && !path.empty() && path != "-") {
                meta = path + ".meta.json";
            }
            if (!meta.empty()) {
                write_file(meta, [&](std::ostream& os) {
                    os << experiment_metadata(cfg, res, !e_no_timestamp).dump(2) << '\n';
                });
            }
        };
    });

    // verify
    auto* verify = app.add_subcommand("verify", "Check the auxiliary inequalities on their grids");
    int verify_failures = 0;
    verify->callback([&] {
        action = [&] {
            for (const GridCheck& g : verify_all()) {
                out << (g.passed() ? "PASS " : "FAIL ") << g.name << " points=" << g.points
                    << " violations=" << g.violations << " min_margin=" << format_real(g.min_margin);
                if (!g.passed()) {
                    out << " first=" << g.first_violation;
                    ++verify_failures;
                }
                out << '\n';
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return kExitUsage;
    }
    try {
        if (action) {
            action();
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return kExitFailure;
    }
    return verify_failures > 0 ? kExitFailure : kExitOk;
}

}  // namespace bisect_bayes::cli

#endif  // BISECT_BAYES_CLI_HPP
