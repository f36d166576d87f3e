#ifndef BISECT_BAYES_EDGE_MODEL_HPP
#define BISECT_BAYES_EDGE_MODEL_HPP

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bisect_bayes {

namespace detail {

inline std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline void require_open_unit(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) {
        throw std::invalid_argument(std::string(name) + " = " + format_double(x) +
                                    " must lie strictly inside (0, 1)");
    }
}

}  // namespace detail

/// Within-class edge probability p and between-class probability q, both
/// strictly inside (0, 1). Log terms are cached for the likelihood loops.
class EdgeModel {
public:
    EdgeModel(double p, double q) : p_(p), q_(q) {
        detail::require_open_unit(p, "p");
        detail::require_open_unit(q, "q");
        log_p_ = std::log(p);
        log_q_ = std::log(q);
        log_1mp_ = std::log1p(-p);
        log_1mq_ = std::log1p(-q);
    }

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double log_p() const noexcept { return log_p_; }
    double log_q() const noexcept { return log_q_; }
    double log_1mp() const noexcept { return log_1mp_; }
    double log_1mq() const noexcept { return log_1mq_; }

    /// log((1-p)/p) + log(q/(1-q)).
    double lambda() const noexcept { return log_1mp_ - log_p_ + log_q_ - log_1mq_; }

    friend bool operator==(const EdgeModel& a, const EdgeModel& b) noexcept { return a.p_ == b.p_ && a.q_ == b.q_; }

private:
    double p_;
    double q_;
    double log_p_;
    double log_q_;
    double log_1mp_;
    double log_1mq_;
};

enum class SparsityRegime { ChernoffHellinger, KestenStigum };

/// Sparse parametrisations: p = a log n / n, q = b log n / n
/// (Chernoff-Hellinger) or p = c / n, q = d / n (Kesten-Stigum).
struct SparsityParams {
    SparsityRegime regime = SparsityRegime::ChernoffHellinger;
    double first = 0.0;
    double second = 0.0;
    int n = 0;
};

inline EdgeModel edge_probs_from_sparsity(const SparsityParams& sp) {
    if (sp.n < 2) {
        throw std::invalid_argument("sparsity parametrisation needs n >= 2, got " + std::to_string(sp.n));
    }
    const double n = static_cast<double>(sp.n);
    const double scale = sp.regime == SparsityRegime::ChernoffHellinger ? std::log(n) / n : 1.0 / n;
    const double p = sp.first * scale;
    const double q = sp.second * scale;
    const bool ch = sp.regime == SparsityRegime::ChernoffHellinger;
    detail::require_open_unit(p, ch ? "p = a log(n)/n" : "p = c/n");
    detail::require_open_unit(q, ch ? "q = b log(n)/n" : "q = d/n");
    return EdgeModel(p, q);
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_EDGE_MODEL_HPP
