#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ramac/analytic_single.hpp"
#include "ramac/errors.hpp"
#include "ramac/markov_core.hpp"
#include "ramac/metrics.hpp"

namespace ramac::qos {

/// Scenario parameters for the two-class priority chain.
struct QosParams {
    int users = 1;                      // N
    double request_prob = 0.0;          // a
    double high_priority_prob = 0.5;    // l, P(new request is high priority)
    double weight = 1.0;                // m, channel-split weight factor
    int total_request_channels = 2;     // k_max
    double retransmit_prob_high = 0.0;  // c1
    double retransmit_prob_low = 0.0;   // c2
    int max_attempts = 1;               // n
    double packet_error = 0.0;          // e
    int data_channels_high = 1;         // L1
    int data_channels_low = 1;          // L2

    void validate() const {
        if (users < 1) throw domain_error("users must be >= 1");
        if (total_request_channels < 2) {
            throw domain_error("total_request_channels must be >= 2");
        }
        if (max_attempts < 1) throw domain_error("max_attempts must be >= 1");
        if (data_channels_high < 1) throw domain_error("data_channels_high must be >= 1");
        if (data_channels_low < 1) throw domain_error("data_channels_low must be >= 1");
        if (!(weight > 0.0)) throw domain_error("weight must be > 0");
        auto prob = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw domain_error(std::string(name) + " must lie in [0, 1]");
            }
        };
        prob(request_prob, "request_prob");
        prob(high_priority_prob, "high_priority_prob");
        prob(retransmit_prob_high, "retransmit_prob_high");
        prob(retransmit_prob_low, "retransmit_prob_low");
        prob(packet_error, "packet_error");
    }

    bool operator==(const QosParams&) const = default;
};

/// Partition of the request channels between the two classes.
struct ChannelSplit {
    int high = 0;  // k1
    int low = 0;   // k2

    bool operator==(const ChannelSplit&) const = default;
};

/// Weighted split: k1 = floor(l m / (l m + (1-l)) * k_max), k2 = the rest.
/// A degenerate split (k_i = 0) is allowed; the equilibrium treats that
/// class as starved rather than failing.
inline ChannelSplit split_channels(double high_priority_prob, double weight,
                                   int total_request_channels) {
    if (!(high_priority_prob >= 0.0 && high_priority_prob <= 1.0)) {
        throw domain_error("high_priority_prob must lie in [0, 1]");
    }
    if (!(weight > 0.0)) throw domain_error("weight must be > 0");
    if (total_request_channels < 2) {
        throw domain_error("total_request_channels must be >= 2");
    }
    const double lm = high_priority_prob * weight;
    const double share = lm / (lm + (1.0 - high_priority_prob));
    ChannelSplit split;
    split.high = static_cast<int>(std::floor(share * total_request_channels));
    split.low = total_request_channels - split.high;
    return split;
}

/// Stationary occupancies of the two-class chain plus fixed-point byproducts.
struct QosEquilibrium {
    double idle = 0.0;                      // s_i (shared by both classes)
    double collided_high = 0.0;             // s_c1
    double collided_low = 0.0;              // s_c2
    std::vector<double> transmit_high;      // s_t1[j]
    std::vector<double> transmit_low;       // s_t2[j]
    double contention_success_high = 0.0;   // x1
    double contention_success_low = 0.0;    // x2
    double active_high = 0.0;               // N_1a
    double active_low = 0.0;                // N_2a
    long iterations = 0;
    double residual = 0.0;
    /// Set when a class has traffic but zero request channels; that class
    /// collides forever (x_i = 0) instead of raising an error.
    bool starved_high = false;
    bool starved_low = false;
    double drop_probability_high = 0.0;
    double drop_probability_low = 0.0;

    double transmit_head_high() const {
        return transmit_high.empty() ? 0.0 : transmit_high.front();
    }
    double transmit_head_low() const {
        return transmit_low.empty() ? 0.0 : transmit_low.front();
    }
    double transmit_total_high() const {
        double s = 0.0;
        for (double v : transmit_high) s += v;
        return s;
    }
    double transmit_total_low() const {
        double s = 0.0;
        for (double v : transmit_low) s += v;
        return s;
    }
};

namespace detail_qos {

inline double class_contention(int channels, double active) {
    if (channels <= 0) return 0.0;  // starved class: permanent collision
    return analytic::contention_success(channels, active);
}

struct HeadWeights {
    double high = 0.0;  // B1 = a l x1 (1 + c1 y1)
    double low = 0.0;   // B2 = a (1-l) x2 (1 + c2 y2)
};

inline HeadWeights head_weights(const QosParams& p, double x1, double x2) {
    HeadWeights b;
    b.high = p.request_prob * p.high_priority_prob * x1 *
             (1.0 + p.retransmit_prob_high * (1.0 - x1));
    b.low = p.request_prob * (1.0 - p.high_priority_prob) * x2 *
            (1.0 + p.retransmit_prob_low * (1.0 - x2));
    return b;
}

}  // namespace detail_qos

/// Closed-form occupancies at frozen per-class contention successes.
inline QosEquilibrium closed_form_states(const QosParams& p, double x1, double x2) {
    p.validate();
    if (!(x1 >= 0.0 && x1 <= 1.0) || !(x2 >= 0.0 && x2 <= 1.0)) {
        throw domain_error("contention successes must lie in [0, 1]");
    }
    const auto b = detail_qos::head_weights(p, x1, x2);
    const double geo =
        analytic::detail_single::geometric_sum(p.packet_error, p.max_attempts);
    const double collide_high =
        p.request_prob * p.high_priority_prob * (1.0 - x1);
    const double collide_low =
        p.request_prob * (1.0 - p.high_priority_prob) * (1.0 - x2);
    const double d = 1.0 + b.high * geo + collide_high + b.low * geo + collide_low;

    QosEquilibrium eq;
    eq.contention_success_high = x1;
    eq.contention_success_low = x2;
    eq.idle = 1.0 / d;
    eq.collided_high = collide_high / d;
    eq.collided_low = collide_low / d;
    eq.transmit_high.resize(static_cast<std::size_t>(p.max_attempts));
    eq.transmit_low.resize(static_cast<std::size_t>(p.max_attempts));
    double term = b.high / d;
    for (auto& v : eq.transmit_high) {
        v = term;
        term *= p.packet_error;
    }
    term = b.low / d;
    for (auto& v : eq.transmit_low) {
        v = term;
        term *= p.packet_error;
    }
    eq.drop_probability_high = p.packet_error * eq.transmit_high.back();
    eq.drop_probability_low = p.packet_error * eq.transmit_low.back();
    return eq;
}

/// Explicit transition matrix at frozen (x1, x2), state order
/// [idle, collided_high, th0..th(n-1), collided_low, tl0..tl(n-1)].
/// Same per-class structure as the single-class chain; the idle state is
/// shared and the class of a request is drawn at request time.
inline markov::TransitionMatrix transition_matrix(const QosParams& p, double x1,
                                                  double x2) {
    p.validate();
    const int n = p.max_attempts;
    const int dim = 2 * n + 3;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    const double a = p.request_prob;
    const double l = p.high_priority_prob;
    const double e = p.packet_error;
    const int c1_col = 1;
    const int t1_base = 2;
    const int c2_col = 2 + n;
    const int t2_base = 3 + n;

    m(0, 0) = 1.0 - a;
    m(c1_col, 0) = a * l * (1.0 - x1);
    m(t1_base, 0) = a * l * x1;
    m(c2_col, 0) = a * (1.0 - l) * (1.0 - x2);
    m(t2_base, 0) = a * (1.0 - l) * x2;

    m(t1_base, c1_col) = p.retransmit_prob_high * x1;
    m(0, c1_col) = 1.0 - p.retransmit_prob_high * x1;
    m(t2_base, c2_col) = p.retransmit_prob_low * x2;
    m(0, c2_col) = 1.0 - p.retransmit_prob_low * x2;

    for (int j = 0; j < n; ++j) {
        for (int base : {t1_base, t2_base}) {
            const int col = base + j;
            if (j + 1 < n) {
                m(col + 1, col) = e;
                m(0, col) = 1.0 - e;
            } else {
                m(0, col) = 1.0;
            }
        }
    }

    std::vector<std::string> labels = {"idle", "collided_high"};
    for (int j = 0; j < n; ++j) labels.push_back("transmit_high" + std::to_string(j));
    labels.push_back("collided_low");
    for (int j = 0; j < n; ++j) labels.push_back("transmit_low" + std::to_string(j));
    return markov::TransitionMatrix(std::move(m), std::move(labels));
}

namespace detail_qos {

struct Defect {
    double high = 0.0;
    double low = 0.0;
    double max_abs() const { return std::max(std::fabs(high), std::fabs(low)); }
};

inline Defect active_user_defect(const QosParams& p, const ChannelSplit& split,
                                 double n1, double n2) {
    const double x1 = class_contention(split.high, n1);
    const double x2 = class_contention(split.low, n2);
    const QosEquilibrium eq = closed_form_states(p, x1, x2);
    Defect d;
    d.high = p.users * (p.high_priority_prob * p.request_prob * eq.idle +
                        p.retransmit_prob_high * eq.collided_high) -
             n1;
    d.low = p.users * ((1.0 - p.high_priority_prob) * p.request_prob * eq.idle +
                       p.retransmit_prob_low * eq.collided_low) -
            n2;
    return d;
}

}  // namespace detail_qos

/// Self-consistent two-class equilibrium: per-class contention successes
/// from per-class active-user counts, which in turn come from the closed
/// form. Joint damped iteration; nested bisection (outer on the high
/// class, inner on the low class) as fallback.
inline QosEquilibrium solve_equilibrium(const QosParams& p, const ChannelSplit& split,
                                        const analytic::FixedPointOptions& opt = {}) {
    p.validate();
    if (split.high < 0 || split.low < 0 ||
        split.high + split.low != p.total_request_channels) {
        throw domain_error("channel split must be nonnegative and sum to k_max");
    }

    const double n_users = static_cast<double>(p.users);
    double n1 = n_users * p.request_prob * p.high_priority_prob;
    double n2 = n_users * p.request_prob * (1.0 - p.high_priority_prob);
    long iterations = 0;
    auto defect = detail_qos::active_user_defect(p, split, n1, n2);

    while (defect.max_abs() > opt.residual_tol && iterations < opt.max_iterations) {
        n1 = std::clamp((1.0 - opt.damping) * n1 + opt.damping * (n1 + defect.high),
                        0.0, n_users);
        n2 = std::clamp((1.0 - opt.damping) * n2 + opt.damping * (n2 + defect.low),
                        0.0, n_users);
        defect = detail_qos::active_user_defect(p, split, n1, n2);
        ++iterations;
    }

    if (defect.max_abs() > opt.residual_tol) {
        // Nested bisection: for a trial n1, settle n2 first, then drive the
        // high-class defect. Both defects have a sign change on [0, N].
        auto settle_low = [&](double trial_n1) {
            double lo = 0.0;
            double hi = n_users;
            for (int i = 0; i < 120; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (detail_qos::active_user_defect(p, split, trial_n1, mid).low > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        };
        double lo = 0.0;
        double hi = n_users;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail_qos::active_user_defect(p, split, mid, settle_low(mid)).high >
                0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            ++iterations;
        }
        n1 = 0.5 * (lo + hi);
        n2 = settle_low(n1);
        defect = detail_qos::active_user_defect(p, split, n1, n2);
        if (defect.max_abs() > opt.residual_tol) {
            throw convergence_error("two-class fixed point did not converge", {n1, n2},
                                    defect.max_abs());
        }
    }

    const double x1 = detail_qos::class_contention(split.high, n1);
    const double x2 = detail_qos::class_contention(split.low, n2);
    QosEquilibrium eq = closed_form_states(p, x1, x2);
    eq.active_high = n1;
    eq.active_low = n2;
    eq.iterations = iterations;
    eq.residual = defect.max_abs();
    eq.starved_high =
        split.high == 0 && p.request_prob * p.high_priority_prob > 0.0;
    eq.starved_low =
        split.low == 0 && p.request_prob * (1.0 - p.high_priority_prob) > 0.0;
    return eq;
}

/// Per-class reports; a class with zero offered load is left empty rather
/// than failing the populated class.
struct ClassMetrics {
    std::optional<MetricsReport> high;
    std::optional<MetricsReport> low;
};

namespace detail_qos {

inline MetricsReport one_class(double head, double total, double b, int k, int data_ch,
                               double offered, double packet_error, int max_attempts,
                               int users) {
    MetricsReport r;
    r.throughput = std::min(users * head, static_cast<double>(k));
    r.acceptance = r.throughput / offered;
    r.delay = (1.0 - r.acceptance) / r.acceptance;
    r.energy_db = -10.0 * std::log10(r.acceptance);
    double epow = 1.0;
    for (int i = 1; i <= max_attempts; ++i) {
        epow *= packet_error;
        r.retransmissions += i * epow * b;
    }
    r.efficiency = 1.0 / (1.0 + r.retransmissions);
    const double occupancy = users * total;
    const double l = static_cast<double>(data_ch);
    r.utilization = std::min(l, occupancy) / l;
    r.net_acceptance = occupancy <= l ? r.acceptance : r.acceptance * l / occupancy;
    return r;
}

}  // namespace detail_qos

inline ClassMetrics class_metrics(const QosEquilibrium& eq, const QosParams& p,
                                  const ChannelSplit& split) {
    const double offered_high =
        p.high_priority_prob * p.users * p.request_prob;
    const double offered_low =
        (1.0 - p.high_priority_prob) * p.users * p.request_prob;
    if (offered_high <= 0.0 && offered_low <= 0.0) {
        throw degenerate_load_error(
            "acceptance metrics are undefined at zero offered load");
    }
    const auto b = detail_qos::head_weights(p, eq.contention_success_high,
                                            eq.contention_success_low);
    ClassMetrics out;
    if (offered_high > 0.0) {
        out.high = detail_qos::one_class(
            eq.transmit_head_high(), eq.transmit_total_high(), b.high, split.high,
            p.data_channels_high, offered_high, p.packet_error, p.max_attempts,
            p.users);
    }
    if (offered_low > 0.0) {
        out.low = detail_qos::one_class(
            eq.transmit_head_low(), eq.transmit_total_low(), b.low, split.low,
            p.data_channels_low, offered_low, p.packet_error, p.max_attempts,
            p.users);
    }
    return out;
}

}  // namespace ramac::qos
