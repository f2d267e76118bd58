#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ramac/errors.hpp"
#include "ramac/markov_core.hpp"
#include "ramac/metrics.hpp"

namespace ramac::analytic {

/// Scenario parameters for the single-class user chain.
struct SingleParams {
    int users = 1;                // N
    int request_channels = 1;     // k
    double request_prob = 0.0;    // a, request probability per frame when idle
    double retransmit_prob = 0.0; // c, re-request probability when collided
    int max_attempts = 1;         // n, ARQ depth (transmission attempts per packet)
    double packet_error = 0.0;    // e
    int data_channels = 1;        // L

    void validate() const {
        if (users < 1) throw domain_error("users must be >= 1");
        if (request_channels < 1) throw domain_error("request_channels must be >= 1");
        if (data_channels < 1) throw domain_error("data_channels must be >= 1");
        if (max_attempts < 1) throw domain_error("max_attempts must be >= 1");
        auto prob = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw domain_error(std::string(name) + " must lie in [0, 1]");
            }
        };
        prob(request_prob, "request_prob");
        prob(retransmit_prob, "retransmit_prob");
        prob(packet_error, "packet_error");
    }

    bool operator==(const SingleParams&) const = default;
};

/// Stationary occupancies of the user chain plus the fixed-point byproducts.
struct Equilibrium {
    double idle = 0.0;                  // s_i
    double collided = 0.0;              // s_c
    std::vector<double> transmit;       // s_t[j], attempt j = 0..n-1
    double contention_success = 0.0;    // x
    double active_users = 0.0;          // N_ave
    long iterations = 0;
    double residual = 0.0;
    /// Probability a chain step consumes a packet by exhausting all n
    /// attempts (e^n * B / D); diagnostic only.
    double drop_probability = 0.0;

    double transmit_head() const { return transmit.empty() ? 0.0 : transmit.front(); }
    double transmit_total() const {
        double s = 0.0;
        for (double v : transmit) s += v;
        return s;
    }
};

/// Probability a requester finds its chosen channel free of the other
/// active users: (1 - 1/k)^max(n_ave - 1, 0). The exponent clamp keeps the
/// value defined (and <= 1) below one active user.
inline double contention_success(int request_channels, double active_users) {
    if (request_channels < 1) throw domain_error("request_channels must be >= 1");
    if (!(active_users >= 0.0)) throw domain_error("active_users must be >= 0");
    const double exponent = std::max(active_users - 1.0, 0.0);
    const double base = 1.0 - 1.0 / request_channels;
    if (base == 0.0) return exponent == 0.0 ? 1.0 : 0.0;
    return std::pow(base, exponent);
}

namespace detail_single {

/// Unnormalized weight of the head transmit state: B = a x (1 + c (1 - x)).
inline double head_weight(const SingleParams& p, double x) {
    return p.request_prob * x * (1.0 + p.retransmit_prob * (1.0 - x));
}

inline double geometric_sum(double e, int n) {
    double sum = 0.0;
    double term = 1.0;
    for (int j = 0; j < n; ++j) {
        sum += term;
        term *= e;
    }
    return sum;
}

}  // namespace detail_single

/// Closed-form stationary occupancies at a frozen contention success x:
/// s_i = 1/D, s_c = a(1-x)/D, s_t[j] = B e^j / D with
/// D = 1 + B sum_{j<n} e^j + a(1-x). Normalization holds by construction.
inline Equilibrium closed_form_states(const SingleParams& p, double x) {
    p.validate();
    if (!(x >= 0.0 && x <= 1.0)) throw domain_error("x must lie in [0, 1]");
    const double b = detail_single::head_weight(p, x);
    const double collide_weight = p.request_prob * (1.0 - x);
    const double d =
        1.0 + b * detail_single::geometric_sum(p.packet_error, p.max_attempts) +
        collide_weight;

    Equilibrium eq;
    eq.contention_success = x;
    eq.idle = 1.0 / d;
    eq.collided = collide_weight / d;
    eq.transmit.resize(static_cast<std::size_t>(p.max_attempts));
    double term = b / d;
    for (auto& v : eq.transmit) {
        v = term;
        term *= p.packet_error;
    }
    eq.drop_probability = p.packet_error * eq.transmit.back();
    return eq;
}

/// Explicit transition matrix of the user chain at frozen x, in the state
/// order [idle, collided, transmit0..transmit(n-1)]. Used to cross-check
/// the closed form against the generic stationary solver.
///
/// From idle: request with a, granted with x. From collided: one backoff
/// re-request with c; whatever is not a grant returns to idle (the closed
/// form above is the equilibrium of exactly this structure). A transmit
/// attempt fails with e; the last attempt exits to idle either way.
inline markov::TransitionMatrix transition_matrix(const SingleParams& p, double x) {
    p.validate();
    if (!(x >= 0.0 && x <= 1.0)) throw domain_error("x must lie in [0, 1]");
    const int n = p.max_attempts;
    const int dim = 2 + n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    const double a = p.request_prob;
    const double c = p.retransmit_prob;
    const double e = p.packet_error;

    m(0, 0) = 1.0 - a;        // idle -> idle
    m(1, 0) = a * (1.0 - x);  // idle -> collided
    m(2, 0) = a * x;          // idle -> transmit0
    m(2, 1) = c * x;          // collided -> transmit0
    m(0, 1) = 1.0 - c * x;    // collided -> idle
    for (int j = 0; j < n; ++j) {
        const int col = 2 + j;
        if (j + 1 < n) {
            m(col + 1, col) = e;
            m(0, col) = 1.0 - e;
        } else {
            m(0, col) = 1.0;  // success or drop, either way back to idle
        }
    }

    std::vector<std::string> labels = {"idle", "collided"};
    for (int j = 0; j < n; ++j) labels.push_back("transmit" + std::to_string(j));
    return markov::TransitionMatrix(std::move(m), std::move(labels));
}

struct FixedPointOptions {
    double damping = 0.5;
    double residual_tol = 1e-10;
    long max_iterations = 10000;
};

namespace detail_single {

/// Fixed-point defect in the active-user count at a candidate n_ave.
inline double active_user_defect(const SingleParams& p, double n_ave) {
    const double x = contention_success(p.request_channels, n_ave);
    const Equilibrium eq = closed_form_states(p, x);
    return p.users * (p.request_prob * eq.idle + p.retransmit_prob * eq.collided) -
           n_ave;
}

}  // namespace detail_single

/// Self-consistent equilibrium: x = contention_success(k, n_ave),
/// n_ave = N(a s_i + c s_c), s the closed form at x. Damped iteration with
/// bisection on the defect as fallback (the defect has a sign change on
/// [0, N] by construction).
inline Equilibrium solve_equilibrium(const SingleParams& p,
                                     const FixedPointOptions& opt = {}) {
    p.validate();
    double n_ave = p.users * p.request_prob;
    long iterations = 0;
    double defect = detail_single::active_user_defect(p, n_ave);

    while (std::fabs(defect) > opt.residual_tol && iterations < opt.max_iterations) {
        n_ave = std::clamp((1.0 - opt.damping) * n_ave + opt.damping * (n_ave + defect),
                           0.0, static_cast<double>(p.users));
        defect = detail_single::active_user_defect(p, n_ave);
        ++iterations;
    }

    if (std::fabs(defect) > opt.residual_tol) {
        // Bisection fallback; defect(0) >= 0 and defect(N) <= 0.
        double lo = 0.0;
        double hi = static_cast<double>(p.users);
        for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail_single::active_user_defect(p, mid) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            ++iterations;
        }
        n_ave = 0.5 * (lo + hi);
        defect = detail_single::active_user_defect(p, n_ave);
        if (std::fabs(defect) > opt.residual_tol) {
            throw convergence_error("single-class fixed point did not converge",
                                    {n_ave}, std::fabs(defect));
        }
    }

    const double x = contention_success(p.request_channels, n_ave);
    Equilibrium eq = closed_form_states(p, x);
    eq.active_users = n_ave;
    eq.iterations = iterations;
    eq.residual = std::fabs(defect);
    return eq;
}

/// ARQ retransmission load and efficiency.
struct RetransmissionStats {
    /// Stop-and-wait retransmission sum: sum_{i=1}^{n} i e^i B, with B
    /// taken at the solved x. Note this is not normalized by D.
    double average_retransmissions = 0.0;
    double efficiency = 0.0;  // 1 / (1 + average_retransmissions)
    /// Diagnostic alternative: expected extra attempts per served packet,
    /// sum_{j=1}^{n-1} e^j, for comparison with the literal formula.
    double conditional_retransmissions = 0.0;
};

inline RetransmissionStats retransmission_stats(const Equilibrium& eq,
                                                const SingleParams& p) {
    const double b = detail_single::head_weight(p, eq.contention_success);
    RetransmissionStats st;
    double epow = 1.0;
    for (int i = 1; i <= p.max_attempts; ++i) {
        epow *= p.packet_error;
        st.average_retransmissions += i * epow * b;
    }
    epow = 1.0;
    for (int j = 1; j <= p.max_attempts - 1; ++j) {
        epow *= p.packet_error;
        st.conditional_retransmissions += epow;
    }
    st.efficiency = 1.0 / (1.0 + st.average_retransmissions);
    return st;
}

/// Request-side metrics: throughput, acceptance, access delay, energy.
struct AccessMetrics {
    double throughput = 0.0;  // min(N s_t[0], k)
    double acceptance = 0.0;  // p_a = throughput / (N a)
    double delay = 0.0;       // (1 - p_a)/p_a access attempts
    double energy_db = 0.0;   // -10 log10(p_a)
};

inline AccessMetrics access_metrics(const Equilibrium& eq, const SingleParams& p) {
    if (p.request_prob <= 0.0) {
        throw degenerate_load_error(
            "acceptance metrics are undefined at zero offered load");
    }
    AccessMetrics m;
    m.throughput = std::min(p.users * eq.transmit_head(),
                            static_cast<double>(p.request_channels));
    m.acceptance = m.throughput / (p.users * p.request_prob);
    m.delay = (1.0 - m.acceptance) / m.acceptance;
    m.energy_db = -10.0 * std::log10(m.acceptance);
    return m;
}

/// Data-channel metrics: utilization and net acceptance. Occupancy counts
/// every transmit state, since retransmitting users hold a data channel.
struct CapacityMetrics {
    double utilization = 0.0;     // min(L, N S_T)/L
    double net_acceptance = 0.0;  // p_a, scaled by L/(N S_T) beyond capacity
};

inline CapacityMetrics capacity_metrics(const Equilibrium& eq, const SingleParams& p) {
    if (p.data_channels < 1) throw domain_error("data_channels must be >= 1");
    const double occupancy = p.users * eq.transmit_total();
    const double l = static_cast<double>(p.data_channels);
    CapacityMetrics m;
    m.utilization = std::min(l, occupancy) / l;
    const double p_a = access_metrics(eq, p).acceptance;
    m.net_acceptance = occupancy <= l ? p_a : p_a * l / occupancy;
    return m;
}

/// All derived measures in one report (used by the sweep harness).
inline MetricsReport metrics_report(const Equilibrium& eq, const SingleParams& p) {
    const auto retx = retransmission_stats(eq, p);
    const auto acc = access_metrics(eq, p);
    const auto cap = capacity_metrics(eq, p);
    MetricsReport r;
    r.throughput = acc.throughput;
    r.acceptance = acc.acceptance;
    r.delay = acc.delay;
    r.energy_db = acc.energy_db;
    r.retransmissions = retx.average_retransmissions;
    r.efficiency = retx.efficiency;
    r.utilization = cap.utilization;
    r.net_acceptance = cap.net_acceptance;
    return r;
}

}  // namespace ramac::analytic
