#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ramac/analytic_qos.hpp"
#include "ramac/analytic_single.hpp"
#include "ramac/detail/rng.hpp"
#include "ramac/errors.hpp"

namespace ramac::sim {

enum class ClassMode { single_class, qos };

struct SimOptions {
    int frames = 500;
    int replications = 30;
    std::uint64_t seed = 1;
    /// Leading fraction of frames excluded from estimates; the analytic
    /// equilibria describe steady state, not the cold start.
    double warmup_fraction = 0.1;

    void validate() const {
        if (frames < 1) throw domain_error("frames must be >= 1");
        if (replications < 1) throw domain_error("replications must be >= 1");
        if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
            throw domain_error("warmup_fraction must lie in [0, 1)");
        }
    }

    bool operator==(const SimOptions&) const = default;
};

struct QosScenario {
    qos::QosParams params;
    qos::ChannelSplit split;

    bool operator==(const QosScenario&) const = default;
};

struct SimConfig {
    std::variant<analytic::SingleParams, QosScenario> scenario;
    SimOptions options;

    ClassMode mode() const {
        return std::holds_alternative<analytic::SingleParams>(scenario)
                   ? ClassMode::single_class
                   : ClassMode::qos;
    }

    void validate() const {
        options.validate();
        if (mode() == ClassMode::single_class) {
            std::get<analytic::SingleParams>(scenario).validate();
        } else {
            const auto& q = std::get<QosScenario>(scenario);
            q.params.validate();
            if (q.split.high < 0 || q.split.low < 0 ||
                q.split.high + q.split.low != q.params.total_request_channels) {
                throw domain_error("channel split must be nonnegative and sum to k_max");
            }
        }
    }
};

/// Raw per-replication counters. Occupancies are user-frame sums measured
/// at frame start after warm-up.
struct ClassTally {
    std::int64_t requests = 0;       // fresh requests + backoff retries
    std::int64_t grants = 0;
    std::int64_t collisions = 0;     // per-user collision events
    std::int64_t data_successes = 0;
    std::int64_t data_drops = 0;
    std::int64_t retransmissions = 0;
    std::int64_t occupancy_collided = 0;
    std::int64_t occupancy_transmit_head = 0;
    std::int64_t occupancy_transmit_total = 0;
};

struct ReplicationCounters {
    int replication = 0;
    std::int64_t frames_counted = 0;
    std::int64_t occupancy_idle = 0;
    std::array<ClassTally, 2> per_class;  // [0] single/high, [1] low
};

struct Estimate {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double ci_half = std::numeric_limits<double>::quiet_NaN();
};

/// Point estimates per traffic class (index 0 in single-class mode).
struct ClassEstimates {
    Estimate throughput;      // grants per frame
    Estimate acceptance;
    Estimate delay;
    Estimate energy_db;
    Estimate retransmissions; // retransmissions per granted packet
    Estimate efficiency;
    Estimate utilization;
    Estimate net_acceptance;
    Estimate request_rate;    // requests per frame
    Estimate drop_rate;       // dropped packets per frame
    Estimate occupancy_collided;        // s_c estimate
    Estimate occupancy_transmit_head;   // s_t[0] estimate
    Estimate occupancy_transmit_total;  // S_T estimate
};

struct SimResult {
    SimConfig config;
    std::vector<ReplicationCounters> replications;
    Estimate occupancy_idle;  // s_i estimate
    std::array<ClassEstimates, 2> per_class;

    // Reproducibility metadata.
    static constexpr const char* rng_algorithm =
        "xoshiro256** (stream = splitmix64 chain seeded with "
        "seed xor (replication+1)*0xD1B54A32D192ED03)";
    int warmup_frames = 0;
};

namespace detail_sim {

constexpr int phase_idle = -1;
constexpr int phase_collided = -2;

struct ClassRule {
    int channels = 0;
    double retransmit_prob = 0.0;
};

struct FrameModel {
    int users = 0;
    double request_prob = 0.0;
    double high_priority_prob = 1.0;  // 1 in single-class mode
    double packet_error = 0.0;
    int max_attempts = 1;
    int num_classes = 1;
    std::array<ClassRule, 2> cls{};
};

inline FrameModel frame_model(const SimConfig& config) {
    FrameModel m;
    if (config.mode() == ClassMode::single_class) {
        const auto& p = std::get<analytic::SingleParams>(config.scenario);
        m.users = p.users;
        m.request_prob = p.request_prob;
        m.packet_error = p.packet_error;
        m.max_attempts = p.max_attempts;
        m.num_classes = 1;
        m.cls[0] = {p.request_channels, p.retransmit_prob};
    } else {
        const auto& q = std::get<QosScenario>(config.scenario);
        m.users = q.params.users;
        m.request_prob = q.params.request_prob;
        m.high_priority_prob = q.params.high_priority_prob;
        m.packet_error = q.params.packet_error;
        m.max_attempts = q.params.max_attempts;
        m.num_classes = 2;
        m.cls[0] = {q.split.high, q.params.retransmit_prob_high};
        m.cls[1] = {q.split.low, q.params.retransmit_prob_low};
    }
    return m;
}

/// One independent replication. One frame is one chain step: contention
/// decisions and channel draws first, then the data-transmission step for
/// users already transmitting, then newly granted users enter the head
/// transmit state for the next frame. A collided user makes one backoff
/// re-request with its class probability; unless that retry is granted it
/// returns to idle.
///
/// Packet outcomes (successes, drops, retransmissions) are attributed to
/// the grant that started the packet: only packets granted after warm-up
/// count, and in-flight packets are drained past the horizon so that
/// data_successes + data_drops == grants holds exactly per replication.
inline ReplicationCounters run_replication(const FrameModel& m, const SimOptions& opt,
                                           int replication) {
    detail::Xoshiro256 rng(opt.seed, static_cast<std::uint64_t>(replication));
    const int warmup = static_cast<int>(opt.frames * opt.warmup_fraction);

    std::vector<int> phase(static_cast<std::size_t>(m.users), phase_idle);
    std::vector<std::uint8_t> user_class(static_cast<std::size_t>(m.users), 0);
    std::vector<std::uint8_t> counted_packet(static_cast<std::size_t>(m.users), 0);

    ReplicationCounters rc;
    rc.replication = replication;

    std::array<std::vector<std::pair<int, int>>, 2> requesters;  // (user, channel)
    std::array<std::vector<int>, 2> channel_load;
    for (int c = 0; c < m.num_classes; ++c) {
        channel_load[c].assign(static_cast<std::size_t>(std::max(m.cls[c].channels, 1)),
                               0);
    }
    std::vector<int> granted;

    auto transmit_step = [&](int u) {
        auto& tally = rc.per_class[user_class[u]];
        const bool counted = counted_packet[u] != 0;
        if (rng.bernoulli(m.packet_error)) {
            if (phase[u] + 1 < m.max_attempts) {
                ++phase[u];
                if (counted) ++tally.retransmissions;
            } else {
                phase[u] = phase_idle;
                counted_packet[u] = 0;
                if (counted) ++tally.data_drops;
            }
        } else {
            phase[u] = phase_idle;
            counted_packet[u] = 0;
            if (counted) ++tally.data_successes;
        }
    };

    for (int frame = 0; frame < opt.frames; ++frame) {
        const bool counted = frame >= warmup;
        if (counted) {
            ++rc.frames_counted;
            for (int u = 0; u < m.users; ++u) {
                if (phase[u] == phase_idle) {
                    ++rc.occupancy_idle;
                } else if (phase[u] == phase_collided) {
                    ++rc.per_class[user_class[u]].occupancy_collided;
                } else {
                    auto& tally = rc.per_class[user_class[u]];
                    ++tally.occupancy_transmit_total;
                    if (phase[u] == 0) ++tally.occupancy_transmit_head;
                }
            }
        }

        // Contention decisions.
        for (int c = 0; c < m.num_classes; ++c) {
            requesters[c].clear();
            std::fill(channel_load[c].begin(), channel_load[c].end(), 0);
        }
        for (int u = 0; u < m.users; ++u) {
            if (phase[u] == phase_idle) {
                if (rng.bernoulli(m.request_prob)) {
                    int c = 0;
                    if (m.num_classes == 2) {
                        c = rng.bernoulli(m.high_priority_prob) ? 0 : 1;
                    }
                    user_class[u] = static_cast<std::uint8_t>(c);
                    const int k = m.cls[c].channels;
                    const int ch = k > 0 ? static_cast<int>(rng.below(
                                               static_cast<std::uint32_t>(k)))
                                         : -1;
                    requesters[c].emplace_back(u, ch);
                }
            } else if (phase[u] == phase_collided) {
                const int c = user_class[u];
                if (rng.bernoulli(m.cls[c].retransmit_prob)) {
                    const int k = m.cls[c].channels;
                    const int ch = k > 0 ? static_cast<int>(rng.below(
                                               static_cast<std::uint32_t>(k)))
                                         : -1;
                    requesters[c].emplace_back(u, ch);
                } else {
                    phase[u] = phase_idle;  // backoff over, gives up
                }
            }
        }

        // Resolve channels: a channel grants iff exactly one request hit it.
        granted.clear();
        for (int c = 0; c < m.num_classes; ++c) {
            auto& tally = rc.per_class[c];
            if (counted) tally.requests += static_cast<std::int64_t>(requesters[c].size());
            for (const auto& [u, ch] : requesters[c]) {
                if (ch >= 0) ++channel_load[c][static_cast<std::size_t>(ch)];
            }
            for (const auto& [u, ch] : requesters[c]) {
                const bool sole = ch >= 0 && channel_load[c][static_cast<std::size_t>(ch)] == 1;
                if (sole) {
                    granted.push_back(u);
                    counted_packet[u] = counted ? 1 : 0;
                    if (counted) ++tally.grants;
                } else {
                    if (counted) ++tally.collisions;
                    // fresh request -> collided; failed retry -> idle
                    phase[u] = phase[u] == phase_idle ? phase_collided : phase_idle;
                }
            }
        }

        // Data transmission step for users transmitting since frame start.
        for (int u = 0; u < m.users; ++u) {
            if (phase[u] >= 0) transmit_step(u);
        }
        for (int u : granted) phase[u] = 0;
    }

    // Drain counted in-flight packets (at most max_attempts extra frames).
    for (int extra = 0; extra <= m.max_attempts; ++extra) {
        bool any = false;
        for (int u = 0; u < m.users; ++u) {
            if (phase[u] >= 0 && counted_packet[u]) {
                any = true;
                transmit_step(u);
            }
        }
        if (!any) break;
    }
    return rc;
}

/// Per-replication metric values, from which means and CIs are formed.
struct MetricRow {
    double idle = 0.0;
    struct PerClass {
        double throughput = 0.0;
        double acceptance = 0.0;
        double delay = 0.0;
        double energy_db = 0.0;
        double retransmissions = 0.0;
        double efficiency = 0.0;
        double utilization = 0.0;
        double net_acceptance = 0.0;
        double request_rate = 0.0;
        double drop_rate = 0.0;
        double occ_collided = 0.0;
        double occ_head = 0.0;
        double occ_total = 0.0;
    };
    std::array<PerClass, 2> cls;
};

inline MetricRow metric_row(const FrameModel& m, const SimConfig& config,
                            const ReplicationCounters& rc) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double frames = static_cast<double>(rc.frames_counted);
    const double user_frames = frames * m.users;
    MetricRow row;
    row.idle = rc.occupancy_idle / user_frames;
    for (int c = 0; c < m.num_classes; ++c) {
        const auto& t = rc.per_class[c];
        auto& r = row.cls[c];
        const double share =
            m.num_classes == 2 ? (c == 0 ? m.high_priority_prob : 1.0 - m.high_priority_prob)
                               : 1.0;
        const double offered = m.users * m.request_prob * share;
        r.throughput = t.grants / frames;
        r.request_rate = t.requests / frames;
        r.drop_rate = t.data_drops / frames;
        r.occ_collided = t.occupancy_collided / user_frames;
        r.occ_head = t.occupancy_transmit_head / user_frames;
        r.occ_total = t.occupancy_transmit_total / user_frames;
        if (offered > 0.0 && r.throughput > 0.0) {
            r.acceptance = r.throughput / offered;
            r.delay = (1.0 - r.acceptance) / r.acceptance;
            r.energy_db = -10.0 * std::log10(r.acceptance);
        } else {
            r.acceptance = offered > 0.0 ? 0.0 : nan;
            r.delay = nan;
            r.energy_db = nan;
        }
        r.retransmissions =
            t.grants > 0 ? static_cast<double>(t.retransmissions) / t.grants : nan;
        r.efficiency = t.grants > 0 ? 1.0 / (1.0 + r.retransmissions) : nan;
        int data_channels = 1;
        if (config.mode() == ClassMode::single_class) {
            data_channels = std::get<analytic::SingleParams>(config.scenario).data_channels;
        } else {
            const auto& q = std::get<QosScenario>(config.scenario);
            data_channels = c == 0 ? q.params.data_channels_high : q.params.data_channels_low;
        }
        const double occupancy = m.users * r.occ_total;
        r.utilization = std::min(static_cast<double>(data_channels), occupancy) /
                        data_channels;
        if (std::isnan(r.acceptance)) {
            r.net_acceptance = nan;
        } else {
            r.net_acceptance = occupancy <= data_channels
                                   ? r.acceptance
                                   : r.acceptance * data_channels / occupancy;
        }
    }
    return row;
}

inline Estimate aggregate(const std::vector<double>& values) {
    Estimate e;
    const std::size_t n = values.size();
    if (n == 0) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        e.ci_half = 1.96 * sd / std::sqrt(static_cast<double>(n));
    }
    return e;
}

}  // namespace detail_sim

/// Run the replications listed in config and aggregate means with 95%
/// normal-approximation confidence half-widths. Streams are derived from
/// (seed, replication index), so the result is a deterministic function of
/// the config alone and independent of execution order.
inline SimResult replicate(const SimConfig& config) {
    config.validate();
    const auto model = detail_sim::frame_model(config);

    SimResult result;
    result.config = config;
    result.warmup_frames =
        static_cast<int>(config.options.frames * config.options.warmup_fraction);
    result.replications.reserve(static_cast<std::size_t>(config.options.replications));

    std::vector<detail_sim::MetricRow> rows;
    rows.reserve(static_cast<std::size_t>(config.options.replications));
    for (int rep = 0; rep < config.options.replications; ++rep) {
        auto counters = detail_sim::run_replication(model, config.options, rep);
        rows.push_back(detail_sim::metric_row(model, config, counters));
        result.replications.push_back(std::move(counters));
    }

    auto collect = [&](auto&& pick) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const auto& r : rows) vals.push_back(pick(r));
        return detail_sim::aggregate(vals);
    };

    result.occupancy_idle = collect([](const auto& r) { return r.idle; });
    for (int c = 0; c < model.num_classes; ++c) {
        auto& est = result.per_class[static_cast<std::size_t>(c)];
        using Row = detail_sim::MetricRow;
        auto field = [&](double Row::PerClass::* member) {
            return collect([=](const Row& r) { return r.cls[static_cast<std::size_t>(c)].*member; });
        };
        est.throughput = field(&Row::PerClass::throughput);
        est.acceptance = field(&Row::PerClass::acceptance);
        est.delay = field(&Row::PerClass::delay);
        est.energy_db = field(&Row::PerClass::energy_db);
        est.retransmissions = field(&Row::PerClass::retransmissions);
        est.efficiency = field(&Row::PerClass::efficiency);
        est.utilization = field(&Row::PerClass::utilization);
        est.net_acceptance = field(&Row::PerClass::net_acceptance);
        est.request_rate = field(&Row::PerClass::request_rate);
        est.drop_rate = field(&Row::PerClass::drop_rate);
        est.occupancy_collided = field(&Row::PerClass::occ_collided);
        est.occupancy_transmit_head = field(&Row::PerClass::occ_head);
        est.occupancy_transmit_total = field(&Row::PerClass::occ_total);
    }
    return result;
}

/// One replication (index 0) with no confidence intervals.
inline SimResult simulate(const SimConfig& config) {
    SimConfig one = config;
    one.options.replications = 1;
    return replicate(one);
}

/// Tolerance policy for simulation/analytic comparisons: a deviation
/// passes when within ci_multiplier confidence half-widths OR within
/// relative_floor of the analytic value. The relative floor absorbs the
/// mean-field approximation error of the analytic chains.
struct TolerancePolicy {
    double ci_multiplier = 3.0;
    double relative_floor = 0.15;
};

struct MetricComparison {
    std::string name;
    double simulated = 0.0;
    double ci_half = 0.0;
    double analytic = 0.0;
    double z = 0.0;  // |sim - analytic| in CI half-width units
    bool pass = false;
};

struct ValidationReport {
    std::vector<MetricComparison> rows;
    bool all_pass = true;
    TolerancePolicy policy;
};

namespace detail_sim {

inline MetricComparison compare(const std::string& name, const Estimate& sim,
                                double analytic, const TolerancePolicy& pol) {
    MetricComparison c;
    c.name = name;
    c.simulated = sim.mean;
    c.ci_half = std::isnan(sim.ci_half) ? 0.0 : sim.ci_half;
    c.analytic = analytic;
    const double diff = std::fabs(sim.mean - analytic);
    c.z = c.ci_half > 0.0 ? diff / c.ci_half
                          : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    c.pass = diff <= std::max(pol.ci_multiplier * c.ci_half,
                              pol.relative_floor * std::fabs(analytic));
    return c;
}

}  // namespace detail_sim

/// Compare a simulation against the single-class analytic equilibrium.
/// Throws comparison_error if the simulation was run for different
/// scenario parameters.
inline ValidationReport validate_against_analytic(const SimResult& sim,
                                                  const analytic::Equilibrium& eq,
                                                  const analytic::SingleParams& params,
                                                  const TolerancePolicy& policy = {}) {
    if (sim.config.mode() != ClassMode::single_class ||
        std::get<analytic::SingleParams>(sim.config.scenario) != params) {
        throw comparison_error("simulation and analytic scenario parameters differ");
    }
    ValidationReport report;
    report.policy = policy;
    const auto& est = sim.per_class[0];
    const double th = std::min(params.users * eq.transmit_head(),
                               static_cast<double>(params.request_channels));
    report.rows.push_back(detail_sim::compare("request_throughput", est.throughput, th, policy));
    report.rows.push_back(detail_sim::compare("idle", sim.occupancy_idle, eq.idle, policy));
    report.rows.push_back(
        detail_sim::compare("collided", est.occupancy_collided, eq.collided, policy));
    report.rows.push_back(detail_sim::compare("transmit_occupancy",
                                              est.occupancy_transmit_total,
                                              eq.transmit_total(), policy));
    for (const auto& r : report.rows) report.all_pass = report.all_pass && r.pass;
    return report;
}

/// Two-class variant; per-class rows share the one tolerance policy.
inline ValidationReport validate_against_analytic(const SimResult& sim,
                                                  const qos::QosEquilibrium& eq,
                                                  const qos::QosParams& params,
                                                  const qos::ChannelSplit& split,
                                                  const TolerancePolicy& policy = {}) {
    if (sim.config.mode() != ClassMode::qos) {
        throw comparison_error("simulation was not run in qos mode");
    }
    const auto& q = std::get<QosScenario>(sim.config.scenario);
    if (q.params != params || q.split != split) {
        throw comparison_error("simulation and analytic scenario parameters differ");
    }
    ValidationReport report;
    report.policy = policy;
    report.rows.push_back(
        detail_sim::compare("idle", sim.occupancy_idle, eq.idle, policy));
    const double th_high = std::min(params.users * eq.transmit_head_high(),
                                    static_cast<double>(split.high));
    const double th_low = std::min(params.users * eq.transmit_head_low(),
                                   static_cast<double>(split.low));
    const struct {
        const char* prefix;
        const ClassEstimates& est;
        double throughput;
        double collided;
        double transmit_total;
    } classes[2] = {
        {"high_", sim.per_class[0], th_high, eq.collided_high, eq.transmit_total_high()},
        {"low_", sim.per_class[1], th_low, eq.collided_low, eq.transmit_total_low()},
    };
    for (const auto& c : classes) {
        report.rows.push_back(detail_sim::compare(
            std::string(c.prefix) + "request_throughput", c.est.throughput, c.throughput,
            policy));
        report.rows.push_back(detail_sim::compare(std::string(c.prefix) + "collided",
                                                  c.est.occupancy_collided, c.collided,
                                                  policy));
        report.rows.push_back(detail_sim::compare(
            std::string(c.prefix) + "transmit_occupancy", c.est.occupancy_transmit_total,
            c.transmit_total, policy));
    }
    for (const auto& r : report.rows) report.all_pass = report.all_pass && r.pass;
    return report;
}

}  // namespace ramac::sim
