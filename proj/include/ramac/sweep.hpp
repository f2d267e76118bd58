#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ramac/detail/numeric.hpp"
#include "ramac/errors.hpp"
#include "ramac/mac_sim.hpp"
#include "ramac/metrics.hpp"
#include "ramac/scenario.hpp"

namespace ramac::xp {

enum class RowStatus { ok, convergence_failure, degenerate_load };

inline const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::ok: return "ok";
        case RowStatus::convergence_failure: return "convergence_failure";
        default: return "degenerate_load";
    }
}

/// Metric column order (alphabetical, fixed for the CSV schema).
inline const std::array<const char*, 8>& metric_columns() {
    static const std::array<const char*, 8> cols = {
        "acceptance",      "delay",      "efficiency", "energy_db",
        "net_acceptance",  "retransmissions", "throughput", "utilization"};
    return cols;
}

struct SweepRow {
    int index = 0;
    double value = 0.0;
    RowStatus status = RowStatus::ok;
    std::vector<double> cells;  // aligned with SweepTable::columns minus var/status
};

struct SweepTable {
    std::string scenario_name;
    Model model = Model::single_class;
    std::string swept_variable;
    bool with_simulation = false;
    std::vector<std::string> columns;  // swept var, metric cells..., status
    std::vector<SweepRow> rows;
};

namespace detail_xp {

inline void set_variable(analytic::SingleParams& p, const std::string& var, double v) {
    auto as_int = [&] { return static_cast<int>(std::llround(v)); };
    if (var == "request_prob") p.request_prob = v;
    else if (var == "retransmit_prob") p.retransmit_prob = v;
    else if (var == "packet_error") p.packet_error = v;
    else if (var == "max_attempts") p.max_attempts = as_int();
    else if (var == "users") p.users = as_int();
    else if (var == "request_channels") p.request_channels = as_int();
    else if (var == "data_channels") p.data_channels = as_int();
    else throw domain_error("unknown single-class sweep variable '" + var + "'");
}

inline void set_variable(qos::QosParams& p, const std::string& var, double v) {
    auto as_int = [&] { return static_cast<int>(std::llround(v)); };
    if (var == "request_prob") p.request_prob = v;
    else if (var == "high_priority_prob") p.high_priority_prob = v;
    else if (var == "weight") p.weight = v;
    else if (var == "retransmit_prob_high") p.retransmit_prob_high = v;
    else if (var == "retransmit_prob_low") p.retransmit_prob_low = v;
    else if (var == "packet_error") p.packet_error = v;
    else if (var == "max_attempts") p.max_attempts = as_int();
    else if (var == "users") p.users = as_int();
    else if (var == "total_request_channels") p.total_request_channels = as_int();
    else if (var == "data_channels_high") p.data_channels_high = as_int();
    else if (var == "data_channels_low") p.data_channels_low = as_int();
    else throw domain_error("unknown qos sweep variable '" + var + "'");
}

constexpr double row_nan = std::numeric_limits<double>::quiet_NaN();

/// Metric cells in metric_columns() order. Zero offered load leaves the
/// acceptance-family cells undefined but keeps the occupancy-side ones.
inline std::array<double, 8> single_cells(const analytic::Equilibrium& eq,
                                          const analytic::SingleParams& p,
                                          bool& degenerate) {
    std::array<double, 8> cells;
    cells.fill(row_nan);
    const auto retx = analytic::retransmission_stats(eq, p);
    cells[2] = retx.efficiency;
    cells[5] = retx.average_retransmissions;
    const double occupancy = p.users * eq.transmit_total();
    const double l = static_cast<double>(p.data_channels);
    cells[7] = std::min(l, occupancy) / l;
    cells[6] = std::min(p.users * eq.transmit_head(),
                        static_cast<double>(p.request_channels));
    if (p.request_prob > 0.0) {
        const auto acc = analytic::access_metrics(eq, p);
        const auto cap = analytic::capacity_metrics(eq, p);
        cells[0] = acc.acceptance;
        cells[1] = acc.delay;
        cells[3] = acc.energy_db;
        cells[4] = cap.net_acceptance;
    } else {
        degenerate = true;
    }
    return cells;
}

inline void fill_from_report(std::vector<double>& cells, std::size_t base, int stride,
                             int offset, const MetricsReport& r) {
    cells[base + static_cast<std::size_t>(0 * stride + offset)] = r.acceptance;
    cells[base + static_cast<std::size_t>(1 * stride + offset)] = r.delay;
    cells[base + static_cast<std::size_t>(2 * stride + offset)] = r.efficiency;
    cells[base + static_cast<std::size_t>(3 * stride + offset)] = r.energy_db;
    cells[base + static_cast<std::size_t>(4 * stride + offset)] = r.net_acceptance;
    cells[base + static_cast<std::size_t>(5 * stride + offset)] = r.retransmissions;
    cells[base + static_cast<std::size_t>(6 * stride + offset)] = r.throughput;
    cells[base + static_cast<std::size_t>(7 * stride + offset)] = r.utilization;
}

inline MetricsReport report_from_estimates(const sim::ClassEstimates& est, bool ci) {
    auto pick = [&](const sim::Estimate& e) { return ci ? e.ci_half : e.mean; };
    MetricsReport r;
    r.acceptance = pick(est.acceptance);
    r.delay = pick(est.delay);
    r.efficiency = pick(est.efficiency);
    r.energy_db = pick(est.energy_db);
    r.net_acceptance = pick(est.net_acceptance);
    r.retransmissions = pick(est.retransmissions);
    r.throughput = pick(est.throughput);
    r.utilization = pick(est.utilization);
    return r;
}

}  // namespace detail_xp

/// Evaluate the scenario's sweep: the analytic model at every point, plus
/// simulation estimates when requested. Rows that fail to converge or have
/// degenerate load carry a status marker instead of aborting the sweep.
inline SweepTable run_sweep(const Scenario& scenario, bool with_simulation) {
    scenario.validate();
    if (!scenario.sweep) {
        throw domain_error("scenario '" + scenario.name + "' defines no sweep");
    }

    SweepTable table;
    table.scenario_name = scenario.name;
    table.model = scenario.model;
    table.swept_variable = scenario.sweep->variable;
    table.with_simulation = with_simulation;

    const bool qos_mode = scenario.model == Model::qos;
    std::vector<std::string> metric_names;
    for (const char* m : metric_columns()) {
        if (qos_mode) {
            metric_names.push_back(std::string(m) + "_high");
            metric_names.push_back(std::string(m) + "_low");
        } else {
            metric_names.push_back(m);
        }
    }
    table.columns.push_back(table.swept_variable);
    for (const auto& n : metric_names) table.columns.push_back(n);
    if (with_simulation) {
        for (const auto& n : metric_names) table.columns.push_back("sim_" + n);
        for (const auto& n : metric_names) table.columns.push_back("ci_" + n);
    }
    table.columns.push_back("status");

    const std::size_t metric_count = metric_names.size();
    const std::size_t cell_count = metric_count * (with_simulation ? 3 : 1);
    const int stride = qos_mode ? 2 : 1;

    const auto values = scenario.sweep->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.index = static_cast<int>(i);
        row.value = values[i];
        row.cells.assign(cell_count, detail_xp::row_nan);

        bool degenerate = false;
        if (!qos_mode) {
            analytic::SingleParams p = scenario.resolved_single();
            detail_xp::set_variable(p, table.swept_variable, row.value);
            try {
                p.validate();
                const auto eq = analytic::solve_equilibrium(p);
                const auto computed = detail_xp::single_cells(eq, p, degenerate);
                for (std::size_t c = 0; c < 8; ++c) row.cells[c] = computed[c];
            } catch (const convergence_error&) {
                row.status = RowStatus::convergence_failure;
            }
            if (with_simulation && row.status == RowStatus::ok) {
                sim::SimConfig cfg{p, scenario.sim_options};
                const auto result = sim::replicate(cfg);
                detail_xp::fill_from_report(
                    row.cells, metric_count, 1, 0,
                    detail_xp::report_from_estimates(result.per_class[0], false));
                detail_xp::fill_from_report(
                    row.cells, 2 * metric_count, 1, 0,
                    detail_xp::report_from_estimates(result.per_class[0], true));
            }
        } else {
            qos::QosParams p = scenario.resolved_qos().first;
            detail_xp::set_variable(p, table.swept_variable, row.value);
            try {
                p.validate();
                const auto split = qos::split_channels(
                    p.high_priority_prob, p.weight, p.total_request_channels);
                const auto eq = qos::solve_equilibrium(p, split);
                const auto metrics = qos::class_metrics(eq, p, split);
                if (metrics.high) {
                    detail_xp::fill_from_report(row.cells, 0, stride, 0, *metrics.high);
                } else {
                    degenerate = true;
                }
                if (metrics.low) {
                    detail_xp::fill_from_report(row.cells, 0, stride, 1, *metrics.low);
                } else {
                    degenerate = true;
                }
                if (with_simulation && row.status == RowStatus::ok) {
                    sim::SimConfig cfg{sim::QosScenario{p, split}, scenario.sim_options};
                    const auto result = sim::replicate(cfg);
                    for (int cls = 0; cls < 2; ++cls) {
                        detail_xp::fill_from_report(
                            row.cells, metric_count, stride, cls,
                            detail_xp::report_from_estimates(
                                result.per_class[static_cast<std::size_t>(cls)], false));
                        detail_xp::fill_from_report(
                            row.cells, 2 * metric_count, stride, cls,
                            detail_xp::report_from_estimates(
                                result.per_class[static_cast<std::size_t>(cls)], true));
                    }
                }
            } catch (const convergence_error&) {
                row.status = RowStatus::convergence_failure;
            } catch (const degenerate_load_error&) {
                degenerate = true;
            }
        }
        if (degenerate && row.status == RowStatus::ok) {
            row.status = RowStatus::degenerate_load;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Write the sweep as CSV: fixed documented column order, 12 significant
/// digits, '\n' line endings; byte-identical for identical inputs.
inline void emit_csv(const SweepTable& table, const std::string& path) {
    if (table.rows.empty()) throw domain_error("refusing to write an empty sweep");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        out << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        out << ramac::detail::format_sig(row.value, 12);
        for (double cell : row.cells) {
            out << ',' << ramac::detail::format_sig(cell, 12);
        }
        out << ',' << to_string(row.status) << '\n';
    }
    if (!out) throw error("write to '" + path + "' failed");
}

/// Raw per-replication counters, one row per (replication, class).
inline void write_trace_csv(const sim::SimResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open '" + path + "' for writing");
    out << "replication,class,frames_counted,occupancy_idle,requests,grants,"
           "collisions,data_successes,data_drops,retransmissions,"
           "occupancy_collided,occupancy_transmit_head,occupancy_transmit_total\n";
    const int classes = result.config.mode() == sim::ClassMode::qos ? 2 : 1;
    for (const auto& rc : result.replications) {
        for (int c = 0; c < classes; ++c) {
            const auto& t = rc.per_class[static_cast<std::size_t>(c)];
            out << rc.replication << ',' << c << ',' << rc.frames_counted << ','
                << rc.occupancy_idle << ',' << t.requests << ',' << t.grants << ','
                << t.collisions << ',' << t.data_successes << ',' << t.data_drops
                << ',' << t.retransmissions << ',' << t.occupancy_collided << ','
                << t.occupancy_transmit_head << ',' << t.occupancy_transmit_total
                << '\n';
        }
    }
    if (!out) throw error("write to '" + path + "' failed");
}

}  // namespace ramac::xp
