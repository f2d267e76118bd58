#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ramac/errors.hpp"
#include "ramac/sweep.hpp"

namespace ramac::xp {

struct PlotOutput {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

namespace detail_plot {

struct Family {
    const char* name;    // file suffix and y-axis label
    const char* column;  // base metric column
};

inline const std::vector<Family>& families() {
    static const std::vector<Family> f = {
        {"throughput", "throughput"},       {"utilization", "utilization"},
        {"acceptance", "acceptance"},       {"net_acceptance", "net_acceptance"},
        {"delay", "delay"},                 {"energy", "energy_db"},
    };
    return f;
}

struct Series {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> line;                    // analytic
    std::vector<std::tuple<double, double, double>> points;         // sim: x, y, ci
};

inline std::optional<std::size_t> column_index(const SweepTable& t,
                                               const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (t.columns[i] == name) return i;
    }
    return std::nullopt;
}

/// Cell lookup by column index; index 0 is the swept value.
inline double cell(const SweepRow& row, std::size_t column) {
    return column == 0 ? row.value : row.cells[column - 1];
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

inline std::string svg_chart(const SweepTable& table, const Family& family,
                             const std::vector<Series>& series) {
    constexpr double width = 760, height = 520;
    constexpr double left = 80, right = 730, top = 50, bottom = 460;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    auto expand = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        if (first) {
            xmin = xmax = x;
            ymin = ymax = y;
            first = false;
        } else {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    };
    for (const auto& s : series) {
        for (const auto& [x, y] : s.line) expand(x, y);
        for (const auto& [x, y, ci] : s.points) {
            expand(x, y - ci);
            expand(x, y + ci);
        }
    }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
           "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
           fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt((left + right) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" +
           table.scenario_name + ": " + family.name + "</text>\n";

    // Axes and ticks.
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" +
           fmt(right) + "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) +
           "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        svg += "<line x1=\"" + fmt(sx(fx)) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" +
               fmt(sx(fx)) + "\" y2=\"" + fmt(bottom + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(sx(fx)) + "\" y=\"" + fmt(bottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(fx) + "</text>\n";
        svg += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(sy(fy)) + "\" x2=\"" +
               fmt(left) + "\" y2=\"" + fmt(sy(fy)) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(sy(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(fy) + "</text>\n";
    }
    svg += "<text x=\"" + fmt((left + right) / 2) + "\" y=\"" + fmt(height - 14) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           table.swept_variable + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt((top + bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + fmt((top + bottom) / 2) + ")\">" +
           family.name + "</text>\n";

    for (const auto& s : series) {
        if (!s.line.empty()) {
            std::string pts;
            for (const auto& [x, y] : s.line) {
                pts += fmt(sx(x)) + "," + fmt(sy(y)) + " ";
            }
            svg += "<polyline fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        }
        for (const auto& [x, y, ci] : s.points) {
            if (std::isfinite(ci) && ci > 0.0) {
                svg += "<line x1=\"" + fmt(sx(x)) + "\" y1=\"" + fmt(sy(y - ci)) +
                       "\" x2=\"" + fmt(sx(x)) + "\" y2=\"" + fmt(sy(y + ci)) +
                       "\" stroke=\"" + s.color + "\" stroke-width=\"1\"/>\n";
            }
            svg += "<circle cx=\"" + fmt(sx(x)) + "\" cy=\"" + fmt(sy(y)) +
                   "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        }
    }

    double legend_y = top + 14;
    for (const auto& s : series) {
        svg += "<line x1=\"" + fmt(right - 150) + "\" y1=\"" + fmt(legend_y - 4) +
               "\" x2=\"" + fmt(right - 120) + "\" y2=\"" + fmt(legend_y - 4) +
               "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(right - 114) + "\" y=\"" + fmt(legend_y) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label +
               "</text>\n";
        legend_y += 18;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace detail_plot

/// One SVG line chart per metric family; analytic results as lines,
/// simulation estimates as points with 95% CI error bars. Families whose
/// cells are all undefined are skipped with a warning.
inline PlotOutput emit_plots(const SweepTable& table, const std::string& directory) {
    if (table.rows.empty()) throw domain_error("refusing to plot an empty sweep");
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw error("cannot create directory '" + directory + "': " + ec.message());

    PlotOutput out;
    const bool qos_mode = table.model == Model::qos;
    for (const auto& family : detail_plot::families()) {
        std::vector<detail_plot::Series> series;
        const std::vector<std::pair<std::string, std::string>> class_tags =
            qos_mode ? std::vector<std::pair<std::string, std::string>>{
                           {"_high", "#1f77b4"}, {"_low", "#d62728"}}
                     : std::vector<std::pair<std::string, std::string>>{{"", "#1f77b4"}};
        bool any_point = false;
        for (const auto& [suffix, color] : class_tags) {
            detail_plot::Series s;
            s.label = qos_mode ? (suffix == "_high" ? "high" : "low") : "analytic";
            s.color = color;
            const auto col = detail_plot::column_index(table, family.column + suffix);
            const auto sim_col =
                detail_plot::column_index(table, "sim_" + std::string(family.column) + suffix);
            const auto ci_col =
                detail_plot::column_index(table, "ci_" + std::string(family.column) + suffix);
            for (const auto& row : table.rows) {
                if (col) {
                    const double y = detail_plot::cell(row, *col);
                    if (std::isfinite(y)) {
                        s.line.emplace_back(row.value, y);
                        any_point = true;
                    }
                }
                if (sim_col) {
                    const double y = detail_plot::cell(row, *sim_col);
                    const double ci = ci_col ? detail_plot::cell(row, *ci_col) : 0.0;
                    if (std::isfinite(y)) {
                        s.points.emplace_back(row.value, y, ci);
                        any_point = true;
                    }
                }
            }
            series.push_back(std::move(s));
        }
        if (!any_point) {
            out.warnings.push_back(std::string("skipped ") + family.name +
                                   ": no finite values");
            continue;
        }
        const std::string path = (std::filesystem::path(directory) /
                                  (table.scenario_name + "_" + family.name + ".svg"))
                                     .string();
        std::ofstream file(path, std::ios::binary);
        if (!file) throw error("cannot open '" + path + "' for writing");
        file << detail_plot::svg_chart(table, family, series);
        if (!file) throw error("write to '" + path + "' failed");
        out.files.push_back(path);
    }
    return out;
}

}  // namespace ramac::xp
