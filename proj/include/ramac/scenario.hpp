#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ramac/analytic_qos.hpp"
#include "ramac/analytic_single.hpp"
#include "ramac/detail/numeric.hpp"
#include "ramac/errors.hpp"
#include "ramac/mac_sim.hpp"
#include "ramac/phy_channel.hpp"

namespace ramac::xp {

enum class Model { single_class, qos };

inline const char* to_string(Model m) {
    return m == Model::single_class ? "single" : "qos";
}

/// Where the packet error probability e comes from. Exactly one route may
/// be specified: e directly, a bit error rate plus packet length, or a
/// full link spec resolved through the channel model.
struct ErrorSpec {
    std::optional<double> packet_error;
    std::optional<double> ber;
    std::optional<phy::Modulation> modulation;
    std::optional<phy::Channel> channel;
    std::optional<double> snr_db;
    std::optional<double> rician_k_db;
    std::optional<int> bits_per_packet;

    enum class Source { direct, ber, link };

    Source source() const {
        const bool has_direct = packet_error.has_value();
        const bool has_ber = ber.has_value();
        const bool has_link = modulation || channel || snr_db || rician_k_db;
        const int routes = (has_direct ? 1 : 0) + (has_ber ? 1 : 0) + (has_link ? 1 : 0);
        if (routes != 1) {
            throw parse_error(
                "error spec must use exactly one of: error.packet_error | "
                "error.ber + error.bits_per_packet | error.modulation + "
                "error.channel + error.snr_db + error.bits_per_packet");
        }
        if (has_direct) {
            if (bits_per_packet) {
                throw parse_error("error.bits_per_packet is not used with "
                                  "error.packet_error");
            }
            return Source::direct;
        }
        if (has_ber) {
            if (!bits_per_packet) {
                throw parse_error("error.ber requires error.bits_per_packet");
            }
            return Source::ber;
        }
        if (!modulation || !channel || !snr_db || !bits_per_packet) {
            throw parse_error("link error spec requires error.modulation, "
                              "error.channel, error.snr_db and error.bits_per_packet");
        }
        return Source::link;
    }

    double resolve() const {
        switch (source()) {
            case Source::direct:
                if (!(*packet_error >= 0.0 && *packet_error <= 1.0)) {
                    throw parse_error("error.packet_error must lie in [0, 1]");
                }
                return *packet_error;
            case Source::ber:
                return phy::packet_error_probability(*ber, *bits_per_packet);
            case Source::link: {
                phy::LinkSpec link{*modulation, *channel, *snr_db, rician_k_db};
                return phy::packet_error_probability(phy::bit_error_rate(link),
                                                     *bits_per_packet);
            }
        }
        throw parse_error("unreachable error spec state");
    }

    bool operator==(const ErrorSpec&) const = default;
};

/// Arithmetic sweep over one scalar parameter.
struct SweepSpec {
    std::string variable;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    void validate() const {
        if (variable.empty()) throw parse_error("sweep.variable must be set");
        if (!(step > 0.0)) throw parse_error("sweep.step must be > 0");
        if (!(start <= stop)) throw parse_error("sweep.start must be <= sweep.stop");
    }

    std::vector<double> values() const {
        validate();
        std::vector<double> out;
        const double slack = step * 1e-9;
        for (long i = 0;; ++i) {
            const double v = start + static_cast<double>(i) * step;
            if (v > stop + slack) break;
            out.push_back(v);
        }
        return out;
    }

    bool operator==(const SweepSpec&) const = default;
};

struct Scenario {
    std::string name;
    Model model = Model::single_class;
    analytic::SingleParams single;  // used when model == single_class
    qos::QosParams qos_params;      // used when model == qos
    ErrorSpec error;
    std::optional<SweepSpec> sweep;
    sim::SimOptions sim_options;

    bool operator==(const Scenario&) const = default;

    void validate() const {
        if (name.empty()) throw parse_error("name must be set");
        const double e = error.resolve();
        if (model == Model::single_class) {
            analytic::SingleParams p = single;
            p.packet_error = e;
            p.validate();
        } else {
            qos::QosParams p = qos_params;
            p.packet_error = e;
            p.validate();
        }
        if (sweep) sweep->validate();
        sim_options.validate();
    }

    /// Single-class parameters with the packet error filled in.
    analytic::SingleParams resolved_single() const {
        if (model != Model::single_class) {
            throw domain_error("scenario '" + name + "' is not a single-class scenario");
        }
        analytic::SingleParams p = single;
        p.packet_error = error.resolve();
        return p;
    }

    /// Two-class parameters plus the weighted channel split.
    std::pair<qos::QosParams, qos::ChannelSplit> resolved_qos() const {
        if (model != Model::qos) {
            throw domain_error("scenario '" + name + "' is not a qos scenario");
        }
        qos::QosParams p = qos_params;
        p.packet_error = error.resolve();
        return {p, qos::split_channels(p.high_priority_prob, p.weight,
                                       p.total_request_channels)};
    }
};

namespace detail_xp {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
        throw parse_error(key + ": '" + value + "' is not a number");
    }
    return v;
}

inline long long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0') {
        throw parse_error(key + ": '" + value + "' is not an integer");
    }
    return v;
}

inline phy::Modulation parse_modulation(const std::string& key, const std::string& v) {
    if (v == "bpsk") return phy::Modulation::bpsk;
    if (v == "qam16") return phy::Modulation::qam16;
    throw parse_error(key + ": expected bpsk or qam16, got '" + v + "'");
}

inline phy::Channel parse_channel(const std::string& key, const std::string& v) {
    if (v == "awgn") return phy::Channel::awgn;
    if (v == "rayleigh") return phy::Channel::rayleigh;
    if (v == "rician") return phy::Channel::rician;
    throw parse_error(key + ": expected awgn, rayleigh or rician, got '" + v + "'");
}

/// Canonical sweep-variable names per model, with conventional aliases.
inline std::string canonical_variable(Model model, const std::string& var) {
    static const std::map<std::string, std::string> single_names = {
        {"a", "request_prob"},      {"request_prob", "request_prob"},
        {"c", "retransmit_prob"},   {"retransmit_prob", "retransmit_prob"},
        {"e", "packet_error"},      {"packet_error", "packet_error"},
        {"n", "max_attempts"},      {"max_attempts", "max_attempts"},
        {"N", "users"},             {"users", "users"},
        {"k", "request_channels"},  {"request_channels", "request_channels"},
        {"L", "data_channels"},     {"data_channels", "data_channels"},
    };
    static const std::map<std::string, std::string> qos_names = {
        {"a", "request_prob"},       {"request_prob", "request_prob"},
        {"l", "high_priority_prob"}, {"high_priority_prob", "high_priority_prob"},
        {"m", "weight"},             {"weight", "weight"},
        {"c1", "retransmit_prob_high"}, {"retransmit_prob_high", "retransmit_prob_high"},
        {"c2", "retransmit_prob_low"},  {"retransmit_prob_low", "retransmit_prob_low"},
        {"e", "packet_error"},       {"packet_error", "packet_error"},
        {"n", "max_attempts"},       {"max_attempts", "max_attempts"},
        {"N", "users"},              {"users", "users"},
        {"k_max", "total_request_channels"},
        {"total_request_channels", "total_request_channels"},
        {"L1", "data_channels_high"}, {"data_channels_high", "data_channels_high"},
        {"L2", "data_channels_low"},  {"data_channels_low", "data_channels_low"},
    };
    const auto& table = model == Model::single_class ? single_names : qos_names;
    const auto it = table.find(var);
    if (it == table.end()) {
        std::string known;
        for (const auto& [alias, canon] : table) {
            if (alias == canon) known += known.empty() ? canon : ", " + canon;
        }
        throw parse_error("sweep.variable: '" + var + "' is not a sweepable " +
                          std::string(to_string(model)) + " parameter (one of: " +
                          known + ")");
    }
    return it->second;
}

}  // namespace detail_xp

/// Normalize a sweep-variable name (conventional aliases like a, c, k_max
/// are accepted) to its canonical parameter name.
inline std::string canonical_sweep_variable(Model model, const std::string& var) {
    return detail_xp::canonical_variable(model, var);
}

/// Parse the line-oriented `key = value` scenario format. `origin` names
/// the source (file path or preset) for error messages.
inline Scenario parse_scenario(const std::string& text, const std::string& origin) {
    Scenario sc;
    bool model_set = false;
    std::map<std::string, std::string> seen;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::pair<std::string, std::string>> entries;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail_xp::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw parse_error(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = detail_xp::trim(stripped.substr(0, eq));
        const std::string value = detail_xp::trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw parse_error(origin + ":" + std::to_string(line_no) +
                              ": empty key or value");
        }
        if (!seen.emplace(key, value).second) {
            throw parse_error(origin + ": duplicate key '" + key + "'");
        }
        entries.emplace_back(key, value);
    }

    // model first: parameter keys are model-dependent.
    for (const auto& [key, value] : entries) {
        if (key == "model") {
            if (value == "single") {
                sc.model = Model::single_class;
            } else if (value == "qos") {
                sc.model = Model::qos;
            } else {
                throw parse_error(origin + ": model must be 'single' or 'qos', got '" +
                                  value + "'");
            }
            model_set = true;
        }
    }
    if (!model_set) throw parse_error(origin + ": missing 'model'");

    std::optional<SweepSpec> sweep;
    auto ensure_sweep = [&]() -> SweepSpec& {
        if (!sweep) sweep.emplace();
        return *sweep;
    };

    using detail_xp::parse_double;
    using detail_xp::parse_int;
    for (const auto& [key, value] : entries) {
        if (key == "model") continue;
        if (key == "name") { sc.name = value; continue; }

        if (sc.model == Model::single_class && key.rfind("single.", 0) == 0) {
            auto& p = sc.single;
            const std::string f = key.substr(7);
            if (f == "users") p.users = static_cast<int>(parse_int(key, value));
            else if (f == "request_channels") p.request_channels = static_cast<int>(parse_int(key, value));
            else if (f == "request_prob") p.request_prob = parse_double(key, value);
            else if (f == "retransmit_prob") p.retransmit_prob = parse_double(key, value);
            else if (f == "max_attempts") p.max_attempts = static_cast<int>(parse_int(key, value));
            else if (f == "data_channels") p.data_channels = static_cast<int>(parse_int(key, value));
            else throw parse_error(origin + ": unknown key '" + key + "'");
            continue;
        }
        if (sc.model == Model::qos && key.rfind("qos.", 0) == 0) {
            auto& p = sc.qos_params;
            const std::string f = key.substr(4);
            if (f == "users") p.users = static_cast<int>(parse_int(key, value));
            else if (f == "request_prob") p.request_prob = parse_double(key, value);
            else if (f == "high_priority_prob") p.high_priority_prob = parse_double(key, value);
            else if (f == "weight") p.weight = parse_double(key, value);
            else if (f == "total_request_channels") p.total_request_channels = static_cast<int>(parse_int(key, value));
            else if (f == "retransmit_prob_high") p.retransmit_prob_high = parse_double(key, value);
            else if (f == "retransmit_prob_low") p.retransmit_prob_low = parse_double(key, value);
            else if (f == "max_attempts") p.max_attempts = static_cast<int>(parse_int(key, value));
            else if (f == "data_channels_high") p.data_channels_high = static_cast<int>(parse_int(key, value));
            else if (f == "data_channels_low") p.data_channels_low = static_cast<int>(parse_int(key, value));
            else throw parse_error(origin + ": unknown key '" + key + "'");
            continue;
        }
        if (key.rfind("error.", 0) == 0) {
            auto& e = sc.error;
            const std::string f = key.substr(6);
            if (f == "packet_error") e.packet_error = parse_double(key, value);
            else if (f == "ber") e.ber = parse_double(key, value);
            else if (f == "bits_per_packet") e.bits_per_packet = static_cast<int>(parse_int(key, value));
            else if (f == "modulation") e.modulation = detail_xp::parse_modulation(key, value);
            else if (f == "channel") e.channel = detail_xp::parse_channel(key, value);
            else if (f == "snr_db") e.snr_db = parse_double(key, value);
            else if (f == "rician_k_db") e.rician_k_db = parse_double(key, value);
            else throw parse_error(origin + ": unknown key '" + key + "'");
            continue;
        }
        if (key.rfind("sweep.", 0) == 0) {
            auto& s = ensure_sweep();
            const std::string f = key.substr(6);
            if (f == "variable") s.variable = detail_xp::canonical_variable(sc.model, value);
            else if (f == "start") s.start = parse_double(key, value);
            else if (f == "stop") s.stop = parse_double(key, value);
            else if (f == "step") s.step = parse_double(key, value);
            else throw parse_error(origin + ": unknown key '" + key + "'");
            continue;
        }
        if (key.rfind("sim.", 0) == 0) {
            auto& s = sc.sim_options;
            const std::string f = key.substr(4);
            if (f == "frames") s.frames = static_cast<int>(parse_int(key, value));
            else if (f == "replications") s.replications = static_cast<int>(parse_int(key, value));
            else if (f == "seed") s.seed = static_cast<std::uint64_t>(parse_int(key, value));
            else if (f == "warmup_fraction") s.warmup_fraction = parse_double(key, value);
            else throw parse_error(origin + ": unknown key '" + key + "'");
            continue;
        }
        throw parse_error(origin + ": unknown key '" + key + "'");
    }
    sc.sweep = sweep;

    try {
        sc.validate();
    } catch (const error& err) {
        throw parse_error(origin + ": " + err.what());
    }
    return sc;
}

/// Serialize in the same key = value format; load(serialize(s)) == s.
inline std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream out;
    auto num = [](double v) { return ramac::detail::format_sig(v, 17); };
    out << "name = " << sc.name << "\n";
    out << "model = " << to_string(sc.model) << "\n";
    if (sc.model == Model::single_class) {
        const auto& p = sc.single;
        out << "single.users = " << p.users << "\n";
        out << "single.request_channels = " << p.request_channels << "\n";
        out << "single.request_prob = " << num(p.request_prob) << "\n";
        out << "single.retransmit_prob = " << num(p.retransmit_prob) << "\n";
        out << "single.max_attempts = " << p.max_attempts << "\n";
        out << "single.data_channels = " << p.data_channels << "\n";
    } else {
        const auto& p = sc.qos_params;
        out << "qos.users = " << p.users << "\n";
        out << "qos.request_prob = " << num(p.request_prob) << "\n";
        out << "qos.high_priority_prob = " << num(p.high_priority_prob) << "\n";
        out << "qos.weight = " << num(p.weight) << "\n";
        out << "qos.total_request_channels = " << p.total_request_channels << "\n";
        out << "qos.retransmit_prob_high = " << num(p.retransmit_prob_high) << "\n";
        out << "qos.retransmit_prob_low = " << num(p.retransmit_prob_low) << "\n";
        out << "qos.max_attempts = " << p.max_attempts << "\n";
        out << "qos.data_channels_high = " << p.data_channels_high << "\n";
        out << "qos.data_channels_low = " << p.data_channels_low << "\n";
    }
    const auto& e = sc.error;
    if (e.packet_error) out << "error.packet_error = " << num(*e.packet_error) << "\n";
    if (e.ber) out << "error.ber = " << num(*e.ber) << "\n";
    if (e.modulation) out << "error.modulation = " << phy::to_string(*e.modulation) << "\n";
    if (e.channel) out << "error.channel = " << phy::to_string(*e.channel) << "\n";
    if (e.snr_db) out << "error.snr_db = " << num(*e.snr_db) << "\n";
    if (e.rician_k_db) out << "error.rician_k_db = " << num(*e.rician_k_db) << "\n";
    if (e.bits_per_packet) out << "error.bits_per_packet = " << *e.bits_per_packet << "\n";
    if (sc.sweep) {
        out << "sweep.variable = " << sc.sweep->variable << "\n";
        out << "sweep.start = " << num(sc.sweep->start) << "\n";
        out << "sweep.stop = " << num(sc.sweep->stop) << "\n";
        out << "sweep.step = " << num(sc.sweep->step) << "\n";
    }
    out << "sim.frames = " << sc.sim_options.frames << "\n";
    out << "sim.replications = " << sc.sim_options.replications << "\n";
    out << "sim.seed = " << sc.sim_options.seed << "\n";
    out << "sim.warmup_fraction = " << num(sc.sim_options.warmup_fraction) << "\n";
    return out.str();
}

namespace detail_xp {

/// Built-in operating points. Values not fixed by the target standards
/// (802.11a k = 16, CDMA code count 16 with L = 8, packet length 500 bits,
/// ARQ depth 4, base load a = 0.5) are engineering defaults.
inline std::string preset_text(const std::string& name) {
    const std::string single_common =
        "model = single\n"
        "single.users = 50\n"
        "single.request_prob = 0.5\n"
        "single.retransmit_prob = 0.75\n"
        "single.max_attempts = 4\n"
        "error.ber = 1e-3\n"
        "error.bits_per_packet = 500\n"
        "sweep.variable = request_prob\n"
        "sweep.start = 0.02\n"
        "sweep.stop = 1.0\n"
        "sweep.step = 0.02\n";
    const std::string qos_common =
        "model = qos\n"
        "qos.users = 50\n"
        "qos.request_prob = 0.5\n"
        "qos.high_priority_prob = 0.75\n"
        "qos.weight = 2\n"
        "qos.total_request_channels = 20\n"
        "qos.retransmit_prob_high = 0.75\n"
        "qos.retransmit_prob_low = 0.75\n"
        "qos.max_attempts = 4\n"
        "error.ber = 1e-3\n"
        "error.bits_per_packet = 500\n"
        "sweep.variable = request_prob\n"
        "sweep.start = 0.02\n"
        "sweep.stop = 1.0\n"
        "sweep.step = 0.02\n";
    if (name == "hiperlan2-single") {
        return "name = hiperlan2-single\n" + single_common +
               "single.request_channels = 25\n"
               "single.data_channels = 10\n";
    }
    if (name == "80211a-single") {
        return "name = 80211a-single\n" + single_common +
               "single.request_channels = 16\n"
               "single.data_channels = 1\n";
    }
    if (name == "cdma-single") {
        // request channels = number of access codes in the contention poll
        return "name = cdma-single\n" + single_common +
               "single.request_channels = 16\n"
               "single.data_channels = 8\n";
    }
    if (name == "paper-qos") {
        return "name = paper-qos\n" + qos_common +
               "qos.data_channels_high = 5\n"
               "qos.data_channels_low = 5\n";
    }
    if (name == "wimax-qos") {
        return "name = wimax-qos\n" + qos_common +
               "qos.data_channels_high = 10\n"
               "qos.data_channels_low = 10\n";
    }
    return "";
}

}  // namespace detail_xp

inline std::vector<std::string> preset_names() {
    return {"hiperlan2-single", "80211a-single", "cdma-single", "paper-qos",
            "wimax-qos"};
}

/// Load a scenario from a preset name or a file path.
inline Scenario load_scenario(const std::string& path_or_preset) {
    const std::string preset = detail_xp::preset_text(path_or_preset);
    if (!preset.empty()) {
        return parse_scenario(preset, "preset:" + path_or_preset);
    }
    std::ifstream in(path_or_preset);
    if (!in) {
        std::string names;
        for (const auto& n : preset_names()) names += names.empty() ? n : ", " + n;
        throw parse_error("'" + path_or_preset +
                          "' is neither a readable file nor a preset (presets: " +
                          names + ")");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path_or_preset);
}

}  // namespace ramac::xp
