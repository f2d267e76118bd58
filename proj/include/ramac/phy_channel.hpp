#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ramac/detail/numeric.hpp"
#include "ramac/errors.hpp"

namespace ramac::phy {

enum class Modulation { bpsk, qam16 };
enum class Channel { awgn, rayleigh, rician };

inline const char* to_string(Modulation m) {
    return m == Modulation::bpsk ? "bpsk" : "qam16";
}
inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::awgn: return "awgn";
        case Channel::rayleigh: return "rayleigh";
        default: return "rician";
    }
}

/// Admissible average SNR per bit, in dB.
inline constexpr double min_snr_db = -20.0;
inline constexpr double max_snr_db = 80.0;

/// BER values are clamped to this floor so downstream logs stay finite.
inline constexpr double ber_floor = 1e-300;

/// One physical link: modulation, channel type and average SNR per bit.
struct LinkSpec {
    Modulation modulation = Modulation::bpsk;
    Channel channel = Channel::awgn;
    double snr_db = 0.0;
    /// Rician K factor in dB; required iff channel == rician.
    std::optional<double> rician_k_db;

    void validate() const {
        if (!std::isfinite(snr_db) || snr_db < min_snr_db || snr_db > max_snr_db) {
            throw domain_error("snr_db must be finite and within [" +
                               std::to_string(min_snr_db) + ", " +
                               std::to_string(max_snr_db) + "] dB");
        }
        if (channel == Channel::rician) {
            if (!rician_k_db) {
                throw missing_parameter_error(
                    "rician channel requires the rician_k_db parameter");
            }
            if (!std::isfinite(*rician_k_db)) {
                throw domain_error("rician_k_db must be finite");
            }
        } else if (rician_k_db) {
            throw domain_error("rician_k_db is only meaningful for the rician channel");
        }
    }
};

/// Whole-packet error probability from a bit error rate and packet length.
/// e = 1 - (1 - ber)^nb.
inline double packet_error_probability(double ber, int bits_per_packet) {
    if (!(ber >= 0.0 && ber <= 1.0)) {
        throw domain_error("ber must lie in [0, 1]");
    }
    if (bits_per_packet < 1) {
        throw domain_error("bits_per_packet must be >= 1");
    }
    // -expm1(nb*log1p(-ber)) keeps full precision for small ber.
    if (ber >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(bits_per_packet) * std::log1p(-ber));
}

/// Bit error rate + packet length, the error model used by the MAC chains.
struct PacketErrorModel {
    double ber = 0.0;
    int bits_per_packet = 1;

    double packet_error() const { return packet_error_probability(ber, bits_per_packet); }
};

namespace detail_phy {

/// Conditional BER at instantaneous SNR per bit gamma (linear), AWGN.
inline double awgn_ber(Modulation mod, double gamma) {
    using ramac::detail::q_function;
    if (mod == Modulation::bpsk) {
        return q_function(std::sqrt(2.0 * gamma));
    }
    // Gray-coded 16QAM nearest-neighbour approximation.
    return 0.75 * q_function(std::sqrt(0.8 * gamma));
}

/// BER averaged over Rayleigh fading: E[awgn_ber(gamma)], gamma ~ Exp(mean).
/// Substitution gamma = mean * t/(1-t) maps [0,inf) to [0,1).
inline double rayleigh_average(Modulation mod, double mean_gamma) {
    auto integrand = [&](double t) -> double {
        if (t >= 1.0) return 0.0;
        const double om = 1.0 - t;
        const double gamma = mean_gamma * t / om;
        const double pdf = std::exp(-t / om) / mean_gamma;
        return pdf * awgn_ber(mod, gamma) * mean_gamma / (om * om);
    };
    return ramac::detail::adaptive_simpson(integrand, 0.0, 1.0, 1e-6, 1e-312);
}

/// BER averaged over Rician fading with K (linear). The pdf exponential and
/// the Bessel growth are combined analytically so the integrand never
/// overflows: pdf = (1+K)/mean * i0e(arg) * exp(-(sqrt(K)-sqrt((1+K)g/mean))^2).
inline double rician_average(Modulation mod, double mean_gamma, double k_linear) {
    auto integrand = [&](double t) -> double {
        if (t >= 1.0) return 0.0;
        const double om = 1.0 - t;
        const double gamma = mean_gamma * t / om;
        const double ratio = (1.0 + k_linear) * gamma / mean_gamma;
        const double arg = 2.0 * std::sqrt(k_linear * ratio);
        const double d = std::sqrt(k_linear) - std::sqrt(ratio);
        const double pdf = (1.0 + k_linear) / mean_gamma *
                           ramac::detail::bessel_i0_scaled(arg) * std::exp(-d * d);
        return pdf * awgn_ber(mod, gamma) * mean_gamma / (om * om);
    };
    return ramac::detail::adaptive_simpson(integrand, 0.0, 1.0, 1e-6, 1e-312);
}

}  // namespace detail_phy

/// Average bit error rate for a link. Closed forms where standard ones
/// exist (BPSK/AWGN, BPSK/Rayleigh, 16QAM/AWGN); numeric fading averages
/// elsewhere. Result is clamped to [ber_floor, 0.5].
inline double bit_error_rate(const LinkSpec& link) {
    link.validate();
    const double gamma = std::pow(10.0, link.snr_db / 10.0);
    double ber = 0.0;
    switch (link.channel) {
        case Channel::awgn:
            ber = detail_phy::awgn_ber(link.modulation, gamma);
            break;
        case Channel::rayleigh:
            if (link.modulation == Modulation::bpsk) {
                ber = 0.5 * (1.0 - std::sqrt(gamma / (1.0 + gamma)));
            } else {
                ber = detail_phy::rayleigh_average(link.modulation, gamma);
            }
            break;
        case Channel::rician: {
            const double k_linear = std::pow(10.0, *link.rician_k_db / 10.0);
            ber = detail_phy::rician_average(link.modulation, gamma, k_linear);
            break;
        }
    }
    if (ber > 0.5) ber = 0.5;
    if (ber < ber_floor) ber = ber_floor;
    return ber;
}

/// Smallest SNR (dB) at which the link reaches target_ber, by bisection
/// over [min_snr_db, max_snr_db]. BER is monotone decreasing in SNR, so a
/// bracket check decides solvability up front.
inline double required_snr(Modulation mod, Channel channel, double target_ber,
                           std::optional<double> rician_k_db = std::nullopt) {
    if (!(target_ber > 0.0 && target_ber < 0.5)) {
        throw domain_error("target_ber must lie in (0, 0.5)");
    }
    auto ber_at = [&](double db) {
        return bit_error_rate(LinkSpec{mod, channel, db,
                                       channel == Channel::rician ? rician_k_db
                                                                  : std::nullopt});
    };
    if (channel == Channel::rician && !rician_k_db) {
        throw missing_parameter_error("rician channel requires rician_k_db");
    }
    double lo = min_snr_db;
    double hi = max_snr_db;
    if (ber_at(lo) < target_ber || ber_at(hi) > target_ber) {
        throw no_solution_error("target_ber " +
                                ramac::detail::format_sig(target_ber, 6) +
                                " is not reachable within [" +
                                std::to_string(min_snr_db) + ", " +
                                std::to_string(max_snr_db) + "] dB");
    }
    for (int i = 0; i < 120 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ber_at(mid) > target_ber) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace ramac::phy
