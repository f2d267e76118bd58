#pragma once

namespace ramac {

/// All derived performance measures for one traffic class.
///
/// Conventions (flagged here because the underlying state vector offers two
/// readings): `throughput` counts fresh grants and is based on the head
/// transmit state, N*s_t[0]; `utilization` and `net_acceptance` measure
/// data-channel occupancy and are based on the full transmit-state sum,
/// N*sum_j s_t[j], since a retransmitting user still holds a data channel.
struct MetricsReport {
    double throughput = 0.0;        // granted requests per frame, min(N*s_t[0], k)
    double acceptance = 0.0;        // p_a = throughput / offered load
    double delay = 0.0;             // mean access attempts before grant, (1-p_a)/p_a
    double energy_db = 0.0;         // mean request energy, -10*log10(p_a), rel. E0
    double retransmissions = 0.0;   // ARQ transmissions/packet sum, sum_i i e^i B
    double efficiency = 0.0;        // 1 / (1 + retransmissions)
    double utilization = 0.0;       // min(L, N*S_T)/L
    double net_acceptance = 0.0;    // p_a scaled down when N*S_T exceeds L
};

}  // namespace ramac
