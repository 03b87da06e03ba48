#pragma once

#include <cstdint>
#include <vector>

#include "osaq/params.hpp"

namespace osaq {

// Aggregated output of one replication (or a pooled batch).
struct SimStats {
    long long completed = 0;       // packets counted in the statistics
    long long dropped = 0;         // truncated mode only
    double mean_system_time = 0.0; // slots, arrival to departure
    double ci95_halfwidth = 0.0;   // slots
    double mean_occupancy = 0.0;   // time-average packets in system, all nodes
    double lambda_eff = 0.0;       // accepted arrivals per slot, all nodes
    bool unstable = false;
    bool undefined = false; // no packets completed

    // empirical service decomposition, per completed packet
    double mean_service = 0.0;     // E[X]
    double m2_service = 0.0;       // E[X^2]
    double mean_reservation = 0.0; // E[X_R], per reservation period

    // switching renewal bookkeeping (zero under buffering)
    double mean_interruptions = 0.0; // E[n]
    double mean_reservations = 0.0;  // E[m] = E[n] + 1
    double mean_le = 0.0;            // E[L_e], transmission-attempt slots
    double mean_le_n = 0.0;          // E[L_e * n]

    // per-slot competition-size histogram, index = number of competitors
    std::vector<long long> competition_hist;
};

// Slot-accurate replication of one MAC protocol. Deterministic in
// (params, horizon, seed, truncated). Statistics cover packets arriving
// after a warm-up of 10% of the horizon.
SimStats run_replication(const SystemParams& params, long horizon,
                         std::uint64_t seed, bool truncated = false);

// Independent replications with seeds base_seed, base_seed+1, ...; pooled
// mean with a Student-t 95% confidence interval over replication means.
SimStats run_batch(const SystemParams& params, long horizon, int replications,
                   std::uint64_t base_seed, bool truncated = false);

} // namespace osaq
