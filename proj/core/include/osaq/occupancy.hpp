#pragma once

#include <cstddef>
#include <vector>

#include "osaq/matrix.hpp"
#include "osaq/params.hpp"

namespace osaq {

// Exact-chain state: per-node queue occupancy and busy flag. For the
// switching protocol the chain is embedded immediately after sensing, so
// b[i] = 1 additionally means node i's reserved channel is available in the
// current slot.
struct OccupancyState {
    std::vector<int> n; // queue occupancy per node, 0..Qs_max
    std::vector<int> b; // busy flag per node

    int busy_count() const; // k_A
    int competitor_count() const; // g_A: idle nodes with a non-empty queue

    bool operator==(const OccupancyState&) const = default;
};

// All states with n_i = 0 => b_i = 0 and sum(b) <= s_max, in lexicographic
// order over the concatenated (n, b) tuple. Throws numeric_error when the
// filtered count exceeds `cap` (use the combined chain instead).
std::vector<OccupancyState> enumerate_states(const SystemParams& params,
                                             std::size_t cap = 100'000);

// Single transition probability A -> B. Total functions on valid states;
// pairs in the impossible set get exactly 0.
double transition_prob_buffering(const OccupancyState& a,
                                 const OccupancyState& b,
                                 const SystemParams& params);
double transition_prob_switching(const OccupancyState& a,
                                 const OccupancyState& b,
                                 const SystemParams& params);

// Full matrix over `states` for params.protocol().
TransitionMatrix build_occupancy_matrix(const std::vector<OccupancyState>& states,
                                        const SystemParams& params);

struct OccupancyDelay {
    double mean_queue = 0.0;       // E[n_1], tagged node
    double throughput = 0.0;       // departure probability per slot
    double mean_system_time = 0.0; // slots
};

// Little's law on the tagged node: E[T] = E[n_1] / theta with theta the
// per-slot departure probability read from the stationary distribution.
OccupancyDelay delay_from_pi(const std::vector<double>& pi,
                             const std::vector<OccupancyState>& states,
                             const SystemParams& params);

} // namespace osaq
