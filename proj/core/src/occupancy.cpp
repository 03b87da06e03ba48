#include "osaq/occupancy.hpp"

#include <cmath>
#include <string>

#include "osaq/errors.hpp"

namespace osaq {

int OccupancyState::busy_count() const {
    int k = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] == 1 && n[i] > 0) ++k;
    }
    return k;
}

int OccupancyState::competitor_count() const {
    int g = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] == 0 && n[i] > 0) ++g;
    }
    return g;
}

std::vector<OccupancyState> enumerate_states(const SystemParams& params,
                                             std::size_t cap) {
    const int N = params.n_nodes();
    const int qs = params.qs_max();
    const int smax = params.s_max();

    std::vector<OccupancyState> states;
    OccupancyState cur;
    cur.n.assign(N, 0);
    cur.b.assign(N, 0);

    // lexicographic order over (n_1..n_N, b_1..b_N): advance b first from
    // the rightmost position, then n
    auto valid = [&] {
        int busy = 0;
        for (int i = 0; i < N; ++i) {
            if (cur.n[i] == 0 && cur.b[i] == 1) return false;
            busy += cur.b[i];
        }
        return busy <= smax;
    };

    while (true) {
        if (valid()) {
            if (states.size() >= cap) {
                throw numeric_error(
                    "occupancy state-space too large (cap " +
                    std::to_string(cap) + "), use the combined MC");
            }
            states.push_back(cur);
        }
        int pos = 2 * N - 1;
        for (; pos >= 0; --pos) {
            if (pos >= N) { // b part
                if (cur.b[pos - N] == 0) {
                    cur.b[pos - N] = 1;
                    break;
                }
                cur.b[pos - N] = 0;
            } else { // n part
                if (cur.n[pos] < qs) {
                    ++cur.n[pos];
                    break;
                }
                cur.n[pos] = 0;
            }
        }
        if (pos < 0) break;
    }
    return states;
}

namespace {

// Arrival algebra without a service decrement. At the truncation boundary
// n = Qs_max the arrival mass folds into staying at Qs_max.
double f_arr0(int n, int m, int qs, double lambda) {
    if (n == qs) return m == qs ? 1.0 : 0.0;
    if (m == n) return 1.0 - lambda;
    if (m == n + 1) return lambda;
    return 0.0;
}

// Arrival algebra joint with a termination (queue decremented by one).
double f_arr1(int n, int m, double lambda) {
    if (m == n - 1) return 1.0 - lambda;
    if (m == n) return lambda;
    return 0.0;
}

double aloha_success(int g, double p, double chi) {
    if (g <= 0) return 0.0;
    return static_cast<double>(g) * p *
           std::pow(1.0 - p, static_cast<double>(g - 1)) * chi;
}

struct PairCounts {
    int num_s = 0; // nodes with b 0->1
    int num_t = 0; // nodes with b 1->0
    bool impossible = false;
};

PairCounts classify(const OccupancyState& a, const OccupancyState& b,
                    int smax, int k_a) {
    PairCounts c;
    const std::size_t N = a.n.size();
    for (std::size_t i = 0; i < N; ++i) {
        if (b.n[i] < a.n[i] - 1 || b.n[i] > a.n[i] + 1) {
            c.impossible = true;
            return c;
        }
        if (a.n[i] == 0 && b.b[i] == 1) {
            c.impossible = true; // an empty node cannot reserve
            return c;
        }
        if (a.b[i] == 0 && b.b[i] == 1) ++c.num_s;
        if (a.b[i] == 1 && b.b[i] == 0) ++c.num_t;
    }
    if (c.num_s > 1) c.impossible = true;
    if (k_a == smax && c.num_s > 0 && c.num_t == 0) c.impossible = true;
    return c;
}

} // namespace

double transition_prob_buffering(const OccupancyState& a,
                                 const OccupancyState& b,
                                 const SystemParams& params) {
    const int N = params.n_nodes();
    const int qs = params.qs_max();
    const double lambda = params.lambda();
    const double qpsi = params.q() * params.psi();
    const int k_a = a.busy_count();

    const PairCounts pc = classify(a, b, params.s_max(), k_a);
    if (pc.impossible) return 0.0;
    const bool all_busy_no_ter = k_a == params.s_max() && pc.num_t == 0;

    double prob = 1.0;
    int competitors = 0;
    int winner = -1;
    int first_competitor = -1;
    for (int i = 0; i < N; ++i) {
        double f;
        if (a.n[i] == 0) {
            f = f_arr0(a.n[i], b.n[i], qs, lambda);
        } else if (a.b[i] == 1) {
            f = b.b[i] == 1 ? (1.0 - qpsi) * f_arr0(a.n[i], b.n[i], qs, lambda)
                            : qpsi * f_arr1(a.n[i], b.n[i], lambda);
        } else {
            ++competitors;
            if (first_competitor < 0) first_competitor = i;
            if (b.b[i] == 1) winner = i;
            f = f_arr0(a.n[i], b.n[i], qs, lambda);
        }
        if (f == 0.0) return 0.0;
        prob *= f;
    }

    if (competitors > 0) {
        const double ps = aloha_success(competitors, params.p(), params.chi());
        if (winner >= 0) {
            prob *= ps / static_cast<double>(competitors);
        } else if (!all_busy_no_ter) {
            prob *= 1.0 - ps;
        }
        // all busy, no termination: a competition success cannot turn into a
        // reservation, so the idle group stays idle with probability one
    }
    return prob;
}

double transition_prob_switching(const OccupancyState& a,
                                 const OccupancyState& b,
                                 const SystemParams& params) {
    const int N = params.n_nodes();
    const int qs = params.qs_max();
    const int smax = params.s_max();
    const double lambda = params.lambda();
    const double pc_pu = params.p_c();
    const double qeta = params.q() * params.eta();
    const int k_a = a.busy_count();

    const PairCounts pc = classify(a, b, smax, k_a);
    if (pc.impossible) return 0.0;
    const bool all_busy_no_ter = k_a == smax && pc.num_t == 0;
    const bool boundary = k_a == smax;

    double prob = 1.0;
    int competitors = 0;
    int winner = -1;
    // busy -> idle transitions at the k = s_max boundary: termination and
    // PU-eviction weights per node (the P_t / P_m vectors)
    std::vector<double> pt, pm;
    for (int i = 0; i < N; ++i) {
        double f = 1.0;
        if (a.n[i] == 0) {
            f = f_arr0(a.n[i], b.n[i], qs, lambda);
        } else if (a.b[i] == 1) {
            if (b.b[i] == 1) {
                f = (1.0 - qeta) * (1.0 - pc_pu) *
                    f_arr0(a.n[i], b.n[i], qs, lambda);
            } else if (!boundary) {
                f = (1.0 - qeta) * pc_pu * f_arr0(a.n[i], b.n[i], qs, lambda) +
                    qeta * f_arr1(a.n[i], b.n[i], lambda);
            } else {
                pt.push_back(qeta * f_arr1(a.n[i], b.n[i], lambda));
                pm.push_back((1.0 - qeta) * pc_pu *
                             f_arr0(a.n[i], b.n[i], qs, lambda));
            }
        } else {
            ++competitors;
            if (b.b[i] == 1) winner = i;
            f = f_arr0(a.n[i], b.n[i], qs, lambda);
        }
        if (f == 0.0) return 0.0;
        prob *= f;
    }

    // probability that at least one busy->idle node at the boundary is a
    // genuine termination (first one at position h, any mix after), and the
    // probability that all of them are PU evictions
    double p_10t = 0.0;
    double p_allm = 1.0;
    if (!pt.empty()) {
        double prefix_m = 1.0;
        std::vector<double> suffix_mt(pt.size() + 1, 1.0);
        for (std::size_t h = pt.size(); h-- > 0;) {
            suffix_mt[h] = suffix_mt[h + 1] * (pt[h] + pm[h]);
        }
        for (std::size_t h = 0; h < pt.size(); ++h) {
            p_10t += prefix_m * pt[h] * suffix_mt[h + 1];
            prefix_m *= pm[h];
        }
        p_allm = prefix_m;
    }

    double s10_factor = pt.empty() ? 1.0 : p_allm + p_10t;
    if (competitors > 0) {
        const double ps = aloha_success(competitors, params.p(), params.chi());
        const double succ = ps * (1.0 - pc_pu);
        if (!boundary) {
            if (winner >= 0) {
                prob *= succ / static_cast<double>(competitors);
            } else {
                prob *= 1.0 - succ;
            }
        } else {
            if (winner >= 0) {
                // reservation needs a channel freed by a termination
                prob *= succ / static_cast<double>(competitors);
                s10_factor = p_10t;
            } else if (!all_busy_no_ter) {
                // either every busy->idle node was evicted, or a channel was
                // freed but the competition failed or the reserved channel
                // was lost to a PU
                s10_factor = p_allm + p_10t * (1.0 - succ);
            }
        }
    }
    return prob * s10_factor;
}

TransitionMatrix build_occupancy_matrix(const std::vector<OccupancyState>& states,
                                        const SystemParams& params) {
    const bool switching = params.protocol() == Protocol::Switching;
    TransitionMatrix P(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = 0; j < states.size(); ++j) {
            const double prob =
                switching ? transition_prob_switching(states[i], states[j], params)
                          : transition_prob_buffering(states[i], states[j], params);
            if (prob > 0.0) P.add(i, j, prob);
        }
    }
    P.check_stochastic("occupancy matrix");
    return P;
}

OccupancyDelay delay_from_pi(const std::vector<double>& pi,
                             const std::vector<OccupancyState>& states,
                             const SystemParams& params) {
    if (pi.size() != states.size()) {
        throw numeric_error("delay_from_pi: pi/state size mismatch");
    }
    const double departure = params.protocol() == Protocol::Buffering
                                 ? params.q() * params.psi()
                                 : params.q() * params.eta();
    OccupancyDelay d;
    for (std::size_t s = 0; s < states.size(); ++s) {
        d.mean_queue += pi[s] * static_cast<double>(states[s].n[0]);
        if (states[s].b[0] == 1) d.throughput += pi[s] * departure;
    }
    if (d.throughput <= 0.0) {
        throw numeric_error("delay_from_pi: zero throughput, delay undefined");
    }
    d.mean_system_time = d.mean_queue / d.throughput;
    return d;
}

} // namespace osaq
