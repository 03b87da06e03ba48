#include "osaq/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <deque>
#include <future>

#include "osaq/errors.hpp"
#include "osaq/rng.hpp"

namespace osaq {

namespace {

struct Node {
    std::deque<long> arrivals; // arrival slot of each queued packet
    bool busy = false;
    int channel = -1;        // reserved data channel (1-based), -1 when idle
    long remaining = 0;      // residual slots of the head packet, 0 = not drawn
    long service_start = -1; // first competition slot for the head packet
    long res_len = 0;        // competition slots of the open reservation period
    long on_channel = 0;     // transmission-attempt slots of the head packet
    long episodes = 0;       // transmission episodes of the head packet
    bool episode_open = false;

    std::size_t queue() const { return arrivals.size(); }
};

struct Accum {
    long long n = 0;
    double sum = 0.0, sum2 = 0.0;

    void add(double v) {
        ++n;
        sum += v;
        sum2 += v * v;
    }
    double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
    double sd() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sum2 - n * m * m) / (n - 1.0)));
    }
};

} // namespace

SimStats run_replication(const SystemParams& params, long horizon,
                         std::uint64_t seed, bool truncated) {
    if (horizon < 10'000) {
        throw validation_error("horizon", "must be >= 10^4 slots");
    }
    const int N = params.n_nodes();
    const int MC = params.n_data_channels();
    const bool switching = params.protocol() == Protocol::Switching;
    const long warmup = horizon / 10;

    SlotRng rng(seed);
    std::vector<Node> nodes(N);
    std::vector<char> avail(MC + 1, 1);    // [0] = control channel
    std::vector<char> reserved(MC + 1, 0); // data channels only

    SimStats stats;
    stats.competition_hist.assign(N + 1, 0);
    Accum sys_time, service, reservation, interruptions, reservations, le, le_n;
    long long accepted = 0;
    double occupancy_sum = 0.0;
    long occupancy_slots = 0;
    double quarter_occ[4] = {0, 0, 0, 0};
    long quarter_cnt[4] = {0, 0, 0, 0};

    for (long slot = 0; slot < horizon; ++slot) {
        // occupancy observed at the slot boundary, before any event
        long total_q = 0;
        for (const Node& nd : nodes) total_q += static_cast<long>(nd.queue());
        const int quarter = static_cast<int>((4 * slot) / horizon);
        quarter_occ[quarter] += static_cast<double>(total_q);
        ++quarter_cnt[quarter];
        if (slot >= warmup) {
            occupancy_sum += static_cast<double>(total_q);
            ++occupancy_slots;
        }

        // 1. sensing
        for (int ch = 0; ch <= MC; ++ch) {
            avail[ch] = rng.bernoulli(params.p_c()) ? 0 : 1;
        }
        if (switching) {
            for (Node& nd : nodes) {
                if (nd.busy && !avail[nd.channel]) {
                    reserved[nd.channel] = 0;
                    nd.busy = false;
                    nd.channel = -1; // rejoins the competition this slot
                }
            }
        }

        // 2. competition
        int transmitters = 0;
        int candidate = -1;
        int competitors = 0;
        for (int i = 0; i < N; ++i) {
            Node& nd = nodes[i];
            if (nd.busy || nd.queue() == 0) continue;
            ++competitors;
            if (nd.service_start < 0) nd.service_start = slot;
            ++nd.res_len;
            if (rng.bernoulli(params.p())) {
                ++transmitters;
                candidate = i;
            }
        }
        stats.competition_hist[competitors] += 1;
        int winner = -1;
        if (transmitters == 1 && avail[0] && rng.bernoulli(params.eta_c())) {
            winner = candidate;
        }

        // 3. transmission
        for (int i = 0; i < N; ++i) {
            Node& nd = nodes[i];
            if (!nd.busy || !avail[nd.channel]) continue;
            if (!nd.episode_open) {
                // first attempt slot after a reservation: the reservation
                // period closes here
                reservation.add(static_cast<double>(nd.res_len));
                nd.res_len = 0;
                ++nd.episodes;
                nd.episode_open = true;
            }
            ++nd.on_channel;
            if (rng.bernoulli(params.eta())) {
                --nd.remaining;
                if (nd.remaining == 0) {
                    // 4. packet completes, channel released at slot end
                    reserved[nd.channel] = 0;
                    nd.busy = false;
                    nd.channel = -1;
                    const long arrival = nd.arrivals.front();
                    nd.arrivals.pop_front();
                    if (arrival >= warmup) {
                        sys_time.add(static_cast<double>(slot - arrival));
                        service.add(static_cast<double>(slot - nd.service_start + 1));
                        const double n_int = static_cast<double>(nd.episodes - 1);
                        interruptions.add(n_int);
                        reservations.add(static_cast<double>(nd.episodes));
                        le.add(static_cast<double>(nd.on_channel));
                        le_n.add(static_cast<double>(nd.on_channel) * n_int);
                    }
                    nd.service_start = -1;
                    nd.on_channel = 0;
                    nd.episodes = 0;
                    nd.episode_open = false;
                }
            }
        }
        if (switching) {
            // an eviction next slot reopens the reservation bookkeeping
            for (Node& nd : nodes) {
                if (!nd.busy) nd.episode_open = false;
            }
        }

        // 5. reservation takes effect: lowest-index free data channel,
        // including one released by a termination in this slot
        if (winner >= 0) {
            for (int ch = 1; ch <= MC; ++ch) {
                if (!reserved[ch]) {
                    Node& nd = nodes[winner];
                    reserved[ch] = 1;
                    nd.busy = true;
                    nd.channel = ch;
                    nd.episode_open = false;
                    if (nd.remaining == 0) nd.remaining = rng.geometric(params.q());
                    break;
                }
            }
            // no free channel: success in competition but not in reservation
        }

        // 6. arrivals, eligible to compete from the next slot
        for (Node& nd : nodes) {
            if (rng.bernoulli(params.lambda())) {
                if (truncated &&
                    nd.queue() >= static_cast<std::size_t>(params.qs_max())) {
                    if (slot >= warmup) ++stats.dropped;
                } else {
                    nd.arrivals.push_back(slot);
                    if (slot >= warmup) ++accepted;
                }
            }
        }
    }

    stats.completed = sys_time.n;
    stats.undefined = sys_time.n == 0;
    stats.mean_system_time = sys_time.mean();
    stats.ci95_halfwidth =
        sys_time.n > 1 ? 1.96 * sys_time.sd() /
                             std::sqrt(static_cast<double>(sys_time.n))
                       : 0.0;
    stats.mean_occupancy =
        occupancy_slots > 0 ? occupancy_sum / static_cast<double>(occupancy_slots)
                            : 0.0;
    stats.lambda_eff = occupancy_slots > 0
                           ? static_cast<double>(accepted) /
                                 static_cast<double>(occupancy_slots)
                           : 0.0;
    stats.mean_service = service.mean();
    stats.m2_service =
        service.n > 0 ? service.sum2 / static_cast<double>(service.n) : 0.0;
    stats.mean_reservation = reservation.mean();
    stats.mean_interruptions = interruptions.mean();
    stats.mean_reservations = reservations.mean();
    stats.mean_le = le.mean();
    stats.mean_le_n = le_n.mean();

    const double q2 = quarter_cnt[1] ? quarter_occ[1] / quarter_cnt[1] : 0.0;
    const double q4 = quarter_cnt[3] ? quarter_occ[3] / quarter_cnt[3] : 0.0;
    stats.unstable = q4 > 2.0 * q2 && q4 - q2 > 0.5;
    return stats;
}

SimStats run_batch(const SystemParams& params, long horizon, int replications,
                   std::uint64_t base_seed, bool truncated) {
    if (replications < 2) {
        throw validation_error("replications", "must be >= 2");
    }
    std::vector<std::future<SimStats>> futures;
    futures.reserve(replications);
    for (int r = 0; r < replications; ++r) {
        futures.push_back(std::async(std::launch::async, [&, r] {
            return run_replication(params, horizon, base_seed + r, truncated);
        }));
    }
    std::vector<SimStats> reps;
    reps.reserve(replications);
    for (auto& f : futures) reps.push_back(f.get());

    SimStats pooled;
    pooled.competition_hist.assign(params.n_nodes() + 1, 0);
    Accum rep_means;
    const double R = static_cast<double>(replications);
    for (const SimStats& s : reps) {
        pooled.completed += s.completed;
        pooled.dropped += s.dropped;
        pooled.unstable = pooled.unstable || s.unstable;
        pooled.undefined = pooled.undefined || s.undefined;
        rep_means.add(s.mean_system_time);
        pooled.mean_occupancy += s.mean_occupancy / R;
        pooled.lambda_eff += s.lambda_eff / R;
        pooled.mean_service += s.mean_service / R;
        pooled.m2_service += s.m2_service / R;
        pooled.mean_reservation += s.mean_reservation / R;
        pooled.mean_interruptions += s.mean_interruptions / R;
        pooled.mean_reservations += s.mean_reservations / R;
        pooled.mean_le += s.mean_le / R;
        pooled.mean_le_n += s.mean_le_n / R;
        for (std::size_t i = 0;
             i < s.competition_hist.size() && i < pooled.competition_hist.size();
             ++i) {
            pooled.competition_hist[i] += s.competition_hist[i];
        }
    }
    pooled.mean_system_time = rep_means.mean();
    const boost::math::students_t dist(R - 1.0);
    const double t = boost::math::quantile(dist, 0.975);
    pooled.ci95_halfwidth = t * rep_means.sd() / std::sqrt(R);
    return pooled;
}

} // namespace osaq
