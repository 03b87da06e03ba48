#pragma once

#include <cstddef>
#include <vector>

#include "osaq/matrix.hpp"
#include "osaq/params.hpp"
#include "osaq/pmf.hpp"
#include "osaq/queueing.hpp"

namespace osaq {

// Aggregate chain state: k busy nodes, g idle nodes with a non-empty queue.
struct CombinedState {
    int k = 0;
    int g = 0;

    bool operator==(const CombinedState&) const = default;
};

// State space {(k,g) : 0 <= k <= s_max, 0 <= g <= N-k} with a dense index.
class CombinedSpace {
public:
    explicit CombinedSpace(const SystemParams& params);

    const std::vector<CombinedState>& states() const noexcept { return states_; }
    std::size_t size() const noexcept { return states_.size(); }
    std::size_t index(int k, int g) const;

private:
    std::vector<CombinedState> states_;
    std::vector<std::size_t> offset_; // offset_[k] = index of (k,0)
    int n_nodes_;
};

// How the reservation-period moments are obtained.
enum class XrMethod {
    ExactRecursion, // Eq.-exact marked-chain recursion
    Mixture,        // per-g geometric mixture
    Average,        // single geometric at the mean competitor count
    Reduced,        // single-variable busy-count chain (buffering only)
};

std::string to_string(XrMethod m);

// --- elementary probabilities -------------------------------------------

struct CompetitionSuccess {
    double ps = 0.0;     // P_s(g): some competitor wins
    double ps_kg = 0.0;  // deflated by the no-termination factor at k = s_max
    double ps_m = 0.0;   // marked-node share, P_s(k,g)/g
};

CompetitionSuccess competition_success(int k, int g, const SystemParams& params);

// Probability of j transmission terminations among k busy nodes
// (per-node q*psi under buffering, q*eta under switching).
double termination_prob(int k, int j, const SystemParams& params);

// Probability that exactly `stay` of `count` non-finishing busy nodes keep
// their channel through the next sensing (switching protocol).
double stay_prob(int count, int stay, const SystemParams& params);

// Y_a^{b,c}: a new competitors appear, from b terminating busy nodes that
// still hold packets (prob 1-P0 each) and c empty idle nodes with an
// arrival (prob lambda each).
double group_join_prob(int a, int b, int c, double p0, double lambda);

// --- chain construction --------------------------------------------------

TransitionMatrix build_transitions(Protocol protocol, double p0,
                                   const SystemParams& params);

// Variant conditioned on a marked competitor failing: the competition
// success probability is replaced by the probability that one of the other
// g-1 competitors wins. With `literal_psi` the substituted term uses psi as
// printed rather than the control-channel chi.
TransitionMatrix build_marked_transitions(Protocol protocol, double p0,
                                          const SystemParams& params,
                                          bool literal_psi = false);

// Per-slot probability that the marked node completes its reservation in
// state s (includes the next-slot channel availability under switching).
std::vector<double> marked_success_vector(Protocol protocol,
                                          const CombinedSpace& space,
                                          const SystemParams& params);

// --- reservation period --------------------------------------------------

// Conditional pmf of X_R given the chain starts in (k,g), g >= 1, computed
// by propagating the failure mass through Q and collecting the marked
// success probability at each step.
DiscretePmf xr_conditional(int k, int g, const TransitionMatrix& q,
                           const CombinedSpace& space,
                           const std::vector<double>& success,
                           double tail_tol = 1e-8);

// Mixture over the conditionals with weights pi renormalized to exclude
// g = 0 states. Throws numeric_error when no competing state carries mass.
DiscretePmf xr_unconditional(const std::vector<DiscretePmf>& conditionals,
                             const std::vector<double>& pi,
                             const CombinedSpace& space);

// Exact moments of the unconditional X_R via linear solves on the marked
// chain; identical to the pmf route but free of truncation error.
Moments xr_moments_exact(const TransitionMatrix& q, const CombinedSpace& space,
                         const std::vector<double>& success,
                         const std::vector<double>& weights);

// Renormalized stationary weights pi^N over g >= 1 states.
std::vector<double> competitor_weights(const std::vector<double>& pi,
                                       const CombinedSpace& space);

// Moment approximations: per-g geometric mixture and single average-g
// geometric. Both collapse to the exact geometric when N = 1.
struct XrApproximations {
    DiscretePmf mixture;
    DiscretePmf average;
    Moments mixture_moments;
    Moments average_moments;
    double h_smax = 0.0; // probability of k = s_max under pi^N
    double g_bar = 0.0;  // mean competitor count under pi^N
};

XrApproximations xr_moment_approximations(const std::vector<double>& pi,
                                          const CombinedSpace& space,
                                          const SystemParams& params,
                                          double tail_tol = 1e-8);

// --- reduced single-variable chain (buffering only) ----------------------

TransitionMatrix build_reduced_transitions(double p0, const SystemParams& params,
                                           bool marked = false);

Moments xr_moments_reduced(double p0, const SystemParams& params);

// --- fixed point ----------------------------------------------------------

struct FixedPointResult {
    double p0 = 1.0;
    int iterations = 0;
    bool converged = false;
    double rho = 0.0; // lambda * E[X] at the final iterate
};

struct CombinedSolution {
    FixedPointResult fixed_point;
    Moments xr;
    ServiceMoments service;
    double mean_system_time = 0.0; // valid when stable
    bool stable = false;
};

// Iterates P0 <- 1 - lambda E[X(P0)] with damping 0.5 until the residual
// drops below 1e-8 (cap 500 iterations). A non-converged or rho >= 1
// outcome is reported, not thrown.
CombinedSolution solve_combined(Protocol protocol, const SystemParams& params,
                                XrMethod method);

} // namespace osaq
