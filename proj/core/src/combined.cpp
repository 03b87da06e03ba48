#include "osaq/combined.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "osaq/errors.hpp"

namespace osaq {

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

double binom_pmf(int n, int k, double prob) {
    if (k < 0 || k > n) return 0.0;
    return binom(n, k) * std::pow(prob, k) *
           std::pow(1.0 - prob, static_cast<double>(n - k));
}

double per_node_termination(const SystemParams& params) {
    return params.protocol() == Protocol::Buffering
               ? params.q() * params.psi()
               : params.q() * params.eta();
}

} // namespace

CombinedSpace::CombinedSpace(const SystemParams& params)
    : n_nodes_(params.n_nodes()) {
    offset_.resize(params.s_max() + 1);
    for (int k = 0; k <= params.s_max(); ++k) {
        offset_[k] = states_.size();
        for (int g = 0; g + k <= n_nodes_; ++g) {
            states_.push_back({k, g});
        }
    }
}

std::size_t CombinedSpace::index(int k, int g) const {
    if (k < 0 || k >= static_cast<int>(offset_.size()) || g < 0 ||
        k + g > n_nodes_) {
        throw numeric_error("combined state (" + std::to_string(k) + "," +
                            std::to_string(g) + ") out of range");
    }
    return offset_[k] + static_cast<std::size_t>(g);
}

std::string to_string(XrMethod m) {
    switch (m) {
        case XrMethod::ExactRecursion: return "combined-exact";
        case XrMethod::Mixture: return "combined-dist";
        case XrMethod::Average: return "combined-avg";
        case XrMethod::Reduced: return "pawelczak";
    }
    return "?";
}

CompetitionSuccess competition_success(int k, int g, const SystemParams& params) {
    CompetitionSuccess cs;
    if (g <= 0) return cs;
    cs.ps = static_cast<double>(g) * params.p() *
            std::pow(1.0 - params.p(), static_cast<double>(g - 1)) *
            params.chi();
    cs.ps_kg = k < params.s_max()
                   ? cs.ps
                   : cs.ps * (1.0 - termination_prob(k, 0, params));
    cs.ps_m = cs.ps_kg / static_cast<double>(g);
    return cs;
}

double termination_prob(int k, int j, const SystemParams& params) {
    return binom_pmf(k, j, per_node_termination(params));
}

double stay_prob(int count, int stay, const SystemParams& params) {
    if (stay < 0 || stay > count) return 0.0;
    return binom(count, count - stay) *
           std::pow(1.0 - params.p_c(), static_cast<double>(stay)) *
           std::pow(params.p_c(), static_cast<double>(count - stay));
}

double group_join_prob(int a, int b, int c, double p0, double lambda) {
    if (a < 0 || a > b + c) return 0.0;
    double sum = 0.0;
    for (int i = std::max(0, a - c); i <= std::min(a, b); ++i) {
        const int j = a - i;
        sum += binom_pmf(b, i, 1.0 - p0) * binom_pmf(c, j, lambda);
    }
    return sum;
}

namespace {

// P_s(g) as used in the chain rows: plain for the unmarked chain, the
// one-of-the-others term for the marked chain.
double row_success(int g, const SystemParams& params, bool marked,
                   bool literal_psi) {
    if (g <= 0) return 0.0;
    const double cap = literal_psi ? params.psi() : params.chi();
    if (!marked) {
        return static_cast<double>(g) * params.p() *
               std::pow(1.0 - params.p(), static_cast<double>(g - 1)) *
               params.chi();
    }
    if (g == 1) return 0.0;
    return static_cast<double>(g - 1) * params.p() *
           std::pow(1.0 - params.p(), static_cast<double>(g - 1)) * cap;
}

double buffering_entry(const CombinedState& a, const CombinedState& b, double s1,
                       double p0, const SystemParams& params) {
    const int k = a.k, g = a.g, z = b.k, h = b.g;
    if (z > k + 1 || h < g - 1) return 0.0;
    const int c_empty = params.n_nodes() - k - g;
    const double s0 = 1.0 - s1;

    if (z == k + 1) {
        return termination_prob(k, 0, params) * s1 *
               group_join_prob(h - g + 1, 0, c_empty, p0, params.lambda());
    }
    if (z == k && k == params.s_max()) {
        // all channels stay busy: a competition win without a same-slot
        // termination is not a reservation, so the no-change branch carries
        // no success factor
        return termination_prob(k, 1, params) * s1 *
                   group_join_prob(h - g + 1, 1, c_empty, p0, params.lambda()) +
               termination_prob(k, 0, params) *
                   group_join_prob(h - g, 0, c_empty, p0, params.lambda());
    }
    // 0 <= z <= k; the success term vanishes at z = 0
    return termination_prob(k, k - z, params) * s0 *
               group_join_prob(h - g, k - z, c_empty, p0, params.lambda()) +
           termination_prob(k, k - z + 1, params) * s1 *
               group_join_prob(h - g + 1, k - z + 1, c_empty, p0,
                               params.lambda());
}

double switching_entry(const CombinedState& a, const CombinedState& b, double s1,
                       double p0, const SystemParams& params) {
    const int k = a.k, g = a.g, z = b.k, h = b.g;
    if (z > k + 1 || h < g - 1) return 0.0;
    const int c_empty = params.n_nodes() - k - g;
    const double succ = s1 * (1.0 - params.p_c());

    if (z == k + 1) {
        return termination_prob(k, 0, params) * stay_prob(k, k, params) * succ *
               group_join_prob(h - g + 1, 0, c_empty, p0, params.lambda());
    }
    const bool boundary = z == k && k == params.s_max();
    double total = 0.0;
    // no reservation success: i terminations, z of the k-i survivors keep
    // their channel through the next sensing
    for (int i = 0; i <= k - z; ++i) {
        total += termination_prob(k, i, params) * stay_prob(k - i, z, params) *
                 (boundary ? 1.0 : 1.0 - succ) *
                 group_join_prob(h - g - (k - i - z), i, c_empty, p0,
                                 params.lambda());
    }
    // reservation success: the winner is the z-th busy node of the next slot
    for (int i = 0; i <= k - z + 1; ++i) {
        total += termination_prob(k, i, params) * stay_prob(k - i, z - 1, params) *
                 succ *
                 group_join_prob(h - g - (k - i - z), i, c_empty, p0,
                                 params.lambda());
    }
    return total;
}

TransitionMatrix build_combined(Protocol protocol, double p0,
                                const SystemParams& base, bool marked,
                                bool literal_psi) {
    const SystemParams params = base.with_protocol(protocol);
    const CombinedSpace space(params);
    TransitionMatrix P(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CombinedState& a = space.states()[i];
        const double s1 = row_success(a.g, params, marked, literal_psi);
        for (std::size_t j = 0; j < space.size(); ++j) {
            const CombinedState& b = space.states()[j];
            const double prob =
                protocol == Protocol::Buffering
                    ? buffering_entry(a, b, s1, p0, params)
                    : switching_entry(a, b, s1, p0, params);
            if (prob > 0.0) P.add(i, j, prob);
        }
    }
    P.check_stochastic(marked ? "combined marked matrix" : "combined matrix");
    return P;
}

} // namespace

TransitionMatrix build_transitions(Protocol protocol, double p0,
                                   const SystemParams& params) {
    return build_combined(protocol, p0, params, false, false);
}

TransitionMatrix build_marked_transitions(Protocol protocol, double p0,
                                          const SystemParams& params,
                                          bool literal_psi) {
    return build_combined(protocol, p0, params, true, literal_psi);
}

std::vector<double> marked_success_vector(Protocol protocol,
                                          const CombinedSpace& space,
                                          const SystemParams& base) {
    const SystemParams params = base.with_protocol(protocol);
    // under switching the reservation only completes if the assigned channel
    // survives the next sensing
    const double deflate =
        protocol == Protocol::Switching ? 1.0 - params.p_c() : 1.0;
    std::vector<double> success(space.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CombinedState& s = space.states()[i];
        if (s.g > 0) {
            success[i] = competition_success(s.k, s.g, params).ps_m * deflate;
        }
    }
    return success;
}

DiscretePmf xr_conditional(int k, int g, const TransitionMatrix& q,
                           const CombinedSpace& space,
                           const std::vector<double>& success, double tail_tol) {
    if (g < 1) throw numeric_error("xr_conditional requires g >= 1");
    std::vector<double> weights(space.size(), 0.0);
    weights[space.index(k, g)] = 1.0;

    std::vector<double> probs{0.0};
    std::vector<double> next(space.size());
    double residual = 1.0;
    while (residual > tail_tol) {
        if (probs.size() >= DiscretePmf::kMaxSupport) {
            throw numeric_error(
                "xr_conditional: residual mass fails to shrink (unstable)");
        }
        double collected = 0.0;
        for (std::size_t s = 0; s < space.size(); ++s) {
            collected += weights[s] * success[s];
        }
        probs.push_back(collected);
        residual -= collected;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < space.size(); ++s) {
            const double fail = weights[s] * (1.0 - success[s]);
            if (fail == 0.0) continue;
            for (const auto& [t, p] : q.row(s)) next[t] += fail * p;
        }
        weights.swap(next);
    }
    return DiscretePmf(std::move(probs), residual);
}

std::vector<double> competitor_weights(const std::vector<double>& pi,
                                       const CombinedSpace& space) {
    double competing = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.states()[i].g > 0) competing += pi[i];
    }
    if (competing < 1e-14) {
        throw numeric_error(
            "degenerate scenario: no stationary mass on competing states");
    }
    std::vector<double> w(space.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.states()[i].g > 0) w[i] = pi[i] / competing;
    }
    return w;
}

DiscretePmf xr_unconditional(const std::vector<DiscretePmf>& conditionals,
                             const std::vector<double>& pi,
                             const CombinedSpace& space) {
    const std::vector<double> w = competitor_weights(pi, space);
    std::vector<double> weights;
    std::vector<const DiscretePmf*> parts;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (w[i] > 0.0) {
            weights.push_back(w[i]);
            parts.push_back(&conditionals[i]);
        }
    }
    return DiscretePmf::mixture(weights, parts);
}

namespace {

// Exact moments of the absorption-time-style sum: the conditional pmf from
// state s is Pr(X=i|s) = [A^(i-1) c]_s with A = diag(1-c) Q. Then the mean
// vector is (I-A)^-1 1 and the second moment (I+A)(I-A)^-1 mu.
Moments failure_chain_moments(const TransitionMatrix& q,
                              const std::vector<double>& success,
                              const std::vector<double>& weights) {
    const std::size_t n = q.size();
    // restrict to states reachable from the weight support
    std::vector<char> active(n, 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (weights[s] > 0.0) {
            active[s] = 1;
            stack.push_back(s);
        }
    }
    if (stack.empty()) throw numeric_error("failure_chain_moments: no weights");
    while (!stack.empty()) {
        const std::size_t s = stack.back();
        stack.pop_back();
        if (success[s] >= 1.0) continue;
        for (const auto& [t, p] : q.row(s)) {
            if (p > 0.0 && !active[t]) {
                active[t] = 1;
                stack.push_back(t);
            }
        }
    }
    std::vector<std::size_t> states;
    std::vector<int> index(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (active[s]) {
            index[s] = static_cast<int>(states.size());
            states.push_back(s);
        }
    }
    const std::size_t m = states.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const double fail = 1.0 - success[states[i]];
        for (const auto& [t, p] : q.row(states[i])) {
            if (index[t] >= 0) A(i, index[t]) = fail * p;
        }
    }
    const Eigen::MatrixXd IA = Eigen::MatrixXd::Identity(m, m) - A;
    const auto lu = IA.fullPivLu();

    // total collected mass must be one from every active state, otherwise
    // the failure mass is trapped and X_R has no finite moments
    Eigen::VectorXd c(m);
    for (std::size_t i = 0; i < m; ++i) c(i) = success[states[i]];
    const Eigen::VectorXd tau = lu.solve(c);
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(tau(i)) || std::abs(tau(i) - 1.0) > 1e-8) {
            throw numeric_error(
                "reservation-period recursion does not terminate (absorbing "
                "failure states)");
        }
    }

    const Eigen::VectorXd mu = lu.solve(Eigen::VectorXd::Ones(m));
    const Eigen::VectorXd y = lu.solve(mu);
    const Eigen::VectorXd m2 = y + A * y;

    Moments out;
    for (std::size_t i = 0; i < m; ++i) {
        out.m1 += weights[states[i]] * mu(i);
        out.m2 += weights[states[i]] * m2(i);
    }
    return out;
}

} // namespace

Moments xr_moments_exact(const TransitionMatrix& q, const CombinedSpace& space,
                         const std::vector<double>& success,
                         const std::vector<double>& weights) {
    (void)space;
    return failure_chain_moments(q, success, weights);
}

XrApproximations xr_moment_approximations(const std::vector<double>& pi,
                                          const CombinedSpace& space,
                                          const SystemParams& params,
                                          double tail_tol) {
    const std::vector<double> w = competitor_weights(pi, space);
    const int N = params.n_nodes();
    const int smax = params.s_max();
    const double deflate =
        params.protocol() == Protocol::Switching ? 1.0 - params.p_c() : 1.0;
    const double no_term = termination_prob(smax, 0, params);

    XrApproximations out;
    std::vector<double> g_weight(N + 1, 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const CombinedState& s = space.states()[i];
        if (w[i] == 0.0) continue;
        g_weight[s.g] += w[i];
        if (s.k == smax) out.h_smax += w[i];
        out.g_bar += w[i] * static_cast<double>(s.g);
    }

    auto blended_rate = [&](double g) {
        // marked-node success share p (1-p)^(g-1) chi, deflated at the
        // all-busy boundary
        const double psm =
            params.p() * std::pow(1.0 - params.p(), g - 1.0) * params.chi();
        return ((1.0 - out.h_smax) * psm + out.h_smax * psm * (1.0 - no_term)) *
               deflate;
    };

    std::vector<double> mix_weights;
    std::vector<DiscretePmf> mix_parts;
    Moments mix_m;
    for (int g = 1; g <= N; ++g) {
        if (g_weight[g] == 0.0) continue;
        const double rate = blended_rate(static_cast<double>(g));
        if (rate <= 0.0) {
            throw numeric_error("xr approximation: zero success rate at g=" +
                                std::to_string(g));
        }
        mix_weights.push_back(g_weight[g]);
        mix_parts.push_back(DiscretePmf::geometric(rate, tail_tol));
        mix_m.m1 += g_weight[g] / rate;
        mix_m.m2 += g_weight[g] * (2.0 - rate) / (rate * rate);
    }
    std::vector<const DiscretePmf*> part_ptrs;
    for (const auto& pmf : mix_parts) part_ptrs.push_back(&pmf);
    out.mixture = DiscretePmf::mixture(mix_weights, part_ptrs);
    out.mixture_moments = mix_m;

    const double avg_rate = blended_rate(out.g_bar);
    if (avg_rate <= 0.0) {
        throw numeric_error("xr approximation: zero success rate at g-bar");
    }
    out.average = DiscretePmf::geometric(avg_rate, tail_tol);
    out.average_moments = Moments{1.0 / avg_rate,
                                  (2.0 - avg_rate) / (avg_rate * avg_rate)};
    return out;
}

TransitionMatrix build_reduced_transitions(double p0, const SystemParams& base,
                                           bool marked) {
    const SystemParams params = base.with_protocol(Protocol::Buffering);
    const int N = params.n_nodes();
    const int smax = params.s_max();
    const double pm = params.p() * (1.0 - p0);

    auto s1_of = [&](int k) {
        const int idle = N - k - (marked ? 1 : 0);
        if (idle <= 0) return 0.0;
        return static_cast<double>(idle) * pm *
               std::pow(1.0 - pm, static_cast<double>(N - k - 1)) * params.chi();
    };

    TransitionMatrix P(smax + 1);
    for (int k = 0; k <= smax; ++k) {
        const double s1 = s1_of(k);
        for (int z = 0; z <= std::min(k + 1, smax); ++z) {
            double prob;
            if (z == k + 1) {
                prob = termination_prob(k, 0, params) * s1;
            } else if (z == k && k == smax) {
                prob = termination_prob(k, 1, params) * s1 +
                       termination_prob(k, 0, params);
            } else {
                prob = termination_prob(k, k - z, params) * (1.0 - s1) +
                       termination_prob(k, k - z + 1, params) * s1;
            }
            if (prob > 0.0) P.add(k, z, prob);
        }
    }
    P.check_stochastic("reduced matrix");
    return P;
}

Moments xr_moments_reduced(double p0, const SystemParams& base) {
    const SystemParams params = base.with_protocol(Protocol::Buffering);
    const int N = params.n_nodes();
    const int smax = params.s_max();
    const double pm = params.p() * (1.0 - p0);

    const TransitionMatrix P = build_reduced_transitions(p0, params, false);
    const std::vector<double> pi = steady_state(P);

    // the marked node occupies one idle slot, so states without idle nodes
    // are excluded from the unconditioning
    std::vector<double> weights(smax + 1, 0.0);
    double total = 0.0;
    for (int k = 0; k <= smax && k < N; ++k) total += pi[k];
    if (total < 1e-14) {
        throw numeric_error("degenerate scenario: reduced chain has no idle mass");
    }
    for (int k = 0; k <= smax && k < N; ++k) weights[k] = pi[k] / total;

    std::vector<double> success(smax + 1, 0.0);
    for (int k = 0; k <= smax && k < N; ++k) {
        success[k] = params.p() *
                     std::pow(1.0 - pm, static_cast<double>(N - k - 1)) *
                     params.chi();
        if (k == smax) success[k] *= 1.0 - termination_prob(k, 0, params);
    }
    const TransitionMatrix Q = build_reduced_transitions(p0, params, true);
    return failure_chain_moments(Q, success, weights);
}

CombinedSolution solve_combined(Protocol protocol, const SystemParams& base,
                                XrMethod method) {
    const SystemParams params = base.with_protocol(protocol);
    if (method == XrMethod::Reduced && protocol != Protocol::Buffering) {
        throw validation_error("method",
                               "the reduced chain applies to buffering only");
    }
    const CombinedSpace space(params);

    auto xr_at = [&](double p0) -> Moments {
        switch (method) {
            case XrMethod::ExactRecursion: {
                const TransitionMatrix P = build_transitions(protocol, p0, params);
                const std::vector<double> pi = steady_state(P);
                const std::vector<double> w = competitor_weights(pi, space);
                const TransitionMatrix Q =
                    build_marked_transitions(protocol, p0, params);
                const std::vector<double> succ =
                    marked_success_vector(protocol, space, params);
                return xr_moments_exact(Q, space, succ, w);
            }
            case XrMethod::Mixture:
            case XrMethod::Average: {
                const TransitionMatrix P = build_transitions(protocol, p0, params);
                const std::vector<double> pi = steady_state(P);
                const XrApproximations ap =
                    xr_moment_approximations(pi, space, params);
                return method == XrMethod::Mixture ? ap.mixture_moments
                                                   : ap.average_moments;
            }
            case XrMethod::Reduced: return xr_moments_reduced(p0, params);
        }
        throw numeric_error("unknown XrMethod");
    };

    CombinedSolution sol;
    // initialize from the single-competitor lower bound on X_R
    const double r0 = protocol == Protocol::Buffering
                          ? params.p() * params.chi()
                          : params.p() * params.chi() * (1.0 - params.p_c());
    if (r0 <= 0.0) throw numeric_error("solve_combined: zero access rate");
    Moments xr{1.0 / r0, (2.0 - r0) / (r0 * r0)};
    ServiceMoments sm = service_moments(protocol, xr, params);
    double p0 = std::clamp(1.0 - params.lambda() * sm.x1, 0.0, 1.0);

    constexpr int kMaxIters = 500;
    constexpr double kTol = 1e-8;
    bool converged = false;
    int it = 0;
    for (; it < kMaxIters; ++it) {
        try {
            xr = xr_at(p0);
        } catch (const numeric_error&) {
            // the recursion diverges near or past the stability boundary;
            // report a non-converged result instead of failing
            break;
        }
        sm = service_moments(protocol, xr, params);
        const double target =
            std::clamp(1.0 - params.lambda() * sm.x1, 0.0, 1.0);
        const double residual = std::abs(target - p0);
        p0 += 0.5 * (target - p0);
        if (residual < kTol) {
            converged = true;
            break;
        }
    }

    sol.fixed_point.p0 = p0;
    sol.fixed_point.iterations = it + 1;
    sol.fixed_point.converged = converged;
    sol.fixed_point.rho = params.lambda() * sm.x1;
    sol.xr = xr;
    sol.service = sm;
    sol.stable = converged && sol.fixed_point.rho < 1.0;
    if (sol.stable) {
        sol.mean_system_time = geom_g1_delay(params.lambda(), sm);
    }
    return sol;
}

} // namespace osaq
