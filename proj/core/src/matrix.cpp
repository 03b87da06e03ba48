#include "osaq/matrix.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "osaq/errors.hpp"

namespace osaq {

void TransitionMatrix::add(std::size_t from, std::size_t to, double prob) {
    if (prob < 0.0) {
        throw numeric_error("TransitionMatrix: negative probability at (" +
                            std::to_string(from) + "," + std::to_string(to) +
                            ")");
    }
    if (prob == 0.0) return;
    auto& row = rows_[from];
    for (auto& [col, p] : row) {
        if (col == to) {
            p += prob;
            return;
        }
    }
    row.emplace_back(to, prob);
}

double TransitionMatrix::at(std::size_t from, std::size_t to) const noexcept {
    for (const auto& [col, p] : rows_[from]) {
        if (col == to) return p;
    }
    return 0.0;
}

double TransitionMatrix::row_sum(std::size_t i) const noexcept {
    double s = 0.0;
    for (const auto& [col, p] : rows_[i]) s += p;
    return s;
}

void TransitionMatrix::check_stochastic(const char* what) const {
    for (std::size_t i = 0; i < size(); ++i) {
        for (const auto& [col, p] : rows_[i]) {
            if (p < 0.0) {
                throw numeric_error(std::string(what) + ": negative entry in row " +
                                    std::to_string(i));
            }
        }
        const double s = row_sum(i);
        if (std::abs(s - 1.0) > kRowSumTol) {
            throw numeric_error(std::string(what) + ": row " + std::to_string(i) +
                                " sums to " + std::to_string(s));
        }
    }
}

void TransitionMatrix::dump(std::ostream& os) const {
    for (std::size_t i = 0; i < size(); ++i) {
        // sorted by column for a reproducible layout
        auto row = rows_[i];
        std::sort(row.begin(), row.end());
        for (const auto& [col, p] : row) {
            os << i << ' ' << col << ' ' << p << '\n';
        }
    }
}

namespace {

// Kosaraju strongly connected components over positive transitions.
std::vector<int> scc_components(const TransitionMatrix& P, int& n_comp) {
    const std::size_t n = P.size();
    std::vector<std::vector<std::size_t>> rev(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, p] : P.row(i)) {
            if (p > 0.0) rev[j].push_back(i);
        }
    }

    std::vector<char> seen(n, 0);
    std::vector<std::size_t> order;
    order.reserve(n);
    // iterative DFS on forward edges, post-order
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        seen[s] = 1;
        stack.emplace_back(s, 0);
        while (!stack.empty()) {
            auto& [v, idx] = stack.back();
            if (idx < P.row(v).size()) {
                const std::size_t w = P.row(v)[idx].first;
                ++idx;
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.emplace_back(w, 0);
                }
            } else {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(n, -1);
    n_comp = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[*it] >= 0) continue;
        std::vector<std::size_t> dfs{*it};
        comp[*it] = n_comp;
        while (!dfs.empty()) {
            const std::size_t v = dfs.back();
            dfs.pop_back();
            for (std::size_t w : rev[v]) {
                if (comp[w] < 0) {
                    comp[w] = n_comp;
                    dfs.push_back(w);
                }
            }
        }
        ++n_comp;
    }
    return comp;
}

std::vector<double> solve_dense(const TransitionMatrix& P,
                                const std::vector<std::size_t>& states) {
    const std::size_t m = states.size();
    std::vector<int> index(P.size(), -1);
    for (std::size_t i = 0; i < m; ++i) index[states[i]] = static_cast<int>(i);

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& [j, p] : P.row(states[i])) {
            if (index[j] >= 0) A(index[j], i) += p;
        }
        A(i, i) -= 1.0;
    }
    A.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;

    Eigen::VectorXd pi = A.fullPivLu().solve(b);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = pi(i);
    return out;
}

std::vector<double> solve_power(const TransitionMatrix& P,
                                const std::vector<std::size_t>& states) {
    const std::size_t m = states.size();
    std::vector<int> index(P.size(), -1);
    for (std::size_t i = 0; i < m; ++i) index[states[i]] = static_cast<int>(i);

    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    constexpr double kResidualTol = 1e-12;
    constexpr long kMaxIters = 1'000'000;
    for (long it = 0; it < kMaxIters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (const auto& [j, p] : P.row(states[i])) {
                if (index[j] >= 0) next[index[j]] += pi[i] * p;
            }
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            diff = std::max(diff, std::abs(next[i] - pi[i]));
        }
        pi.swap(next);
        if (diff < kResidualTol) return pi;
    }
    throw numeric_error("steady_state: power iteration did not converge");
}

} // namespace

std::vector<double> steady_state(const TransitionMatrix& P,
                                 std::size_t dense_limit) {
    const std::size_t n = P.size();
    if (n == 0) throw numeric_error("steady_state: empty matrix");
    P.check_stochastic("steady_state input");

    int n_comp = 0;
    const std::vector<int> comp = scc_components(P, n_comp);

    // a component is closed if it has no edge leaving it
    std::vector<char> closed(n_comp, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, p] : P.row(i)) {
            if (p > 0.0 && comp[j] != comp[i]) closed[comp[i]] = 0;
        }
    }
    int closed_comp = -1;
    for (int c = 0; c < n_comp; ++c) {
        if (closed[c]) {
            if (closed_comp >= 0) {
                throw numeric_error(
                    "steady_state: reducible chain with multiple closed classes");
            }
            closed_comp = c;
        }
    }
    if (closed_comp < 0) {
        throw numeric_error("steady_state: no closed class found");
    }

    std::vector<std::size_t> states;
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] == closed_comp) states.push_back(i);
    }

    std::vector<double> restricted = states.size() <= dense_limit
                                         ? solve_dense(P, states)
                                         : solve_power(P, states);

    std::vector<double> pi(n, 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        pi[states[i]] = std::max(0.0, restricted[i]);
    }
    double sum = 0.0;
    for (double v : pi) sum += v;
    if (!(sum > 0.0)) throw numeric_error("steady_state: degenerate solution");
    for (double& v : pi) v /= sum;

    // residual ||pi P - pi||_inf
    std::vector<double> piP(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (pi[i] == 0.0) continue;
        for (const auto& [j, p] : P.row(i)) piP[j] += pi[i] * p;
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        residual = std::max(residual, std::abs(piP[i] - pi[i]));
    }
    if (residual > 1e-10) {
        throw numeric_error("steady_state: residual " + std::to_string(residual) +
                            " above tolerance");
    }
    return pi;
}

} // namespace osaq
