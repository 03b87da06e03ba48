#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace osaq {

// Row-stochastic transition matrix stored as sparse rows. State labels are
// kept by the builders; here a state is just its row/column index.
class TransitionMatrix {
public:
    static constexpr double kRowSumTol = 1e-10;

    using Entry = std::pair<std::size_t, double>; // (column, probability)

    explicit TransitionMatrix(std::size_t n) : rows_(n) {}

    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<Entry>& row(std::size_t i) const { return rows_[i]; }

    void add(std::size_t from, std::size_t to, double prob);

    double at(std::size_t from, std::size_t to) const noexcept;
    double row_sum(std::size_t i) const noexcept;

    // Throws numeric_error if any row sum deviates from 1 by more than
    // kRowSumTol or any entry is negative.
    void check_stochastic(const char* what) const;

    // Plain-text sparse triples, one "row col prob" per line.
    void dump(std::ostream& os) const;

private:
    std::vector<std::vector<Entry>> rows_;
};

// Stationary distribution pi with pi P = pi, sum(pi) = 1. Requires a unique
// closed communicating class; throws numeric_error otherwise (reducible
// chain) or on solver failure. Dense LU solve for small chains, power
// iteration above `dense_limit` states.
std::vector<double> steady_state(const TransitionMatrix& P,
                                 std::size_t dense_limit = 2000);

} // namespace osaq
