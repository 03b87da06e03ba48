#pragma once

#include <cstddef>
#include <vector>

namespace osaq {

// First and second raw moment of a non-negative random variable, in slots.
struct Moments {
    double m1 = 0.0;
    double m2 = 0.0;

    double variance() const noexcept { return m2 - m1 * m1; }
};

// Probability mass function over the non-negative integers with explicit
// truncation bookkeeping. mass(i) is Pr(value == i); tail_mass() is the
// residual probability beyond the stored support, so callers can bound the
// error of truncated moments.
class DiscretePmf {
public:
    static constexpr double kNormTol = 1e-12;
    static constexpr std::size_t kMaxSupport = 1'000'000;

    DiscretePmf() : tail_mass_(1.0) {}

    // Throws numeric_error unless every mass is in [0,1] and
    // sum + tail_mass == 1 within kNormTol.
    DiscretePmf(std::vector<double> probs, double tail_mass);

    double mass(std::size_t i) const noexcept {
        return i < probs_.size() ? probs_[i] : 0.0;
    }
    std::size_t support_size() const noexcept { return probs_.size(); }
    double tail_mass() const noexcept { return tail_mass_; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    // Moments over the truncated support only.
    Moments moments() const noexcept;
    double mean() const noexcept { return moments().m1; }

    // Point mass at value v.
    static DiscretePmf degenerate(std::size_t v);

    // Geometric on {1,2,...} with per-trial success probability `rate`,
    // extended until the residual mass drops below tail_tol (or kMaxSupport).
    static DiscretePmf geometric(double rate, double tail_tol = 1e-8);

    // Convex combination sum_i w[i] * parts[i]. Weights must sum to 1
    // within kNormTol.
    static DiscretePmf mixture(const std::vector<double>& weights,
                               const std::vector<const DiscretePmf*>& parts);

private:
    std::vector<double> probs_;
    double tail_mass_;
};

} // namespace osaq
