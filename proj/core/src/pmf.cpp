#include "osaq/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osaq/errors.hpp"

namespace osaq {

DiscretePmf::DiscretePmf(std::vector<double> probs, double tail_mass)
    : probs_(std::move(probs)), tail_mass_(tail_mass) {
    double sum = tail_mass_;
    for (double m : probs_) {
        if (m < -kNormTol || m > 1.0 + kNormTol) {
            throw numeric_error("pmf mass " + std::to_string(m) +
                                " outside [0,1]");
        }
        sum += m;
    }
    if (tail_mass_ < -kNormTol) {
        throw numeric_error("negative pmf tail mass");
    }
    if (std::abs(sum - 1.0) > kNormTol * std::max<double>(1.0, probs_.size())) {
        throw numeric_error("pmf not normalized, sum=" + std::to_string(sum));
    }
}

Moments DiscretePmf::moments() const noexcept {
    Moments m;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double v = static_cast<double>(i);
        m.m1 += v * probs_[i];
        m.m2 += v * v * probs_[i];
    }
    return m;
}

DiscretePmf DiscretePmf::degenerate(std::size_t v) {
    std::vector<double> probs(v + 1, 0.0);
    probs[v] = 1.0;
    return DiscretePmf(std::move(probs), 0.0);
}

DiscretePmf DiscretePmf::geometric(double rate, double tail_tol) {
    if (rate <= 0.0 || rate > 1.0) {
        throw numeric_error("geometric rate " + std::to_string(rate) +
                            " outside (0,1]");
    }
    std::vector<double> probs;
    probs.push_back(0.0); // support starts at 1
    double residual = 1.0;
    while (residual > tail_tol && probs.size() < kMaxSupport) {
        const double m = rate * residual;
        probs.push_back(m);
        residual -= m;
    }
    return DiscretePmf(std::move(probs), residual);
}

DiscretePmf DiscretePmf::mixture(const std::vector<double>& weights,
                                 const std::vector<const DiscretePmf*>& parts) {
    if (weights.size() != parts.size() || parts.empty()) {
        throw numeric_error("mixture needs matching, non-empty weights/parts");
    }
    double wsum = 0.0;
    std::size_t len = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        wsum += weights[i];
        len = std::max(len, parts[i]->support_size());
    }
    if (std::abs(wsum - 1.0) > kNormTol * parts.size()) {
        throw numeric_error("mixture weights sum to " + std::to_string(wsum));
    }
    std::vector<double> probs(len, 0.0);
    double tail = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t v = 0; v < parts[i]->support_size(); ++v) {
            probs[v] += weights[i] * parts[i]->mass(v);
        }
        tail += weights[i] * parts[i]->tail_mass();
    }
    return DiscretePmf(std::move(probs), tail);
}

} // namespace osaq
