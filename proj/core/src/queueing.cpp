#include "osaq/queueing.hpp"

#include <cmath>
#include <vector>

#include "osaq/errors.hpp"

namespace osaq {

DiscretePmf xt_distribution(const SystemParams& params, double tail_tol) {
    const double psi = params.psi();
    const double q = params.q();
    if (q * psi <= 0.0) {
        throw numeric_error("xt_distribution: q*psi = 0, service never completes");
    }

    std::vector<double> probs{0.0}; // X_T >= 1
    double residual = 1.0;
    while (residual > tail_tol && probs.size() < DiscretePmf::kMaxSupport) {
        const std::size_t k = probs.size();
        double mass;
        if (psi >= 1.0) {
            // every slot on the channel succeeds; X_T equals the packet length
            mass = q * std::pow(1.0 - q, static_cast<double>(k - 1));
        } else {
            // sum over the packet length n: C(k-1,n-1) psi^n (1-psi)^(k-n)
            // times the geometric length mass (1-q)^(n-1) q
            double term =
                q * psi * std::pow(1.0 - psi, static_cast<double>(k - 1));
            mass = term;
            const double ratio = psi * (1.0 - q) / (1.0 - psi);
            for (std::size_t n = 1; n < k; ++n) {
                term *= ratio * static_cast<double>(k - n) / static_cast<double>(n);
                mass += term;
            }
        }
        probs.push_back(mass);
        residual -= mass;
    }
    if (residual > tail_tol) {
        throw numeric_error("xt_distribution: support cap reached before tail "
                            "tolerance");
    }
    return DiscretePmf(std::move(probs), residual);
}

Moments xt_moments(const SystemParams& params) {
    const double qpsi = params.q() * params.psi();
    if (qpsi <= 0.0) {
        throw numeric_error("xt_moments: q*psi = 0, service never completes");
    }
    return Moments{1.0 / qpsi, (2.0 - qpsi) / (qpsi * qpsi)};
}

RenewalMoments renewal_moments(const SystemParams& params) {
    const double qe = params.q() * params.eta();
    const double pc = params.p_c();
    if (qe <= 0.0) {
        throw numeric_error("renewal_moments: q*eta = 0");
    }
    RenewalMoments r;
    r.pr_le_le_au = qe / (1.0 - (1.0 - qe) * (1.0 - pc));
    r.n1 = pc * (1.0 - qe) / qe;
    const double P = r.pr_le_le_au;
    r.n2 = r.n1 * r.n1 + (1.0 - P) / (P * P);
    r.len = 2.0 * pc * (1.0 - qe) / (qe * qe);
    r.le1 = 1.0 / qe;
    r.le2 = (2.0 - qe) / (qe * qe);
    return r;
}

ServiceMoments service_moments(Protocol protocol, const Moments& xr,
                               const SystemParams& params) {
    ServiceMoments sm;
    sm.xr1 = xr.m1;
    sm.xr2 = xr.m2;
    if (protocol == Protocol::Buffering) {
        const Moments xt = xt_moments(params);
        sm.xt1 = xt.m1;
        sm.xt2 = xt.m2;
        sm.x1 = xr.m1 + xt.m1;
        sm.x2 = xr.m2 + 2.0 * xr.m1 * xt.m1 + xt.m2;
    } else {
        const RenewalMoments r = renewal_moments(params);
        sm.le1 = r.le1;
        sm.le2 = r.le2;
        sm.n1 = r.n1;
        sm.n2 = r.n2;
        sm.len = r.len;
        const double m1 = r.n1 + 1.0;              // E[m], reservations per packet
        const double m2 = r.n2 + 2.0 * r.n1 + 1.0; // E[m^2]
        const double var_xr = xr.m2 - xr.m1 * xr.m1;
        sm.x1 = r.le1 + m1 * xr.m1;
        // X = L_e + sum of m i.i.d. reservation periods; m and L_e are
        // dependent, the cross term uses E[L_e n].
        sm.x2 = r.le2 + 2.0 * xr.m1 * (r.len + r.le1) + m1 * var_xr +
                m2 * xr.m1 * xr.m1;
    }
    return sm;
}

double geom_g1_delay(double lambda, const ServiceMoments& sm) {
    const double rho = lambda * sm.x1;
    if (rho >= 1.0) throw instability_error(rho);
    if (lambda <= 0.0) return sm.x1;
    return sm.x1 + lambda * (sm.x2 - sm.x1) / (2.0 * (1.0 - rho));
}

} // namespace osaq
