#pragma once

#include "osaq/params.hpp"
#include "osaq/pmf.hpp"

namespace osaq {

// Service-time moments with the per-protocol components they were
// assembled from.
struct ServiceMoments {
    double x1 = 0.0; // E[X]
    double x2 = 0.0; // E[X^2]

    double xr1 = 0.0; // E[X_R]
    double xr2 = 0.0; // E[X_R^2]

    // buffering
    double xt1 = 0.0; // E[X_T]
    double xt2 = 0.0; // E[X_T^2]

    // switching
    double le1 = 0.0;  // E[L_e]
    double le2 = 0.0;  // E[L_e^2]
    double n1 = 0.0;   // E[n], interruptions per packet
    double n2 = 0.0;   // E[n^2]
    double len = 0.0;  // E[L_e n]
};

// Buffering transmission time X_T: geometric packet length thinned by the
// per-slot success probability q*psi. The pmf is assembled from the
// negative-binomial mixture conditioned on the packet length.
DiscretePmf xt_distribution(const SystemParams& params, double tail_tol = 1e-8);

// Closed-form moments E[X_T] = 1/(q psi), E[X_T^2] = (2-q psi)/(q psi)^2.
Moments xt_moments(const SystemParams& params);

// Interruption renewal quantities for the switching protocol.
struct RenewalMoments {
    double pr_le_le_au = 0.0; // Pr(L_e <= A_u)
    double n1 = 0.0;          // E[n]
    double n2 = 0.0;          // E[n^2]
    double len = 0.0;         // E[L_e n]
    double le1 = 0.0;         // E[L_e]
    double le2 = 0.0;         // E[L_e^2]
};

RenewalMoments renewal_moments(const SystemParams& params);

// Compose E[X], E[X^2] from the reservation-period moments.
//   buffering: X = X_R + X_T, independent components.
//   switching: X = L_e + (n+1) X_R with i.i.d. X_R independent of (L_e, n).
ServiceMoments service_moments(Protocol protocol, const Moments& xr,
                               const SystemParams& params);

// Mean system time of the late-arrival Geom/G/1 queue:
//   E[T] = E[X] + lambda (E[X^2] - E[X]) / (2 (1 - lambda E[X])).
// Throws instability_error when lambda * E[X] >= 1.
double geom_g1_delay(double lambda, const ServiceMoments& sm);

} // namespace osaq
