#pragma once

#include <vector>

#include "mfjump/model.hpp"
#include "mfjump/quadrature.hpp"
#include "mfjump/time_grid.hpp"

namespace mfjump {
namespace lq {

// Closed-form solution data for the LQ template, all tabulated on one grid.
struct RiccatiSolution {
    TimeGrid grid;
    std::vector<double> Pi;    // Riccati curve, Pi(T) = delta
    std::vector<double> Sigma; // offset curve, Sigma(T) = -M q(T)
    std::vector<double> q;     // backward-adjoint curve, q(0) = -y0_hat
    std::vector<double> mean;  // closed-loop E[x_hat] under the optimal feedback
    std::vector<double> ybar;  // closed-loop E[y_hat]
    double y0_hat = 0.0;
    double fixed_point_residual = 0.0;
    int fixed_point_iterations = 0;

    double Pi_at(double t) const;
    double Sigma_at(double t) const;
    double q_at(double t) const;
    double mean_at(double t) const;
    double p_at(double t) const { return Pi_at(t) * mean_at(t) + Sigma_at(t); }
};

// q_t = -y0_hat e^{int_0^t (F1+Fb1) lam ds}
//       - int_0^t (F2+Fb2+F3+Fb3)(s) e^{int_s^t (F1+Fb1) lam dr} ds
std::vector<double> q_closed_form(const LQSpec& spec, double lambda_total, double y0_hat,
                                  const TimeGrid& grid);

// RK4 route for the same ODE dq/dt = lam[(F1+Fb1) q - (F2+Fb2+F3+Fb3)]
std::vector<double> q_rk4(const LQSpec& spec, double lambda_total, double y0_hat,
                          const TimeGrid& grid);

// Pi_t = 1 / ( delta^{-1} e^{-2 int_t^T pi lam}
//              + int_t^T lam (C1^2+C3^2)(s) e^{-2 int_t^s pi lam dr} ds ),
// pi = A1+A3+B1+B3; requires delta > 0
std::vector<double> solve_riccati(const LQSpec& spec, double lambda_total, const TimeGrid& grid);

// RK4 route for Pi' + 2 lam pi Pi - lam (C1^2+C3^2) Pi^2 = 0, Pi(T) = delta
std::vector<double> riccati_rk4(const LQSpec& spec, double lambda_total, const TimeGrid& grid);

// Sigma' + [pi - (C1^2+C3^2) Pi] lam Sigma + lam (Pi C1 C5 q + Delta) = 0,
// Sigma(T) = -M q(T), Delta = A6+A7+B6+B7 - q (A5+B5); closed form by
// quadrature of the integrating-factor representation
std::vector<double> solve_sigma(const LQSpec& spec, double lambda_total,
                                const std::vector<double>& q, const std::vector<double>& Pi,
                                const TimeGrid& grid);

std::vector<double> sigma_rk4(const LQSpec& spec, double lambda_total,
                              const std::vector<double>& q, const std::vector<double>& Pi,
                              const TimeGrid& grid);

// Closed-loop mean ODE under the optimal feedback,
//   dm/dt = lam [ pi m + C1 u_cont + C3 u_jump ],
//   u_cont = C5 q - C1 (Pi m + Sigma),  u_jump = -C3 (Pi m + Sigma),
// plus G(tau) eta_hat jumps at deterministic impulse epochs.
std::vector<double> closed_loop_mean(const LQSpec& spec, double lambda_total,
                                     const std::vector<double>& q, const std::vector<double>& Pi,
                                     const std::vector<double>& Sigma, const TimeGrid& grid);

// Feedback law built from a completed solution:
//   continuous branch u = C5 q - C1 Pi m - C1 Sigma   (nu-branch)
//   jump branch       u = -C3 Pi m - C3 Sigma         (mu-branch)
//   impulses          eta_i = -q(tau_i) H(tau_i)
// The mean entering the feedback is the solved closed-loop curve, not the
// runtime ensemble estimate.
ControlLaw optimal_feedback(const LQSpec& spec, const RiccatiSolution& sol);

// one application of the circular map: build the closed loop from y0_hat and
// return the y0 it produces
double y0_map(const LQSpec& spec, double lambda_total, const TimeGrid& grid, double y0_hat);

struct FixedPointOptions {
    double rho = 0.5;    // damping
    double tol = 1e-8;
    int max_iter = 200;
};

// Damped iteration closing the circular dependency q(0) = -y0_hat vs
// y0_hat = y0(closed loop under the feedback built from y0_hat).
RiccatiSolution fixed_point_y0(const LQSpec& spec, double lambda_total, const TimeGrid& grid,
                               const FixedPointOptions& opts = {});

// Exact curves and costs of the jump-emphasis example:
//   Ptilde_t = 2/(2at - 2a + 1), a = -(3/4) lambda(E);  Qtilde_t = 6/(4(1-t)lam + 3);
//   J_prog = 2/(3 lam + 2);  J_pred = 3/(4 lam + 3);
//   progressive closed loop dX = a Ptilde X dt, X_0 = 1; p = Ptilde X.
struct Example2Curves {
    TimeGrid grid;
    std::vector<double> Ptilde;
    std::vector<double> Qtilde;
    std::vector<double> X_prog; // progressive closed-loop mean state
    std::vector<double> X_pred; // predictable closed-loop state
    std::vector<double> p;      // Ptilde * X_prog
    double J_prog = 0.0;
    double J_pred = 0.0;
    double a = 0.0;
};

Example2Curves example2_curves(double lambda_total, const TimeGrid& grid);

inline double example2_cost_progressive(double lambda_total) {
    return 2.0 / (3.0 * lambda_total + 2.0);
}
inline double example2_cost_predictable(double lambda_total) {
    return 3.0 / (4.0 * lambda_total + 3.0);
}

} // namespace lq
} // namespace mfjump
