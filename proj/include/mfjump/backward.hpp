#pragma once

#include <vector>

#include "mfjump/forward.hpp"

namespace mfjump {

struct BackwardMeanSolution {
    std::vector<double> ybar;      // E[y_t] at template nodes (right values)
    std::vector<double> ybar_left; // left limits (differ only at impulse nodes)
    double y0 = 0.0;               // = ybar(0); deterministic by F_0 triviality
    double ci_half_width = 0.0;    // CI of the terminal-mean estimator

    double at(double t, const TimeGrid& grid) const;
    double at_left(double t, const TimeGrid& grid) const;
};

// Mean trajectory of the backward state for affine drivers
//   g = g0(t,x,m,u,e) + Fy y + Fybar ybar + Kz (z - zbar).
// Expectations kill the martingale integrals and the (z - zbar) term, leaving
// the linear ODE d ybar = -[ E[g0] + (Fy + Fybar) ybar ] lambda-weighted dt
// plus mean impulse jumps, ybar(T) = mean of h(x_T, m_T); integrated by
// backward RK4 on the node grid (E[g0] tabulated from the ensemble, linearly
// interpolated at interior stages).
BackwardMeanSolution solve_mean(const GeneralSpec& spec, const PathEnsemble& ens,
                                const ControlLaw& law, const ImpulseValues& imp);

struct Y0Estimate {
    double y0 = 0.0;
    double ci = 0.0; // 3 sigma / sqrt(M)
};

// backward RK4 of d ybar/dt = -(a(t) + kappa(t) ybar) from ybar(T) = terminal,
// a linearly interpolated between nodes, with the impulse mean jump at node k
// subtracted when crossing it (y_left = y - jump). Returns right/left curves.
struct MeanCurvePair {
    std::vector<double> right, left;
};
MeanCurvePair backward_mean_from_tabulated(const TimeGrid& grid, const std::vector<double>& a_nodes,
                                           const std::function<double(double)>& kappa,
                                           double terminal,
                                           const std::vector<double>& imp_mean_nodes);

// Monte Carlo average of the pathwise representation
//   y_0 = E[ y_T + int int g lambda dt - int H d eta ].
// Driver y-dependence, when declared affine, is folded through the solved
// mean curve (pass solved = nullptr for drivers independent of y).
Y0Estimate y0_via_representation(const PathEnsemble& ens, const GeneralSpec& spec,
                                 const BackwardMeanSolution* solved = nullptr);

} // namespace mfjump
