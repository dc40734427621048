#pragma once

#include "mfjump/backward.hpp"
#include "mfjump/forward.hpp"

namespace mfjump {
namespace cost {

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0; // sigma_hat / sqrt(M) of the per-path totals
    int paths = 0;

    // component means; mean == their sum exactly (bookkeeping identity)
    double lambda_term = 0.0;   // int int l lambda(de) dt
    double jump_term = 0.0;     // sum over realized events of f
    double terminal_term = 0.0; // phi(x_T, E[x_T])
    double initial_term = 0.0;  // phi0(y_0), deterministic, added once
    double impulse_term = 0.0;  // sum psi(tau_i, eta_i)
};

// Pathwise cost of the ensemble's own (law, impulses): l by left-point
// quadrature with the continuous-branch control, f summed at realized events
// with the jump-branch control. Pathwise-y terms of l and f are folded
// through the solved mean curve. Throws MissingY0 when phi0 is non-constant
// and no backward solution is supplied.
CostEstimate evaluate_cost(const PathEnsemble& ens, const BackwardMeanSolution* bwd = nullptr);

struct StructureComparison {
    double lambda_total = 0.0;
    CostEstimate prog, pred;
    double prog_closed = 0.0;
    double pred_closed = 0.0;
    double gap_closed = 0.0; // pred - prog, closed form
    double gap_mc = 0.0;     // paired estimate on common random numbers
    double gap_std_error = 0.0;
};

// Runs the jump-emphasis example under both optimal laws on common random
// numbers and compares Monte Carlo costs with the closed forms.
StructureComparison compare_structures(double lambda_total, const SimConfig& cfg);

} // namespace cost
} // namespace mfjump
