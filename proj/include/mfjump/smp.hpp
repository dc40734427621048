#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfjump/backward.hpp"
#include "mfjump/forward.hpp"
#include "mfjump/lq.hpp"
#include "mfjump/model.hpp"

namespace mfjump {
namespace smp {

// continuous-part Hamiltonian H = -q g + p b + theta sigma + l
double hamiltonian(const GeneralSpec& spec, double t, double x, double m, double y, double ybar,
                   double z, double zbar, double u, double p, double theta, double q,
                   const MarkAtom& e);

// dH/du; analytic when the spec carries derivative evaluators, otherwise
// central finite differences with relative step 1e-6
double hamiltonian_u(const GeneralSpec& spec, double t, double x, double m, double y, double ybar,
                     double z, double zbar, double u, double p, double theta, double q,
                     const MarkAtom& e);

// jump-part Hamiltonian Ht = p gamma + vartheta gamma + vartheta c + f,
// evaluated with left limits
double hamiltonian_jump(const GeneralSpec& spec, double t, double x_left, double m_left,
                        double ybar_left, double u, double p_left, double vartheta,
                        const MarkAtom& e);

double hamiltonian_jump_u(const GeneralSpec& spec, double t, double x_left, double m_left,
                          double ybar_left, double u, double p_left, double vartheta,
                          const MarkAtom& e);

// Deterministic adjoint curves of the LQ template: q from the closed form,
// p = Pi E[x_hat] + Sigma, theta = vartheta = 0 (the q-diffusion term
// K(q - E[q]) vanishes for deterministic q; the p-equation has a
// deterministic terminal value, so (p, 0, 0) solves it).
struct AdjointPaths {
    TimeGrid grid;
    std::vector<double> q;
    std::vector<double> p;
    bool theta_zero = true;
    bool vartheta_zero = true;
    std::string zero_tag; // justification for theta = vartheta = 0

    double q0_residual = 0.0; // |q(0) + phi0_y(y0_hat)|
    double pT_residual = 0.0; // |p(T) - (phi_x-part + mean twin - h_x q_T - mean twin)|

    std::vector<double> impulse_times;
    std::vector<double> impulse_eta;         // eta_hat_i = -q(tau) H(tau)
    std::vector<double> impulse_multipliers; // M_i = p G + q H + psi_eta(tau, eta_hat)

    double q_at(double t) const;
    double p_at(double t) const;
};

// throws InconsistentSolution when a terminal/initial residual exceeds 1e-6
AdjointPaths assemble_adjoints(const LQSpec& spec, double lambda_total,
                               const lq::RiccatiSolution& sol);

// adjoints of the jump-emphasis example: q = -1/2 and p = 2/(1 - 2a)
// constant, a = -(3/4) lambda(E)
AdjointPaths example2_adjoints(double lambda_total, const TimeGrid& grid);

struct PartReport {
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    long points = 0; // sampled (node, probe) pairs or events
    std::string note;
};

struct SMPReport {
    PartReport continuous; // Eq-(13)-style check at non-event nodes
    PartReport jump;       // Eq-(14)-style check at realized jump events
    PartReport impulse;    // |M_i| stationarity plus inequality over probes
    bool all_pass() const { return continuous.pass && jump.pass && impulse.pass; }
    std::string to_json() const;
    std::string to_text() const;
};

// Verifies the candidate law against the supplied (optimal) trajectory and
// adjoints. For unconstrained U the continuous/jump residuals are |H_u| and
// |Ht_u|; for an interval U the residual is the worst violation of
// H_u (V - u) >= 0 over the probe lattice. The continuous check never
// evaluates at realized jump events; the jump check evaluates only there.
SMPReport check_smp(const PathEnsemble& ens, const AdjointPaths& adj, const ControlLaw& law,
                    int probe_points, double tol,
                    const BackwardMeanSolution* ybar = nullptr);

struct DualityResult {
    double estimate = 0.0;    // MC estimate of the duality bracket II
    double std_error = 0.0;   // sigma_hat / sqrt(M) of the pathwise terms
    double ci4 = 0.0;         // 4 sigma / sqrt(M)
    double hamiltonian_form = 0.0; // same bracket through H_u/Ht_u/M_i
    int paths = 0;
    bool pass = false; // 0 within the 4-sigma interval of the estimate
};

// First-order cost bracket at finite differences between a base run (u_hat)
// and a perturbed run (u) on common random numbers; zero in expectation when
// the base law is stationary. Pathwise-y cost terms are folded through the
// mean curves of the two runs.
DualityResult duality_residual(const PathEnsemble& base, const PathEnsemble& pert,
                               const AdjointPaths& adj,
                               const BackwardMeanSolution& ybar_base,
                               const BackwardMeanSolution& ybar_pert);

// Replicates the bracket over independent seed batches. The mean-curve folds
// couple every path to the frozen Picard mean, a noise source a single-run
// per-path interval cannot see; across batches it varies, so the batch
// spread is an honest confidence width for the estimate.
DualityResult duality_residual_batched(const GeneralSpec& spec, const ControlLaw& law_hat,
                                       const ImpulseValues& imp_hat, const ControlLaw& law,
                                       const ImpulseValues& imp, const MarkSpace& ms,
                                       const SimConfig& cfg, const AdjointPaths& adj,
                                       int batches);

struct GradientCheckReport {
    std::vector<double> eps;
    std::vector<double> fd;      // J(u^eps, eta^eps) - J(u_hat, eta_hat)
    std::vector<double> jhat;    // analytic first-order term at each eps
    std::vector<double> abs_err; // |fd - jhat|
    double slope = 0.0;          // log-log decay of abs_err vs eps
    double derivative = 0.0;     // Jhat per unit eps (directional derivative)
    double derivative_ci = 0.0;
};

GradientCheckReport directional_derivative_check(const GeneralSpec& spec, const ControlLaw& law_hat,
                                                 const ImpulseValues& imp_hat,
                                                 const Direction& dir,
                                                 const std::vector<double>& eps_list,
                                                 const MarkSpace& ms, const SimConfig& cfg,
                                                 const AdjointPaths& adj);

struct VariationOrderReport {
    std::vector<double> eps;
    std::vector<double> diff_sup_sq;      // E[sup |x^eps - x_hat|^2]
    std::vector<double> remainder_sup_sq; // E[sup |x^eps - x_hat - x^1|^2]
    std::vector<double> remainder_ratio;  // remainder / (eps1^2 + eps2^2)
    double slope = 0.0;                   // fit of log diff vs log eps
    bool ratio_decreasing = false;
};

VariationOrderReport variation_order_check(const GeneralSpec& spec, const ControlLaw& law_hat,
                                           const ImpulseValues& imp_hat, const Direction& dir,
                                           const std::vector<double>& eps_list, const MarkSpace& ms,
                                           const SimConfig& cfg);

} // namespace smp
} // namespace mfjump
