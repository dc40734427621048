#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mfjump/curve.hpp"
#include "mfjump/errors.hpp"
#include "mfjump/mark_space.hpp"

namespace mfjump {

// forward coefficient evaluator: (t, x, E[x], u, e) -> real
using Coeff = std::function<double(double t, double x, double m, double u, const MarkAtom& e)>;
// backward driver: (t, x, E[x], y, E[y], z, E[z], u, e) -> real
using DriverFn = std::function<double(double t, double x, double m, double y, double ybar,
                                      double z, double zbar, double u, const MarkAtom& e)>;
// running cost with pathwise y folded through its mean: (t, x, E[x], E[y], u, e) -> real
using CostFn = std::function<double(double t, double x, double m, double ybar, double u,
                                    const MarkAtom& e)>;

struct ImpulseSchedule {
    enum class Mode { None, DeterministicTimes, KthJumpTimes };
    Mode mode = Mode::None;
    std::vector<double> times;  // DeterministicTimes: strictly increasing epochs in (0,T)
    std::vector<int> indices;   // KthJumpTimes: strictly increasing k's (1-based)

    std::size_t count() const {
        return mode == Mode::DeterministicTimes ? times.size()
             : mode == Mode::KthJumpTimes      ? indices.size()
                                               : 0;
    }
    static ImpulseSchedule none() { return {}; }
    static ImpulseSchedule at_times(std::vector<double> ts);
    static ImpulseSchedule at_kth_jumps(std::vector<int> ks);
};

// eta_i bound at runtime: explicit values, or a rule eta_i = rule(i, tau_i)
struct ImpulseValues {
    std::vector<double> values;
    std::function<double(int i, double tau)> rule;

    bool has(std::size_t i) const {
        return (i < values.size()) || static_cast<bool>(rule);
    }
    double value(std::size_t i, double tau) const {
        if (i < values.size()) return values[i];
        if (rule) return rule(static_cast<int>(i), tau);
        return 0.0; // unbound epoch acts as a zero impulse
    }
    static ImpulseValues none() { return {}; }
    static ImpulseValues of(std::vector<double> v);
};

// Three-branch feedback control. cont is the nu-branch (continuous time),
// jump is the mu-branch (value on the jump graph, left-limit arguments).
struct ControlLaw {
    std::function<double(double t, double x, double m, const MarkAtom& e)> cont;
    std::function<double(double t, double x_left, double m_left, const MarkAtom& e)> jump;
    ImpulseValues impulses;
    double u_lo = -std::numeric_limits<double>::infinity();
    double u_hi = std::numeric_limits<double>::infinity();

    static ControlLaw constant(double u_cont, double u_jump);
    // predictable control: the jump-time value is the left limit of the
    // continuous branch, so both branches share one feedback function
    static ControlLaw predictable(std::function<double(double, double, double, const MarkAtom&)> f);
    static ControlLaw progressive(std::function<double(double, double, double, const MarkAtom&)> f_cont,
                                  std::function<double(double, double, double, const MarkAtom&)> f_jump);
};

// ---------------------------------------------------------------------------
// LQ problem of the general linear-quadratic template: all coefficients are
// deterministic curves, cost weights are the fixed quadratic shape
//   (1/2)u^2 under lambda(de)dt and N(dt,de), (delta/2)E[x_T]^2, (1/2)y_0^2,
//   (1/2) sum eta_i^2,  terminal coupling y_T = M x_T.
struct LQSpec {
    double T = 1.0;
    double x0 = 0.0;

    Curve A1, A2, A3, A4, A5, A6, A7;
    Curve B1, B2, B3, B4, B5, B6, B7;
    Curve C1, C2, C3, C4, C5;
    Curve F1, F2, F3;     // y-coefficients (driver F1; costs F2, F3)
    Curve Fb1, Fb2, Fb3;  // mean-y coefficients
    Curve K;              // z - E[z] driver loading

    double M = 0.0;     // terminal slope, y_T = M x_T
    double delta = 0.0; // terminal mean-cost weight, > 0 for the Riccati route

    Curve G, H; // impulse loadings (forward G d eta, backward H d eta)
    ImpulseSchedule impulses;
};

// ---------------------------------------------------------------------------
// General problem: coefficient evaluators plus optional analytic derivatives
// (finite differences are used where a derivative is not supplied).
struct GeneralSpec {
    double T = 1.0;
    double x0 = 0.0;
    double lipschitz_bound = 1.0; // declared L, diagnostics only

    Coeff b, sigma, gamma, c;
    bool diffusion_is_zero = false;

    // derivatives in (x, m, u); any may be empty
    Coeff b_x, b_m, b_u;
    Coeff sigma_x, sigma_m, sigma_u;
    Coeff gamma_x, gamma_m, gamma_u;
    Coeff c_x, c_m, c_u;

    DriverFn g;
    DriverFn g_u;
    // affine driver shape needed by the backward mean solver:
    //   g = g0(t,x,m,u,e) + Fy(t) y + Fybar(t) ybar + Kz(t) (z - zbar)
    bool driver_affine = false;
    Coeff g0;
    Coeff g0_x, g0_m, g0_u; // derivatives of the state part (optional)
    Curve Fy, Fybar, Kz;

    std::function<double(double xT, double mT)> h;   // terminal y_T = h(x_T, E[x_T])
    std::function<double(double xT, double mT)> h_x, h_m;

    CostFn l, f;
    CostFn l_x, l_m, l_yb, l_u;
    CostFn f_x, f_m, f_yb, f_u;
    std::function<double(double xT, double mT)> phi_T, phi_T_x, phi_T_m; // terminal cost
    std::function<double(double y0)> phi0, phi0_y;                       // initial cost
    bool phi0_depends_y0 = false;
    std::function<double(double tau, double eta)> psi, psi_eta;          // impulse cost

    Curve G, H;
    ImpulseSchedule impulses;

    double u_lo = -std::numeric_limits<double>::infinity();
    double u_hi = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
struct ValidationIssue {
    Errc code;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
    void throw_if_failed() const;
};

ValidationReport validate(const LQSpec& spec);
ValidationReport validate(const GeneralSpec& spec);
ValidationReport validate(const MarkSpace& ms);

// LQSpec lowered to evaluator form (analytic derivatives included)
GeneralSpec to_general(const LQSpec& spec);

// the general LQ template with user-supplied curves (defaults: all zero,
// delta = 1, T = 1)
LQSpec example1_spec();

// Jump-emphasis problem on [0,1]: b = u, sigma = 0, gamma = u, c = -u,
// g = u^2, y_1 = x_1^2, cost weights (1/2, 2, 1/2, 1/2), x_0 = 1,
// no impulse control. Returned with its optimal progressive and predictable
// feedback laws.
struct Example2 {
    GeneralSpec spec;
    ControlLaw progressive_optimal;
    ControlLaw predictable_optimal;
    double lambda_total = 1.0;
};
Example2 example2_spec(const MarkSpace& ms);

// Smooth non-linear testbed (bounded tanh/cos nonlinearities, analytic
// derivatives) used by the variation-order checks.
GeneralSpec nonlinear_demo_spec();

// convex blend u_hat + eps (v - u_hat), branch by branch
ControlLaw blend_law(const ControlLaw& hat, const ControlLaw& v, double eps);
ImpulseValues blend_impulses(const ImpulseValues& hat, const ImpulseValues& xi, double eps);

// JSON round-trip for LQ specs (curves serialized as constants or tables)
std::string lqspec_to_json(const LQSpec& spec);
LQSpec lqspec_from_json(const std::string& text);

} // namespace mfjump
