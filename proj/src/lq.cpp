#include "mfjump/lq.hpp"

#include <cmath>
#include <memory>

#include "mfjump/errors.hpp"

namespace mfjump {
namespace lq {

namespace {

// cumulative Simpson with values at nodes and at interval midpoints
struct Cum {
    std::vector<double> node;
    std::vector<double> mid;
};

Cum cum_with_mid(const ScalarFn& f, const TimeGrid& grid) {
    Cum c;
    const std::size_t n = grid.size();
    c.node.assign(n, 0.0);
    c.mid.assign(n > 0 ? n - 1 : 0, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = grid.node(k);
        const double b = grid.node(k + 1);
        const double m = 0.5 * (a + b);
        c.mid[k] = c.node[k] + (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
        c.node[k + 1] = c.node[k] + (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    }
    return c;
}

// cumulative Simpson of an integrand supplied at nodes and midpoints
std::vector<double> cum_tabulated(const std::vector<double>& at_node,
                                  const std::vector<double>& at_mid, const TimeGrid& grid) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        out[k + 1] = out[k] + grid.dt(k) / 6.0 * (at_node[k] + 4.0 * at_mid[k] + at_node[k + 1]);
    return out;
}

double pi_of(const LQSpec& s, double t) {
    return s.A1(t) + s.A3(t) + s.B1(t) + s.B3(t);
}

double c_sq(const LQSpec& s, double t) {
    const double c1 = s.C1(t), c3 = s.C3(t);
    return c1 * c1 + c3 * c3;
}

double delta_src(const LQSpec& s, double t, double q) {
    return s.A6(t) + s.A7(t) + s.B6(t) + s.B7(t) - q * (s.A5(t) + s.B5(t));
}

double f_sum(const LQSpec& s, double t) {
    return s.F2(t) + s.Fb2(t) + s.F3(t) + s.Fb3(t);
}

} // namespace

double RiccatiSolution::Pi_at(double t) const { return interp_table(grid.nodes(), Pi, t); }
double RiccatiSolution::Sigma_at(double t) const { return interp_table(grid.nodes(), Sigma, t); }
double RiccatiSolution::q_at(double t) const { return interp_table(grid.nodes(), q, t); }
double RiccatiSolution::mean_at(double t) const { return interp_table(grid.nodes(), mean, t); }

std::vector<double> q_closed_form(const LQSpec& spec, double lambda_total, double y0_hat,
                                  const TimeGrid& grid) {
    const double lam = lambda_total;
    auto gfun = [&](double t) { return (spec.F1(t) + spec.Fb1(t)) * lam; };
    const Cum G = cum_with_mid(gfun, grid);

    // like the q-ODE, the source carries the full mark mass lam
    const std::size_t n = grid.size();
    std::vector<double> w_node(n), w_mid(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        w_node[k] = lam * f_sum(spec, grid.node(k)) * std::exp(-G.node[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double tm = 0.5 * (grid.node(k) + grid.node(k + 1));
        w_mid[k] = lam * f_sum(spec, tm) * std::exp(-G.mid[k]);
    }
    const std::vector<double> W = cum_tabulated(w_node, w_mid, grid);

    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double E = std::exp(G.node[k]);
        q[k] = -y0_hat * E - E * W[k];
    }
    return q;
}

std::vector<double> q_rk4(const LQSpec& spec, double lambda_total, double y0_hat,
                          const TimeGrid& grid) {
    const double lam = lambda_total;
    return rk4_forward(
        [&](double t, double q) {
            return lam * ((spec.F1(t) + spec.Fb1(t)) * q - f_sum(spec, t));
        },
        -y0_hat, grid);
}

std::vector<double> solve_riccati(const LQSpec& spec, double lambda_total, const TimeGrid& grid) {
    if (!(spec.delta > 0.0))
        throw Error(Errc::DeltaNonPositive, "Riccati terminal condition needs delta > 0");
    const double lam = lambda_total;
    auto pfun = [&](double t) { return pi_of(spec, t) * lam; };
    const Cum P = cum_with_mid(pfun, grid);

    const std::size_t n = grid.size();
    std::vector<double> w_node(n), w_mid(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        w_node[k] = lam * c_sq(spec, grid.node(k)) * std::exp(-2.0 * P.node[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double tm = 0.5 * (grid.node(k) + grid.node(k + 1));
        w_mid[k] = lam * c_sq(spec, tm) * std::exp(-2.0 * P.mid[k]);
    }
    const std::vector<double> W = cum_tabulated(w_node, w_mid, grid);

    std::vector<double> Pi(n);
    const double PT = P.node[n - 1];
    const double WT = W[n - 1];
    for (std::size_t k = 0; k < n; ++k) {
        const double R = std::exp(-2.0 * (PT - P.node[k])) / spec.delta +
                         std::exp(2.0 * P.node[k]) * (WT - W[k]);
        Pi[k] = 1.0 / R;
    }
    Pi[n - 1] = spec.delta; // terminal condition holds exactly
    return Pi;
}

std::vector<double> riccati_rk4(const LQSpec& spec, double lambda_total, const TimeGrid& grid) {
    if (!(spec.delta > 0.0))
        throw Error(Errc::DeltaNonPositive, "Riccati terminal condition needs delta > 0");
    const double lam = lambda_total;
    return rk4_backward(
        [&](double t, double Pi) {
            return -2.0 * lam * pi_of(spec, t) * Pi + lam * c_sq(spec, t) * Pi * Pi;
        },
        spec.delta, grid);
}

std::vector<double> solve_sigma(const LQSpec& spec, double lambda_total,
                                const std::vector<double>& q, const std::vector<double>& Pi,
                                const TimeGrid& grid) {
    const double lam = lambda_total;
    const auto& nodes = grid.nodes();
    auto Pi_at = [&](double t) { return interp_table(nodes, Pi, t); };
    auto q_at = [&](double t) { return interp_table(nodes, q, t); };

    auto afun = [&](double t) { return (pi_of(spec, t) - c_sq(spec, t) * Pi_at(t)) * lam; };
    const Cum A = cum_with_mid(afun, grid);

    auto src = [&](double t) {
        return lam * (Pi_at(t) * spec.C1(t) * spec.C5(t) * q_at(t) + delta_src(spec, t, q_at(t)));
    };
    const std::size_t n = grid.size();
    std::vector<double> v_node(n), v_mid(n - 1);
    for (std::size_t k = 0; k < n; ++k) v_node[k] = src(nodes[k]) * std::exp(A.node[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double tm = 0.5 * (nodes[k] + nodes[k + 1]);
        v_mid[k] = src(tm) * std::exp(A.mid[k]);
    }
    const std::vector<double> V = cum_tabulated(v_node, v_mid, grid);

    const double SigmaT = -spec.M * q[n - 1];
    std::vector<double> Sigma(n);
    for (std::size_t k = 0; k < n; ++k)
        Sigma[k] = std::exp(-A.node[k]) *
                   (SigmaT * std::exp(A.node[n - 1]) + (V[n - 1] - V[k]));
    Sigma[n - 1] = SigmaT; // terminal condition holds exactly
    return Sigma;
}

std::vector<double> sigma_rk4(const LQSpec& spec, double lambda_total,
                              const std::vector<double>& q, const std::vector<double>& Pi,
                              const TimeGrid& grid) {
    const double lam = lambda_total;
    const auto& nodes = grid.nodes();
    auto Pi_at = [&](double t) { return interp_table(nodes, Pi, t); };
    auto q_at = [&](double t) { return interp_table(nodes, q, t); };
    const double SigmaT = -spec.M * q[grid.size() - 1];
    return rk4_backward(
        [&](double t, double S) {
            const double a = (pi_of(spec, t) - c_sq(spec, t) * Pi_at(t)) * lam;
            const double s = lam * (Pi_at(t) * spec.C1(t) * spec.C5(t) * q_at(t) +
                                    delta_src(spec, t, q_at(t)));
            return -(a * S + s);
        },
        SigmaT, grid);
}

std::vector<double> closed_loop_mean(const LQSpec& spec, double lambda_total,
                                     const std::vector<double>& q, const std::vector<double>& Pi,
                                     const std::vector<double>& Sigma, const TimeGrid& grid) {
    const double lam = lambda_total;
    const auto& nodes = grid.nodes();
    auto Pi_at = [&](double t) { return interp_table(nodes, Pi, t); };
    auto Sg_at = [&](double t) { return interp_table(nodes, Sigma, t); };
    auto q_at = [&](double t) { return interp_table(nodes, q, t); };

    auto rhs = [&](double t, double m) {
        const double p = Pi_at(t) * m + Sg_at(t);
        const double u_cont = spec.C5(t) * q_at(t) - spec.C1(t) * p;
        const double u_jump = -spec.C3(t) * p;
        return lam * (pi_of(spec, t) * m + spec.C1(t) * u_cont + spec.C3(t) * u_jump);
    };

    std::vector<double> m(grid.size());
    m[0] = spec.x0;
    std::size_t imp_next = 0;
    const auto& sch = spec.impulses;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = nodes[k];
        const double h = grid.dt(k);
        double mk = m[k];
        const double k1 = rhs(t, mk);
        const double k2 = rhs(t + 0.5 * h, mk + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, mk + 0.5 * h * k2);
        const double k4 = rhs(t + h, mk + h * k3);
        double next = mk + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        if (sch.mode == ImpulseSchedule::Mode::DeterministicTimes &&
            imp_next < sch.times.size() && std::fabs(nodes[k + 1] - sch.times[imp_next]) < 1e-9) {
            const double tau = sch.times[imp_next];
            const double eta = -q_at(tau) * spec.H(tau); // optimal impulse rule
            next += spec.G(tau) * eta;
            ++imp_next;
        }
        m[k + 1] = next;
    }
    return m;
}

ControlLaw optimal_feedback(const LQSpec& spec, const RiccatiSolution& sol) {
    auto s = std::make_shared<RiccatiSolution>(sol);
    const Curve C1 = spec.C1, C3 = spec.C3, C5 = spec.C5, H = spec.H;

    ControlLaw law;
    law.cont = [s, C1, C5](double t, double, double, const MarkAtom&) {
        const double p = s->Pi_at(t) * s->mean_at(t) + s->Sigma_at(t);
        return C5(t) * s->q_at(t) - C1(t) * p;
    };
    law.jump = [s, C3](double t, double, double, const MarkAtom&) {
        const double p = s->Pi_at(t) * s->mean_at(t) + s->Sigma_at(t);
        return -C3(t) * p;
    };
    law.impulses.rule = [s, H](int, double tau) { return -s->q_at(tau) * H(tau); };
    return law;
}

namespace {

// exact backward mean of y under the closed loop:
// d ybar/dt = -lam[(A5+B5) m + (F1+Fb1) ybar + C5 u_cont], ybar(T) = M m(T),
// with H(tau) eta_hat jumps at the impulse epochs
double closed_loop_y0(const LQSpec& spec, double lam, const TimeGrid& grid,
                      const std::vector<double>& q, const std::vector<double>& Pi,
                      const std::vector<double>& Sigma, const std::vector<double>& m,
                      std::vector<double>* ybar_out) {
    const auto& nodes = grid.nodes();
    auto Pi_at = [&](double t) { return interp_table(nodes, Pi, t); };
    auto Sg_at = [&](double t) { return interp_table(nodes, Sigma, t); };
    auto q_at = [&](double t) { return interp_table(nodes, q, t); };
    auto m_at = [&](double t) { return interp_table(nodes, m, t); };

    auto rhs = [&](double t, double y) {
        const double p = Pi_at(t) * m_at(t) + Sg_at(t);
        const double u_cont = spec.C5(t) * q_at(t) - spec.C1(t) * p;
        return -lam * ((spec.A5(t) + spec.B5(t)) * m_at(t) + (spec.F1(t) + spec.Fb1(t)) * y +
                       spec.C5(t) * u_cont);
    };

    const std::size_t n = grid.size();
    std::vector<double> y(n);
    y[n - 1] = spec.M * m[n - 1];
    const auto& sch = spec.impulses;
    for (std::size_t k = n - 1; k > 0; --k) {
        double yk = y[k];
        if (sch.mode == ImpulseSchedule::Mode::DeterministicTimes) {
            for (std::size_t i = 0; i < sch.times.size(); ++i)
                if (std::fabs(nodes[k] - sch.times[i]) < 1e-9) {
                    const double tau = sch.times[i];
                    yk -= spec.H(tau) * (-q_at(tau) * spec.H(tau)); // y_left = y - H eta
                }
        }
        const double t = nodes[k];
        const double h = nodes[k] - nodes[k - 1];
        const double k1 = rhs(t, yk);
        const double k2 = rhs(t - 0.5 * h, yk - 0.5 * h * k1);
        const double k3 = rhs(t - 0.5 * h, yk - 0.5 * h * k2);
        const double k4 = rhs(t - h, yk - h * k3);
        y[k - 1] = yk - h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    if (ybar_out) *ybar_out = y;
    return y[0];
}

} // namespace

double y0_map(const LQSpec& spec, double lambda_total, const TimeGrid& grid, double y0_hat) {
    const double lam = lambda_total;
    const auto Pi = solve_riccati(spec, lam, grid);
    const auto q = q_closed_form(spec, lam, y0_hat, grid);
    const auto Sigma = solve_sigma(spec, lam, q, Pi, grid);
    const auto m = closed_loop_mean(spec, lam, q, Pi, Sigma, grid);
    return closed_loop_y0(spec, lam, grid, q, Pi, Sigma, m, nullptr);
}

RiccatiSolution fixed_point_y0(const LQSpec& spec, double lambda_total, const TimeGrid& grid,
                               const FixedPointOptions& opts) {
    validate(spec).throw_if_failed();
    const double lam = lambda_total;

    RiccatiSolution sol;
    sol.grid = grid;
    sol.Pi = solve_riccati(spec, lam, grid); // independent of q and y0_hat

    // damped iteration; if the map is expansive the residual grows and we
    // fall back to bisection on y0_map(y) - y
    double y = 0.0;
    bool converged = false;
    double prev_change = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        sol.q = q_closed_form(spec, lam, y, grid);
        sol.Sigma = solve_sigma(spec, lam, sol.q, sol.Pi, grid);
        sol.mean = closed_loop_mean(spec, lam, sol.q, sol.Pi, sol.Sigma, grid);
        const double y_loop = closed_loop_y0(spec, lam, grid, sol.q, sol.Pi, sol.Sigma, sol.mean,
                                             &sol.ybar);
        const double y_next = (1.0 - opts.rho) * y + opts.rho * y_loop;
        const double change = std::fabs(y_next - y);
        sol.fixed_point_iterations = it;
        sol.fixed_point_residual = change;
        y = y_next;
        if (change < opts.tol) {
            converged = true;
            break;
        }
        if (change > prev_change && ++growth_streak >= 2) break;
        if (change <= prev_change) growth_streak = 0;
        prev_change = change;
    }
    if (!converged) {
        // bracket the root of g(y) = y0_map(y) - y on an expanding interval
        auto gfun = [&](double yy) { return y0_map(spec, lam, grid, yy) - yy; };
        double lo = 0.0, hi = 0.0, glo = gfun(0.0), ghi = glo;
        bool bracketed = false;
        for (double r = 0.5; r <= 64.0 && !bracketed; r *= 2.0) {
            lo = -r;
            hi = r;
            glo = gfun(lo);
            ghi = gfun(hi);
            bracketed = glo * ghi <= 0.0;
        }
        if (!bracketed)
            throw Error(Errc::FixedPointDiverged,
                        "y0 fixed point: damped iteration diverged and no bisection bracket found");
        int it = sol.fixed_point_iterations;
        while (hi - lo > opts.tol && it < 400) {
            const double mid = 0.5 * (lo + hi);
            const double gm = gfun(mid);
            if (glo * gm <= 0.0) {
                hi = mid;
                ghi = gm;
            } else {
                lo = mid;
                glo = gm;
            }
            ++it;
        }
        y = 0.5 * (lo + hi);
        sol.fixed_point_iterations = it;
        sol.fixed_point_residual = std::fabs(gfun(y));
        if (sol.fixed_point_residual > 1e-6)
            throw Error(Errc::FixedPointDiverged, "y0 fixed point did not converge");
    }
    sol.y0_hat = y;
    // final curves consistent with the converged y0_hat
    sol.q = q_closed_form(spec, lam, y, grid);
    sol.Sigma = solve_sigma(spec, lam, sol.q, sol.Pi, grid);
    sol.mean = closed_loop_mean(spec, lam, sol.q, sol.Pi, sol.Sigma, grid);
    closed_loop_y0(spec, lam, grid, sol.q, sol.Pi, sol.Sigma, sol.mean, &sol.ybar);
    return sol;
}

Example2Curves example2_curves(double lambda_total, const TimeGrid& grid) {
    if (!(lambda_total > 0.0))
        throw Error(Errc::ConfigError, "lambda(E) must be positive");
    Example2Curves out;
    out.grid = grid;
    out.a = -0.75 * lambda_total;
    const double a = out.a;
    const double lam = lambda_total;

    const std::size_t n = grid.size();
    out.Ptilde.resize(n);
    out.Qtilde.resize(n);
    out.X_prog.resize(n);
    out.X_pred.resize(n);
    out.p.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.node(k);
        out.Ptilde[k] = 2.0 / (2.0 * a * t - 2.0 * a + 1.0);
        out.Qtilde[k] = 6.0 / (4.0 * (1.0 - t) * lam + 3.0);
        out.X_prog[k] = (2.0 * a * t - 2.0 * a + 1.0) / (1.0 - 2.0 * a);
        out.X_pred[k] = (4.0 * lam * (1.0 - t) + 3.0) / (4.0 * lam + 3.0);
        out.p[k] = out.Ptilde[k] * out.X_prog[k];
    }
    out.J_prog = example2_cost_progressive(lam);
    out.J_pred = example2_cost_predictable(lam);
    return out;
}

} // namespace lq
} // namespace mfjump
