#include "mfjump/smp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mfjump/cost.hpp"
#include "mfjump/quadrature.hpp"

namespace mfjump {
namespace smp {

double hamiltonian(const GeneralSpec& spec, double t, double x, double m, double y, double ybar,
                   double z, double zbar, double u, double p, double theta, double q,
                   const MarkAtom& e) {
    return -q * spec.g(t, x, m, y, ybar, z, zbar, u, e) + p * spec.b(t, x, m, u, e) +
           theta * spec.sigma(t, x, m, u, e) + spec.l(t, x, m, ybar, u, e);
}

double hamiltonian_u(const GeneralSpec& spec, double t, double x, double m, double y, double ybar,
                     double z, double zbar, double u, double p, double theta, double q,
                     const MarkAtom& e) {
    if (spec.g_u && spec.b_u && spec.sigma_u && spec.l_u)
        return -q * spec.g_u(t, x, m, y, ybar, z, zbar, u, e) + p * spec.b_u(t, x, m, u, e) +
               theta * spec.sigma_u(t, x, m, u, e) + spec.l_u(t, x, m, ybar, u, e);
    const double h = 1e-6 * (1.0 + std::fabs(u));
    return (hamiltonian(spec, t, x, m, y, ybar, z, zbar, u + h, p, theta, q, e) -
            hamiltonian(spec, t, x, m, y, ybar, z, zbar, u - h, p, theta, q, e)) /
           (2.0 * h);
}

double hamiltonian_jump(const GeneralSpec& spec, double t, double x_left, double m_left,
                        double ybar_left, double u, double p_left, double vartheta,
                        const MarkAtom& e) {
    return (p_left + vartheta) * spec.gamma(t, x_left, m_left, u, e) +
           vartheta * spec.c(t, x_left, m_left, u, e) +
           spec.f(t, x_left, m_left, ybar_left, u, e);
}

double hamiltonian_jump_u(const GeneralSpec& spec, double t, double x_left, double m_left,
                          double ybar_left, double u, double p_left, double vartheta,
                          const MarkAtom& e) {
    if (spec.gamma_u && spec.c_u && spec.f_u)
        return (p_left + vartheta) * spec.gamma_u(t, x_left, m_left, u, e) +
               vartheta * spec.c_u(t, x_left, m_left, u, e) +
               spec.f_u(t, x_left, m_left, ybar_left, u, e);
    const double h = 1e-6 * (1.0 + std::fabs(u));
    return (hamiltonian_jump(spec, t, x_left, m_left, ybar_left, u + h, p_left, vartheta, e) -
            hamiltonian_jump(spec, t, x_left, m_left, ybar_left, u - h, p_left, vartheta, e)) /
           (2.0 * h);
}

double AdjointPaths::q_at(double t) const { return interp_table(grid.nodes(), q, t); }
double AdjointPaths::p_at(double t) const { return interp_table(grid.nodes(), p, t); }

AdjointPaths assemble_adjoints(const LQSpec& spec, double lambda_total,
                               const lq::RiccatiSolution& sol) {
    AdjointPaths adj;
    adj.grid = sol.grid;
    adj.q = sol.q;
    const std::size_t n = sol.grid.size();
    adj.p.resize(n);
    for (std::size_t k = 0; k < n; ++k) adj.p[k] = sol.Pi[k] * sol.mean[k] + sol.Sigma[k];
    adj.zero_tag = "q deterministic (K loading is q - E[q]); p terminal value deterministic";

    // q(0) = -phi0_y(y0_hat) = -y0_hat; p(T) = delta E[x_T] - M q(T)
    adj.q0_residual = std::fabs(adj.q.front() + sol.y0_hat);
    adj.pT_residual =
        std::fabs(adj.p.back() - (spec.delta * sol.mean.back() - spec.M * adj.q.back()));
    if (adj.q0_residual > 1e-6 || adj.pT_residual > 1e-6)
        throw Error(Errc::InconsistentSolution,
                    "adjoint boundary residuals exceed 1e-6 (fixed point not closed?)");

    if (spec.impulses.mode == ImpulseSchedule::Mode::DeterministicTimes) {
        for (double tau : spec.impulses.times) {
            const double eta = -sol.q_at(tau) * spec.H(tau);
            adj.impulse_times.push_back(tau);
            adj.impulse_eta.push_back(eta);
            // psi = eta^2/2, so psi_eta(tau, eta) = eta
            adj.impulse_multipliers.push_back(adj.p_at(tau) * spec.G(tau) +
                                              sol.q_at(tau) * spec.H(tau) + eta);
        }
    }
    (void)lambda_total;
    return adj;
}

AdjointPaths example2_adjoints(double lambda_total, const TimeGrid& grid) {
    AdjointPaths adj;
    adj.grid = grid;
    const double a = -0.75 * lambda_total;
    adj.q.assign(grid.size(), -0.5);
    adj.p.assign(grid.size(), 2.0 / (1.0 - 2.0 * a));
    adj.zero_tag = "driver free of (y,z); p terminal value deterministic";
    return adj;
}

namespace {

double lattice_violation(double Hu, double u_hat, double lo, double hi, int points) {
    // worst violation of Hu (V - u_hat) >= 0 over the probe lattice
    double worst = 0.0;
    for (int i = 0; i <= points; ++i) {
        const double V = lo + (hi - lo) * i / points;
        worst = std::max(worst, -(Hu * (V - u_hat)));
    }
    return worst;
}

} // namespace

SMPReport check_smp(const PathEnsemble& ens, const AdjointPaths& adj, const ControlLaw& law,
                    int probe_points, double tol, const BackwardMeanSolution* ybar) {
    const GeneralSpec& spec = ens.spec();
    const MarkSpace& ms = ens.mark_space();
    const TimeGrid& grid = ens.grid();
    const bool bounded = std::isfinite(law.u_lo) && std::isfinite(law.u_hi);
    const std::size_t paths = static_cast<std::size_t>(ens.paths());

    std::vector<double> cont_slot(paths, 0.0), jump_slot(paths, 0.0);
    std::vector<long> cont_pts(paths, 0), jump_pts(paths, 0);
    std::vector<double> imp_slot(paths, 0.0);
    std::vector<long> imp_pts(paths, 0);

    ens.for_each_path([&](std::size_t pidx, const Path& path) {
        double cres = 0.0, jres = 0.0, ires = 0.0;
        long cn = 0, jn = 0, in = 0;
        for (const auto& nd : path.nodes) {
            const double pt = adj.p_at(nd.t);
            const double qt = adj.q_at(nd.t);
            if (nd.jump_mark < 0 && nd.impulse < 0) {
                // nu-part: non-event node, continuous branch
                const double yb = ybar ? ybar->at(nd.t, grid) : 0.0;
                for (const auto& e : ms.atoms()) {
                    const double u_hat = law.cont(nd.t, nd.x, nd.m, e);
                    const double Hu = hamiltonian_u(spec, nd.t, nd.x, nd.m, yb, yb, 0.0, 0.0,
                                                    u_hat, pt, 0.0, qt, e);
                    cres = std::max(cres, bounded
                                              ? lattice_violation(Hu, u_hat, law.u_lo, law.u_hi,
                                                                  probe_points)
                                              : std::fabs(Hu));
                    ++cn;
                }
            }
            if (nd.jump_mark >= 0) {
                // mu-part: realized jump event, left limits and the candidate
                // law's jump branch
                const double ybl = ybar ? ybar->at_left(nd.t, grid) : 0.0;
                const MarkAtom& e = ms.atom(nd.jump_mark);
                const double u_hat = law.jump(nd.t, nd.x_left, nd.m_left, e);
                const double Htu = hamiltonian_jump_u(spec, nd.t, nd.x_left, nd.m_left, ybl,
                                                      u_hat, pt, 0.0, e);
                jres = std::max(jres, bounded
                                          ? lattice_violation(Htu, u_hat, law.u_lo, law.u_hi,
                                                              probe_points)
                                          : std::fabs(Htu));
                ++jn;
            }
            if (nd.impulse >= 0) {
                const double eta = law.impulses.has(static_cast<std::size_t>(nd.impulse))
                                       ? law.impulses.value(static_cast<std::size_t>(nd.impulse), nd.t)
                                       : nd.eta;
                const double Mi = pt * spec.G(nd.t) + qt * spec.H(nd.t) + spec.psi_eta(nd.t, eta);
                ires = std::max(ires, std::fabs(Mi));
                ++in;
            }
        }
        cont_slot[pidx] = cres;
        jump_slot[pidx] = jres;
        imp_slot[pidx] = ires;
        cont_pts[pidx] = cn;
        jump_pts[pidx] = jn;
        imp_pts[pidx] = in;
    });

    SMPReport rep;
    auto fold = [](const std::vector<double>& slot, const std::vector<long>& pts, PartReport& pr) {
        for (double v : slot) pr.residual = std::max(pr.residual, v);
        for (long c : pts) pr.points += c;
    };
    fold(cont_slot, cont_pts, rep.continuous);
    fold(jump_slot, jump_pts, rep.jump);
    fold(imp_slot, imp_pts, rep.impulse);
    rep.continuous.tol = rep.jump.tol = rep.impulse.tol = tol;
    rep.continuous.pass = rep.continuous.residual < tol;
    rep.jump.pass = rep.jump.residual < tol;
    rep.impulse.pass = rep.impulse.residual < tol;
    if (rep.jump.points == 0) rep.jump.note = "0 events: jump part vacuously holds";
    if (rep.impulse.points == 0) rep.impulse.note = "no impulses scheduled";
    rep.continuous.note = bounded ? "probe-lattice inequality check" : "stationarity |H_u|";
    return rep;
}

std::string SMPReport::to_json() const {
    nlohmann::ordered_json j;
    auto dump = [](const PartReport& p) {
        nlohmann::ordered_json o;
        o["residual"] = p.residual;
        o["tolerance"] = p.tol;
        o["verdict"] = p.pass ? "PASS" : "FAIL";
        o["points"] = p.points;
        if (!p.note.empty()) o["note"] = p.note;
        return o;
    };
    j["continuous"] = dump(continuous);
    j["jump"] = dump(jump);
    j["impulse"] = dump(impulse);
    j["all_pass"] = all_pass();
    return j.dump(2);
}

std::string SMPReport::to_text() const {
    std::ostringstream os;
    auto line = [&](const char* name, const PartReport& p) {
        os << name << ": " << (p.pass ? "PASS" : "FAIL") << "  residual=" << p.residual
           << " tol=" << p.tol << " points=" << p.points;
        if (!p.note.empty()) os << "  (" << p.note << ")";
        os << "\n";
    };
    line("continuous part", continuous);
    line("jump part      ", jump);
    line("impulse part   ", impulse);
    return os.str();
}

DualityResult duality_residual(const PathEnsemble& base, const PathEnsemble& pert,
                               const AdjointPaths& adj, const BackwardMeanSolution& ybar_base,
                               const BackwardMeanSolution& ybar_pert) {
    if (base.paths() != pert.paths() || base.seed() != pert.seed() || base.dt() != pert.dt())
        throw Error(Errc::EnsembleMismatch, "duality needs common random numbers and one grid");

    const GeneralSpec& spec = base.spec();
    const MarkSpace& ms = base.mark_space();
    const TimeGrid& grid = base.grid();
    const std::size_t paths = static_cast<std::size_t>(base.paths());
    const ControlLaw& law_hat = base.law();
    const ControlLaw& law = pert.law();

    // First-order bracket at finite differences on common random numbers.
    // The x-channels stay in their raw state form (l_x dx pathwise, mean
    // terms through the coupled means). The y-channels (phi0 slope plus the
    // y-weights of l and f) are priced by the adjoint q acting on the
    // *linearized* driver/terminal increments -q dg0 - q(T) dh + q H deta,
    // which keeps the bracket exactly first order even when the backward
    // data g0, h are nonlinear, and keeps every term per-path.
    if (!spec.driver_affine)
        throw Error(Errc::DriverNotLinear, "the duality bracket needs the affine driver shape");
    (void)ybar_pert; // evaluation points come from the base run only
    auto g0_x = spec.g0_x, g0_m = spec.g0_m, g0_u = spec.g0_u;
    if (!g0_x || !g0_m || !g0_u) {
        const Coeff g0 = spec.g0;
        auto fd = [g0](int arg) {
            return Coeff([g0, arg](double t, double x, double m, double u, const MarkAtom& e) {
                const double h = 1e-6 * (1.0 + std::fabs(arg == 0 ? x : arg == 1 ? m : u));
                const double xp = arg == 0 ? x + h : x, xm = arg == 0 ? x - h : x;
                const double mp = arg == 1 ? m + h : m, mm = arg == 1 ? m - h : m;
                const double up = arg == 2 ? u + h : u, um = arg == 2 ? u - h : u;
                return (g0(t, xp, mp, up, e) - g0(t, xm, mm, um, e)) / (2.0 * h);
            });
        };
        if (!g0_x) g0_x = fd(0);
        if (!g0_m) g0_m = fd(1);
        if (!g0_u) g0_u = fd(2);
    }
    const double qT = adj.q_at(grid.horizon());
    std::vector<double> slot(paths, 0.0), ham_slot(paths, 0.0);

    base.for_each_path([&](std::size_t pidx, const Path& bp) {
        const auto pp = pert.replay_path(pidx);
        if (pp.size() != bp.nodes.size())
            throw Error(Errc::EnsembleMismatch, "coupled paths have different event sets");
        double acc = 0.0, ham = 0.0;
        for (std::size_t k = 0; k < bp.nodes.size(); ++k) {
            const PathNode& nb = bp.nodes[k];
            const PathNode& np = pp[k];
            const double t = nb.t;
            if (k + 1 < bp.nodes.size()) {
                const double dt = bp.nodes[k + 1].t - t;
                const double yb = ybar_base.at(t, grid);
                const double dx = np.x - nb.x;
                const double dm = pert.mean_at(t) - base.mean_at(t);
                const double qt = adj.q_at(t);
                double row = 0.0, hrow = 0.0;
                for (const auto& e : ms.atoms()) {
                    const double u_hat = law_hat.cont(t, nb.x, nb.m, e);
                    const double u = law.cont(t, np.x, np.m, e);
                    row += (spec.l_x(t, nb.x, nb.m, yb, u_hat, e) * dx +
                            spec.l_m(t, nb.x, nb.m, yb, u_hat, e) * dm +
                            spec.l_u(t, nb.x, nb.m, yb, u_hat, e) * (u - u_hat)) *
                           e.weight;
                    row += -qt *
                           (g0_x(t, nb.x, nb.m, u_hat, e) * dx + g0_m(t, nb.x, nb.m, u_hat, e) * dm +
                            g0_u(t, nb.x, nb.m, u_hat, e) * (u - u_hat)) *
                           e.weight;
                    const double Hu = hamiltonian_u(spec, t, nb.x, nb.m, yb, yb, 0.0, 0.0, u_hat,
                                                    adj.p_at(t), 0.0, qt, e);
                    hrow += Hu * (u - u_hat) * e.weight;
                }
                acc += row * dt;
                ham += hrow * dt;
            }
            if (nb.jump_mark >= 0) {
                const MarkAtom& e = ms.atom(nb.jump_mark);
                const double ybl = ybar_base.at_left(t, grid);
                const double dxl = np.x_left - nb.x_left;
                const double dml = pert.mean_left_at(t) - base.mean_left_at(t);
                const double u_hat = nb.u_jump;
                const double u = np.u_jump;
                acc += spec.f_x(t, nb.x_left, nb.m_left, ybl, u_hat, e) * dxl +
                       spec.f_m(t, nb.x_left, nb.m_left, ybl, u_hat, e) * dml +
                       spec.f_u(t, nb.x_left, nb.m_left, ybl, u_hat, e) * (u - u_hat);
                ham += hamiltonian_jump_u(spec, t, nb.x_left, nb.m_left, ybl, u_hat, adj.p_at(t),
                                          0.0, e) *
                       (u - u_hat);
            }
            if (nb.impulse >= 0) {
                const double Mi = adj.p_at(t) * spec.G(t) + adj.q_at(t) * spec.H(t) +
                                  spec.psi_eta(t, nb.eta);
                acc += (spec.psi_eta(t, nb.eta) + adj.q_at(t) * spec.H(t)) * (np.eta - nb.eta);
                ham += Mi * (np.eta - nb.eta);
            }
        }
        const PathNode& lb = bp.nodes.back();
        const PathNode& lp = pp.back();
        const double dxT = lp.x - lb.x;
        const double dmT = pert.mean().back() - base.mean().back();
        acc += spec.phi_T_x(lb.x, lb.m) * dxT;
        acc += spec.phi_T_m(lb.x, lb.m) * dmT;
        acc += -qT * (spec.h_x(lb.x, lb.m) * dxT + spec.h_m(lb.x, lb.m) * dmT);
        slot[pidx] = acc;
        ham_slot[pidx] = ham;
    });

    DualityResult out;
    out.paths = static_cast<int>(paths);
    double mean = 0.0, hmean = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        mean += slot[p];
        hmean += ham_slot[p];
    }
    mean /= static_cast<double>(paths);
    hmean /= static_cast<double>(paths);
    double var = 0.0;
    for (std::size_t p = 0; p < paths; ++p) var += (slot[p] - mean) * (slot[p] - mean);
    var = paths > 1 ? var / static_cast<double>(paths - 1) : 0.0;
    out.estimate = mean;
    out.hamiltonian_form = hmean;
    out.std_error = std::sqrt(var / static_cast<double>(paths));
    out.ci4 = 4.0 * out.std_error;
    out.pass = std::fabs(out.estimate) <= std::max(out.ci4, 1e-12);
    return out;
}

namespace {

// cost of the open-loop blended control u^eps realized along the base paths,
// evaluated on the co-simulated perturbed state
double open_loop_cost(const GeneralSpec& spec, const PathEnsemble& base,
                      const VariationEnsemble& pair, const Direction& dir, double eps1,
                      double eps2) {
    const MarkSpace& ms = base.mark_space();
    const ControlLaw& law = base.law();
    const TimeGrid& grid = base.grid();
    const std::size_t n = grid.size();
    const std::size_t paths = static_cast<std::size_t>(base.paths());
    const auto& me = pair.mean_eps();
    const auto& me_left = pair.mean_eps_left();

    // driver tabulation and terminal mean of the perturbed run
    constexpr std::size_t chunk = 64;
    const std::size_t n_chunks = (paths + chunk - 1) / chunk;
    std::vector<double> acc(n_chunks * n, 0.0), imp_acc(n_chunks * n, 0.0);
    std::vector<double> term_slot(paths, 0.0);
    const bool affine = spec.driver_affine;
    pair.for_each_path_pair([&](std::size_t p, const VariationEnsemble::PairView& v) {
        const std::size_t c = p / chunk;
        double* row = &acc[c * n];
        double* irow = &imp_acc[c * n];
        for (std::size_t k = 0; k < v.base.nodes.size(); ++k) {
            const PathNode& nd = v.base.nodes[k];
            const std::size_t ti = grid.locate(nd.t);
            const bool on_template = grid.node(ti) == nd.t;
            if (on_template && affine) {
                double s = 0.0;
                for (const auto& e : ms.atoms()) {
                    const double u_hat = law.cont(nd.t, nd.x, nd.m, e);
                    const double ue = u_hat + eps1 * (dir.v.cont(nd.t, nd.x, nd.m, e) - u_hat);
                    s += spec.g0(nd.t, v.xe[k], me[ti], ue, e) * e.weight;
                }
                row[ti] += s;
            }
            if (nd.impulse >= 0) {
                const double eta_eps =
                    nd.eta + eps2 * (dir.xi.value(static_cast<std::size_t>(nd.impulse), nd.t) -
                                     nd.eta);
                const std::size_t kk = on_template ? ti : std::min(ti + 1, n - 1);
                irow[kk] += spec.H(nd.t) * eta_eps;
            }
        }
        term_slot[p] = spec.h ? spec.h(v.xe.back(), me.back()) : 0.0;
    });
    std::vector<double> a_nodes(n, 0.0), imp_nodes(n, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t k = 0; k < n; ++k) {
            a_nodes[k] += acc[c * n + k];
            imp_nodes[k] += imp_acc[c * n + k];
        }
    double term_mean = 0.0;
    for (double v : term_slot) term_mean += v;
    term_mean /= static_cast<double>(paths);
    for (std::size_t k = 0; k < n; ++k) {
        a_nodes[k] /= static_cast<double>(paths);
        imp_nodes[k] /= static_cast<double>(paths);
    }

    MeanCurvePair ybar;
    double y0 = 0.0;
    if (affine) {
        const double lam = ms.total_mass();
        const Curve Fy = spec.Fy, Fybar = spec.Fybar;
        ybar = backward_mean_from_tabulated(
            grid, a_nodes, [Fy, Fybar, lam](double t) { return lam * (Fy(t) + Fybar(t)); },
            term_mean, imp_nodes);
        y0 = ybar.right[0];
    } else if (spec.phi0_depends_y0) {
        throw Error(Errc::MissingY0, "open-loop cost needs an affine driver for y0");
    }
    auto yb_at = [&](double t) {
        if (!affine) return 0.0;
        return interp_table(grid.nodes(), ybar.right, t);
    };

    // pathwise cost under the blended control
    std::vector<double> cost_slot(paths, 0.0);
    pair.for_each_path_pair([&](std::size_t p, const VariationEnsemble::PairView& v) {
        double acc_cost = 0.0;
        const auto& nodes = v.base.nodes;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const PathNode& nd = nodes[k];
            const std::size_t ti = grid.locate(nd.t);
            const bool on_template = grid.node(ti) == nd.t;
            const double me_k = on_template
                                    ? me[ti]
                                    : interp_table(grid.nodes(), me, nd.t);
            if (k + 1 < nodes.size()) {
                const double dt = nodes[k + 1].t - nd.t;
                const double yb = yb_at(nd.t);
                double row = 0.0;
                for (const auto& e : ms.atoms()) {
                    const double u_hat = law.cont(nd.t, nd.x, nd.m, e);
                    const double ue = u_hat + eps1 * (dir.v.cont(nd.t, nd.x, nd.m, e) - u_hat);
                    row += spec.l(nd.t, v.xe[k], me_k, yb, ue, e) * e.weight;
                }
                acc_cost += row * dt;
            }
            if (nd.jump_mark >= 0) {
                const MarkAtom& e = ms.atom(nd.jump_mark);
                const double u_hat = nd.u_jump;
                const double ue =
                    u_hat + eps1 * (dir.v.jump(nd.t, nd.x_left, nd.m_left, e) - u_hat);
                const double mel = on_template ? me_left[ti]
                                               : interp_table(grid.nodes(), me, nd.t);
                acc_cost += spec.f(nd.t, v.xe_left[k], mel, yb_at(nd.t), ue, e);
            }
            if (nd.impulse >= 0) {
                const double eta_eps =
                    nd.eta + eps2 * (dir.xi.value(static_cast<std::size_t>(nd.impulse), nd.t) -
                                     nd.eta);
                acc_cost += spec.psi(nd.t, eta_eps);
            }
        }
        acc_cost += spec.phi_T(v.xe.back(), me.back());
        cost_slot[p] = acc_cost;
    });
    double mean = 0.0;
    for (double v : cost_slot) mean += v;
    mean /= static_cast<double>(paths);
    return mean + (spec.phi0 ? spec.phi0(y0) : 0.0);
}

} // namespace

DualityResult duality_residual_batched(const GeneralSpec& spec, const ControlLaw& law_hat,
                                       const ImpulseValues& imp_hat, const ControlLaw& law,
                                       const ImpulseValues& imp, const MarkSpace& ms,
                                       const SimConfig& cfg, const AdjointPaths& adj,
                                       int batches) {
    if (batches < 2) throw Error(Errc::ConfigError, "batched duality needs >= 2 batches");
    std::vector<double> est(static_cast<std::size_t>(batches), 0.0);
    double ham = 0.0;
    for (int k = 0; k < batches; ++k) {
        SimConfig bc = cfg;
        bc.seed = derive_stream(cfg.seed, 0x6475616cULL + static_cast<std::uint64_t>(k));
        PathEnsemble base = simulate(spec, law_hat, imp_hat, ms, bc);
        BackwardMeanSolution bw = solve_mean(spec, base, law_hat, imp_hat);
        PathEnsemble pens = simulate(spec, law, imp, ms, bc);
        BackwardMeanSolution pbw = solve_mean(spec, pens, law, imp);
        DualityResult r = duality_residual(base, pens, adj, bw, pbw);
        est[static_cast<std::size_t>(k)] = r.estimate;
        ham += r.hamiltonian_form;
    }
    DualityResult out;
    out.paths = cfg.paths * batches;
    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : est) var += (v - mean) * (v - mean);
    var /= static_cast<double>(batches - 1);
    out.estimate = mean;
    out.hamiltonian_form = ham / static_cast<double>(batches);
    out.std_error = std::sqrt(var / static_cast<double>(batches));
    out.ci4 = 4.0 * out.std_error;
    out.pass = std::fabs(out.estimate) <= std::max(out.ci4, 1e-12);
    return out;
}

GradientCheckReport directional_derivative_check(const GeneralSpec& spec, const ControlLaw& law_hat,
                                                 const ImpulseValues& imp_hat, const Direction& dir,
                                                 const std::vector<double>& eps_list,
                                                 const MarkSpace& ms, const SimConfig& cfg,
                                                 const AdjointPaths& adj) {
    PathEnsemble base = simulate(spec, law_hat, imp_hat, ms, cfg);
    BackwardMeanSolution bw = solve_mean(spec, base, law_hat, imp_hat);
    const double J0 = cost::evaluate_cost(base, &bw).mean;
    const TimeGrid& grid = base.grid();

    // directional derivative in Hamiltonian form along the base trajectory
    const std::size_t paths = static_cast<std::size_t>(base.paths());
    std::vector<double> d_slot(paths, 0.0);
    base.for_each_path([&](std::size_t pidx, const Path& bp) {
        double acc = 0.0;
        for (std::size_t k = 0; k < bp.nodes.size(); ++k) {
            const PathNode& nd = bp.nodes[k];
            const double t = nd.t;
            if (k + 1 < bp.nodes.size()) {
                const double dt = bp.nodes[k + 1].t - t;
                const double yb = bw.at(t, grid);
                double row = 0.0;
                for (const auto& e : ms.atoms()) {
                    const double u_hat = law_hat.cont(t, nd.x, nd.m, e);
                    const double v = dir.v.cont(t, nd.x, nd.m, e);
                    const double Hu = hamiltonian_u(spec, t, nd.x, nd.m, yb, yb, 0.0, 0.0, u_hat,
                                                    adj.p_at(t), 0.0, adj.q_at(t), e);
                    row += Hu * (v - u_hat) * e.weight;
                }
                acc += row * dt;
            }
            if (nd.jump_mark >= 0) {
                const MarkAtom& e = ms.atom(nd.jump_mark);
                const double ybl = bw.at_left(t, grid);
                const double u_hat = nd.u_jump;
                const double v = dir.v.jump(t, nd.x_left, nd.m_left, e);
                acc += hamiltonian_jump_u(spec, t, nd.x_left, nd.m_left, ybl, u_hat, adj.p_at(t),
                                          0.0, e) *
                       (v - u_hat);
            }
            if (nd.impulse >= 0) {
                const double Mi = adj.p_at(t) * spec.G(t) + adj.q_at(t) * spec.H(t) +
                                  spec.psi_eta(t, nd.eta);
                acc += Mi * (dir.xi.value(static_cast<std::size_t>(nd.impulse), t) - nd.eta);
            }
        }
        d_slot[pidx] = acc;
    });
    double deriv = 0.0;
    for (double v : d_slot) deriv += v;
    deriv /= static_cast<double>(paths);
    double dvar = 0.0;
    for (double v : d_slot) dvar += (v - deriv) * (v - deriv);
    dvar = paths > 1 ? dvar / static_cast<double>(paths - 1) : 0.0;

    GradientCheckReport rep;
    rep.eps = eps_list;
    rep.derivative = deriv;
    rep.derivative_ci = 3.0 * std::sqrt(dvar / static_cast<double>(paths));

    for (double eps : eps_list) {
        VariationEnsemble pair = simulate_variation_pair(spec, base, dir, eps, eps);
        const double J = open_loop_cost(spec, base, pair, dir, eps, eps);
        rep.fd.push_back(J - J0);
        rep.jhat.push_back(eps * deriv);
        rep.abs_err.push_back(std::fabs(rep.fd.back() - rep.jhat.back()));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        lx.push_back(std::log(eps_list[i]));
        ly.push_back(std::log(std::max(rep.abs_err[i], 1e-300)));
    }
    rep.slope = fit_slope(lx, ly);
    return rep;
}

VariationOrderReport variation_order_check(const GeneralSpec& spec, const ControlLaw& law_hat,
                                           const ImpulseValues& imp_hat, const Direction& dir,
                                           const std::vector<double>& eps_list, const MarkSpace& ms,
                                           const SimConfig& cfg) {
    PathEnsemble base = simulate(spec, law_hat, imp_hat, ms, cfg);

    VariationOrderReport rep;
    rep.eps = eps_list;
    const std::size_t paths = static_cast<std::size_t>(base.paths());

    for (double eps : eps_list) {
        // x^eps and x^1 co-simulated along the base paths (open-loop blend of
        // the realized control processes; common random numbers throughout)
        VariationEnsemble pair = simulate_variation_pair(spec, base, dir, eps, eps);
        std::vector<double> diff_slot(paths, 0.0), rem_slot(paths, 0.0);
        pair.for_each_path_pair([&](std::size_t pidx, const VariationEnsemble::PairView& v) {
            double sup_d = 0.0, sup_r = 0.0;
            for (std::size_t k = 0; k < v.base.nodes.size(); ++k) {
                const double d = v.xe[k] - v.base.nodes[k].x;
                const double r = d - v.x1[k];
                sup_d = std::max(sup_d, d * d);
                sup_r = std::max(sup_r, r * r);
            }
            diff_slot[pidx] = sup_d;
            rem_slot[pidx] = sup_r;
        });
        double dmean = 0.0, rmean = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            dmean += diff_slot[p];
            rmean += rem_slot[p];
        }
        dmean /= static_cast<double>(paths);
        rmean /= static_cast<double>(paths);
        rep.diff_sup_sq.push_back(dmean);
        rep.remainder_sup_sq.push_back(rmean);
        rep.remainder_ratio.push_back(rmean / (2.0 * eps * eps)); // eps1 = eps2 = eps
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        lx.push_back(std::log(eps_list[i]));
        ly.push_back(std::log(std::max(rep.diff_sup_sq[i], 1e-300)));
    }
    rep.slope = fit_slope(lx, ly);
    rep.ratio_decreasing = true;
    for (std::size_t i = 0; i + 1 < rep.remainder_ratio.size(); ++i)
        if (rep.remainder_ratio[i + 1] > rep.remainder_ratio[i] + 1e-12)
            rep.ratio_decreasing = false;
    return rep;
}

} // namespace smp
} // namespace mfjump
