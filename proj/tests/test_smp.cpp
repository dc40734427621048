#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfjump/backward.hpp"
#include "mfjump/cost.hpp"
#include "mfjump/forward.hpp"
#include "mfjump/lq.hpp"
#include "mfjump/model.hpp"
#include "mfjump/smp.hpp"

using namespace mfjump;

namespace {

LQSpec generic_spec() {
    LQSpec s;
    s.T = 1.0;
    s.x0 = 0.7;
    s.delta = 1.2;
    s.M = 0.5;
    s.A1 = 0.2; s.A2 = 0.15; s.A3 = 0.1; s.A4 = 0.12; s.A5 = 0.3;
    s.A6 = 0.25; s.A7 = 0.2;
    s.B1 = 0.1; s.B3 = 0.05; s.B5 = 0.1; s.B6 = 0.05;
    s.C1 = 0.8; s.C2 = 0.3; s.C3 = 0.5; s.C4 = 0.4; s.C5 = 0.6;
    s.F1 = 0.3; s.Fb1 = 0.1; s.Fb2 = 0.15; s.Fb3 = 0.1;
    s.K = 0.2;
    s.H = Curve(std::vector<std::pair<double, double>>{{0.0, 0.5}, {1.0, 0.7}});
    s.impulses = ImpulseSchedule::at_times({0.35, 0.7});
    return s;
}

struct LQSetup {
    LQSpec spec;
    GeneralSpec gspec;
    lq::RiccatiSolution sol;
    smp::AdjointPaths adj;
    ControlLaw law;
    MarkSpace ms;
    SimConfig cfg;
    std::function<double(double, double)> mean_rhs;
};

LQSetup make_lq_setup(int paths, double dt, std::uint64_t seed) {
    LQSetup s;
    s.spec = generic_spec();
    s.ms = MarkSpace({{"a", 1.0, 0.6}, {"b", -0.5, 0.4}});
    const double lam = s.ms.total_mass();
    const TimeGrid grid(s.spec.T, dt);
    s.sol = lq::fixed_point_y0(s.spec, lam, grid);
    s.adj = smp::assemble_adjoints(s.spec, lam, s.sol);
    s.gspec = to_general(s.spec);
    s.law = lq::optimal_feedback(s.spec, s.sol);
    s.cfg.paths = paths;
    s.cfg.dt = dt;
    s.cfg.seed = seed;
    auto sol = std::make_shared<lq::RiccatiSolution>(s.sol);
    const LQSpec sp = s.spec;
    s.mean_rhs = [sol, sp, lam](double t, double m) {
        const double p = sol->Pi_at(t) * m + sol->Sigma_at(t);
        const double uc = sp.C5(t) * sol->q_at(t) - sp.C1(t) * p;
        const double uj = -sp.C3(t) * p;
        const double pi = sp.A1(t) + sp.A3(t) + sp.B1(t) + sp.B3(t);
        return lam * (pi * m + sp.C1(t) * uc + sp.C3(t) * uj);
    };
    s.cfg.exact_mean_rhs = s.mean_rhs;
    return s;
}

} // namespace

TEST_CASE("hamiltonian values and stationarity roots") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    const MarkAtom& e = ms.atom(0);
    SUBCASE("all coefficients zero gives zero") {
        LQSpec z;
        z.delta = 1.0;
        const GeneralSpec g = to_general(z);
        CHECK(smp::hamiltonian(g, 0.2, 1.0, 1.0, 0.5, 0.5, 0.1, 0.1, 0.0, 0.3, 0.2, -0.4, e) == 0.0);
    }
    SUBCASE("jump-emphasis example: H_u = p + 2u at q = -1/2") {
        Example2 ex = example2_spec(ms);
        const double p = 0.8, q = -0.5;
        // analytic derivative and the stationarity root u = -p/2
        CHECK(smp::hamiltonian_u(ex.spec, 0.3, 0.76, 0.76, 0, 0, 0, 0, -0.4, p, 0.0, q, e) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(smp::hamiltonian_u(ex.spec, 0.3, 0.76, 0.76, 0, 0, 0, 0, 0.1, p, 0.0, q, e) ==
              doctest::Approx(p + 2.0 * 0.1));
        // H itself: -q u^2 + p u + u^2/2
        const double u = 0.25;
        CHECK(smp::hamiltonian(ex.spec, 0.3, 1.0, 1.0, 0, 0, 0, 0, u, p, 0.0, q, e) ==
              doctest::Approx(-q * u * u + p * u + 0.5 * u * u));
        // jump part: Ht_u = p^- + 4u, root u = -p/4
        CHECK(smp::hamiltonian_jump_u(ex.spec, 0.3, 1.0, 1.0, 0, -p / 4.0, p, 0.0, e) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("general template roots with nonzero theta and vartheta") {
        const LQSpec s = generic_spec();
        const GeneralSpec g = to_general(s);
        const double t = 0.4, p = 0.9, q = -0.3, theta = 0.25, vartheta = 0.15;
        const double root = q * s.C5(t) - p * s.C1(t) - theta * s.C2(t);
        CHECK(smp::hamiltonian_u(g, t, 1.0, 0.8, 0.2, 0.1, 0, 0, root, p, theta, q, e) ==
              doctest::Approx(0.0).epsilon(1e-12));
        const double jroot = -p * s.C3(t) - vartheta * (s.C3(t) + s.C4(t));
        CHECK(smp::hamiltonian_jump_u(g, t, 1.0, 0.8, 0.2, jroot, p, vartheta, e) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("finite-difference fallback matches the analytic derivative") {
        Example2 ex = example2_spec(ms);
        GeneralSpec nofd = ex.spec;
        nofd.g_u = nullptr;
        nofd.b_u = nullptr;
        nofd.l_u = nullptr;
        const double a = smp::hamiltonian_u(ex.spec, 0.3, 0.7, 0.7, 0, 0, 0, 0, 0.2, 0.8, 0, -0.5, e);
        const double b = smp::hamiltonian_u(nofd, 0.3, 0.7, 0.7, 0, 0, 0, 0, 0.2, 0.8, 0, -0.5, e);
        CHECK(a == doctest::Approx(b).epsilon(1e-7));
    }
}

TEST_CASE("adjoint assembly") {
    SUBCASE("generic spec closes the boundary conditions") {
        auto s = make_lq_setup(10, 1e-3, 1);
        CHECK(s.adj.q0_residual < 1e-8);
        CHECK(s.adj.pT_residual < 1e-8);
        CHECK(s.adj.theta_zero);
        CHECK(s.adj.vartheta_zero);
        REQUIRE(s.adj.impulse_multipliers.size() == 2);
        for (double m : s.adj.impulse_multipliers) CHECK(std::fabs(m) < 1e-12); // G = 0
    }
    SUBCASE("M = 0, F = 0: p(T) = delta E[x_T]") {
        LQSpec s;
        s.delta = 0.9;
        s.x0 = 1.0;
        s.A1 = 0.3;
        s.C1 = 0.5;
        s.A6 = 0.2;
        const TimeGrid grid(1.0, 1e-3);
        auto sol = lq::fixed_point_y0(s, 1.0, grid);
        auto adj = smp::assemble_adjoints(s, 1.0, sol);
        CHECK(adj.p.back() == doctest::Approx(0.9 * sol.mean.back()).epsilon(1e-10));
    }
    SUBCASE("delta = 0 is rejected by the Riccati route") {
        LQSpec s;
        s.delta = 0.0;
        const TimeGrid grid(1.0, 1e-2);
        CHECK_THROWS_AS(lq::fixed_point_y0(s, 1.0, grid), Error);
    }
    SUBCASE("jump-emphasis adjoints are the constants -1/2 and 0.8") {
        const TimeGrid grid(1.0, 1e-2);
        auto adj = smp::example2_adjoints(1.0, grid);
        CHECK(adj.q_at(0.37) == doctest::Approx(-0.5));
        CHECK(adj.p_at(0.37) == doctest::Approx(0.8));
    }
}

TEST_CASE("check_smp: optimum passes, perturbation fails with the predicted residual") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    Example2 ex = example2_spec(ms);
    SimConfig cfg;
    cfg.paths = 200;
    cfg.dt = 1e-3;
    cfg.seed = 11;
    cfg.exact_mean_rhs = [](double t, double m) { return -0.75 * 2.0 / (2.5 - 1.5 * t) * m; };
    auto ens = simulate(ex.spec, ex.progressive_optimal, {}, ms, cfg);
    auto bw = solve_mean(ex.spec, ens, ex.progressive_optimal, {});
    auto adj = smp::example2_adjoints(1.0, ens.grid());

    SUBCASE("optimal law passes all three parts") {
        auto rep = smp::check_smp(ens, adj, ex.progressive_optimal, 9, 1e-6, &bw);
        CHECK(rep.continuous.pass);
        CHECK(rep.jump.pass);
        CHECK(rep.impulse.pass);
        CHECK(rep.all_pass());
        CHECK(rep.continuous.residual < 1e-9);
        CHECK(rep.jump.residual < 1e-9);
        // singular split: jump points count realized events only
        long events = 0;
        ens.for_each_path([&](std::size_t, const Path& p) {
            for (const auto& nd : p.nodes)
                if (nd.jump_mark >= 0) ++events;
        });
        CHECK(rep.jump.points == events);
    }
    SUBCASE("shifted law fails the continuous part at 0.2") {
        ControlLaw shifted = ex.progressive_optimal;
        auto oc = ex.progressive_optimal.cont;
        auto oj = ex.progressive_optimal.jump;
        shifted.cont = [oc](double t, double x, double m, const MarkAtom& e) {
            return oc(t, x, m, e) + 0.1;
        };
        shifted.jump = [oj](double t, double x, double m, const MarkAtom& e) {
            return oj(t, x, m, e) + 0.1;
        };
        auto rep = smp::check_smp(ens, adj, shifted, 9, 1e-6, &bw);
        CHECK_FALSE(rep.continuous.pass);
        CHECK(rep.continuous.residual == doctest::Approx(0.2).epsilon(0.10));
        CHECK_FALSE(rep.all_pass());
        // JSON report carries verdicts
        const std::string js = rep.to_json();
        CHECK(js.find("FAIL") != std::string::npos);
    }
    SUBCASE("vacuous jump part when no events realize") {
        const MarkSpace tiny = MarkSpace::single(1.0, 1e-9);
        Example2 ex2 = example2_spec(tiny);
        SimConfig c2 = cfg;
        c2.paths = 20;
        c2.exact_mean_rhs = nullptr;
        auto ens2 = simulate(ex2.spec, ex2.progressive_optimal, {}, tiny, c2);
        auto adj2 = smp::example2_adjoints(1e-9, ens2.grid());
        auto rep = smp::check_smp(ens2, adj2, ex2.progressive_optimal, 9, 1e-6, nullptr);
        CHECK(rep.jump.pass);
        CHECK(rep.jump.points == 0);
        CHECK(rep.jump.note.find("0 events") != std::string::npos);
    }
}

TEST_CASE("check_smp on the generic LQ optimum, impulses included") {
    auto s = make_lq_setup(400, 1e-3, 21);
    auto ens = simulate(s.gspec, s.law, s.law.impulses, s.ms, s.cfg);
    auto bw = solve_mean(s.gspec, ens, s.law, s.law.impulses);
    auto rep = smp::check_smp(ens, s.adj, s.law, 9, 1e-6, &bw);
    CHECK(rep.all_pass());
    CHECK(rep.impulse.points > 0);
    CHECK(rep.impulse.residual < 1e-9); // M_i = pG + qH + eta_hat with G = 0
}

TEST_CASE("duality bracket") {
    SUBCASE("identical runs: exactly zero") {
        auto s = make_lq_setup(300, 2e-3, 31);
        auto base = simulate(s.gspec, s.law, s.law.impulses, s.ms, s.cfg);
        auto bw = solve_mean(s.gspec, base, s.law, s.law.impulses);
        auto r = smp::duality_residual(base, base, s.adj, bw, bw);
        CHECK(r.estimate == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("generic LQ perturbation directions stay inside the interval") {
        auto s = make_lq_setup(500, 1e-3, 32);
        // Picard means on every batch: the mean folds vary with the batch
        // seed, so the batch spread covers their noise
        s.cfg.exact_mean_rhs = nullptr;
        struct Dir { double shift; double tslope; double eta_shift; };
        for (const Dir d : {Dir{0.1, 0.0, 0.0}, Dir{0.0, 0.3, 0.2}, Dir{-0.2, 0.1, -0.1}}) {
            auto oc = s.law.cont, oj = s.law.jump;
            ControlLaw pert = s.law;
            pert.cont = [oc, d](double t, double x, double m, const MarkAtom& e) {
                return oc(t, x, m, e) + d.shift + d.tslope * t;
            };
            pert.jump = [oj, d](double t, double x, double m, const MarkAtom& e) {
                return oj(t, x, m, e) + d.shift + d.tslope * t;
            };
            ImpulseValues ip;
            auto rule = s.law.impulses.rule;
            ip.rule = [rule, d](int i, double tau) { return rule(i, tau) + d.eta_shift; };
            auto r = smp::duality_residual_batched(s.gspec, s.law, s.law.impulses, pert, ip,
                                                   s.ms, s.cfg, s.adj, 6);
            CHECK(r.pass);
            CHECK(std::fabs(r.hamiltonian_form) < 1e-3);
        }
    }
    SUBCASE("mismatched ensembles are rejected") {
        auto s = make_lq_setup(100, 2e-3, 33);
        auto base = simulate(s.gspec, s.law, s.law.impulses, s.ms, s.cfg);
        SimConfig other = s.cfg;
        other.seed = 999;
        auto p2 = simulate(s.gspec, s.law, s.law.impulses, s.ms, other);
        auto bw = solve_mean(s.gspec, base, s.law, s.law.impulses);
        CHECK_THROWS_AS(smp::duality_residual(base, p2, s.adj, bw, bw), Error);
    }
}

TEST_CASE("directional derivative check") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    Example2 ex = example2_spec(ms);
    SimConfig cfg;
    cfg.paths = 2000;
    cfg.dt = 1e-3;
    cfg.seed = 12;
    cfg.exact_mean_rhs = [](double t, double m) { return -0.75 * 2.0 / (2.5 - 1.5 * t) * m; };
    const TimeGrid grid(1.0, cfg.dt);
    auto adj = smp::example2_adjoints(1.0, grid);

    SUBCASE("zero direction: both sides vanish") {
        Direction dir{ex.progressive_optimal, {}};
        auto rep = smp::directional_derivative_check(ex.spec, ex.progressive_optimal, {}, dir,
                                                     {0.2, 0.1}, ms, cfg, adj);
        for (double v : rep.fd) CHECK(std::fabs(v) < 1e-12);
        for (double v : rep.jhat) CHECK(std::fabs(v) < 1e-12);
    }
    SUBCASE("quadratic cost: |FD - Jhat| decays with slope 2") {
        auto oc = ex.progressive_optimal.cont;
        ControlLaw v = ex.progressive_optimal;
        v.cont = [oc](double t, double x, double m, const MarkAtom& e) {
            return oc(t, x, m, e) + 1.0;
        };
        auto oj = ex.progressive_optimal.jump;
        v.jump = [oj](double t, double x, double m, const MarkAtom& e) {
            return oj(t, x, m, e) + 1.0;
        };
        Direction dir{v, {}};
        auto rep = smp::directional_derivative_check(ex.spec, ex.progressive_optimal, {}, dir,
                                                     {0.2, 0.1, 0.05, 0.025}, ms, cfg, adj);
        CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.15));
        // at the optimum the first-order term is nonnegative (up to CI)
        CHECK(rep.derivative >= -rep.derivative_ci);
    }
}

TEST_CASE("variation order") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SUBCASE("jump-emphasis example, state-independent direction: slope 2") {
        Example2 ex = example2_spec(ms);
        SimConfig cfg;
        cfg.paths = 800;
        cfg.dt = 2e-3;
        cfg.seed = 14;
        cfg.exact_mean_rhs = [](double t, double m) { return -0.75 * 2.0 / (2.5 - 1.5 * t) * m; };
        Direction dir{ControlLaw::constant(1.0, 1.0), {}};
        auto rep = smp::variation_order_check(ex.spec, ex.progressive_optimal, {}, dir,
                                              {0.2, 0.1, 0.05, 0.025}, ms, cfg);
        CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.10));
        // linear dynamics: remainder at solver tolerance
        for (double r : rep.remainder_sup_sq) CHECK(r < 1e-16);
    }
    SUBCASE("zero direction: all errors vanish") {
        GeneralSpec g = nonlinear_demo_spec();
        const ControlLaw law = ControlLaw::constant(0.1, 0.1);
        const ImpulseValues imp = ImpulseValues::of({0.2, -0.1});
        SimConfig cfg;
        cfg.paths = 100;
        cfg.dt = 5e-3;
        cfg.seed = 15;
        Direction dir{law, imp};
        auto rep = smp::variation_order_check(g, law, imp, dir, {0.2, 0.1}, ms, cfg);
        for (double v : rep.diff_sup_sq) CHECK(v == 0.0);
        for (double v : rep.remainder_sup_sq) CHECK(v == 0.0);
    }
    SUBCASE("smooth nonlinear spec: remainder ratio decreases") {
        GeneralSpec g = nonlinear_demo_spec();
        const ControlLaw law = ControlLaw::constant(0.1, 0.1);
        const ImpulseValues imp = ImpulseValues::of({0.2, -0.1});
        SimConfig cfg;
        cfg.paths = 400;
        cfg.dt = 2e-3;
        cfg.seed = 16;
        Direction dir{ControlLaw::constant(1.1, 1.1), ImpulseValues::of({0.7, 0.4})};
        auto rep = smp::variation_order_check(g, law, imp, dir, {0.2, 0.1, 0.05, 0.025}, ms, cfg);
        CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.10));
        CHECK(rep.ratio_decreasing);
    }
}
