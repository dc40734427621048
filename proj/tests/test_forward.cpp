#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfjump/forward.hpp"
#include "mfjump/model.hpp"

using namespace mfjump;

namespace {

GeneralSpec bare_spec() {
    GeneralSpec g;
    g.T = 1.0;
    auto zero = Coeff([](double, double, double, double, const MarkAtom&) { return 0.0; });
    g.b = zero; g.sigma = zero; g.gamma = zero; g.c = zero;
    g.b_x = zero; g.b_m = zero; g.b_u = zero;
    g.sigma_x = zero; g.sigma_m = zero; g.sigma_u = zero;
    g.gamma_x = zero; g.gamma_m = zero; g.gamma_u = zero;
    g.c_x = zero; g.c_m = zero; g.c_u = zero;
    g.diffusion_is_zero = true;
    g.g = [](double, double, double, double, double, double, double, double, const MarkAtom&) {
        return 0.0;
    };
    g.driver_affine = true;
    g.g0 = zero;
    g.h = [](double xT, double) { return xT; };
    g.h_x = [](double, double) { return 1.0; };
    g.h_m = [](double, double) { return 0.0; };
    g.l = [](double, double, double, double, double, const MarkAtom&) { return 0.0; };
    g.f = g.l;
    g.phi_T = [](double, double) { return 0.0; };
    g.phi_T_x = g.phi_T; g.phi_T_m = g.phi_T;
    g.phi0 = [](double) { return 0.0; };
    g.phi0_y = g.phi0;
    g.psi = [](double, double) { return 0.0; };
    g.psi_eta = g.psi;
    g.G = 0.0;
    g.H = 0.0;
    return g;
}

SimConfig quick_cfg(int paths, double dt, std::uint64_t seed) {
    SimConfig c;
    c.paths = paths;
    c.dt = dt;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("zero dynamics keep every path at x0") {
    GeneralSpec g = bare_spec();
    g.x0 = 0.7;
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    auto ens = simulate(g, ControlLaw::constant(0.3, -0.3), {}, ms, quick_cfg(20, 0.05, 9));
    ens.for_each_path([&](std::size_t, const Path& p) {
        for (const auto& nd : p.nodes) {
            CHECK(nd.x == 0.7);
            CHECK(nd.x_left == 0.7);
        }
    });
    CHECK(ens.mean().back() == doctest::Approx(0.7));
}

TEST_CASE("unit drift per unit mass integrates exactly to T") {
    GeneralSpec g = bare_spec();
    g.b = [](double, double, double, double, const MarkAtom&) { return 1.0; };
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    auto ens = simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(10, 0.01, 4));
    ens.for_each_path([&](std::size_t, const Path& p) {
        CHECK(p.nodes.back().x == doctest::Approx(1.0).epsilon(1e-12));
    });
}

TEST_CASE("gamma = 1 counts the Poisson measure pathwise") {
    GeneralSpec g = bare_spec();
    g.gamma = [](double, double, double, double, const MarkAtom&) { return 1.0; };
    const MarkSpace ms = MarkSpace::single(1.0, 2.0);
    auto ens = simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(200, 0.01, 21));
    ens.for_each_path([&](std::size_t, const Path& p) {
        CHECK(p.nodes.back().x == doctest::Approx(static_cast<double>(p.stream.count())));
    });
}

TEST_CASE("jump-emphasis optimum: continuous paths hitting X1 = 0.4") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    Example2 ex = example2_spec(ms);
    SimConfig cfg = quick_cfg(300, 1e-3, 17);
    cfg.exact_mean_rhs = [](double t, double m) {
        return -0.75 * 2.0 / (2.5 - 1.5 * t) * m;
    };
    auto ens = simulate(ex.spec, ex.progressive_optimal, {}, ms, cfg);
    ens.for_each_path([&](std::size_t, const Path& p) {
        for (const auto& nd : p.nodes)
            if (nd.jump_mark >= 0) CHECK(std::fabs(nd.x - nd.x_left) < 1e-14);
        // Euler telescopes for this loop, so X1 is exact up to roundoff
        CHECK(p.nodes.back().x == doctest::Approx(0.4).epsilon(1e-10));
    });
    // dt halving moves X1 by (much) less than C dt
    SimConfig cfg2 = cfg;
    cfg2.dt = 5e-4;
    auto ens2 = simulate(ex.spec, ex.progressive_optimal, {}, ms, cfg2);
    CHECK(std::fabs(ens2.mean().back() - ens.mean().back()) <= 1.0 * cfg.dt);
}

TEST_CASE("jump cancellation whenever gamma = -c as functions") {
    GeneralSpec g = bare_spec();
    g.gamma = [](double, double x, double, double u, const MarkAtom& e) {
        return 0.1 * x + 0.3 * u + 0.05 * e.value;
    };
    g.c = [](double, double x, double, double u, const MarkAtom& e) {
        return -(0.1 * x + 0.3 * u + 0.05 * e.value);
    };
    g.x0 = 1.0;
    const MarkSpace ms({{"a", 1.0, 1.0}, {"b", -2.0, 1.0}});
    auto ens = simulate(g, ControlLaw::constant(0.5, -0.2), {}, ms, quick_cfg(100, 0.01, 33));
    long events = 0;
    ens.for_each_path([&](std::size_t, const Path& p) {
        for (const auto& nd : p.nodes)
            if (nd.jump_mark >= 0) {
                ++events;
                CHECK(std::fabs(nd.x - nd.x_left) < 1e-14);
            }
    });
    CHECK(events > 0);
}

TEST_CASE("Picard mean is consistent with the ensemble average") {
    GeneralSpec g = nonlinear_demo_spec(); // has mean coupling b_m = 0.2
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg = quick_cfg(3000, 5e-3, 12);
    cfg.picard_tol = 1e-7;
    auto ens = simulate(g, ControlLaw::constant(0.1, 0.1), ImpulseValues::of({0.2, -0.1}), ms, cfg);
    CHECK(ens.picard_iterations() > 1);
    CHECK(ens.picard_residual() < 1e-7);

    const std::size_t n = ens.grid().size();
    std::vector<double> acc(n, 0.0);
    ens.for_each_path([&](std::size_t, const Path& p) {
        // serial accumulation is fine at this size
        std::size_t ti = 0;
        for (const auto& nd : p.nodes) {
            while (ti < n && ens.grid().node(ti) < nd.t) ++ti;
            if (ti < n && ens.grid().node(ti) == nd.t) acc[ti] += nd.x;
        }
    });
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        worst = std::max(worst, std::fabs(acc[k] / ens.paths() - ens.mean()[k]));
    CHECK(worst <= 1e-7 + 1e-12);
}

TEST_CASE("stability: additive drift difference scales quadratically in S2") {
    // two systems differing by a constant drift d: sup-distance^2 should be
    // ~ (d lam T)^2 with a stable constant across d and seeds
    GeneralSpec g = nonlinear_demo_spec();
    g.impulses = ImpulseSchedule::none();
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    const ControlLaw law = ControlLaw::constant(0.1, 0.1);

    std::vector<double> ratios;
    for (std::uint64_t seed : {5ULL, 6ULL}) {
        for (double d : {0.05, 0.1, 0.2}) {
            GeneralSpec gd = g;
            const double dd = d;
            auto b0 = g.b;
            gd.b = [b0, dd](double t, double x, double m, double u, const MarkAtom& e) {
                return b0(t, x, m, u, e) + dd;
            };
            const SimConfig cfg = quick_cfg(400, 5e-3, seed);
            auto e1 = simulate(g, law, {}, ms, cfg);
            auto e2 = simulate(gd, law, {}, ms, cfg);
            std::vector<double> sup(static_cast<std::size_t>(cfg.paths), 0.0);
            e1.for_each_path([&](std::size_t p, const Path& bp) {
                const auto pn = e2.replay_path(p);
                double s = 0.0;
                for (std::size_t k = 0; k < bp.nodes.size(); ++k) {
                    const double diff = pn[k].x - bp.nodes[k].x;
                    s = std::max(s, diff * diff);
                }
                sup[p] = s;
            });
            double mean = 0.0;
            for (double v : sup) mean += v;
            mean /= static_cast<double>(sup.size());
            ratios.push_back(mean / (d * d)); // (int |d| lam dt)^2 = d^2
        }
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo < 2.0); // fitted constant stable across scales and seeds
}

TEST_CASE("common random numbers: identical ensembles for any thread count") {
    GeneralSpec g = nonlinear_demo_spec();
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig c1 = quick_cfg(500, 5e-3, 77);
    c1.threads = 1;
    SimConfig c8 = c1;
    c8.threads = 8;
    auto e1 = simulate(g, ControlLaw::constant(0.1, 0.1), ImpulseValues::of({0.2, -0.1}), ms, c1);
    auto e8 = simulate(g, ControlLaw::constant(0.1, 0.1), ImpulseValues::of({0.2, -0.1}), ms, c8);
    REQUIRE(e1.mean().size() == e8.mean().size());
    for (std::size_t k = 0; k < e1.mean().size(); ++k) CHECK(e1.mean()[k] == e8.mean()[k]);
    const auto p1 = e1.replay_path(3);
    const auto p8 = e8.replay_path(3);
    REQUIRE(p1.size() == p8.size());
    for (std::size_t k = 0; k < p1.size(); ++k) CHECK(p1[k].x == p8[k].x);
}

TEST_CASE("first variation") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    GeneralSpec g = nonlinear_demo_spec();
    const ControlLaw law = ControlLaw::constant(0.1, 0.1);
    const ImpulseValues imp = ImpulseValues::of({0.2, -0.1});
    const SimConfig cfg = quick_cfg(300, 5e-3, 3);
    auto base = simulate(g, law, imp, ms, cfg);

    SUBCASE("zero direction gives the zero process") {
        Direction dir{law, imp};
        auto var = simulate_first_variation(g, base, dir, 0.3, 0.3);
        CHECK(var.sup_sq() == 0.0);
    }
    SUBCASE("x1 scales exactly linearly in (eps1, eps2)") {
        Direction dir{ControlLaw::constant(1.1, 1.1), ImpulseValues::of({0.7, 0.4})};
        auto v1 = simulate_first_variation(g, base, dir, 1.0, 1.0);
        auto v2 = simulate_first_variation(g, base, dir, 0.25, 0.25);
        CHECK(v2.sup_sq() == doctest::Approx(v1.sup_sq() / 16.0).epsilon(1e-10));
    }
    SUBCASE("linear dynamics leave no first-order remainder") {
        // LQ-style linear system: x^eps - x_hat - x^1 vanishes to roundoff
        LQSpec lin;
        lin.T = 1.0;
        lin.x0 = 0.5;
        lin.delta = 1.0;
        lin.A1 = 0.3; lin.B1 = 0.2; lin.C1 = 1.0;
        lin.A2 = 0.2; lin.C2 = 0.4;
        lin.A3 = 0.1; lin.C3 = 0.5;
        lin.A4 = 0.15; lin.C4 = 0.3;
        GeneralSpec gl = to_general(lin);
        auto b2 = simulate(gl, law, {}, ms, cfg);
        Direction dir{ControlLaw::constant(0.9, 0.6), {}};
        const double eps = 0.25;
        auto var = simulate_first_variation(gl, b2, dir, eps, eps);
        auto pert = simulate(gl, blend_law(law, dir.v, eps), {}, ms, cfg);
        double worst = 0.0;
        var.for_each_path([&](std::size_t p, const Path& bp, const std::vector<double>& x1) {
            const auto pn = pert.replay_path(p);
            for (std::size_t k = 0; k < bp.nodes.size(); ++k)
                worst = std::max(worst, std::fabs(pn[k].x - bp.nodes[k].x - x1[k]));
        });
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("path norms") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SUBCASE("zero state") {
        GeneralSpec g = bare_spec();
        auto ens = simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(10, 0.01, 2));
        const auto n = path_norms(ens);
        CHECK(n.sup_sq == 0.0);
        CHECK(n.integral_sq == 0.0);
    }
    SUBCASE("constant one") {
        GeneralSpec g = bare_spec();
        g.x0 = 1.0;
        auto ens = simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(10, 0.01, 2));
        const auto n = path_norms(ens);
        CHECK(n.sup_sq == doctest::Approx(1.0));
        CHECK(n.integral_sq == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("deterministic ramp x_t = t") {
        GeneralSpec g = bare_spec();
        g.b = [](double, double, double, double, const MarkAtom&) { return 1.0; };
        auto ens = simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(10, 1e-3, 2));
        const auto n = path_norms(ens);
        CHECK(n.sup_sq == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(n.integral_sq == doctest::Approx(1.0 / 3.0).epsilon(5e-3)); // left-point quadrature
    }
}

TEST_CASE("degenerate mass: no jumps, pure diffusion path") {
    GeneralSpec g = bare_spec();
    g.diffusion_is_zero = false;
    g.sigma = [](double, double, double, double, const MarkAtom&) { return 0.5; };
    g.b = [](double, double, double, double, const MarkAtom&) { return 0.2; };
    MarkSpace empty; // lambda(E) = 0: simulator skips jump machinery
    auto ens = simulate(g, ControlLaw::constant(0, 0), {}, empty, quick_cfg(50, 0.01, 8));
    ens.for_each_path([&](std::size_t, const Path& p) {
        CHECK(p.stream.count() == 0);
        // no mark atoms: drift and diffusion rows are empty sums, so x stays x0
        CHECK(p.nodes.back().x == doctest::Approx(g.x0));
    });
}

TEST_CASE("superlinear mean coupling trips the divergence detector") {
    GeneralSpec g = bare_spec();
    g.x0 = 2.0;
    g.b = [](double, double, double m, double, const MarkAtom&) { return m * m; };
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg = quick_cfg(50, 0.01, 13);
    cfg.picard_max = 50;
    CHECK_THROWS_AS(simulate(g, ControlLaw::constant(0, 0), {}, ms, cfg), Error);
}

TEST_CASE("impulses at the k-th jump time") {
    GeneralSpec g = bare_spec();
    g.G = 1.0;
    g.impulses = ImpulseSchedule::at_kth_jumps({1, 3});
    const ImpulseValues imp = ImpulseValues::of({5.0, 2.0});
    const MarkSpace ms = MarkSpace::single(1.0, 2.0);
    auto ens = simulate(g, ControlLaw::constant(0, 0), imp, ms, quick_cfg(200, 0.01, 19));
    ens.for_each_path([&](std::size_t, const Path& p) {
        double expect = 0.0;
        if (p.stream.count() >= 1) expect += 5.0;
        if (p.stream.count() >= 3) expect += 2.0;
        CHECK(p.nodes.back().x == doctest::Approx(expect));
        for (const auto& nd : p.nodes)
            if (nd.impulse >= 0) CHECK(nd.jump_mark >= 0); // epoch rides a jump node
    });
}

TEST_CASE("invalid inputs are rejected") {
    GeneralSpec g = bare_spec();
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    CHECK_THROWS_AS(simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(0, 0.01, 1)), Error);
    CHECK_THROWS_AS(simulate(g, ControlLaw::constant(0, 0), {}, ms, quick_cfg(10, 0.0, 1)), Error);
    CHECK_THROWS_AS(simulate(g, ControlLaw{}, {}, ms, quick_cfg(10, 0.01, 1)), Error);
}
