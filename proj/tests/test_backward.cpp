#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfjump/backward.hpp"
#include "mfjump/forward.hpp"
#include "mfjump/model.hpp"

using namespace mfjump;

namespace {

GeneralSpec plain_spec() {
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
    g.Fy = 0.0; g.Fybar = 0.0; g.Kz = 0.0;
    g.h = [](double, double) { return 0.0; };
    g.l = [](double, double, double, double, double, const MarkAtom&) { return 0.0; };
    g.f = g.l;
    g.phi_T = [](double, double) { return 0.0; };
    g.phi0 = [](double) { return 0.0; };
    g.psi = [](double, double) { return 0.0; };
    g.G = 0.0;
    g.H = 0.0;
    return g;
}

} // namespace

TEST_CASE("zero driver, identity terminal: y0 is the mean of x_T") {
    GeneralSpec g = plain_spec();
    g.x0 = 0.0;
    g.sigma = [](double, double, double, double, const MarkAtom&) { return 0.4; };
    g.diffusion_is_zero = false;
    g.h = [](double xT, double) { return xT; };
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 4000;
    cfg.dt = 0.01;
    cfg.seed = 31;
    const ControlLaw law = ControlLaw::constant(0, 0);
    auto ens = simulate(g, law, {}, ms, cfg);
    auto bw = solve_mean(g, ens, law, {});

    std::vector<double> xT(static_cast<std::size_t>(cfg.paths), 0.0);
    ens.for_each_path([&](std::size_t p, const Path& path) { xT[p] = path.nodes.back().x; });
    double mean = 0.0;
    for (double v : xT) mean += v;
    mean /= static_cast<double>(xT.size());
    CHECK(bw.y0 == doctest::Approx(mean).epsilon(1e-12));
    CHECK(bw.ybar.back() == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("linear driver oracle: y0 = e^{-T}") {
    // dy = -F1 y lam dt with F1 = -1, lam = 1, h = 1: ybar(t) = e^{-(T-t) * 1 * ... }
    // sign per the backward ODE: ybar(t) = ybar(T) e^{F1 lam (T-t)} -> y0 = e^{-1}
    GeneralSpec g = plain_spec();
    g.Fy = -1.0;
    g.h = [](double, double) { return 1.0; };
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 50;
    cfg.dt = 1e-3;
    cfg.seed = 5;
    const ControlLaw law = ControlLaw::constant(0, 0);
    auto ens = simulate(g, law, {}, ms, cfg);
    auto bw = solve_mean(g, ens, law, {});
    CHECK(bw.y0 == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("single impulse bookkeeping: y0 = -H eta") {
    GeneralSpec g = plain_spec();
    g.H = 1.0;
    g.impulses = ImpulseSchedule::at_times({0.5});
    const ImpulseValues imp = ImpulseValues::of({2.0});
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 50;
    cfg.dt = 0.01;
    cfg.seed = 6;
    const ControlLaw law = ControlLaw::constant(0, 0);
    auto ens = simulate(g, law, imp, ms, cfg);
    auto bw = solve_mean(g, ens, law, imp);
    CHECK(bw.y0 == doctest::Approx(-2.0).epsilon(1e-12));
    // jump of the mean curve across the epoch
    const auto& grid = ens.grid();
    const std::size_t k = grid.locate(0.5);
    CHECK(bw.ybar[k] - bw.ybar_left[k] == doctest::Approx(2.0).epsilon(1e-12));

    auto rep = y0_via_representation(ens, g);
    CHECK(rep.y0 == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("jump-emphasis example: y0 = 0.32 and the two routes agree") {
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    Example2 ex = example2_spec(ms);
    SimConfig cfg;
    cfg.paths = 4000;
    cfg.dt = 1e-3;
    cfg.seed = 42;
    cfg.exact_mean_rhs = [](double t, double m) { return -0.75 * 2.0 / (2.5 - 1.5 * t) * m; };
    auto ens = simulate(ex.spec, ex.progressive_optimal, {}, ms, cfg);
    auto bw = solve_mean(ex.spec, ens, ex.progressive_optimal, {});
    CHECK(bw.y0 == doctest::Approx(0.32).epsilon(2e-3));

    auto rep = y0_via_representation(ens, ex.spec);
    CHECK(rep.y0 == doctest::Approx(0.32).epsilon(2e-3));
    // tower property: both estimators of y0 agree within the joint interval
    CHECK(std::fabs(rep.y0 - bw.y0) <= rep.ci + bw.ci_half_width + 1e-9);
}

TEST_CASE("impulse linearity: doubling eta doubles the impulse shift") {
    GeneralSpec g = plain_spec();
    g.H = Curve(std::vector<std::pair<double, double>>{{0.0, 0.5}, {1.0, 1.5}});
    g.impulses = ImpulseSchedule::at_times({0.3, 0.8});
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 20;
    cfg.dt = 0.01;
    cfg.seed = 9;
    const ControlLaw law = ControlLaw::constant(0, 0);

    auto y0_for = [&](std::vector<double> etas) {
        const ImpulseValues iv = ImpulseValues::of(std::move(etas));
        auto ens = simulate(g, law, iv, ms, cfg);
        return solve_mean(g, ens, law, iv).y0;
    };
    const double base = y0_for({0.0, 0.0});
    const double once = y0_for({1.0, -0.5});
    const double twice = y0_for({2.0, -1.0});
    CHECK(twice - base == doctest::Approx(2.0 * (once - base)).epsilon(1e-12));
}

TEST_CASE("precondition failures") {
    GeneralSpec g = plain_spec();
    g.driver_affine = false;
    const MarkSpace ms = MarkSpace::single(1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 5;
    cfg.dt = 0.1;
    cfg.seed = 1;
    const ControlLaw law = ControlLaw::constant(0, 0);
    auto ens = simulate(g, law, {}, ms, cfg);
    CHECK_THROWS_AS(solve_mean(g, ens, law, {}), Error);
    CHECK_THROWS_AS(y0_via_representation(ens, g), Error);

    // y-dependent driver without a solved mean is rejected by the
    // representation route
    GeneralSpec gy = plain_spec();
    gy.Fy = -1.0;
    auto ens2 = simulate(gy, law, {}, ms, cfg);
    CHECK_THROWS_AS(y0_via_representation(ens2, gy), Error);
    auto bw = solve_mean(gy, ens2, law, {});
    auto rep = y0_via_representation(ens2, gy, &bw);
    CHECK(rep.y0 == doctest::Approx(bw.y0).epsilon(1e-6));
}
