#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "mfjump/lq.hpp"
#include "mfjump/model.hpp"

using namespace mfjump;

TEST_CASE("validate: LQ specs") {
    SUBCASE("all-zero spec with delta = 1 is valid") {
        LQSpec s;
        s.delta = 1.0;
        CHECK(validate(s).ok());
    }
    SUBCASE("unordered impulse times are rejected") {
        LQSpec s;
        s.delta = 1.0;
        s.impulses = ImpulseSchedule::at_times({0.5, 0.3});
        const auto rep = validate(s);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.issues.front().code == Errc::BadImpulseOrder);
        CHECK_THROWS_AS(rep.throw_if_failed(), Error);
    }
    SUBCASE("non-finite coefficient curve is reported") {
        LQSpec s;
        s.delta = 1.0;
        s.A1 = Curve(std::function<double(double)>(
            [](double t) { return t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0; }));
        const auto rep = validate(s);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.issues.front().code == Errc::NonFiniteCoefficient);
    }
    SUBCASE("validation is idempotent") {
        LQSpec s;
        s.delta = 1.0;
        s.impulses = ImpulseSchedule::at_times({0.9, 0.2});
        const auto r1 = validate(s);
        const auto r2 = validate(s);
        CHECK(r1.issues.size() == r2.issues.size());
        CHECK(r1.to_string() == r2.to_string());
    }
}

TEST_CASE("validate: general specs probe evaluators") {
    GeneralSpec g = nonlinear_demo_spec();
    CHECK(validate(g).ok());
    g.b = [](double, double x, double, double, const MarkAtom&) {
        return x > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    CHECK_FALSE(validate(g).ok());
}

TEST_CASE("curves: constants, tables, interpolation") {
    Curve c(2.5);
    CHECK(c(0.3) == 2.5);
    Curve tab(std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.5, 2.0}, {1.0, 3.0}});
    CHECK(tab(0.25) == doctest::Approx(1.5));
    CHECK(tab(-1.0) == 1.0);
    CHECK(tab(2.0) == 3.0);
}

TEST_CASE("LQ spec JSON round trip") {
    LQSpec s;
    s.T = 2.0;
    s.x0 = 0.3;
    s.delta = 1.5;
    s.M = 0.25;
    s.A1 = 0.7;
    s.C3 = Curve(std::vector<std::pair<double, double>>{{0.0, 0.1}, {2.0, 0.4}});
    s.impulses = ImpulseSchedule::at_times({0.5, 1.5});
    const LQSpec back = lqspec_from_json(lqspec_to_json(s));
    CHECK(back.T == doctest::Approx(2.0));
    CHECK(back.delta == doctest::Approx(1.5));
    CHECK(back.A1(0.3) == doctest::Approx(0.7));
    CHECK(back.C3(1.0) == doctest::Approx(0.25));
    REQUIRE(back.impulses.times.size() == 2);
    CHECK(back.impulses.times[1] == doctest::Approx(1.5));
}

TEST_CASE("example builders") {
    SUBCASE("general template builder validates with constant coefficients") {
        LQSpec s = example1_spec();
        s.A1 = 1.0; s.B1 = 1.0; s.C1 = 1.0; s.C5 = 1.0; s.F1 = 1.0;
        s.delta = 1.0;
        CHECK(validate(s).ok());
    }
    SUBCASE("jump-emphasis example reproduces its optimal data at lambda = 1") {
        const MarkSpace ms = MarkSpace::single(1.0, 1.0);
        Example2 ex = example2_spec(ms);
        CHECK(ex.lambda_total == doctest::Approx(1.0));
        // closed loop X_t = (2.5 - 1.5 t)/2.5, p = Ptilde X = 0.8 constant
        const MarkAtom& e = ms.atom(0);
        for (double t : {0.0, 0.3, 0.7, 1.0}) {
            const double X = (2.5 - 1.5 * t) / 2.5;
            CHECK(ex.progressive_optimal.cont(t, X, X, e) == doctest::Approx(-0.4));
            CHECK(ex.progressive_optimal.jump(t, X, X, e) == doctest::Approx(-0.2));
        }
        // predictable law is one feedback evaluated with left limits
        const double Q0 = 6.0 / 7.0;
        CHECK(ex.predictable_optimal.cont(0.0, 1.0, 1.0, e) == doctest::Approx(-Q0 / 3.0));
        CHECK(ex.predictable_optimal.jump(0.0, 1.0, 1.0, e) ==
              doctest::Approx(ex.predictable_optimal.cont(0.0, 1.0, 1.0, e)));
        // cost ingredients of the displayed problem
        CHECK(ex.spec.l(0.1, 0.0, 0.0, 0.0, 2.0, e) == doctest::Approx(2.0));
        CHECK(ex.spec.f(0.1, 0.0, 0.0, 0.0, 2.0, e) == doctest::Approx(8.0));
        CHECK(ex.spec.phi_T(0.4, 0.4) == doctest::Approx(0.08));
        CHECK(ex.spec.phi0(0.32) == doctest::Approx(0.16));
        CHECK(ex.spec.h(0.4, 0.4) == doctest::Approx(0.16));
        CHECK(ex.spec.x0 == 1.0);
    }
    SUBCASE("progressive beats predictable for every positive mass") {
        for (double lam : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
            const double jp = lq::example2_cost_progressive(lam);
            const double jq = lq::example2_cost_predictable(lam);
            CHECK(jp < jq);
        }
    }
}

TEST_CASE("control law helpers") {
    const MarkAtom e{"e", 1.0, 1.0};
    ControlLaw c = ControlLaw::constant(0.5, -0.5);
    CHECK(c.cont(0, 0, 0, e) == 0.5);
    CHECK(c.jump(0, 0, 0, e) == -0.5);

    ControlLaw v = ControlLaw::constant(1.5, 0.5);
    ControlLaw b = blend_law(c, v, 0.25);
    CHECK(b.cont(0, 0, 0, e) == doctest::Approx(0.75));
    CHECK(b.jump(0, 0, 0, e) == doctest::Approx(-0.25));

    ImpulseValues hat = ImpulseValues::of({1.0, 2.0});
    ImpulseValues xi = ImpulseValues::of({3.0, 0.0});
    ImpulseValues bl = blend_impulses(hat, xi, 0.5);
    CHECK(bl.value(0, 0.1) == doctest::Approx(2.0));
    CHECK(bl.value(1, 0.2) == doctest::Approx(1.0));

    // unbound impulse epoch acts as zero
    ImpulseValues none;
    CHECK(none.value(3, 0.5) == 0.0);
}
