#include "mfjump/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace mfjump {

namespace {

const MarkAtom kProbeAtomA{"probe_a", 1.0, 1.0};
const MarkAtom kProbeAtomB{"probe_b", -0.5, 1.0};

bool curve_finite_on(const Curve& c, double T, std::string* where) {
    for (int k = 0; k <= 100; ++k) {
        const double t = T * k / 100.0;
        if (!std::isfinite(c(t))) {
            if (where) *where = "t=" + std::to_string(t);
            return false;
        }
    }
    return true;
}

void check_impulses(const ImpulseSchedule& s, double T, ValidationReport& rep) {
    if (s.mode == ImpulseSchedule::Mode::DeterministicTimes) {
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            if (!(s.times[i] > 0.0) || !(s.times[i] < T))
                rep.issues.push_back({Errc::BadImpulseOrder,
                                      "impulse time " + std::to_string(s.times[i]) +
                                          " outside (0, T)"});
            if (i > 0 && !(s.times[i] > s.times[i - 1]))
                rep.issues.push_back({Errc::BadImpulseOrder, "impulse times not strictly increasing"});
        }
    } else if (s.mode == ImpulseSchedule::Mode::KthJumpTimes) {
        for (std::size_t i = 0; i < s.indices.size(); ++i) {
            if (s.indices[i] < 1)
                rep.issues.push_back({Errc::BadImpulseOrder, "jump index must be >= 1"});
            if (i > 0 && !(s.indices[i] > s.indices[i - 1]))
                rep.issues.push_back({Errc::BadImpulseOrder, "jump indices not strictly increasing"});
        }
    }
}

// central finite difference in u with relative step
template <typename F>
double fd_u(const F& f, double u, const std::function<double(double)>& eval) {
    (void)f;
    const double h = 1e-6 * (1.0 + std::fabs(u));
    return (eval(u + h) - eval(u - h)) / (2.0 * h);
}

} // namespace

ImpulseSchedule ImpulseSchedule::at_times(std::vector<double> ts) {
    ImpulseSchedule s;
    s.mode = Mode::DeterministicTimes;
    s.times = std::move(ts);
    return s;
}

ImpulseSchedule ImpulseSchedule::at_kth_jumps(std::vector<int> ks) {
    ImpulseSchedule s;
    s.mode = Mode::KthJumpTimes;
    s.indices = std::move(ks);
    return s;
}

ImpulseValues ImpulseValues::of(std::vector<double> v) {
    ImpulseValues iv;
    iv.values = std::move(v);
    return iv;
}

ControlLaw ControlLaw::constant(double u_cont, double u_jump) {
    ControlLaw law;
    law.cont = [u_cont](double, double, double, const MarkAtom&) { return u_cont; };
    law.jump = [u_jump](double, double, double, const MarkAtom&) { return u_jump; };
    return law;
}

ControlLaw ControlLaw::predictable(std::function<double(double, double, double, const MarkAtom&)> f) {
    ControlLaw law;
    law.cont = f;
    law.jump = std::move(f);
    return law;
}

ControlLaw ControlLaw::progressive(std::function<double(double, double, double, const MarkAtom&)> f_cont,
                                   std::function<double(double, double, double, const MarkAtom&)> f_jump) {
    ControlLaw law;
    law.cont = std::move(f_cont);
    law.jump = std::move(f_jump);
    return law;
}

ControlLaw blend_law(const ControlLaw& hat, const ControlLaw& v, double eps) {
    ControlLaw out;
    auto hc = hat.cont, vc = v.cont;
    out.cont = [hc, vc, eps](double t, double x, double m, const MarkAtom& e) {
        const double a = hc(t, x, m, e);
        return a + eps * (vc(t, x, m, e) - a);
    };
    auto hj = hat.jump, vj = v.jump;
    out.jump = [hj, vj, eps](double t, double x, double m, const MarkAtom& e) {
        const double a = hj(t, x, m, e);
        return a + eps * (vj(t, x, m, e) - a);
    };
    out.u_lo = hat.u_lo;
    out.u_hi = hat.u_hi;
    out.impulses = hat.impulses;
    return out;
}

ImpulseValues blend_impulses(const ImpulseValues& hat, const ImpulseValues& xi, double eps) {
    ImpulseValues out;
    out.rule = [hat, xi, eps](int i, double tau) {
        const double a = hat.value(static_cast<std::size_t>(i), tau);
        return a + eps * (xi.value(static_cast<std::size_t>(i), tau) - a);
    };
    return out;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) os << errc_name(i.code) << ": " << i.detail << "\n";
    return os.str();
}

void ValidationReport::throw_if_failed() const {
    if (!ok()) throw Error(issues.front().code, to_string());
}

ValidationReport validate(const MarkSpace& ms) {
    ValidationReport rep;
    if (ms.empty())
        rep.issues.push_back({Errc::EmptyMarkSpace, "mark space has no atoms"});
    return rep;
}

ValidationReport validate(const LQSpec& spec) {
    ValidationReport rep;
    if (!(spec.T > 0.0))
        rep.issues.push_back({Errc::ConfigError, "horizon T must be positive"});
    if (!std::isfinite(spec.x0))
        rep.issues.push_back({Errc::NonFiniteCoefficient, "x0 not finite"});
    if (spec.delta < 0.0 || !std::isfinite(spec.delta))
        rep.issues.push_back({Errc::DeltaNonPositive, "delta must be >= 0"});

    struct Named { const char* name; const Curve* c; };
    const Named curves[] = {
        {"A1", &spec.A1}, {"A2", &spec.A2}, {"A3", &spec.A3}, {"A4", &spec.A4},
        {"A5", &spec.A5}, {"A6", &spec.A6}, {"A7", &spec.A7},
        {"B1", &spec.B1}, {"B2", &spec.B2}, {"B3", &spec.B3}, {"B4", &spec.B4},
        {"B5", &spec.B5}, {"B6", &spec.B6}, {"B7", &spec.B7},
        {"C1", &spec.C1}, {"C2", &spec.C2}, {"C3", &spec.C3}, {"C4", &spec.C4}, {"C5", &spec.C5},
        {"F1", &spec.F1}, {"F2", &spec.F2}, {"F3", &spec.F3},
        {"Fb1", &spec.Fb1}, {"Fb2", &spec.Fb2}, {"Fb3", &spec.Fb3},
        {"K", &spec.K}, {"G", &spec.G}, {"H", &spec.H},
    };
    for (const auto& n : curves) {
        std::string where;
        if (spec.T > 0.0 && !curve_finite_on(*n.c, spec.T, &where))
            rep.issues.push_back({Errc::NonFiniteCoefficient,
                                  std::string(n.name) + " non-finite at " + where});
    }
    check_impulses(spec.impulses, spec.T, rep);
    return rep;
}

ValidationReport validate(const GeneralSpec& spec) {
    ValidationReport rep;
    if (!(spec.T > 0.0))
        rep.issues.push_back({Errc::ConfigError, "horizon T must be positive"});
    if (!std::isfinite(spec.x0))
        rep.issues.push_back({Errc::NonFiniteCoefficient, "x0 not finite"});
    struct Named { const char* name; const Coeff* f; };
    const Named coeffs[] = {{"b", &spec.b}, {"sigma", &spec.sigma}, {"gamma", &spec.gamma}, {"c", &spec.c}};
    const double xs[] = {-1.0, 0.0, 1.0, spec.x0};
    const double us[] = {-1.0, 0.0, 1.0};
    for (const auto& n : coeffs) {
        if (!*n.f) {
            rep.issues.push_back({Errc::NonFiniteCoefficient, std::string(n.name) + " evaluator missing"});
            continue;
        }
        for (int k = 0; k <= 4 && spec.T > 0.0; ++k) {
            const double t = spec.T * k / 4.0;
            for (double x : xs)
                for (double u : us)
                    for (const MarkAtom* a : {&kProbeAtomA, &kProbeAtomB})
                        if (!std::isfinite((*n.f)(t, x, x, u, *a))) {
                            rep.issues.push_back({Errc::NonFiniteCoefficient,
                                                  std::string(n.name) + " non-finite at probe"});
                            goto next_coeff;
                        }
        }
    next_coeff:;
    }
    check_impulses(spec.impulses, spec.T, rep);
    return rep;
}

GeneralSpec to_general(const LQSpec& s) {
    GeneralSpec g;
    g.T = s.T;
    g.x0 = s.x0;

    auto lin = [](Curve a, Curve bm, Curve cu) {
        return Coeff([a, bm, cu](double t, double x, double m, double u, const MarkAtom&) {
            return a(t) * x + bm(t) * m + cu(t) * u;
        });
    };
    auto curve_of_t = [](Curve c) {
        return Coeff([c](double t, double, double, double, const MarkAtom&) { return c(t); });
    };

    g.b = lin(s.A1, s.B1, s.C1);
    g.b_x = curve_of_t(s.A1); g.b_m = curve_of_t(s.B1); g.b_u = curve_of_t(s.C1);
    g.sigma = lin(s.A2, s.B2, s.C2);
    g.sigma_x = curve_of_t(s.A2); g.sigma_m = curve_of_t(s.B2); g.sigma_u = curve_of_t(s.C2);
    g.gamma = lin(s.A3, s.B3, s.C3);
    g.gamma_x = curve_of_t(s.A3); g.gamma_m = curve_of_t(s.B3); g.gamma_u = curve_of_t(s.C3);
    g.c = lin(s.A4, s.B4, s.C4);
    g.c_x = curve_of_t(s.A4); g.c_m = curve_of_t(s.B4); g.c_u = curve_of_t(s.C4);
    g.diffusion_is_zero = s.A2.is_constant() && s.A2.constant_value() == 0.0 &&
                          s.B2.is_constant() && s.B2.constant_value() == 0.0 &&
                          s.C2.is_constant() && s.C2.constant_value() == 0.0;

    {
        const Curve A5 = s.A5, B5 = s.B5, F1 = s.F1, Fb1 = s.Fb1, K = s.K, C5 = s.C5;
        g.g = [A5, B5, F1, Fb1, K, C5](double t, double x, double m, double y, double ybar,
                                       double z, double zbar, double u, const MarkAtom&) {
            return A5(t) * x + B5(t) * m + F1(t) * y + Fb1(t) * ybar + K(t) * (z - zbar) + C5(t) * u;
        };
        g.g_u = [C5](double t, double, double, double, double, double, double, double,
                     const MarkAtom&) { return C5(t); };
        g.driver_affine = true;
        g.g0 = lin(s.A5, s.B5, s.C5);
        g.g0_x = curve_of_t(s.A5);
        g.g0_m = curve_of_t(s.B5);
        g.g0_u = curve_of_t(s.C5);
        g.Fy = s.F1;
        g.Fybar = s.Fb1;
        g.Kz = s.K;
    }

    {
        const double M = s.M;
        g.h = [M](double xT, double) { return M * xT; };
        g.h_x = [M](double, double) { return M; };
        g.h_m = [](double, double) { return 0.0; };
    }

    {
        const Curve A6 = s.A6, B6 = s.B6, F2 = s.F2, Fb2 = s.Fb2;
        g.l = [A6, B6, F2, Fb2](double t, double x, double m, double ybar, double u,
                                const MarkAtom&) {
            return A6(t) * x + B6(t) * m + (F2(t) + Fb2(t)) * ybar + 0.5 * u * u;
        };
        g.l_x = [A6](double t, double, double, double, double, const MarkAtom&) { return A6(t); };
        g.l_m = [B6](double t, double, double, double, double, const MarkAtom&) { return B6(t); };
        g.l_yb = [F2, Fb2](double t, double, double, double, double, const MarkAtom&) {
            return F2(t) + Fb2(t);
        };
        g.l_u = [](double, double, double, double, double u, const MarkAtom&) { return u; };
    }
    {
        const Curve A7 = s.A7, B7 = s.B7, F3 = s.F3, Fb3 = s.Fb3;
        g.f = [A7, B7, F3, Fb3](double t, double x, double m, double ybar, double u,
                                const MarkAtom&) {
            return A7(t) * x + B7(t) * m + (F3(t) + Fb3(t)) * ybar + 0.5 * u * u;
        };
        g.f_x = [A7](double t, double, double, double, double, const MarkAtom&) { return A7(t); };
        g.f_m = [B7](double t, double, double, double, double, const MarkAtom&) { return B7(t); };
        g.f_yb = [F3, Fb3](double t, double, double, double, double, const MarkAtom&) {
            return F3(t) + Fb3(t);
        };
        g.f_u = [](double, double, double, double, double u, const MarkAtom&) { return u; };
    }
    {
        const double delta = s.delta;
        g.phi_T = [delta](double, double mT) { return 0.5 * delta * mT * mT; };
        g.phi_T_x = [](double, double) { return 0.0; };
        g.phi_T_m = [delta](double, double mT) { return delta * mT; };
        g.phi0 = [](double y0) { return 0.5 * y0 * y0; };
        g.phi0_y = [](double y0) { return y0; };
        g.phi0_depends_y0 = true;
        g.psi = [](double, double eta) { return 0.5 * eta * eta; };
        g.psi_eta = [](double, double eta) { return eta; };
    }
    g.G = s.G;
    g.H = s.H;
    g.impulses = s.impulses;
    return g;
}

LQSpec example1_spec() {
    LQSpec s;
    s.T = 1.0;
    s.x0 = 0.0;
    s.delta = 1.0;
    return s;
}

Example2 example2_spec(const MarkSpace& ms) {
    validate(ms).throw_if_failed();
    Example2 ex;
    ex.lambda_total = ms.total_mass();
    const double lam = ex.lambda_total;

    GeneralSpec& g = ex.spec;
    g.T = 1.0;
    g.x0 = 1.0;
    auto zero = Coeff([](double, double, double, double, const MarkAtom&) { return 0.0; });
    auto ident_u = Coeff([](double, double, double, double u, const MarkAtom&) { return u; });
    auto one = Coeff([](double, double, double, double, const MarkAtom&) { return 1.0; });

    g.b = ident_u; g.b_x = zero; g.b_m = zero; g.b_u = one;
    g.sigma = zero; g.sigma_x = zero; g.sigma_m = zero; g.sigma_u = zero;
    g.diffusion_is_zero = true;
    g.gamma = ident_u; g.gamma_x = zero; g.gamma_m = zero; g.gamma_u = one;
    g.c = [](double, double, double, double u, const MarkAtom&) { return -u; };
    g.c_x = zero; g.c_m = zero;
    g.c_u = [](double, double, double, double, const MarkAtom&) { return -1.0; };

    g.g = [](double, double, double, double, double, double, double, double u, const MarkAtom&) {
        return u * u;
    };
    g.g_u = [](double, double, double, double, double, double, double, double u, const MarkAtom&) {
        return 2.0 * u;
    };
    g.driver_affine = true;
    g.g0 = [](double, double, double, double u, const MarkAtom&) { return u * u; };
    g.g0_x = zero;
    g.g0_m = zero;
    g.g0_u = [](double, double, double, double u, const MarkAtom&) { return 2.0 * u; };
    g.Fy = 0.0; g.Fybar = 0.0; g.Kz = 0.0;

    g.h = [](double xT, double) { return xT * xT; };
    g.h_x = [](double xT, double) { return 2.0 * xT; };
    g.h_m = [](double, double) { return 0.0; };

    g.l = [](double, double, double, double, double u, const MarkAtom&) { return 0.5 * u * u; };
    g.l_x = [](double, double, double, double, double, const MarkAtom&) { return 0.0; };
    g.l_m = g.l_x; g.l_yb = g.l_x;
    g.l_u = [](double, double, double, double, double u, const MarkAtom&) { return u; };
    g.f = [](double, double, double, double, double u, const MarkAtom&) { return 2.0 * u * u; };
    g.f_x = g.l_x; g.f_m = g.l_x; g.f_yb = g.l_x;
    g.f_u = [](double, double, double, double, double u, const MarkAtom&) { return 4.0 * u; };

    g.phi_T = [](double xT, double) { return 0.5 * xT * xT; };
    g.phi_T_x = [](double xT, double) { return xT; };
    g.phi_T_m = [](double, double) { return 0.0; };
    g.phi0 = [](double y0) { return 0.5 * y0; };
    g.phi0_y = [](double) { return 0.5; };
    g.phi0_depends_y0 = true;
    g.psi = [](double, double) { return 0.0; };
    g.psi_eta = [](double, double) { return 0.0; };
    g.G = 0.0;
    g.H = 0.0;

    // optimal feedbacks: progressive u = -(Pt/2) X_t continuous,
    // -(Pt/4) X_{t-} at jumps; predictable u = -(Qt/3) X_t
    const double a = -0.75 * lam;
    auto Ptilde = [a](double t) { return 2.0 / (2.0 * a * t - 2.0 * a + 1.0); };
    auto Qtilde = [lam](double t) { return 6.0 / (4.0 * (1.0 - t) * lam + 3.0); };

    ex.progressive_optimal = ControlLaw::progressive(
        [Ptilde](double t, double x, double, const MarkAtom&) { return -0.5 * Ptilde(t) * x; },
        [Ptilde](double t, double x_left, double, const MarkAtom&) {
            return -0.25 * Ptilde(t) * x_left;
        });
    ex.predictable_optimal = ControlLaw::predictable(
        [Qtilde](double t, double x, double, const MarkAtom&) { return -Qtilde(t) * x / 3.0; });
    return ex;
}

GeneralSpec nonlinear_demo_spec() {
    GeneralSpec g;
    g.T = 1.0;
    g.x0 = 0.5;
    g.lipschitz_bound = 2.0;

    g.b = [](double, double x, double m, double u, const MarkAtom&) {
        return -0.4 * x + 0.3 * std::tanh(x) + 0.2 * m + u;
    };
    g.b_x = [](double, double x, double, double, const MarkAtom&) {
        const double th = std::tanh(x);
        return -0.4 + 0.3 * (1.0 - th * th);
    };
    g.b_m = [](double, double, double, double, const MarkAtom&) { return 0.2; };
    g.b_u = [](double, double, double, double, const MarkAtom&) { return 1.0; };

    g.sigma = [](double, double x, double, double, const MarkAtom&) {
        return 0.2 + 0.1 * std::sin(x);
    };
    g.sigma_x = [](double, double x, double, double, const MarkAtom&) { return 0.1 * std::cos(x); };
    g.sigma_m = [](double, double, double, double, const MarkAtom&) { return 0.0; };
    g.sigma_u = g.sigma_m;

    g.gamma = [](double, double x, double, double u, const MarkAtom& e) {
        return 0.1 * e.value * x + 0.3 * u;
    };
    g.gamma_x = [](double, double, double, double, const MarkAtom& e) { return 0.1 * e.value; };
    g.gamma_m = [](double, double, double, double, const MarkAtom&) { return 0.0; };
    g.gamma_u = [](double, double, double, double, const MarkAtom&) { return 0.3; };

    g.c = [](double, double x, double, double u, const MarkAtom&) {
        return 0.1 * std::sin(x) - 0.2 * u;
    };
    g.c_x = [](double, double x, double, double, const MarkAtom&) { return 0.1 * std::cos(x); };
    g.c_m = [](double, double, double, double, const MarkAtom&) { return 0.0; };
    g.c_u = [](double, double, double, double, const MarkAtom&) { return -0.2; };

    g.g = [](double, double, double, double, double, double, double, double, const MarkAtom&) {
        return 0.0;
    };
    g.g_u = g.g;
    g.driver_affine = true;
    g.g0 = [](double, double, double, double, const MarkAtom&) { return 0.0; };
    g.g0_x = g.g0; g.g0_m = g.g0; g.g0_u = g.g0;
    g.Fy = 0.0; g.Fybar = 0.0; g.Kz = 0.0;

    g.h = [](double xT, double) { return xT; };
    g.h_x = [](double, double) { return 1.0; };
    g.h_m = [](double, double) { return 0.0; };

    g.l = [](double, double, double, double, double u, const MarkAtom&) { return 0.5 * u * u; };
    g.l_x = [](double, double, double, double, double, const MarkAtom&) { return 0.0; };
    g.l_m = g.l_x; g.l_yb = g.l_x;
    g.l_u = [](double, double, double, double, double u, const MarkAtom&) { return u; };
    g.f = g.l_x;
    g.f_x = g.l_x; g.f_m = g.l_x; g.f_yb = g.l_x; g.f_u = g.l_x;
    g.phi_T = [](double, double) { return 0.0; };
    g.phi_T_x = [](double, double) { return 0.0; };
    g.phi_T_m = g.phi_T_x;
    g.phi0 = [](double) { return 0.0; };
    g.phi0_y = [](double) { return 0.0; };
    g.phi0_depends_y0 = false;
    g.psi = [](double, double eta) { return 0.5 * eta * eta; };
    g.psi_eta = [](double, double eta) { return eta; };

    g.G = 0.3;
    g.H = 0.0;
    g.impulses = ImpulseSchedule::at_times({0.4, 0.8});
    return g;
}

// --- JSON round-trip -------------------------------------------------------

namespace {

nlohmann::ordered_json curve_to_json(const Curve& c, double T) {
    if (c.is_constant()) return c.constant_value();
    // tables and callables serialize as sampled tables
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int k = 0; k <= 200; ++k) {
        const double t = T * k / 200.0;
        arr.push_back({t, c(t)});
    }
    return arr;
}

Curve curve_from_json(const nlohmann::json& j) {
    if (j.is_number()) return Curve(j.get<double>());
    std::vector<std::pair<double, double>> table;
    for (const auto& row : j) table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    return Curve(std::move(table));
}

} // namespace

std::string lqspec_to_json(const LQSpec& s) {
    nlohmann::ordered_json j;
    j["T"] = s.T;
    j["x0"] = s.x0;
    j["M"] = s.M;
    j["delta"] = s.delta;
    const std::pair<const char*, const Curve*> curves[] = {
        {"A1", &s.A1}, {"A2", &s.A2}, {"A3", &s.A3}, {"A4", &s.A4}, {"A5", &s.A5},
        {"A6", &s.A6}, {"A7", &s.A7}, {"B1", &s.B1}, {"B2", &s.B2}, {"B3", &s.B3},
        {"B4", &s.B4}, {"B5", &s.B5}, {"B6", &s.B6}, {"B7", &s.B7}, {"C1", &s.C1},
        {"C2", &s.C2}, {"C3", &s.C3}, {"C4", &s.C4}, {"C5", &s.C5}, {"F1", &s.F1},
        {"F2", &s.F2}, {"F3", &s.F3}, {"Fb1", &s.Fb1}, {"Fb2", &s.Fb2}, {"Fb3", &s.Fb3},
        {"K", &s.K}, {"G", &s.G}, {"H", &s.H},
    };
    for (const auto& [name, c] : curves) j[name] = curve_to_json(*c, s.T);
    j["impulse_mode"] = s.impulses.mode == ImpulseSchedule::Mode::DeterministicTimes ? "times"
                      : s.impulses.mode == ImpulseSchedule::Mode::KthJumpTimes       ? "kth-jumps"
                                                                                     : "none";
    j["impulse_times"] = s.impulses.times;
    j["impulse_indices"] = s.impulses.indices;
    return j.dump(2);
}

LQSpec lqspec_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LQSpec s;
    s.T = j.value("T", 1.0);
    s.x0 = j.value("x0", 0.0);
    s.M = j.value("M", 0.0);
    s.delta = j.value("delta", 0.0);
    const std::pair<const char*, Curve*> curves[] = {
        {"A1", &s.A1}, {"A2", &s.A2}, {"A3", &s.A3}, {"A4", &s.A4}, {"A5", &s.A5},
        {"A6", &s.A6}, {"A7", &s.A7}, {"B1", &s.B1}, {"B2", &s.B2}, {"B3", &s.B3},
        {"B4", &s.B4}, {"B5", &s.B5}, {"B6", &s.B6}, {"B7", &s.B7}, {"C1", &s.C1},
        {"C2", &s.C2}, {"C3", &s.C3}, {"C4", &s.C4}, {"C5", &s.C5}, {"F1", &s.F1},
        {"F2", &s.F2}, {"F3", &s.F3}, {"Fb1", &s.Fb1}, {"Fb2", &s.Fb2}, {"Fb3", &s.Fb3},
        {"K", &s.K}, {"G", &s.G}, {"H", &s.H},
    };
    for (const auto& [name, c] : curves)
        if (j.contains(name)) *c = curve_from_json(j.at(name));
    const std::string mode = j.value("impulse_mode", "none");
    if (mode == "times")
        s.impulses = ImpulseSchedule::at_times(j.value("impulse_times", std::vector<double>{}));
    else if (mode == "kth-jumps")
        s.impulses = ImpulseSchedule::at_kth_jumps(j.value("impulse_indices", std::vector<int>{}));
    return s;
}

} // namespace mfjump
