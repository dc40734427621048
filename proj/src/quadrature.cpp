#include "mfjump/quadrature.hpp"

#include <cmath>

#include "mfjump/errors.hpp"

namespace mfjump {

double simpson(const ScalarFn& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

std::vector<double> cum_simpson(const ScalarFn& f, const TimeGrid& grid) {
    std::vector<double> out(grid.size(), 0.0);
    double acc = 0.0;
    double f_left = f(grid.node(0));
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid.node(k);
        const double b = grid.node(k + 1);
        const double f_right = f(b);
        acc += (b - a) / 6.0 * (f_left + 4.0 * f(0.5 * (a + b)) + f_right);
        out[k + 1] = acc;
        f_left = f_right;
    }
    return out;
}

std::vector<double> rk4_forward(const std::function<double(double, double)>& f, double y0,
                                const TimeGrid& grid) {
    std::vector<double> y(grid.size());
    y[0] = y0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid.node(k);
        const double h = grid.dt(k);
        const double k1 = f(t, y[k]);
        const double k2 = f(t + 0.5 * h, y[k] + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, y[k] + 0.5 * h * k2);
        const double k4 = f(t + h, y[k] + h * k3);
        y[k + 1] = y[k] + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    return y;
}

std::vector<double> rk4_backward(const std::function<double(double, double)>& f, double yT,
                                 const TimeGrid& grid) {
    std::vector<double> y(grid.size());
    y.back() = yT;
    for (std::size_t k = grid.size() - 1; k > 0; --k) {
        const double t = grid.node(k);
        const double h = grid.node(k) - grid.node(k - 1); // step taken backward
        const double k1 = f(t, y[k]);
        const double k2 = f(t - 0.5 * h, y[k] - 0.5 * h * k1);
        const double k3 = f(t - 0.5 * h, y[k] - 0.5 * h * k2);
        const double k4 = f(t - h, y[k] - h * k3);
        y[k - 1] = y[k] - h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    return y;
}

double interp_table(const std::vector<double>& nodes, const std::vector<double>& values, double t) {
    const std::size_t n = nodes.size();
    if (n == 0) throw Error(Errc::ConfigError, "interp_table: empty table");
    if (n == 1) return values[0];
    if (t <= nodes.front()) t = nodes.front();
    if (t >= nodes.back()) t = nodes.back();

    std::size_t hi = 1;
    {
        // binary search for the bracketing interval
        std::size_t lo = 0, up = n - 1;
        while (up - lo > 1) {
            const std::size_t mid = (lo + up) / 2;
            if (nodes[mid] <= t) lo = mid; else up = mid;
        }
        hi = up;
    }
    if (n < 4) {
        const double w = (t - nodes[hi - 1]) / (nodes[hi] - nodes[hi - 1]);
        return values[hi - 1] + w * (values[hi] - values[hi - 1]);
    }
    // 4-point Lagrange around the bracket
    std::size_t i0 = (hi >= 2) ? hi - 2 : 0;
    if (i0 + 3 >= n) i0 = n - 4;
    double out = 0.0;
    for (std::size_t i = i0; i < i0 + 4; ++i) {
        double li = 1.0;
        for (std::size_t j = i0; j < i0 + 4; ++j) {
            if (j == i) continue;
            li *= (t - nodes[j]) / (nodes[i] - nodes[j]);
        }
        out += li * values[i];
    }
    return out;
}

double richardson_derivative(const ScalarFn& f, double t, double h) {
    const double d1 = (f(t + h) - f(t - h)) / (2.0 * h);
    const double d2 = (f(t + 0.5 * h) - f(t - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / den;
}

} // namespace mfjump
