#pragma once

#include <functional>
#include <vector>

#include "mfjump/time_grid.hpp"

namespace mfjump {

using ScalarFn = std::function<double(double)>;

// cumulative integral int_0^{t_k} f ds at every grid node, composite Simpson
// per interval (f evaluated at endpoints and midpoints)
std::vector<double> cum_simpson(const ScalarFn& f, const TimeGrid& grid);

// Simpson value over a single interval [a, b]
double simpson(const ScalarFn& f, double a, double b);

// classical RK4 for scalar dy/dt = f(t, y), forward over the grid nodes
std::vector<double> rk4_forward(const std::function<double(double, double)>& f, double y0,
                                const TimeGrid& grid);

// RK4 integrated backward from y(T) = yT; returned values aligned with nodes
std::vector<double> rk4_backward(const std::function<double(double, double)>& f, double yT,
                                 const TimeGrid& grid);

// cubic (4-point Lagrange) interpolation of node-tabulated values; O(h^4)
double interp_table(const std::vector<double>& nodes, const std::vector<double>& values, double t);

// derivative of a smooth callable by Richardson-extrapolated central
// differences (two stencil widths h and h/2)
double richardson_derivative(const ScalarFn& f, double t, double h);

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace mfjump
