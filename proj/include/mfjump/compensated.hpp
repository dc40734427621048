#pragma once

#include <functional>

#include "mfjump/jump_stream.hpp"
#include "mfjump/time_grid.hpp"

namespace mfjump {

// Two-branch integrand H(t, e, at_jump). The at_jump=true branch is the value
// of H on the jump graph; the at_jump=false branch is its value off the graph
// (used by plain lambda(de)dt integrals). The predictable projection that
// drives the compensator is determined by the on-graph values: the jump
// measure charges only the graph, so the compensator of int H dN is
// int sum_e H(t, e, at_jump=true) w_e dt, extended to all t with left-limit
// arguments. With that convention int H dN~ has zero mean for every bounded
// progressive H, not just predictable ones.
using MarkField = std::function<double(double t, const MarkAtom& e, bool at_jump)>;

// int int H dN~  =  sum_n H(T_n, U_n, jump)  -  int_0^T sum_e H(t, e, jump) w_e dt
// with left-point quadrature on the grid intervals.
double integrate_compensated(const MarkField& H, const JumpStream& js,
                             const MarkSpace& ms, const TimeGrid& grid);

// event part alone: sum_n H(T_n, U_n, jump)
double integrate_events(const MarkField& H, const JumpStream& js, const MarkSpace& ms);

// int_0^T sum_e H(t, e, at_jump) w_e dt, left-point quadrature. at_jump picks
// the branch: false for ordinary drift/cost integrals, true for compensators.
double integrate_mark_dt(const MarkField& H, const MarkSpace& ms, const TimeGrid& grid,
                         bool at_jump);

// quadratic bracket [H.N~, H.N~]_T = sum_n H(T_n, U_n, jump)^2, exact per path
double bracket_compensated(const MarkField& H, const JumpStream& js, const MarkSpace& ms);

} // namespace mfjump
