#include "mfjump/compensated.hpp"

namespace mfjump {

double integrate_events(const MarkField& H, const JumpStream& js, const MarkSpace& ms) {
    double sum = 0.0;
    for (const auto& ev : js.events) sum += H(ev.time, ms.atom(ev.mark), true);
    return sum;
}

double integrate_mark_dt(const MarkField& H, const MarkSpace& ms, const TimeGrid& grid,
                         bool at_jump) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid.node(k);
        double row = 0.0;
        for (const auto& a : ms.atoms()) row += H(t, a, at_jump) * a.weight;
        sum += row * grid.dt(k);
    }
    return sum;
}

double integrate_compensated(const MarkField& H, const JumpStream& js, const MarkSpace& ms,
                             const TimeGrid& grid) {
    // compensator integrates the jump branch: the predictable projection is
    // pinned by the integrand's values on the jump graph (see module notes)
    return integrate_events(H, js, ms) - integrate_mark_dt(H, ms, grid, true);
}

double bracket_compensated(const MarkField& H, const JumpStream& js, const MarkSpace& ms) {
    double sum = 0.0;
    for (const auto& ev : js.events) {
        const double h = H(ev.time, ms.atom(ev.mark), true);
        sum += h * h;
    }
    return sum;
}

} // namespace mfjump
