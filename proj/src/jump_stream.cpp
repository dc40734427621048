#include "mfjump/jump_stream.hpp"

#include <algorithm>

#include "mfjump/errors.hpp"

namespace mfjump {

JumpStream sample_jump_stream(const MarkSpace& ms, double horizon, CounterRng& rng) {
    if (ms.empty())
        throw Error(Errc::EmptyMarkSpace, "cannot sample jumps from an empty mark space");
    if (!(horizon > 0.0))
        throw Error(Errc::ConfigError, "horizon must be positive");

    JumpStream js;
    js.horizon = horizon;

    const int n = rng.next_poisson(horizon * ms.total_mass());
    js.events.resize(static_cast<std::size_t>(n));
    for (auto& ev : js.events) ev.time = horizon * rng.next_u01();
    // categorical marks by cumulative weights; drawn before sorting so the
    // (count, times, marks) draw order is independent of the realized times
    const auto& cdf = ms.cdf();
    for (auto& ev : js.events) {
        const double u = rng.next_u01();
        ev.mark = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (ev.mark >= static_cast<int>(ms.size())) ev.mark = static_cast<int>(ms.size()) - 1;
    }
    std::sort(js.events.begin(), js.events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    return js;
}

} // namespace mfjump
