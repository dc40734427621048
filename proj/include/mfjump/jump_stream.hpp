#pragma once

#include <cstdint>
#include <vector>

#include "mfjump/mark_space.hpp"
#include "mfjump/rng.hpp"

namespace mfjump {

struct JumpEvent {
    double time = 0.0;    // T_n in (0, T]
    int mark = 0;         // index into MarkSpace atoms
};

// One realization of the Poisson random measure on [0,T] x E:
// ordered atoms (T_n, U_n), strictly increasing times, finitely many.
struct JumpStream {
    double horizon = 0.0;
    std::vector<JumpEvent> events;

    std::size_t count() const { return events.size(); }
};

// Count ~ Poisson(T * lambda(E)); times i.i.d. uniform on [0,T] sorted;
// marks categorical with probability weight_j / total_mass.
// Draw order (count, times, marks) is fixed so streams replay bit-identically.
JumpStream sample_jump_stream(const MarkSpace& ms, double horizon, CounterRng& rng);

inline JumpStream sample_jump_stream(const MarkSpace& ms, double horizon, std::uint64_t seed) {
    CounterRng rng(seed);
    return sample_jump_stream(ms, horizon, rng);
}

} // namespace mfjump
