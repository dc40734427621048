#pragma once

#include <vector>

#include "mfjump/jump_stream.hpp"
#include "mfjump/rng.hpp"

namespace mfjump {

// Sorted, unique node sequence with first = 0 and last = T. Event times
// (jumps, impulses) are inserted as nodes so the left-limit convention is a
// plain node lookup.
class TimeGrid {
public:
    TimeGrid() = default;
    // regular nodes 0, dt, 2dt, ..., T plus every time in `extra`
    TimeGrid(double horizon, double dt, const std::vector<double>& extra = {});

    static TimeGrid merged(const TimeGrid& base, const std::vector<double>& extra);

    double horizon() const { return horizon_; }
    double base_dt() const { return dt_; }
    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double node(std::size_t k) const { return nodes_[k]; }
    std::size_t intervals() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }
    double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }

    // index of the last node <= t (nodes are sorted)
    std::size_t locate(double t) const;

private:
    double horizon_ = 0.0;
    double dt_ = 0.0;
    std::vector<double> nodes_;
};

// One N(0, dt_k) increment per grid interval, in interval order.
std::vector<double> brownian_increments(const TimeGrid& grid, CounterRng& rng);

} // namespace mfjump
