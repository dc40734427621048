#include "mfjump/time_grid.hpp"

#include <algorithm>
#include <cmath>

#include "mfjump/errors.hpp"

namespace mfjump {

namespace {
constexpr double kNodeEps = 1e-12; // times closer than this collapse to one node
}

TimeGrid::TimeGrid(double horizon, double dt, const std::vector<double>& extra) {
    if (!(horizon > 0.0)) throw Error(Errc::ConfigError, "grid horizon must be positive");
    if (!(dt > 0.0)) throw Error(Errc::ConfigError, "grid dt must be positive");
    horizon_ = horizon;
    dt_ = dt;

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - kNodeEps));
    nodes_.reserve(steps + 1 + extra.size());
    for (std::size_t k = 0; k < steps; ++k) nodes_.push_back(static_cast<double>(k) * dt);
    nodes_.push_back(horizon);
    for (double t : extra)
        if (t > kNodeEps && t < horizon - kNodeEps) nodes_.push_back(t);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end(),
                             [](double a, double b) { return b - a < kNodeEps; }),
                 nodes_.end());
    nodes_.front() = 0.0;
    nodes_.back() = horizon;
}

TimeGrid TimeGrid::merged(const TimeGrid& base, const std::vector<double>& extra) {
    TimeGrid g;
    g.horizon_ = base.horizon_;
    g.dt_ = base.dt_;
    g.nodes_ = base.nodes_;
    g.nodes_.reserve(g.nodes_.size() + extra.size());
    for (double t : extra)
        if (t > kNodeEps && t < g.horizon_ - kNodeEps) g.nodes_.push_back(t);
    std::sort(g.nodes_.begin(), g.nodes_.end());
    g.nodes_.erase(std::unique(g.nodes_.begin(), g.nodes_.end(),
                               [](double a, double b) { return b - a < kNodeEps; }),
                   g.nodes_.end());
    return g;
}

std::size_t TimeGrid::locate(double t) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    if (it == nodes_.begin()) return 0;
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::vector<double> brownian_increments(const TimeGrid& grid, CounterRng& rng) {
    std::vector<double> inc(grid.intervals());
    for (std::size_t k = 0; k < inc.size(); ++k)
        inc[k] = std::sqrt(grid.dt(k)) * rng.next_normal();
    return inc;
}

} // namespace mfjump
