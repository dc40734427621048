#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mfjump/model.hpp"
#include "mfjump/time_grid.hpp"

namespace mfjump {

struct SimConfig {
    int paths = 1000;
    double dt = 1e-2;
    std::uint64_t seed = 1;
    double picard_tol = 1e-6;
    int picard_max = 25;
    int threads = 0; // 0 = hardware concurrency
    // exact mean mode: integrate dm/dt = rhs(t, m) instead of Picard iteration
    // (deterministic-time impulses only); used to keep feedback laws free of
    // Monte Carlo noise
    std::function<double(double t, double m)> exact_mean_rhs;
};

// one visited node of a replayed path (merged grid: template nodes plus this
// path's jump times)
struct PathNode {
    double t = 0.0;
    double x_left = 0.0;  // left limit x_{t-}
    double x = 0.0;       // value after the events at this node
    double m_left = 0.0;  // frozen mean at t (left value)
    double m = 0.0;       // frozen mean at t (right value)
    int jump_mark = -1;   // atom index if a jump lands here
    double u_jump = 0.0;  // jump-branch control applied (when jump_mark >= 0)
    int impulse = -1;     // impulse ordinal if an impulse lands here
    double eta = 0.0;     // impulse value applied (when impulse >= 0)
};

struct Path {
    const std::vector<PathNode>& nodes;
    const JumpStream& stream;
};

// Simulated ensemble. Paths are not stored: each path is a pure function of
// (master seed, path index, frozen mean curve), so consumers replay them via
// for_each_path. All reductions over paths must write into per-path or
// per-chunk slots so results do not depend on the thread count.
class PathEnsemble {
public:
    const TimeGrid& grid() const;
    const std::vector<double>& mean() const;       // m at template nodes
    const std::vector<double>& mean_left() const;  // left limits at template nodes
    double mean_at(double t) const;
    double mean_left_at(double t) const;

    int paths() const;
    double dt() const;
    std::uint64_t seed() const;
    int threads() const;
    int picard_iterations() const;
    double picard_residual() const;

    const GeneralSpec& spec() const;
    const ControlLaw& law() const;
    const MarkSpace& mark_space() const;
    const ImpulseValues& impulse_values() const;

    // replay every path; fn may be called concurrently from worker threads,
    // each invocation owning a distinct path index
    void for_each_path(const std::function<void(std::size_t path, const Path&)>& fn) const;

    // replay a single path (diagnostics, trajectory export)
    std::vector<PathNode> replay_path(std::size_t path) const;

    struct Impl;
    std::shared_ptr<const Impl> impl;
};

PathEnsemble simulate(const GeneralSpec& spec, const ControlLaw& law, const ImpulseValues& imp,
                      const MarkSpace& ms, const SimConfig& cfg);

// variation direction (v - u_hat, xi - eta_hat)
struct Direction {
    ControlLaw v;
    ImpulseValues xi;
};

// First-variation process simulated along the base ensemble's paths with the
// base streams (common random numbers); coefficients are the derivatives of
// the spec frozen on the base trajectory; the impulse term applies
// G_t d xi_hat with xi_hat = eps2 (xi - eta_hat).
//
// simulate_variation_pair additionally co-simulates the perturbed state x^eps
// under the open-loop control u^eps = u_hat + eps1 (v - u_hat) whose values
// are realized along the *base* path (the convex variation blends control
// processes, not feedback maps), with impulses eta + eps2 (xi - eta).
class VariationEnsemble {
public:
    const std::vector<double>& mean1() const;  // E[x^1] at template nodes
    double sup_sq() const;                     // E[sup_t |x^1_t|^2]

    bool has_perturbed_state() const;
    const std::vector<double>& mean_eps() const;      // E[x^eps] at template nodes
    const std::vector<double>& mean_eps_left() const;

    // fn(path, base path view, x1 values aligned with the base node list)
    void for_each_path(
        const std::function<void(std::size_t, const Path&, const std::vector<double>&)>& fn) const;

    // pair mode replay view: node-aligned values of x^1 and x^eps
    struct PairView {
        const Path& base;
        const std::vector<double>& x1;      // right values
        const std::vector<double>& xe;      // right values
        const std::vector<double>& xe_left; // pre-event values
    };
    void for_each_path_pair(const std::function<void(std::size_t, const PairView&)>& fn) const;

    struct Impl;
    std::shared_ptr<const Impl> impl;
};

VariationEnsemble simulate_first_variation(const GeneralSpec& spec, const PathEnsemble& base,
                                           const Direction& dir, double eps1, double eps2);

VariationEnsemble simulate_variation_pair(const GeneralSpec& spec, const PathEnsemble& base,
                                          const Direction& dir, double eps1, double eps2);

struct PathNorms {
    double sup_sq = 0.0;      // E[sup_t |x_t|^2]   (S^2 norm squared)
    double integral_sq = 0.0; // E[int_0^T |x_t|^2 dt]  (M^2 norm squared)
};

PathNorms path_norms(const PathEnsemble& ens);

// deterministic chunked parallel-for shared by all ensemble reductions
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t begin, std::size_t end)>& work);

} // namespace mfjump
