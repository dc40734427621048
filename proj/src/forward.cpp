#include "mfjump/forward.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "mfjump/quadrature.hpp"

namespace mfjump {

namespace {
constexpr std::size_t kChunk = 64; // fixed reduction granularity, thread-count independent
}

void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& work) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned k = threads > 0 ? static_cast<unsigned>(threads) : hw;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    if (k > n_chunks) k = static_cast<unsigned>(n_chunks);
    if (k <= 1) {
        // same chunk decomposition as the threaded path, so per-chunk
        // accumulators see identical ranges regardless of the worker count
        for (std::size_t c = 0; c < n_chunks; ++c)
            work(c * kChunk, std::min(c * kChunk + kChunk, n));
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mx;
    auto body = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            const std::size_t begin = c * kChunk;
            const std::size_t end = std::min(begin + kChunk, n);
            try {
                work(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mx);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (unsigned i = 0; i < k; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------

struct PathEnsemble::Impl {
    GeneralSpec spec;
    ControlLaw law;
    ImpulseValues imp;
    MarkSpace ms;
    SimConfig cfg;
    TimeGrid grid; // template grid: regular nodes + deterministic impulse times
    std::vector<double> mean;      // frozen mean, right values at template nodes
    std::vector<double> mean_left; // left values (differ at impulse nodes)
    int picard_iters = 0;
    double picard_res = 0.0;

    bool jumps_active() const { return !ms.empty() && ms.total_mass() > 0.0; }

    double mean_interp(double t, bool left) const {
        const auto& nodes = grid.nodes();
        if (t <= nodes.front()) return left ? mean_left.front() : mean.front();
        if (t >= nodes.back()) return left ? mean_left.back() : mean.back();
        const std::size_t k = grid.locate(t);
        if (nodes[k] == t) return left ? mean_left[k] : mean[k];
        // cadlag piecewise-linear: right value at k toward left value at k+1
        const double w = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
        return mean[k] + w * (mean_left[k + 1] - mean[k]);
    }

    // per-path workspace reused across replays within a worker
    struct Workspace {
        JumpStream js;
        std::vector<PathNode> nodes;
        std::vector<int> tmpl_of;    // template index of each merged node, -1 if jump-only
        std::vector<double> merged;  // merged node times
        std::vector<int> jump_of;    // event index landing at merged node, -1 otherwise
        std::vector<int> imp_of;     // impulse ordinal at merged node, -1 otherwise
    };

    void build_merged(Workspace& w) const {
        const auto& tn = grid.nodes();
        const auto& ev = w.js.events;
        w.merged.clear();
        w.tmpl_of.clear();
        w.jump_of.clear();
        std::size_t i = 0, j = 0;
        while (i < tn.size() || j < ev.size()) {
            if (j >= ev.size() || (i < tn.size() && tn[i] <= ev[j].time)) {
                const bool coincide = (j < ev.size() && tn[i] == ev[j].time);
                w.merged.push_back(tn[i]);
                w.tmpl_of.push_back(static_cast<int>(i));
                w.jump_of.push_back(coincide ? static_cast<int>(j) : -1);
                if (coincide) ++j;
                ++i;
            } else {
                w.merged.push_back(ev[j].time);
                w.tmpl_of.push_back(-1);
                w.jump_of.push_back(static_cast<int>(j));
                ++j;
            }
        }
        // impulse epochs: deterministic times sit on template nodes; k-th jump
        // epochs sit on that jump's node
        w.imp_of.assign(w.merged.size(), -1);
        const auto& sch = spec.impulses;
        if (sch.mode == ImpulseSchedule::Mode::DeterministicTimes) {
            std::size_t n = 0;
            for (std::size_t k = 0; k < w.merged.size() && n < sch.times.size(); ++k)
                if (std::fabs(w.merged[k] - sch.times[n]) < 1e-9)
                    w.imp_of[k] = static_cast<int>(n), ++n;
        } else if (sch.mode == ImpulseSchedule::Mode::KthJumpTimes) {
            for (std::size_t n = 0; n < sch.indices.size(); ++n) {
                const int target = sch.indices[n] - 1;
                if (target < 0 || target >= static_cast<int>(ev.size())) continue;
                for (std::size_t k = 0; k < w.merged.size(); ++k)
                    if (w.jump_of[k] == target) { w.imp_of[k] = static_cast<int>(n); break; }
            }
        }
    }

    // simulate one path on the frozen mean; optionally co-simulate the first
    // variation x1 (var != nullptr)
    struct VariationCtx {
        const Direction* dir;
        double eps1, eps2;
        const std::vector<double>* m1;      // E[x^1], right values at template nodes
        const std::vector<double>* m1_left;
        std::vector<double>* x1_out;        // per merged node, right values
        std::vector<double>* x1_left_out;   // per merged node, pre-event values
        // open-loop perturbed state (optional)
        const std::vector<double>* me = nullptr; // E[x^eps]
        const std::vector<double>* me_left = nullptr;
        std::vector<double>* xe_out = nullptr;
        std::vector<double>* xe_left_out = nullptr;
    };

    static double curve_interp(const TimeGrid& grid, const std::vector<double>& right,
                               const std::vector<double>& left, double t, bool want_left) {
        const auto& nodes = grid.nodes();
        if (t <= nodes.front()) return want_left ? left.front() : right.front();
        if (t >= nodes.back()) return want_left ? left.back() : right.back();
        const std::size_t k = grid.locate(t);
        if (nodes[k] == t) return want_left ? left[k] : right[k];
        const double w = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
        return right[k] + w * (left[k + 1] - right[k]);
    }

    double var_mean_interp(const VariationCtx& v, double t, bool left) const {
        return curve_interp(grid, *v.m1, *v.m1_left, t, left);
    }

    void run_path(std::size_t path, Workspace& w, const VariationCtx* var = nullptr) const {
        CounterRng rng(derive_stream(cfg.seed, path));
        if (jumps_active())
            w.js = sample_jump_stream(ms, spec.T, rng);
        else
            w.js = JumpStream{spec.T, {}};
        build_merged(w);

        const std::size_t n = w.merged.size();
        w.nodes.resize(n);
        const bool with_eps = var && var->xe_out;
        if (var) {
            var->x1_out->assign(n, 0.0);
            if (var->x1_left_out) var->x1_left_out->assign(n, 0.0);
            if (with_eps) {
                var->xe_out->assign(n, spec.x0);
                if (var->xe_left_out) var->xe_left_out->assign(n, spec.x0);
            }
        }

        double x = spec.x0;
        double x1 = 0.0;
        double xe = spec.x0;
        {
            PathNode& nd = w.nodes[0];
            nd = PathNode{};
            nd.t = 0.0;
            nd.x_left = x;
            nd.x = x;
            nd.m_left = mean_left.front();
            nd.m = mean.front();
        }

        const bool with_diffusion = !spec.diffusion_is_zero;
        const auto& atoms = ms.atoms();

        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double t = w.merged[k];
            const double dt = w.merged[k + 1] - w.merged[k];
            const double m = w.nodes[k].m;

            double drift = 0.0, diff = 0.0;
            double drift1 = 0.0, diff1 = 0.0;
            double drifte = 0.0, diffe = 0.0;
            double m1 = 0.0, me = 0.0;
            if (var) {
                const int ti0 = w.tmpl_of[k];
                m1 = (ti0 >= 0) ? (*var->m1)[ti0] : var_mean_interp(*var, t, false);
                if (with_eps)
                    me = (ti0 >= 0) ? (*var->me)[ti0]
                                    : curve_interp(grid, *var->me, *var->me_left, t, false);
            }
            for (const auto& e : atoms) {
                const double uc = law.cont(t, x, m, e);
                const double uj = law.jump(t, x, m, e); // predictable extension of the mu-branch
                drift += (spec.b(t, x, m, uc, e) - spec.c(t, x, m, uj, e)) * e.weight;
                if (with_diffusion) diff += spec.sigma(t, x, m, uc, e) * e.weight;
                if (var) {
                    const double vc = var->eps1 * (var->dir->v.cont(t, x, m, e) - uc);
                    const double vj = var->eps1 * (var->dir->v.jump(t, x, m, e) - uj);
                    drift1 += (spec.b_x(t, x, m, uc, e) * x1 + spec.b_m(t, x, m, uc, e) * m1 +
                               spec.b_u(t, x, m, uc, e) * vc) * e.weight;
                    drift1 -= (spec.c_x(t, x, m, uj, e) * x1 + spec.c_m(t, x, m, uj, e) * m1 +
                               spec.c_u(t, x, m, uj, e) * vj) * e.weight;
                    if (with_diffusion)
                        diff1 += (spec.sigma_x(t, x, m, uc, e) * x1 + spec.sigma_m(t, x, m, uc, e) * m1 +
                                  spec.sigma_u(t, x, m, uc, e) * vc) * e.weight;
                    if (with_eps) {
                        // open-loop blend: control values taken from the base state
                        const double uec = uc + vc;
                        const double uej = uj + vj;
                        drifte += (spec.b(t, xe, me, uec, e) - spec.c(t, xe, me, uej, e)) * e.weight;
                        if (with_diffusion) diffe += spec.sigma(t, xe, me, uec, e) * e.weight;
                    }
                }
            }
            double dB = 0.0;
            if (with_diffusion) dB = std::sqrt(dt) * rng.next_normal();
            double x_next = x + drift * dt + diff * dB;
            double x1_next = x1 + drift1 * dt + diff1 * dB;
            double xe_next = xe + drifte * dt + diffe * dB;

            PathNode& nd = w.nodes[k + 1];
            nd = PathNode{};
            const double tn = w.merged[k + 1];
            nd.t = tn;
            nd.x_left = x_next;
            const int ti = w.tmpl_of[k + 1];
            nd.m_left = (ti >= 0) ? mean_left[ti] : mean_interp(tn, true);
            nd.m = (ti >= 0) ? mean[ti] : nd.m_left;

            double m1_left = 0.0, me_left = 0.0;
            if (var) {
                m1_left = (ti >= 0) ? (*var->m1_left)[ti] : var_mean_interp(*var, tn, true);
                if (var->x1_left_out) (*var->x1_left_out)[k + 1] = x1_next;
                if (with_eps) {
                    me_left = (ti >= 0) ? (*var->me_left)[ti]
                                        : curve_interp(grid, *var->me, *var->me_left, tn, true);
                    if (var->xe_left_out) (*var->xe_left_out)[k + 1] = xe_next;
                }
            }

            if (w.jump_of[k + 1] >= 0) {
                const auto& ev = w.js.events[w.jump_of[k + 1]];
                const MarkAtom& e = ms.atom(ev.mark);
                const double uj = law.jump(tn, x_next, nd.m_left, e);
                nd.jump_mark = ev.mark;
                nd.u_jump = uj;
                const double jump = spec.gamma(tn, x_next, nd.m_left, uj, e) +
                                    spec.c(tn, x_next, nd.m_left, uj, e);
                if (var) {
                    const double x1l = x1_next;
                    const double vj = var->eps1 * (var->dir->v.jump(tn, x_next, nd.m_left, e) - uj);
                    const double gx = spec.gamma_x(tn, x_next, nd.m_left, uj, e) +
                                      spec.c_x(tn, x_next, nd.m_left, uj, e);
                    const double gm = spec.gamma_m(tn, x_next, nd.m_left, uj, e) +
                                      spec.c_m(tn, x_next, nd.m_left, uj, e);
                    const double gu = spec.gamma_u(tn, x_next, nd.m_left, uj, e) +
                                      spec.c_u(tn, x_next, nd.m_left, uj, e);
                    x1_next = x1l + gx * x1l + gm * m1_left + gu * vj;
                    if (with_eps) {
                        const double uej = uj + vj;
                        xe_next += spec.gamma(tn, xe_next, me_left, uej, e) +
                                   spec.c(tn, xe_next, me_left, uej, e);
                    }
                }
                x_next += jump;
            }
            if (w.imp_of[k + 1] >= 0) {
                const int i = w.imp_of[k + 1];
                const double eta = imp.value(static_cast<std::size_t>(i), tn);
                nd.impulse = i;
                nd.eta = eta;
                x_next += spec.G(tn) * eta;
                if (var) {
                    const double xi = var->dir->xi.value(static_cast<std::size_t>(i), tn);
                    x1_next += spec.G(tn) * var->eps2 * (xi - eta);
                    if (with_eps)
                        xe_next += spec.G(tn) * (eta + var->eps2 * (xi - eta));
                }
            }
            nd.x = x_next;
            x = x_next;
            x1 = x1_next;
            xe = xe_next;
            if (var) {
                (*var->x1_out)[k + 1] = x1;
                if (with_eps) (*var->xe_out)[k + 1] = xe;
            }
        }
        if (!std::isfinite(x)) throw Error(Errc::NonFiniteState, "path state became non-finite");
        if (var && (!std::isfinite(x1) || (with_eps && !std::isfinite(xe))))
            throw Error(Errc::NonFiniteState, "variation state became non-finite");
    }
};

const TimeGrid& PathEnsemble::grid() const { return impl->grid; }
const std::vector<double>& PathEnsemble::mean() const { return impl->mean; }
const std::vector<double>& PathEnsemble::mean_left() const { return impl->mean_left; }
double PathEnsemble::mean_at(double t) const { return impl->mean_interp(t, false); }
double PathEnsemble::mean_left_at(double t) const { return impl->mean_interp(t, true); }
int PathEnsemble::paths() const { return impl->cfg.paths; }
double PathEnsemble::dt() const { return impl->cfg.dt; }
std::uint64_t PathEnsemble::seed() const { return impl->cfg.seed; }
int PathEnsemble::threads() const { return impl->cfg.threads; }
int PathEnsemble::picard_iterations() const { return impl->picard_iters; }
double PathEnsemble::picard_residual() const { return impl->picard_res; }
const GeneralSpec& PathEnsemble::spec() const { return impl->spec; }
const ControlLaw& PathEnsemble::law() const { return impl->law; }
const MarkSpace& PathEnsemble::mark_space() const { return impl->ms; }
const ImpulseValues& PathEnsemble::impulse_values() const { return impl->imp; }

void PathEnsemble::for_each_path(const std::function<void(std::size_t, const Path&)>& fn) const {
    const auto im = impl;
    parallel_chunks(static_cast<std::size_t>(im->cfg.paths), im->cfg.threads,
                    [&](std::size_t begin, std::size_t end) {
                        Impl::Workspace w;
                        for (std::size_t p = begin; p < end; ++p) {
                            im->run_path(p, w);
                            fn(p, Path{w.nodes, w.js});
                        }
                    });
}

std::vector<PathNode> PathEnsemble::replay_path(std::size_t path) const {
    Impl::Workspace w;
    impl->run_path(path, w);
    return w.nodes;
}

namespace {

// deterministic impulse epochs contribute G(tau) * eta jumps to the mean
std::size_t nearest_node(const TimeGrid& g, double t) {
    std::size_t k = g.locate(t);
    if (k + 1 < g.size() && std::fabs(g.node(k + 1) - t) < std::fabs(g.node(k) - t)) ++k;
    return k;
}

std::vector<std::pair<std::size_t, double>> mean_impulse_jumps(const GeneralSpec& spec,
                                                               const ImpulseValues& imp,
                                                               const TimeGrid& grid) {
    std::vector<std::pair<std::size_t, double>> out;
    if (spec.impulses.mode != ImpulseSchedule::Mode::DeterministicTimes) return out;
    for (std::size_t i = 0; i < spec.impulses.times.size(); ++i) {
        const double tau = spec.impulses.times[i];
        out.emplace_back(nearest_node(grid, tau), spec.G(tau) * imp.value(i, tau));
    }
    return out;
}

} // namespace

PathEnsemble simulate(const GeneralSpec& spec, const ControlLaw& law, const ImpulseValues& imp,
                      const MarkSpace& ms, const SimConfig& cfg) {
    if (cfg.paths < 1) throw Error(Errc::ConfigError, "paths must be >= 1");
    if (!(cfg.dt > 0.0)) throw Error(Errc::ConfigError, "dt must be positive");
    if (!law.cont || !law.jump) throw Error(Errc::ConfigError, "control law branches must be set");

    auto impl = std::make_shared<PathEnsemble::Impl>();
    impl->spec = spec;
    impl->law = law;
    impl->imp = imp;
    impl->ms = ms;
    impl->cfg = cfg;

    std::vector<double> extra;
    if (spec.impulses.mode == ImpulseSchedule::Mode::DeterministicTimes)
        extra = spec.impulses.times;
    impl->grid = TimeGrid(spec.T, cfg.dt, extra);
    const std::size_t n = impl->grid.size();

    if (cfg.exact_mean_rhs) {
        if (spec.impulses.mode == ImpulseSchedule::Mode::KthJumpTimes)
            throw Error(Errc::ConfigError, "exact mean mode needs deterministic impulse times");
        // RK4 segment-wise with impulse jumps applied at their nodes
        auto jumps = mean_impulse_jumps(spec, imp, impl->grid);
        impl->mean.resize(n);
        impl->mean_left.resize(n);
        double m = spec.x0;
        impl->mean[0] = impl->mean_left[0] = m;
        std::size_t jnext = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double t = impl->grid.node(k);
            const double h = impl->grid.dt(k);
            const double k1 = cfg.exact_mean_rhs(t, m);
            const double k2 = cfg.exact_mean_rhs(t + 0.5 * h, m + 0.5 * h * k1);
            const double k3 = cfg.exact_mean_rhs(t + 0.5 * h, m + 0.5 * h * k2);
            const double k4 = cfg.exact_mean_rhs(t + h, m + h * k3);
            m += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
            impl->mean_left[k + 1] = m;
            if (jnext < jumps.size() && jumps[jnext].first == k + 1) m += jumps[jnext++].second;
            impl->mean[k + 1] = m;
        }
        impl->picard_iters = 0;
        impl->picard_res = 0.0;
        PathEnsemble ens;
        ens.impl = impl;
        return ens;
    }

    // Picard on the frozen mean: start from the constant x0 curve, iterate
    // freeze -> simulate -> average until the sup-node change drops below tol
    impl->mean.assign(n, spec.x0);
    impl->mean_left.assign(n, spec.x0);
    const std::size_t n_chunks =
        (static_cast<std::size_t>(cfg.paths) + kChunk - 1) / kChunk;
    std::vector<double> sums, sums_left;
    double prev_delta = std::numeric_limits<double>::infinity();
    int growth_streak = 0;

    for (int it = 1; it <= cfg.picard_max; ++it) {
        sums.assign(n_chunks * n, 0.0);
        sums_left.assign(n_chunks * n, 0.0);
        parallel_chunks(static_cast<std::size_t>(cfg.paths), cfg.threads,
                        [&](std::size_t begin, std::size_t end) {
                            PathEnsemble::Impl::Workspace w;
                            const std::size_t chunk = begin / kChunk;
                            double* srow = &sums[chunk * n];
                            double* lrow = &sums_left[chunk * n];
                            for (std::size_t p = begin; p < end; ++p) {
                                impl->run_path(p, w);
                                for (std::size_t k = 0; k < w.nodes.size(); ++k) {
                                    const int ti = w.tmpl_of[k];
                                    if (ti < 0) continue;
                                    srow[ti] += w.nodes[k].x;
                                    lrow[ti] += w.nodes[k].x_left;
                                }
                            }
                        });
        std::vector<double> next(n, 0.0), next_left(n, 0.0);
        for (std::size_t c = 0; c < n_chunks; ++c)
            for (std::size_t k = 0; k < n; ++k) {
                next[k] += sums[c * n + k];
                next_left[k] += sums_left[c * n + k];
            }
        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] /= cfg.paths;
            next_left[k] /= cfg.paths;
            if (!std::isfinite(next[k]))
                throw Error(Errc::NonFiniteState, "mean curve became non-finite");
            delta = std::max(delta, std::fabs(next[k] - impl->mean[k]));
        }
        impl->picard_iters = it;
        impl->picard_res = delta;
        if (delta < cfg.picard_tol) break; // keep the frozen input curve: replay-exact
        if (delta > prev_delta) {
            if (++growth_streak >= 2)
                throw Error(Errc::PicardDiverged, "mean iteration residual grew twice in a row");
        } else {
            growth_streak = 0;
        }
        prev_delta = delta;
        impl->mean = std::move(next);
        impl->mean_left = std::move(next_left);
    }

    PathEnsemble ens;
    ens.impl = impl;
    return ens;
}

// ---------------------------------------------------------------------------

struct VariationEnsemble::Impl {
    std::shared_ptr<const PathEnsemble::Impl> base;
    Direction dir;
    double eps1 = 0.0, eps2 = 0.0;
    bool with_eps = false;
    std::vector<double> m1, m1_left;
    std::vector<double> me, me_left; // E[x^eps] (pair mode)
    double sup_sq = 0.0;

    void replay(const std::function<void(std::size_t, const Path&, const std::vector<double>&,
                                         const std::vector<double>&, const std::vector<double>&)>&
                    fn) const {
        parallel_chunks(static_cast<std::size_t>(base->cfg.paths), base->cfg.threads,
                        [&](std::size_t begin, std::size_t end) {
                            PathEnsemble::Impl::Workspace w;
                            std::vector<double> x1, xe, xe_left;
                            PathEnsemble::Impl::VariationCtx ctx{&dir, eps1, eps2,  &m1,
                                                                 &m1_left, &x1, nullptr};
                            if (with_eps) {
                                ctx.me = &me;
                                ctx.me_left = &me_left;
                                ctx.xe_out = &xe;
                                ctx.xe_left_out = &xe_left;
                            }
                            for (std::size_t p = begin; p < end; ++p) {
                                base->run_path(p, w, &ctx);
                                fn(p, Path{w.nodes, w.js}, x1, xe, xe_left);
                            }
                        });
    }
};

const std::vector<double>& VariationEnsemble::mean1() const { return impl->m1; }
double VariationEnsemble::sup_sq() const { return impl->sup_sq; }
bool VariationEnsemble::has_perturbed_state() const { return impl->with_eps; }
const std::vector<double>& VariationEnsemble::mean_eps() const { return impl->me; }
const std::vector<double>& VariationEnsemble::mean_eps_left() const { return impl->me_left; }

void VariationEnsemble::for_each_path(
    const std::function<void(std::size_t, const Path&, const std::vector<double>&)>& fn) const {
    impl->replay([&](std::size_t p, const Path& path, const std::vector<double>& x1,
                     const std::vector<double>&, const std::vector<double>&) { fn(p, path, x1); });
}

void VariationEnsemble::for_each_path_pair(
    const std::function<void(std::size_t, const PairView&)>& fn) const {
    if (!impl->with_eps)
        throw Error(Errc::EnsembleMismatch, "pair replay needs simulate_variation_pair");
    impl->replay([&](std::size_t p, const Path& path, const std::vector<double>& x1,
                     const std::vector<double>& xe, const std::vector<double>& xe_left) {
        fn(p, PairView{path, x1, xe, xe_left});
    });
}

namespace {

VariationEnsemble simulate_variation_impl(const GeneralSpec& spec, const PathEnsemble& base,
                                          const Direction& dir, double eps1, double eps2,
                                          bool with_eps) {
    if (!spec.b_x || !spec.b_m || !spec.b_u || !spec.gamma_x || !spec.gamma_m || !spec.gamma_u ||
        !spec.c_x || !spec.c_m || !spec.c_u ||
        (!spec.diffusion_is_zero && (!spec.sigma_x || !spec.sigma_m || !spec.sigma_u)))
        throw Error(Errc::ConfigError, "first variation needs coefficient derivatives");
    if (!dir.v.cont || !dir.v.jump)
        throw Error(Errc::ConfigError, "direction law branches must be set");

    auto impl = std::make_shared<VariationEnsemble::Impl>();
    impl->base = base.impl;
    impl->dir = dir;
    impl->eps1 = eps1;
    impl->eps2 = eps2;
    impl->with_eps = with_eps;

    const auto& bi = *base.impl;
    const std::size_t n = bi.grid.size();
    impl->m1.assign(n, 0.0);
    impl->m1_left.assign(n, 0.0);
    if (with_eps) {
        impl->me.assign(n, bi.spec.x0);
        impl->me_left.assign(n, bi.spec.x0);
    }
    const std::size_t paths = static_cast<std::size_t>(bi.cfg.paths);
    const std::size_t n_chunks = (paths + kChunk - 1) / kChunk;

    // joint Picard on E[x^1] (and E[x^eps] in pair mode); the variational
    // system is linear, so this converges geometrically and in one pass when
    // no coefficient depends on the mean
    double prev_delta = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int it = 1; it <= bi.cfg.picard_max; ++it) {
        std::vector<double> sums(n_chunks * n, 0.0), sums_left(n_chunks * n, 0.0);
        std::vector<double> esums;
        if (with_eps) esums.assign(n_chunks * n, 0.0);
        std::vector<double> sup_chunk(n_chunks, 0.0);
        parallel_chunks(paths, bi.cfg.threads, [&](std::size_t begin, std::size_t end) {
            PathEnsemble::Impl::Workspace w;
            std::vector<double> x1, x1_left, xe;
            PathEnsemble::Impl::VariationCtx ctx{&impl->dir, eps1,  eps2, &impl->m1,
                                                 &impl->m1_left, &x1, &x1_left};
            if (with_eps) {
                ctx.me = &impl->me;
                ctx.me_left = &impl->me_left;
                ctx.xe_out = &xe;
            }
            const std::size_t chunk = begin / kChunk;
            double* srow = &sums[chunk * n];
            double* lrow = &sums_left[chunk * n];
            double* erow = with_eps ? &esums[chunk * n] : nullptr;
            for (std::size_t p = begin; p < end; ++p) {
                bi.run_path(p, w, &ctx);
                double sup = 0.0;
                for (std::size_t k = 0; k < w.nodes.size(); ++k) {
                    sup = std::max(sup, std::max(x1[k] * x1[k], x1_left[k] * x1_left[k]));
                    const int ti = w.tmpl_of[k];
                    if (ti < 0) continue;
                    srow[ti] += x1[k];
                    lrow[ti] += x1_left[k];
                    if (with_eps) erow[ti] += xe[k];
                }
                sup_chunk[chunk] += sup;
            }
        });
        std::vector<double> next(n, 0.0), next_left(n, 0.0);
        std::vector<double> enext(n, 0.0);
        for (std::size_t c = 0; c < n_chunks; ++c)
            for (std::size_t k = 0; k < n; ++k) {
                next[k] += sums[c * n + k];
                next_left[k] += sums_left[c * n + k];
                if (with_eps) enext[k] += esums[c * n + k];
            }
        double sup_total = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) sup_total += sup_chunk[c];
        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] /= static_cast<double>(paths);
            next_left[k] /= static_cast<double>(paths);
            delta = std::max(delta, std::fabs(next[k] - impl->m1[k]));
            if (with_eps) {
                enext[k] /= static_cast<double>(paths);
                delta = std::max(delta, std::fabs(enext[k] - impl->me[k]));
            }
        }
        impl->sup_sq = sup_total / static_cast<double>(paths);
        if (delta < bi.cfg.picard_tol) break;
        if (delta > prev_delta) {
            if (++growth_streak >= 2)
                throw Error(Errc::PicardDiverged, "variation mean iteration diverged");
        } else {
            growth_streak = 0;
        }
        prev_delta = delta;
        impl->m1 = std::move(next);
        impl->m1_left = std::move(next_left);
        if (with_eps) {
            impl->me = enext;
            impl->me_left = std::move(enext);
            // left values at deterministic impulse epochs differ by the mean
            // impulse jump G (eta + eps2 (xi - eta))
            if (bi.spec.impulses.mode == ImpulseSchedule::Mode::DeterministicTimes) {
                for (std::size_t i = 0; i < bi.spec.impulses.times.size(); ++i) {
                    const double tau = bi.spec.impulses.times[i];
                    const std::size_t k = bi.grid.locate(tau);
                    const double eta = bi.imp.value(i, tau);
                    const double eta_eps = eta + eps2 * (dir.xi.value(i, tau) - eta);
                    impl->me_left[k] = impl->me[k] - bi.spec.G(tau) * eta_eps;
                }
            }
        }
    }

    VariationEnsemble v;
    v.impl = impl;
    return v;
}

} // namespace

VariationEnsemble simulate_first_variation(const GeneralSpec& spec, const PathEnsemble& base,
                                           const Direction& dir, double eps1, double eps2) {
    return simulate_variation_impl(spec, base, dir, eps1, eps2, false);
}

VariationEnsemble simulate_variation_pair(const GeneralSpec& spec, const PathEnsemble& base,
                                          const Direction& dir, double eps1, double eps2) {
    return simulate_variation_impl(spec, base, dir, eps1, eps2, true);
}

PathNorms path_norms(const PathEnsemble& ens) {
    const std::size_t paths = static_cast<std::size_t>(ens.paths());
    std::vector<double> sup_slot(paths, 0.0), int_slot(paths, 0.0);
    ens.for_each_path([&](std::size_t p, const Path& path) {
        double sup = 0.0, integral = 0.0;
        const auto& nd = path.nodes;
        for (std::size_t k = 0; k < nd.size(); ++k) {
            sup = std::max(sup, std::max(nd[k].x * nd[k].x, nd[k].x_left * nd[k].x_left));
            if (k + 1 < nd.size()) integral += nd[k].x * nd[k].x * (nd[k + 1].t - nd[k].t);
        }
        sup_slot[p] = sup;
        int_slot[p] = integral;
    });
    PathNorms out;
    for (std::size_t p = 0; p < paths; ++p) {
        out.sup_sq += sup_slot[p];
        out.integral_sq += int_slot[p];
    }
    out.sup_sq /= static_cast<double>(paths);
    out.integral_sq /= static_cast<double>(paths);
    return out;
}

} // namespace mfjump
