#include "mfjump/backward.hpp"

#include <cmath>

namespace mfjump {

namespace {

double lerp_nodes(const std::vector<double>& nodes, const std::vector<double>& vals, double t) {
    if (t <= nodes.front()) return vals.front();
    if (t >= nodes.back()) return vals.back();
    std::size_t lo = 0, hi = nodes.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (nodes[mid] <= t) lo = mid; else hi = mid;
    }
    const double w = (t - nodes[lo]) / (nodes[hi] - nodes[lo]);
    return vals[lo] + w * (vals[hi] - vals[lo]);
}

} // namespace

MeanCurvePair backward_mean_from_tabulated(const TimeGrid& grid, const std::vector<double>& a_nodes,
                                           const std::function<double(double)>& kappa,
                                           double terminal,
                                           const std::vector<double>& imp_mean_nodes) {
    const auto& nodes = grid.nodes();
    const std::size_t n = nodes.size();
    auto rhs = [&](double t, double y) {
        return -(lerp_nodes(nodes, a_nodes, t) + kappa(t) * y);
    };
    MeanCurvePair out;
    out.right.assign(n, 0.0);
    out.left.assign(n, 0.0);
    out.right[n - 1] = terminal;
    for (std::size_t k = n - 1;; --k) {
        out.left[k] = out.right[k] - (imp_mean_nodes.empty() ? 0.0 : imp_mean_nodes[k]);
        if (k == 0) break;
        const double t = nodes[k];
        const double h = nodes[k] - nodes[k - 1];
        const double y = out.left[k];
        const double k1 = rhs(t, y);
        const double k2 = rhs(t - 0.5 * h, y - 0.5 * h * k1);
        const double k3 = rhs(t - 0.5 * h, y - 0.5 * h * k2);
        const double k4 = rhs(t - h, y - h * k3);
        out.right[k - 1] = y - h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        if (!std::isfinite(out.right[k - 1]))
            throw Error(Errc::NonFiniteMean, "backward mean became non-finite");
    }
    out.left[0] = out.right[0];
    return out;
}

double BackwardMeanSolution::at(double t, const TimeGrid& grid) const {
    return lerp_nodes(grid.nodes(), ybar, t);
}

double BackwardMeanSolution::at_left(double t, const TimeGrid& grid) const {
    const std::size_t k = grid.locate(t);
    if (grid.node(k) == t) return ybar_left[k];
    return lerp_nodes(grid.nodes(), ybar, t);
}

BackwardMeanSolution solve_mean(const GeneralSpec& spec, const PathEnsemble& ens,
                                const ControlLaw& law, const ImpulseValues& imp) {
    if (!spec.driver_affine)
        throw Error(Errc::DriverNotLinear, "solve_mean needs the affine driver decomposition");
    (void)imp; // impulse values are read from the replayed paths themselves

    const TimeGrid& grid = ens.grid();
    const std::size_t n = grid.size();
    const std::size_t paths = static_cast<std::size_t>(ens.paths());
    const MarkSpace& ms = ens.mark_space();

    // ensemble tabulation of the driver's state part and the terminal values
    std::vector<double> term_slot(paths, 0.0);
    std::vector<double> g0_sum(n, 0.0);
    std::vector<double> imp_sum(n, 0.0);
    {
        // per-chunk accumulation to keep the reduction thread-schedule free
        constexpr std::size_t chunk = 64;
        const std::size_t n_chunks = (paths + chunk - 1) / chunk;
        std::vector<double> acc(n_chunks * n, 0.0), imp_acc(n_chunks * n, 0.0);
        ens.for_each_path([&](std::size_t p, const Path& path) {
            const std::size_t c = p / chunk;
            double* row = &acc[c * n];
            double* irow = &imp_acc[c * n];
            for (std::size_t k = 0; k < path.nodes.size(); ++k) {
                const PathNode& nd = path.nodes[k];
                const std::size_t ti = grid.locate(nd.t);
                if (grid.node(ti) == nd.t) {
                    double s = 0.0;
                    for (const auto& e : ms.atoms()) {
                        const double u = law.cont(nd.t, nd.x, nd.m, e);
                        s += spec.g0(nd.t, nd.x, nd.m, u, e) * e.weight;
                    }
                    row[ti] += s;
                }
                if (nd.impulse >= 0) {
                    // attribute the mean impulse jump to the covering node
                    const std::size_t kk = grid.node(ti) == nd.t ? ti : std::min(ti + 1, n - 1);
                    irow[kk] += spec.H(nd.t) * nd.eta;
                }
            }
            const PathNode& last = path.nodes.back();
            term_slot[p] = spec.h(last.x, last.m);
        });
        for (std::size_t c = 0; c < n_chunks; ++c)
            for (std::size_t k = 0; k < n; ++k) {
                g0_sum[k] += acc[c * n + k];
                imp_sum[k] += imp_acc[c * n + k];
            }
    }
    for (std::size_t k = 0; k < n; ++k) {
        g0_sum[k] /= static_cast<double>(paths);
        imp_sum[k] /= static_cast<double>(paths);
    }

    double term_mean = 0.0;
    for (std::size_t p = 0; p < paths; ++p) term_mean += term_slot[p];
    term_mean /= static_cast<double>(paths);
    double term_var = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        const double d = term_slot[p] - term_mean;
        term_var += d * d;
    }
    term_var = paths > 1 ? term_var / static_cast<double>(paths - 1) : 0.0;

    const double lam = ms.total_mass();
    const Curve Fy = spec.Fy, Fybar = spec.Fybar;
    MeanCurvePair pair = backward_mean_from_tabulated(
        grid, g0_sum, [Fy, Fybar, lam](double t) { return lam * (Fy(t) + Fybar(t)); }, term_mean,
        imp_sum);

    BackwardMeanSolution out;
    out.ybar = std::move(pair.right);
    out.ybar_left = std::move(pair.left);
    out.y0 = out.ybar[0];
    out.ci_half_width = 3.0 * std::sqrt(term_var / static_cast<double>(paths));
    return out;
}

Y0Estimate y0_via_representation(const PathEnsemble& ens, const GeneralSpec& spec,
                                 const BackwardMeanSolution* solved) {
    if (!spec.driver_affine)
        throw Error(Errc::DriverNotLinear, "representation needs the affine driver decomposition");
    const bool y_dependent = !(spec.Fy.is_constant() && spec.Fy.constant_value() == 0.0 &&
                               spec.Fybar.is_constant() && spec.Fybar.constant_value() == 0.0);
    if (y_dependent && !solved)
        throw Error(Errc::DriverNotLinear,
                    "driver depends on y: pass the solved mean or use solve_mean");

    const MarkSpace& ms = ens.mark_space();
    const ControlLaw& law = ens.law();
    const TimeGrid& grid = ens.grid();
    const double lam = ms.total_mass();
    const std::size_t paths = static_cast<std::size_t>(ens.paths());
    std::vector<double> slot(paths, 0.0);

    ens.for_each_path([&](std::size_t p, const Path& path) {
        double integral = 0.0, impulses = 0.0;
        for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
            const PathNode& nd = path.nodes[k];
            const double dt = path.nodes[k + 1].t - nd.t;
            double s = 0.0;
            for (const auto& e : ms.atoms()) {
                const double u = law.cont(nd.t, nd.x, nd.m, e);
                s += spec.g0(nd.t, nd.x, nd.m, u, e) * e.weight;
            }
            if (y_dependent) {
                const double yb = solved->at(nd.t, grid);
                s += lam * (spec.Fy(nd.t) + spec.Fybar(nd.t)) * yb;
            }
            integral += s * dt;
        }
        for (const auto& nd : path.nodes)
            if (nd.impulse >= 0) impulses += spec.H(nd.t) * nd.eta;
        const PathNode& last = path.nodes.back();
        slot[p] = spec.h(last.x, last.m) + integral - impulses;
    });

    double mean = 0.0;
    for (double v : slot) mean += v;
    mean /= static_cast<double>(paths);
    double var = 0.0;
    for (double v : slot) var += (v - mean) * (v - mean);
    var = paths > 1 ? var / static_cast<double>(paths - 1) : 0.0;
    return Y0Estimate{mean, 3.0 * std::sqrt(var / static_cast<double>(paths))};
}

} // namespace mfjump
