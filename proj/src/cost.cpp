#include "mfjump/cost.hpp"

#include <cmath>

#include "mfjump/lq.hpp"

namespace mfjump {
namespace cost {

namespace {

struct PathCost {
    double lam = 0.0, jump = 0.0, term = 0.0, imp = 0.0;
    double total(double phi0) const { return lam + jump + term + imp + phi0; }
};

std::vector<PathCost> per_path_costs(const PathEnsemble& ens, const BackwardMeanSolution* bwd) {
    const GeneralSpec& spec = ens.spec();
    const ControlLaw& law = ens.law();
    const MarkSpace& ms = ens.mark_space();
    const TimeGrid& grid = ens.grid();
    std::vector<PathCost> slot(static_cast<std::size_t>(ens.paths()));

    ens.for_each_path([&](std::size_t p, const Path& path) {
        PathCost pc;
        for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
            const PathNode& nd = path.nodes[k];
            const double dt = path.nodes[k + 1].t - nd.t;
            const double yb = bwd ? bwd->at(nd.t, grid) : 0.0;
            double row = 0.0;
            for (const auto& e : ms.atoms())
                row += spec.l(nd.t, nd.x, nd.m, yb, law.cont(nd.t, nd.x, nd.m, e), e) * e.weight;
            pc.lam += row * dt;
        }
        for (const auto& nd : path.nodes) {
            if (nd.jump_mark >= 0) {
                const double yb = bwd ? bwd->at_left(nd.t, grid) : 0.0;
                pc.jump += spec.f(nd.t, nd.x_left, nd.m_left, yb, nd.u_jump,
                                  ms.atom(nd.jump_mark));
            }
            if (nd.impulse >= 0) pc.imp += spec.psi(nd.t, nd.eta);
        }
        const PathNode& last = path.nodes.back();
        pc.term = spec.phi_T(last.x, last.m);
        slot[p] = pc;
    });
    return slot;
}

} // namespace

CostEstimate evaluate_cost(const PathEnsemble& ens, const BackwardMeanSolution* bwd) {
    const GeneralSpec& spec = ens.spec();
    if (spec.phi0_depends_y0 && !bwd)
        throw Error(Errc::MissingY0, "phi0 depends on y0: a backward solution is required");

    const auto slot = per_path_costs(ens, bwd);
    const double phi0_val = spec.phi0 ? spec.phi0(bwd ? bwd->y0 : 0.0) : 0.0;
    const auto n = static_cast<double>(slot.size());

    CostEstimate out;
    out.paths = static_cast<int>(slot.size());
    for (const auto& pc : slot) {
        out.lambda_term += pc.lam;
        out.jump_term += pc.jump;
        out.terminal_term += pc.term;
        out.impulse_term += pc.imp;
    }
    out.lambda_term /= n;
    out.jump_term /= n;
    out.terminal_term /= n;
    out.impulse_term /= n;
    out.initial_term = phi0_val;
    out.mean = out.lambda_term + out.jump_term + out.terminal_term + out.impulse_term +
               out.initial_term;

    double var = 0.0;
    for (const auto& pc : slot) {
        const double d = pc.total(phi0_val) - out.mean;
        var += d * d;
    }
    var = slot.size() > 1 ? var / (n - 1.0) : 0.0;
    out.std_error = std::sqrt(var / n);
    return out;
}

StructureComparison compare_structures(double lambda_total, const SimConfig& cfg) {
    if (!(lambda_total > 0.0)) throw Error(Errc::ConfigError, "lambda(E) must be positive");
    const MarkSpace ms = MarkSpace::single(1.0, lambda_total);
    Example2 ex = example2_spec(ms);
    const double a = -0.75 * lambda_total;

    SimConfig prog_cfg = cfg;
    prog_cfg.exact_mean_rhs = [a](double t, double m) {
        return a * 2.0 / (2.0 * a * t - 2.0 * a + 1.0) * m;
    };
    SimConfig pred_cfg = cfg;
    pred_cfg.exact_mean_rhs = [lambda_total](double t, double m) {
        const double Q = 6.0 / (4.0 * (1.0 - t) * lambda_total + 3.0);
        return -(2.0 * lambda_total / 3.0) * Q * m;
    };

    PathEnsemble prog = simulate(ex.spec, ex.progressive_optimal, ImpulseValues::none(), ms, prog_cfg);
    PathEnsemble pred = simulate(ex.spec, ex.predictable_optimal, ImpulseValues::none(), ms, pred_cfg);
    const BackwardMeanSolution bw_prog = solve_mean(ex.spec, prog, ex.progressive_optimal, {});
    const BackwardMeanSolution bw_pred = solve_mean(ex.spec, pred, ex.predictable_optimal, {});

    StructureComparison out;
    out.lambda_total = lambda_total;
    out.prog = evaluate_cost(prog, &bw_prog);
    out.pred = evaluate_cost(pred, &bw_pred);
    out.prog_closed = lq::example2_cost_progressive(lambda_total);
    out.pred_closed = lq::example2_cost_predictable(lambda_total);
    out.gap_closed = out.pred_closed - out.prog_closed;

    // paired gap on common random numbers
    const auto prog_slot = per_path_costs(prog, &bw_prog);
    const auto pred_slot = per_path_costs(pred, &bw_pred);
    const double phi0_prog = ex.spec.phi0(bw_prog.y0);
    const double phi0_pred = ex.spec.phi0(bw_pred.y0);
    const auto n = static_cast<double>(prog_slot.size());
    double gap_mean = 0.0;
    for (std::size_t p = 0; p < prog_slot.size(); ++p)
        gap_mean += pred_slot[p].total(phi0_pred) - prog_slot[p].total(phi0_prog);
    gap_mean /= n;
    double gap_var = 0.0;
    for (std::size_t p = 0; p < prog_slot.size(); ++p) {
        const double d = pred_slot[p].total(phi0_pred) - prog_slot[p].total(phi0_prog) - gap_mean;
        gap_var += d * d;
    }
    gap_var = prog_slot.size() > 1 ? gap_var / (n - 1.0) : 0.0;
    out.gap_mc = gap_mean;
    out.gap_std_error = std::sqrt(gap_var / n);
    return out;
}

} // namespace cost
} // namespace mfjump
