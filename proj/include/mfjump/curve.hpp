#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace mfjump {

// Deterministic coefficient curve on [0,T]: a constant, a piecewise-linear
// table (clamped outside its range), or an arbitrary callable.
class Curve {
public:
    Curve() : kind_(Kind::Constant), c_(0.0) {}
    Curve(double c) : kind_(Kind::Constant), c_(c) {}
    Curve(std::vector<std::pair<double, double>> table)
        : kind_(Kind::Table), table_(std::make_shared<std::vector<std::pair<double, double>>>(std::move(table))) {}
    Curve(std::function<double(double)> fn)
        : kind_(Kind::Callable), fn_(std::make_shared<std::function<double(double)>>(std::move(fn))) {}

    double operator()(double t) const {
        switch (kind_) {
            case Kind::Constant: return c_;
            case Kind::Table: return eval_table(t);
            case Kind::Callable: return (*fn_)(t);
        }
        return c_;
    }

    bool is_constant() const { return kind_ == Kind::Constant; }
    double constant_value() const { return c_; }

private:
    enum class Kind { Constant, Table, Callable };

    double eval_table(double t) const {
        const auto& tb = *table_;
        if (tb.empty()) return 0.0;
        if (t <= tb.front().first) return tb.front().second;
        if (t >= tb.back().first) return tb.back().second;
        std::size_t hi = 1;
        while (tb[hi].first < t) ++hi;
        const auto& a = tb[hi - 1];
        const auto& b = tb[hi];
        const double w = (t - a.first) / (b.first - a.first);
        return a.second + w * (b.second - a.second);
    }

    Kind kind_;
    double c_ = 0.0;
    std::shared_ptr<std::vector<std::pair<double, double>>> table_;
    std::shared_ptr<std::function<double(double)>> fn_;
};

} // namespace mfjump
