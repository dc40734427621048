#pragma once

#include <string>
#include <vector>

#include "mfjump/errors.hpp"

namespace mfjump {

struct MarkAtom {
    std::string id;
    double value = 0.0;
    double weight = 0.0; // lambda({e}), > 0
};

// Finite mark measure lambda: discrete atoms with positive weights, so every
// lambda(de)-integral is an exact finite sum. total_mass() is lambda(E).
class MarkSpace {
public:
    MarkSpace() = default;
    explicit MarkSpace(std::vector<MarkAtom> atoms);

    static MarkSpace single(double value, double weight, std::string id = "e0");

    const std::vector<MarkAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    double total_mass() const { return total_mass_; }
    const MarkAtom& atom(std::size_t i) const { return atoms_[i]; }

    // cumulative probabilities weight_j / total_mass, for categorical sampling
    const std::vector<double>& cdf() const { return cdf_; }

    std::string to_json() const;
    static MarkSpace from_json(const std::string& text);

private:
    std::vector<MarkAtom> atoms_;
    std::vector<double> cdf_;
    double total_mass_ = 0.0;
};

} // namespace mfjump
