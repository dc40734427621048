#include "mfjump/mark_space.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace mfjump {

MarkSpace::MarkSpace(std::vector<MarkAtom> atoms) : atoms_(std::move(atoms)) {
    std::set<std::string> ids;
    for (auto& a : atoms_) {
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw Error(Errc::EmptyMarkSpace, "atom weight must be strictly positive");
        if (!std::isfinite(a.value))
            throw Error(Errc::NonFiniteCoefficient, "atom value must be finite");
        if (a.id.empty()) a.id = "e" + std::to_string(ids.size());
        if (!ids.insert(a.id).second)
            throw Error(Errc::EmptyMarkSpace, "duplicate atom id '" + a.id + "'");
        total_mass_ += a.weight;
    }
    cdf_.reserve(atoms_.size());
    double acc = 0.0;
    for (const auto& a : atoms_) {
        acc += a.weight;
        cdf_.push_back(acc / total_mass_);
    }
    if (!cdf_.empty()) cdf_.back() = 1.0;
}

MarkSpace MarkSpace::single(double value, double weight, std::string id) {
    return MarkSpace({MarkAtom{std::move(id), value, weight}});
}

std::string MarkSpace::to_json() const {
    nlohmann::ordered_json j;
    j["atoms"] = nlohmann::ordered_json::array();
    for (const auto& a : atoms_) {
        nlohmann::ordered_json ja;
        ja["id"] = a.id;
        ja["value"] = a.value;
        ja["weight"] = a.weight;
        j["atoms"].push_back(ja);
    }
    return j.dump();
}

MarkSpace MarkSpace::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<MarkAtom> atoms;
    for (const auto& ja : j.at("atoms")) {
        MarkAtom a;
        a.id = ja.value("id", "");
        a.value = ja.at("value").get<double>();
        a.weight = ja.at("weight").get<double>();
        atoms.push_back(std::move(a));
    }
    return MarkSpace(std::move(atoms));
}

} // namespace mfjump
