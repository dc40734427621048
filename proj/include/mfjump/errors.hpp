#pragma once

#include <stdexcept>
#include <string>

namespace mfjump {

enum class Errc {
    EmptyMarkSpace,
    NonFiniteCoefficient,
    BadImpulseOrder,
    PicardDiverged,
    NonFiniteState,
    DriverNotLinear,
    NonFiniteMean,
    DeltaNonPositive,
    FixedPointDiverged,
    InconsistentSolution,
    EnsembleMismatch,
    MissingY0,
    ConfigError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::EmptyMarkSpace: return "EmptyMarkSpace";
        case Errc::NonFiniteCoefficient: return "NonFiniteCoefficient";
        case Errc::BadImpulseOrder: return "BadImpulseOrder";
        case Errc::PicardDiverged: return "PicardDiverged";
        case Errc::NonFiniteState: return "NonFiniteState";
        case Errc::DriverNotLinear: return "DriverNotLinear";
        case Errc::NonFiniteMean: return "NonFiniteMean";
        case Errc::DeltaNonPositive: return "DeltaNonPositive";
        case Errc::FixedPointDiverged: return "FixedPointDiverged";
        case Errc::InconsistentSolution: return "InconsistentSolution";
        case Errc::EnsembleMismatch: return "EnsembleMismatch";
        case Errc::MissingY0: return "MissingY0";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace mfjump
