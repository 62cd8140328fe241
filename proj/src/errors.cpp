#include "obounds/errors.hpp"

namespace obounds {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::NegativeProbability: return "NegativeProbability";
        case Errc::StratumSumMismatch: return "StratumSumMismatch";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyStratum: return "EmptyStratum";
        case Errc::MissingInstrumentColumn: return "MissingInstrumentColumn";
        case Errc::SettingMismatch: return "SettingMismatch";
        case Errc::Infeasible: return "Infeasible";
        case Errc::Unbounded: return "Unbounded";
        case Errc::RankDeficient: return "RankDeficient";
        case Errc::NotPointed: return "NotPointed";
        case Errc::LimitExceeded: return "LimitExceeded";
        case Errc::InfeasibleLaw: return "InfeasibleLaw";
        case Errc::ConvergenceFailure: return "ConvergenceFailure";
        case Errc::QuadratureResidueTooLarge: return "QuadratureResidueTooLarge";
        case Errc::UnsupportedCombination: return "UnsupportedCombination";
        case Errc::BadInput: return "BadInput";
    }
    return "Unknown";
}

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::InfeasibleLaw:
            return 3;
        default:
            return 2;
    }
}

}  // namespace obounds
