#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "obounds/rational.hpp"

namespace obounds {

enum class Errc {
    NegativeProbability,
    StratumSumMismatch,
    DimensionMismatch,
    EmptyStratum,
    MissingInstrumentColumn,
    SettingMismatch,
    Infeasible,
    Unbounded,
    RankDeficient,
    NotPointed,
    LimitExceeded,
    InfeasibleLaw,
    ConvergenceFailure,
    QuadratureResidueTooLarge,
    UnsupportedCombination,
    BadInput,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

/// LP infeasibility with the Farkas row combination y (y'A <= 0, y'b > 0).
class InfeasibleError : public Error {
public:
    InfeasibleError(Errc code, const std::string& message, std::vector<Rat> farkas)
        : Error(code, message), farkas_(std::move(farkas)) {}

    const std::vector<Rat>& farkas() const { return farkas_; }

private:
    std::vector<Rat> farkas_;
};

/// Process exit code contract: 0 success, 2 input/limit error, 3 model infeasibility.
int exit_code_for(Errc code);

}  // namespace obounds
