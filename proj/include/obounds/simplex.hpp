#pragma once

#include <vector>

#include "obounds/rational.hpp"

namespace obounds {

enum class Sense { Min, Max };

/// min/max c.x subject to A x = b, x >= 0, in exact rationals.
struct LinearProgram {
    Sense sense = Sense::Min;
    std::vector<Rat> c;
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;
};

struct LpSolution {
    Rat value;
    std::vector<Rat> x;
};

/// Two-phase tableau simplex with Bland's rule. Throws InfeasibleError
/// (with a Farkas certificate) when phase 1 ends positive, and
/// Error{Unbounded} when a column has no blocking row.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace obounds
