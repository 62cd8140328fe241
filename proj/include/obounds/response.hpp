#pragma once

#include <optional>
#include <vector>

#include "obounds/model.hpp"
#include "obounds/rational.hpp"

namespace obounds {

/// Treatment response to the instrument, encoded as (x at z=0, x at z=1):
/// never (0,0), always (1,1), complier (0,1), defier (1,0).
struct XPattern {
    int at_z0 = 0;
    int at_z1 = 0;

    int at(int z) const { return z == 0 ? at_z0 : at_z1; }
    auto operator<=>(const XPattern&) const = default;
};

/// Outcome response to treatment: (y at x=0, y at x=1).
struct YPattern {
    int y0 = 0;
    int y1 = 0;

    int at(int x) const { return x == 0 ? y0 : y1; }
    auto operator<=>(const YPattern&) const = default;
};

/// Canonical finite parametrization of the latent structure. x_patterns is
/// empty for the randomized setting; y_patterns always has K^2 entries in
/// row-major (y0, y1) order. Component index = xp * K^2 + yp.
struct ResponseFunctionSpace {
    StudySetting setting;
    int K = 2;
    std::vector<XPattern> x_patterns;
    std::vector<YPattern> y_patterns;

    std::size_t n_components() const;
    std::size_t component_index(std::size_t xp, std::size_t yp) const;
    /// Observable cell produced by component under instrument value z
    /// (z ignored when the setting has none).
    ProbSymbol cell_of(std::size_t component, int z) const;
};

ResponseFunctionSpace enumerate_space(const StudySetting& setting, int K);

enum class DropConvention { LexLast, LexFirst };

/// Equality constraints A q = b linking the response distribution to the
/// observed law. Row 0 is the all-ones normalization (rhs 1); every other
/// row is one kept observable cell (rhs = that cell's probability). One
/// cell per stratum is dropped to keep full row rank.
struct ConstraintSystem {
    std::vector<std::vector<int>> matrix;        // entries 0/1
    std::vector<std::optional<ProbSymbol>> rhs;  // nullopt = normalization row
    std::vector<ProbSymbol> dropped;             // one per stratum

    std::size_t n_rows() const { return matrix.size(); }
    std::size_t n_cols() const { return matrix.empty() ? 0 : matrix[0].size(); }
};

/// Throws RankDeficient if the construction ever loses rank (verified by
/// rational Gaussian elimination).
ConstraintSystem build_constraints(const ResponseFunctionSpace& space,
                                   DropConvention convention = DropConvention::LexLast);

/// Right-hand side b for a concrete law: kept cells plus the normalization 1.
std::vector<Rat> constraint_rhs(const ConstraintSystem& system, const ObservedLaw& law);

/// Forward map: the observed law generated by response distribution q.
ObservedLaw forward_law(const ResponseFunctionSpace& space, const std::vector<Rat>& q);

/// Objective c with c.q = estimand value under q. Entries are -1/0/1 and
/// depend only on the y-pattern: psi -> y1 >= y0, theta -> y1 > y0,
/// phi -> sign(y1 - y0).
std::vector<int> build_objective(const ResponseFunctionSpace& space, Estimand estimand);

}  // namespace obounds
