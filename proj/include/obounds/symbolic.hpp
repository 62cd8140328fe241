#pragma once

#include <algorithm>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "obounds/model.hpp"
#include "obounds/rational.hpp"

namespace obounds {

/// constant + sum of coef * p_symbol, exact rational coefficients.
/// The coefficient map holds no zero entries.
struct AffineExpression {
    Rat constant;
    std::map<ProbSymbol, Rat> coefs;

    Rat evaluate(const ObservedLaw& law) const;
    void set_coef(const ProbSymbol& symbol, Rat value);

    bool operator==(const AffineExpression& other) const {
        return constant == other.constant && coefs == other.coefs;
    }
    bool operator<(const AffineExpression& other) const {
        if (constant != other.constant) return constant < other.constant;
        return std::lexicographical_compare(
            coefs.begin(), coefs.end(), other.coefs.begin(), other.coefs.end(),
            [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return a.second < b.second;
            });
    }
};

/// Rewrites the expression using the per-stratum identities sum(cells) = 1
/// so that the most common coefficient in each stratum becomes zero. Gives
/// the sparse forms familiar from published bound displays; evaluation on
/// any exact law is unchanged.
AffineExpression canonicalize_expression(AffineExpression expr,
                                         const StudySetting& setting, int K);

/// lower = max over lower_terms, upper = min over upper_terms.
struct SymbolicBound {
    StudySetting setting;
    Estimand estimand = Estimand::Psi;
    int K = 2;
    std::vector<AffineExpression> lower_terms;
    std::vector<AffineExpression> upper_terms;
};

/// Exact rational evaluation; floating output converts at the final step.
std::pair<Rat, Rat> evaluate_bound_exact(const SymbolicBound& bound, const ObservedLaw& law);
Interval evaluate_bound(const SymbolicBound& bound, const ObservedLaw& law);

std::string render_expression(const AffineExpression& expr, const StudySetting& setting);
/// max{...} / min{...} display, one term per line.
std::string render_bound(const SymbolicBound& bound);

nlohmann::json bound_to_json(const SymbolicBound& bound);
SymbolicBound bound_from_json(const nlohmann::json& spec);
SymbolicBound read_bound_file(const std::string& path);
/// Write-temp-then-rename so concurrent writers never expose partial files.
void write_bound_file(const SymbolicBound& bound, const std::string& path);

}  // namespace obounds
