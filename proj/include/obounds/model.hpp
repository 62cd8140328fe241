#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "obounds/rational.hpp"

namespace obounds {

/// Ordinal outcome with levels 0..K-1.
struct OutcomeSpace {
    int K = 2;

    explicit OutcomeSpace(int levels);
};

enum class Setting { Randomized, Confounded, Iv };

struct StudySetting {
    Setting kind = Setting::Randomized;
    bool no_defiers = false;  // meaningful for Iv only

    bool has_instrument() const { return kind == Setting::Iv; }
    auto operator<=>(const StudySetting&) const = default;
};

std::string setting_name(const StudySetting& setting);
StudySetting parse_setting(const std::string& name, bool no_defiers);

enum class Estimand { Psi, Theta, Phi };

std::string estimand_name(Estimand estimand);
Estimand parse_estimand(const std::string& name);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Codomain of the estimand: [0,1] for psi/theta, [-1,1] for phi.
Interval codomain(Estimand estimand);

/// Index of one observed-probability cell. z is -1 when the setting has no
/// instrument. Printed as p_xy (confounded), p_y.x (randomized conditional)
/// or p_xy.z (instrument).
struct ProbSymbol {
    int z = -1;
    int x = 0;
    int y = 0;

    auto operator<=>(const ProbSymbol&) const = default;
};

std::string symbol_name(const StudySetting& setting, const ProbSymbol& symbol);
ProbSymbol parse_symbol(const StudySetting& setting, const std::string& name);

/// Observed probability table. Entry order is [x][y] (randomized holds
/// pr(Y=y|X=x), confounded pr(X=x,Y=y)) or [z][x][y] (pr(X=x,Y=y|Z=z)).
struct ObservedLaw {
    StudySetting setting;
    int K = 2;
    std::vector<Rat> table;

    int n_strata() const;
    int cells_per_stratum() const;
    std::size_t index_of(const ProbSymbol& symbol) const;
    const Rat& at(const ProbSymbol& symbol) const;
    Rat& at(const ProbSymbol& symbol);
};

/// All cell symbols of one conditioning stratum, in lexicographic (x, y)
/// order. Strata: one per x for randomized, a single one for confounded,
/// one per z for the instrument setting.
std::vector<std::vector<ProbSymbol>> strata_symbols(const StudySetting& setting, int K);

/// Flat list of every cell symbol, taken stratum by stratum.
std::vector<ProbSymbol> all_symbols(const StudySetting& setting, int K);

/// Checks dimensions, entry range and per-stratum sums (tolerance 1e-9 for
/// user-supplied tables; count- and response-derived laws sum exactly).
/// Returns the law unchanged on success.
ObservedLaw validate_law(ObservedLaw law);

struct CountRecord {
    std::optional<int> z;
    int x = 0;
    int y = 0;
    long long count = 0;
};

/// Plug-in proportions per conditioning stratum; sums are exact by
/// construction so the result always passes validate_law.
ObservedLaw law_from_counts(const std::vector<CountRecord>& records,
                            const StudySetting& setting, int K);

nlohmann::json law_to_json(const ObservedLaw& law);
ObservedLaw law_from_json(const nlohmann::json& spec);
ObservedLaw read_law_file(const std::string& path);

/// Counts CSV with header z,x,y,count (z blank or the column absent when the
/// setting has no instrument).
std::vector<CountRecord> read_counts_csv(std::istream& input);
std::vector<CountRecord> read_counts_file(const std::string& path);

}  // namespace obounds
