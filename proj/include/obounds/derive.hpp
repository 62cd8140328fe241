#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "obounds/model.hpp"
#include "obounds/response.hpp"
#include "obounds/symbolic.hpp"

namespace obounds {

struct DeriveOptions {
    /// Symbolic derivation limits; larger K falls back to numeric_bounds.
    int iv_k_limit = 5;
    int direct_k_limit = 8;
    bool prune = true;
    DropConvention convention = DropConvention::LexLast;
};

/// Sharp numeric bounds: (min, max) of c.q over { q >= 0, A q = b(law) }.
/// Throws InfeasibleLaw when the law is inconsistent with the assumed
/// model (possible for instrument tables).
std::pair<Rat, Rat> numeric_bounds_exact(const ObservedLaw& law, Estimand estimand);
Interval numeric_bounds(const ObservedLaw& law, Estimand estimand);

/// Whether some response distribution reproduces the law exactly.
bool law_feasible(const ObservedLaw& law);

/// Symbolic sharp bounds from the vertices of the two LP duals. Lower terms
/// come from the Min dual, upper terms from the Max dual; expressions are
/// canonicalized over the full symbol set, deduplicated, optionally pruned,
/// and sorted. Throws LimitExceeded above the configured K limit.
SymbolicBound derive_symbolic_bound(const StudySetting& setting, Estimand estimand, int K,
                                    const DeriveOptions& options = {});

/// Removes duplicate terms and terms dominated over the entire feasible law
/// polytope (pairwise vertex-value comparison first, then an exact max-min
/// auxiliary LP). Pointwise evaluation is unchanged.
SymbolicBound prune_terms(SymbolicBound bound);

/// Cache directory resolution: explicit argument, else OBOUNDS_CACHE_DIR,
/// else XDG_CACHE_HOME/obounds, else ~/.cache/obounds.
std::filesystem::path resolve_cache_dir(
    const std::optional<std::filesystem::path>& override_dir = std::nullopt);

/// derive_symbolic_bound backed by the on-disk JSON cache. Only
/// default-option derivations are cached; files are written via
/// temp-then-atomic-rename so concurrent writers are safe.
SymbolicBound derive_cached(const StudySetting& setting, Estimand estimand, int K,
                            const DeriveOptions& options = {},
                            const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace obounds
