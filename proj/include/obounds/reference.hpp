#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "obounds/model.hpp"
#include "obounds/symbolic.hpp"

namespace obounds {

/// Marginal potential-outcome probabilities pr{Y(1)=k}, pr{Y(0)=k}.
/// Estimable in randomized studies, where they coincide with the observed
/// conditionals pr(Y=k|X=x).
struct MarginalPotentialLaw {
    int K = 2;
    std::vector<Rat> p0;
    std::vector<Rat> p1;
};

MarginalPotentialLaw validate_margins(MarginalPotentialLaw margins);
MarginalPotentialLaw margins_from_randomized(const ObservedLaw& law);

/// Randomized law whose conditionals equal the given margins.
ObservedLaw randomized_law(const MarginalPotentialLaw& margins);

/// Lu/Ding/Dasgupta 2018 sharp bounds on pr{Y(1) >= Y(0)}.
std::pair<Rat, Rat> lu2018_psi(const MarginalPotentialLaw& margins);

/// Lu/Ding/Dasgupta 2018 sharp bounds on pr{Y(1) > Y(0)}.
std::pair<Rat, Rat> lu2018_theta(const MarginalPotentialLaw& margins);

/// Lu/Wang/Zhang 2020 sharp bounds on the relative treatment effect.
std::pair<Rat, Rat> lu2020_phi(const MarginalPotentialLaw& margins);

/// Fay-style composition phi = theta + psi - 1 applied to the 2018
/// intervals, clipped to [-1, 1]. Valid but not sharp.
std::pair<Rat, Rat> fay_phi(const MarginalPotentialLaw& margins);

/// Closed forms for the fully confounded setting, any K >= 2:
/// psi in [p00 + p1(K-1), 1], theta in [0, 1 - p10 - p0(K-1)],
/// phi in [p00 + p1(K-1) - 1, 1 - p10 - p0(K-1)].
std::pair<Rat, Rat> confounded_closed_form(Estimand estimand, const ObservedLaw& law);
Interval theorem_bounds(Estimand estimand, const ObservedLaw& law);

/// Transcribed K=3 instrument-setting term lists, shipped as JSON data.
/// These are immutable regression fixtures. Throws UnsupportedCombination
/// for (unrestricted, phi), whose display is not transcribed.
SymbolicBound load_fixture_bound(Estimand estimand, bool no_defiers,
                                 const std::filesystem::path& fixture_dir);
std::pair<Rat, Rat> fixture_results_k3(Estimand estimand, bool no_defiers,
                                       const ObservedLaw& law,
                                       const std::filesystem::path& fixture_dir);

/// Fixture directory resolution: OBOUNDS_FIXTURE_DIR, else the path baked
/// in at configure time.
std::filesystem::path resolve_fixture_dir();

}  // namespace obounds
