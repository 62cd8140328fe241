#include "obounds/reference.hpp"

#include <cstdlib>

#include "obounds/errors.hpp"

#ifndef OBOUNDS_FIXTURE_DEFAULT_DIR
#define OBOUNDS_FIXTURE_DEFAULT_DIR "data/fixtures/v1"
#endif

namespace obounds {

namespace {

const Rat kMarginTol(1, 1000000000);

Rat clip(const Rat& value, const Rat& lo, const Rat& hi) {
    return rat_min(hi, rat_max(lo, value));
}

}  // namespace

MarginalPotentialLaw validate_margins(MarginalPotentialLaw margins) {
    if (margins.K < 2) throw Error(Errc::DimensionMismatch, "K must be at least 2");
    for (const auto* arm : {&margins.p0, &margins.p1}) {
        if (arm->size() != static_cast<std::size_t>(margins.K)) {
            throw Error(Errc::DimensionMismatch, "margin vector length does not match K");
        }
        Rat sum = 0;
        for (const Rat& value : *arm) {
            if (value < 0) throw Error(Errc::NegativeProbability, "negative margin entry");
            sum += value;
        }
        const Rat deviation = sum - 1;
        if (deviation > kMarginTol || deviation < -kMarginTol) {
            throw Error(Errc::StratumSumMismatch, "margin vector does not sum to 1");
        }
    }
    return margins;
}

MarginalPotentialLaw margins_from_randomized(const ObservedLaw& law) {
    if (law.setting.kind != Setting::Randomized) {
        throw Error(Errc::SettingMismatch, "potential-outcome margins need a randomized law");
    }
    MarginalPotentialLaw margins;
    margins.K = law.K;
    for (int y = 0; y < law.K; ++y) {
        margins.p0.push_back(law.at({-1, 0, y}));
        margins.p1.push_back(law.at({-1, 1, y}));
    }
    return margins;
}

ObservedLaw randomized_law(const MarginalPotentialLaw& margins) {
    ObservedLaw law;
    law.setting = {Setting::Randomized, false};
    law.K = margins.K;
    law.table.reserve(2 * margins.K);
    law.table.insert(law.table.end(), margins.p0.begin(), margins.p0.end());
    law.table.insert(law.table.end(), margins.p1.begin(), margins.p1.end());
    return law;
}

namespace {

/// Survivor sum pr{Y(x) >= j}; empty range gives 0.
Rat upper_tail(const std::vector<Rat>& pmf, int j) {
    Rat sum = 0;
    for (int k = std::max(j, 0); k < static_cast<int>(pmf.size()); ++k) sum += pmf[k];
    return sum;
}

Rat range_sum(const std::vector<Rat>& pmf, int lo, int hi) {
    Rat sum = 0;
    for (int k = std::max(lo, 0); k <= std::min(hi, static_cast<int>(pmf.size()) - 1); ++k) {
        sum += pmf[k];
    }
    return sum;
}

}  // namespace

std::pair<Rat, Rat> lu2018_psi(const MarginalPotentialLaw& margins) {
    const int K = margins.K;
    Rat lower, upper;
    for (int j = 0; j < K; ++j) {
        const Rat gap = upper_tail(margins.p1, j) - upper_tail(margins.p0, j);
        const Rat low_term = margins.p0[j] + gap;
        const Rat up_term = 1 + gap;
        if (j == 0 || low_term > lower) lower = low_term;
        if (j == 0 || up_term < upper) upper = up_term;
    }
    return {lower, upper};
}

std::pair<Rat, Rat> lu2018_theta(const MarginalPotentialLaw& margins) {
    const int K = margins.K;
    Rat lower, upper;
    for (int j = 0; j < K; ++j) {
        const Rat gap = upper_tail(margins.p1, j) - upper_tail(margins.p0, j);
        const Rat low_term = gap;
        const Rat up_term = 1 + gap - margins.p1[j];
        if (j == 0 || low_term > lower) lower = low_term;
        if (j == 0 || up_term < upper) upper = up_term;
    }
    return {lower, upper};
}

std::pair<Rat, Rat> lu2020_phi(const MarginalPotentialLaw& margins) {
    const int K = margins.K;
    bool first = true;
    Rat lower, upper;
    for (int j = 1; j <= K - 1; ++j) {
        for (int m = 1; m <= K - j; ++m) {
            const Rat up_term = range_sum(margins.p1, j, K - 1) +
                                range_sum(margins.p1, j + m, K - 1) +
                                range_sum(margins.p0, 0, j - 2) -
                                range_sum(margins.p0, j + m - 1, K - 1);
            const Rat low_term = range_sum(margins.p1, j + m - 1, K - 1) -
                                 range_sum(margins.p0, j, K - 1) -
                                 range_sum(margins.p0, j + m, K - 1) -
                                 range_sum(margins.p1, 0, j - 2);
            if (first || up_term < upper) upper = up_term;
            if (first || low_term > lower) lower = low_term;
            first = false;
        }
    }
    return {lower, upper};
}

std::pair<Rat, Rat> fay_phi(const MarginalPotentialLaw& margins) {
    const auto psi = lu2018_psi(margins);
    const auto theta = lu2018_theta(margins);
    return {clip(theta.first + psi.first - 1, Rat(-1), Rat(1)),
            clip(theta.second + psi.second - 1, Rat(-1), Rat(1))};
}

std::pair<Rat, Rat> confounded_closed_form(Estimand estimand, const ObservedLaw& law) {
    if (law.setting.kind != Setting::Confounded) {
        throw Error(Errc::SettingMismatch, "closed forms require a confounded law");
    }
    const Rat no_harm_mass = law.at({-1, 0, 0}) + law.at({-1, 1, law.K - 1});
    const Rat harm_free = Rat(1) - law.at({-1, 1, 0}) - law.at({-1, 0, law.K - 1});
    switch (estimand) {
        case Estimand::Psi: return {no_harm_mass, Rat(1)};
        case Estimand::Theta: return {Rat(0), harm_free};
        case Estimand::Phi: return {no_harm_mass - 1, harm_free};
    }
    throw Error(Errc::BadInput, "unknown estimand");
}

Interval theorem_bounds(Estimand estimand, const ObservedLaw& law) {
    auto [lower, upper] = confounded_closed_form(estimand, law);
    return {to_double(lower), to_double(upper)};
}

std::filesystem::path resolve_fixture_dir() {
    if (const char* env = std::getenv("OBOUNDS_FIXTURE_DIR")) return env;
    return OBOUNDS_FIXTURE_DEFAULT_DIR;
}

SymbolicBound load_fixture_bound(Estimand estimand, bool no_defiers,
                                 const std::filesystem::path& fixture_dir) {
    if (estimand == Estimand::Phi && !no_defiers) {
        throw Error(Errc::UnsupportedCombination,
                    "no transcribed display for the unrestricted instrument phi bound");
    }
    std::string name = "iv_";
    if (no_defiers) name += "nodef_";
    name += estimand_name(estimand) + ".json";
    return read_bound_file((fixture_dir / name).string());
}

std::pair<Rat, Rat> fixture_results_k3(Estimand estimand, bool no_defiers,
                                       const ObservedLaw& law,
                                       const std::filesystem::path& fixture_dir) {
    if (law.K != 3 || !law.setting.has_instrument()) {
        throw Error(Errc::SettingMismatch, "fixtures cover the K=3 instrument setting only");
    }
    SymbolicBound bound = load_fixture_bound(estimand, no_defiers, fixture_dir);
    // Fixture evaluation ignores the no-defiers flag mismatch on the law:
    // the same observed table feeds both engines.
    bound.setting = law.setting;
    return evaluate_bound_exact(bound, law);
}

}  // namespace obounds
