#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "obounds/derive.hpp"
#include "obounds/scenario.hpp"

namespace obounds {

struct StudyConfig {
    std::vector<Scenario> scenarios{Scenario::Randomized, Scenario::Confounded, Scenario::Iv,
                                    Scenario::IvNoDefiers};
    std::vector<int> Ks{3, 4, 5};
    int replicates = 500;
    std::uint64_t seed = 1;
    int jobs = 1;
    QuadratureSpec quad;
    Binning binning = Binning::Marginal;
    DeriveOptions derive;
    std::optional<std::filesystem::path> cache_dir;
};

struct EstimandRecord {
    double lower = 0.0;
    double upper = 0.0;
    double truth = 0.0;
    double width = 0.0;
};

struct ReplicateRecord {
    Scenario scenario = Scenario::Randomized;
    int K = 2;
    int replicate = 0;
    std::uint64_t seed = 0;
    ScenarioParams params;
    ObservedLaw law;
    EstimandRecord by_estimand[3];  // psi, theta, phi

    const EstimandRecord& of(Estimand e) const { return by_estimand[static_cast<int>(e)]; }
};

struct StudyResult {
    std::vector<ReplicateRecord> records;
};

/// Draws params, builds the law by quadrature, evaluates the cached
/// symbolic bounds and the true estimands for every replicate. Replicates
/// run on a worker pool; output order is by replicate index regardless of
/// scheduling, so results are byte-stable across pool sizes. A containment
/// failure (truth outside bounds by more than 1e-9) aborts the study.
StudyResult run_study(const StudyConfig& config);

void write_records_csv(std::ostream& out, const std::vector<ReplicateRecord>& records);

/// Per-(scenario, K, estimand) width statistics: mean/median/max plus
/// quantiles for distribution plots.
nlohmann::json summarize_study(const StudyResult& result);

}  // namespace obounds
