#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "obounds/model.hpp"
#include "obounds/quadrature.hpp"

namespace obounds {

enum class Scenario { Randomized, Confounded, Iv, IvNoDefiers };

std::string scenario_name(Scenario scenario);
Scenario parse_scenario(const std::string& name);
StudySetting setting_of(Scenario scenario);

/// Parameters of one replicate's law-generating mechanism. tau is the
/// latent treatment-effect shift; a1/a2 drive the confounded treatment
/// model; b1/b2 are the confounder main effect and interaction; c_sorted
/// are the compliance-type cutpoints on the uniform scale.
struct ScenarioParams {
    Scenario scenario = Scenario::Randomized;
    int K = 2;
    double p_inst = 0.5;
    double tau = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double b1 = 0.0, b2 = 0.0;
    std::vector<double> c_sorted;
};

/// Deterministic stream: mt19937_64 with explicit inverse-CDF transforms,
/// so draws do not depend on the standard library's distribution guts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double uniform(double lo, double hi);
    double normal(double sd);

private:
    std::mt19937_64 engine_;
};

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t scenario_id,
                             std::uint64_t K, std::uint64_t replicate);

ScenarioParams draw_params(Rng& rng, Scenario scenario, int K);

/// Which distribution of the latent outcome defines the equal-mass bins.
enum class Binning { Marginal, Control };

/// Cutpoints t_1 < ... < t_{K-1} with F(t_j) = j/K, F the scenario's
/// latent-outcome distribution, solved by bisection.
std::vector<double> mixture_cutpoints(const ScenarioParams& params, const QuadratureSpec& quad,
                                      Binning binning = Binning::Marginal);

/// Observable law of the scenario, marginalized over the latent confounder
/// by quadrature and renormalized per stratum (throws
/// QuadratureResidueTooLarge past 1e-8 residue).
ObservedLaw scenario_law(const ScenarioParams& params, const QuadratureSpec& quad,
                         Binning binning = Binning::Marginal);

struct Truths {
    double psi = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

/// True estimand values under the mechanism, with the shared-error
/// coupling: both potential outcomes bin the same latent draw, shifted by
/// tau + u*b2 under treatment.
Truths true_estimands(const ScenarioParams& params, const QuadratureSpec& quad,
                      Binning binning = Binning::Marginal);

}  // namespace obounds
