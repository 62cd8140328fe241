#include "obounds/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "obounds/errors.hpp"

namespace obounds {

std::string scenario_name(Scenario scenario) {
    switch (scenario) {
        case Scenario::Randomized: return "randomized";
        case Scenario::Confounded: return "confounded";
        case Scenario::Iv: return "iv";
        case Scenario::IvNoDefiers: return "iv_no_defiers";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    if (name == "randomized") return Scenario::Randomized;
    if (name == "confounded") return Scenario::Confounded;
    if (name == "iv") return Scenario::Iv;
    if (name == "iv_no_defiers" || name == "iv-no-defiers") return Scenario::IvNoDefiers;
    throw Error(Errc::BadInput, "unknown scenario '" + name + "'");
}

StudySetting setting_of(Scenario scenario) {
    switch (scenario) {
        case Scenario::Randomized: return {Setting::Randomized, false};
        case Scenario::Confounded: return {Setting::Confounded, false};
        case Scenario::Iv: return {Setting::Iv, false};
        case Scenario::IvNoDefiers: return {Setting::Iv, true};
    }
    return {};
}

double Rng::uniform01() {
    // 53-bit mantissa, shifted to the open interval (0,1).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal(double sd) { return sd * norm_quantile(uniform01()); }

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t scenario_id,
                             std::uint64_t K, std::uint64_t replicate) {
    // splitmix64 over the packed identifiers: one independent stream per
    // replicate, no matter how work is scheduled.
    std::uint64_t v = base_seed;
    for (std::uint64_t salt :
         {scenario_id + 1, K, static_cast<std::uint64_t>(replicate + 0x9E3779B97F4A7C15ULL)}) {
        v += 0x9E3779B97F4A7C15ULL * (salt + 1);
        v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
        v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
        v ^= v >> 31;
    }
    return v;
}

ScenarioParams draw_params(Rng& rng, Scenario scenario, int K) {
    if (K < 2) throw Error(Errc::BadInput, "K must be at least 2");
    ScenarioParams params;
    params.scenario = scenario;
    params.K = K;
    const bool needs_instrument_prob = scenario != Scenario::Confounded;
    if (needs_instrument_prob) params.p_inst = rng.uniform(0.2, 0.8);
    params.tau = rng.normal(2.0);
    if (scenario == Scenario::Confounded) {
        params.a1 = rng.normal(1.0);
        params.a2 = rng.normal(1.0);
    }
    if (scenario != Scenario::Randomized) {
        params.b1 = rng.normal(2.0);
        params.b2 = rng.normal(2.0);
    }
    if (scenario == Scenario::Iv || scenario == Scenario::IvNoDefiers) {
        const int cuts = scenario == Scenario::Iv ? 3 : 2;
        for (int i = 0; i < cuts; ++i) params.c_sorted.push_back(rng.uniform01());
        std::sort(params.c_sorted.begin(), params.c_sorted.end());
    }
    return params;
}

namespace {

constexpr double kUMax = 10.0;  // +-10 sd of the confounder carries all mass at 1e-8 scale

double latent_mean(const ScenarioParams& params, int x, double u) {
    return x * params.tau + u * params.b1 + x * u * params.b2;
}

double treated_probability(const ScenarioParams& params, double u) {
    return norm_cdf(params.a1 + params.a2 * u);
}

/// Compliance-type intervals on the confounder scale, with the treatment
/// each type takes under z=0 and z=1. Order: never, always, complier
/// (, defier).
struct TypeInterval {
    double lo, hi;
    int x0, x1;

    int x(int z) const { return z == 0 ? x0 : x1; }
};

std::vector<TypeInterval> type_intervals(const ScenarioParams& params) {
    std::vector<double> qs;
    for (double c : params.c_sorted) qs.push_back(norm_quantile(c));
    std::vector<TypeInterval> types;
    if (params.scenario == Scenario::Iv) {
        types.push_back({-kUMax, qs[0], 0, 0});
        types.push_back({qs[0], qs[1], 1, 1});
        types.push_back({qs[1], qs[2], 0, 1});
        types.push_back({qs[2], kUMax, 1, 0});
    } else {
        types.push_back({-kUMax, qs[0], 0, 0});
        types.push_back({qs[0], qs[1], 1, 1});
        types.push_back({qs[1], kUMax, 0, 1});
    }
    for (auto& type : types) {
        type.lo = std::clamp(type.lo, -kUMax, kUMax);
        type.hi = std::clamp(type.hi, -kUMax, kUMax);
    }
    return types;
}

/// Latent-outcome CDF used for binning.
double latent_cdf(const ScenarioParams& params, const QuadratureSpec& quad, Binning binning,
                  double t) {
    if (binning == Binning::Control) {
        // Distribution of the untreated latent outcome: N(0, 1 + b1^2).
        return norm_cdf(t / std::sqrt(1.0 + params.b1 * params.b1));
    }
    switch (params.scenario) {
        case Scenario::Randomized:
            return (1.0 - params.p_inst) * norm_cdf(t) +
                   params.p_inst * norm_cdf(t - params.tau);
        case Scenario::Confounded:
            return integrate_normal(quad.nodes, [&](double u) {
                const double p = treated_probability(params, u);
                return (1.0 - p) * norm_cdf(t - latent_mean(params, 0, u)) +
                       p * norm_cdf(t - latent_mean(params, 1, u));
            });
        case Scenario::Iv:
        case Scenario::IvNoDefiers: {
            double total = 0.0;
            for (const auto& type : type_intervals(params)) {
                for (int z = 0; z < 2; ++z) {
                    const double weight = z == 0 ? 1.0 - params.p_inst : params.p_inst;
                    total += weight * integrate_normal_segment(
                                          quad.nodes, type.lo, type.hi, [&](double u) {
                                              return norm_cdf(t - latent_mean(params, type.x(z), u));
                                          });
                }
            }
            return total;
        }
    }
    return 0.0;
}

double bracket_radius(const ScenarioParams& params) {
    return std::abs(params.tau) + kUMax * (std::abs(params.b1) + std::abs(params.b2)) + 10.0;
}

/// pr(Y = y | latent mean mu) for the bin grid.
double bin_probability(const std::vector<double>& cuts, int y, double mu) {
    const int K = static_cast<int>(cuts.size()) + 1;
    const double hi = y == K - 1 ? 1.0 : norm_cdf(cuts[y] - mu);
    const double lo = y == 0 ? 0.0 : norm_cdf(cuts[y - 1] - mu);
    return std::max(hi - lo, 0.0);
}

void renormalize(ObservedLaw& law) {
    for (const auto& stratum : strata_symbols(law.setting, law.K)) {
        Rat sum = 0;
        for (const auto& cell : stratum) sum += law.at(cell);
        const double residue = std::abs(to_double(sum) - 1.0);
        if (residue > 1e-8) {
            throw Error(Errc::QuadratureResidueTooLarge,
                        "stratum residue " + std::to_string(residue));
        }
        for (const auto& cell : stratum) law.at(cell) /= sum;
    }
}

}  // namespace

std::vector<double> mixture_cutpoints(const ScenarioParams& params, const QuadratureSpec& quad,
                                      Binning binning) {
    validate_quadrature(quad);
    const double radius = bracket_radius(params);
    std::vector<double> cuts;
    for (int j = 1; j < params.K; ++j) {
        const double target = static_cast<double>(j) / params.K;
        cuts.push_back(bisect_increasing(
            [&](double t) { return latent_cdf(params, quad, binning, t); }, target, -radius,
            radius, quad.tol));
    }
    return cuts;
}

ObservedLaw scenario_law(const ScenarioParams& params, const QuadratureSpec& quad,
                         Binning binning) {
    const auto cuts = mixture_cutpoints(params, quad, binning);
    ObservedLaw law;
    law.setting = setting_of(params.scenario);
    law.K = params.K;
    law.table.assign(static_cast<std::size_t>(law.n_strata()) * law.cells_per_stratum(), Rat(0));

    switch (params.scenario) {
        case Scenario::Randomized:
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < params.K; ++y) {
                    law.at({-1, x, y}) = Rat(bin_probability(cuts, y, latent_mean(params, x, 0.0)));
                }
            }
            break;
        case Scenario::Confounded:
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < params.K; ++y) {
                    const double cell = integrate_normal(quad.nodes, [&](double u) {
                        const double p = treated_probability(params, u);
                        const double px = x == 1 ? p : 1.0 - p;
                        return px * bin_probability(cuts, y, latent_mean(params, x, u));
                    });
                    law.at({-1, x, y}) = Rat(std::max(cell, 0.0));
                }
            }
            break;
        case Scenario::Iv:
        case Scenario::IvNoDefiers:
            for (const auto& type : type_intervals(params)) {
                for (int z = 0; z < 2; ++z) {
                    const int x = type.x(z);
                    for (int y = 0; y < params.K; ++y) {
                        const double mass = integrate_normal_segment(
                            quad.nodes, type.lo, type.hi, [&](double u) {
                                return bin_probability(cuts, y, latent_mean(params, x, u));
                            });
                        law.at({z, x, y}) += Rat(std::max(mass, 0.0));
                    }
                }
            }
            break;
    }
    renormalize(law);
    return validate_law(std::move(law));
}

namespace {

/// P(some cutpoint lies in (w, w + delta]) for w ~ N(mean, 1), delta > 0:
/// the measure of the union of [t_j - delta, t_j).
double crossing_probability(const std::vector<double>& cuts, double delta, double mean) {
    double total = 0.0;
    double open_lo = 0.0, open_hi = 0.0;
    bool open = false;
    for (double t : cuts) {
        const double lo = t - delta, hi = t;
        if (open && lo <= open_hi) {
            open_hi = hi;
        } else {
            if (open) total += norm_cdf(open_hi - mean) - norm_cdf(open_lo - mean);
            open_lo = lo;
            open_hi = hi;
            open = true;
        }
    }
    if (open) total += norm_cdf(open_hi - mean) - norm_cdf(open_lo - mean);
    return total;
}

/// psi/theta/phi conditional on the confounder.
Truths truths_at(const std::vector<double>& cuts, double delta, double mean) {
    Truths t;
    if (delta >= 0.0) {
        t.theta = crossing_probability(cuts, delta, mean);
        t.psi = 1.0;
    } else {
        t.theta = 0.0;
        t.psi = 1.0 - crossing_probability(cuts, -delta, mean + delta);
    }
    t.phi = t.theta + t.psi - 1.0;
    return t;
}

}  // namespace

Truths true_estimands(const ScenarioParams& params, const QuadratureSpec& quad,
                      Binning binning) {
    const auto cuts = mixture_cutpoints(params, quad, binning);
    if (params.scenario == Scenario::Randomized) {
        return truths_at(cuts, params.tau, 0.0);
    }

    // The per-u integrand has kinks where tau + u*b2 hits 0 or +-(gap
    // between consecutive cutpoints); splitting there keeps each segment
    // analytic for the Gauss-Legendre rule.
    std::vector<double> breaks{-kUMax, kUMax};
    if (params.b2 != 0.0) {
        auto add_break = [&](double delta_value) {
            const double u = (delta_value - params.tau) / params.b2;
            if (u > -kUMax && u < kUMax) breaks.push_back(u);
        };
        add_break(0.0);
        for (std::size_t j = 1; j < cuts.size(); ++j) {
            const double gap = cuts[j] - cuts[j - 1];
            add_break(gap);
            add_break(-gap);
        }
    }
    std::sort(breaks.begin(), breaks.end());

    Truths total;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double psi_part = integrate_normal_segment(
            quad.nodes, breaks[s], breaks[s + 1], [&](double u) {
                return truths_at(cuts, params.tau + u * params.b2, u * params.b1).psi;
            });
        const double theta_part = integrate_normal_segment(
            quad.nodes, breaks[s], breaks[s + 1], [&](double u) {
                return truths_at(cuts, params.tau + u * params.b2, u * params.b1).theta;
            });
        total.psi += psi_part;
        total.theta += theta_part;
    }
    total.phi = total.theta + total.psi - 1.0;
    return total;
}

}  // namespace obounds
