#include "obounds/derive.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <random>
#include <string>

#include "obounds/dd.hpp"
#include "obounds/errors.hpp"
#include "obounds/simplex.hpp"

namespace obounds {

namespace {

constexpr int kEngineVersion = 1;

LinearProgram bound_program(const ConstraintSystem& system, const std::vector<int>& objective,
                            const ObservedLaw& law, Sense sense) {
    LinearProgram lp;
    lp.sense = sense;
    lp.c.assign(objective.begin(), objective.end());
    lp.A.reserve(system.n_rows());
    for (const auto& row : system.matrix) lp.A.emplace_back(row.begin(), row.end());
    lp.b = constraint_rhs(system, law);
    return lp;
}

}  // namespace

std::pair<Rat, Rat> numeric_bounds_exact(const ObservedLaw& law, Estimand estimand) {
    const auto space = enumerate_space(law.setting, law.K);
    const auto system = build_constraints(space);
    const auto objective = build_objective(space, estimand);
    try {
        const Rat lower = solve_lp(bound_program(system, objective, law, Sense::Min)).value;
        const Rat upper = solve_lp(bound_program(system, objective, law, Sense::Max)).value;
        return {lower, upper};
    } catch (const InfeasibleError&) {
        throw Error(Errc::InfeasibleLaw,
                    "law is inconsistent with the " + setting_name(law.setting) + " model");
    }
}

Interval numeric_bounds(const ObservedLaw& law, Estimand estimand) {
    auto [lower, upper] = numeric_bounds_exact(law, estimand);
    return {to_double(lower), to_double(upper)};
}

bool law_feasible(const ObservedLaw& law) {
    const auto space = enumerate_space(law.setting, law.K);
    const auto system = build_constraints(space);
    const auto objective = std::vector<int>(space.n_components(), 0);
    try {
        solve_lp(bound_program(system, objective, law, Sense::Min));
        return true;
    } catch (const InfeasibleError&) {
        return false;
    }
}

namespace {

AffineExpression vertex_expression(const std::vector<Rat>& vertex,
                                   const ConstraintSystem& system,
                                   const StudySetting& setting, int K) {
    AffineExpression expr;
    for (std::size_t i = 0; i < vertex.size(); ++i) {
        if (vertex[i] == 0) continue;
        if (system.rhs[i]) {
            expr.set_coef(*system.rhs[i], vertex[i]);
        } else {
            expr.constant += vertex[i];
        }
    }
    return canonicalize_expression(std::move(expr), setting, K);
}

std::vector<AffineExpression> dedup_sorted(std::vector<AffineExpression> terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

/// Term values at the unit response distributions (the vertices of the
/// feasible law polytope). Every domination question over feasible laws
/// reduces to these columns.
std::vector<std::vector<Rat>> term_vertex_values(const std::vector<AffineExpression>& terms,
                                                 const ResponseFunctionSpace& space) {
    const std::size_t n = space.n_components();
    std::vector<ObservedLaw> unit_laws;
    unit_laws.reserve(n);
    std::vector<Rat> q(n, Rat(0));
    for (std::size_t j = 0; j < n; ++j) {
        q[j] = 1;
        unit_laws.push_back(forward_law(space, q));
        q[j] = 0;
    }
    std::vector<std::vector<Rat>> values(terms.size(), std::vector<Rat>(n));
    for (std::size_t t = 0; t < terms.size(); ++t) {
        for (std::size_t j = 0; j < n; ++j) values[t][j] = terms[t].evaluate(unit_laws[j]);
    }
    return values;
}

/// max over the law polytope of min_s (sign * (values[t] - values[s])),
/// as an LP over the response simplex. Nonpositive means t never strictly
/// exceeds (lower lists) / never strictly undercuts (upper lists) every
/// remaining term, so dropping t leaves the pointwise bound unchanged.
Rat domination_gap(std::size_t t, const std::vector<std::size_t>& others, int sign,
                   const std::vector<std::vector<Rat>>& values) {
    const std::size_t n = values[t].size();
    const std::size_t s_count = others.size();
    // Columns: q (n), delta+ , delta-, slack per comparison.
    LinearProgram lp;
    lp.sense = Sense::Max;
    lp.c.assign(n + 2 + s_count, Rat(0));
    lp.c[n] = 1;
    lp.c[n + 1] = -1;
    for (std::size_t k = 0; k < s_count; ++k) {
        std::vector<Rat> row(n + 2 + s_count, Rat(0));
        const std::size_t s = others[k];
        for (std::size_t j = 0; j < n; ++j) row[j] = sign * (values[t][j] - values[s][j]);
        row[n] = -1;
        row[n + 1] = 1;
        row[n + 2 + k] = -1;
        lp.A.push_back(std::move(row));
        lp.b.push_back(Rat(0));
    }
    std::vector<Rat> norm(n + 2 + s_count, Rat(0));
    for (std::size_t j = 0; j < n; ++j) norm[j] = 1;
    lp.A.push_back(std::move(norm));
    lp.b.push_back(Rat(1));
    return solve_lp(lp).value;
}

/// Compact float simplex (two-phase, Dantzig) for the witness screen:
/// maximize c.x with Ax = b, x >= 0. Returns false when the pivot budget
/// runs out or the tableau degenerates; callers then use the exact path.
bool float_lp(std::vector<std::vector<double>> A, std::vector<double> b,
              const std::vector<double>& c, std::vector<double>& x, double& value) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    constexpr double kEps = 1e-9;
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0) {
            b[i] = -b[i];
            for (auto& v : A[i]) v = -v;
        }
        A[i].resize(n + m, 0.0);
        A[i][n + i] = 1.0;
        A[i].push_back(b[i]);
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    auto solve_phase = [&](const std::vector<double>& cost, std::size_t cols) -> bool {
        std::vector<double> reduced = cost;
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < n + m; ++j) reduced[j] -= cb * A[i][j];
        }
        for (std::size_t pivots = 0; pivots < 40 * (m + n) + 200; ++pivots) {
            std::size_t enter = cols;
            for (std::size_t j = 0; j < cols; ++j) {
                if (reduced[j] < -kEps && (enter == cols || reduced[j] < reduced[enter])) enter = j;
            }
            if (enter == cols) return true;
            std::size_t leave = m;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (A[i][enter] <= kEps) continue;
                const double ratio = A[i].back() / A[i][enter];
                if (leave == m || ratio < best_ratio) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m) return false;  // unbounded; cannot happen for the screen
            const double inv = 1.0 / A[leave][enter];
            for (auto& v : A[leave]) v *= inv;
            for (std::size_t i = 0; i < m; ++i) {
                if (i == leave || std::abs(A[i][enter]) < 1e-14) continue;
                const double f = A[i][enter];
                for (std::size_t j = 0; j <= n + m; ++j) A[i][j] -= f * A[leave][j];
            }
            const double f = reduced[enter];
            for (std::size_t j = 0; j < n + m; ++j) reduced[j] -= f * A[leave][j];
            basis[leave] = enter;
        }
        return false;
    };

    std::vector<double> phase1(n + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) phase1[n + i] = 1.0;
    if (!solve_phase(phase1, n + m)) return false;
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= n) infeasibility += A[i].back();
    }
    if (infeasibility > 1e-7) return false;
    std::vector<double> phase2(n + m, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = -c[j];  // maximize
    if (!solve_phase(phase2, n)) return false;
    x.assign(n, 0.0);
    value = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) x[basis[i]] = A[i].back();
    }
    for (std::size_t j = 0; j < n; ++j) value += c[j] * x[j];
    return true;
}

/// Float version of domination_gap; fills the maximizing law weights.
bool float_domination_gap(std::size_t t, const std::vector<std::size_t>& others, int sign,
                          const std::vector<std::vector<double>>& values_d,
                          std::vector<double>& witness, double& gap) {
    const std::size_t n = values_d[t].size();
    const std::size_t s_count = others.size();
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<double> c(n + 2 + s_count, 0.0);
    c[n] = 1.0;
    c[n + 1] = -1.0;
    for (std::size_t k = 0; k < s_count; ++k) {
        std::vector<double> row(n + 2 + s_count, 0.0);
        const std::size_t s = others[k];
        for (std::size_t j = 0; j < n; ++j) row[j] = sign * (values_d[t][j] - values_d[s][j]);
        row[n] = -1.0;
        row[n + 1] = 1.0;
        row[n + 2 + k] = -1.0;
        A.push_back(std::move(row));
        b.push_back(0.0);
    }
    std::vector<double> norm(n + 2 + s_count, 0.0);
    for (std::size_t j = 0; j < n; ++j) norm[j] = 1.0;
    A.push_back(std::move(norm));
    b.push_back(1.0);
    std::vector<double> x;
    if (!float_lp(std::move(A), std::move(b), c, x, gap)) return false;
    witness.assign(x.begin(), x.begin() + n);
    return true;
}

std::vector<AffineExpression> prune_term_list(std::vector<AffineExpression> terms,
                                              const ResponseFunctionSpace& space,
                                              bool lower_list) {
    terms = dedup_sorted(std::move(terms));
    if (terms.size() <= 1) return terms;
    const std::size_t count = terms.size();
    const std::size_t n = space.n_components();
    const auto values = term_vertex_values(terms, space);
    const int sign = lower_list ? 1 : -1;

    // Pairwise pass: drop any term beaten everywhere by a single survivor.
    std::vector<bool> alive(count, true);
    for (std::size_t t = 0; t < count; ++t) {
        for (std::size_t s = 0; s < count && alive[t]; ++s) {
            if (s == t || !alive[s]) continue;
            bool dominates = true;
            for (std::size_t j = 0; j < n; ++j) {
                if (sign * (values[s][j] - values[t][j]) < 0) {
                    dominates = false;
                    break;
                }
            }
            if (dominates) alive[t] = false;
        }
    }

    // Witness pass: a term that is the strict optimum at some feasible law
    // cannot be redundant. Sampled laws certify most survivors without
    // touching the LP; certification is double-screened, exact-confirmed.
    std::vector<std::vector<double>> values_d(count, std::vector<double>(n));
    for (std::size_t t = 0; t < count; ++t) {
        for (std::size_t j = 0; j < n; ++j) values_d[t][j] = to_double(values[t][j]);
    }
    std::vector<bool> certified(count, false);
    std::mt19937_64 sampler(0xB07EDB0ULL + count * 131 + n);
    const std::size_t max_samples = std::min<std::size_t>(4 * count + 100, 1500);
    std::size_t open = 0;
    for (std::size_t t = 0; t < count; ++t) open += alive[t];
    for (std::size_t round = 0; round < max_samples && open > 1; ++round) {
        std::vector<Rat> q(n, Rat(0));
        Int total = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint64_t draw = sampler();
            if ((draw & 7u) == 0) continue;  // occasional zeros reach the boundary
            q[j] = Rat(Int(draw >> 44) + 1);
            total += numerator(q[j]);
        }
        if (total == 0) continue;
        std::vector<double> qd(n);
        for (std::size_t j = 0; j < n; ++j) qd[j] = to_double(q[j]) / to_double(Rat(total));

        std::size_t best = count;
        double best_value = 0.0, second = 0.0;
        for (std::size_t t = 0; t < count; ++t) {
            if (!alive[t]) continue;
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) v += qd[j] * values_d[t][j];
            v *= sign;
            if (best == count || v > best_value) {
                second = best == count ? -1e300 : best_value;
                best = t;
                best_value = v;
            } else if (v > second) {
                second = v;
            }
        }
        if (best == count || certified[best] || best_value - second < 1e-9) continue;
        // Exact confirmation that `best` strictly wins at this law.
        Rat best_exact = 0;
        for (std::size_t j = 0; j < n; ++j) best_exact += q[j] * values[best][j];
        bool strict = true;
        for (std::size_t t = 0; t < count && strict; ++t) {
            if (t == best || !alive[t]) continue;
            Rat other = 0;
            for (std::size_t j = 0; j < n; ++j) other += q[j] * values[t][j];
            strict = sign * (best_exact - other) > 0;
        }
        if (strict) {
            certified[best] = true;
            --open;
        }
    }

    // Remaining terms: screen with a float LP first. A clearly positive
    // float gap comes with a maximizing law; confirming the strict win
    // there in exact arithmetic certifies the term without an exact LP.
    // Everything else goes to the exact max-min LP. Capping the comparison
    // set is conservative: it can only keep extra terms, never drop
    // needed ones.
    constexpr std::size_t kMaxComparisons = 64;
    auto exact_strict_win = [&](std::size_t t, const std::vector<Rat>& q) {
        Rat best = 0;
        for (std::size_t j = 0; j < n; ++j) best += q[j] * values[t][j];
        for (std::size_t s = 0; s < count; ++s) {
            if (s == t || !alive[s]) continue;
            Rat other = 0;
            for (std::size_t j = 0; j < n; ++j) other += q[j] * values[s][j];
            if (sign * (best - other) <= 0) return false;
        }
        return true;
    };
    for (std::size_t t = 0; t < count; ++t) {
        if (!alive[t] || certified[t]) continue;
        std::vector<std::size_t> all_others;
        for (std::size_t s = 0; s < count; ++s) {
            if (s != t && alive[s]) all_others.push_back(s);
        }
        if (all_others.empty()) break;
        std::vector<std::size_t> others = all_others;
        if (others.size() > kMaxComparisons) {
            std::vector<std::pair<double, std::size_t>> ranked;
            ranked.reserve(others.size());
            for (std::size_t s : others) {
                double worst = 1e300;
                for (std::size_t j = 0; j < n; ++j) {
                    worst = std::min(worst, sign * (values_d[s][j] - values_d[t][j]));
                }
                ranked.emplace_back(worst, s);
            }
            std::sort(ranked.begin(), ranked.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            others.clear();
            for (std::size_t k = 0; k < kMaxComparisons; ++k) others.push_back(ranked[k].second);
            std::sort(others.begin(), others.end());
        }

        // Float screen with violator exchange: a witness must beat every
        // alive term, so any term undercutting it joins the comparison set
        // for the next round.
        bool settled = false;
        for (int round = 0; round < 8 && !settled; ++round) {
            std::vector<double> witness;
            double float_gap = 0.0;
            if (!float_domination_gap(t, others, sign, values_d, witness, float_gap) ||
                float_gap <= 1e-7) {
                break;
            }
            std::size_t violator = count;
            double worst_margin = 1e300;
            for (std::size_t s : all_others) {
                double margin = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    margin += witness[j] * (values_d[t][j] - values_d[s][j]);
                }
                margin *= sign;
                if (margin < worst_margin) {
                    worst_margin = margin;
                    violator = s;
                }
            }
            if (worst_margin > 1e-7) {
                std::vector<Rat> q(n, Rat(0));
                for (std::size_t j = 0; j < n; ++j) {
                    if (witness[j] > 1e-12) {
                        q[j] = Rat(Int(std::llround(witness[j] * 68719476736.0)),
                                   Int(68719476736LL));
                    }
                }
                if (exact_strict_win(t, q)) {
                    certified[t] = true;
                    settled = true;
                    break;
                }
            }
            if (violator == count ||
                std::find(others.begin(), others.end(), violator) != others.end()) {
                break;
            }
            others.push_back(violator);
        }
        if (settled) continue;
        if (domination_gap(t, others, sign, values) <= 0) alive[t] = false;
    }

    std::vector<AffineExpression> kept;
    for (std::size_t t = 0; t < count; ++t) {
        if (alive[t]) kept.push_back(std::move(terms[t]));
    }
    return kept;
}

int symbolic_limit(const StudySetting& setting, const DeriveOptions& options) {
    return setting.has_instrument() ? options.iv_k_limit : options.direct_k_limit;
}

}  // namespace

SymbolicBound prune_terms(SymbolicBound bound) {
    const auto space = enumerate_space(bound.setting, bound.K);
    bound.lower_terms = prune_term_list(std::move(bound.lower_terms), space, true);
    bound.upper_terms = prune_term_list(std::move(bound.upper_terms), space, false);
    return bound;
}

SymbolicBound derive_symbolic_bound(const StudySetting& setting, Estimand estimand, int K,
                                    const DeriveOptions& options) {
    const int limit = symbolic_limit(setting, options);
    if (K > limit) {
        throw Error(Errc::LimitExceeded,
                    "symbolic derivation for " + setting_name(setting) + " is limited to K <= " +
                        std::to_string(limit) + "; use numeric bounds instead");
    }
    const auto space = enumerate_space(setting, K);
    const auto system = build_constraints(space, options.convention);
    const auto objective = build_objective(space, estimand);

    SymbolicBound bound;
    bound.setting = setting;
    bound.estimand = estimand;
    bound.K = K;

    // Lower bound: max of b.y over {A'y <= c}; upper: min over {A'y >= c}.
    // The primal is bounded on the simplex, so optima sit at dual vertices
    // and recession rays only encode law-feasibility conditions.
    const auto min_dual = enumerate_vertices(dual_polytope(system, objective, Sense::Min));
    for (const auto& vertex : min_dual.vertices) {
        bound.lower_terms.push_back(vertex_expression(vertex, system, setting, K));
    }
    const auto max_dual = enumerate_vertices(dual_polytope(system, objective, Sense::Max));
    for (const auto& vertex : max_dual.vertices) {
        bound.upper_terms.push_back(vertex_expression(vertex, system, setting, K));
    }

    bound.lower_terms = dedup_sorted(std::move(bound.lower_terms));
    bound.upper_terms = dedup_sorted(std::move(bound.upper_terms));
    if (options.prune) bound = prune_terms(std::move(bound));
    return bound;
}

std::filesystem::path resolve_cache_dir(const std::optional<std::filesystem::path>& override_dir) {
    if (override_dir) return *override_dir;
    if (const char* env = std::getenv("OBOUNDS_CACHE_DIR")) return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME")) {
        return std::filesystem::path(xdg) / "obounds";
    }
    if (const char* home = std::getenv("HOME")) {
        return std::filesystem::path(home) / ".cache" / "obounds";
    }
    return std::filesystem::temp_directory_path() / "obounds-cache";
}

SymbolicBound derive_cached(const StudySetting& setting, Estimand estimand, int K,
                            const DeriveOptions& options,
                            const std::optional<std::filesystem::path>& cache_dir) {
    const bool cacheable =
        options.prune && options.convention == DropConvention::LexLast;
    if (!cacheable) return derive_symbolic_bound(setting, estimand, K, options);

    std::string key = setting.kind == Setting::Randomized  ? "randomized"
                      : setting.kind == Setting::Confounded ? "confounded"
                                                            : "iv";
    if (setting.no_defiers) key += "_nodef";
    key += "_" + estimand_name(estimand) + "_K" + std::to_string(K) + "_v" +
           std::to_string(kEngineVersion) + ".json";
    const auto path = resolve_cache_dir(cache_dir) / key;

    if (std::filesystem::exists(path)) {
        try {
            SymbolicBound cached = read_bound_file(path.string());
            if (cached.setting == setting && cached.estimand == estimand && cached.K == K) {
                return cached;
            }
        } catch (const Error&) {
            // fall through and rebuild a corrupt cache entry
        }
    }
    SymbolicBound bound = derive_symbolic_bound(setting, estimand, K, options);
    write_bound_file(bound, path.string());
    return bound;
}

}  // namespace obounds
