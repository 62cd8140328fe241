#include "obounds/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "obounds/derive.hpp"
#include "obounds/errors.hpp"
#include "obounds/reference.hpp"
#include "obounds/study.hpp"

namespace obounds {

namespace {

struct CliConfig {
    std::string setting = "confounded";
    bool no_defiers = false;
    std::string estimand = "psi";
    int K = 3;
    std::string law_path;
    std::string counts_path;
    std::string out_path;
    std::string json_path;
    std::string cache_dir;
    std::string scenario = "all";
    std::vector<int> Ks{3, 4, 5};
    int replicates = 500;
    std::uint64_t seed = 1;
    int jobs = 1;
    int nodes = 64;
    std::string binning = "marginal";
    int iv_limit = 5;
    int random_laws = 0;
    bool dump_constraints = false;
    std::vector<std::string> estimands{"psi", "theta", "phi"};
};

std::optional<std::filesystem::path> cache_override(const CliConfig& config) {
    if (config.cache_dir.empty()) return std::nullopt;
    return std::filesystem::path(config.cache_dir);
}

std::string format_interval(const Interval& interval) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "(%.2f, %.2f)", interval.lower, interval.upper);
    return buffer;
}

nlohmann::json interval_json(const Interval& interval) {
    return {{"lower", interval.lower}, {"upper", interval.upper}};
}

void write_json_file(const nlohmann::json& payload, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::BadInput, "cannot write " + path);
    out << payload.dump(2) << "\n";
}

DeriveOptions derive_options(const CliConfig& config) {
    DeriveOptions options;
    options.iv_k_limit = config.iv_limit;
    return options;
}

/// Symbolic bounds when K is within the limit, numeric LP otherwise.
Interval bounds_for(const ObservedLaw& law, Estimand estimand, const CliConfig& config) {
    const DeriveOptions options = derive_options(config);
    const int limit = law.setting.has_instrument() ? options.iv_k_limit : options.direct_k_limit;
    if (law.K <= limit) {
        return evaluate_bound(derive_cached(law.setting, estimand, law.K, options,
                                            cache_override(config)),
                              law);
    }
    return numeric_bounds(law, estimand);
}

int cmd_derive(const CliConfig& config) {
    const StudySetting setting = parse_setting(config.setting, config.no_defiers);
    const Estimand estimand = parse_estimand(config.estimand);
    if (config.dump_constraints) {
        const auto system = build_constraints(enumerate_space(setting, config.K));
        for (std::size_t i = 0; i < system.n_rows(); ++i) {
            for (std::size_t j = 0; j < system.n_cols(); ++j) {
                std::cout << system.matrix[i][j] << (j + 1 < system.n_cols() ? " " : "");
            }
            std::cout << "  = "
                      << (system.rhs[i] ? symbol_name(setting, *system.rhs[i]) : std::string("1"))
                      << "\n";
        }
    }
    const SymbolicBound bound =
        derive_cached(setting, estimand, config.K, derive_options(config), cache_override(config));
    std::cout << render_bound(bound);
    if (!config.out_path.empty()) {
        write_bound_file(bound, config.out_path);
        std::cout << "wrote " << config.out_path << "\n";
    }
    return 0;
}

ObservedLaw load_input_law(const CliConfig& config) {
    if (!config.law_path.empty()) return read_law_file(config.law_path);
    if (config.counts_path.empty()) {
        throw Error(Errc::BadInput, "need --law or --counts");
    }
    const auto records = read_counts_file(config.counts_path);
    const StudySetting setting = parse_setting(config.setting, config.no_defiers);
    int K = config.K;
    if (K <= 0) {
        K = 2;
        for (const auto& record : records) K = std::max(K, record.y + 1);
    }
    return law_from_counts(records, setting, K);
}

void require_feasible(const ObservedLaw& law, const std::string& what) {
    if (law.setting.has_instrument() && !law_feasible(law)) {
        throw Error(Errc::InfeasibleLaw,
                    what + " is inconsistent with the " + setting_name(law.setting) + " model");
    }
}

int cmd_evaluate(const CliConfig& config) {
    const ObservedLaw law = load_input_law(config);
    require_feasible(law, "input law");
    nlohmann::json payload;
    payload["setting"] = setting_name(law.setting);
    payload["K"] = law.K;
    nlohmann::json bounds = nlohmann::json::object();
    std::cout << "setting: " << setting_name(law.setting) << ", K=" << law.K << "\n";
    for (const auto& name : config.estimands) {
        const Estimand estimand = parse_estimand(name);
        const Interval interval = bounds_for(law, estimand, config);
        std::cout << "  " << name << ": " << format_interval(interval) << "\n";
        bounds[name] = interval_json(interval);
    }
    payload["bounds"] = std::move(bounds);
    if (!config.json_path.empty()) write_json_file(payload, config.json_path);
    return 0;
}

int cmd_report(const CliConfig& config) {
    if (config.counts_path.empty()) throw Error(Errc::BadInput, "report needs --counts");
    const auto records = read_counts_file(config.counts_path);
    for (const auto& record : records) {
        if (!record.z.has_value()) {
            throw Error(Errc::MissingInstrumentColumn, "report needs z,x,y,count records");
        }
    }
    int K = config.K;
    if (K <= 0) {
        K = 2;
        for (const auto& record : records) K = std::max(K, record.y + 1);
    }

    // Four views of the same trial: assigned treatment as the exposure,
    // received treatment ignoring assignment, and the instrument models.
    std::vector<CountRecord> assignment, pooled;
    for (const auto& record : records) {
        assignment.push_back({std::nullopt, *record.z, record.y, record.count});
        pooled.push_back({std::nullopt, record.x, record.y, record.count});
    }
    struct Row {
        std::string label;
        ObservedLaw law;
    };
    std::vector<Row> rows;
    rows.push_back({"assignment effect",
                    law_from_counts(assignment, {Setting::Randomized, false}, K)});
    rows.push_back({"treatment effect ignoring assignment",
                    law_from_counts(pooled, {Setting::Confounded, false}, K)});
    rows.push_back({"treatment effect", law_from_counts(records, {Setting::Iv, false}, K)});
    rows.push_back({"treatment effect assuming no defiers",
                    law_from_counts(records, {Setting::Iv, true}, K)});
    for (const auto& row : rows) require_feasible(row.law, "'" + row.label + "' law");

    const char* headers[3] = {"P{Y(1)>=Y(0)}", "P{Y(1)>Y(0)}", "P{Y(1)>Y(0)}-P{Y(1)<Y(0)}"};
    std::printf("%-38s %-14s %-14s %-14s\n", "", headers[0], headers[1], headers[2]);
    nlohmann::json payload = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json row_json;
        row_json["label"] = row.label;
        std::printf("%-38s", row.label.c_str());
        for (Estimand estimand : {Estimand::Psi, Estimand::Theta, Estimand::Phi}) {
            const Interval interval = bounds_for(row.law, estimand, config);
            std::printf(" %-14s", format_interval(interval).c_str());
            row_json[estimand_name(estimand)] = interval_json(interval);
        }
        std::printf("\n");
        payload.push_back(std::move(row_json));
    }
    if (!config.json_path.empty()) write_json_file(payload, config.json_path);
    return 0;
}

int cmd_simulate(const CliConfig& config) {
    StudyConfig study;
    if (config.scenario == "all") {
        study.scenarios = {Scenario::Randomized, Scenario::Confounded, Scenario::Iv,
                           Scenario::IvNoDefiers};
    } else {
        study.scenarios = {parse_scenario(config.scenario)};
    }
    study.Ks = config.Ks;
    study.replicates = config.replicates;
    study.seed = config.seed;
    study.jobs = config.jobs;
    study.quad.nodes = config.nodes;
    study.binning = config.binning == "control" ? Binning::Control : Binning::Marginal;
    if (config.binning != "marginal" && config.binning != "control") {
        throw Error(Errc::BadInput, "binning must be marginal or control");
    }
    study.derive = derive_options(config);
    study.cache_dir = cache_override(config);

    const StudyResult result = run_study(study);

    std::filesystem::path out_dir = config.out_path.empty() ? "." : config.out_path;
    std::filesystem::create_directories(out_dir);
    const auto csv_path = out_dir / "replicates.csv";
    {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw Error(Errc::BadInput, "cannot write " + csv_path.string());
        write_records_csv(csv, result.records);
    }
    const auto summary = summarize_study(result);
    write_json_file(summary, (out_dir / "summary.json").string());
    std::cout << "wrote " << csv_path.string() << " (" << result.records.size()
              << " replicates) and summary.json\n";
    return 0;
}

int cmd_compare(const CliConfig& config) {
    std::vector<MarginalPotentialLaw> margin_sets;
    if (!config.law_path.empty()) {
        const ObservedLaw law = read_law_file(config.law_path);
        if (law.setting.kind != Setting::Randomized) {
            throw Error(Errc::BadInput, "compare needs a randomized law");
        }
        margin_sets.push_back(margins_from_randomized(law));
    } else if (config.random_laws > 0) {
        const int K = config.K > 0 ? config.K : 3;
        std::mt19937_64 engine(config.seed);
        for (int i = 0; i < config.random_laws; ++i) {
            MarginalPotentialLaw margins;
            margins.K = K;
            for (auto* arm : {&margins.p0, &margins.p1}) {
                std::vector<Int> weights(K);
                Int total = 0;
                for (auto& w : weights) {
                    w = Int(engine() % 100000u) + 1;
                    total += w;
                }
                for (const auto& w : weights) arm->push_back(Rat(w, total));
            }
            margin_sets.push_back(std::move(margins));
        }
    } else {
        throw Error(Errc::BadInput, "compare needs --law or --random N");
    }

    const DeriveOptions options = derive_options(config);
    int contained = 0, strict = 0;
    Rat max_diff(0);
    for (const auto& margins : margin_sets) {
        const ObservedLaw law = validate_law(randomized_law(margins));
        const auto sharp = evaluate_bound_exact(
            derive_cached(law.setting, Estimand::Phi, law.K, options, cache_override(config)),
            law);
        const auto fay = fay_phi(margins);
        const auto lu = lu2020_phi(margins);
        const bool inside = fay.first <= sharp.first && sharp.second <= fay.second;
        const bool strictly = inside && (fay.first < sharp.first || sharp.second < fay.second);
        contained += inside;
        strict += strictly;
        max_diff = rat_max(max_diff, abs(sharp.first - lu.first));
        max_diff = rat_max(max_diff, abs(sharp.second - lu.second));
        if (margin_sets.size() == 1) {
            std::printf("sharp phi:  (%.6f, %.6f)\n", to_double(sharp.first),
                        to_double(sharp.second));
            std::printf("fay phi:    (%.6f, %.6f)  contained=%s strict=%s\n",
                        to_double(fay.first), to_double(fay.second), inside ? "yes" : "no",
                        strictly ? "yes" : "no");
            std::printf("lu2020 phi: (%.6f, %.6f)  max|diff|=%.3g\n", to_double(lu.first),
                        to_double(lu.second), to_double(max_diff));
        }
    }
    std::printf("laws=%zu contained=%d strict=%d max|sharp-lu2020|=%.3g\n", margin_sets.size(),
                contained, strict, to_double(max_diff));
    nlohmann::json payload;
    payload["laws"] = margin_sets.size();
    payload["contained_in_fay"] = contained;
    payload["strictly_contained"] = strict;
    payload["max_abs_diff_lu2020"] = to_double(max_diff);
    if (!config.json_path.empty()) write_json_file(payload, config.json_path);
    return contained == static_cast<int>(margin_sets.size()) ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"sharp bounds for ordinal treatment effects under confounding and noncompliance"};
    app.require_subcommand(1);
    CliConfig config;

    auto add_cache = [&](CLI::App* cmd) {
        cmd->add_option("--cache-dir", config.cache_dir, "symbolic bound cache directory");
    };

    auto* derive = app.add_subcommand("derive", "derive symbolic bounds");
    derive->add_option("--setting", config.setting, "randomized|confounded|iv")->required();
    derive->add_flag("--no-defiers", config.no_defiers, "exclude the defier response pattern");
    derive->add_option("--estimand", config.estimand, "psi|theta|phi")->required();
    derive->add_option("--K", config.K, "outcome levels")->required();
    derive->add_option("--out", config.out_path, "write the bound as JSON");
    derive->add_option("--iv-limit", config.iv_limit, "symbolic K limit for iv derivations");
    derive->add_flag("--dump-constraints", config.dump_constraints,
                     "print the constraint matrix before deriving");
    add_cache(derive);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate bounds at an observed law");
    evaluate->add_option("--law", config.law_path, "law JSON file");
    evaluate->add_option("--counts", config.counts_path, "counts CSV (z,x,y,count)");
    evaluate->add_option("--setting", config.setting, "setting for --counts input");
    evaluate->add_flag("--no-defiers", config.no_defiers, "no-defiers instrument model");
    config.K = 0;
    evaluate->add_option("--K", config.K, "outcome levels (default: inferred from counts)");
    evaluate->add_option("--estimand", config.estimands, "estimands to bound")
        ->delimiter(',');
    evaluate->add_option("--json", config.json_path, "write full-precision results");
    evaluate->add_option("--iv-limit", config.iv_limit, "symbolic K limit for iv derivations");
    add_cache(evaluate);

    auto* report = app.add_subcommand("report", "four-row trial report from iv counts");
    report->add_option("--counts", config.counts_path, "counts CSV (z,x,y,count)")->required();
    report->add_option("--K", config.K, "outcome levels (default: inferred)");
    report->add_option("--json", config.json_path, "write full-precision results");
    add_cache(report);

    auto* simulate = app.add_subcommand("simulate", "replicate study of bound widths");
    simulate->add_option("--scenario", config.scenario,
                         "randomized|confounded|iv|iv-no-defiers|all");
    simulate->add_option("--K", config.Ks, "outcome levels, e.g. 3,4,5")->delimiter(',');
    simulate->add_option("--replicates", config.replicates, "replicates per cell");
    simulate->add_option("--seed", config.seed, "base seed");
    simulate->add_option("--out", config.out_path, "output directory")->required();
    simulate->add_option("--jobs", config.jobs, "worker threads");
    simulate->add_option("--nodes", config.nodes, "quadrature nodes");
    simulate->add_option("--binning", config.binning, "marginal|control");
    add_cache(simulate);

    auto* compare = app.add_subcommand("compare",
                                       "sharp vs previously published randomized-setting bounds");
    compare->add_option("--law", config.law_path, "randomized law JSON");
    compare->add_option("--random", config.random_laws, "number of random margin draws");
    compare->add_option("--K", config.K, "outcome levels for --random");
    compare->add_option("--seed", config.seed, "seed for --random");
    compare->add_option("--json", config.json_path, "write the summary as JSON");
    add_cache(compare);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(derive)) return cmd_derive(config);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(config);
        if (app.got_subcommand(report)) return cmd_report(config);
        if (app.got_subcommand(simulate)) return cmd_simulate(config);
        if (app.got_subcommand(compare)) return cmd_compare(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace obounds
