#include "obounds/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "obounds/errors.hpp"

namespace obounds {

namespace {

std::string double_to_string(double value) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, end);
}

struct Cell {
    Scenario scenario;
    int K;
    int replicate;
};

}  // namespace

StudyResult run_study(const StudyConfig& config) {
    validate_quadrature(config.quad);
    if (config.replicates < 1) throw Error(Errc::BadInput, "need at least one replicate");
    if (config.jobs < 1) throw Error(Errc::BadInput, "need at least one worker");

    // Derive (or load) every symbolic bound up front; workers share them.
    std::map<std::pair<StudySetting, int>, std::vector<SymbolicBound>> bounds;
    for (Scenario scenario : config.scenarios) {
        for (int K : config.Ks) {
            const StudySetting setting = setting_of(scenario);
            auto key = std::make_pair(setting, K);
            if (bounds.contains(key)) continue;
            std::vector<SymbolicBound> triple;
            for (Estimand estimand : {Estimand::Psi, Estimand::Theta, Estimand::Phi}) {
                triple.push_back(
                    derive_cached(setting, estimand, K, config.derive, config.cache_dir));
            }
            bounds.emplace(std::move(key), std::move(triple));
        }
    }

    std::vector<Cell> cells;
    for (Scenario scenario : config.scenarios) {
        for (int K : config.Ks) {
            for (int r = 0; r < config.replicates; ++r) cells.push_back({scenario, K, r});
        }
    }

    StudyResult result;
    result.records.resize(cells.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_lock;

    auto worker = [&] {
        for (;;) {
            const std::size_t index = cursor.fetch_add(1);
            if (index >= cells.size() || failed.load()) return;
            const Cell& cell = cells[index];
            try {
                ReplicateRecord record;
                record.scenario = cell.scenario;
                record.K = cell.K;
                record.replicate = cell.replicate;
                record.seed = replicate_seed(config.seed, static_cast<std::uint64_t>(cell.scenario),
                                             cell.K, cell.replicate);
                Rng rng(record.seed);
                record.params = draw_params(rng, cell.scenario, cell.K);
                record.law = scenario_law(record.params, config.quad, config.binning);
                const Truths truths = true_estimands(record.params, config.quad, config.binning);
                const auto& triple = bounds.at({setting_of(cell.scenario), cell.K});
                const double truth_values[3] = {truths.psi, truths.theta, truths.phi};
                for (int e = 0; e < 3; ++e) {
                    const Interval interval = evaluate_bound(triple[e], record.law);
                    auto& entry = record.by_estimand[e];
                    entry.lower = interval.lower;
                    entry.upper = interval.upper;
                    entry.truth = truth_values[e];
                    entry.width = interval.upper - interval.lower;
                    if (entry.truth < entry.lower - 1e-9 || entry.truth > entry.upper + 1e-9) {
                        throw Error(Errc::BadInput,
                                    scenario_name(cell.scenario) + " K=" + std::to_string(cell.K) +
                                        " replicate " + std::to_string(cell.replicate) + ": true " +
                                        estimand_name(static_cast<Estimand>(e)) + "=" +
                                        std::to_string(entry.truth) + " escapes [" +
                                        std::to_string(entry.lower) + ", " +
                                        std::to_string(entry.upper) + "]");
                    }
                }
                result.records[index] = std::move(record);
            } catch (...) {
                std::scoped_lock guard(error_lock);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    if (config.jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < config.jobs; ++j) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

void write_records_csv(std::ostream& out, const std::vector<ReplicateRecord>& records) {
    out << "scenario,K,replicate,seed,estimand,lower,upper,truth,width\n";
    for (const auto& record : records) {
        for (int e = 0; e < 3; ++e) {
            const auto& entry = record.by_estimand[e];
            out << scenario_name(record.scenario) << ',' << record.K << ',' << record.replicate
                << ',' << record.seed << ',' << estimand_name(static_cast<Estimand>(e)) << ','
                << double_to_string(entry.lower) << ',' << double_to_string(entry.upper) << ','
                << double_to_string(entry.truth) << ',' << double_to_string(entry.width) << '\n';
        }
    }
}

nlohmann::json summarize_study(const StudyResult& result) {
    std::map<std::tuple<Scenario, int, int>, std::vector<double>> widths;
    for (const auto& record : result.records) {
        for (int e = 0; e < 3; ++e) {
            widths[{record.scenario, record.K, e}].push_back(record.by_estimand[e].width);
        }
    }
    const std::vector<double> grid{0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};
    nlohmann::json cells = nlohmann::json::array();
    for (auto& [key, values] : widths) {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(n);
        auto quantile = [&](double p) {
            const double pos = p * static_cast<double>(n - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, n - 1);
            const double frac = pos - static_cast<double>(lo);
            return values[lo] * (1.0 - frac) + values[hi] * frac;
        };
        nlohmann::json cell;
        cell["scenario"] = scenario_name(std::get<0>(key));
        cell["K"] = std::get<1>(key);
        cell["estimand"] = estimand_name(static_cast<Estimand>(std::get<2>(key)));
        cell["replicates"] = n;
        cell["mean_width"] = mean;
        cell["median_width"] = quantile(0.5);
        cell["max_width"] = values.back();
        nlohmann::json quantiles = nlohmann::json::object();
        for (double p : grid) quantiles[double_to_string(p)] = quantile(p);
        cell["width_quantiles"] = std::move(quantiles);
        cells.push_back(std::move(cell));
    }
    nlohmann::json summary;
    summary["cells"] = std::move(cells);
    return summary;
}

}  // namespace obounds
