#include "obounds/symbolic.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obounds/errors.hpp"

namespace obounds {

Rat AffineExpression::evaluate(const ObservedLaw& law) const {
    Rat value = constant;
    for (const auto& [symbol, coef] : coefs) value += coef * law.at(symbol);
    return value;
}

void AffineExpression::set_coef(const ProbSymbol& symbol, Rat value) {
    if (value == 0) {
        coefs.erase(symbol);
    } else {
        coefs[symbol] = std::move(value);
    }
}

AffineExpression canonicalize_expression(AffineExpression expr,
                                         const StudySetting& setting, int K) {
    for (const auto& stratum : strata_symbols(setting, K)) {
        // Shift by lambda * (sum of stratum cells - 1); pick lambda so the
        // most common coefficient in the stratum (zeros included) drops out.
        std::map<Rat, int> counts;
        for (const auto& cell : stratum) {
            auto it = expr.coefs.find(cell);
            counts[it == expr.coefs.end() ? Rat(0) : it->second] += 1;
        }
        int best_count = 0;
        for (const auto& [value, count] : counts) best_count = std::max(best_count, count);
        Rat mode;
        bool picked = false;
        if (counts[Rat(0)] == best_count) {
            mode = 0;
            picked = true;
        }
        for (const auto& [value, count] : counts) {
            if (picked || count != best_count) continue;
            if (!picked) {
                mode = value;
                picked = true;
            }
        }
        // Prefer the smallest |mode| among remaining ties.
        for (const auto& [value, count] : counts) {
            if (count == best_count && abs(value) < abs(mode)) mode = value;
        }
        if (mode == 0) continue;
        const Rat lambda = -mode;
        for (const auto& cell : stratum) {
            auto it = expr.coefs.find(cell);
            const Rat current = it == expr.coefs.end() ? Rat(0) : it->second;
            expr.set_coef(cell, current + lambda);
        }
        expr.constant -= lambda;
    }
    return expr;
}

std::pair<Rat, Rat> evaluate_bound_exact(const SymbolicBound& bound, const ObservedLaw& law) {
    if (bound.setting != law.setting || bound.K != law.K) {
        throw Error(Errc::SettingMismatch,
                    "bound is for " + setting_name(bound.setting) + " K=" + std::to_string(bound.K) +
                        ", law is " + setting_name(law.setting) + " K=" + std::to_string(law.K));
    }
    if (bound.lower_terms.empty() || bound.upper_terms.empty()) {
        throw Error(Errc::BadInput, "bound has an empty term list");
    }
    Rat lower = bound.lower_terms.front().evaluate(law);
    for (std::size_t i = 1; i < bound.lower_terms.size(); ++i) {
        lower = rat_max(lower, bound.lower_terms[i].evaluate(law));
    }
    Rat upper = bound.upper_terms.front().evaluate(law);
    for (std::size_t i = 1; i < bound.upper_terms.size(); ++i) {
        upper = rat_min(upper, bound.upper_terms[i].evaluate(law));
    }
    return {lower, upper};
}

Interval evaluate_bound(const SymbolicBound& bound, const ObservedLaw& law) {
    auto [lower, upper] = evaluate_bound_exact(bound, law);
    return {to_double(lower), to_double(upper)};
}

std::string render_expression(const AffineExpression& expr, const StudySetting& setting) {
    std::ostringstream out;
    bool first = true;
    if (expr.constant != 0 || expr.coefs.empty()) {
        out << format_rational(expr.constant);
        first = false;
    }
    for (const auto& [symbol, coef] : expr.coefs) {
        const bool negative = coef < 0;
        const Rat magnitude = abs(coef);
        if (first) {
            if (negative) out << "-";
        } else {
            out << (negative ? " - " : " + ");
        }
        if (magnitude != 1) out << format_rational(magnitude) << " ";
        out << symbol_name(setting, symbol);
        first = false;
    }
    return out.str();
}

std::string render_bound(const SymbolicBound& bound) {
    std::ostringstream out;
    const std::string name = estimand_name(bound.estimand);
    out << name << " >= max{\n";
    for (const auto& term : bound.lower_terms) {
        out << "  " << render_expression(term, bound.setting) << ",\n";
    }
    out << "}\n" << name << " <= min{\n";
    for (const auto& term : bound.upper_terms) {
        out << "  " << render_expression(term, bound.setting) << ",\n";
    }
    out << "}\n";
    return out.str();
}

namespace {

nlohmann::json expression_to_json(const AffineExpression& expr, const StudySetting& setting) {
    nlohmann::json spec;
    spec["const"] = format_rational(expr.constant);
    nlohmann::json coefs = nlohmann::json::object();
    for (const auto& [symbol, coef] : expr.coefs) {
        coefs[symbol_name(setting, symbol)] = format_rational(coef);
    }
    spec["coefs"] = std::move(coefs);
    return spec;
}

AffineExpression expression_from_json(const nlohmann::json& spec, const StudySetting& setting) {
    AffineExpression expr;
    expr.constant = parse_rational(spec.at("const").get<std::string>());
    if (spec.contains("coefs")) {
        for (const auto& [name, value] : spec.at("coefs").items()) {
            expr.set_coef(parse_symbol(setting, name), parse_rational(value.get<std::string>()));
        }
    }
    return expr;
}

}  // namespace

nlohmann::json bound_to_json(const SymbolicBound& bound) {
    nlohmann::json spec;
    spec["setting"] = bound.setting.kind == Setting::Randomized  ? "randomized"
                      : bound.setting.kind == Setting::Confounded ? "confounded"
                                                                  : "iv";
    spec["no_defiers"] = bound.setting.no_defiers;
    spec["estimand"] = estimand_name(bound.estimand);
    spec["K"] = bound.K;
    nlohmann::json lower = nlohmann::json::array();
    for (const auto& term : bound.lower_terms) lower.push_back(expression_to_json(term, bound.setting));
    nlohmann::json upper = nlohmann::json::array();
    for (const auto& term : bound.upper_terms) upper.push_back(expression_to_json(term, bound.setting));
    spec["lower"] = std::move(lower);
    spec["upper"] = std::move(upper);
    return spec;
}

SymbolicBound bound_from_json(const nlohmann::json& spec) {
    SymbolicBound bound;
    bound.setting = parse_setting(spec.at("setting").get<std::string>(),
                                  spec.value("no_defiers", false));
    bound.estimand = parse_estimand(spec.at("estimand").get<std::string>());
    bound.K = spec.at("K").get<int>();
    for (const auto& term : spec.at("lower")) {
        bound.lower_terms.push_back(expression_from_json(term, bound.setting));
    }
    for (const auto& term : spec.at("upper")) {
        bound.upper_terms.push_back(expression_from_json(term, bound.setting));
    }
    if (bound.lower_terms.empty() || bound.upper_terms.empty()) {
        throw Error(Errc::BadInput, "bound json has an empty term list");
    }
    return bound;
}

SymbolicBound read_bound_file(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw Error(Errc::BadInput, "cannot open " + path);
    nlohmann::json spec;
    try {
        input >> spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadInput, "cannot parse " + path + ": " + e.what());
    }
    return bound_from_json(spec);
}

void write_bound_file(const SymbolicBound& bound, const std::string& path) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path temp =
        target.parent_path() /
        (target.filename().string() + ".tmp" + std::to_string(::getpid()) + "-" +
         std::to_string(counter.fetch_add(1)));
    {
        std::ofstream output(temp);
        if (!output) throw Error(Errc::BadInput, "cannot write " + temp.string());
        output << bound_to_json(bound).dump(2) << "\n";
    }
    fs::rename(temp, target);  // atomic on POSIX within one filesystem
}

}  // namespace obounds
