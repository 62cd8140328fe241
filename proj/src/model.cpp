#include "obounds/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obounds/errors.hpp"

namespace obounds {

namespace {

const Rat kStratumTol(1, 1000000000);  // 1e-9, for user-supplied tables

}  // namespace

OutcomeSpace::OutcomeSpace(int levels) : K(levels) {
    if (levels < 2) throw Error(Errc::BadInput, "outcome needs at least 2 levels");
}

std::string setting_name(const StudySetting& setting) {
    switch (setting.kind) {
        case Setting::Randomized: return "randomized";
        case Setting::Confounded: return "confounded";
        case Setting::Iv: return setting.no_defiers ? "iv (no defiers)" : "iv";
    }
    return "?";
}

StudySetting parse_setting(const std::string& name, bool no_defiers) {
    if (name == "randomized") return {Setting::Randomized, false};
    if (name == "confounded") return {Setting::Confounded, false};
    if (name == "iv") return {Setting::Iv, no_defiers};
    throw Error(Errc::BadInput, "unknown setting '" + name + "'");
}

std::string estimand_name(Estimand estimand) {
    switch (estimand) {
        case Estimand::Psi: return "psi";
        case Estimand::Theta: return "theta";
        case Estimand::Phi: return "phi";
    }
    return "?";
}

Estimand parse_estimand(const std::string& name) {
    if (name == "psi") return Estimand::Psi;
    if (name == "theta") return Estimand::Theta;
    if (name == "phi") return Estimand::Phi;
    throw Error(Errc::BadInput, "unknown estimand '" + name + "'");
}

Interval codomain(Estimand estimand) {
    return estimand == Estimand::Phi ? Interval{-1.0, 1.0} : Interval{0.0, 1.0};
}

std::string symbol_name(const StudySetting& setting, const ProbSymbol& symbol) {
    switch (setting.kind) {
        case Setting::Randomized:
            return "p_" + std::to_string(symbol.y) + "." + std::to_string(symbol.x);
        case Setting::Confounded:
            return "p_" + std::to_string(symbol.x) + std::to_string(symbol.y);
        case Setting::Iv:
            return "p_" + std::to_string(symbol.x) + std::to_string(symbol.y) + "." +
                   std::to_string(symbol.z);
    }
    return "?";
}

ProbSymbol parse_symbol(const StudySetting& setting, const std::string& name) {
    auto fail = [&] { return Error(Errc::BadInput, "bad symbol '" + name + "'"); };
    if (name.size() < 3 || name[0] != 'p' || name[1] != '_') throw fail();
    const std::string body = name.substr(2);
    auto digit = [&](char c) -> int {
        if (c < '0' || c > '9') throw fail();
        return c - '0';
    };
    switch (setting.kind) {
        case Setting::Randomized: {
            if (body.size() != 3 || body[1] != '.') throw fail();
            return {-1, digit(body[2]), digit(body[0])};
        }
        case Setting::Confounded: {
            if (body.size() != 2) throw fail();
            return {-1, digit(body[0]), digit(body[1])};
        }
        case Setting::Iv: {
            if (body.size() != 4 || body[2] != '.') throw fail();
            return {digit(body[3]), digit(body[0]), digit(body[1])};
        }
    }
    throw fail();
}

int ObservedLaw::n_strata() const {
    return setting.kind == Setting::Confounded ? 1 : 2;
}

int ObservedLaw::cells_per_stratum() const {
    return setting.kind == Setting::Randomized ? K : 2 * K;
}

std::size_t ObservedLaw::index_of(const ProbSymbol& symbol) const {
    const bool iv = setting.has_instrument();
    if (symbol.x < 0 || symbol.x > 1 || symbol.y < 0 || symbol.y >= K ||
        (iv ? (symbol.z != 0 && symbol.z != 1) : symbol.z != -1)) {
        throw Error(Errc::DimensionMismatch,
                    "symbol out of range for " + setting_name(setting) + " K=" + std::to_string(K));
    }
    std::size_t index = static_cast<std::size_t>(symbol.x) * K + symbol.y;
    if (iv) index += static_cast<std::size_t>(symbol.z) * 2 * K;
    return index;
}

const Rat& ObservedLaw::at(const ProbSymbol& symbol) const { return table[index_of(symbol)]; }
Rat& ObservedLaw::at(const ProbSymbol& symbol) { return table[index_of(symbol)]; }

std::vector<std::vector<ProbSymbol>> strata_symbols(const StudySetting& setting, int K) {
    std::vector<std::vector<ProbSymbol>> strata;
    switch (setting.kind) {
        case Setting::Randomized:
            for (int x = 0; x < 2; ++x) {
                std::vector<ProbSymbol> cells;
                for (int y = 0; y < K; ++y) cells.push_back({-1, x, y});
                strata.push_back(std::move(cells));
            }
            break;
        case Setting::Confounded: {
            std::vector<ProbSymbol> cells;
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < K; ++y) cells.push_back({-1, x, y});
            strata.push_back(std::move(cells));
            break;
        }
        case Setting::Iv:
            for (int z = 0; z < 2; ++z) {
                std::vector<ProbSymbol> cells;
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < K; ++y) cells.push_back({z, x, y});
                strata.push_back(std::move(cells));
            }
            break;
    }
    return strata;
}

std::vector<ProbSymbol> all_symbols(const StudySetting& setting, int K) {
    std::vector<ProbSymbol> symbols;
    for (const auto& stratum : strata_symbols(setting, K))
        symbols.insert(symbols.end(), stratum.begin(), stratum.end());
    return symbols;
}

ObservedLaw validate_law(ObservedLaw law) {
    if (law.K < 2) throw Error(Errc::DimensionMismatch, "K must be at least 2");
    const std::size_t expected =
        static_cast<std::size_t>(law.n_strata()) * law.cells_per_stratum();
    if (law.table.size() != expected) {
        throw Error(Errc::DimensionMismatch,
                    "table has " + std::to_string(law.table.size()) + " entries, expected " +
                        std::to_string(expected));
    }
    for (std::size_t i = 0; i < law.table.size(); ++i) {
        if (law.table[i] < 0) {
            throw Error(Errc::NegativeProbability, "entry " + std::to_string(i) + " is negative");
        }
    }
    const auto strata = strata_symbols(law.setting, law.K);
    for (std::size_t s = 0; s < strata.size(); ++s) {
        Rat sum = 0;
        for (const auto& cell : strata[s]) sum += law.at(cell);
        const Rat deviation = sum - 1;
        if (deviation > kStratumTol || deviation < -kStratumTol) {
            std::string where = law.setting.kind == Setting::Confounded ? "table"
                                : law.setting.has_instrument()
                                    ? "z=" + std::to_string(s)
                                    : "x=" + std::to_string(s);
            throw Error(Errc::StratumSumMismatch,
                        "stratum " + where + " sums to " + std::to_string(to_double(sum)) +
                            " (deviation " + std::to_string(to_double(deviation)) + ")");
        }
    }
    return law;
}

ObservedLaw law_from_counts(const std::vector<CountRecord>& records,
                            const StudySetting& setting, int K) {
    ObservedLaw law;
    law.setting = setting;
    law.K = K;
    law.table.assign(static_cast<std::size_t>(law.n_strata()) * law.cells_per_stratum(), Rat(0));

    std::vector<long long> cell_counts(law.table.size(), 0);
    for (const auto& record : records) {
        if (record.count < 0) throw Error(Errc::BadInput, "negative count");
        if (setting.has_instrument() && !record.z.has_value()) {
            throw Error(Errc::MissingInstrumentColumn, "record without z in an iv law");
        }
        if (!setting.has_instrument() && record.z.has_value()) {
            throw Error(Errc::BadInput, "unexpected z column for " + setting_name(setting));
        }
        ProbSymbol cell{record.z.value_or(-1), record.x, record.y};
        cell_counts[law.index_of(cell)] += record.count;
    }

    const auto strata = strata_symbols(setting, K);
    for (std::size_t s = 0; s < strata.size(); ++s) {
        long long total = 0;
        for (const auto& cell : strata[s]) total += cell_counts[law.index_of(cell)];
        if (total == 0) {
            throw Error(Errc::EmptyStratum, "stratum " + std::to_string(s) + " has no observations");
        }
        for (const auto& cell : strata[s]) {
            law.at(cell) = Rat(cell_counts[law.index_of(cell)], total);
        }
    }
    return validate_law(std::move(law));
}

nlohmann::json law_to_json(const ObservedLaw& law) {
    nlohmann::json spec;
    spec["setting"] = law.setting.kind == Setting::Randomized  ? "randomized"
                      : law.setting.kind == Setting::Confounded ? "confounded"
                                                                : "iv";
    spec["no_defiers"] = law.setting.no_defiers;
    spec["K"] = law.K;
    auto x_block = [&](int z) {
        nlohmann::json rows = nlohmann::json::array();
        for (int x = 0; x < 2; ++x) {
            nlohmann::json row = nlohmann::json::array();
            for (int y = 0; y < law.K; ++y) row.push_back(to_double(law.at({z, x, y})));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    if (law.setting.has_instrument()) {
        nlohmann::json slices = nlohmann::json::array();
        for (int z = 0; z < 2; ++z) slices.push_back(x_block(z));
        spec["table"] = std::move(slices);
    } else {
        spec["table"] = x_block(-1);
    }
    return spec;
}

ObservedLaw law_from_json(const nlohmann::json& spec) {
    if (!spec.contains("setting") || !spec.contains("K") || !spec.contains("table")) {
        throw Error(Errc::BadInput, "law json needs setting, K and table");
    }
    ObservedLaw law;
    law.setting = parse_setting(spec.at("setting").get<std::string>(),
                                spec.value("no_defiers", false));
    law.K = spec.at("K").get<int>();
    if (law.K < 2) throw Error(Errc::DimensionMismatch, "K must be at least 2");
    law.table.assign(static_cast<std::size_t>(law.n_strata()) * law.cells_per_stratum(), Rat(0));

    auto read_cell = [](const nlohmann::json& value) -> Rat {
        if (value.is_string()) return parse_rational(value.get<std::string>());
        return Rat(value.get<double>());  // exact dyadic conversion
    };
    try {
        const auto& table = spec.at("table");
        if (law.setting.has_instrument()) {
            for (int z = 0; z < 2; ++z)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < law.K; ++y)
                        law.at({z, x, y}) = read_cell(table.at(z).at(x).at(y));
        } else {
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < law.K; ++y) law.at({-1, x, y}) = read_cell(table.at(x).at(y));
        }
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::DimensionMismatch, "table shape does not match setting and K");
    }
    return validate_law(std::move(law));
}

ObservedLaw read_law_file(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw Error(Errc::BadInput, "cannot open " + path);
    nlohmann::json spec;
    try {
        input >> spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadInput, "cannot parse " + path + ": " + e.what());
    }
    return law_from_json(spec);
}

std::vector<CountRecord> read_counts_csv(std::istream& input) {
    std::vector<CountRecord> records;
    std::string line;
    bool header_seen = false;
    bool has_z_column = false;
    std::size_t line_no = 0;

    auto split = [](const std::string& text) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream stream(text);
        while (std::getline(stream, field, ',')) {
            field.erase(std::remove_if(field.begin(), field.end(),
                                       [](unsigned char c) { return std::isspace(c); }),
                        field.end());
            fields.push_back(field);
        }
        if (!text.empty() && text.back() == ',') fields.push_back("");
        return fields;
    };

    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() == 4 && fields[0] == "z") {
                has_z_column = true;
                continue;
            }
            if (fields.size() == 3 && fields[0] == "x") continue;
            throw Error(Errc::BadInput, "counts header must be z,x,y,count or x,y,count");
        }
        const std::size_t expected = has_z_column ? 4 : 3;
        if (fields.size() != expected) {
            throw Error(Errc::BadInput, "line " + std::to_string(line_no) + ": wrong field count");
        }
        CountRecord record;
        std::size_t i = 0;
        try {
            if (has_z_column) {
                if (!fields[0].empty()) record.z = std::stoi(fields[0]);
                i = 1;
            }
            record.x = std::stoi(fields[i]);
            record.y = std::stoi(fields[i + 1]);
            record.count = std::stoll(fields[i + 2]);
        } catch (const std::exception&) {
            throw Error(Errc::BadInput, "line " + std::to_string(line_no) + ": bad integer");
        }
        records.push_back(record);
    }
    if (!header_seen) throw Error(Errc::BadInput, "empty counts file");
    return records;
}

std::vector<CountRecord> read_counts_file(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw Error(Errc::BadInput, "cannot open " + path);
    return read_counts_csv(input);
}

}  // namespace obounds
