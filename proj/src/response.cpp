#include "obounds/response.hpp"

#include <algorithm>

#include "obounds/errors.hpp"

namespace obounds {

std::size_t ResponseFunctionSpace::n_components() const {
    const std::size_t y_count = y_patterns.size();
    return x_patterns.empty() ? y_count : x_patterns.size() * y_count;
}

std::size_t ResponseFunctionSpace::component_index(std::size_t xp, std::size_t yp) const {
    return xp * y_patterns.size() + yp;
}

ProbSymbol ResponseFunctionSpace::cell_of(std::size_t component, int z) const {
    const std::size_t y_count = y_patterns.size();
    if (setting.kind == Setting::Randomized) {
        // z doubles as the treatment arm: stratum x, cell y = pattern at x.
        const auto& yp = y_patterns[component];
        return {-1, z, yp.at(z)};
    }
    const auto& xp = x_patterns[component / y_count];
    const auto& yp = y_patterns[component % y_count];
    const int x = setting.has_instrument() ? xp.at(z) : xp.at_z0;
    return {setting.has_instrument() ? z : -1, x, yp.at(x)};
}

ResponseFunctionSpace enumerate_space(const StudySetting& setting, int K) {
    if (K < 2) throw Error(Errc::BadInput, "K must be at least 2");
    ResponseFunctionSpace space;
    space.setting = setting;
    space.K = K;
    switch (setting.kind) {
        case Setting::Randomized:
            break;
        case Setting::Confounded:
            space.x_patterns = {{0, 0}, {1, 1}};
            break;
        case Setting::Iv:
            // Fixed order: never, always, complier, defier.
            space.x_patterns = {{0, 0}, {1, 1}, {0, 1}};
            if (!setting.no_defiers) space.x_patterns.push_back({1, 0});
            break;
    }
    for (int y0 = 0; y0 < K; ++y0)
        for (int y1 = 0; y1 < K; ++y1) space.y_patterns.push_back({y0, y1});
    return space;
}

namespace {

/// Row rank by rational Gaussian elimination.
std::size_t rational_rank(std::vector<std::vector<Rat>> m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size();
    const std::size_t cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && m[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[rank], m[pivot]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (m[r][col] == 0) continue;
            const Rat factor = m[r][col] / m[rank][col];
            for (std::size_t c = col; c < cols; ++c) m[r][c] -= factor * m[rank][c];
        }
        ++rank;
    }
    return rank;
}

int stratum_coordinate(const StudySetting& setting, const ProbSymbol& cell) {
    if (setting.kind == Setting::Randomized) return cell.x;
    if (setting.has_instrument()) return cell.z;
    return -1;
}

}  // namespace

ConstraintSystem build_constraints(const ResponseFunctionSpace& space, DropConvention convention) {
    ConstraintSystem system;
    const std::size_t n = space.n_components();
    const auto strata = strata_symbols(space.setting, space.K);

    system.matrix.push_back(std::vector<int>(n, 1));  // normalization row
    system.rhs.push_back(std::nullopt);

    for (const auto& stratum : strata) {
        const ProbSymbol dropped =
            convention == DropConvention::LexLast ? stratum.back() : stratum.front();
        system.dropped.push_back(dropped);
        for (const auto& cell : stratum) {
            if (cell == dropped) continue;
            std::vector<int> row(n, 0);
            const int z = stratum_coordinate(space.setting, cell);
            for (std::size_t j = 0; j < n; ++j) {
                if (space.cell_of(j, std::max(z, 0)) == cell) row[j] = 1;
            }
            system.matrix.push_back(std::move(row));
            system.rhs.push_back(cell);
        }
    }

    std::vector<std::vector<Rat>> check;
    check.reserve(system.matrix.size());
    for (const auto& row : system.matrix) {
        check.emplace_back(row.begin(), row.end());
    }
    if (rational_rank(std::move(check)) != system.matrix.size()) {
        throw Error(Errc::RankDeficient, "constraint matrix lost rank for " +
                                             setting_name(space.setting) +
                                             " K=" + std::to_string(space.K));
    }
    return system;
}

std::vector<Rat> constraint_rhs(const ConstraintSystem& system, const ObservedLaw& law) {
    std::vector<Rat> b;
    b.reserve(system.rhs.size());
    for (const auto& symbol : system.rhs) {
        b.push_back(symbol ? law.at(*symbol) : Rat(1));
    }
    return b;
}

ObservedLaw forward_law(const ResponseFunctionSpace& space, const std::vector<Rat>& q) {
    if (q.size() != space.n_components()) {
        throw Error(Errc::DimensionMismatch, "q has wrong length");
    }
    ObservedLaw law;
    law.setting = space.setting;
    law.K = space.K;
    law.table.assign(static_cast<std::size_t>(law.n_strata()) * law.cells_per_stratum(), Rat(0));
    const int z_values = space.setting.kind == Setting::Confounded ? 1 : 2;
    for (int z = 0; z < z_values; ++z) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            law.at(space.cell_of(j, z)) += q[j];
        }
    }
    return law;
}

std::vector<int> build_objective(const ResponseFunctionSpace& space, Estimand estimand) {
    const std::size_t n = space.n_components();
    const std::size_t y_count = space.y_patterns.size();
    std::vector<int> c(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& yp = space.y_patterns[j % y_count];
        switch (estimand) {
            case Estimand::Psi: c[j] = yp.y1 >= yp.y0 ? 1 : 0; break;
            case Estimand::Theta: c[j] = yp.y1 > yp.y0 ? 1 : 0; break;
            case Estimand::Phi: c[j] = yp.y1 > yp.y0 ? 1 : (yp.y1 < yp.y0 ? -1 : 0); break;
        }
    }
    return c;
}

}  // namespace obounds
