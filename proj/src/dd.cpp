#include "obounds/dd.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "obounds/errors.hpp"

namespace obounds {

DualPolytope dual_polytope(const ConstraintSystem& system,
                           const std::vector<int>& objective, Sense sense) {
    const std::size_t m = system.n_rows();
    const std::size_t n = system.n_cols();
    DualPolytope poly;
    poly.rows.reserve(n);
    poly.rhs.reserve(n);
    const int sign = sense == Sense::Min ? 1 : -1;  // Max dual: -A'y <= -c
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rat> row(m);
        for (std::size_t i = 0; i < m; ++i) row[i] = sign * system.matrix[i][j];
        poly.rows.push_back(std::move(row));
        poly.rhs.push_back(Rat(sign * objective[j]));
    }
    return poly;
}

namespace {

using BitRow = std::vector<std::uint64_t>;

void set_bit(BitRow& bits, std::size_t i) { bits[i >> 6] |= std::uint64_t(1) << (i & 63); }

bool subset_of(const BitRow& a, const BitRow& b) {
    for (std::size_t w = 0; w < a.size(); ++w) {
        if (a[w] & ~b[w]) return false;
    }
    return true;
}

std::size_t intersection_count(const BitRow& a, const BitRow& b, BitRow& out) {
    std::size_t count = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        out[w] = a[w] & b[w];
        count += static_cast<std::size_t>(std::popcount(out[w]));
    }
    return count;
}

struct Ray {
    std::vector<Int> coords;  // primitive integer direction in the t-cone
    BitRow tight;             // inserted inequalities satisfied with equality
};

void normalize_primitive(std::vector<Int>& v) {
    Int g = 0;
    for (const Int& value : v) g = boost::multiprecision::gcd(g, value);
    if (g > 1) {
        for (Int& value : v) value /= g;
    }
}

Int dot(const std::vector<Int>& row, const std::vector<Int>& ray) {
    Int sum = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] != 0 && ray[i] != 0) sum += row[i] * ray[i];
    }
    return sum;
}

/// Reduced row-echelon inverse; returns false when singular.
bool invert(std::vector<std::vector<Rat>> m, std::vector<std::vector<Rat>>& inverse) {
    const std::size_t d = m.size();
    inverse.assign(d, std::vector<Rat>(d, Rat(0)));
    for (std::size_t i = 0; i < d; ++i) inverse[i][i] = 1;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        while (pivot < d && m[pivot][col] == 0) ++pivot;
        if (pivot == d) return false;
        std::swap(m[col], m[pivot]);
        std::swap(inverse[col], inverse[pivot]);
        const Rat inv = Rat(1) / m[col][col];
        for (std::size_t j = 0; j < d; ++j) {
            m[col][j] *= inv;
            inverse[col][j] *= inv;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col || m[r][col] == 0) continue;
            const Rat factor = m[r][col];
            for (std::size_t j = 0; j < d; ++j) {
                m[r][j] -= factor * m[col][j];
                inverse[r][j] -= factor * inverse[col][j];
            }
        }
    }
    return true;
}

/// Incremental rank tracker over the rationals.
class RankBasis {
public:
    explicit RankBasis(std::size_t dim) : dim_(dim) {}

    bool try_add(const std::vector<Int>& int_row) {
        std::vector<Rat> row(int_row.begin(), int_row.end());
        for (const auto& basis_row : echelon_) {
            if (row[basis_row.second] == 0) continue;
            const Rat factor = row[basis_row.second];
            for (std::size_t j = 0; j < dim_; ++j) row[j] -= factor * basis_row.first[j];
        }
        std::size_t lead = dim_;
        for (std::size_t j = 0; j < dim_; ++j) {
            if (row[j] != 0) {
                lead = j;
                break;
            }
        }
        if (lead == dim_) return false;
        const Rat inv = Rat(1) / row[lead];
        for (std::size_t j = 0; j < dim_; ++j) row[j] *= inv;
        echelon_.emplace_back(std::move(row), lead);
        return true;
    }

    std::size_t rank() const { return echelon_.size(); }

private:
    std::size_t dim_;
    std::vector<std::pair<std::vector<Rat>, std::size_t>> echelon_;
};

}  // namespace

VertexSet enumerate_vertices(const DualPolytope& poly) {
    const std::size_t d = poly.dimension();
    if (d == 0 || poly.rows.empty()) throw Error(Errc::BadInput, "empty inequality system");
    const std::size_t cone_dim = d + 1;
    const std::size_t n_rows = poly.rows.size() + 1;  // + homogenization row t >= 0
    const std::size_t words = (n_rows + 63) / 64;

    // Homogenize to integer rows (M_i, -rhs_i); last row is -t <= 0.
    std::vector<std::vector<Int>> rows;
    rows.reserve(n_rows);
    for (std::size_t i = 0; i < poly.rows.size(); ++i) {
        Int scale = 1;
        for (const Rat& value : poly.rows[i]) {
            scale = boost::multiprecision::lcm(scale, denominator(value));
        }
        scale = boost::multiprecision::lcm(scale, denominator(poly.rhs[i]));
        std::vector<Int> row(cone_dim);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = numerator(poly.rows[i][j]) * (scale / denominator(poly.rows[i][j]));
        }
        row[d] = -numerator(poly.rhs[i]) * (scale / denominator(poly.rhs[i]));
        rows.push_back(std::move(row));
    }
    {
        std::vector<Int> t_row(cone_dim, Int(0));
        t_row[d] = -1;
        rows.push_back(std::move(t_row));
    }

    // Insertion order: ascending nonzero count, original index breaking ties.
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> nnz(n_rows, 0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (const Int& value : rows[i]) nnz[i] += value != 0;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return nnz[a] != nnz[b] ? nnz[a] < nnz[b] : a < b;
    });

    // Greedy independent subset in insertion order seeds a simplicial cone.
    RankBasis basis(cone_dim);
    std::vector<std::size_t> initial;
    std::vector<bool> in_initial(n_rows, false);
    for (std::size_t idx : order) {
        if (basis.rank() == cone_dim) break;
        if (basis.try_add(rows[idx])) {
            initial.push_back(idx);
            in_initial[idx] = true;
        }
    }
    if (basis.rank() != cone_dim) {
        throw Error(Errc::NotPointed, "inequality matrix is column-rank deficient");
    }

    std::vector<std::vector<Rat>> seed(cone_dim, std::vector<Rat>(cone_dim));
    for (std::size_t i = 0; i < cone_dim; ++i) {
        for (std::size_t j = 0; j < cone_dim; ++j) seed[i][j] = Rat(rows[initial[i]][j]);
    }
    std::vector<std::vector<Rat>> inverse;
    if (!invert(std::move(seed), inverse)) {
        throw Error(Errc::NotPointed, "initial subset unexpectedly singular");
    }

    // position_of[row index] = slot in the processed sequence (bit index).
    std::vector<std::size_t> position_of(n_rows, 0);
    std::size_t n_processed = 0;
    for (std::size_t idx : initial) position_of[idx] = n_processed++;

    std::vector<Ray> rays;
    rays.reserve(2 * cone_dim);
    for (std::size_t col = 0; col < cone_dim; ++col) {
        Ray ray;
        ray.coords.resize(cone_dim);
        Int scale = 1;
        for (std::size_t i = 0; i < cone_dim; ++i) {
            scale = boost::multiprecision::lcm(scale, denominator(inverse[i][col]));
        }
        for (std::size_t i = 0; i < cone_dim; ++i) {
            ray.coords[i] =
                -numerator(inverse[i][col]) * (scale / denominator(inverse[i][col]));
        }
        normalize_primitive(ray.coords);
        ray.tight.assign(words, 0);
        for (std::size_t i = 0; i < cone_dim; ++i) {
            if (i != col) set_bit(ray.tight, position_of[initial[i]]);
        }
        rays.push_back(std::move(ray));
    }

    // Incremental double description over the remaining halfspaces.
    BitRow common(words);
    for (std::size_t idx : order) {
        if (in_initial[idx]) continue;
        const std::size_t position = n_processed;
        const auto& row = rows[idx];

        std::vector<Int> value(rays.size());
        for (std::size_t r = 0; r < rays.size(); ++r) value[r] = dot(row, rays[r].coords);

        std::vector<Ray> next;
        next.reserve(rays.size());
        std::vector<std::size_t> positive, negative;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            if (value[r] > 0) {
                positive.push_back(r);
            } else {
                if (value[r] == 0) set_bit(rays[r].tight, position);
                negative.push_back(r);  // strictly negative and zero rays survive
            }
        }

        for (std::size_t rp : positive) {
            for (std::size_t rn : negative) {
                if (value[rn] == 0) continue;
                // Adjacency: shared tight set large enough and not contained
                // in any other ray's tight set.
                const std::size_t shared =
                    intersection_count(rays[rp].tight, rays[rn].tight, common);
                if (shared + 2 < cone_dim) continue;
                bool adjacent = true;
                for (std::size_t other = 0; other < rays.size(); ++other) {
                    if (other == rp || other == rn) continue;
                    if (subset_of(common, rays[other].tight)) {
                        adjacent = false;
                        break;
                    }
                }
                if (!adjacent) continue;

                Ray combined;
                combined.coords.resize(cone_dim);
                for (std::size_t j = 0; j < cone_dim; ++j) {
                    combined.coords[j] =
                        value[rp] * rays[rn].coords[j] - value[rn] * rays[rp].coords[j];
                }
                normalize_primitive(combined.coords);
                combined.tight = common;
                set_bit(combined.tight, position);
                next.push_back(std::move(combined));
            }
        }
        for (std::size_t rn : negative) next.push_back(std::move(rays[rn]));
        rays.swap(next);
        position_of[idx] = position;
        ++n_processed;
    }

    VertexSet result;
    for (const auto& ray : rays) {
        const Int& t = ray.coords[d];
        if (t > 0) {
            std::vector<Rat> vertex(d);
            for (std::size_t j = 0; j < d; ++j) vertex[j] = Rat(ray.coords[j], t);
            result.vertices.push_back(std::move(vertex));
        } else {
            std::vector<Rat> direction(ray.coords.begin(), ray.coords.begin() + d);
            result.rays.push_back(std::move(direction));
        }
    }
    std::sort(result.vertices.begin(), result.vertices.end());
    std::sort(result.rays.begin(), result.rays.end());

    // Exact feasibility check of every reported vertex.
    for (const auto& vertex : result.vertices) {
        for (std::size_t i = 0; i < poly.rows.size(); ++i) {
            Rat lhs = 0;
            for (std::size_t j = 0; j < d; ++j) lhs += poly.rows[i][j] * vertex[j];
            if (lhs > poly.rhs[i]) {
                throw Error(Errc::NotPointed, "internal: enumerated point violates row " +
                                                  std::to_string(i));
            }
        }
    }
    return result;
}

}  // namespace obounds
