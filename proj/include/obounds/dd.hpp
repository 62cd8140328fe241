#pragma once

#include <vector>

#include "obounds/rational.hpp"
#include "obounds/response.hpp"
#include "obounds/simplex.hpp"

namespace obounds {

/// Halfspace system { y : rows * y <= rhs }. For the LP dual of a bound
/// computation the rows are the transposed constraint matrix: one
/// inequality per response component, A'y <= c for Min and -A'y <= -c
/// for Max.
struct DualPolytope {
    std::vector<std::vector<Rat>> rows;
    std::vector<Rat> rhs;

    std::size_t dimension() const { return rows.empty() ? 0 : rows[0].size(); }
};

DualPolytope dual_polytope(const ConstraintSystem& system,
                           const std::vector<int>& objective, Sense sense);

struct VertexSet {
    std::vector<std::vector<Rat>> vertices;
    /// Recession directions; present only for unbounded polyhedra.
    std::vector<std::vector<Rat>> rays;
};

/// Exact vertex enumeration by incremental double description on the
/// homogenization cone. Inequalities are inserted in ascending order of
/// nonzero count; adjacency is decided by the combinatorial zero-set test.
/// Requires a pointed polyhedron (throws NotPointed otherwise). Every
/// returned vertex is verified against the full inequality system.
VertexSet enumerate_vertices(const DualPolytope& poly);

}  // namespace obounds
