#include "obounds/simplex.hpp"

#include <algorithm>
#include <string>

#include "obounds/errors.hpp"

namespace obounds {

namespace {

/// Dense rational tableau for min c.x, Ax = b, x >= 0, solved in two
/// phases with Bland's rule (no cycling on the degenerate programs the
/// bound derivations produce).
class Tableau {
public:
    Tableau(const std::vector<std::vector<Rat>>& A, const std::vector<Rat>& b)
        : m_(A.size()), n_(A.empty() ? 0 : A[0].size()) {
        rows_.assign(m_, std::vector<Rat>(n_ + m_ + 1, Rat(0)));
        row_flipped_.assign(m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            const bool flip = b[i] < 0;
            row_flipped_[i] = flip;
            for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = flip ? -A[i][j] : A[i][j];
            rows_[i][n_ + i] = 1;
            rows_[i].back() = flip ? -b[i] : b[i];
        }
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
    }

    /// Returns true if feasible; otherwise farkas() is populated.
    bool phase1() {
        std::vector<Rat> cost(n_ + m_, Rat(0));
        for (std::size_t i = 0; i < m_; ++i) cost[n_ + i] = 1;
        build_reduced_costs(cost);
        run(n_ + m_);
        if (objective_ != 0) {
            farkas_.assign(m_, Rat(0));
            for (std::size_t i = 0; i < m_; ++i) {
                Rat y = Rat(1) - reduced_[n_ + i];
                farkas_[i] = row_flipped_[i] ? -y : y;
            }
            return false;
        }
        drive_out_artificials();
        return true;
    }

    void phase2(const std::vector<Rat>& c) {
        std::vector<Rat> cost(n_ + m_, Rat(0));
        for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
        build_reduced_costs(cost);
        run(n_);  // artificials may not re-enter
    }

    Rat objective() const { return objective_; }

    std::vector<Rat> solution() const {
        std::vector<Rat> x(n_, Rat(0));
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) x[basis_[i]] = rows_[i].back();
        }
        return x;
    }

    const std::vector<Rat>& farkas() const { return farkas_; }

private:
    void build_reduced_costs(const std::vector<Rat>& cost) {
        cost_ = cost;
        reduced_ = cost;
        objective_ = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const Rat& cb = cost_[basis_[i]];
            if (cb == 0) continue;
            objective_ += cb * rows_[i].back();
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (rows_[i][j] != 0) reduced_[j] -= cb * rows_[i][j];
            }
        }
    }

    void pivot(std::size_t leave_row, std::size_t enter_col) {
        auto& pivot_row = rows_[leave_row];
        const Rat inverse = Rat(1) / pivot_row[enter_col];
        if (inverse != 1) {
            for (auto& value : pivot_row) {
                if (value != 0) value *= inverse;
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == leave_row || rows_[i][enter_col] == 0) continue;
            const Rat factor = rows_[i][enter_col];
            auto& row = rows_[i];
            for (std::size_t j = 0; j <= n_ + m_; ++j) {
                if (pivot_row[j] != 0) row[j] -= factor * pivot_row[j];
            }
        }
        if (reduced_[enter_col] != 0) {
            const Rat factor = reduced_[enter_col];
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (pivot_row[j] != 0) reduced_[j] -= factor * pivot_row[j];
            }
        }
        basis_[leave_row] = enter_col;
    }

    void run(std::size_t enterable_cols) {
        // Dantzig pricing races ahead on these dense tableaus; Bland's rule
        // takes over after a pivot budget so termination stays guaranteed.
        const std::size_t dantzig_budget = 50 + 4 * (m_ + n_);
        for (std::size_t pivots = 0;; ++pivots) {
            const bool bland = pivots >= dantzig_budget;
            std::size_t enter = enterable_cols;
            for (std::size_t j = 0; j < enterable_cols; ++j) {
                if (reduced_[j] >= 0) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (enter == enterable_cols || reduced_[j] < reduced_[enter]) enter = j;
            }
            if (enter == enterable_cols) break;

            std::size_t leave = m_;
            Rat best_ratio;
            for (std::size_t i = 0; i < m_; ++i) {
                if (rows_[i][enter] <= 0) continue;
                Rat ratio = rows_[i].back() / rows_[i][enter];
                if (leave == m_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) {
                throw Error(Errc::Unbounded, "objective unbounded (internal: q lies in a simplex)");
            }
            pivot(leave, enter);
            recompute_objective();
        }
    }

    void recompute_objective() {
        objective_ = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (cost_[basis_[i]] != 0) objective_ += cost_[basis_[i]] * rows_[i].back();
        }
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (rows_[i][j] != 0) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_) {
                throw Error(Errc::RankDeficient, "dependent constraint row survived phase 1");
            }
            pivot(i, enter);
            recompute_objective();
        }
    }

    std::size_t m_, n_;
    std::vector<std::vector<Rat>> rows_;
    std::vector<bool> row_flipped_;
    std::vector<std::size_t> basis_;
    std::vector<Rat> cost_;
    std::vector<Rat> reduced_;
    Rat objective_;
    std::vector<Rat> farkas_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    if (lp.A.empty() || lp.A.size() != lp.b.size() || lp.A[0].size() != lp.c.size()) {
        throw Error(Errc::DimensionMismatch, "inconsistent LP dimensions");
    }
    Tableau tableau(lp.A, lp.b);
    if (!tableau.phase1()) {
        throw InfeasibleError(Errc::Infeasible, "no feasible point", tableau.farkas());
    }
    std::vector<Rat> c = lp.c;
    if (lp.sense == Sense::Max) {
        for (auto& value : c) value = -value;
    }
    tableau.phase2(c);
    Rat value = tableau.objective();
    if (lp.sense == Sense::Max) value = -value;
    return {std::move(value), tableau.solution()};
}

}  // namespace obounds
