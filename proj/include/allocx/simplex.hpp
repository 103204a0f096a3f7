#pragma once

// Dense two-phase primal simplex over exact rationals. Bland's rule for both
// entering and leaving variables, so it cannot cycle.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "allocx/model.hpp"
#include "allocx/rational.hpp"

namespace allocx::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<Rational> coeffs;  // dense, one per variable
    Sense sense = Sense::LessEqual;
    Rational rhs = 0;
};

/// maximize objective·x subject to rows, x >= 0.
struct Problem {
    std::size_t vars = 0;
    std::vector<Constraint> rows;
    std::vector<Rational> objective;

    explicit Problem(std::size_t n = 0) : vars(n), objective(n) {}

    Constraint& add(Sense s, Rational rhs) {
        rows.push_back(Constraint{std::vector<Rational>(vars), s, std::move(rhs)});
        return rows.back();
    }
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    Rational value = 0;
    std::vector<Rational> x;
};

namespace detail {

class Tableau {
public:
    Tableau(const Problem& p) : nvars_(p.vars) {
        const std::size_t m = p.rows.size();
        // Column layout: original | slack/surplus (one per inequality) | artificial.
        std::size_t ineq = 0, art = 0;
        for (const auto& r : p.rows) {
            if (r.coeffs.size() != p.vars) throw InvariantError("lp: row width mismatch");
            bool flip = r.rhs < 0;
            Sense s = r.sense;
            if (flip && s != Sense::Equal) s = (s == Sense::LessEqual) ? Sense::GreaterEqual : Sense::LessEqual;
            if (s != Sense::Equal) ++ineq;
            if (s != Sense::LessEqual) ++art;
        }
        slack0_ = nvars_;
        art0_ = nvars_ + ineq;
        cols_ = art0_ + art;
        t_.assign(m, std::vector<Rational>(cols_ + 1));
        basis_.assign(m, 0);
        std::size_t si = slack0_, ai = art0_;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = p.rows[i];
            bool flip = r.rhs < 0;
            Sense s = r.sense;
            if (flip && s != Sense::Equal) s = (s == Sense::LessEqual) ? Sense::GreaterEqual : Sense::LessEqual;
            for (std::size_t j = 0; j < nvars_; ++j) t_[i][j] = flip ? Rational(-r.coeffs[j]) : r.coeffs[j];
            t_[i][cols_] = flip ? Rational(-r.rhs) : r.rhs;
            if (s == Sense::LessEqual) {
                t_[i][si] = 1;
                basis_[i] = si++;
            } else if (s == Sense::GreaterEqual) {
                t_[i][si++] = -1;
                t_[i][ai] = 1;
                basis_[i] = ai++;
            } else {
                t_[i][ai] = 1;
                basis_[i] = ai++;
            }
        }
    }

    Result solve(const std::vector<Rational>& objective) {
        // Phase one: maximize -(sum of artificials).
        if (art0_ < cols_) {
            std::vector<Rational> c1(cols_);
            for (std::size_t j = art0_; j < cols_; ++j) c1[j] = -1;
            run(c1, cols_);
            Rational v = value(c1);
            if (v < 0) return Result{Status::Infeasible, 0, {}};
            drive_out_artificials();
        }
        std::vector<Rational> c2(cols_);
        for (std::size_t j = 0; j < nvars_; ++j) c2[j] = objective[j];
        if (!run(c2, art0_)) return Result{Status::Unbounded, 0, {}};
        Result res;
        res.status = Status::Optimal;
        res.value = value(c2);
        res.x.assign(nvars_, 0);
        for (std::size_t i = 0; i < t_.size(); ++i)
            if (basis_[i] < nvars_) res.x[basis_[i]] = t_[i][cols_];
        return res;
    }

private:
    Rational value(const std::vector<Rational>& c) const {
        Rational v = 0;
        for (std::size_t i = 0; i < t_.size(); ++i) v += c[basis_[i]] * t_[i][cols_];
        return v;
    }

    /// Returns false when unbounded. Columns >= `limit` never enter.
    bool run(const std::vector<Rational>& c, std::size_t limit) {
        const std::size_t m = t_.size();
        for (;;) {
            std::optional<std::size_t> enter;
            for (std::size_t j = 0; j < limit && !enter; ++j) {
                if (is_basic(j)) continue;
                Rational rc = c[j];
                for (std::size_t i = 0; i < m; ++i)
                    if (t_[i][j] != 0) rc -= c[basis_[i]] * t_[i][j];
                if (rc > 0) enter = j;
            }
            if (!enter) return true;
            std::optional<std::size_t> leave;
            Rational best;
            for (std::size_t i = 0; i < m; ++i) {
                if (t_[i][*enter] <= 0) continue;
                Rational ratio = t_[i][cols_] / t_[i][*enter];
                if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return false;
            pivot(*leave, *enter);
        }
    }

    bool is_basic(std::size_t j) const {
        for (auto b : basis_)
            if (b == j) return true;
        return false;
    }

    void pivot(std::size_t r, std::size_t c) {
        Rational piv = t_[r][c];
        for (auto& v : t_[r]) v /= piv;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            if (i == r || t_[i][c] == 0) continue;
            Rational f = t_[i][c];
            for (std::size_t j = 0; j <= cols_; ++j)
                if (t_[r][j] != 0) t_[i][j] -= f * t_[r][j];
        }
        basis_[r] = c;
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < t_.size();) {
            if (basis_[i] < art0_) {
                ++i;
                continue;
            }
            std::optional<std::size_t> col;
            for (std::size_t j = 0; j < art0_ && !col; ++j)
                if (t_[i][j] != 0 && !is_basic(j)) col = j;
            if (col) {
                pivot(i, *col);
                ++i;
            } else {
                // Redundant row.
                t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
    }

    std::size_t nvars_, slack0_ = 0, art0_ = 0, cols_ = 0;
    std::vector<std::vector<Rational>> t_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Result solve(const Problem& p) {
    if (p.objective.size() != p.vars) throw InvariantError("lp: objective width mismatch");
    detail::Tableau t(p);
    return t.solve(p.objective);
}

}  // namespace allocx::lp
