#pragma once

// Deterministic and random allocations in the object model, lotteries in both
// models, size accounting, and the Birkhoff-von Neumann bridge between the
// matrix and lottery representations.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "allocx/model.hpp"
#include "allocx/rational.hpp"

namespace allocx {

/// Agent i's column choice: an object column in [0, m) or m for the outside option.
struct DeterministicAssignment {
    std::vector<std::size_t> choice;

    friend auto operator<=>(const DeterministicAssignment&, const DeterministicAssignment&) = default;
};

/// n x (m + 1) probability matrix; the last column is the outside option.
class RandomAssignment {
public:
    RandomAssignment() = default;

    /// Everyone holds the outside option.
    RandomAssignment(std::size_t n, std::size_t m) : n_(n), m_(m), cells_(n * (m + 1)) {
        for (std::size_t i = 0; i < n; ++i) at(i, m) = 1;
    }

    static RandomAssignment null(const Profile& p) { return RandomAssignment(p.n(), p.m()); }

    static RandomAssignment from(const DeterministicAssignment& d, const Profile& p) {
        if (d.choice.size() != p.n()) throw PreconditionError("assignment size does not match profile");
        RandomAssignment r(p.n(), p.m());
        for (std::size_t i = 0; i < p.n(); ++i) {
            if (d.choice[i] > p.m()) throw PreconditionError("column out of range");
            r.at(i, p.m()) = 0;
            r.at(i, d.choice[i]) = 1;
        }
        r.validate(p);
        return r;
    }

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    std::size_t columns() const { return m_ + 1; }

    const Rational& at(std::size_t i, std::size_t col) const { return cells_[i * (m_ + 1) + col]; }
    Rational& at(std::size_t i, std::size_t col) { return cells_[i * (m_ + 1) + col]; }
    const std::vector<Rational>& cells() const { return cells_; }

    Rational column_sum(std::size_t col) const {
        Rational s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += at(i, col);
        return s;
    }

    bool is_deterministic() const {
        return std::all_of(cells_.begin(), cells_.end(), [](const Rational& r) { return r == 0 || r == 1; });
    }

    std::size_t nonzeros() const {
        return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& r) { return r != 0; }));
    }

    /// Entries in [0,1], rows sum to one, object columns within quota.
    std::optional<std::string> violation(const Profile& p) const {
        if (n_ != p.n() || m_ != p.m()) return "shape does not match profile";
        for (std::size_t i = 0; i < n_; ++i) {
            Rational row = 0;
            for (std::size_t c = 0; c <= m_; ++c) {
                if (at(i, c) < 0 || at(i, c) > 1)
                    return "entry (" + p.agent(i).label + "," + column_label(p, c) + ") outside [0,1]";
                row += at(i, c);
            }
            if (row != 1) return "row of agent " + p.agent(i).label + " sums to " + to_string(row);
        }
        for (std::size_t o = 0; o < m_; ++o)
            if (column_sum(o) > p.quota(o))
                return "object " + p.object(o).label + " assigned " + to_string(column_sum(o)) + " > quota";
        return std::nullopt;
    }

    void validate(const Profile& p) const {
        if (auto v = violation(p)) throw InvariantError("invalid random assignment: " + *v);
    }

    static std::string column_label(const Profile& p, std::size_t col) {
        return col == p.m() ? std::string(kOutsideLabel) : p.object(col).label;
    }

    /// `alloc 1: a=1/2 c=1/4 @=1/4`, zero entries omitted.
    std::string to_text(const Profile& p) const {
        std::ostringstream os;
        for (std::size_t i = 0; i < n_; ++i) {
            os << "alloc " << p.agent(i).label << ":";
            for (std::size_t c = 0; c <= m_; ++c)
                if (at(i, c) != 0) os << ' ' << column_label(p, c) << '=' << to_string(at(i, c));
            os << '\n';
        }
        return os.str();
    }

    friend bool operator==(const RandomAssignment&, const RandomAssignment&) = default;

private:
    std::size_t n_ = 0, m_ = 0;
    std::vector<Rational> cells_;
};

/// Distribution over deterministic assignments (object model).
struct Lottery {
    std::vector<std::pair<Rational, DeterministicAssignment>> points;

    std::string to_text(const Profile& p) const {
        std::ostringstream os;
        for (const auto& [w, d] : points) {
            os << "point " << to_string(w) << ':';
            for (std::size_t i = 0; i < d.choice.size(); ++i)
                os << ' ' << p.agent(i).label << '=' << RandomAssignment::column_label(p, d.choice[i]);
            os << '\n';
        }
        return os.str();
    }
};

/// Distribution over the allocations of an AllocationSpace, indexed like
/// `space.allocations()`.
struct AbstractLottery {
    std::vector<Rational> weights;

    static AbstractLottery point(const AllocationSpace& s, std::string_view label) {
        AbstractLottery l{std::vector<Rational>(s.size())};
        l.weights[s.allocation_index(label)] = 1;
        return l;
    }

    /// Built from (label, weight) pairs; validated.
    static AbstractLottery of(const AllocationSpace& s, const std::vector<std::pair<std::string, Rational>>& mix) {
        AbstractLottery l{std::vector<Rational>(s.size())};
        for (const auto& [lbl, w] : mix) l.weights[s.allocation_index(lbl)] += w;
        l.validate(s);
        return l;
    }

    void validate(const AllocationSpace& s) const {
        if (weights.size() != s.size()) throw InvariantError("lottery size does not match space");
        Rational total = 0;
        for (const auto& w : weights) {
            if (w < 0) throw InvariantError("negative lottery weight");
            total += w;
        }
        if (total != 1) throw InvariantError("lottery weights sum to " + to_string(total));
    }

    std::string to_text(const AllocationSpace& s) const {
        std::ostringstream os;
        for (std::size_t a = 0; a < weights.size(); ++a)
            if (weights[a] != 0) os << "point " << to_string(weights[a]) << ": " << s.allocation(a) << '\n';
        return os.str();
    }

    friend bool operator==(const AbstractLottery&, const AbstractLottery&) = default;
};

inline Rational participation_size(const RandomAssignment& p, std::size_t i) {
    if (i >= p.n()) throw PreconditionError("unknown agent index");
    return 1 - p.at(i, p.m());
}

inline Rational participation_size(const AllocationSpace& s, const AbstractLottery& l, std::size_t i) {
    if (i >= s.n()) throw PreconditionError("unknown agent index");
    Rational r = 0;
    for (std::size_t a = 0; a < s.size(); ++a)
        if (s.participates(i, a)) r += l.weights[a];
    return r;
}

inline Rational total_size(const RandomAssignment& p) {
    Rational r = 0;
    for (std::size_t i = 0; i < p.n(); ++i) r += participation_size(p, i);
    return r;
}

inline Rational total_size(const AllocationSpace& s, const AbstractLottery& l) {
    Rational r = 0;
    for (std::size_t i = 0; i < s.n(); ++i) r += participation_size(s, l, i);
    return r;
}

/// Mass on objects strictly preferred to the outside option.
inline Rational welfare_size(const RandomAssignment& p, std::size_t i, const Profile& profile) {
    Rational r = 0;
    for (std::size_t o = 0; o < profile.m(); ++o)
        if (profile.rank(i, o) != Profile::kUnacceptable) r += p.at(i, o);
    return r;
}

inline Rational welfare_size(const AllocationSpace& s, const AbstractLottery& l, std::size_t i) {
    Rational r = 0;
    for (std::size_t a = 0; a < s.size(); ++a)
        if (s.rank(i, a) < s.outside_rank(i)) r += l.weights[a];
    return r;
}

inline RandomAssignment marginal(const Lottery& lottery, const Profile& profile) {
    RandomAssignment r(profile.n(), profile.m());
    for (std::size_t i = 0; i < profile.n(); ++i) r.at(i, profile.m()) = 0;
    for (const auto& [w, d] : lottery.points) {
        if (d.choice.size() != profile.n()) throw PreconditionError("assignment size does not match profile");
        for (std::size_t i = 0; i < profile.n(); ++i) r.at(i, d.choice[i]) += w;
    }
    return r;
}

namespace detail {

/// Bipartite b-matching of agents to columns restricted to `allowed` edges,
/// with column capacities. Columns flagged `must_fill` are saturated first;
/// later augmenting paths never unsaturate a column, so they stay full.
class CapacitatedMatcher {
public:
    CapacitatedMatcher(std::size_t agents, std::vector<int> capacity,
                       std::function<bool(std::size_t, std::size_t)> allowed)
        : n_(agents), cap_(std::move(capacity)), allowed_(std::move(allowed)), match_(agents, kNone),
          load_(cap_.size(), 0) {}

    bool augment(std::size_t agent, const std::vector<bool>& target) {
        std::vector<bool> seen(cap_.size(), false);
        return dfs(agent, target, seen);
    }

    std::optional<std::vector<std::size_t>> solve(const std::vector<bool>& must_fill) {
        // Phase one: fill mandatory columns as far as possible.
        for (std::size_t i = 0; i < n_; ++i) augment(i, must_fill);
        for (std::size_t c = 0; c < cap_.size(); ++c)
            if (must_fill[c] && load_[c] < cap_[c]) return std::nullopt;
        // Phase two: match everyone else anywhere.
        std::vector<bool> any(cap_.size(), true);
        for (std::size_t i = 0; i < n_; ++i)
            if (match_[i] == kNone && !augment(i, any)) return std::nullopt;
        return match_;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    bool dfs(std::size_t agent, const std::vector<bool>& target, std::vector<bool>& seen) {
        for (std::size_t c = 0; c < cap_.size(); ++c) {
            if (seen[c] || !allowed_(agent, c) || match_[agent] == c) continue;
            seen[c] = true;
            if (target[c] && load_[c] < cap_[c]) {
                assign(agent, c);
                return true;
            }
            // Column is full (or not a target): try to move one of its agents.
            for (std::size_t j = 0; j < n_; ++j) {
                if (match_[j] != c) continue;
                if (dfs(j, target, seen)) {
                    assign(agent, c);
                    return true;
                }
            }
        }
        return false;
    }

    void assign(std::size_t agent, std::size_t c) {
        if (match_[agent] != kNone) --load_[match_[agent]];
        match_[agent] = c;
        ++load_[c];
    }

    std::size_t n_;
    std::vector<int> cap_;
    std::function<bool(std::size_t, std::size_t)> allowed_;
    std::vector<std::size_t> match_;
    std::vector<int> load_;
};

}  // namespace detail

/// Writes a valid random assignment as a lottery over quota-respecting
/// deterministic assignments. Each round picks a deterministic assignment on
/// the minimal face containing the residual (support-only entries, tight
/// columns saturated) and peels off the largest feasible weight.
inline Lottery bvn_decompose(const RandomAssignment& p, const Profile& profile) {
    p.validate(profile);
    const std::size_t n = profile.n(), m = profile.m();
    RandomAssignment residual = p;
    Rational mass = 1;
    std::vector<int> cap(m + 1);
    for (std::size_t o = 0; o < m; ++o) cap[o] = profile.quota(o);
    cap[m] = static_cast<int>(n);

    Lottery out;
    std::size_t guard = 0;
    const std::size_t max_rounds = n * (m + 1) + m + 2;
    while (mass > 0) {
        if (++guard > max_rounds) throw InvariantError("bvn_decompose did not terminate");
        std::vector<bool> tight(m + 1, false);
        for (std::size_t o = 0; o < m; ++o) tight[o] = residual.column_sum(o) == mass * cap[o];
        detail::CapacitatedMatcher matcher(n, cap, [&](std::size_t i, std::size_t c) { return residual.at(i, c) > 0; });
        auto match = matcher.solve(tight);
        if (!match) throw InvariantError("bvn_decompose: no deterministic assignment on the residual face");

        std::vector<int> count(m + 1, 0);
        for (std::size_t i = 0; i < n; ++i) ++count[(*match)[i]];
        Rational w = mass;
        for (std::size_t i = 0; i < n; ++i) w = std::min(w, residual.at(i, (*match)[i]));
        for (std::size_t o = 0; o < m; ++o) {
            if (tight[o] || count[o] >= cap[o]) continue;
            Rational slack = mass * cap[o] - residual.column_sum(o);
            w = std::min(w, slack / (cap[o] - count[o]));
        }
        if (w <= 0) throw InvariantError("bvn_decompose: zero step");

        for (std::size_t i = 0; i < n; ++i) residual.at(i, (*match)[i]) -= w;
        mass -= w;
        DeterministicAssignment d{*match};
        auto it = std::find_if(out.points.begin(), out.points.end(), [&](const auto& pt) { return pt.second == d; });
        if (it != out.points.end()) it->first += w;
        else out.points.emplace_back(w, std::move(d));
    }
    return out;
}

}  // namespace allocx
