#pragma once

// Comparison relations between allocations (stochastic, size and welfare-size
// dominance, upper-equivalence), allocation properties (IR, non-wastefulness,
// envy-freeness, ex-post efficiency) and the LP-backed improvement searches.
//
// Both models go through one constraint builder, `Space`: the feasible
// polytope plus, per agent, the linear forms whose values are the agent's
// upper-contour masses, participation size and welfare size.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "allocx/allocation.hpp"
#include "allocx/model.hpp"
#include "allocx/rational.hpp"
#include "allocx/simplex.hpp"

namespace allocx {

/// Machine-readable counterexample or certificate: a kind tag plus ordered
/// key/value fields.
struct Witness {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;

    Witness() = default;
    explicit Witness(std::string k) : kind(std::move(k)) {}

    Witness& with(std::string key, std::string value) {
        fields.emplace_back(std::move(key), std::move(value));
        return *this;
    }

    std::string get(std::string_view key) const {
        for (const auto& [k, v] : fields)
            if (k == key) return v;
        return {};
    }

    std::string to_string() const {
        std::string s = kind;
        if (fields.empty()) return s;
        s += " (";
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) s += ", ";
            s += fields[k].first + "=" + fields[k].second;
        }
        return s + ")";
    }
};

struct Check {
    bool ok = true;
    std::optional<Witness> witness;

    explicit operator bool() const { return ok; }
    static Check pass() { return {}; }
    static Check fail(Witness w) { return Check{false, std::move(w)}; }
};

// ---------------------------------------------------------------------------
// Constraint builder

/// Linear form with unit coefficients: a list of variable indices.
using Form = std::vector<std::size_t>;

struct Space {
    std::size_t vars = 0;
    std::vector<lp::Constraint> rows;  // feasibility, besides x >= 0
    std::vector<std::string> agents;
    /// contours[i][t]: mass of agent i's t-th upper contour set (best first).
    std::vector<std::vector<Form>> contours;
    std::vector<std::vector<std::string>> thresholds;
    /// The first far_better[i] contours are the thresholds of the far-better set.
    std::vector<std::size_t> far_better;
    std::vector<Form> size;
    std::vector<Form> welfare;
};

inline Rational eval(const Form& f, const std::vector<Rational>& x) {
    Rational r = 0;
    for (auto v : f) r += x[v];
    return r;
}

/// Object model. Variable i*(m+1)+col is p_{i,col}, the layout of
/// RandomAssignment::cells(). Contours: each acceptable class cumulatively,
/// then acceptable objects plus the outside option.
inline Space space_of(const Profile& profile) {
    const std::size_t n = profile.n(), m = profile.m(), w = m + 1;
    Space s;
    s.vars = n * w;
    for (std::size_t i = 0; i < n; ++i) {
        lp::Constraint row{std::vector<Rational>(s.vars), lp::Sense::Equal, 1};
        for (std::size_t c = 0; c <= m; ++c) row.coeffs[i * w + c] = 1;
        s.rows.push_back(std::move(row));
    }
    for (std::size_t o = 0; o < m; ++o) {
        lp::Constraint row{std::vector<Rational>(s.vars), lp::Sense::LessEqual, profile.quota(o)};
        for (std::size_t i = 0; i < n; ++i) row.coeffs[i * w + o] = 1;
        s.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < n; ++i) {
        s.agents.push_back(profile.agent(i).label);
        const auto& cls = profile.pref(i).classes();
        std::vector<Form> cs;
        std::vector<std::string> labels;
        Form acc;
        for (const auto& c : cls) {
            for (const auto& o : c) acc.push_back(i * w + profile.column(o));
            std::sort(acc.begin(), acc.end());
            cs.push_back(acc);
            labels.push_back(c.front().label);
        }
        Form with_outside = acc;
        with_outside.push_back(i * w + m);
        cs.push_back(with_outside);
        labels.emplace_back(kOutsideLabel);
        s.contours.push_back(std::move(cs));
        s.thresholds.push_back(std::move(labels));
        s.far_better.push_back(cls.empty() ? 0 : cls.size() - 1);
        Form sz;
        for (std::size_t o = 0; o < m; ++o) sz.push_back(i * w + o);
        s.size.push_back(std::move(sz));
        s.welfare.push_back(acc);
    }
    return s;
}

/// Abstract model: one variable per allocation. Contours per indifference
/// class, skipping the bottom class (its contour is everything).
inline Space space_of(const AllocationSpace& space) {
    const std::size_t A = space.size();
    Space s;
    s.vars = A;
    lp::Constraint row{std::vector<Rational>(A, Rational(1)), lp::Sense::Equal, 1};
    s.rows.push_back(std::move(row));
    for (std::size_t i = 0; i < space.n(); ++i) {
        s.agents.push_back(space.agents()[i].label);
        std::vector<Form> cs;
        std::vector<std::string> labels;
        const int k = space.class_count(i), out = space.outside_rank(i);
        for (int t = 0; t + 1 < k; ++t) {
            Form f;
            std::string label;
            for (std::size_t a = 0; a < A; ++a) {
                if (space.rank(i, a) > t) continue;
                f.push_back(a);
                if (space.rank(i, a) == t && label.empty() && space.participates(i, a)) label = space.allocation(a);
            }
            cs.push_back(std::move(f));
            labels.push_back(label.empty() ? std::string(kOutsideLabel) : label);
        }
        // Far-better: participating allocations strictly above some
        // participating allocation that is weakly above the outside option.
        int lowest = -1;
        for (std::size_t a = 0; a < A; ++a)
            if (space.participates(i, a) && space.rank(i, a) <= out) lowest = std::max(lowest, space.rank(i, a));
        s.far_better.push_back(lowest < 0 ? 0 : static_cast<std::size_t>(lowest));
        s.contours.push_back(std::move(cs));
        s.thresholds.push_back(std::move(labels));
        Form sz, wf;
        for (std::size_t a = 0; a < A; ++a) {
            if (space.participates(i, a)) sz.push_back(a);
            if (space.rank(i, a) < out) wf.push_back(a);
        }
        s.size.push_back(std::move(sz));
        s.welfare.push_back(std::move(wf));
    }
    return s;
}

inline const std::vector<Rational>& point_of(const RandomAssignment& p) { return p.cells(); }
inline const std::vector<Rational>& point_of(const AbstractLottery& l) { return l.weights; }

// ---------------------------------------------------------------------------
// Comparisons

/// Relation of a first allocation to a second one.
enum class Order { Equivalent, Dominates, Dominated, Incomparable };

inline std::string to_string(Order o) {
    switch (o) {
        case Order::Equivalent: return "equivalent";
        case Order::Dominates: return "strict";
        case Order::Dominated: return "dominated";
        case Order::Incomparable: return "incomparable";
    }
    return "?";
}

inline bool weakly_dominates(Order o) { return o == Order::Equivalent || o == Order::Dominates; }

/// One threshold at which the two allocations differ.
struct Gap {
    std::size_t agent = 0;
    std::string agent_label;
    std::size_t threshold_index = 0;
    std::string threshold;
    Rational first, second;

    std::string to_string() const {
        return "agent " + agent_label + ", threshold " + threshold + ", " + allocx::to_string(first) + " vs " +
               allocx::to_string(second);
    }
};

struct Comparison {
    Order order = Order::Equivalent;
    std::vector<Order> per_agent;
    std::optional<Gap> gain;  // first place where the first allocation has more
    std::optional<Gap> loss;  // first place where it has less

    /// e.g. `SD: strict (witness: agent 3, threshold c, 3/4 vs 1/2)`
    std::string line(std::string_view tag) const {
        std::string s = std::string(tag) + ": " + to_string(order);
        switch (order) {
            case Order::Equivalent: break;
            case Order::Dominates: s += " (witness: " + gain->to_string() + ")"; break;
            case Order::Dominated: s += " (witness: " + loss->to_string() + ")"; break;
            case Order::Incomparable:
                s += " (witness: " + gain->to_string() + "; " + loss->to_string() + ")";
                break;
        }
        return s;
    }
};

namespace detail {

inline Order combine(bool more, bool less) {
    if (more && less) return Order::Incomparable;
    if (more) return Order::Dominates;
    if (less) return Order::Dominated;
    return Order::Equivalent;
}

/// Compares per-agent value vectors (a[i][t] vs b[i][t]).
inline Comparison compare_values(const Space& s, const std::vector<std::vector<Rational>>& a,
                                 const std::vector<std::vector<Rational>>& b,
                                 const std::vector<std::vector<std::string>>& labels) {
    Comparison c;
    bool more = false, less = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool mi = false, li = false;
        for (std::size_t t = 0; t < a[i].size(); ++t) {
            if (a[i][t] == b[i][t]) continue;
            Gap g{i, s.agents[i], t, labels[i][t], a[i][t], b[i][t]};
            if (a[i][t] > b[i][t]) {
                mi = true;
                if (!c.gain) c.gain = g;
            } else {
                li = true;
                if (!c.loss) c.loss = g;
            }
        }
        c.per_agent.push_back(combine(mi, li));
        more = more || mi;
        less = less || li;
    }
    c.order = combine(more, less);
    return c;
}

inline std::vector<std::vector<Rational>> contour_values(const Space& s, const std::vector<Rational>& x) {
    std::vector<std::vector<Rational>> v(s.contours.size());
    for (std::size_t i = 0; i < s.contours.size(); ++i)
        for (const auto& f : s.contours[i]) v[i].push_back(eval(f, x));
    return v;
}

inline std::vector<std::vector<Rational>> form_values(const std::vector<Form>& forms, const std::vector<Rational>& x) {
    std::vector<std::vector<Rational>> v;
    for (const auto& f : forms) v.push_back({eval(f, x)});
    return v;
}

inline void same_shape(const Space& s, const std::vector<Rational>& x, const std::vector<Rational>& y) {
    if (x.size() != s.vars || y.size() != s.vars) throw PreconditionError("allocations do not match the profile");
}

inline Comparison sd(const Space& s, const std::vector<Rational>& x, const std::vector<Rational>& y) {
    same_shape(s, x, y);
    return compare_values(s, contour_values(s, x), contour_values(s, y), s.thresholds);
}

inline Comparison by_forms(const Space& s, const std::vector<Form>& forms, const std::vector<Rational>& x,
                           const std::vector<Rational>& y, const std::string& label) {
    same_shape(s, x, y);
    std::vector<std::vector<std::string>> labels(forms.size(), std::vector<std::string>{label});
    return compare_values(s, form_values(forms, x), form_values(forms, y), labels);
}

inline std::optional<Gap> upper_gap(const Space& s, const std::vector<Rational>& x, const std::vector<Rational>& y) {
    same_shape(s, x, y);
    for (std::size_t i = 0; i < s.contours.size(); ++i)
        for (std::size_t t = 0; t < s.far_better[i]; ++t) {
            Rational a = eval(s.contours[i][t], x), b = eval(s.contours[i][t], y);
            if (a != b) return Gap{i, s.agents[i], t, s.thresholds[i][t], a, b};
        }
    return std::nullopt;
}

}  // namespace detail

/// Stochastic dominance of p over q, per agent and overall.
inline Comparison sd_compare(const RandomAssignment& p, const RandomAssignment& q, const Profile& profile) {
    return detail::sd(space_of(profile), point_of(p), point_of(q));
}
inline Comparison sd_compare(const AllocationSpace& space, const AbstractLottery& p, const AbstractLottery& q) {
    return detail::sd(space_of(space), point_of(p), point_of(q));
}

inline Comparison size_compare(const RandomAssignment& p, const RandomAssignment& q, const Profile& profile) {
    auto s = space_of(profile);
    return detail::by_forms(s, s.size, point_of(p), point_of(q), "size");
}
inline Comparison size_compare(const AllocationSpace& space, const AbstractLottery& p, const AbstractLottery& q) {
    auto s = space_of(space);
    return detail::by_forms(s, s.size, point_of(p), point_of(q), "size");
}

inline Comparison welfare_size_compare(const RandomAssignment& p, const RandomAssignment& q, const Profile& profile) {
    auto s = space_of(profile);
    return detail::by_forms(s, s.welfare, point_of(p), point_of(q), "welfare-size");
}
inline Comparison welfare_size_compare(const AllocationSpace& space, const AbstractLottery& p,
                                       const AbstractLottery& q) {
    auto s = space_of(space);
    return detail::by_forms(s, s.welfare, point_of(p), point_of(q), "welfare-size");
}

struct UpperEquivalence {
    bool equivalent = true;
    std::optional<Gap> witness;
    explicit operator bool() const { return equivalent; }
};

inline UpperEquivalence upper_equivalent(const RandomAssignment& p, const RandomAssignment& q, const Profile& profile) {
    auto g = detail::upper_gap(space_of(profile), point_of(p), point_of(q));
    return {!g.has_value(), g};
}
inline UpperEquivalence upper_equivalent(const AllocationSpace& space, const AbstractLottery& p,
                                         const AbstractLottery& q) {
    auto g = detail::upper_gap(space_of(space), point_of(p), point_of(q));
    return {!g.has_value(), g};
}

/// Pareto comparison of deterministic assignments (lower rank is better).
inline Order pareto_compare(const DeterministicAssignment& x, const DeterministicAssignment& y,
                            const Profile& profile) {
    bool more = false, less = false;
    for (std::size_t i = 0; i < profile.n(); ++i) {
        int a = profile.rank(i, x.choice.at(i)), b = profile.rank(i, y.choice.at(i));
        more = more || a < b;
        less = less || a > b;
    }
    return detail::combine(more, less);
}
inline Order pareto_compare(const AllocationSpace& space, std::size_t x, std::size_t y) {
    bool more = false, less = false;
    for (std::size_t i = 0; i < space.n(); ++i) {
        more = more || space.rank(i, x) < space.rank(i, y);
        less = less || space.rank(i, x) > space.rank(i, y);
    }
    return detail::combine(more, less);
}

// ---------------------------------------------------------------------------
// Allocation properties

inline Check is_IR(const RandomAssignment& p, const Profile& profile) {
    for (std::size_t i = 0; i < profile.n(); ++i)
        for (std::size_t o = 0; o < profile.m(); ++o)
            if (p.at(i, o) > 0 && profile.rank(i, o) == Profile::kUnacceptable)
                return Check::fail(Witness{"not-IR"}
                                       .with("agent", profile.agent(i).label)
                                       .with("object", profile.object(o).label)
                                       .with("mass", to_string(p.at(i, o))));
    return Check::pass();
}

inline Check is_IR(const AllocationSpace& space, const AbstractLottery& l) {
    for (std::size_t a = 0; a < space.size(); ++a) {
        if (l.weights[a] == 0) continue;
        for (std::size_t i = 0; i < space.n(); ++i)
            if (space.rank(i, a) > space.outside_rank(i))
                return Check::fail(Witness{"not-IR"}
                                       .with("agent", space.agents()[i].label)
                                       .with("allocation", space.allocation(a))
                                       .with("mass", to_string(l.weights[a])));
    }
    return Check::pass();
}

/// IR, and nobody holds o' with positive probability while preferring an
/// object o that is not exhausted.
inline Check is_non_wasteful(const RandomAssignment& p, const Profile& profile) {
    if (auto ir = is_IR(p, profile); !ir) return ir;
    for (std::size_t o = 0; o < profile.m(); ++o) {
        if (p.column_sum(o) >= profile.quota(o)) continue;
        for (std::size_t i = 0; i < profile.n(); ++i)
            for (std::size_t c = 0; c <= profile.m(); ++c)
                if (p.at(i, c) > 0 && profile.rank(i, o) < profile.rank(i, c))
                    return Check::fail(Witness{"wasteful"}
                                           .with("agent", profile.agent(i).label)
                                           .with("unexhausted", profile.object(o).label)
                                           .with("holds", RandomAssignment::column_label(profile, c))
                                           .with("supply-left", to_string(profile.quota(o) - p.column_sum(o))));
    }
    return Check::pass();
}

/// Every agent weakly prefers (sd, own preference) their row to every other row.
inline Check is_envy_free(const RandomAssignment& p, const Profile& profile) {
    auto s = space_of(profile);
    const std::size_t w = profile.m() + 1;
    for (std::size_t i = 0; i < profile.n(); ++i)
        for (std::size_t j = 0; j < profile.n(); ++j) {
            if (i == j) continue;
            for (std::size_t t = 0; t < s.contours[i].size(); ++t) {
                Rational own = 0, other = 0;
                for (auto v : s.contours[i][t]) {
                    own += p.at(i, v % w);
                    other += p.at(j, v % w);
                }
                if (own < other)
                    return Check::fail(Witness{"envy"}
                                           .with("agent", profile.agent(i).label)
                                           .with("envies", profile.agent(j).label)
                                           .with("threshold", s.thresholds[i][t])
                                           .with("own", to_string(own))
                                           .with("other", to_string(other)));
            }
        }
    return Check::pass();
}

/// All IR deterministic assignments respecting quotas, in lexicographic order.
inline std::vector<DeterministicAssignment> ir_assignments(const Profile& profile, std::size_t limit = 100000) {
    std::vector<DeterministicAssignment> out;
    std::vector<std::size_t> choice(profile.n());
    std::vector<int> left(profile.m());
    for (std::size_t o = 0; o < profile.m(); ++o) left[o] = profile.quota(o);
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == profile.n()) {
            if (out.size() >= limit) throw PreconditionError("too many deterministic assignments to enumerate");
            out.push_back({choice});
            return;
        }
        for (std::size_t c = 0; c <= profile.m(); ++c) {
            if (c < profile.m() && (profile.rank(i, c) == Profile::kUnacceptable || left[c] == 0)) continue;
            choice[i] = c;
            if (c < profile.m()) --left[c];
            self(self, i + 1);
            if (c < profile.m()) ++left[c];
        }
    };
    rec(rec, 0);
    return out;
}

inline std::vector<DeterministicAssignment> pareto_efficient_assignments(const Profile& profile) {
    auto all = ir_assignments(profile);
    std::vector<DeterministicAssignment> out;
    for (const auto& x : all) {
        bool dominated = std::any_of(all.begin(), all.end(),
                                     [&](const auto& y) { return pareto_compare(y, x, profile) == Order::Dominates; });
        if (!dominated) out.push_back(x);
    }
    return out;
}

/// Convex combination of Pareto-efficient deterministic assignments?
inline bool is_ExPE(const RandomAssignment& p, const Profile& profile) {
    auto pe = pareto_efficient_assignments(profile);
    lp::Problem prob(pe.size());
    auto& sum = prob.add(lp::Sense::Equal, 1);
    for (auto& c : sum.coeffs) c = 1;
    for (std::size_t i = 0; i < profile.n(); ++i)
        for (std::size_t c = 0; c <= profile.m(); ++c) {
            auto& row = prob.add(lp::Sense::Equal, p.at(i, c));
            for (std::size_t k = 0; k < pe.size(); ++k)
                if (pe[k].choice[i] == c) row.coeffs[k] = 1;
        }
    return lp::solve(prob).status == lp::Status::Optimal;
}

/// Abstract model: every allocation in the support is Pareto efficient.
inline bool is_ExPE(const AllocationSpace& space, const AbstractLottery& l) {
    for (std::size_t a = 0; a < space.size(); ++a) {
        if (l.weights[a] == 0) continue;
        for (std::size_t b = 0; b < space.size(); ++b)
            if (pareto_compare(space, b, a) == Order::Dominates) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Improvement searches. Strict inequalities become "maximize t subject to
// t <= each strict quantity"; the relation is strict iff the optimum t > 0.

namespace detail {

class Search {
public:
    Search(const Space& s, const std::vector<Rational>& p) : s_(s), p_(p), prob_(s.vars + 1) {
        for (const auto& r : s.rows) {
            auto row = r;
            row.coeffs.emplace_back(0);
            prob_.rows.push_back(std::move(row));
        }
        prob_.objective[t()] = 1;
        prob_.add(lp::Sense::LessEqual, 1).coeffs[t()] = 1;
    }

    std::size_t t() const { return s_.vars; }

    /// form(x) <sense> form(p)
    void hold(const Form& f, lp::Sense sense) {
        auto& row = prob_.add(sense, eval(f, p_));
        for (auto v : f) row.coeffs[v] += 1;
    }

    /// t <= sum over forms of (form(x) - form(p))
    void bound(const std::vector<const Form*>& forms) {
        Rational rhs = 0;
        for (auto* f : forms) rhs += eval(*f, p_);
        auto& row = prob_.add(lp::Sense::GreaterEqual, rhs);
        for (auto* f : forms)
            for (auto v : *f) row.coeffs[v] += 1;
        row.coeffs[t()] = -1;
    }

    void weak_sd(std::size_t i) {
        for (const auto& f : s_.contours[i]) hold(f, lp::Sense::GreaterEqual);
    }
    void equal_sd(std::size_t i) {
        for (const auto& f : s_.contours[i]) hold(f, lp::Sense::Equal);
    }
    std::vector<const Form*> contours(std::size_t i) const {
        std::vector<const Form*> out;
        for (const auto& f : s_.contours[i]) out.push_back(&f);
        return out;
    }

    std::optional<std::vector<Rational>> run() const {
        auto res = lp::solve(prob_);
        if (res.status != lp::Status::Optimal) throw InvariantError("improvement LP is not solvable at the given point");
        if (res.value <= 0) return std::nullopt;
        res.x.pop_back();
        return res.x;
    }

private:
    const Space& s_;
    const std::vector<Rational>& p_;
    lp::Problem prob_;
};

inline std::optional<std::vector<Rational>> sd_improvement(const Space& s, const std::vector<Rational>& p) {
    Search q(s, p);
    std::vector<const Form*> all;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        q.weak_sd(i);
        for (auto* f : q.contours(i)) all.push_back(f);
    }
    q.bound(all);
    return q.run();
}

inline std::optional<std::vector<Rational>> bidominating(const Space& s, const std::vector<Rational>& p) {
    Search q(s, p);
    std::vector<const Form*> sd_all, size_all;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        q.weak_sd(i);
        q.hold(s.size[i], lp::Sense::GreaterEqual);
        for (auto* f : q.contours(i)) sd_all.push_back(f);
        size_all.push_back(&s.size[i]);
    }
    q.bound(sd_all);
    q.bound(size_all);
    return q.run();
}

/// Agents in `better` gain strictly in sd and in size, everyone else is
/// sd-equivalent with weakly larger size.
inline std::optional<std::vector<Rational>> strongly_bidominating(const Space& s, const std::vector<Rational>& p,
                                                                  const std::vector<std::size_t>& better) {
    Search q(s, p);
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        bool in = std::find(better.begin(), better.end(), i) != better.end();
        q.hold(s.size[i], lp::Sense::GreaterEqual);
        if (in) {
            q.weak_sd(i);
            q.bound(q.contours(i));
            q.bound({&s.size[i]});
        } else {
            q.equal_sd(i);
        }
    }
    return q.run();
}

/// Non-empty subsets of {0..n-1}, largest first, lexicographic within a size.
inline std::vector<std::vector<std::size_t>> subsets_by_size(std::size_t n) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = n; k >= 1; --k) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
        do {
            std::vector<std::size_t> sub;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) sub.push_back(i);
            out.push_back(std::move(sub));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return out;
}

inline RandomAssignment to_assignment(const std::vector<Rational>& x, const Profile& profile) {
    RandomAssignment r(profile.n(), profile.m());
    for (std::size_t i = 0; i < profile.n(); ++i)
        for (std::size_t c = 0; c <= profile.m(); ++c) r.at(i, c) = x[i * (profile.m() + 1) + c];
    r.validate(profile);
    return r;
}

inline AbstractLottery to_lottery(const std::vector<Rational>& x, const AllocationSpace& space) {
    AbstractLottery l{x};
    l.validate(space);
    return l;
}

inline void expect(bool ok, const char* what) {
    if (!ok) throw InvariantError(std::string("search result fails re-verification: ") + what);
}

inline void verify_strong(const Comparison& sd, const Comparison& size) {
    expect(sd.order == Order::Dominates && size.order == Order::Dominates, "bidominance");
    for (std::size_t i = 0; i < sd.per_agent.size(); ++i)
        if (sd.per_agent[i] == Order::Dominates) expect(size.per_agent[i] == Order::Dominates, "strong clause");
}

}  // namespace detail

/// An allocation strictly sd-dominating p, if one exists (ordinal efficiency test).
inline std::optional<RandomAssignment> find_sd_improvement(const RandomAssignment& p, const Profile& profile) {
    auto x = detail::sd_improvement(space_of(profile), point_of(p));
    if (!x) return std::nullopt;
    auto r = detail::to_assignment(*x, profile);
    detail::expect(sd_compare(r, p, profile).order == Order::Dominates, "strict sd");
    return r;
}
inline std::optional<AbstractLottery> find_sd_improvement(const AllocationSpace& space, const AbstractLottery& p) {
    auto x = detail::sd_improvement(space_of(space), point_of(p));
    if (!x) return std::nullopt;
    auto r = detail::to_lottery(*x, space);
    detail::expect(sd_compare(space, r, p).order == Order::Dominates, "strict sd");
    return r;
}

inline std::optional<RandomAssignment> find_bidominating(const RandomAssignment& p, const Profile& profile) {
    auto x = detail::bidominating(space_of(profile), point_of(p));
    if (!x) return std::nullopt;
    auto r = detail::to_assignment(*x, profile);
    detail::expect(sd_compare(r, p, profile).order == Order::Dominates, "strict sd");
    detail::expect(size_compare(r, p, profile).order == Order::Dominates, "strict size");
    return r;
}
inline std::optional<AbstractLottery> find_bidominating(const AllocationSpace& space, const AbstractLottery& p) {
    auto x = detail::bidominating(space_of(space), point_of(p));
    if (!x) return std::nullopt;
    auto r = detail::to_lottery(*x, space);
    detail::expect(sd_compare(space, r, p).order == Order::Dominates, "strict sd");
    detail::expect(size_compare(space, r, p).order == Order::Dominates, "strict size");
    return r;
}

template <class Alloc>
struct StrongImprovement {
    Alloc allocation;
    std::vector<std::size_t> better_off;  // agent indices
};

inline std::optional<StrongImprovement<RandomAssignment>> find_strongly_bidominating(const RandomAssignment& p,
                                                                                       const Profile& profile) {
    auto s = space_of(profile);
    for (const auto& sub : detail::subsets_by_size(profile.n())) {
        auto x = detail::strongly_bidominating(s, point_of(p), sub);
        if (!x) continue;
        auto r = detail::to_assignment(*x, profile);
        detail::verify_strong(sd_compare(r, p, profile), size_compare(r, p, profile));
        return StrongImprovement<RandomAssignment>{std::move(r), sub};
    }
    return std::nullopt;
}
inline std::optional<StrongImprovement<AbstractLottery>> find_strongly_bidominating(const AllocationSpace& space,
                                                                                      const AbstractLottery& p) {
    auto s = space_of(space);
    for (const auto& sub : detail::subsets_by_size(space.n())) {
        auto x = detail::strongly_bidominating(s, point_of(p), sub);
        if (!x) continue;
        auto r = detail::to_lottery(*x, space);
        detail::verify_strong(sd_compare(space, r, p), size_compare(space, r, p));
        return StrongImprovement<AbstractLottery>{std::move(r), sub};
    }
    return std::nullopt;
}

}  // namespace allocx
