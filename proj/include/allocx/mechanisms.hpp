#pragma once

// Named mechanisms: serial dictatorship, random priority, probabilistic
// serial, deferred acceptance, Boston, top trading cycles, null, and the
// patch combinator used to build counterexample mechanisms.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "allocx/allocation.hpp"
#include "allocx/model.hpp"
#include "allocx/rational.hpp"

namespace allocx {

/// Per-object strict ranking of agents (best first).
class PriorityTable {
public:
    PriorityTable() = default;

    void set(const ObjectId& o, std::vector<AgentId> ranking) {
        std::set<AgentId> seen(ranking.begin(), ranking.end());
        if (seen.size() != ranking.size()) throw ParseError("priority of '" + o.label + "' repeats an agent");
        rows_[o] = std::move(ranking);
    }

    /// Ranking used for every object without its own row.
    void set_default(std::vector<AgentId> ranking) {
        std::set<AgentId> seen(ranking.begin(), ranking.end());
        if (seen.size() != ranking.size()) throw ParseError("common priority repeats an agent");
        default_ = std::move(ranking);
    }

    /// Same ranking for every object.
    static PriorityTable common(std::vector<AgentId> ranking) {
        PriorityTable t;
        t.set_default(std::move(ranking));
        return t;
    }

    const std::map<ObjectId, std::vector<AgentId>>& rows() const { return rows_; }
    const std::optional<std::vector<AgentId>>& fallback() const { return default_; }

    const std::vector<AgentId>& ranking(const ObjectId& o) const {
        if (auto it = rows_.find(o); it != rows_.end()) return it->second;
        if (default_) return *default_;
        throw PreconditionError("no priority for object '" + o.label + "'");
    }

    /// rank[o][i]: position of agent i in object o's ranking (0 = highest).
    std::vector<std::vector<std::size_t>> ranks(const Profile& p) const {
        std::vector<std::vector<std::size_t>> r(p.m(), std::vector<std::size_t>(p.n()));
        for (std::size_t o = 0; o < p.m(); ++o) {
            const auto& row = ranking(p.object(o));
            if (row.size() != p.n())
                throw PreconditionError("priority of '" + p.object(o).label + "' must rank every agent");
            for (std::size_t k = 0; k < row.size(); ++k) r[o][p.agent_index(row[k])] = k;
        }
        return r;
    }

    std::string to_text() const {
        std::string s;
        if (default_) {
            s += "priority *:";
            for (const auto& a : *default_) s += " " + a.label;
            s += "\n";
        }
        for (const auto& [o, ranking] : rows_) {
            s += "priority " + o.label + ":";
            for (const auto& a : ranking) s += " " + a.label;
            s += "\n";
        }
        return s;
    }

    friend bool operator==(const PriorityTable&, const PriorityTable&) = default;

private:
    std::map<ObjectId, std::vector<AgentId>> rows_;
    std::optional<std::vector<AgentId>> default_;
};

class Mechanism {
public:
    using Fn = std::function<RandomAssignment(const Profile&)>;

    Mechanism(std::string name, Fn fn, bool strict_only)
        : name_(std::move(name)), fn_(std::move(fn)), strict_only_(strict_only) {}

    const std::string& name() const { return name_; }
    bool strict_only() const { return strict_only_; }
    bool accepts(Domain d) const { return d == Domain::Strict || !strict_only_; }

    /// Evaluates and checks the output: feasibility and IR.
    RandomAssignment operator()(const Profile& p) const {
        if (strict_only_ && !p.is_strict())
            throw DomainError("mechanism " + name_ + " requires strict preferences");
        auto r = fn_(p);
        if (r.n() != p.n() || r.m() != p.m()) throw InvariantError(name_ + ": output shape does not match profile");
        r.validate(p);
        for (std::size_t i = 0; i < p.n(); ++i)
            for (std::size_t o = 0; o < p.m(); ++o)
                if (r.at(i, o) > 0 && p.rank(i, o) == Profile::kUnacceptable && !allow_non_ir_)
                    throw InvariantError(name_ + " assigned an unacceptable object to agent " + p.agent(i).label);
        return r;
    }

    Mechanism named(std::string name) const {
        Mechanism m = *this;
        m.name_ = std::move(name);
        return m;
    }

    /// For deliberately broken test mechanisms only.
    Mechanism& allow_non_ir() {
        allow_non_ir_ = true;
        return *this;
    }

private:
    std::string name_;
    Fn fn_;
    bool strict_only_ = true;
    bool allow_non_ir_ = false;
};

namespace detail {

inline std::optional<std::size_t> best_available(const Profile& p, std::size_t i, const std::vector<int>& left) {
    for (const auto& cls : p.pref(i).classes()) {
        auto c = p.column(cls.front());
        if (left[c] > 0) return c;
    }
    return std::nullopt;
}

inline std::vector<int> quotas(const Profile& p) {
    std::vector<int> q(p.m());
    for (std::size_t o = 0; o < p.m(); ++o) q[o] = p.quota(o);
    return q;
}

inline DeterministicAssignment serial_pick(const Profile& p, const std::vector<std::size_t>& order) {
    DeterministicAssignment d{std::vector<std::size_t>(p.n(), p.m())};
    auto left = quotas(p);
    for (auto i : order)
        if (auto c = best_available(p, i, left)) {
            d.choice[i] = *c;
            --left[*c];
        }
    return d;
}

inline std::size_t factorial_cap() {
    if (const char* env = std::getenv("ALLOCX_FACTORIAL_CAP")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 7;
}

inline void check_factorial_cap(std::size_t n) {
    auto cap = factorial_cap();
    if (n > cap)
        throw DomainError("random priority over " + std::to_string(n) + " agents exceeds the factorial cap of " +
                          std::to_string(cap) + " (set ALLOCX_FACTORIAL_CAP to raise it)");
}

}  // namespace detail

inline Mechanism serial_dictatorship(std::vector<AgentId> order) {
    std::string name = "sd:";
    for (std::size_t k = 0; k < order.size(); ++k) name += (k ? "," : "") + order[k].label;
    return Mechanism(
        name,
        [order](const Profile& p) {
            if (order.size() != p.n()) throw PreconditionError("serial order must list every agent once");
            std::vector<std::size_t> idx;
            for (const auto& a : order) idx.push_back(p.agent_index(a));
            std::vector<std::size_t> sorted = idx;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw PreconditionError("serial order repeats an agent");
            return RandomAssignment::from(detail::serial_pick(p, idx), p);
        },
        true);
}

/// Uniform average of serial dictatorship over all n! orders, one order at a time.
inline RandomAssignment random_priority_direct(const Profile& p) {
    detail::check_factorial_cap(p.n());
    std::vector<std::size_t> order(p.n());
    std::iota(order.begin(), order.end(), 0);
    RandomAssignment sum(p.n(), p.m());
    for (std::size_t i = 0; i < p.n(); ++i) sum.at(i, p.m()) = 0;
    std::size_t count = 0;
    do {
        auto d = detail::serial_pick(p, order);
        for (std::size_t i = 0; i < p.n(); ++i) sum.at(i, d.choice[i]) += 1;
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    for (std::size_t i = 0; i < p.n(); ++i)
        for (std::size_t c = 0; c <= p.m(); ++c) sum.at(i, c) /= count;
    return sum;
}

namespace detail {

/// Random priority by recursion on (agents still to pick, remaining supply):
/// the next picker is uniform among the remaining agents.
class RpMemo {
public:
    explicit RpMemo(const Profile& p) : p_(p) {}

    RandomAssignment run() {
        auto r = solve((std::size_t{1} << p_.n()) - 1, quotas(p_));
        return r;
    }

private:
    RandomAssignment solve(std::size_t mask, const std::vector<int>& left) {
        auto key = std::make_pair(mask, left);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        RandomAssignment acc(p_.n(), p_.m());
        for (std::size_t i = 0; i < p_.n(); ++i) acc.at(i, p_.m()) = 0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < p_.n(); ++i) {
            if (!(mask >> i & 1)) continue;
            ++k;
            auto next = left;
            auto c = best_available(p_, i, left);
            if (c) --next[*c];
            auto sub = solve(mask & ~(std::size_t{1} << i), next);
            sub.at(i, p_.m()) = 0;
            sub.at(i, c ? *c : p_.m()) = 1;
            for (std::size_t j = 0; j < p_.n(); ++j)
                for (std::size_t col = 0; col <= p_.m(); ++col) acc.at(j, col) += sub.at(j, col);
        }
        if (k == 0) {
            acc = RandomAssignment(p_.n(), p_.m());
        } else {
            for (std::size_t j = 0; j < p_.n(); ++j)
                for (std::size_t col = 0; col <= p_.m(); ++col) acc.at(j, col) /= k;
        }
        // Agents outside the mask are filled in by the caller; keep their rows at the outside option.
        memo_.emplace(key, acc);
        return acc;
    }

    const Profile& p_;
    std::map<std::pair<std::size_t, std::vector<int>>, RandomAssignment> memo_;
};

}  // namespace detail

inline Mechanism random_priority() {
    return Mechanism(
        "rp",
        [](const Profile& p) {
            detail::check_factorial_cap(p.n());
            return detail::RpMemo(p).run();
        },
        true);
}

/// Simultaneous eating at unit speed; an object expires when its quota is
/// consumed. All events at the same instant are processed together.
inline RandomAssignment probabilistic_serial_assign(const Profile& p) {
    const std::size_t n = p.n(), m = p.m();
    RandomAssignment r(n, m);
    for (std::size_t i = 0; i < n; ++i) r.at(i, m) = 0;
    std::vector<Rational> supply(m), eaten(n);
    for (std::size_t o = 0; o < m; ++o) supply[o] = p.quota(o);
    std::vector<bool> active(n, true);
    for (;;) {
        std::vector<std::optional<std::size_t>> target(n);
        std::vector<int> eaters(m, 0);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (const auto& cls : p.pref(i).classes()) {
                auto c = p.column(cls.front());
                if (supply[c] > 0) {
                    target[i] = c;
                    break;
                }
            }
            if (!target[i]) {
                active[i] = false;
                continue;
            }
            ++eaters[*target[i]];
            any = true;
        }
        if (!any) break;
        std::optional<Rational> dt;
        auto consider = [&](const Rational& t) {
            if (!dt || t < *dt) dt = t;
        };
        for (std::size_t o = 0; o < m; ++o)
            if (eaters[o] > 0) consider(supply[o] / eaters[o]);
        for (std::size_t i = 0; i < n; ++i)
            if (target[i]) consider(1 - eaten[i]);
        for (std::size_t i = 0; i < n; ++i) {
            if (!target[i]) continue;
            r.at(i, *target[i]) += *dt;
            eaten[i] += *dt;
            if (eaten[i] == 1) active[i] = false;
        }
        for (std::size_t o = 0; o < m; ++o) supply[o] -= *dt * eaters[o];
    }
    for (std::size_t i = 0; i < n; ++i) r.at(i, m) = 1 - eaten[i];
    return r;
}

inline Mechanism probabilistic_serial() { return Mechanism("ps", probabilistic_serial_assign, true); }

namespace detail {

inline std::vector<std::size_t> strict_list(const Profile& p, std::size_t i) {
    std::vector<std::size_t> out;
    for (const auto& cls : p.pref(i).classes()) out.push_back(p.column(cls.front()));
    return out;
}

}  // namespace detail

/// Agent-proposing deferred acceptance; objects keep their quota-many best
/// applicants by priority.
inline DeterministicAssignment deferred_acceptance_assign(const Profile& p, const PriorityTable& pri) {
    const std::size_t n = p.n(), m = p.m();
    auto rank = pri.ranks(p);
    std::vector<std::vector<std::size_t>> lists(n);
    for (std::size_t i = 0; i < n; ++i) lists[i] = detail::strict_list(p, i);
    std::vector<std::size_t> next(n, 0);
    std::vector<std::vector<std::size_t>> held(m);
    std::vector<bool> free(n, true);
    for (;;) {
        bool proposed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!free[i] || next[i] >= lists[i].size()) continue;
            auto o = lists[i][next[i]++];
            held[o].push_back(i);
            free[i] = false;
            proposed = true;
        }
        if (!proposed) break;
        for (std::size_t o = 0; o < m; ++o) {
            auto& h = held[o];
            std::sort(h.begin(), h.end(), [&](auto a, auto b) { return rank[o][a] < rank[o][b]; });
            while (h.size() > static_cast<std::size_t>(p.quota(o))) {
                free[h.back()] = true;
                h.pop_back();
            }
        }
    }
    DeterministicAssignment d{std::vector<std::size_t>(n, m)};
    for (std::size_t o = 0; o < m; ++o)
        for (auto i : held[o]) d.choice[i] = o;
    return d;
}

/// Immediate acceptance: each round unassigned agents apply to their best
/// object that has not rejected them; objects with seats left admit by
/// priority, everyone else applying there is rejected for good.
inline DeterministicAssignment boston_assign(const Profile& p, const PriorityTable& pri) {
    const std::size_t n = p.n(), m = p.m();
    auto rank = pri.ranks(p);
    std::vector<std::vector<std::size_t>> lists(n);
    for (std::size_t i = 0; i < n; ++i) lists[i] = detail::strict_list(p, i);
    std::vector<std::size_t> next(n, 0);
    auto left = detail::quotas(p);
    DeterministicAssignment d{std::vector<std::size_t>(n, m)};
    std::vector<bool> done(n, false);
    for (;;) {
        std::vector<std::vector<std::size_t>> apps(m);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || next[i] >= lists[i].size()) continue;
            apps[lists[i][next[i]++]].push_back(i);
            any = true;
        }
        if (!any) break;
        for (std::size_t o = 0; o < m; ++o) {
            auto& a = apps[o];
            std::sort(a.begin(), a.end(), [&](auto x, auto y) { return rank[o][x] < rank[o][y]; });
            for (auto i : a)
                if (left[o] > 0) {
                    d.choice[i] = o;
                    done[i] = true;
                    --left[o];
                }
        }
    }
    return d;
}

/// Top trading cycles with quotas: an object keeps pointing at its
/// highest-priority remaining agent until its copies run out.
inline DeterministicAssignment ttc_assign(const Profile& p, const PriorityTable& pri) {
    const std::size_t n = p.n(), m = p.m();
    auto rank = pri.ranks(p);
    auto left = detail::quotas(p);
    DeterministicAssignment d{std::vector<std::size_t>(n, m)};
    std::vector<bool> in(n, true);
    for (;;) {
        std::vector<std::optional<std::size_t>> wants(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!in[i]) continue;
            wants[i] = detail::best_available(p, i, left);
            if (!wants[i]) in[i] = false;  // nothing acceptable left
        }
        std::vector<std::size_t> top(m, n);
        for (std::size_t o = 0; o < m; ++o) {
            if (left[o] == 0) continue;
            for (std::size_t i = 0; i < n; ++i)
                if (in[i] && (top[o] == n || rank[o][i] < rank[o][top[o]])) top[o] = i;
        }
        bool anyone = false;
        for (std::size_t i = 0; i < n; ++i) anyone = anyone || in[i];
        if (!anyone) break;
        // Agent graph: i -> top[wants[i]]. Every remaining agent has one out-edge.
        std::vector<int> state(n, 0);  // 0 unseen, 1 on stack, 2 done
        std::vector<bool> trade(n, false);
        for (std::size_t s = 0; s < n; ++s) {
            if (!in[s] || state[s]) continue;
            std::vector<std::size_t> path;
            std::size_t v = s;
            while (in[v] && state[v] == 0) {
                state[v] = 1;
                path.push_back(v);
                v = top[*wants[v]];
            }
            if (state[v] == 1) {
                auto it = std::find(path.begin(), path.end(), v);
                for (; it != path.end(); ++it) trade[*it] = true;
            }
            for (auto u : path) state[u] = 2;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!trade[i]) continue;
            d.choice[i] = *wants[i];
            --left[*wants[i]];
            in[i] = false;
        }
    }
    return d;
}

inline Mechanism deferred_acceptance(PriorityTable pri) {
    return Mechanism(
        "da", [pri](const Profile& p) { return RandomAssignment::from(deferred_acceptance_assign(p, pri), p); }, true);
}

inline Mechanism boston(PriorityTable pri) {
    return Mechanism(
        "boston", [pri](const Profile& p) { return RandomAssignment::from(boston_assign(p, pri), p); }, true);
}

inline Mechanism top_trading_cycles(PriorityTable pri) {
    return Mechanism(
        "ttc", [pri](const Profile& p) { return RandomAssignment::from(ttc_assign(p, pri), p); }, true);
}

inline Mechanism null_mechanism() {
    return Mechanism("null", [](const Profile& p) { return RandomAssignment::null(p); }, false);
}

/// Canonical profile key -> override allocation (with the profile it was
/// written against, so rows and columns can be matched by label).
class PatchTable {
public:
    void add(const Profile& profile, const RandomAssignment& alloc) {
        alloc.validate(profile);
        entries_[profile.canonical_key()] = {profile, alloc};
    }

    std::size_t size() const { return entries_.size(); }

    /// The override for p, re-indexed to p's agent and object order.
    std::optional<RandomAssignment> find(const Profile& p) const {
        auto it = entries_.find(p.canonical_key());
        if (it == entries_.end()) return std::nullopt;
        const auto& [src, alloc] = it->second;
        RandomAssignment r(p.n(), p.m());
        for (std::size_t i = 0; i < p.n(); ++i) {
            auto si = src.agent_index(p.agent(i));
            for (std::size_t c = 0; c <= p.m(); ++c) {
                auto sc = c == p.m() ? src.m() : src.column(p.object(c));
                r.at(i, c) = alloc.at(si, sc);
            }
        }
        return r;
    }

private:
    std::map<std::string, std::pair<Profile, RandomAssignment>> entries_;
};

inline Mechanism patched(Mechanism base, PatchTable patches, std::string name = {}) {
    if (name.empty()) name = "patched:" + base.name();
    bool strict = base.strict_only();
    auto table = std::make_shared<const PatchTable>(std::move(patches));
    return Mechanism(
        std::move(name),
        [base = std::move(base), table](const Profile& p) {
            if (auto r = table->find(p)) return *r;
            return base(p);
        },
        strict);
}

}  // namespace allocx
