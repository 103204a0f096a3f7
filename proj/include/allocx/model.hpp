#pragma once

// Agents, objects, weak-order preferences with an outside option, profiles,
// abstract allocation spaces, and the preference transforms used by the
// invariance properties.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "allocx/rational.hpp"

namespace allocx {

/// Thrown when an operation's precondition does not hold (e.g. truncating at
/// an object outside the far-better set).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a mechanism is asked to evaluate a profile outside its domain.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal invariant breach: always a bug, never a user error.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

inline constexpr std::string_view kOutsideLabel = "@";

namespace detail {
inline bool valid_label(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '\'' || c == '-' || c == '*' || c == '.';
        if (!ok) return false;
    }
    return true;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}
}  // namespace detail

struct AgentId {
    std::string label;

    AgentId() = default;
    explicit AgentId(std::string l) : label(std::move(l)) {
        if (!detail::valid_label(label)) throw ParseError("invalid agent label '" + label + "'");
    }
    friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

/// Object label; the reserved label "@" stands for the outside option.
struct ObjectId {
    std::string label;

    ObjectId() = default;
    explicit ObjectId(std::string l) : label(std::move(l)) {
        if (label != kOutsideLabel && !detail::valid_label(label))
            throw ParseError("invalid object label '" + label + "'");
    }
    static ObjectId outside() { return ObjectId(std::string(kOutsideLabel)); }
    bool is_outside() const { return label == kOutsideLabel; }
    friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

enum class Domain { Strict, Weak };

inline std::string to_string(Domain d) { return d == Domain::Strict ? "strict" : "weak"; }

/// Weak order over acceptable objects, best class first. Every listed object
/// is strictly above the outside option; unlisted objects are unacceptable and
/// form one tied class below it. Members of a class are kept sorted.
class Preference {
public:
    Preference() = default;

    explicit Preference(std::vector<std::vector<ObjectId>> classes) : classes_(std::move(classes)) {
        std::set<ObjectId> seen;
        for (auto& cls : classes_) {
            if (cls.empty()) throw ParseError("empty indifference class");
            for (const auto& o : cls) {
                if (o.is_outside()) throw ParseError("'@' cannot appear inside a class");
                if (!seen.insert(o).second) throw ParseError("object '" + o.label + "' listed twice");
            }
            std::sort(cls.begin(), cls.end());
        }
    }

    /// Strict order from a best-first list.
    static Preference strict(const std::vector<ObjectId>& order) {
        std::vector<std::vector<ObjectId>> classes;
        for (const auto& o : order) classes.push_back({o});
        return Preference(std::move(classes));
    }

    /// Parses `a ~ b > c > @`. A trailing `@` is optional; nothing may follow it.
    static Preference parse(std::string_view text) {
        std::vector<std::vector<ObjectId>> classes;
        std::string body = detail::trim(text);
        if (body.empty()) throw ParseError("empty preference");
        std::vector<std::string> parts;
        {
            std::string cur;
            for (char c : body) {
                if (c == '>') parts.push_back(detail::trim(cur)), cur.clear();
                else cur.push_back(c);
            }
            parts.push_back(detail::trim(cur));
        }
        bool closed = false;
        for (const auto& part : parts) {
            if (closed) throw ParseError("objects after '@' in '" + std::string(text) + "'");
            if (part.empty()) throw ParseError("empty class in '" + std::string(text) + "'");
            std::vector<ObjectId> cls;
            std::string cur;
            std::vector<std::string> members;
            for (char c : part) {
                if (c == '~') members.push_back(detail::trim(cur)), cur.clear();
                else cur.push_back(c);
            }
            members.push_back(detail::trim(cur));
            bool has_outside = false;
            for (const auto& mbr : members) {
                if (mbr.empty()) throw ParseError("empty member in '" + std::string(text) + "'");
                if (mbr == kOutsideLabel) has_outside = true;
                else cls.emplace_back(mbr);
            }
            if (has_outside) {
                if (!cls.empty())
                    throw ParseError("indifference with '@' is not representable in an object preference");
                closed = true;
                continue;
            }
            classes.push_back(std::move(cls));
        }
        return Preference(std::move(classes));
    }

    const std::vector<std::vector<ObjectId>>& classes() const { return classes_; }
    std::size_t class_count() const { return classes_.size(); }

    bool is_strict() const {
        return std::all_of(classes_.begin(), classes_.end(), [](const auto& c) { return c.size() == 1; });
    }

    std::optional<std::size_t> class_of(const ObjectId& o) const {
        for (std::size_t k = 0; k < classes_.size(); ++k)
            if (std::binary_search(classes_[k].begin(), classes_[k].end(), o)) return k;
        return std::nullopt;
    }

    bool acceptable(const ObjectId& o) const { return class_of(o).has_value(); }

    std::vector<ObjectId> acceptable_set() const {
        std::vector<ObjectId> out;
        for (const auto& c : classes_) out.insert(out.end(), c.begin(), c.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    std::string to_string() const {
        std::string s;
        for (const auto& cls : classes_) {
            for (std::size_t k = 0; k < cls.size(); ++k) {
                if (k) s += " ~ ";
                s += cls[k].label;
            }
            s += " > ";
        }
        return s + std::string(kOutsideLabel);
    }

    friend bool operator==(const Preference&, const Preference&) = default;
    friend auto operator<=>(const Preference& a, const Preference& b) {
        return a.to_string() <=> b.to_string();
    }

private:
    std::vector<std::vector<ObjectId>> classes_;
};

/// {y : y ≿ x} over declared objects and the outside option. For an
/// unacceptable x every alternative is returned (unacceptables are tied).
inline std::set<ObjectId> upper_contour(const Preference& pref, const ObjectId& x,
                                        const std::vector<ObjectId>& declared) {
    if (!x.is_outside() && std::find(declared.begin(), declared.end(), x) == declared.end())
        throw PreconditionError("unknown object '" + x.label + "'");
    std::set<ObjectId> out;
    if (auto k = pref.class_of(x)) {
        for (std::size_t c = 0; c <= *k; ++c) out.insert(pref.classes()[c].begin(), pref.classes()[c].end());
        return out;
    }
    for (const auto& cls : pref.classes()) out.insert(cls.begin(), cls.end());
    out.insert(ObjectId::outside());
    if (!x.is_outside()) out.insert(declared.begin(), declared.end());
    return out;
}

/// Acceptable objects strictly above some other acceptable object, i.e. all
/// acceptable classes except the bottom one.
inline std::vector<ObjectId> far_better_set(const Preference& pref) {
    std::vector<ObjectId> out;
    const auto& cls = pref.classes();
    for (std::size_t k = 0; k + 1 < cls.size(); ++k) out.insert(out.end(), cls[k].begin(), cls[k].end());
    std::sort(out.begin(), out.end());
    return out;
}

inline bool in_far_better_set(const Preference& pref, const ObjectId& o) {
    auto k = pref.class_of(o);
    return k && *k + 1 < pref.class_count();
}

inline Preference truncate(const Preference& pref, const ObjectId& o) {
    if (!in_far_better_set(pref, o))
        throw PreconditionError("truncation at '" + o.label + "' is undefined for " + pref.to_string());
    auto k = *pref.class_of(o);
    std::vector<std::vector<ObjectId>> classes(pref.classes().begin(), pref.classes().begin() + k + 1);
    return Preference(std::move(classes));
}

namespace detail {
/// Ordered set partitions of `items`, first block chosen by ascending bitmask.
inline void ordered_partitions(const std::vector<ObjectId>& items, std::vector<std::vector<ObjectId>>& prefix,
                               std::vector<Preference>& out) {
    if (items.empty()) {
        out.emplace_back(prefix);
        return;
    }
    const std::size_t n = items.size();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<ObjectId> block, rest;
        for (std::size_t k = 0; k < n; ++k) ((mask >> k) & 1u ? block : rest).push_back(items[k]);
        prefix.push_back(std::move(block));
        ordered_partitions(rest, prefix, out);
        prefix.pop_back();
    }
}

inline void permutations_of_subsets(const std::vector<ObjectId>& items, std::size_t len,
                                    std::vector<ObjectId>& prefix, std::vector<bool>& used,
                                    std::vector<Preference>& out) {
    if (prefix.size() == len) {
        out.push_back(Preference::strict(prefix));
        return;
    }
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (used[k]) continue;
        used[k] = true;
        prefix.push_back(items[k]);
        permutations_of_subsets(items, len, prefix, used, out);
        prefix.pop_back();
        used[k] = false;
    }
}
}  // namespace detail

/// Every weak order over exactly the objects in `items` (all acceptable).
inline std::vector<Preference> weak_orders_over(std::vector<ObjectId> items) {
    std::sort(items.begin(), items.end());
    std::vector<Preference> out;
    std::vector<std::vector<ObjectId>> prefix;
    detail::ordered_partitions(items, prefix, out);
    return out;
}

/// Every domain-admissible preference whose acceptable set equals the upper
/// contour of `o` and in which `o` stays in the bottom class, so that
/// everything weakly above `o` remains weakly above it. The truncation always
/// comes first.
inline std::vector<Preference> contractions(const Preference& pref, const ObjectId& o, Domain domain) {
    Preference head = truncate(pref, o);
    std::vector<Preference> out{head};
    auto items = head.acceptable_set();
    std::vector<Preference> all;
    if (domain == Domain::Strict) {
        std::vector<ObjectId> prefix;
        std::vector<bool> used(items.size(), false);
        detail::permutations_of_subsets(items, items.size(), prefix, used, all);
    } else {
        all = weak_orders_over(items);
    }
    for (auto& p : all)
        if (p != head && *p.class_of(o) + 1 == p.class_count()) out.push_back(std::move(p));
    return out;
}

/// Contraction in the welfare-size sense: the acceptable set becomes the
/// strict upper contour of `o`.
inline Preference contract_above(const Preference& pref, const ObjectId& o) {
    auto k = pref.class_of(o);
    if (!k) throw PreconditionError("'" + o.label + "' is not acceptable in " + pref.to_string());
    std::vector<std::vector<ObjectId>> classes(pref.classes().begin(), pref.classes().begin() + *k);
    return Preference(std::move(classes));
}

/// Every preference in the domain over the declared objects, in canonical
/// order: by number of acceptable objects, then lexicographically.
inline std::vector<Preference> enumerate_preferences(const std::vector<ObjectId>& objects, Domain domain) {
    std::vector<ObjectId> items = objects;
    std::sort(items.begin(), items.end());
    std::vector<Preference> out;
    if (domain == Domain::Strict) {
        for (std::size_t len = 0; len <= items.size(); ++len) {
            std::vector<ObjectId> prefix;
            std::vector<bool> used(items.size(), false);
            detail::permutations_of_subsets(items, len, prefix, used, out);
        }
        return out;
    }
    const std::size_t n = items.size();
    for (std::size_t size = 0; size <= n; ++size) {
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
            std::vector<ObjectId> subset;
            for (std::size_t k = 0; k < n; ++k)
                if ((mask >> k) & 1u) subset.push_back(items[k]);
            auto orders = weak_orders_over(subset);
            out.insert(out.end(), orders.begin(), orders.end());
        }
    }
    return out;
}

struct ObjectSpec {
    ObjectId id;
    int quota = 1;
    friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

/// Agents, objects with quotas, and one preference per agent. Row order of
/// every assignment matrix follows `agents()`, column order follows
/// `objects()` with the outside option last.
class Profile {
public:
    Profile() = default;

    Profile(std::vector<AgentId> agents, std::vector<ObjectSpec> objects, std::vector<Preference> prefs)
        : agents_(std::move(agents)), objects_(std::move(objects)), prefs_(std::move(prefs)) {
        if (agents_.empty()) throw ParseError("profile has no agents");
        if (prefs_.size() != agents_.size()) throw ParseError("one preference per agent is required");
        std::set<AgentId> as(agents_.begin(), agents_.end());
        if (as.size() != agents_.size()) throw ParseError("duplicate agent label");
        std::set<ObjectId> os;
        for (const auto& o : objects_) {
            if (o.id.is_outside()) throw ParseError("'@' is reserved for the outside option");
            if (o.quota < 1) throw ParseError("quota of '" + o.id.label + "' must be at least 1");
            if (!os.insert(o.id).second) throw ParseError("duplicate object '" + o.id.label + "'");
        }
        for (std::size_t i = 0; i < prefs_.size(); ++i)
            for (const auto& o : prefs_[i].acceptable_set())
                if (!os.count(o))
                    throw ParseError("agent " + agents_[i].label + " ranks undeclared object '" + o.label + "'");
        build_ranks();
    }

    std::size_t n() const { return agents_.size(); }
    std::size_t m() const { return objects_.size(); }
    const std::vector<AgentId>& agents() const { return agents_; }
    const std::vector<ObjectSpec>& objects() const { return objects_; }
    const std::vector<Preference>& prefs() const { return prefs_; }
    const Preference& pref(std::size_t i) const { return prefs_.at(i); }
    const AgentId& agent(std::size_t i) const { return agents_.at(i); }
    const ObjectId& object(std::size_t o) const { return objects_.at(o).id; }
    int quota(std::size_t o) const { return objects_.at(o).quota; }

    std::vector<ObjectId> object_ids() const {
        std::vector<ObjectId> out;
        for (const auto& o : objects_) out.push_back(o.id);
        return out;
    }

    std::size_t agent_index(const AgentId& a) const {
        for (std::size_t i = 0; i < agents_.size(); ++i)
            if (agents_[i] == a) return i;
        throw PreconditionError("unknown agent '" + a.label + "'");
    }
    std::size_t agent_index(std::string_view label) const { return agent_index(AgentId(std::string(label))); }

    /// Column index of an object; the outside option maps to m().
    std::size_t column(const ObjectId& o) const {
        if (o.is_outside()) return m();
        for (std::size_t k = 0; k < objects_.size(); ++k)
            if (objects_[k].id == o) return k;
        throw PreconditionError("unknown object '" + o.label + "'");
    }
    std::size_t column(std::string_view label) const { return column(ObjectId(std::string(label))); }

    /// rank(i, o): class index of object column o for agent i (0 = best), or
    /// kUnacceptable. The outside option column has rank class_count().
    static constexpr int kUnacceptable = 1 << 20;
    int rank(std::size_t i, std::size_t col) const { return ranks_[i * (m() + 1) + col]; }

    bool is_strict() const {
        return std::all_of(prefs_.begin(), prefs_.end(), [](const auto& p) { return p.is_strict(); });
    }

    Profile with_pref(std::size_t i, Preference p) const {
        auto prefs = prefs_;
        prefs.at(i) = std::move(p);
        return Profile(agents_, objects_, std::move(prefs));
    }

    /// Agents and objects sorted by label; identifies a profile regardless of
    /// declaration order.
    std::string canonical_key() const {
        std::vector<std::size_t> order(n());
        for (std::size_t i = 0; i < n(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return agents_[a] < agents_[b]; });
        auto objs = objects_;
        std::sort(objs.begin(), objs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        std::string key = "objects:";
        for (const auto& o : objs) key += o.id.label + ":" + std::to_string(o.quota) + " ";
        for (auto i : order) key += "|" + agents_[i].label + ":" + prefs_[i].to_string();
        return key;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "agents:";
        for (const auto& a : agents_) os << ' ' << a.label;
        os << "\nobjects:";
        for (const auto& o : objects_) os << ' ' << o.id.label << ':' << o.quota;
        os << '\n';
        for (std::size_t i = 0; i < n(); ++i) os << "pref " << agents_[i].label << ": " << prefs_[i].to_string() << '\n';
        return os.str();
    }

    friend bool operator==(const Profile& a, const Profile& b) {
        return a.agents_ == b.agents_ && a.objects_ == b.objects_ && a.prefs_ == b.prefs_;
    }

private:
    void build_ranks() {
        ranks_.assign(n() * (m() + 1), kUnacceptable);
        for (std::size_t i = 0; i < n(); ++i) {
            const auto& cls = prefs_[i].classes();
            for (std::size_t k = 0; k < cls.size(); ++k)
                for (const auto& o : cls[k]) ranks_[i * (m() + 1) + column(o)] = static_cast<int>(k);
            ranks_[i * (m() + 1) + m()] = static_cast<int>(cls.size());
        }
    }

    std::vector<AgentId> agents_;
    std::vector<ObjectSpec> objects_;
    std::vector<Preference> prefs_;
    std::vector<int> ranks_;
};

/// Abstract allocation model: labelled allocations with participant sets and
/// per-agent weak orders over participating allocations and the outside
/// option. Non-participating allocations sit in the outside option's class.
class AllocationSpace {
public:
    AllocationSpace() = default;

    /// `orders[i]` lists classes best-first over allocation labels plus "@".
    AllocationSpace(std::vector<AgentId> agents, std::vector<std::string> allocations,
                    std::vector<std::set<AgentId>> participants, std::vector<std::vector<std::vector<std::string>>> orders)
        : agents_(std::move(agents)), allocations_(std::move(allocations)), participants_(std::move(participants)) {
        if (agents_.empty()) throw ParseError("space has no agents");
        if (allocations_.empty()) throw ParseError("space has no allocations");
        if (participants_.size() != allocations_.size()) throw ParseError("participants per allocation required");
        if (orders.size() != agents_.size()) throw ParseError("one order per agent is required");
        std::set<std::string> labels(allocations_.begin(), allocations_.end());
        if (labels.size() != allocations_.size()) throw ParseError("duplicate allocation label");
        if (labels.count(std::string(kOutsideLabel))) throw ParseError("'@' is reserved");
        bool has_null = false;
        for (const auto& ps : participants_) {
            has_null = has_null || ps.empty();
            for (const auto& a : ps)
                if (std::find(agents_.begin(), agents_.end(), a) == agents_.end())
                    throw ParseError("unknown participant '" + a.label + "'");
        }
        if (!has_null) throw ParseError("some allocation must have no participants");

        const std::size_t A = allocations_.size();
        ranks_.assign(agents_.size(), std::vector<int>(A, -1));
        outside_rank_.assign(agents_.size(), -1);
        class_count_.assign(agents_.size(), 0);
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const auto& ord = orders[i];
            for (std::size_t k = 0; k < ord.size(); ++k) {
                if (ord[k].empty()) throw ParseError("empty class");
                for (const auto& lbl : ord[k]) {
                    if (lbl == kOutsideLabel) {
                        if (outside_rank_[i] >= 0) throw ParseError("'@' listed twice");
                        outside_rank_[i] = static_cast<int>(k);
                        continue;
                    }
                    auto a = allocation_index(lbl);
                    if (ranks_[i][a] >= 0) throw ParseError("allocation '" + lbl + "' listed twice");
                    ranks_[i][a] = static_cast<int>(k);
                }
            }
            if (outside_rank_[i] < 0) throw ParseError("order of agent " + agents_[i].label + " lacks '@'");
            for (std::size_t a = 0; a < A; ++a) {
                bool part = participates(i, a);
                if (!part && ranks_[i][a] >= 0 && ranks_[i][a] != outside_rank_[i])
                    throw ParseError("agent " + agents_[i].label + " does not participate in '" + allocations_[a] +
                                     "' so it must be tied with '@'");
                if (part && ranks_[i][a] < 0)
                    throw ParseError("order of agent " + agents_[i].label + " omits '" + allocations_[a] + "'");
                if (!part) ranks_[i][a] = outside_rank_[i];
            }
            class_count_[i] = static_cast<int>(ord.size());
        }
    }

    std::size_t n() const { return agents_.size(); }
    std::size_t size() const { return allocations_.size(); }
    const std::vector<AgentId>& agents() const { return agents_; }
    const std::vector<std::string>& allocations() const { return allocations_; }
    const std::string& allocation(std::size_t a) const { return allocations_.at(a); }

    std::size_t allocation_index(std::string_view label) const {
        for (std::size_t a = 0; a < allocations_.size(); ++a)
            if (allocations_[a] == label) return a;
        throw PreconditionError("unknown allocation '" + std::string(label) + "'");
    }
    std::size_t agent_index(std::string_view label) const {
        for (std::size_t i = 0; i < agents_.size(); ++i)
            if (agents_[i].label == label) return i;
        throw PreconditionError("unknown agent '" + std::string(label) + "'");
    }

    bool participates(std::size_t i, std::size_t a) const { return participants_.at(a).count(agents_.at(i)) > 0; }
    const std::set<AgentId>& participants(std::size_t a) const { return participants_.at(a); }

    /// Class index of allocation a for agent i (0 = best).
    int rank(std::size_t i, std::size_t a) const { return ranks_[i][a]; }
    int outside_rank(std::size_t i) const { return outside_rank_[i]; }
    int class_count(std::size_t i) const { return class_count_[i]; }

    std::string to_text() const {
        std::ostringstream os;
        os << "agents:";
        for (const auto& a : agents_) os << ' ' << a.label;
        os << '\n';
        for (std::size_t a = 0; a < size(); ++a) {
            os << "alloc " << allocations_[a] << ": participants";
            for (const auto& p : participants_[a]) os << ' ' << p.label;
            os << '\n';
        }
        for (std::size_t i = 0; i < n(); ++i) {
            os << "apref " << agents_[i].label << ": ";
            for (int k = 0; k < class_count_[i]; ++k) {
                if (k) os << " > ";
                bool first = true;
                for (std::size_t a = 0; a < size(); ++a) {
                    if (ranks_[i][a] != k || !participates(i, a)) continue;
                    os << (first ? "" : " ~ ") << allocations_[a];
                    first = false;
                }
                if (k == outside_rank_[i]) os << (first ? "" : " ~ ") << kOutsideLabel;
            }
            os << '\n';
        }
        return os.str();
    }

private:
    std::vector<AgentId> agents_;
    std::vector<std::string> allocations_;
    std::vector<std::set<AgentId>> participants_;
    std::vector<std::vector<int>> ranks_;
    std::vector<int> outside_rank_;
    std::vector<int> class_count_;
};

/// Exhaustive profile universe over a fixed market: agents "1".."n", the
/// given objects, every agent ranging over the whole preference domain.
/// Profiles are addressed by a mixed-radix index (agent 1 most significant),
/// which makes ranges splittable and unilateral deviations cheap.
struct UniverseSpec {
    std::size_t agents = 1;
    std::vector<ObjectSpec> objects;
    Domain domain = Domain::Strict;
    std::optional<std::size_t> cap;

    /// Objects a, b, c, ... with a common quota.
    static UniverseSpec make(std::size_t n, std::size_t m, Domain d, int quota = 1) {
        if (n < 1) throw PreconditionError("universe needs at least one agent");
        if (m > 26) throw PreconditionError("at most 26 objects");
        UniverseSpec u;
        u.agents = n;
        u.domain = d;
        for (std::size_t k = 0; k < m; ++k) u.objects.push_back({ObjectId(std::string(1, char('a' + k))), quota});
        return u;
    }

    std::string to_string() const {
        std::string s = "n=" + std::to_string(agents) + ",m=" + std::to_string(objects.size());
        bool uniform = true;
        for (const auto& o : objects) uniform = uniform && o.quota == (objects.empty() ? 1 : objects[0].quota);
        if (!objects.empty() && uniform && objects[0].quota != 1) s += ",q=" + std::to_string(objects[0].quota);
        s += "," + allocx::to_string(domain);
        if (cap) s += ",cap=" + std::to_string(*cap);
        return s;
    }
};

class ProfileUniverse {
public:
    explicit ProfileUniverse(UniverseSpec spec) : spec_(std::move(spec)) {
        if (spec_.agents < 1) throw PreconditionError("universe needs at least one agent");
        for (std::size_t i = 0; i < spec_.agents; ++i) agents_.emplace_back(std::to_string(i + 1));
        std::vector<ObjectId> ids;
        for (const auto& o : spec_.objects) ids.push_back(o.id);
        prefs_ = enumerate_preferences(ids, spec_.domain);
        for (std::size_t k = 0; k < prefs_.size(); ++k) pref_index_.emplace(prefs_[k].to_string(), k);
        total_ = 1;
        for (std::size_t i = 0; i < spec_.agents; ++i) {
            if (total_ > (std::size_t{1} << 40) / prefs_.size()) throw PreconditionError("universe too large");
            total_ *= prefs_.size();
        }
    }

    const UniverseSpec& spec() const { return spec_; }
    const std::vector<Preference>& preferences() const { return prefs_; }
    /// Number of profiles in the full domain.
    std::size_t total() const { return total_; }
    /// Number of profiles actually enumerated (after the cap).
    std::size_t size() const { return spec_.cap ? std::min(*spec_.cap, total_) : total_; }
    bool truncated() const { return size() < total_; }

    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> d(spec_.agents);
        for (std::size_t i = spec_.agents; i-- > 0;) {
            d[i] = index % prefs_.size();
            index /= prefs_.size();
        }
        return d;
    }

    std::size_t index_of(const std::vector<std::size_t>& digits) const {
        std::size_t idx = 0;
        for (auto d : digits) idx = idx * prefs_.size() + d;
        return idx;
    }

    std::optional<std::size_t> pref_index(const Preference& p) const {
        auto it = pref_index_.find(p.to_string());
        if (it == pref_index_.end()) return std::nullopt;
        return it->second;
    }

    Profile at(std::size_t index) const {
        if (index >= total_) throw PreconditionError("profile index out of range");
        auto d = digits(index);
        std::vector<Preference> prefs;
        for (auto k : d) prefs.push_back(prefs_[k]);
        return Profile(agents_, spec_.objects, std::move(prefs));
    }

    /// Index of a profile over this universe's market, if it belongs to it.
    std::optional<std::size_t> index_of(const Profile& p) const {
        if (p.agents() != agents_ || p.objects() != spec_.objects) return std::nullopt;
        std::vector<std::size_t> d;
        for (const auto& pref : p.prefs()) {
            auto k = pref_index(pref);
            if (!k) return std::nullopt;
            d.push_back(*k);
        }
        return index_of(d);
    }

private:
    UniverseSpec spec_;
    std::vector<AgentId> agents_;
    std::vector<Preference> prefs_;
    std::map<std::string, std::size_t> pref_index_;
    std::size_t total_ = 0;
};

/// Materialises the enumerated (possibly capped) part of a universe.
struct ProfileEnumeration {
    std::vector<Profile> profiles;
    std::size_t total = 0;
    bool truncated = false;

    std::string notice() const {
        if (!truncated) return {};
        return "enumeration capped at " + std::to_string(profiles.size()) + " of " + std::to_string(total) +
               " profiles";
    }
};

inline ProfileEnumeration enumerate_profiles(const UniverseSpec& spec) {
    ProfileUniverse u(spec);
    ProfileEnumeration out;
    out.total = u.total();
    out.truncated = u.truncated();
    out.profiles.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out.profiles.push_back(u.at(k));
    return out;
}

}  // namespace allocx
