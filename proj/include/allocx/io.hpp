#pragma once

// Text formats: profiles, abstract spaces, allocations, lotteries, priority
// tables, patch files; mechanism and universe spec strings.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "allocx/allocation.hpp"
#include "allocx/mechanisms.hpp"
#include "allocx/model.hpp"
#include "allocx/rational.hpp"

namespace allocx::io {

namespace detail {

struct Line {
    std::size_t number;
    std::string key;   // text before the first ':'
    std::string body;  // text after it, trimmed
};

/// Non-blank, non-comment lines split at the first colon.
inline std::vector<Line> lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t n = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++n;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        auto t = allocx::detail::trim(raw);
        if (t.empty()) continue;
        if (t == "---") {
            out.push_back({n, "---", ""});
            continue;
        }
        auto c = t.find(':');
        if (c == std::string::npos) throw ParseError("line " + std::to_string(n) + ": expected 'key: value'");
        out.push_back({n, allocx::detail::trim(t.substr(0, c)), allocx::detail::trim(t.substr(c + 1))});
    }
    return out;
}

inline std::string err(const Line& l, const std::string& what) {
    return "line " + std::to_string(l.number) + ": " + what;
}

/// `pref 1` -> ("pref", "1")
inline std::pair<std::string, std::string> head(const Line& l) {
    auto w = allocx::detail::split_ws(l.key);
    if (w.size() == 1) return {w[0], ""};
    if (w.size() == 2) return {w[0], w[1]};
    throw ParseError(err(l, "malformed key '" + l.key + "'"));
}

inline Profile profile_from(const std::vector<Line>& ls) {
    std::vector<AgentId> agents;
    std::vector<ObjectSpec> objects;
    std::map<std::string, Preference> prefs;
    bool have_agents = false, have_objects = false;
    for (const auto& l : ls) {
        auto [k, arg] = head(l);
        if (k == "agents") {
            if (have_agents) throw ParseError(err(l, "duplicate agents line"));
            have_agents = true;
            for (const auto& a : allocx::detail::split_ws(l.body)) agents.emplace_back(a);
        } else if (k == "objects") {
            if (have_objects) throw ParseError(err(l, "duplicate objects line"));
            have_objects = true;
            for (const auto& tok : allocx::detail::split_ws(l.body)) {
                auto c = tok.find(':');
                ObjectSpec o{ObjectId(tok.substr(0, c)), 1};
                if (c != std::string::npos) {
                    auto q = parse_rational(tok.substr(c + 1));
                    if (denominator(q) != 1 || q < 1) throw ParseError(err(l, "quota must be a positive integer"));
                    o.quota = numerator(q).convert_to<int>();
                }
                objects.push_back(std::move(o));
            }
        } else if (k == "pref") {
            if (arg.empty()) throw ParseError(err(l, "pref needs an agent label"));
            if (!prefs.emplace(arg, Preference::parse(l.body)).second)
                throw ParseError(err(l, "second preference for agent " + arg));
        } else if (k == "alloc" || k == "point") {
            continue;  // allocation lines may share the file
        } else {
            throw ParseError(err(l, "unknown key '" + k + "'"));
        }
    }
    if (!have_agents) throw ParseError("missing 'agents:' line");
    std::vector<Preference> ordered;
    for (const auto& a : agents) {
        auto it = prefs.find(a.label);
        if (it == prefs.end()) throw ParseError("no preference for agent " + a.label);
        ordered.push_back(it->second);
        prefs.erase(it);
    }
    if (!prefs.empty()) throw ParseError("preference for undeclared agent " + prefs.begin()->first);
    return Profile(std::move(agents), std::move(objects), std::move(ordered));
}

inline RandomAssignment assignment_from(const std::vector<Line>& ls, const Profile& profile) {
    RandomAssignment r(profile.n(), profile.m());
    std::vector<bool> seen(profile.n(), false);
    bool any = false;
    for (const auto& l : ls) {
        auto [k, arg] = head(l);
        if (k != "alloc") continue;
        any = true;
        std::size_t i;
        try {
            i = profile.agent_index(arg);
        } catch (const PreconditionError& e) {
            throw ParseError(err(l, e.what()));
        }
        if (seen[i]) throw ParseError(err(l, "second row for agent " + arg));
        seen[i] = true;
        r.at(i, profile.m()) = 0;
        for (const auto& tok : allocx::detail::split_ws(l.body)) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw ParseError(err(l, "expected object=share, got '" + tok + "'"));
            std::size_t c;
            try {
                c = profile.column(tok.substr(0, eq));
            } catch (const PreconditionError& e) {
                throw ParseError(err(l, e.what()));
            }
            r.at(i, c) += parse_rational(tok.substr(eq + 1));
        }
    }
    if (!any) throw ParseError("no 'alloc' lines");
    if (auto v = r.violation(profile)) throw ParseError("allocation is not feasible: " + *v);
    return r;
}

}  // namespace detail

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Profile parse_profile(std::string_view text) { return detail::profile_from(detail::lines(text)); }

/// `alloc 1: a=1/2 @=1/2`; unlisted entries are zero, rows must sum to one.
inline RandomAssignment parse_assignment(std::string_view text, const Profile& profile) {
    return detail::assignment_from(detail::lines(text), profile);
}

/// `point 1/2: 1=a 2=b`; unlisted agents hold the outside option.
inline Lottery parse_lottery(std::string_view text, const Profile& profile) {
    Lottery out;
    Rational total = 0;
    for (const auto& l : detail::lines(text)) {
        auto [k, arg] = detail::head(l);
        if (k != "point") continue;
        Rational w = parse_rational(arg);
        if (w <= 0) throw ParseError(detail::err(l, "weights must be positive"));
        DeterministicAssignment d{std::vector<std::size_t>(profile.n(), profile.m())};
        for (const auto& tok : allocx::detail::split_ws(l.body)) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw ParseError(detail::err(l, "expected agent=object"));
            try {
                d.choice[profile.agent_index(tok.substr(0, eq))] = profile.column(tok.substr(eq + 1));
            } catch (const PreconditionError& e) {
                throw ParseError(detail::err(l, e.what()));
            }
        }
        total += w;
        out.points.emplace_back(w, std::move(d));
    }
    if (total != 1) throw ParseError("lottery weights sum to " + to_string(total));
    return out;
}

/// `agents:`, `alloc a: participants 1 2`, `apref 1: b > c > a ~ @`.
inline AllocationSpace parse_space(std::string_view text) {
    std::vector<AgentId> agents;
    std::vector<std::string> allocs;
    std::vector<std::set<AgentId>> parts;
    std::map<std::string, std::vector<std::vector<std::string>>> orders;
    for (const auto& l : detail::lines(text)) {
        auto [k, arg] = detail::head(l);
        if (k == "agents") {
            for (const auto& a : allocx::detail::split_ws(l.body)) agents.emplace_back(a);
        } else if (k == "alloc") {
            auto w = allocx::detail::split_ws(l.body);
            if (w.empty() || w[0] != "participants") throw ParseError(detail::err(l, "expected 'participants ...'"));
            allocs.push_back(arg);
            std::set<AgentId> ps;
            for (std::size_t j = 1; j < w.size(); ++j) ps.emplace(w[j]);
            parts.push_back(std::move(ps));
        } else if (k == "apref") {
            std::vector<std::vector<std::string>> classes;
            std::string body = l.body;
            std::size_t start = 0;
            while (true) {
                auto gt = body.find('>', start);
                auto part = body.substr(start, gt == std::string::npos ? std::string::npos : gt - start);
                std::vector<std::string> cls;
                std::size_t s2 = 0;
                while (true) {
                    auto tl = part.find('~', s2);
                    auto mbr = allocx::detail::trim(part.substr(s2, tl == std::string::npos ? std::string::npos : tl - s2));
                    if (mbr.empty()) throw ParseError(detail::err(l, "empty member"));
                    cls.push_back(mbr);
                    if (tl == std::string::npos) break;
                    s2 = tl + 1;
                }
                classes.push_back(std::move(cls));
                if (gt == std::string::npos) break;
                start = gt + 1;
            }
            if (!orders.emplace(arg, std::move(classes)).second)
                throw ParseError(detail::err(l, "second order for agent " + arg));
        } else if (k != "point") {
            throw ParseError(detail::err(l, "unknown key '" + k + "'"));
        }
    }
    std::vector<std::vector<std::vector<std::string>>> ordered;
    for (const auto& a : agents) {
        auto it = orders.find(a.label);
        if (it == orders.end()) throw ParseError("no order for agent " + a.label);
        ordered.push_back(it->second);
    }
    if (orders.size() != agents.size()) throw ParseError("order for an undeclared agent");
    try {
        return AllocationSpace(std::move(agents), std::move(allocs), std::move(parts), std::move(ordered));
    } catch (const PreconditionError& e) {
        throw ParseError(e.what());
    }
}

/// `point 1/2: b` lines over a space.
inline AbstractLottery parse_abstract_lottery(std::string_view text, const AllocationSpace& space) {
    AbstractLottery l{std::vector<Rational>(space.size())};
    bool any = false;
    for (const auto& line : detail::lines(text)) {
        auto [k, arg] = detail::head(line);
        if (k != "point") continue;
        any = true;
        Rational w = parse_rational(arg);
        if (w <= 0) throw ParseError(detail::err(line, "weights must be positive"));
        try {
            l.weights[space.allocation_index(line.body)] += w;
        } catch (const PreconditionError& e) {
            throw ParseError(detail::err(line, e.what()));
        }
    }
    if (!any) throw ParseError("no 'point' lines");
    Rational total = 0;
    for (const auto& w : l.weights) total += w;
    if (total != 1) throw ParseError("lottery weights sum to " + to_string(total));
    return l;
}

/// True when the text describes an abstract allocation space.
inline bool is_space_text(std::string_view text) {
    for (const auto& l : detail::lines(text))
        if (detail::head(l).first == "apref") return true;
    return false;
}

/// `priority a: 1 2 3`; `priority *: ...` sets the ranking for unlisted objects.
inline PriorityTable parse_priorities(std::string_view text) {
    PriorityTable t;
    bool any = false;
    for (const auto& l : detail::lines(text)) {
        auto [k, arg] = detail::head(l);
        if (k != "priority") throw ParseError(detail::err(l, "expected 'priority <object>: agents...'"));
        std::vector<AgentId> ranking;
        for (const auto& a : allocx::detail::split_ws(l.body)) ranking.emplace_back(a);
        if (arg == "*") t.set_default(std::move(ranking));
        else t.set(ObjectId(arg), std::move(ranking));
        any = true;
    }
    if (!any) throw ParseError("empty priority file");
    return t;
}

/// Sections separated by `---`, each a profile plus its override rows.
inline PatchTable parse_patches(std::string_view text) {
    PatchTable table;
    std::vector<detail::Line> section;
    auto flush = [&] {
        if (section.empty()) return;
        auto p = detail::profile_from(section);
        table.add(p, detail::assignment_from(section, p));
        section.clear();
    };
    for (auto& l : detail::lines(text)) {
        if (l.key == "---") flush();
        else section.push_back(std::move(l));
    }
    flush();
    if (table.size() == 0) throw ParseError("patch file has no sections");
    return table;
}

/// `n=3,m=3,strict` with optional `q=2` and `cap=100`.
inline UniverseSpec parse_universe(std::string_view text) {
    std::optional<std::size_t> n, m, cap;
    int q = 1;
    Domain d = Domain::Strict;
    std::string s(text);
    std::stringstream ss(s);
    auto number = [&](const std::string& v) -> std::size_t {
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad number '" + v + "' in universe '" + s + "'");
        return std::stoul(v);
    };
    for (std::string tok; std::getline(ss, tok, ',');) {
        tok = allocx::detail::trim(tok);
        if (tok == "strict") d = Domain::Strict;
        else if (tok == "weak") d = Domain::Weak;
        else if (tok.rfind("n=", 0) == 0) n = number(tok.substr(2));
        else if (tok.rfind("m=", 0) == 0) m = number(tok.substr(2));
        else if (tok.rfind("q=", 0) == 0) q = static_cast<int>(number(tok.substr(2)));
        else if (tok.rfind("cap=", 0) == 0) cap = number(tok.substr(4));
        else throw ParseError("unknown universe field '" + tok + "'");
    }
    if (!n || !m) throw ParseError("universe needs n= and m=");
    if (*n < 1 || q < 1) throw ParseError("universe needs n >= 1 and q >= 1");
    auto spec = UniverseSpec::make(*n, *m, d, q);
    spec.cap = cap;
    return spec;
}

inline std::vector<AgentId> agent_list(std::string_view csv) {
    std::vector<AgentId> out;
    std::stringstream ss{std::string(csv)};
    for (std::string tok; std::getline(ss, tok, ',');) {
        tok = allocx::detail::trim(tok);
        if (tok.empty()) throw ParseError("empty agent in '" + std::string(csv) + "'");
        out.emplace_back(tok);
    }
    if (out.empty()) throw ParseError("empty agent list");
    return out;
}

/// `sd:4,1,2,3`, `rp`, `ps`, `da:FILE`, `boston:FILE` (or `bm:`), `ttc:FILE`, `null`,
/// `patched:base=ps,FILE`. The priority argument may also be
/// `common=1,2,3` (same ranking for every object). Relative paths resolve
/// against `dir`.
inline Mechanism parse_mechanism(std::string_view spec, const std::filesystem::path& dir = {}) {
    std::string s(spec);
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto resolve = [&](const std::string& f) {
        std::filesystem::path p(f);
        return p.is_relative() && !dir.empty() ? dir / p : p;
    };
    auto priorities = [&]() {
        if (arg.empty()) throw ParseError("mechanism '" + s + "' needs a priority file or common=...");
        if (arg.rfind("common=", 0) == 0) return PriorityTable::common(agent_list(arg.substr(7)));
        return parse_priorities(read_file(resolve(arg)));
    };
    if (kind == "rp" && arg.empty()) return random_priority();
    if (kind == "ps" && arg.empty()) return probabilistic_serial();
    if (kind == "null" && arg.empty()) return null_mechanism();
    if (kind == "sd") return serial_dictatorship(agent_list(arg));
    if (kind == "da") return deferred_acceptance(priorities()).named(s);
    if (kind == "boston" || kind == "bm") return boston(priorities()).named(s);
    if (kind == "ttc") return top_trading_cycles(priorities()).named(s);
    if (kind == "patched") {
        if (arg.rfind("base=", 0) != 0) throw ParseError("patched needs 'base=<mechanism>,<patchfile>'");
        auto comma = arg.rfind(',');
        if (comma == std::string::npos || comma < 5) throw ParseError("patched needs a patch file");
        auto base = parse_mechanism(arg.substr(5, comma - 5), dir);
        auto table = parse_patches(read_file(resolve(arg.substr(comma + 1))));
        return patched(std::move(base), std::move(table), s);
    }
    throw ParseError("unknown mechanism '" + s + "'");
}

}  // namespace allocx::io
