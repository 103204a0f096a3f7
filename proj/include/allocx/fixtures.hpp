#pragma once

// The worked examples as data: the appendix profiles with their printed
// tables, the two patched PS counterexamples, the bidominance example space,
// and the two-copies economy.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "allocx/allocation.hpp"
#include "allocx/io.hpp"
#include "allocx/mechanisms.hpp"
#include "allocx/model.hpp"

namespace allocx::fixtures {

struct Fixture {
    std::string name;
    std::string about;
    std::string profile_text;
    std::string table_text;  // the printed allocation (rows `alloc i: ...`)
    std::string mechanism;   // what reproduces the table: "rp", "ps", "direct"
};

namespace detail {

inline const std::vector<Fixture>& all() {
    static const std::vector<Fixture> fx = {
        {"A", "RP table A",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > @\npref 2: a > @\npref 3: a > @\npref 4: c > a > b > @\n",
         "alloc 1: a=1/3 @=2/3\nalloc 2: a=1/3 @=2/3\nalloc 3: a=1/3 @=2/3\nalloc 4: c=1\n", "rp"},
        {"A'", "RP table A'",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > @\npref 2: a > b > c > @\npref 3: a > @\npref 4: c > a > b > @\n",
         "alloc 1: a=1/3 @=2/3\nalloc 2: a=1/3 b=2/3\nalloc 3: a=1/3 @=2/3\nalloc 4: c=1\n", "rp"},
        {"A''", "RP table A''",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > b > c > @\npref 2: a > b > c > @\npref 3: a > @\npref 4: a > b > c > @\n",
         "alloc 1: a=1/4 b=1/3 c=1/3 @=1/12\nalloc 2: a=1/4 b=1/3 c=1/3 @=1/12\nalloc 3: a=1/4 @=3/4\n"
         "alloc 4: a=1/4 b=1/3 c=1/3 @=1/12\n",
         "rp"},
        {"A'''", "RP table A'''",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > b > c > @\npref 2: a > b > c > @\npref 3: a > @\npref 4: c > a > b > @\n",
         "alloc 1: a=1/3 b=1/2 c=1/24 @=1/8\nalloc 2: a=1/3 b=1/2 c=1/24 @=1/8\nalloc 3: a=1/3 @=2/3\n"
         "alloc 4: c=11/12 @=1/12\n",
         "rp"},
        {"B", "RP table B",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > b > c > @\npref 2: a > b > c > @\npref 3: a > @\npref 4: c > @\n",
         "alloc 1: a=1/3 b=1/2 c=1/24 @=1/8\nalloc 2: a=1/3 b=1/2 c=1/24 @=1/8\nalloc 3: a=1/3 @=2/3\n"
         "alloc 4: c=11/12 @=1/12\n",
         "rp"},
        {"B'", "RP table B'",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: c > b > a > @\npref 2: c > b > a > @\npref 3: a > @\npref 4: c > @\n",
         "alloc 1: c=1/3 b=1/2 a=1/24 @=1/8\nalloc 2: c=1/3 b=1/2 a=1/24 @=1/8\nalloc 3: a=11/12 @=1/12\n"
         "alloc 4: c=1/3 @=2/3\n",
         "rp"},
        {"B''", "RP table B''",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1\n"
         "pref 1: a > b > c > @\npref 2: c > b > a > @\npref 3: a > @\npref 4: c > @\n",
         "alloc 1: a=1/2 b=3/8 @=1/8\nalloc 2: c=1/2 b=3/8 @=1/8\nalloc 3: a=1/2 @=1/2\nalloc 4: c=1/2 @=1/2\n",
         "rp"},
        {"C2", "PS table of the size-improving counterexample",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1 d:1\n"
         "pref 1: a > c > @\npref 2: a > c > @\npref 3: b > c > d > a > @\npref 4: b > c > d > a > @\n",
         "alloc 1: a=1/2 c=1/4 @=1/4\nalloc 2: a=1/2 c=1/4 @=1/4\nalloc 3: b=1/2 c=1/4 d=1/4\n"
         "alloc 4: b=1/2 c=1/4 d=1/4\n",
         "ps"},
        {"C3", "PS table of the size-improved counterexample",
         "agents: 1 2 3 4\nobjects: a:1 b:1 c:1 d:1\n"
         "pref 1: a > c > @\npref 2: a > c > @\npref 3: b > c > d > a > @\npref 4: b > c > d > a > @\n",
         "alloc 1: a=1/2 c=1/4 @=1/4\nalloc 2: a=1/2 c=1/4 @=1/4\nalloc 3: b=1/2 c=1/4 d=1/4\n"
         "alloc 4: b=1/2 c=1/4 d=1/4\n",
         "ps"},
        {"FN9", "two copies each of o and o', both agents o > o' > @",
         "agents: 1 2\nobjects: o:2 o':2\npref 1: o > o' > @\npref 2: o > o' > @\n",
         "alloc 1: o=1/2 o'=1/2\nalloc 2: o=1/2 o'=1/2\n", "direct"},
    };
    return fx;
}

}  // namespace detail

/// Accepts ASCII primes (B'') and the typographic ones (B′′).
inline std::string normalize(std::string name) {
    const std::string prime = "′";
    for (std::size_t k; (k = name.find(prime)) != std::string::npos;) name.replace(k, prime.size(), "'");
    return name;
}

inline std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& f : detail::all()) out.push_back(f.name);
    out.push_back("EX1");
    return out;
}

inline const Fixture& get(const std::string& name) {
    auto n = normalize(name);
    for (const auto& f : detail::all())
        if (f.name == n) return f;
    throw PreconditionError("unknown fixture '" + name + "'");
}

inline Profile profile(const std::string& name) { return io::parse_profile(get(name).profile_text); }

inline RandomAssignment table(const std::string& name) {
    const auto& f = get(name);
    return io::parse_assignment(f.table_text, io::parse_profile(f.profile_text));
}

/// The overriding tables of the two patched mechanisms.
inline RandomAssignment psi_table(const std::string& name) {
    auto n = normalize(name);
    auto p = profile(n);
    if (n == "C2")
        return io::parse_assignment(
            "alloc 1: a=1/2 c=1/2\nalloc 2: a=1/2 c=1/2\nalloc 3: b=1/2 d=1/2\nalloc 4: b=1/2 d=1/2\n", p);
    if (n == "C3")
        return io::parse_assignment(
            "alloc 1: a=1/2 @=1/2\nalloc 2: a=1/2 @=1/2\nalloc 3: b=1/2 c=1/2\nalloc 4: b=1/2 c=1/2\n", p);
    throw PreconditionError("no patched table for '" + name + "'");
}

/// PS everywhere except at the named profile, where the psi table applies.
inline Mechanism psi_mechanism(const std::string& name) {
    auto n = normalize(name);
    PatchTable t;
    t.add(profile(n), psi_table(n));
    return patched(probabilistic_serial(), std::move(t), "psi-" + n);
}

/// The patch file text for the same mechanism, as read by `patched:base=ps,FILE`.
inline std::string psi_patch_text(const std::string& name) {
    auto n = normalize(name);
    return get(n).profile_text + psi_table(n).to_text(profile(n));
}

// Bidominance example: agents i, j; allocations a, b, c, o* with I(a) = I(b)
// = {i, j}, I(c) = {i}, I(o*) empty.
inline const char* kExampleSpace =
    "agents: i j\n"
    "alloc a: participants i j\n"
    "alloc b: participants i j\n"
    "alloc c: participants i\n"
    "alloc o*: participants\n"
    "apref i: b > c > a > @\n"
    "apref j: b > a > c ~ @\n";

inline AllocationSpace example_space() { return io::parse_space(kExampleSpace); }

/// p1..p5 of the example.
inline AbstractLottery example_lottery(int k) {
    auto s = example_space();
    switch (k) {
        case 1: return AbstractLottery::of(s, {{"a", Rational(1, 2)}, {"o*", Rational(1, 2)}});
        case 2: return AbstractLottery::of(s, {{"b", Rational(1, 2)}, {"o*", Rational(1, 2)}});
        case 3: return AbstractLottery::of(s, {{"b", Rational(1, 2)}, {"c", Rational(1, 2)}});
        case 4: return AbstractLottery::point(s, "b");
        case 5: return AbstractLottery::point(s, "a");
    }
    throw PreconditionError("example allocations are p1..p5");
}

}  // namespace allocx::fixtures
