// allocx: run mechanisms, compare allocations, audit properties, reproduce
// the worked examples.
//
// exit codes: 0 ok, 1 property failed (witness printed), 2 parse error,
// 3 domain error, 4 internal invariant breach

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "allocx/allocation.hpp"
#include "allocx/audit.hpp"
#include "allocx/dominance.hpp"
#include "allocx/fixtures.hpp"
#include "allocx/io.hpp"
#include "allocx/mechanisms.hpp"
#include "allocx/model.hpp"
#include "allocx/validators.hpp"

using namespace allocx;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFail = 1, kParse = 2, kDomain = 3, kInvariant = 4 };

struct Common {
    std::string format = "text";
    bool tsv() const { return format == "tsv"; }
};

std::string indent(const std::string& text, const std::string& pad = "  ") {
    std::istringstream in(text);
    std::string out;
    for (std::string l; std::getline(in, l);) out += pad + l + "\n";
    return out;
}

Profile load_profile(const std::string& path) { return io::parse_profile(io::read_file(path)); }

void echo_profile(std::ostream& os, const Profile& P) {
    os << "profile [" << profile_hash(P) << "]:\n" << indent(P.to_text());
}

// -- run ----------------------------------------------------------------------

int do_run(const Common& c, const std::string& mech_spec, const std::string& file) {
    auto P = load_profile(file);
    auto m = io::parse_mechanism(mech_spec);
    auto p = m(P);
    if (c.tsv()) {
        auto h = profile_hash(P);
        for (std::size_t i = 0; i < P.n(); ++i)
            for (std::size_t col = 0; col <= P.m(); ++col)
                if (p.at(i, col) != 0)
                    std::cout << h << '\t' << m.name() << '\t' << P.agent(i).label << '\t'
                              << RandomAssignment::column_label(P, col) << '\t' << to_string(p.at(i, col)) << '\n';
        return kOk;
    }
    echo_profile(std::cout, P);
    std::cout << "mechanism: " << m.name() << '\n' << p.to_text(P);
    return kOk;
}

// -- compare ------------------------------------------------------------------

std::vector<std::string> relations_of(const std::string& r) {
    if (r == "all") return {"sd", "size", "welfare-size", "upper"};
    if (r == "sd" || r == "size" || r == "welfare-size" || r == "upper") return {r};
    throw ParseError("unknown relation '" + r + "'");
}

std::string relation_line(const std::string& rel, const RandomAssignment& a, const RandomAssignment& b,
                          const Profile& P) {
    if (rel == "sd") return sd_compare(a, b, P).line("SD");
    if (rel == "size") return size_compare(a, b, P).line("size");
    if (rel == "welfare-size") return welfare_size_compare(a, b, P).line("welfare-size");
    auto ue = upper_equivalent(a, b, P);
    return ue.equivalent ? "upper: equivalent" : "upper: differ (witness: " + ue.witness->to_string() + ")";
}

std::string relation_verdict(const std::string& rel, const RandomAssignment& a, const RandomAssignment& b,
                             const Profile& P) {
    if (rel == "sd") return to_string(sd_compare(a, b, P).order);
    if (rel == "size") return to_string(size_compare(a, b, P).order);
    if (rel == "welfare-size") return to_string(welfare_size_compare(a, b, P).order);
    return upper_equivalent(a, b, P).equivalent ? "equivalent" : "differ";
}

std::string abstract_line(const std::string& rel, const AllocationSpace& s, const AbstractLottery& a,
                          const AbstractLottery& b) {
    if (rel == "sd") return sd_compare(s, a, b).line("SD");
    if (rel == "size") return size_compare(s, a, b).line("size");
    if (rel == "welfare-size") return welfare_size_compare(s, a, b).line("welfare-size");
    auto ue = upper_equivalent(s, a, b);
    return ue.equivalent ? "upper: equivalent" : "upper: differ (witness: " + ue.witness->to_string() + ")";
}

struct CompareArgs {
    std::string mech_a, mech_b, profile, universe, alloc_a, alloc_b, relation = "all";
};

int do_compare(const Common& c, const CompareArgs& a) {
    auto rels = relations_of(a.relation);
    if (!a.alloc_a.empty() || !a.alloc_b.empty()) {
        if (a.alloc_a.empty() || a.alloc_b.empty() || a.profile.empty())
            throw ParseError("--alloc-a and --alloc-b need --profile");
        auto text = io::read_file(a.profile);
        if (io::is_space_text(text)) {
            auto s = io::parse_space(text);
            auto x = io::parse_abstract_lottery(io::read_file(a.alloc_a), s);
            auto y = io::parse_abstract_lottery(io::read_file(a.alloc_b), s);
            std::cout << "space:\n" << indent(s.to_text());
            for (const auto& r : rels) std::cout << abstract_line(r, s, x, y) << '\n';
            return kOk;
        }
        auto P = io::parse_profile(text);
        auto x = io::parse_assignment(io::read_file(a.alloc_a), P);
        auto y = io::parse_assignment(io::read_file(a.alloc_b), P);
        echo_profile(std::cout, P);
        for (const auto& r : rels) std::cout << relation_line(r, x, y, P) << '\n';
        return kOk;
    }
    if (a.mech_a.empty() || a.mech_b.empty()) throw ParseError("compare needs two mechanisms or two allocations");
    auto ma = io::parse_mechanism(a.mech_a);
    auto mb = io::parse_mechanism(a.mech_b);
    if (!a.profile.empty()) {
        auto P = load_profile(a.profile);
        auto x = ma(P), y = mb(P);
        if (c.tsv()) {
            for (const auto& r : rels)
                std::cout << profile_hash(P) << '\t' << r << '\t' << relation_verdict(r, x, y, P) << '\n';
            return kOk;
        }
        echo_profile(std::cout, P);
        std::cout << ma.name() << ":\n" << indent(x.to_text(P)) << mb.name() << ":\n" << indent(y.to_text(P));
        for (const auto& r : rels) std::cout << relation_line(r, x, y, P) << '\n';
        return kOk;
    }
    if (a.universe.empty()) throw ParseError("compare needs --profile or --universe");
    auto set = ProfileSet::universe(io::parse_universe(a.universe));
    if (!ma.accepts(set.domain()) || !mb.accepts(set.domain()))
        throw DomainError("a strict-only mechanism cannot be compared on a weak universe");
    Evaluator ea(ma), eb(mb);
    std::map<std::string, std::map<std::string, std::size_t>> hist;
    for (std::size_t k = 0; k < set.size(); ++k) {
        auto P = set.at(k);
        const auto& x = ea(P);
        const auto& y = eb(P);
        for (const auto& r : rels) {
            auto v = relation_verdict(r, x, y, P);
            ++hist[r][v];
            if (c.tsv()) std::cout << profile_hash(P) << '\t' << r << '\t' << v << '\n';
        }
    }
    if (c.tsv()) return kOk;
    std::cout << "mechanisms: " << ma.name() << " vs " << mb.name() << '\n';
    std::cout << "universe: " << set.description() << '\n' << "profiles: " << set.size() << '\n';
    if (!set.notice().empty()) std::cout << "notice: " << set.notice() << '\n';
    for (const auto& r : rels) {
        std::cout << r << ":\n";
        for (const auto& [v, n] : hist[r]) std::cout << "  " << v << ": " << n << '\n';
    }
    return kOk;
}

// -- audit --------------------------------------------------------------------

ProfileSet profile_set(const std::string& universe, const std::string& profile, bool neighborhood,
                       const std::string& domain) {
    if (!universe.empty()) return ProfileSet::universe(io::parse_universe(universe));
    if (profile.empty()) throw ParseError("need --universe or --profile");
    auto P = load_profile(profile);
    Domain d = domain == "weak" ? Domain::Weak : Domain::Strict;
    if (domain.empty()) d = P.is_strict() ? Domain::Strict : Domain::Weak;
    auto name = fs::path(profile).filename().string();
    if (neighborhood) return ProfileSet::neighborhood(P, d, name);
    return ProfileSet::list({P}, d, name);
}

struct AuditArgs {
    std::string mechanism, check, universe, profile, domain, out;
    bool neighborhood = false, exhaustive = false;
    unsigned jobs = 1;
};

int do_audit(const Common& c, const AuditArgs& a) {
    auto prop = parse_property(a.check);
    if (!prop) throw ParseError("unknown property '" + a.check + "'");
    auto m = io::parse_mechanism(a.mechanism);
    auto set = profile_set(a.universe, a.profile, a.neighborhood, a.domain);
    auto rep = audit(m, *prop, set, AuditOptions{a.exhaustive, a.jobs});
    auto text = c.tsv() ? rep.to_tsv() : rep.to_text();
    std::cout << text;
    if (!a.out.empty()) {
        std::ofstream f(a.out, std::ios::binary);
        if (!f) throw ParseError("cannot write '" + a.out + "'");
        f << text;
    }
    return rep.pass ? kOk : kFail;
}

// -- validate -----------------------------------------------------------------

struct ValidateArgs {
    std::string what, mech_a, mech_b, universe, profile, domain, alloc, alloc2;
    bool neighborhood = false;
    unsigned jobs = 1;
};

int do_validate(const Common& c, const ValidateArgs& a) {
    AuditOptions opt{false, a.jobs};
    auto need_mechs = [&] {
        if (a.mech_a.empty() || a.mech_b.empty()) throw ParseError("'" + a.what + "' needs --mech-a and --mech-b");
        return std::pair{io::parse_mechanism(a.mech_a), io::parse_mechanism(a.mech_b)};
    };
    if (a.what == "thm1" || a.what == "thm1-star") {
        auto [ma, mb] = need_mechs();
        auto set = profile_set(a.universe, a.profile, a.neighborhood, a.domain);
        auto r = validate_size_sd(ma, mb, set, a.what == "thm1-star", opt);
        std::cout << (c.tsv() ? r.to_tsv() : r.to_text());
        return r.pass() ? kOk : kFail;
    }
    if (a.what == "descent") {
        auto [ma, mb] = need_mechs();
        if (a.profile.empty()) throw ParseError("descent needs --profile");
        auto P = load_profile(a.profile);
        echo_profile(std::cout, P);
        auto tr = contraction_descent(ma, mb, P, P.is_strict() ? Domain::Strict : Domain::Weak);
        std::cout << tr.to_text();
        return tr.status == DescentStatus::Equivalent ? kOk : kFail;
    }
    if (a.what == "size-improves") {
        auto [ma, mb] = need_mechs();
        auto set = profile_set(a.universe, a.profile, a.neighborhood, a.domain);
        std::cout << "new: " << ma.name() << "\nold: " << mb.name() << "\nuniverse: " << set.description() << '\n';
        std::cout << check_size_improves(ma, mb, set).to_text();
        return kOk;
    }
    if (a.what == "prop2") {
        auto [ma, mb] = need_mechs();
        auto set = profile_set(a.universe, a.profile, a.neighborhood, a.domain);
        auto r = validate_prop2(ma, mb, set, opt);
        std::cout << r.to_text();
        return r.pass() ? kOk : kFail;
    }
    if (a.what == "prop1") {
        auto r = validate_prop1(opt);
        std::cout << r.to_text();
        return r.pass ? kOk : kFail;
    }
    if (a.what == "network") {
        if (a.profile.empty() || a.alloc.empty() || a.alloc2.empty())
            throw ParseError("network needs --profile, --alloc and --alloc2");
        auto P = load_profile(a.profile);
        auto p = io::parse_assignment(io::read_file(a.alloc), P);
        auto q = io::parse_assignment(io::read_file(a.alloc2), P);
        echo_profile(std::cout, P);
        auto r = lemma_random_network(p, q, P);
        std::cout << r.to_text(P);
        return r.outcome == NetworkOutcome::Anomaly ? kFail : kOk;
    }
    throw ParseError("unknown validator '" + a.what + "'");
}

// -- examples -----------------------------------------------------------------

int do_examples(const std::string& id) {
    std::vector<std::string> ids = id.empty() ? fixtures::names() : std::vector<std::string>{id};
    bool ok = true;
    for (const auto& name : ids) {
        auto n = fixtures::normalize(name);
        if (n == "EX1") {
            std::cout << "space:\n" << indent(fixtures::example_space().to_text());
            for (int k = 1; k <= 5; ++k)
                std::cout << "p" << k << ":\n" << indent(fixtures::example_lottery(k).to_text(fixtures::example_space()));
        } else {
            echo_profile(std::cout, fixtures::profile(n));
        }
        auto r = reproduce_fixture(n);
        std::cout << r.to_text();
        ok = ok && r.pass;
    }
    return ok ? kOk : kFail;
}

// -- improve / decompose ------------------------------------------------------

int do_improve(const std::string& profile, const std::string& alloc, const std::string& mode) {
    if (mode != "sd" && mode != "bi" && mode != "strong") throw ParseError("mode must be sd, bi or strong");
    auto text = io::read_file(profile);
    if (io::is_space_text(text)) {
        auto s = io::parse_space(text);
        auto p = io::parse_abstract_lottery(io::read_file(alloc), s);
        std::cout << "space:\n" << indent(s.to_text());
        std::optional<AbstractLottery> q;
        std::vector<std::size_t> better;
        if (mode == "sd") q = find_sd_improvement(s, p);
        if (mode == "bi") q = find_bidominating(s, p);
        if (mode == "strong")
            if (auto r = find_strongly_bidominating(s, p)) {
                q = r->allocation;
                better = r->better_off;
            }
        if (!q) {
            std::cout << "improvement: none\n";
            return kOk;
        }
        std::cout << "improvement:\n" << indent(q->to_text(s));
        if (!better.empty()) {
            std::cout << "better off:";
            for (auto i : better) std::cout << ' ' << s.agents()[i].label;
            std::cout << '\n';
        }
        return kOk;
    }
    auto P = io::parse_profile(text);
    auto p = io::parse_assignment(io::read_file(alloc), P);
    echo_profile(std::cout, P);
    std::optional<RandomAssignment> q;
    std::vector<std::size_t> better;
    if (mode == "sd") q = find_sd_improvement(p, P);
    if (mode == "bi") q = find_bidominating(p, P);
    if (mode == "strong")
        if (auto r = find_strongly_bidominating(p, P)) {
            q = r->allocation;
            better = r->better_off;
        }
    if (!q) {
        std::cout << "improvement: none\n";
        return kOk;
    }
    std::cout << "improvement:\n" << indent(q->to_text(P));
    if (!better.empty()) {
        std::cout << "better off:";
        for (auto i : better) std::cout << ' ' << P.agent(i).label;
        std::cout << '\n';
    }
    std::cout << sd_compare(*q, p, P).line("SD") << '\n' << size_compare(*q, p, P).line("size") << '\n';
    return kOk;
}

int do_decompose(const std::string& profile, const std::string& alloc) {
    auto P = load_profile(profile);
    auto p = io::parse_assignment(io::read_file(alloc), P);
    auto l = bvn_decompose(p, P);
    if (!(marginal(l, P) == p)) throw InvariantError("decomposition does not marginalize back");
    echo_profile(std::cout, P);
    std::cout << l.to_text(P);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"allocx: random assignment mechanisms, dominance relations and property audits"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--format", common.format, "text or tsv")->check(CLI::IsMember({"text", "tsv"}));

    std::string run_mech, run_file;
    auto* run = app.add_subcommand("run", "run a mechanism on a profile file");
    run->add_option("mechanism", run_mech)->required();
    run->add_option("profile", run_file)->required();

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "compare two mechanisms or two allocations");
    compare->add_option("mech_a", cmp.mech_a);
    compare->add_option("mech_b", cmp.mech_b);
    compare->add_option("--profile", cmp.profile);
    compare->add_option("--universe", cmp.universe);
    compare->add_option("--alloc-a", cmp.alloc_a);
    compare->add_option("--alloc-b", cmp.alloc_b);
    compare->add_option("--relation", cmp.relation, "sd, size, welfare-size, upper or all");

    AuditArgs aud;
    auto* audit_cmd = app.add_subcommand("audit", "audit a mechanism for a property");
    audit_cmd->add_option("--mechanism", aud.mechanism)->required();
    audit_cmd->add_option("--check", aud.check)->required();
    audit_cmd->add_option("--universe", aud.universe);
    audit_cmd->add_option("--profile", aud.profile);
    audit_cmd->add_flag("--neighborhood", aud.neighborhood, "the profile plus every unilateral deviation");
    audit_cmd->add_option("--domain", aud.domain)->check(CLI::IsMember({"strict", "weak"}));
    audit_cmd->add_flag("--exhaustive", aud.exhaustive, "collect every witness");
    audit_cmd->add_option("--jobs", aud.jobs)->check(CLI::Range(1u, 256u));
    audit_cmd->add_option("--out", aud.out, "also write the report here");

    ValidateArgs val;
    auto* validate = app.add_subcommand("validate", "thm1, thm1-star, descent, size-improves, prop2, prop1, network");
    validate->add_option("what", val.what)->required();
    validate->add_option("--mech-a", val.mech_a);
    validate->add_option("--mech-b", val.mech_b);
    validate->add_option("--universe", val.universe);
    validate->add_option("--profile", val.profile);
    validate->add_flag("--neighborhood", val.neighborhood);
    validate->add_option("--domain", val.domain)->check(CLI::IsMember({"strict", "weak"}));
    validate->add_option("--alloc", val.alloc);
    validate->add_option("--alloc2", val.alloc2);
    validate->add_option("--jobs", val.jobs)->check(CLI::Range(1u, 256u));

    std::string ex_id;
    auto* examples = app.add_subcommand("examples", "reproduce the worked examples");
    examples->add_option("--id", ex_id);

    std::string imp_profile, imp_alloc, imp_mode = "strong";
    auto* improve = app.add_subcommand("improve", "search for a dominating allocation");
    improve->add_option("--profile", imp_profile)->required();
    improve->add_option("--alloc", imp_alloc)->required();
    improve->add_option("--mode", imp_mode, "sd, bi or strong");

    std::string dec_profile, dec_alloc;
    auto* decompose = app.add_subcommand("decompose", "write an allocation as a lottery over assignments");
    decompose->add_option("--profile", dec_profile)->required();
    decompose->add_option("--alloc", dec_alloc)->required();

    for (auto* sub : {run, compare, audit_cmd, validate, examples, improve, decompose})
        sub->add_option("--format", common.format, "text or tsv")->check(CLI::IsMember({"text", "tsv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    try {
        if (*run) return do_run(common, run_mech, run_file);
        if (*compare) return do_compare(common, cmp);
        if (*audit_cmd) return do_audit(common, aud);
        if (*validate) return do_validate(common, val);
        if (*examples) return do_examples(ex_id);
        if (*improve) return do_improve(imp_profile, imp_alloc, imp_mode);
        if (*decompose) return do_decompose(dec_profile, dec_alloc);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const InvariantError& e) {
        std::cerr << "invariant breach: " << e.what() << '\n';
        return kInvariant;
    } catch (const PreconditionError& e) {
        std::cerr << "bad input: " << e.what() << '\n';
        return kParse;
    }
    return kOk;
}
