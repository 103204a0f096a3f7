#include <gtest/gtest.h>

#include <regex>

#include "allocx/audit.hpp"
#include "allocx/fixtures.hpp"
#include "allocx/io.hpp"
#include "allocx/mechanisms.hpp"

using namespace allocx;

namespace {
std::vector<AgentId> agents(std::initializer_list<const char*> xs) {
    std::vector<AgentId> v;
    for (auto x : xs) v.emplace_back(x);
    return v;
}

// mass agent i gets on the objects weakly above x (x acceptable) or on
// everything acceptable plus @ (x = npos)
Rational upper_mass(const Profile& P, const RandomAssignment& r, std::size_t i, std::size_t k) {
    Rational s = 0;
    const auto& cls = P.pref(i).classes();
    for (std::size_t c = 0; c < cls.size() && c <= k; ++c)
        for (const auto& o : cls[c]) s += r.at(i, P.column(o));
    if (k >= cls.size()) s += r.at(i, P.m());
    return s;
}

// brute-force strategy-proofness: truthful outcome weakly sd-dominates
// every misreport outcome for the true preference
bool sp_oracle(const Mechanism& m, const std::vector<Profile>& profiles) {
    for (const auto& P : profiles) {
        auto truth = m(P);
        auto reports = enumerate_preferences(P.object_ids(), Domain::Strict);
        for (std::size_t i = 0; i < P.n(); ++i)
            for (const auto& r : reports) {
                auto dev = m(P.with_pref(i, r));
                for (std::size_t k = 0; k <= P.pref(i).class_count(); ++k)
                    if (upper_mass(P, truth, i, k) < upper_mass(P, dev, i, k)) return false;
            }
    }
    return true;
}

bool ti_oracle(const Mechanism& m, const std::vector<Profile>& profiles) {
    for (const auto& P : profiles) {
        auto truth = m(P);
        for (std::size_t i = 0; i < P.n(); ++i) {
            const auto& cls = P.pref(i).classes();
            for (std::size_t k = 0; k + 1 < cls.size(); ++k) {
                std::vector<std::vector<ObjectId>> head(cls.begin(), cls.begin() + k + 1);
                auto dev = m(P.with_pref(i, Preference(head)));
                if (upper_mass(P, truth, i, k) != upper_mass(P, dev, i, k)) return false;
            }
        }
    }
    return true;
}

std::vector<Mechanism> roster() {
    auto c = PriorityTable::common(agents({"1", "2", "3"}));
    PriorityTable mixed;
    mixed.set(ObjectId("a"), agents({"2", "3", "1"}));
    mixed.set(ObjectId("b"), agents({"3", "1", "2"}));
    return {random_priority(),      probabilistic_serial(),  serial_dictatorship(agents({"3", "1", "2"})),
            deferred_acceptance(c), deferred_acceptance(mixed), boston(c),
            boston(mixed),          top_trading_cycles(mixed), null_mechanism()};
}
}  // namespace

TEST(ProfileHash, SixteenHexDigitsAndCanonical) {
    auto P = fixtures::profile("C2");
    auto h = profile_hash(P);
    EXPECT_TRUE(std::regex_match(h, std::regex("[0-9a-f]{16}")));
    EXPECT_EQ(h, "17a9a23b3e79ed41");
    auto Q = io::parse_profile(
        "agents: 4 3 2 1\nobjects: d:1 c:1 b:1 a:1\n"
        "pref 1: a > c > @\npref 2: a > c > @\npref 3: b > c > d > a > @\npref 4: b > c > d > a > @\n");
    EXPECT_EQ(profile_hash(Q), h);
    EXPECT_NE(profile_hash(P.with_pref(0, Preference::parse("c > a"))), h);
}

TEST(ProfileSetTest, NeighborhoodSize) {
    auto P = fixtures::profile("C2");
    auto s = ProfileSet::neighborhood(P, Domain::Strict, "C2");
    // 4 agents, each with every other strict report over 4 objects (65 - 1)
    EXPECT_EQ(s.size(), 1u + 4u * 64u);
    EXPECT_EQ(s.description(), "neighborhood of C2 (257 profiles)");
}

TEST(ProfileSetTest, CappedUniverseNotice) {
    auto spec = UniverseSpec::make(2, 2, Domain::Strict);
    spec.cap = 10;
    auto s = ProfileSet::universe(spec);
    EXPECT_EQ(s.size(), 10u);
    auto rep = check_IR(null_mechanism(), s);
    EXPECT_EQ(rep.notice, "enumeration capped at 10 of 25 profiles");
    EXPECT_NE(rep.to_text().find("notice: enumeration capped"), std::string::npos);
}

TEST(Audit, StrategyProofnessAgreesWithBruteForce) {
    auto spec = UniverseSpec::make(3, 2, Domain::Strict);
    auto all = enumerate_profiles(spec).profiles;
    auto set = ProfileSet::universe(spec);
    for (const auto& m : roster()) {
        auto rep = check_strategy_proof(m, set);
        EXPECT_EQ(rep.pass, sp_oracle(m, all)) << m.name();
        if (!rep.pass) {
            EXPECT_TRUE(replay(m, rep.witness())) << m.name();
        }
    }
}

TEST(Audit, TruncationInvarianceAgreesWithBruteForce) {
    auto spec = UniverseSpec::make(3, 2, Domain::Strict);
    auto all = enumerate_profiles(spec).profiles;
    auto set = ProfileSet::universe(spec);
    for (const auto& m : roster()) {
        auto rep = check_truncation_invariance(m, set);
        EXPECT_EQ(rep.pass, ti_oracle(m, all)) << m.name();
    }
}

TEST(Audit, KnownVerdictsOnThreeByThree) {
    auto set = ProfileSet::universe(UniverseSpec::make(3, 3, Domain::Strict));
    auto c = PriorityTable::common(agents({"1", "2", "3"}));
    EXPECT_TRUE(check_strategy_proof(random_priority(), set).pass);
    EXPECT_TRUE(check_strategy_proof(deferred_acceptance(c), set).pass);
    EXPECT_TRUE(check_strategy_proof(top_trading_cycles(c), set).pass);
    EXPECT_TRUE(check_strategy_proof(null_mechanism(), set).pass);

    auto ps = check_strategy_proof(probabilistic_serial(), set);
    ASSERT_FALSE(ps.pass);
    EXPECT_TRUE(replay(probabilistic_serial(), ps.witness()));
    EXPECT_LT(ps.witness().truthful, ps.witness().deviated);

    auto bm = check_strategy_proof(boston(c), set);
    ASSERT_FALSE(bm.pass);
    EXPECT_TRUE(replay(boston(c), bm.witness()));

    for (const auto& m : {random_priority(), probabilistic_serial(), boston(c)})
        EXPECT_TRUE(check_truncation_invariance(m, set).pass) << m.name();
}

TEST(Audit, PatchedTablesBreakTruncationInvariance) {
    auto P = fixtures::profile("C2");
    auto set = ProfileSet::neighborhood(P, Domain::Strict, "C2");

    auto m2 = fixtures::psi_mechanism("C2");
    auto r2 = check_truncation_invariance(m2, set);
    ASSERT_FALSE(r2.pass);
    const auto& w2 = r2.witness();
    EXPECT_EQ(P.agent(w2.agent).label, "3");
    EXPECT_EQ(w2.transform, "truncation at c");
    EXPECT_EQ(w2.set_label(), "{b,c}");
    EXPECT_EQ(w2.truthful, Rational(1, 2));
    EXPECT_EQ(w2.deviated, Rational(3, 4));
    EXPECT_EQ(w2.deviated_alloc.at(2, P.column("b")), Rational(1, 2));
    EXPECT_EQ(w2.deviated_alloc.at(2, P.column("c")), Rational(1, 4));
    EXPECT_TRUE(replay(m2, w2));

    auto m3 = fixtures::psi_mechanism("C3");
    auto r3 = check_truncation_invariance(m3, set);
    ASSERT_FALSE(r3.pass);
    EXPECT_EQ(P.agent(r3.witness().agent).label, "3");
    EXPECT_EQ(r3.witness().truthful, 1);
    EXPECT_EQ(r3.witness().deviated, Rational(3, 4));
    EXPECT_TRUE(replay(m3, r3.witness()));

    EXPECT_TRUE(check_truncation_invariance(probabilistic_serial(), set).pass);
}

TEST(Audit, ReplayRejectsTamperedWitness) {
    auto set = ProfileSet::neighborhood(fixtures::profile("C2"), Domain::Strict, "C2");
    auto m = fixtures::psi_mechanism("C2");
    auto w = check_truncation_invariance(m, set).witness();
    EXPECT_FALSE(replay(probabilistic_serial(), w));
    w.deviated = w.truthful;
    EXPECT_FALSE(replay(m, w));
}

TEST(Audit, ParallelEqualsSerial) {
    auto set = ProfileSet::universe(UniverseSpec::make(3, 3, Domain::Strict));
    auto c = PriorityTable::common(agents({"2", "1", "3"}));
    for (auto prop : {Property::StrategyProof, Property::TruncationInvariance, Property::ContractionInvariance}) {
        for (const auto& m : {probabilistic_serial(), boston(c)}) {
            auto one = audit(m, prop, set, {true, 1});
            auto two = audit(m, prop, set, {true, 2});
            EXPECT_EQ(one.to_text(), two.to_text()) << m.name() << " " << to_string(prop);
            auto first1 = audit(m, prop, set, {false, 1});
            auto first2 = audit(m, prop, set, {false, 2});
            EXPECT_EQ(first1.to_tsv(), first2.to_tsv());
        }
    }
}

TEST(Audit, IRAndEqualTreatment) {
    auto set = ProfileSet::universe(UniverseSpec::make(3, 2, Domain::Strict));
    EXPECT_TRUE(satisfies_ETE(random_priority(), set).pass);
    EXPECT_TRUE(satisfies_ETE(probabilistic_serial(), set).pass);
    auto sd = serial_dictatorship(agents({"1", "2", "3"}));
    auto e = satisfies_ETE(sd, set);
    ASSERT_FALSE(e.pass);
    EXPECT_TRUE(replay(sd, e.witness()));
    EXPECT_TRUE(check_IR(sd, set).pass);

    auto greedy = Mechanism(
                      "greedy",
                      [](const Profile& p) {
                          RandomAssignment r(p.n(), p.m());
                          r.at(0, p.m()) = 0;
                          r.at(0, 0) = 1;
                          return r;
                      },
                      true)
                      .allow_non_ir();
    auto ir = check_IR(greedy, set);
    ASSERT_FALSE(ir.pass);
    EXPECT_TRUE(replay(greedy, ir.witness()));
}

TEST(Audit, SizeInvarianceWitnessesReplay) {
    auto set = ProfileSet::universe(UniverseSpec::make(3, 3, Domain::Strict));
    for (const auto& m : {random_priority(), probabilistic_serial(), null_mechanism()}) {
        auto rep = check_size_invariance(m, set);
        if (!rep.pass) {
            EXPECT_TRUE(replay(m, rep.witness())) << m.name();
        }
    }
    EXPECT_TRUE(check_size_invariance(null_mechanism(), set).pass);
}

TEST(Audit, ContractionInvarianceWeakDomain) {
    auto set = ProfileSet::universe(UniverseSpec::make(2, 2, Domain::Weak));
    auto rep = check_contraction_invariance(null_mechanism(), set);
    EXPECT_TRUE(rep.pass);
    // weak orders over 2 objects: 1 + 1 + 1 + 3
    EXPECT_EQ(rep.profiles, 6u * 6u);
}

TEST(Audit, Formats) {
    auto set = ProfileSet::neighborhood(fixtures::profile("C2"), Domain::Strict, "C2");
    auto rep = check_truncation_invariance(fixtures::psi_mechanism("C2"), set);
    EXPECT_EQ(rep.to_tsv(),
              "truncation-invariance\tpsi-C2\tneighborhood of C2 (257 profiles)\tfail\t257\t17a9a23b3e79ed41\t3\t"
              "truncation at c\tc\t1/2\t3/4\n");
    auto w = rep.witness().as_witness();
    EXPECT_EQ(w.kind, "truncation-invariance");
    EXPECT_EQ(w.get("set"), "{b,c}");
    EXPECT_EQ(parse_property("sp"), Property::StrategyProof);
    EXPECT_FALSE(parse_property("nonsense"));
}
