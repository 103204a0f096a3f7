#pragma once

// Property audits of a mechanism over a set of profiles: IR,
// strategy-proofness, truncation-, contraction-, contraction-above- and
// size-invariance, equal treatment of equals.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "allocx/allocation.hpp"
#include "allocx/dominance.hpp"
#include "allocx/mechanisms.hpp"
#include "allocx/model.hpp"

namespace allocx {

/// FNV-1a of the canonical key, as 16 hex digits.
inline std::string profile_hash(const Profile& p) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : p.canonical_key()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int k = 15; k >= 0; --k, h >>= 4) s[static_cast<std::size_t>(k)] = hex[h & 15];
    return s;
}

/// The profiles an audit quantifies over: an enumerated universe (possibly
/// capped) or an explicit list. Misreports always range over the full
/// domain on the profile's objects.
class ProfileSet {
public:
    static ProfileSet universe(const UniverseSpec& spec) {
        ProfileSet s;
        s.universe_.emplace(spec);
        s.domain_ = spec.domain;
        s.description_ = spec.to_string();
        return s;
    }

    static ProfileSet list(std::vector<Profile> profiles, Domain domain, std::string description) {
        ProfileSet s;
        s.profiles_ = std::move(profiles);
        s.domain_ = domain;
        s.description_ = std::move(description);
        return s;
    }

    /// The centre plus every unilateral deviation within the domain.
    static ProfileSet neighborhood(const Profile& centre, Domain domain, std::string name = "profile") {
        std::vector<Profile> out{centre};
        auto prefs = enumerate_preferences(centre.object_ids(), domain);
        for (std::size_t i = 0; i < centre.n(); ++i)
            for (const auto& r : prefs)
                if (r != centre.pref(i)) out.push_back(centre.with_pref(i, r));
        return list(std::move(out), domain, "neighborhood of " + name + " (" + std::to_string(out.size()) + " profiles)");
    }

    std::size_t size() const { return universe_ ? universe_->size() : profiles_.size(); }
    Profile at(std::size_t k) const { return universe_ ? universe_->at(k) : profiles_.at(k); }
    Domain domain() const { return domain_; }
    const std::string& description() const { return description_; }

    std::string notice() const {
        if (universe_ && universe_->truncated())
            return "enumeration capped at " + std::to_string(universe_->size()) + " of " +
                   std::to_string(universe_->total()) + " profiles";
        return {};
    }

    /// Every report available to an agent in this profile's market.
    const std::vector<Preference>& reports(const Profile& p) const {
        if (universe_) return universe_->preferences();
        std::string key;
        for (const auto& o : p.object_ids()) key += o.label + " ";
        std::lock_guard<std::mutex> lock(*mu_);
        auto it = reports_.find(key);
        if (it == reports_.end()) it = reports_.emplace(key, enumerate_preferences(p.object_ids(), domain_)).first;
        return it->second;
    }

private:
    std::optional<ProfileUniverse> universe_;
    std::vector<Profile> profiles_;
    Domain domain_ = Domain::Strict;
    std::string description_;
    mutable std::map<std::string, std::vector<Preference>> reports_;
    std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
};

/// Memoised mechanism evaluation, keyed by canonical profile key.
class Evaluator {
public:
    explicit Evaluator(const Mechanism& m) : m_(m) {}

    const RandomAssignment& operator()(const Profile& p) {
        auto key = p.canonical_key();
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(std::move(key), m_(p)).first;
        return it->second;
    }

    const Mechanism& mechanism() const { return m_; }

private:
    const Mechanism& m_;
    std::unordered_map<std::string, RandomAssignment> cache_;
};

enum class Property {
    IR,
    StrategyProof,
    TruncationInvariance,
    ContractionInvariance,
    ContractionAboveInvariance,
    SizeInvariance,
    EqualTreatment,
};

inline std::string to_string(Property p) {
    switch (p) {
        case Property::IR: return "ir";
        case Property::StrategyProof: return "strategy-proofness";
        case Property::TruncationInvariance: return "truncation-invariance";
        case Property::ContractionInvariance: return "contraction-invariance";
        case Property::ContractionAboveInvariance: return "contraction-above-invariance";
        case Property::SizeInvariance: return "size-invariance";
        case Property::EqualTreatment: return "ete";
    }
    return "?";
}

inline std::optional<Property> parse_property(std::string_view s) {
    for (auto p : {Property::IR, Property::StrategyProof, Property::TruncationInvariance,
                   Property::ContractionInvariance, Property::ContractionAboveInvariance, Property::SizeInvariance,
                   Property::EqualTreatment})
        if (to_string(p) == s) return p;
    if (s == "sp" || s == "strategy-proof") return Property::StrategyProof;
    return std::nullopt;
}

/// A violated inequality: agent `agent` at `profile`, the transformed report,
/// and the masses on `threshold` under the truthful and the deviating outcome.
struct AuditWitness {
    Property property = Property::IR;
    std::size_t index = 0;  // position in the profile set
    Profile profile;
    std::size_t agent = 0;
    std::string transform;
    std::optional<Preference> report;
    std::vector<std::size_t> columns;  // the threshold set, as profile columns
    std::string threshold;
    Rational truthful, deviated;
    std::string required;
    RandomAssignment truthful_alloc, deviated_alloc;

    std::string set_label() const {
        std::string s = "{";
        for (std::size_t k = 0; k < columns.size(); ++k)
            s += (k ? "," : "") + RandomAssignment::column_label(profile, columns[k]);
        return s + "}";
    }

    Witness as_witness() const {
        Witness w(to_string(property));
        w.with("agent", profile.agent(agent).label).with("transform", transform);
        if (report) w.with("report", report->to_string());
        w.with("threshold", threshold)
            .with("set", set_label())
            .with("truthful", allocx::to_string(truthful))
            .with("deviated", allocx::to_string(deviated))
            .with("required", required);
        return w;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "  agent: " << profile.agent(agent).label << '\n';
        os << "  transform: " << transform << '\n';
        if (report) os << "  report: " << report->to_string() << '\n';
        os << "  threshold: " << threshold << ' ' << set_label() << '\n';
        os << "  truthful mass: " << allocx::to_string(truthful) << '\n';
        os << "  deviated mass: " << allocx::to_string(deviated) << '\n';
        os << "  required: " << required << '\n';
        os << "  profile [" << profile_hash(profile) << "]:\n";
        std::istringstream p(profile.to_text());
        for (std::string line; std::getline(p, line);) os << "    " << line << '\n';
        os << "  truthful outcome:\n";
        std::istringstream a(truthful_alloc.to_text(profile));
        for (std::string line; std::getline(a, line);) os << "    " << line << '\n';
        if (report) {
            os << "  deviated outcome:\n";
            std::istringstream b(deviated_alloc.to_text(profile.with_pref(agent, *report)));
            for (std::string line; std::getline(b, line);) os << "    " << line << '\n';
        }
        return os.str();
    }
};

struct AuditOptions {
    bool exhaustive = false;
    unsigned jobs = 1;
};

struct AuditReport {
    std::string mechanism;
    std::string universe;
    Property property = Property::IR;
    bool pass = true;
    std::size_t profiles = 0;
    std::string notice;
    std::vector<AuditWitness> witnesses;

    const AuditWitness& witness() const { return witnesses.at(0); }

    std::string verdict() const { return pass ? "pass" : "fail"; }

    std::string to_text() const {
        std::ostringstream os;
        os << "mechanism: " << mechanism << '\n';
        os << "universe: " << universe << '\n';
        os << "property: " << to_string(property) << '\n';
        os << "profiles: " << profiles << '\n';
        if (!notice.empty()) os << "notice: " << notice << '\n';
        os << "verdict: " << verdict() << '\n';
        for (std::size_t k = 0; k < witnesses.size(); ++k) {
            os << "witness " << k + 1 << ":\n" << witnesses[k].to_text();
        }
        return os.str();
    }

    std::string to_tsv() const {
        std::ostringstream os;
        auto head = to_string(property) + "\t" + mechanism + "\t" + universe + "\t";
        if (witnesses.empty()) {
            os << head << verdict() << "\t" << profiles << "\n";
            return os.str();
        }
        for (const auto& w : witnesses)
            os << head << verdict() << "\t" << profiles << "\t" << profile_hash(w.profile) << "\t"
               << w.profile.agent(w.agent).label << "\t" << w.transform << "\t" << w.threshold << "\t"
               << allocx::to_string(w.truthful) << "\t" << allocx::to_string(w.deviated) << "\n";
        return os.str();
    }
};

namespace detail {

inline Rational mass(const RandomAssignment& p, std::size_t i, const std::vector<std::size_t>& cols) {
    Rational r = 0;
    for (auto c : cols) r += p.at(i, c);
    return r;
}

/// Columns of the t-th upper contour of agent i (acceptable classes, then the
/// outside option added at t == class_count).
inline std::vector<std::size_t> contour_columns(const Profile& p, std::size_t i, std::size_t t) {
    std::vector<std::size_t> cols;
    const auto& cls = p.pref(i).classes();
    for (std::size_t k = 0; k <= t && k < cls.size(); ++k)
        for (const auto& o : cls[k]) cols.push_back(p.column(o));
    if (t >= cls.size()) cols.push_back(p.m());
    std::sort(cols.begin(), cols.end());
    return cols;
}

inline std::string threshold_label(const Profile& p, std::size_t i, std::size_t t) {
    const auto& cls = p.pref(i).classes();
    return t < cls.size() ? cls[t].front().label : std::string(kOutsideLabel);
}

class Auditor {
public:
    Auditor(Property prop, const ProfileSet& set, bool exhaustive) : prop_(prop), set_(set), exhaustive_(exhaustive) {}

    /// Checks one profile; appends witnesses (at most one unless exhaustive).
    void profile(Evaluator& ev, std::size_t index, const Profile& P, std::vector<AuditWitness>& out) const {
        const auto& truth = ev(P);
        for (std::size_t i = 0; i < P.n(); ++i) {
            if (!exhaustive_ && !out.empty()) return;
            agent(ev, index, P, truth, i, out);
        }
    }

private:
    AuditWitness base(std::size_t index, const Profile& P, const RandomAssignment& truth, std::size_t i) const {
        AuditWitness w;
        w.property = prop_;
        w.index = index;
        w.profile = P;
        w.agent = i;
        w.truthful_alloc = truth;
        return w;
    }

    bool stop(const std::vector<AuditWitness>& out) const { return !exhaustive_ && !out.empty(); }

    /// Equality of the mass on `cols` between truthful and deviated outcomes.
    void invariant(Evaluator& ev, std::size_t index, const Profile& P, const RandomAssignment& truth, std::size_t i,
                   const Preference& r, std::string transform, const std::vector<std::size_t>& cols,
                   std::string threshold, std::vector<AuditWitness>& out) const {
        const auto& dev = ev(P.with_pref(i, r));
        Rational a = mass(truth, i, cols), b = mass(dev, i, cols);
        if (a == b) return;
        auto w = base(index, P, truth, i);
        w.transform = std::move(transform);
        w.report = r;
        w.columns = cols;
        w.threshold = std::move(threshold);
        w.truthful = a;
        w.deviated = b;
        w.required = "truthful = deviated";
        w.deviated_alloc = dev;
        out.push_back(std::move(w));
    }

    void agent(Evaluator& ev, std::size_t index, const Profile& P, const RandomAssignment& truth, std::size_t i,
               std::vector<AuditWitness>& out) const {
        const auto& pref = P.pref(i);
        const auto& cls = pref.classes();
        switch (prop_) {
            case Property::IR:
                for (std::size_t o = 0; o < P.m(); ++o)
                    if (truth.at(i, o) > 0 && P.rank(i, o) == Profile::kUnacceptable) {
                        auto w = base(index, P, truth, i);
                        w.transform = "none";
                        w.columns = {o};
                        w.threshold = P.object(o).label + " (unacceptable)";
                        w.truthful = truth.at(i, o);
                        w.deviated = 0;
                        w.required = "no mass on unacceptable objects";
                        out.push_back(std::move(w));
                        if (stop(out)) return;
                    }
                return;
            case Property::StrategyProof:
                for (const auto& r : set_.reports(P)) {
                    if (r == pref) continue;
                    const auto& dev = ev(P.with_pref(i, r));
                    for (std::size_t t = 0; t <= cls.size(); ++t) {
                        auto cols = contour_columns(P, i, t);
                        Rational a = mass(truth, i, cols), b = mass(dev, i, cols);
                        if (a >= b) continue;
                        auto w = base(index, P, truth, i);
                        w.transform = "misreport";
                        w.report = r;
                        w.columns = cols;
                        w.threshold = threshold_label(P, i, t);
                        w.truthful = a;
                        w.deviated = b;
                        w.required = "truthful >= deviated";
                        w.deviated_alloc = dev;
                        out.push_back(std::move(w));
                        break;
                    }
                    if (stop(out)) return;
                }
                return;
            case Property::TruncationInvariance:
                for (std::size_t t = 0; t + 1 < cls.size(); ++t) {
                    const auto& o = cls[t].front();
                    invariant(ev, index, P, truth, i, truncate(pref, o), "truncation at " + o.label,
                              contour_columns(P, i, t), o.label, out);
                    if (stop(out)) return;
                }
                return;
            case Property::ContractionInvariance:
                for (std::size_t t = 0; t + 1 < cls.size(); ++t)
                    for (const auto& o : cls[t])
                        for (const auto& r : contractions(pref, o, set_.domain())) {
                            invariant(ev, index, P, truth, i, r, "contraction at " + o.label,
                                      contour_columns(P, i, t), o.label, out);
                            if (stop(out)) return;
                        }
                return;
            case Property::ContractionAboveInvariance:
                for (std::size_t t = 1; t < cls.size(); ++t) {
                    const auto& o = cls[t].front();
                    invariant(ev, index, P, truth, i, contract_above(pref, o), "contraction above " + o.label,
                              contour_columns(P, i, t - 1), cls[t - 1].front().label, out);
                    if (stop(out)) return;
                }
                return;
            case Property::SizeInvariance: {
                auto acc = pref.acceptable_set();
                std::sort(acc.begin(), acc.end());
                std::vector<std::size_t> cols;
                for (std::size_t o = 0; o < P.m(); ++o) cols.push_back(o);
                for (const auto& r : set_.reports(P)) {
                    if (r == pref) continue;
                    auto racc = r.acceptable_set();
                    std::sort(racc.begin(), racc.end());
                    if (racc != acc) continue;
                    invariant(ev, index, P, truth, i, r, "same acceptable set", cols, "size", out);
                    if (stop(out)) return;
                }
                return;
            }
            case Property::EqualTreatment:
                for (std::size_t j = i + 1; j < P.n(); ++j) {
                    if (P.pref(j) != pref) continue;
                    for (std::size_t c = 0; c <= P.m(); ++c) {
                        if (truth.at(i, c) == truth.at(j, c)) continue;
                        auto w = base(index, P, truth, i);
                        w.transform = "compare with agent " + P.agent(j).label;
                        w.columns = {c};
                        w.threshold = RandomAssignment::column_label(P, c);
                        w.truthful = truth.at(i, c);
                        w.deviated = truth.at(j, c);
                        w.required = "equal rows for equal preferences";
                        out.push_back(std::move(w));
                        break;
                    }
                    if (stop(out)) return;
                }
                return;
        }
    }

    Property prop_;
    const ProfileSet& set_;
    bool exhaustive_;
};

}  // namespace detail

/// Runs one property over the profile set. Without `exhaustive` the report
/// carries the witness at the lowest profile index only.
inline AuditReport audit(const Mechanism& mech, Property prop, const ProfileSet& set, AuditOptions opt = {}) {
    if (!mech.accepts(set.domain()))
        throw DomainError("mechanism " + mech.name() + " is strict-only; refusing a " + to_string(set.domain()) +
                          " audit");
    AuditReport rep;
    rep.mechanism = mech.name();
    rep.universe = set.description();
    rep.property = prop;
    rep.profiles = set.size();
    rep.notice = set.notice();

    detail::Auditor auditor(prop, set, opt.exhaustive);
    const std::size_t N = set.size();
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(std::max<std::size_t>(N, 1))));
    std::atomic<std::size_t> first_fail{std::numeric_limits<std::size_t>::max()};
    std::vector<std::vector<AuditWitness>> found(jobs);
    std::vector<std::exception_ptr> errors(jobs);

    auto work = [&](unsigned job) {
        try {
            Evaluator ev(mech);
            std::size_t lo = N * job / jobs, hi = N * (job + 1) / jobs;
            for (std::size_t k = lo; k < hi; ++k) {
                if (!opt.exhaustive && k > first_fail.load()) break;
                std::size_t before = found[job].size();
                auditor.profile(ev, k, set.at(k), found[job]);
                if (found[job].size() > before && !opt.exhaustive) {
                    std::size_t cur = first_fail.load();
                    while (k < cur && !first_fail.compare_exchange_weak(cur, k)) {
                    }
                    break;
                }
            }
        } catch (...) {
            errors[job] = std::current_exception();
        }
    };

    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(work, j);
        for (auto& t : threads) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& f : found)
        for (auto& w : f) rep.witnesses.push_back(std::move(w));
    std::stable_sort(rep.witnesses.begin(), rep.witnesses.end(),
                     [](const auto& a, const auto& b) { return a.index < b.index; });
    if (!opt.exhaustive && rep.witnesses.size() > 1) rep.witnesses.resize(1);
    rep.pass = rep.witnesses.empty();
    return rep;
}

inline AuditReport check_IR(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::IR, s, o);
}
inline AuditReport check_strategy_proof(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::StrategyProof, s, o);
}
inline AuditReport check_truncation_invariance(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::TruncationInvariance, s, o);
}
inline AuditReport check_contraction_invariance(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::ContractionInvariance, s, o);
}
inline AuditReport check_contraction_above_invariance(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::ContractionAboveInvariance, s, o);
}
inline AuditReport check_size_invariance(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::SizeInvariance, s, o);
}
inline AuditReport satisfies_ETE(const Mechanism& m, const ProfileSet& s, AuditOptions o = {}) {
    return audit(m, Property::EqualTreatment, s, o);
}

/// Re-runs the witnessed transform and confirms the same violated inequality.
inline bool replay(const Mechanism& m, const AuditWitness& w) {
    auto truth = m(w.profile);
    if (!(truth == w.truthful_alloc)) return false;
    Rational a = detail::mass(truth, w.agent, w.columns);
    Rational b;
    if (w.report) {
        auto dev = m(w.profile.with_pref(w.agent, *w.report));
        if (!(dev == w.deviated_alloc)) return false;
        b = detail::mass(dev, w.agent, w.columns);
    } else if (w.property == Property::EqualTreatment) {
        std::size_t j = w.profile.agent_index(w.transform.substr(w.transform.rfind(' ') + 1));
        b = detail::mass(truth, j, w.columns);
    } else {
        b = 0;
    }
    if (a != w.truthful || b != w.deviated) return false;
    switch (w.property) {
        case Property::StrategyProof: return a < b;
        case Property::IR: return a > 0;
        default: return a != b;
    }
}

}  // namespace allocx
