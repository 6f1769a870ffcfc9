#pragma once

#include "risktree/bridge.hpp"
#include "risktree/consistency.hpp"
#include "risktree/dual_sampling.hpp"
#include "risktree/fixtures.hpp"
#include "risktree/riskproc.hpp"
#include "risktree/riskvec.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace risktree::cli {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    std::vector<std::string> errors;
    explicit ConfigError(std::vector<std::string> errs)
        : std::runtime_error(errs.empty() ? "invalid configuration" : errs.front()),
          errors(std::move(errs)) {}
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    int format_version = 1;
    std::string name;

    // scenario-space block
    int horizon = 1;
    std::vector<std::string> states;
    std::vector<std::vector<std::vector<int>>> partitions;
    std::vector<double> prob;
    std::vector<std::vector<double>> mu;  // empty: uniform 1/(T+1)

    // assets block
    int d = 1;
    int m = 1;

    // risk block
    std::string family = "worst_case";  // worst_case | broken | shifted
    double shift = 0.5;                 // generator offset for "shifted"

    // dual-sampling block
    int dual_samples = 30;
    int process_samples = 100;
    std::uint64_t seed = 0;

    std::string suite = "all";
    double tolerance = 1e-7;
    std::string mode = "float";  // float | rational
};

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {"axioms", "equivalence", "duality",
                                               "consistency", "all"};
    return s;
}

inline const std::vector<std::string>& known_families() {
    static const std::vector<std::string> s = {"worst_case", "broken", "shifted"};
    return s;
}

namespace detail {

inline bool contains(const std::vector<std::string>& v, const std::string& x) {
    for (const auto& e : v)
        if (e == x) return true;
    return false;
}

// refinement pre-check so schema errors can name the offending atoms
inline void check_refinement(const std::vector<std::vector<std::vector<int>>>& parts,
                             std::vector<std::string>& errors) {
    for (std::size_t t = 0; t + 1 < parts.size(); ++t) {
        for (std::size_t b = 0; b < parts[t + 1].size(); ++b) {
            const auto& fine = parts[t + 1][b];
            if (fine.empty()) continue;
            const std::vector<int>* coarse = nullptr;
            std::size_t ca = 0;
            for (std::size_t a = 0; a < parts[t].size(); ++a)
                for (int w : parts[t][a])
                    if (w == fine[0]) {
                        coarse = &parts[t][a];
                        ca = a;
                    }
            if (!coarse) continue;  // covered by the partition check
            for (int w : fine)
                if (std::find(coarse->begin(), coarse->end(), w) == coarse->end()) {
                    std::ostringstream os;
                    os << "partitions do not refine: atom " << b << " at time " << t + 1
                       << " is not contained in atom " << ca << " at time " << t;
                    errors.push_back(os.str());
                    return;
                }
        }
    }
}

}  // namespace detail

// Parse and validate a structured-text model file.  Throws ConfigError with
// one message per schema problem.
inline ModelConfig load_model(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> errors;
    if (!in) throw ConfigError({"cannot open config file: " + path});
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }

    ModelConfig cfg;
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        errors.push_back("missing integer field format_version");
    else if (j["format_version"].get<int>() != 1)
        errors.push_back("unsupported format_version (expected 1)");

    cfg.name = j.value("name", std::string());
    if (cfg.name.empty()) {
        auto slash = path.find_last_of('/');
        auto base = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = base.find_last_of('.');
        cfg.name = dot == std::string::npos ? base : base.substr(0, dot);
    }

    if (!j.contains("space") || !j["space"].is_object()) {
        errors.push_back("missing space block");
    } else {
        const auto& s = j["space"];
        try {
            cfg.horizon = s.at("horizon").get<int>();
            cfg.states = s.at("states").get<std::vector<std::string>>();
            cfg.partitions =
                s.at("partitions").get<std::vector<std::vector<std::vector<int>>>>();
            cfg.prob = s.at("prob").get<std::vector<double>>();
            if (s.contains("mu")) cfg.mu = s["mu"].get<std::vector<std::vector<double>>>();
        } catch (const nlohmann::json::exception& e) {
            errors.push_back(std::string("space block: ") + e.what());
        }
        const int n = static_cast<int>(cfg.states.size());
        for (int w = 0; w < n && cfg.prob.size() == cfg.states.size(); ++w)
            if (cfg.prob[w] <= 0.0)
                errors.push_back("prob must be strictly positive (state " +
                                 cfg.states[w] + ")");
        if (!cfg.prob.empty()) {
            double tot = 0.0;
            for (double p : cfg.prob) tot += p;
            if (std::abs(tot - 1.0) > 1e-9)
                errors.push_back("prob does not sum to 1 (normalization error)");
        }
        if (!cfg.mu.empty()) {
            if (static_cast<int>(cfg.mu.size()) != cfg.horizon + 1)
                errors.push_back("mu needs one row per time slice");
            for (int w = 0; w < n; ++w) {
                double tot = 0.0;
                bool sized = true;
                for (const auto& row : cfg.mu) {
                    if (static_cast<int>(row.size()) != n) {
                        sized = false;
                        break;
                    }
                    tot += row[w];
                }
                if (sized && std::abs(tot - 1.0) > 1e-9) {
                    errors.push_back("mu does not sum to 1 along path " +
                                     (w < n ? cfg.states[w] : std::to_string(w)) +
                                     " (normalization error)");
                    break;
                }
            }
        }
        detail::check_refinement(cfg.partitions, errors);
    }

    if (j.contains("assets")) {
        cfg.d = j["assets"].value("d", 1);
        cfg.m = j["assets"].value("m", 1);
    }
    if (cfg.d < 1 || cfg.m < 1 || cfg.m > cfg.d)
        errors.push_back("assets block requires 1 <= m <= d");

    if (j.contains("risk")) {
        cfg.family = j["risk"].value("family", std::string("worst_case"));
        cfg.shift = j["risk"].value("shift", 0.5);
    }
    if (!detail::contains(known_families(), cfg.family))
        errors.push_back("unknown risk family: " + cfg.family);
    else if (cfg.family == "broken" && (cfg.d < 2 || cfg.m < 2))
        errors.push_back(
            "risk family broken requires at least two eligible assets (d >= 2, m >= 2)");

    if (j.contains("sampling")) {
        cfg.dual_samples = j["sampling"].value("duals", 30);
        cfg.process_samples = j["sampling"].value("processes", 100);
        cfg.seed = j["sampling"].value("seed", 0);
    }
    if (cfg.dual_samples < 1 || cfg.process_samples < 1)
        errors.push_back("sampling counts must be positive");

    cfg.suite = j.value("suite", std::string("all"));
    if (!detail::contains(known_suites(), cfg.suite))
        errors.push_back("unknown suite: " + cfg.suite);
    cfg.tolerance = j.value("tolerance", 1e-7);
    if (cfg.tolerance <= 0.0) errors.push_back("tolerance must be positive");
    cfg.mode = j.value("mode", std::string("float"));
    if (cfg.mode != "float" && cfg.mode != "rational")
        errors.push_back("mode must be float or rational");

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

// ---------------------------------------------------------------------------
// check catalog
// ---------------------------------------------------------------------------

struct CheckInfo {
    const char* id;
    const char* suite;
    const char* anchor;
    const char* inputs;
    const char* procedure;
};

inline const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> cat = {
        {"axioms.process", "axioms", "Definition 2.1",
         "the configured acceptance family at every time t",
         "sampled battery: cash invariance, monotonicity, finiteness at zero, plus "
         "normalization/convexity/positive-homogeneity classification"},
        {"axioms.vector", "axioms", "Definition 2.5",
         "the lifted acceptance sets on the optional filtration",
         "same battery on bar atoms plus time decomposability of the evaluations"},
        {"equivalence.evaluation", "equivalence", "Theorem 3.1",
         "random processes against the augmented family and its lift",
         "per-atom LP set equality of the augmented evaluation and the lifted "
         "measure's evaluation; project-then-lift round trip on evaluations"},
        {"equivalence.acceptance", "equivalence", "Theorem 3.1",
         "random processes on every fixture space",
         "membership in the lifted set iff the tail is rho-accepted and each past "
         "slice is accepted by its restricted measure"},
        {"duality.process-outer", "duality", "Corollary 2.3",
         "sampled admissible dual variables (Q, w) and random arguments",
         "LP certificate that every evaluation is contained in each dual term"},
        {"duality.vector-outer", "duality", "Corollary 2.3",
         "sampled admissible optional dual variables (Qbar, wbar)",
         "LP certificate on bar atoms for the optional-filtration dual bound"},
        {"duality.coherent-exact", "duality", "Corollary 2.3",
         "the coherent worst-case cones with the Dirac facet family",
         "intersection of Dirac dual terms reproduces the evaluation exactly"},
        {"duality.penalty-decomposition", "duality", "Lemma 3.2",
         "sampled optional duals on the augmented family",
         "per-atom set equality of the lifted penalty with the slice penalties and "
         "the W_t-mapped tail penalty, plus both reverse identities"},
        {"duality.dual-roundtrip", "duality", "Lemma 3.2",
         "strictly positive sampled process duals",
         "componentwise equality of the weights and the w-maps after W_t applied "
         "to bar W_t"},
        {"consistency.process-mptc", "consistency", "Definition 2.4",
         "spliced comparison fixtures for the configured process family",
         "union-inclusion implication between the time-s and time-t evaluations "
         "(exact interval cover in one dimension, sampled probes otherwise)"},
        {"consistency.vector-mptc", "consistency", "Definition 2.7",
         "the mirrored fixtures on the lifted family",
         "union-inclusion implication for the same argument at both times"},
        {"consistency.equivalence", "consistency", "Theorem 4.2",
         "the augmented family and its lift over the shared fixture set",
         "joint multiportfolio time consistency verdict compared with the lifted "
         "measure's verdict in both directions"},
    };
    return cat;
}

inline std::string explain(const std::string& id) {
    for (const auto& c : check_catalog())
        if (id == c.id) {
            std::ostringstream os;
            os << "check:      " << c.id << "\n"
               << "anchor:     " << c.anchor << "\n"
               << "inputs:     " << c.inputs << "\n"
               << "procedure:  " << c.procedure << "\n";
            return os.str();
        }
    std::ostringstream os;
    os << "unknown check id: " << id << "\nvalid ids:";
    for (const auto& c : check_catalog()) os << "\n  " << c.id;
    throw UsageError(os.str());
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

struct CheckRecord {
    std::string id;
    std::string anchor;
    std::string status;  // pass | sampled | fail
    std::string witness;
    double seconds = 0.0;
};

struct Report {
    std::string model;
    std::string suite;
    std::string mode;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::vector<CheckRecord> checks;

    int count(const std::string& st) const {
        int n = 0;
        for (const auto& c : checks)
            if (c.status == st) ++n;
        return n;
    }
    bool ok() const { return count("fail") == 0; }

    // Deterministic machine rendering: no wall-clock content.
    std::string machine_json() const {
        nlohmann::ordered_json j;
        j["format_version"] = 1;
        j["model"] = model;
        j["suite"] = suite;
        j["mode"] = mode;
        j["seed"] = seed;
        j["tolerance"] = tolerance;
        j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json r;
            r["id"] = c.id;
            r["anchor"] = c.anchor;
            r["status"] = c.status;
            r["witness"] = c.witness;
            r["timing"] = "excluded-for-determinism";
            j["checks"].push_back(std::move(r));
        }
        j["summary"] = {{"pass", count("pass")},
                        {"sampled", count("sampled")},
                        {"fail", count("fail")},
                        {"total", static_cast<int>(checks.size())}};
        return j.dump(2) + "\n";
    }

    std::string human_text() const {
        std::ostringstream os;
        os << "model " << model << "  suite " << suite << "  mode " << mode << "  seed "
           << seed << "\n";
        for (const auto& c : checks) {
            os << "  [" << c.status << "] " << c.id << " (" << c.anchor << ") "
               << c.seconds << "s";
            if (!c.witness.empty()) os << "\n      " << c.witness;
            os << "\n";
        }
        os << "summary: " << count("pass") << " pass, " << count("sampled")
           << " sampled, " << count("fail") << " fail\n";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// suite execution
// ---------------------------------------------------------------------------

namespace detail {

struct Outcome {
    std::string status = "pass";
    std::string witness;
};

template <class S>
struct Context {
    space::ScenarioSpace<S> sp;
    space::OptionalSpace<S> osp;
    polyhedra::EligibleStructure el;
    std::vector<bridge::Augmented<S>> fam;                  // indexed by t
    std::vector<riskvec::VectorAcceptanceSet<S>> lifted;    // lift of fam[t]
    ModelConfig cfg;
    S eps;
};

template <class S>
space::ScenarioSpace<S> build_space(const ModelConfig& cfg) {
    Vec<S> prob;
    for (double p : cfg.prob) prob.push_back(Num<S>::from_double(p));
    std::vector<Vec<S>> mu;
    for (const auto& row : cfg.mu) {
        Vec<S> r;
        for (double v : row) r.push_back(Num<S>::from_double(v));
        mu.push_back(std::move(r));
    }
    return space::ScenarioSpace<S>(cfg.horizon, cfg.states, cfg.partitions, prob, mu);
}

template <class S>
riskproc::ProcessAcceptanceSet<S> slice_cone(const space::ScenarioSpace<S>& sp,
                                             int s,
                                             const polyhedra::EligibleStructure& el,
                                             const S& offset) {
    riskproc::ProcessAcceptanceSet<S> R;
    R.t = s;
    R.el = el;
    for (int a = 0; a < sp.num_atoms(s); ++a)
        for (int i = 0; i < el.d; ++i) {
            Generator<S> g;
            g.terms.push_back({{s, sp.atom_states(s, a)[0], i}, S(1)});
            g.offset = offset;
            R.gens.push_back(std::move(g));
        }
    return R;
}

// sum-of-assets cone: acceptance only requires the asset sum to clear zero
// on every slice, so losses in one asset can be compensated by the other
template <class S>
riskproc::ProcessAcceptanceSet<S> sum_cone(const space::ScenarioSpace<S>& sp,
                                           int t,
                                           const polyhedra::EligibleStructure& el) {
    riskproc::ProcessAcceptanceSet<S> A;
    A.t = t;
    A.el = el;
    for (int s = t; s <= sp.horizon(); ++s)
        for (int a = 0; a < sp.num_atoms(s); ++a) {
            Generator<S> g;
            for (int i = 0; i < el.d; ++i)
                g.terms.push_back({{s, sp.atom_states(s, a)[0], i}, S(1)});
            A.gens.push_back(std::move(g));
        }
    return A;
}

template <class S>
Context<S> build_context(const ModelConfig& cfg) {
    Context<S> ctx{build_space<S>(cfg),
                   space::OptionalSpace<S>(build_space<S>(cfg)),
                   {cfg.d, cfg.m},
                   {},
                   {},
                   cfg,
                   Num<S>::from_double(cfg.tolerance)};
    const auto& sp = ctx.sp;
    S offset = cfg.family == "shifted" ? Num<S>::from_double(-cfg.shift) : S(0);
    for (int t = 0; t <= sp.horizon(); ++t) {
        bridge::Augmented<S> aug;
        aug.rho = riskproc::worst_case_cone(sp, t, ctx.el);
        for (auto& g : aug.rho.gens) g.offset = offset;
        // "broken": later times only price the asset sum while time 0 prices
        // the assets componentwise
        if (cfg.family == "broken" && t >= 1) aug.rho = sum_cone(sp, t, ctx.el);
        for (int s = 0; s < t; ++s)
            aug.restricted.push_back(slice_cone(sp, s, ctx.el, offset));
        ctx.lifted.push_back(bridge::lift_acceptance(aug));
        ctx.fam.push_back(std::move(aug));
    }
    return ctx;
}

// whether every time slice of the family is a cone (Dirac exactness applies)
template <class S>
bool conical(const Context<S>& ctx) {
    for (const auto& aug : ctx.fam) {
        if (!aug.rho.is_cone(ctx.eps)) return false;
        for (const auto& R : aug.restricted)
            if (!R.is_cone(ctx.eps)) return false;
    }
    return true;
}

template <class S>
riskproc::ProcessDual<S> positive_process_dual(const space::ScenarioSpace<S>& sp,
                                               sampling::Rng<S>& rng,
                                               int t,
                                               const polyhedra::EligibleStructure& el) {
    riskproc::ProcessDual<S> out;
    out.t = t;
    const int n = sp.num_states();
    for (int s = t; s <= sp.horizon(); ++s) {
        space::VectorMeasure<S> Q;
        for (int i = 0; i < el.d; ++i) {
            space::Field<S> z(n);
            for (int w = 0; w < n; ++w) z[w] = S(1) + rng.ratio(0, 8, 8);
            auto e = sp.cond_exp(z, t);
            for (int w = 0; w < n; ++w) z[w] = z[w] / e[w];
            Q.densities.push_back(std::move(z));
        }
        space::VecField<S> w(n, zero_vec<S>(el.d));
        for (int a = 0; a < sp.num_atoms(t); ++a) {
            Vec<S> v(el.d);
            for (int i = 0; i < el.d; ++i)
                v[i] = Num<S>::from_ratio(1 + rng.index(8), 8);
            for (int st : sp.atom_states(t, a)) w[st] = v;
        }
        out.Q.push_back(std::move(Q));
        out.w.push_back(std::move(w));
    }
    return out;
}

// Shared consistency fixtures: a reflexive pair, a dominated pair, and the
// contrarian two-element family alternating +2/-3 across the time-1 atoms.
template <class S>
consistency::FixtureSet<S> build_fixtures(const Context<S>& ctx,
                                          sampling::Rng<S>& rng) {
    const auto& sp = ctx.sp;
    const int d = ctx.cfg.d;
    consistency::FixtureSet<S> fx;
    auto zero = space::AdaptedProcess<S>::zero(sp, d);

    auto dominating = sampling::random_process(sp, rng, d, 1);
    auto dom_up = dominating;
    for (auto& slice : dom_up.vals)
        for (auto& v : slice)
            for (auto& c : v) c += S(1);
    fx.process.push_back({zero, zero, {zero}, 0, 1});
    fx.process.push_back({zero, dominating, {dom_up}, 0, 1});

    if (sp.num_atoms(1) >= 2) {
        auto mk = [&](bool flip) {
            auto Y = space::AdaptedProcess<S>::zero(sp, d);
            for (int s = 1; s <= sp.horizon(); ++s)
                for (int a = 0; a < sp.num_atoms(1); ++a) {
                    S v = ((a % 2 == 0) != flip) ? S(2) : S(-3);
                    for (int w : sp.atom_states(1, a))
                        for (int i = 0; i < d; ++i) Y.vals[s][w][i] = v;
                }
            return Y;
        };
        auto Ya = mk(false), Yb = mk(true);
        fx.process.push_back({zero, zero, {Ya, Yb}, 0, 1});
        fx.vectors.push_back({zero, {Ya, Yb}, 0, 1});
    }
    if (d >= 2) {
        // sum-acceptable but not componentwise acceptable tail
        auto Ysum = space::AdaptedProcess<S>::zero(sp, d);
        for (int s = 1; s <= sp.horizon(); ++s)
            for (int w = 0; w < sp.num_states(); ++w) {
                Ysum.vals[s][w][0] = S(3);
                Ysum.vals[s][w][1] = S(-2);
            }
        fx.process.push_back({zero, zero, {Ysum}, 0, 1});
        fx.vectors.push_back({zero, {Ysum}, 0, 1});
    }
    fx.vectors.push_back({zero, {zero}, 0, 1});

    consistency::JointSliceFixture<S> sfx;
    sfx.t = 0;
    sfx.s = 1;
    sfx.X = {space::VecField<S>(sp.num_states(), zero_vec<S>(d))};
    Vec<S> ones(d, S(1));
    sfx.B = {{space::VecField<S>(sp.num_states(), ones)}};
    sfx.Z = zero;
    fx.slices.push_back(std::move(sfx));
    if (sp.horizon() >= 2) {
        consistency::JointCrossFixture<S> cfx;
        cfx.r = 0;
        cfx.t = 1;
        cfx.s = 2;
        cfx.X = space::VecField<S>(sp.num_states(), zero_vec<S>(d));
        cfx.B = {space::VecField<S>(sp.num_states(), ones)};
        fx.cross.push_back(std::move(cfx));
    }
    return fx;
}

template <class S>
Outcome check_axioms_process(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    std::ostringstream notes;
    for (int t = 0; t <= ctx.sp.horizon(); ++t) {
        auto rep = riskproc::check_axioms_process(ctx.sp, ctx.fam[t].rho, rng, 25, ctx.eps);
        struct Named {
            const char* name;
            const riskproc::AxiomResult* r;
            bool core;
        };
        const Named axs[] = {{"cash_invariant", &rep.cash_invariant, true},
                             {"monotone", &rep.monotone, true},
                             {"finite_at_zero", &rep.finite_at_zero, true},
                             {"normalized", &rep.normalized, false},
                             {"convex", &rep.convex, false},
                             {"pos_hom", &rep.pos_hom, false}};
        for (const auto& ax : axs) {
            if (ax.r->pass) continue;
            if (ax.core) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + " " + ax.name + ": " +
                              ax.r->witness;
                return out;
            }
            notes << (notes.str().empty() ? "" : "; ") << "t=" << t << " not "
                  << ax.name;
        }
    }
    out.witness = notes.str();
    return out;
}

template <class S>
Outcome check_axioms_vector(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    std::ostringstream notes;
    for (int t = 0; t <= ctx.sp.horizon(); ++t) {
        auto rep = riskvec::check_axioms_vector(ctx.osp, ctx.lifted[t], rng, 25, ctx.eps);
        struct Named {
            const char* name;
            const riskproc::AxiomResult* r;
            bool core;
        };
        const Named axs[] = {{"cash_invariant", &rep.cash_invariant, true},
                             {"monotone", &rep.monotone, true},
                             {"finite_at_zero", &rep.finite_at_zero, true},
                             {"time_decomposable", &rep.time_decomposable, true},
                             {"normalized", &rep.normalized, false},
                             {"convex", &rep.convex, false},
                             {"pos_hom", &rep.pos_hom, false}};
        for (const auto& ax : axs) {
            if (ax.r->pass) continue;
            if (ax.core) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + " " + ax.name + ": " +
                              ax.r->witness;
                return out;
            }
            notes << (notes.str().empty() ? "" : "; ") << "t=" << t << " not "
                  << ax.name;
        }
    }
    out.witness = notes.str();
    return out;
}

template <class S>
Outcome check_equivalence_evaluation(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    const auto& sp = ctx.sp;
    const int reps = std::max(5, ctx.cfg.process_samples / 20);
    for (int k = 0; k < reps; ++k) {
        auto X = sampling::random_process(sp, rng, ctx.cfg.d);
        for (int t = 0; t <= sp.horizon(); ++t) {
            auto via_lift = riskvec::rbar_eval(ctx.osp, ctx.lifted[t], X, ctx.eps);
            auto direct = bridge::lift_eval(ctx.osp, ctx.fam[t], X, ctx.eps);
            if (!via_lift.set_equals(direct, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) +
                              ": lifted evaluation differs from the augmented one";
                return out;
            }
            auto back = bridge::project_acceptance(ctx.lifted[t]);
            auto rt = bridge::lift_eval(ctx.osp, back, X, ctx.eps);
            if (!rt.set_equals(direct, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) +
                              ": project-then-lift changed the evaluation";
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_equivalence_acceptance(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    const auto& sp = ctx.sp;
    for (int k = 0; k < ctx.cfg.process_samples; ++k) {
        auto X = sampling::random_process(sp, rng, ctx.cfg.d);
        for (int t = 0; t <= sp.horizon(); ++t) {
            bool bar = riskvec::accepts(ctx.lifted[t], X, ctx.eps);
            bool aug = riskproc::accepts(ctx.fam[t].rho,
                                         space::project_process(sp, X, t), ctx.eps);
            for (int s = 0; s < t && aug; ++s) {
                auto rs = riskvec::restricted_eval(sp, ctx.fam[t].restricted[s],
                                                   X.vals[s], ctx.eps);
                for (int a = 0; a < rs.num_atoms() && aug; ++a)
                    if (!rs.atom(a).contains(zero_vec<S>(ctx.cfg.m), ctx.eps))
                        aug = false;
            }
            if (bar != aug) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + " sample " + std::to_string(k) +
                              ": lifted membership " + (bar ? "true" : "false") +
                              " vs augmented " + (aug ? "true" : "false");
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_process_outer(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    const auto& sp = ctx.sp;
    for (int t = 0; t <= sp.horizon(); ++t) {
        int used = 0;
        for (int k = 0; k < ctx.cfg.dual_samples && used < ctx.cfg.dual_samples; ++k) {
            auto dual = sampling::random_process_dual(sp, rng, t, ctx.el);
            if (!riskproc::in_Wt(sp, dual, ctx.el, ctx.eps)) continue;
            ++used;
            auto X = sampling::random_process(sp, rng, ctx.cfg.d);
            auto lhs = riskproc::rho_eval(sp, ctx.fam[t].rho, X, ctx.eps);
            auto term = riskproc::dual_term_process(sp, ctx.fam[t].rho, X, dual, ctx.eps);
            if (!lhs.subset_of(term, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + " dual " + std::to_string(k) +
                              ": evaluation escapes the dual term";
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_vector_outer(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    for (int t = 0; t <= ctx.sp.horizon(); ++t) {
        for (int k = 0; k < ctx.cfg.dual_samples; ++k) {
            auto dual = sampling::random_vector_dual(ctx.osp, rng, t, ctx.el, ctx.eps);
            if (!riskvec::in_Wbart(ctx.osp, dual, ctx.el, ctx.eps)) continue;
            auto X = sampling::random_process(ctx.sp, rng, ctx.cfg.d);
            auto lhs = riskvec::rbar_eval(ctx.osp, ctx.lifted[t], X, ctx.eps);
            auto term =
                riskvec::dual_term_vector(ctx.osp, ctx.lifted[t], X, dual, ctx.eps);
            if (!lhs.subset_of(term, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + " dual " + std::to_string(k) +
                              ": bar evaluation escapes the dual term";
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_coherent_exact(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    if (!conical(ctx) && ctx.cfg.family != "broken") {
        out.witness = "not applicable: family is not a cone; outer bound still verified";
        return out;
    }
    const auto& sp = ctx.sp;
    for (int t = 0; t <= sp.horizon(); ++t) {
        if (!ctx.fam[t].rho.is_cone(ctx.eps)) continue;  // skip non-conical slices
        bool worst_case_slice = true;
        for (const auto& g : ctx.fam[t].rho.gens)
            if (g.terms.size() != 1) worst_case_slice = false;
        if (!worst_case_slice) continue;
        auto pduals = sampling::dirac_process_duals(sp, t);
        auto vduals = sampling::dirac_vector_duals(ctx.osp, t, ctx.eps);
        for (int k = 0; k < 8; ++k) {
            auto X = sampling::random_process(sp, rng, ctx.cfg.d);
            auto lhs = riskproc::rho_eval(sp, ctx.fam[t].rho, X, ctx.eps);
            auto rhs = riskproc::dual_eval_process(sp, ctx.fam[t].rho, X, pduals, ctx.eps);
            if (!lhs.set_equals(rhs, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + ": Dirac family inexact (process)";
                return out;
            }
            auto blhs = riskvec::rbar_eval(ctx.osp, ctx.lifted[t], X, ctx.eps);
            auto brhs =
                riskvec::dual_eval_vector(ctx.osp, ctx.lifted[t], X, vduals, ctx.eps);
            if (!blhs.set_equals(brhs, ctx.eps * S(100))) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + ": Dirac family inexact (vector)";
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_penalty_decomposition(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    const auto& sp = ctx.sp;
    for (int t = 1; t <= sp.horizon(); ++t) {
        int used = 0;
        for (int k = 0; k < 3 * ctx.cfg.dual_samples && used < ctx.cfg.dual_samples;
             ++k) {
            auto vdual = sampling::random_vector_dual(ctx.osp, rng, t, ctx.el, ctx.eps);
            if (!riskvec::in_Wbart(ctx.osp, vdual, ctx.el, ctx.eps)) continue;
            ++used;
            auto rep = bridge::penalty_decompose_check(ctx.osp, ctx.fam[t], vdual, ctx.eps);
            if (!rep.forward) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + ": " + rep.witness;
                return out;
            }
        }
        for (int s = 0; s < t; ++s) {
            space::VecField<S> w(sp.num_states(), zero_vec<S>(ctx.cfg.d));
            for (int a = 0; a < sp.num_atoms(s); ++a) {
                Vec<S> v(ctx.cfg.d);
                for (int i = 0; i < ctx.cfg.d; ++i)
                    v[i] = Num<S>::from_ratio(1 + rng.index(6), 4);
                for (int st : sp.atom_states(s, a)) w[st] = v;
            }
            if (!bridge::penalty_reverse_slice_check(ctx.osp, ctx.fam[t], s, w, ctx.eps)) {
                out.status = "fail";
                out.witness =
                    "t=" + std::to_string(t) + " slice " + std::to_string(s) +
                    ": reverse slice identity failed";
                return out;
            }
        }
        for (int k = 0; k < 5; ++k) {
            auto pdual = positive_process_dual(sp, rng, t, ctx.el);
            if (!bridge::penalty_reverse_tail_check(ctx.osp, ctx.fam[t], pdual, ctx.eps)) {
                out.status = "fail";
                out.witness = "t=" + std::to_string(t) + ": reverse tail identity failed";
                return out;
            }
        }
    }
    return out;
}

template <class S>
Outcome check_dual_roundtrip(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    const auto& sp = ctx.sp;
    const S tol = Num<S>::from_double(1e-9);
    for (int t = 0; t <= sp.horizon(); ++t) {
        for (int k = 0; k < ctx.cfg.dual_samples; ++k) {
            auto pdual = positive_process_dual(sp, rng, t, ctx.el);
            auto vdual = bridge::map_dual_to_vector(ctx.osp, pdual, ctx.el, ctx.eps);
            auto back = bridge::map_dual_to_process(ctx.osp, vdual, ctx.el);
            for (int s = t; s <= sp.horizon(); ++s) {
                auto w1 = riskproc::dual_w_map(sp, pdual, s);
                auto w2 = riskproc::dual_w_map(sp, back, s);
                for (int w = 0; w < sp.num_states(); ++w)
                    for (int i = 0; i < ctx.cfg.d; ++i) {
                        if (Num<S>::abs(back.w[s - t][w][i] - pdual.w[s - t][w][i]) >
                                tol ||
                            Num<S>::abs(w2[w][i] - w1[w][i]) > tol) {
                            out.status = "fail";
                            out.witness = "t=" + std::to_string(t) + " slice " +
                                          std::to_string(s) +
                                          ": round trip drifted beyond 1e-9";
                            return out;
                        }
                    }
            }
        }
    }
    return out;
}

template <class S>
Outcome from_mptc(const consistency::MptcReport<S>& rep) {
    Outcome out;
    if (!rep.holds()) {
        out.status = "fail";
        for (const auto& item : rep.items)
            if (item.violated()) {
                out.witness = item.witness;
                break;
            }
    } else if (!rep.exact()) {
        out.status = "sampled";
    }
    return out;
}

template <class S>
Outcome check_process_mptc(const Context<S>& ctx, sampling::Rng<S>& rng) {
    auto fx = build_fixtures(ctx, rng);
    std::vector<riskproc::ProcessAcceptanceSet<S>> rhos;
    for (const auto& aug : ctx.fam) rhos.push_back(aug.rho);
    auto rep = consistency::check_mptc_process(ctx.sp, rhos, fx.process, rng,
                                               ctx.cfg.process_samples, ctx.eps);
    return from_mptc<S>(rep);
}

template <class S>
Outcome check_vector_mptc(const Context<S>& ctx, sampling::Rng<S>& rng) {
    auto fx = build_fixtures(ctx, rng);
    auto rep = consistency::check_mptc_vector(ctx.osp, ctx.lifted, fx.vectors, rng,
                                              ctx.cfg.process_samples, ctx.eps);
    return from_mptc<S>(rep);
}

template <class S>
Outcome check_consistency_equivalence(const Context<S>& ctx, sampling::Rng<S>& rng) {
    Outcome out;
    auto fx = build_fixtures(ctx, rng);
    auto rep = consistency::equivalence_harness(ctx.osp, ctx.fam, fx, rng,
                                                ctx.cfg.process_samples, ctx.eps);
    std::ostringstream os;
    os << "joint " << (rep.joint.holds() ? "holds" : "violated") << ", lifted "
       << (rep.lifted.holds() ? "holds" : "violated");
    out.witness = os.str();
    if (!rep.agree()) {
        out.status = "fail";
        out.witness = "verdicts disagree: " + out.witness;
    }
    return out;
}

template <class S>
Outcome run_check(const Context<S>& ctx, const std::string& id, sampling::Rng<S>& rng) {
    if (id == "axioms.process") return check_axioms_process(ctx, rng);
    if (id == "axioms.vector") return check_axioms_vector(ctx, rng);
    if (id == "equivalence.evaluation") return check_equivalence_evaluation(ctx, rng);
    if (id == "equivalence.acceptance") return check_equivalence_acceptance(ctx, rng);
    if (id == "duality.process-outer") return check_process_outer(ctx, rng);
    if (id == "duality.vector-outer") return check_vector_outer(ctx, rng);
    if (id == "duality.coherent-exact") return check_coherent_exact(ctx, rng);
    if (id == "duality.penalty-decomposition")
        return check_penalty_decomposition(ctx, rng);
    if (id == "duality.dual-roundtrip") return check_dual_roundtrip(ctx, rng);
    if (id == "consistency.process-mptc") return check_process_mptc(ctx, rng);
    if (id == "consistency.vector-mptc") return check_vector_mptc(ctx, rng);
    if (id == "consistency.equivalence") return check_consistency_equivalence(ctx, rng);
    throw UsageError("unknown check id: " + id);
}

inline int worker_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("RISKTREE_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = v;
    }
    return cap;
}

template <class S>
Report run_suite_typed(const ModelConfig& cfg, const std::string& suite) {
    Report rep;
    rep.model = cfg.name;
    rep.suite = suite;
    rep.mode = cfg.mode;
    rep.seed = cfg.seed;
    rep.tolerance = cfg.tolerance;

    auto ctx = build_context<S>(cfg);
    std::vector<const CheckInfo*> selected;
    for (const auto& c : check_catalog())
        if (suite == "all" || suite == c.suite) selected.push_back(&c);

    rep.checks.resize(selected.size());
    const int cap = worker_cap();
    std::size_t next = 0;
    while (next < selected.size()) {
        std::size_t batch = std::min<std::size_t>(cap, selected.size() - next);
        std::vector<std::future<void>> fut;
        for (std::size_t b = 0; b < batch; ++b) {
            std::size_t idx = next + b;
            fut.push_back(std::async(std::launch::async, [&, idx] {
                const auto& info = *selected[idx];
                // deterministic per-check seed, independent of scheduling
                sampling::Rng<S> rng(cfg.seed * 1000003ULL + idx + 1);
                auto start = std::chrono::steady_clock::now();
                Outcome o = run_check(ctx, info.id, rng);
                auto stop = std::chrono::steady_clock::now();
                CheckRecord r;
                r.id = info.id;
                r.anchor = info.anchor;
                r.status = o.status;
                r.witness = o.witness;
                r.seconds = std::chrono::duration<double>(stop - start).count();
                rep.checks[idx] = std::move(r);
            }));
        }
        for (auto& f : fut) f.get();
        next += batch;
    }
    return rep;
}

}  // namespace detail

// Execute a suite on a validated config.  Throws UsageError for unknown or
// empty suite selections.
inline Report run_suite(const ModelConfig& cfg, const std::string& suite) {
    if (suite.empty()) throw UsageError("empty suite selection");
    if (!detail::contains(known_suites(), suite))
        throw UsageError("unknown suite: " + suite);
    if (cfg.mode == "rational") return detail::run_suite_typed<Rational>(cfg, suite);
    return detail::run_suite_typed<double>(cfg, suite);
}

}  // namespace risktree::cli
