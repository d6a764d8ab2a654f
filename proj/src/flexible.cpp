#include "tpg/flexible.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tpg/solver.hpp"

namespace tpg {

const FlexibleTimeline* FlexiblePlan::find(VarId var) const
{
    for (const auto& tl : timelines)
        if (tl.var == var) return &tl;
    return nullptr;
}

namespace {

bool var_ok(const Variables& vars, VarId x) { return x >= 0 && static_cast<std::size_t>(x) < vars.size(); }

std::string tok_label(const Variables& vars, VarId x, std::size_t i)
{
    return "token " + std::to_string(i + 1) + " of " + vars[x].name;
}

} // namespace

Report check_nesting(const Variables& vars, const FlexibleTimeline& tl)
{
    if (!var_ok(vars, tl.var)) return Report::fail("flexible timeline on an undeclared variable");
    const auto& var = vars[tl.var];
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
        const auto& t = tl.tokens[i];
        if (t.value < 0 || static_cast<std::size_t>(t.value) >= var.values.size())
            return Report::fail(tok_label(vars, tl.var, i) + " has an undeclared value");
        if (t.end.empty() || t.duration.empty())
            return Report::fail(tok_label(vars, tl.var, i) + " has an empty window");
        if (t.duration.lo < 1)
            return Report::fail(tok_label(vars, tl.var, i) + " allows a non-positive duration");
        if (i == 0) {
            if (!(t.end == t.duration))
                return Report::fail("first token of " + var.name + ": end window " + t.end.str() +
                                    " must equal its duration window " + t.duration.str());
            continue;
        }
        const auto& p = tl.tokens[i - 1];
        Interval allowed{p.end.lo + t.duration.lo, p.end.hi.plus(t.duration.hi)};
        if (!t.end.within(allowed))
            return Report::fail(tok_label(vars, tl.var, i) + ": end window " + t.end.str() +
                                " is not within [e+d, e'+d'] = " + allowed.str() +
                                " of the previous end window and its own duration window");
    }
    return Report::pass();
}

Report check_flexible_plan(const Variables& vars, const FlexiblePlan& plan)
{
    std::set<VarId> seen;
    for (const auto& tl : plan.timelines) {
        if (auto r = check_nesting(vars, tl); !r) return r;
        if (!seen.insert(tl.var).second)
            return Report::fail("two flexible timelines for variable " + vars[tl.var].name);
    }
    auto term_ok = [&](const FlexTerm& t) {
        const auto* tl = plan.find(t.var);
        return tl && t.index < tl->tokens.size();
    };
    for (const auto& a : plan.constraints) {
        if (a.bounds.empty()) return Report::fail("empty bound interval in a plan constraint");
        if (!term_ok(a.left) || (!a.pointwise && !term_ok(a.right)))
            return Report::fail("constraint refers to a token that is not in the plan");
    }
    return Report::pass();
}

Report check_problem(const ProblemWithUncertainty& p)
{
    std::set<std::string> names;
    for (const auto& v : p.vars) {
        if (auto e = v.check(); !e.empty()) return Report::fail(e);
        if (!names.insert(v.name).second) return Report::fail("duplicate variable '" + v.name + "'");
    }
    for (const auto& r : p.rules)
        if (auto e = check_rule(r, p.vars); !e.empty()) return Report::fail(e);
    for (const auto& tl : p.observation.timelines)
        if (var_ok(p.vars, tl.var) && p.vars[tl.var].side != Side::external)
            return Report::fail("observation mentions controlled variable " + p.vars[tl.var].name);
    return check_flexible_plan(p.vars, p.observation);
}

bool is_instance(const FlexibleTimeline& flex, VarId var, const Timeline& sched)
{
    if (flex.var != var)
        throw InstanceMismatch(InstanceMismatch::Kind::variable,
                               "flexible timeline and scheduled timeline are on different variables");
    if (sched.is_open() || flex.tokens.size() != sched.size())
        throw InstanceMismatch(InstanceMismatch::Kind::length,
                               "flexible timeline has " + std::to_string(flex.tokens.size()) +
                                   " tokens, scheduled timeline has " + std::to_string(sched.size()) +
                                   (sched.is_open() ? " and an open tail" : ""));
    for (std::size_t i = 0; i < sched.size(); ++i) {
        const auto& f = flex.tokens[i];
        const auto& t = sched.tokens()[i];
        if (f.value != t.value || !f.duration.contains(t.duration) || !f.end.contains(sched.end(i)))
            return false;
    }
    return true;
}

bool flex_atom_holds(const FlexAtom& a, const ScheduledPlan& plan)
{
    auto time = [&](const FlexTerm& t) {
        Span s = plan.timelines.at(t.var).span(t.index);
        return t.ep == Endpoint::start ? s.start : s.end;
    };
    Time l = time(a.left);
    return a.bounds.contains(a.pointwise ? a.instant - l : time(a.right) - l);
}

std::size_t default_instance_budget()
{
    if (const char* v = std::getenv("TPG_INSTANCE_BUDGET")) {
        char* end = nullptr;
        unsigned long long n = std::strtoull(v, &end, 10);
        if (end != v && n > 0) return static_cast<std::size_t>(n);
    }
    return 1000000;
}

namespace {

struct Enumerator {
    const FlexiblePlan& plan;
    Time cap;
    std::size_t budget;
    const std::function<bool(const ScheduledPlan&)>& fn;
    std::vector<std::pair<std::size_t, std::size_t>> order; // (timeline, token)
    std::vector<std::vector<const FlexAtom*>> by_level;
    ScheduledPlan cur;
    EnumerationStats stats;
    std::size_t nodes = 0;

    Enumerator(const FlexiblePlan& p, std::size_t nvars, Time c, std::size_t b,
               const std::function<bool(const ScheduledPlan&)>& f)
        : plan(p), cap(c), budget(b), fn(f)
    {
        std::map<std::pair<VarId, std::size_t>, std::size_t> pos;
        for (std::size_t t = 0; t < plan.timelines.size(); ++t)
            for (std::size_t i = 0; i < plan.timelines[t].tokens.size(); ++i) {
                pos[{plan.timelines[t].var, i}] = order.size();
                order.push_back({t, i});
            }
        by_level.resize(order.size() + 1);
        for (const auto& a : plan.constraints) {
            std::size_t lvl = pos.at({a.left.var, a.left.index});
            if (!a.pointwise) lvl = std::max(lvl, pos.at({a.right.var, a.right.index}));
            by_level[lvl].push_back(&a);
        }
        cur.timelines.resize(nvars);
    }

    bool rec(std::size_t k)
    {
        if (++nodes > budget * 64 + 1024) throw BudgetExceeded("instance enumeration budget exhausted");
        if (k == order.size()) {
            if (++stats.instances > budget) throw BudgetExceeded("instance budget exhausted");
            return fn(cur);
        }
        const auto& ftl = plan.timelines[order[k].first];
        const auto& tok = ftl.tokens[order[k].second];
        Timeline& tl = cur.timelines.at(ftl.var);
        Time prev = tl.horizon();
        Time hi;
        if (tok.duration.hi.is_finite()) {
            hi = tok.duration.hi.value();
        } else {
            if (cap <= 0) throw Error("unbounded duration window needs a cap");
            stats.capped = true;
            hi = std::max(cap, tok.duration.lo);
        }
        for (Time d = tok.duration.lo; d <= hi; ++d) {
            Time end = prev + d;
            if (end < tok.end.lo) continue;
            if (tok.end.hi < end) break;
            tl.push({tok.value, d});
            bool ok = std::all_of(by_level[k].begin(), by_level[k].end(),
                                  [&](const FlexAtom* a) { return flex_atom_holds(*a, cur); });
            bool go = !ok || rec(k + 1);
            tl.pop();
            if (!go) return false;
        }
        return true;
    }
};

} // namespace

EnumerationStats enumerate_instances(const FlexiblePlan& plan, std::size_t nvars, Time cap,
                                     std::size_t budget,
                                     const std::function<bool(const ScheduledPlan&)>& fn)
{
    Enumerator e(plan, nvars, cap, budget == 0 ? default_instance_budget() : budget, fn);
    e.rec(0);
    return e.stats;
}

const char* to_string(FlexVerdict::Kind k)
{
    switch (k) {
    case FlexVerdict::Kind::solution: return "solution";
    case FlexVerdict::Kind::not_solution: return "not-solution";
    case FlexVerdict::Kind::likely: return "likely";
    default: return "unknown";
    }
}

namespace {

Time window_cap(const Game& g)
{
    std::uint64_t w = window(g);
    return w > static_cast<std::uint64_t>(time_max) ? time_max : static_cast<Time>(w);
}

// Durations that a flexible solution must leave open: every external token and
// every uncontrollable controlled token.
std::vector<Time> coverage_key(const Variables& vars, const FlexiblePlan& cand, const ScheduledPlan& sp)
{
    std::vector<Time> k;
    for (const auto& tl : cand.timelines) {
        const auto& toks = sp.timelines[tl.var].tokens();
        bool ext = vars[tl.var].side == Side::external;
        for (std::size_t i = 0; i < tl.tokens.size(); ++i)
            if (ext || vars[tl.var].control(tl.tokens[i].value) == Control::uncontrollable)
                k.push_back(toks[i].duration);
    }
    return k;
}

std::string describe(const Variables& vars, const ScheduledPlan& sp)
{
    std::string s;
    for (std::size_t x = 0; x < sp.timelines.size(); ++x) {
        if (sp.timelines[x].size() == 0) continue;
        if (!s.empty()) s += "; ";
        s += vars[x].name + ":";
        for (const auto& t : sp.timelines[x].tokens())
            s += " " + vars[x].value_name(t.value) + "/" + std::to_string(t.duration);
    }
    return s.empty() ? "empty plan" : s;
}

// Tokens of controlled timelines with uncontrollable values, as (var, index).
std::vector<std::pair<VarId, std::size_t>> uncontrollable_controlled(const Variables& vars,
                                                                    const FlexiblePlan& cand)
{
    std::vector<std::pair<VarId, std::size_t>> out;
    for (const auto& tl : cand.timelines)
        if (vars[tl.var].side == Side::controlled)
            for (std::size_t i = 0; i < tl.tokens.size(); ++i)
                if (vars[tl.var].control(tl.tokens[i].value) == Control::uncontrollable)
                    out.push_back({tl.var, i});
    return out;
}

} // namespace

FlexVerdict is_flexible_solution(const ProblemWithUncertainty& problem, const FlexiblePlan& cand,
                                 const FlexOptions& opts)
{
    FlexVerdict v;
    const Variables& vars = problem.vars;
    auto fail = [&](int cond, std::string msg) {
        v.kind = FlexVerdict::Kind::not_solution;
        v.condition = cond;
        v.message = std::move(msg);
        return v;
    };

    for (const auto& otl : problem.observation.timelines) {
        const auto* ctl = cand.find(otl.var);
        if (!ctl) return fail(1, "candidate has no timeline for observed variable " + vars[otl.var].name);
        if (!(*ctl == otl))
            return fail(1, "candidate timeline for " + vars[otl.var].name + " differs from the observation");
    }
    for (const auto& oa : problem.observation.constraints)
        if (std::find(cand.constraints.begin(), cand.constraints.end(), oa) == cand.constraints.end())
            return fail(1, "candidate drops an observation constraint");

    if (auto r = check_flexible_plan(vars, cand); !r) return fail(0, r.message);
    for (std::size_t x = 0; x < vars.size(); ++x)
        if (!cand.find(static_cast<VarId>(x)))
            return fail(0, "candidate has no timeline for variable " + vars[x].name);

    for (const auto& tl : cand.timelines)
        for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
            const auto& t = tl.tokens[i];
            const auto& var = vars[tl.var];
            if (var.control(t.value) == Control::uncontrollable && !(t.duration == var.duration(t.value)))
                return fail(2, tok_label(vars, tl.var, i) + " (" + var.value_name(t.value) +
                                   ") restricts an uncontrollable duration to " + t.duration.str() +
                                   " instead of " + var.duration(t.value).str());
        }

    const std::size_t budget = opts.budget ? opts.budget : default_instance_budget();
    Time cap = opts.cap;
    if (cap <= 0) cap = window_cap(associate_game(problem));
    Problem p{vars, problem.rules};

    std::set<std::vector<Time>> realized;
    bool exhausted = false;
    try {
        auto st = enumerate_instances(cand, vars.size(), cap, budget, [&](const ScheduledPlan& sp) {
            realized.insert(coverage_key(vars, cand, sp));
            if (!is_solution_plan(p, sp)) {
                v.counterexample = sp;
                return false;
            }
            return true;
        });
        v.instances = st.instances;
        v.capped = st.capped;
    } catch (const BudgetExceeded&) {
        exhausted = true;
    }

    if (exhausted) {
        // Random sampling of instances; success only downgrades to "likely".
        std::mt19937_64 rng(opts.seed);
        std::size_t sampled = 0;
        for (std::size_t attempt = 0; attempt < 200000 && sampled < 10000; ++attempt) {
            ScheduledPlan sp;
            sp.timelines.resize(vars.size());
            bool ok = true;
            for (const auto& tl : cand.timelines) {
                for (const auto& t : tl.tokens) {
                    Time hi = t.duration.hi.is_finite() ? t.duration.hi.value() : std::max(cap, t.duration.lo);
                    Time d = std::uniform_int_distribution<Time>(t.duration.lo, hi)(rng);
                    sp.timelines[tl.var].push({t.value, d});
                    if (!t.end.contains(sp.timelines[tl.var].horizon())) ok = false;
                }
            }
            for (const auto& a : cand.constraints)
                if (ok && !flex_atom_holds(a, sp)) ok = false;
            if (!ok) continue;
            ++sampled;
            if (!is_solution_plan(p, sp)) {
                v.counterexample = sp;
                break;
            }
        }
        v.instances = sampled;
        if (!v.counterexample) {
            v.kind = sampled ? FlexVerdict::Kind::likely : FlexVerdict::Kind::unknown;
            v.message = sampled ? "instance budget exceeded; " + std::to_string(sampled) +
                                      " sampled instances are solutions"
                                : "instance budget exceeded and no instance was sampled";
            return v;
        }
    }

    if (v.counterexample) {
        auto rep = check_solution(p, *v.counterexample);
        std::string why = rep.violations.empty() ? "not a solution" : rep.violations.front().message;
        return fail(3, "instance " + describe(vars, *v.counterexample) + " is not a solution: " + why);
    }
    if (v.instances == 0) return fail(3, "the candidate has no instance");

    // Every observed behaviour combined with every uncontrollable duration must
    // remain possible; atoms in R may not rule any of them out.
    auto unc = uncontrollable_controlled(vars, cand);
    std::size_t required = 0;
    std::optional<std::string> missing;
    try {
        enumerate_instances(problem.observation, vars.size(), cap, budget, [&](const ScheduledPlan& oi) {
            ScheduledPlan sp = oi;
            for (const auto& tl : cand.timelines)
                if (vars[tl.var].side == Side::controlled)
                    for (const auto& t : tl.tokens) sp.timelines[tl.var].push({t.value, t.duration.lo});
            std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
                if (k == unc.size()) {
                    if (++required > budget) throw BudgetExceeded("coverage budget exhausted");
                    if (!realized.count(coverage_key(vars, cand, sp))) {
                        missing = describe(vars, sp);
                        return false;
                    }
                    return true;
                }
                auto [x, i] = unc[k];
                const auto& d = vars[x].duration(sp.timelines[x].tokens()[i].value);
                Time hi = d.hi.is_finite() ? d.hi.value() : std::max(cap, d.lo);
                for (Time dur = d.lo; dur <= hi; ++dur) {
                    std::vector<Token> toks = sp.timelines[x].tokens();
                    toks[i].duration = dur;
                    Timeline saved = sp.timelines[x];
                    sp.timelines[x] = Timeline(toks);
                    bool go = rec(k + 1);
                    sp.timelines[x] = saved;
                    if (!go) return false;
                }
                return true;
            };
            return rec(0);
        });
    } catch (const BudgetExceeded&) {
        v.kind = FlexVerdict::Kind::likely;
        v.message = "all instances are solutions; coverage of uncontrollable durations not fully checked";
        return v;
    }
    if (missing)
        return fail(2, "the plan rules out the uncontrollable or observed durations " + *missing);

    v.kind = FlexVerdict::Kind::solution;
    v.message = std::to_string(v.instances) + " instances, all solutions";
    return v;
}

Game associate_game(const ProblemWithUncertainty& problem)
{
    const auto& obs = problem.observation;
    const std::size_t n = obs.timelines.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = root(parent[i]);
    };
    auto tl_index = [&](VarId var) {
        for (std::size_t i = 0; i < n; ++i)
            if (obs.timelines[i].var == var) return i;
        throw Error("observation constraint refers to a variable without a timeline");
    };
    for (const auto& a : obs.constraints)
        if (!a.pointwise) parent[root(tl_index(a.left.var))] = root(tl_index(a.right.var));

    std::vector<Rule> domain;
    for (std::size_t c = 0; c < n; ++c) {
        if (root(c) != c) continue;
        Rule r;
        r.name = "obs";
        Statement st;
        std::map<std::pair<VarId, std::size_t>, int> slot;
        std::set<std::string> names;
        for (std::size_t t = 0; t < n; ++t) {
            if (root(t) != c) continue;
            const auto& tl = obs.timelines[t];
            const auto& var = problem.vars.at(tl.var);
            r.name += "_" + var.name;
            int first = static_cast<int>(st.tokens.size()) + 1;
            for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
                const auto& tok = tl.tokens[i];
                std::string nm = tok.name;
                if (nm.empty() || names.count(nm)) nm = "_" + var.name + std::to_string(i + 1);
                names.insert(nm);
                st.tokens.push_back({nm, tl.var, tok.value});
                int s = static_cast<int>(st.tokens.size());
                slot[{tl.var, i}] = s;
                if (i == 0)
                    st.atoms.push_back(starts_at(s, 0));
                else
                    st.atoms.push_back(meets(s - 1, s));
                if (tok.end.hi.is_finite()) {
                    Time e2 = tok.end.hi.value();
                    st.atoms.push_back(Atom::at({s, Endpoint::end}, e2, {0, e2 - tok.end.lo}));
                } else {
                    st.atoms.push_back(Atom::binary({first, Endpoint::start}, {s, Endpoint::end},
                                                    {tok.end.lo, Bound::infinity()}));
                }
                st.atoms.push_back(duration_in(s, tok.duration));
            }
        }
        for (const auto& a : obs.constraints) {
            if (root(tl_index(a.left.var)) != c) continue;
            Term l{slot.at({a.left.var, a.left.index}), a.left.ep};
            if (a.pointwise) {
                st.atoms.push_back(Atom::at(l, a.instant, a.bounds));
            } else {
                Term rt{slot.at({a.right.var, a.right.index}), a.right.ep};
                st.atoms.push_back(Atom::binary(l, rt, a.bounds));
            }
        }
        if (st.tokens.empty()) continue;
        r.body.push_back(std::move(st));
        domain.push_back(std::move(r));
    }
    return Game(problem.name, problem.vars, problem.rules, std::move(domain));
}

const char* to_string(RefuteResult::Verdict v)
{
    switch (v) {
    case RefuteResult::Verdict::none_exists: return "none exists up to bound";
    case RefuteResult::Verdict::solution_found: return "solution found";
    default: return "unknown";
    }
}

namespace {

struct Work {
    std::size_t budget;
    std::size_t used = 0;
    void tick()
    {
        if (++used > budget) throw BudgetExceeded("refutation budget exhausted");
    }
};

// Value sequences of length 1..max allowed by the transition relation.
std::vector<std::vector<ValueId>> sequences(const StateVariable& var, int max_tokens)
{
    std::vector<std::vector<ValueId>> out;
    std::vector<ValueId> cur;
    std::function<void()> rec = [&]() {
        if (!cur.empty()) out.push_back(cur);
        if (static_cast<int>(cur.size()) == max_tokens) return;
        for (ValueId v = 0; v < static_cast<ValueId>(var.values.size()); ++v) {
            if (!cur.empty() && !var.allows(cur.back(), v)) continue;
            cur.push_back(v);
            rec();
            cur.pop_back();
        }
    };
    rec();
    return out;
}

struct SeqToken {
    VarId var;
    ValueId value;
    Time lo, hi;
    bool unc;
};

} // namespace

RefuteResult refute_flexible_solutions(const ProblemWithUncertainty& problem, int max_tokens,
                                       std::size_t budget)
{
    RefuteResult res;
    res.bound = max_tokens;
    if (auto r = check_problem(problem); !r) throw Error(r.message);
    const Variables& vars = problem.vars;
    const Game game = associate_game(problem);
    const Time cap = window_cap(game);
    Work work{budget ? budget : default_instance_budget()};
    Problem p{vars, problem.rules};

    std::vector<VarId> controlled;
    for (std::size_t x = 0; x < vars.size(); ++x)
        if (vars[x].side == Side::controlled) controlled.push_back(static_cast<VarId>(x));
    for (VarId x : controlled)
        for (const auto& v : vars[x].values)
            if (v.duration.hi.is_inf()) res.cap = cap;

    try {
        std::vector<ScheduledPlan> observed;
        auto ost = enumerate_instances(problem.observation, vars.size(), cap, work.budget,
                                       [&](const ScheduledPlan& sp) {
                                           observed.push_back(sp);
                                           return true;
                                       });
        if (ost.capped) res.cap = cap;

        std::vector<std::vector<std::vector<ValueId>>> per_var;
        for (VarId x : controlled) per_var.push_back(sequences(vars[x], max_tokens));
        if (std::any_of(per_var.begin(), per_var.end(), [](const auto& s) { return s.empty(); })) {
            res.verdict = RefuteResult::Verdict::none_exists;
            return res;
        }

        std::vector<std::size_t> pick(controlled.size(), 0);
        bool undecided = false;
        for (;;) {
            ++res.sequences;
            std::vector<SeqToken> toks;
            for (std::size_t c = 0; c < controlled.size(); ++c)
                for (ValueId v : per_var[c][pick[c]]) {
                    const auto& d = vars[controlled[c]].duration(v);
                    toks.push_back({controlled[c], v, d.lo, d.hi.is_finite() ? d.hi.value() : std::max(cap, d.lo),
                                    vars[controlled[c]].control(v) == Control::uncontrollable});
                }
            std::vector<Time> dur(toks.size());
            auto build = [&](const ScheduledPlan& base) {
                ScheduledPlan sp = base;
                for (std::size_t i = 0; i < toks.size(); ++i) sp.timelines[toks[i].var].push({toks[i].value, dur[i]});
                return sp;
            };

            // Necessary condition: whatever Eve fixes (observation and
            // uncontrollable durations), some controllable durations work.
            std::function<bool(const ScheduledPlan&, std::size_t)> exists_ctrl =
                [&](const ScheduledPlan& base, std::size_t k) -> bool {
                while (k < toks.size() && toks[k].unc) ++k;
                if (k == toks.size()) {
                    work.tick();
                    return is_solution_plan(p, build(base));
                }
                for (Time d = toks[k].lo; d <= toks[k].hi; ++d) {
                    dur[k] = d;
                    if (exists_ctrl(base, k + 1)) return true;
                }
                return false;
            };
            std::function<bool(const ScheduledPlan&, std::size_t)> all_unc =
                [&](const ScheduledPlan& base, std::size_t k) -> bool {
                while (k < toks.size() && !toks[k].unc) ++k;
                if (k == toks.size()) return exists_ctrl(base, 0);
                for (Time d = toks[k].lo; d <= toks[k].hi; ++d) {
                    dur[k] = d;
                    if (!all_unc(base, k + 1)) return false;
                }
                return true;
            };
            bool pass = std::all_of(observed.begin(), observed.end(),
                                    [&](const ScheduledPlan& o) { return all_unc(o, 0); });

            if (!pass) {
                ++res.filtered;
            } else {
                // Restricted search: singleton controllable windows, full
                // uncontrollable windows, widest end windows, R = R_E.
                std::optional<FlexiblePlan> found;
                std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
                    while (k < toks.size() && toks[k].unc) ++k;
                    if (k == toks.size()) {
                        work.tick();
                        FlexiblePlan cand = problem.observation;
                        std::map<VarId, FlexibleTimeline> tls;
                        for (std::size_t i = 0; i < toks.size(); ++i) {
                            auto& tl = tls[toks[i].var];
                            tl.var = toks[i].var;
                            Interval d = toks[i].unc ? vars[toks[i].var].duration(toks[i].value)
                                                     : Interval{dur[i], dur[i]};
                            Interval e = tl.tokens.empty()
                                             ? d
                                             : Interval{tl.tokens.back().end.lo + d.lo,
                                                        tl.tokens.back().end.hi.plus(d.hi)};
                            tl.tokens.push_back({vars[tl.var].name + std::to_string(tl.tokens.size() + 1),
                                                 toks[i].value, e, d});
                        }
                        for (auto& [x, tl] : tls) cand.timelines.push_back(std::move(tl));
                        FlexOptions fo;
                        fo.budget = work.budget;
                        fo.cap = cap;
                        auto verdict = is_flexible_solution(problem, cand, fo);
                        if (verdict.kind == FlexVerdict::Kind::solution) {
                            found = std::move(cand);
                            return true;
                        }
                        return false;
                    }
                    for (Time d = toks[k].lo; d <= toks[k].hi; ++d) {
                        dur[k] = d;
                        if (search(k + 1)) return true;
                    }
                    return false;
                };
                if (search(0)) {
                    res.verdict = RefuteResult::Verdict::solution_found;
                    res.solution = std::move(found);
                    return res;
                }
                undecided = true;
            }

            std::size_t c = 0;
            while (c < pick.size() && ++pick[c] == per_var[c].size()) pick[c++] = 0;
            if (c == pick.size()) break;
        }
        res.verdict = undecided ? RefuteResult::Verdict::unknown : RefuteResult::Verdict::none_exists;
        if (undecided)
            res.note = "some value sequences pass the necessary condition but no solution was found "
                       "among singleton controllable windows";
    } catch (const BudgetExceeded& e) {
        res.verdict = RefuteResult::Verdict::unknown;
        res.note = e.what();
    }
    return res;
}

} // namespace tpg
