#include "tpg/rules.hpp"

#include <algorithm>
#include <set>

namespace tpg {

Atom meets(int a, int b)
{
    return Atom::binary({a, Endpoint::end}, {b, Endpoint::start}, {0, 0});
}

std::vector<Atom> during(int a, int b)
{
    return {Atom::binary({b, Endpoint::start}, {a, Endpoint::start}, {0, Bound::infinity()}),
            Atom::binary({a, Endpoint::end}, {b, Endpoint::end}, {0, Bound::infinity()})};
}

Atom duration_in(int a, Interval b)
{
    return Atom::binary({a, Endpoint::start}, {a, Endpoint::end}, b);
}

Atom starts_at(int a, Time t)
{
    return Atom::at({a, Endpoint::start}, t, {0, 0});
}

namespace {

Time endpoint_time(const Span& s, Endpoint ep) { return ep == Endpoint::start ? s.start : s.end; }

bool binding_ok(const Binding& b, const Variables& vars)
{
    return b.var >= 0 && static_cast<std::size_t>(b.var) < vars.size() && b.value >= 0 &&
           static_cast<std::size_t>(b.value) < vars[b.var].values.size();
}

} // namespace

std::string check_rule(const Rule& rule, const Variables& vars)
{
    if (rule.body.empty()) return "rule '" + rule.name + "' has an empty body";
    if (rule.trigger && !binding_ok(*rule.trigger, vars))
        return "rule '" + rule.name + "' has an ill-typed trigger";
    for (const auto& st : rule.body) {
        std::set<std::string> names;
        if (rule.trigger) names.insert(rule.trigger->name);
        for (const auto& b : st.tokens) {
            if (!binding_ok(b, vars)) return "rule '" + rule.name + "' has an ill-typed binding";
            if (!names.insert(b.name).second)
                return "duplicate token name '" + b.name + "' in rule '" + rule.name + "'";
        }
        int nslots = static_cast<int>(st.tokens.size());
        auto ok = [&](const Term& t) {
            if (t.slot == 0) return rule.trigger.has_value();
            return t.slot >= 1 && t.slot <= nslots;
        };
        for (const auto& a : st.atoms) {
            if (a.bounds.empty()) return "empty bound interval in rule '" + rule.name + "'";
            if (a.bounds.lo < 0) return "negative lower bound in rule '" + rule.name + "'";
            if (!ok(a.left) || (!a.pointwise() && !ok(a.right)))
                return "atom references an unbound token in rule '" + rule.name + "'";
        }
    }
    return {};
}

bool atom_eval(const Atom& atom, std::span<const std::optional<Span>> assignment)
{
    auto get = [&](const Term& t) -> Time {
        if (t.slot < 0 || static_cast<std::size_t>(t.slot) >= assignment.size() ||
            !assignment[t.slot])
            throw Error("atom_eval: unassigned token slot " + std::to_string(t.slot));
        return endpoint_time(*assignment[t.slot], t.ep);
    };
    Time l = get(atom.left);
    Time diff = atom.pointwise() ? atom.instant - l : get(atom.right) - l;
    return atom.bounds.contains(diff);
}

namespace {

struct Matcher {
    const Statement& st;
    const ScheduledPlan& plan;
    const MatchOptions& opts;
    std::vector<std::vector<const Atom*>> by_level;
    Assignment asg;
    Witness refs;
    std::vector<bool> used_ref;

    Matcher(const Statement& s, const ScheduledPlan& p, const MatchOptions& o)
        : st(s), plan(p), opts(o)
    {
        std::size_t n = st.tokens.size();
        by_level.resize(n + 1);
        for (const auto& a : st.atoms) {
            int lvl = a.left.slot;
            if (!a.pointwise()) lvl = std::max(lvl, a.right.slot);
            by_level.at(lvl).push_back(&a);
        }
        asg.assign(n + 1, std::nullopt);
        refs.assign(n + 1, TokenRef{});
    }

    bool level_ok(std::size_t k) const
    {
        for (const Atom* a : by_level[k])
            if (!atom_eval(*a, asg)) return false;
        return true;
    }

    bool taken(const TokenRef& r, std::size_t upto) const
    {
        if (asg[0] && refs[0] == r) return true;
        for (std::size_t i = 1; i < upto; ++i)
            if (refs[i] == r) return true;
        return false;
    }

    bool search(std::size_t k)
    {
        if (k > st.tokens.size()) return true;
        const Binding& b = st.tokens[k - 1];
        if (b.var < 0 || static_cast<std::size_t>(b.var) >= plan.timelines.size()) return false;
        const Timeline& tl = plan.timelines[b.var];
        for (std::size_t i = 0; i < tl.size(); ++i) {
            if (tl.tokens()[i].value != b.value) continue;
            TokenRef r{b.var, i};
            if (opts.distinct_witnesses && taken(r, k)) continue;
            asg[k] = tl.span(i);
            refs[k] = r;
            if (level_ok(k) && search(k + 1)) return true;
        }
        asg[k].reset();
        return false;
    }
};

} // namespace

std::optional<Witness> match_statement(const Statement& st, const ScheduledPlan& plan,
                                       std::optional<TokenRef> trigger, const MatchOptions& opts)
{
    Matcher m(st, plan, opts);
    if (trigger) {
        m.asg[0] = plan.timelines.at(trigger->var).span(trigger->index);
        m.refs[0] = *trigger;
        if (!m.level_ok(0)) return std::nullopt;
    } else if (!m.by_level[0].empty()) {
        throw Error("statement references a trigger but none is bound");
    }
    if (!m.search(1)) return std::nullopt;
    return Witness(m.refs.begin() + 1, m.refs.end());
}

RuleCheck check_rule_on(const Rule& rule, const ScheduledPlan& plan, const MatchOptions& opts)
{
    auto any_statement = [&](std::optional<TokenRef> trig) {
        for (const auto& st : rule.body)
            if (match_statement(st, plan, trig, opts)) return true;
        return false;
    };
    if (!rule.trigger) return {any_statement(std::nullopt), std::nullopt};
    const Binding& t = *rule.trigger;
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= plan.timelines.size()) return {};
    const Timeline& tl = plan.timelines[t.var];
    for (std::size_t i = 0; i < tl.size(); ++i) {
        if (tl.tokens()[i].value != t.value) continue;
        TokenRef r{t.var, i};
        if (!any_statement(r)) return {false, r};
    }
    return {};
}

bool rule_satisfied(const Rule& rule, const ScheduledPlan& plan, const MatchOptions& opts)
{
    return check_rule_on(rule, plan, opts).satisfied;
}

SolutionReport check_solution(const Problem& problem, const ScheduledPlan& plan,
                              const MatchOptions& opts)
{
    if (plan.timelines.size() != problem.vars.size())
        throw Error("plan has " + std::to_string(plan.timelines.size()) + " timelines, problem has " +
                    std::to_string(problem.vars.size()) + " variables");
    SolutionReport rep;
    auto add = [&](Violation v) {
        rep.ok = false;
        rep.violations.push_back(std::move(v));
    };
    for (std::size_t x = 0; x < problem.vars.size(); ++x) {
        const auto& var = problem.vars[x];
        const auto& tl = plan.timelines[x];
        if (tl.is_open())
            add({Violation::Kind::shape, static_cast<VarId>(x), tl.size(), -1,
                 "timeline " + var.name + " is not closed"});
        const auto& toks = tl.tokens();
        for (std::size_t i = 0; i < toks.size(); ++i) {
            const auto& tk = toks[i];
            if (tk.value < 0 || static_cast<std::size_t>(tk.value) >= var.values.size()) {
                add({Violation::Kind::shape, static_cast<VarId>(x), i, -1,
                     "undeclared value on timeline " + var.name});
                continue;
            }
            const auto& d = var.duration(tk.value);
            if (!d.contains(tk.duration))
                add({Violation::Kind::duration, static_cast<VarId>(x), i, -1,
                     "token " + std::to_string(i + 1) + " of " + var.name + " (" +
                         var.value_name(tk.value) + ", duration " + std::to_string(tk.duration) +
                         ") outside " + d.str()});
            if (i > 0 && toks[i - 1].value >= 0 &&
                static_cast<std::size_t>(toks[i - 1].value) < var.values.size() &&
                !var.allows(toks[i - 1].value, tk.value))
                add({Violation::Kind::transition, static_cast<VarId>(x), i, -1,
                     "transition " + var.value_name(toks[i - 1].value) + " -> " +
                         var.value_name(tk.value) + " not allowed on " + var.name});
        }
    }
    for (const auto& v : rep.violations)
        if (v.kind == Violation::Kind::shape) return rep;
    for (std::size_t r = 0; r < problem.rules.size(); ++r) {
        const Rule& rule = problem.rules[r];
        RuleCheck c = check_rule_on(rule, plan, opts);
        if (c.satisfied) continue;
        std::string msg = "rule '" + rule.name + "' violated";
        if (c.failing_trigger) {
            const auto& var = problem.vars[c.failing_trigger->var];
            const auto& tl = plan.timelines[c.failing_trigger->var];
            Span s = tl.span(c.failing_trigger->index);
            msg += " by token " + var.name + "=" +
                   var.value_name(tl.tokens()[c.failing_trigger->index].value) + " [" +
                   std::to_string(s.start) + "," + std::to_string(s.end) + ")";
            add({Violation::Kind::rule, c.failing_trigger->var, c.failing_trigger->index,
                 static_cast<int>(r), msg});
        } else {
            add({Violation::Kind::rule, -1, 0, static_cast<int>(r), msg});
        }
    }
    return rep;
}

bool is_solution_plan(const Problem& problem, const ScheduledPlan& plan, const MatchOptions& opts)
{
    return check_solution(problem, plan, opts).ok;
}

} // namespace tpg
