#include "tpg/game.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

namespace tpg {

bool action_less(const Action& a, const Action& b)
{
    if (a.var != b.var) return a.var < b.var;
    if (a.value != b.value) return a.value < b.value;
    return a.kind == Action::Kind::start && b.kind == Action::Kind::end;
}

Move Move::play(Time t, std::vector<Action> actions)
{
    std::sort(actions.begin(), actions.end(), action_less);
    return {false, t, std::move(actions)};
}

Move Move::wait_until(Time t) { return {true, t, {}}; }

bool move_less(const Move& a, const Move& b)
{
    if (a.wait != b.wait) return !a.wait;
    if (a.actions.size() != b.actions.size()) return a.actions.size() < b.actions.size();
    return std::lexicographical_compare(a.actions.begin(), a.actions.end(), b.actions.begin(),
                                        b.actions.end(), action_less);
}

Game::Game(std::string name, Variables vars, std::vector<Rule> system_rules,
           std::vector<Rule> domain_rules)
    : name_(std::move(name)), vars_(std::move(vars)), system_(std::move(system_rules)),
      domain_(std::move(domain_rules))
{
    std::set<std::string> names;
    for (const auto& v : vars_) {
        if (auto e = v.check(); !e.empty()) throw Error(e);
        if (!names.insert(v.name).second) throw Error("duplicate variable '" + v.name + "'");
    }
    for (const auto* rs : {&system_, &domain_})
        for (const auto& r : *rs)
            if (auto e = check_rule(r, vars_); !e.empty()) throw Error(e);
    p_d_ = {vars_, domain_};
    p_g_ = {vars_, domain_};
    p_g_.rules.insert(p_g_.rules.end(), system_.begin(), system_.end());
}

Player Game::start_owner(VarId x) const
{
    return vars_.at(x).side == Side::controlled ? Player::charlie : Player::eve;
}

Player Game::end_owner(VarId x, ValueId v) const
{
    return vars_.at(x).control(v) == Control::controllable ? Player::charlie : Player::eve;
}

Player Game::owner(const Action& a) const
{
    return a.is_start() ? start_owner(a.var) : end_owner(a.var, a.value);
}

namespace {

const char* player_name(Player p) { return p == Player::charlie ? "Charlie" : "Eve"; }

} // namespace

Applicability move_wellformed(const Game& g, const Move& m, Player p)
{
    Applicability res;
    auto fail = [&](std::string s) {
        res.ok = false;
        res.problems.push_back(std::move(s));
    };
    if (m.wait) {
        if (p == Player::eve) fail("Eve cannot wait");
        if (!m.actions.empty()) fail("a wait move carries no actions");
        return res;
    }
    std::set<std::pair<VarId, int>> seen;
    for (const auto& a : m.actions) {
        if (a.var < 0 || static_cast<std::size_t>(a.var) >= g.vars().size() || a.value < 0 ||
            static_cast<std::size_t>(a.value) >= g.vars()[a.var].values.size()) {
            fail("action on an undeclared variable or value");
            continue;
        }
        if (g.owner(a) != p)
            fail(to_string(g, a) + " is not owned by " + player_name(p));
        if (!seen.insert({a.var, static_cast<int>(a.kind)}).second)
            fail("two " + std::string(a.is_start() ? "start" : "end") + " actions on " +
                 g.vars()[a.var].name + " in one move");
    }
    return res;
}

std::vector<TimelineStatus> statuses(const PartialPlan& plan)
{
    std::vector<TimelineStatus> st;
    st.reserve(plan.timelines.size());
    for (const auto& tl : plan.timelines) {
        if (tl.is_open())
            st.push_back({true, *tl.open_value()});
        else
            st.push_back({false, 0});
    }
    return st;
}

Applicability round_applicable(const Game& g, const PartialPlan& plan, const Round& r)
{
    Applicability res;
    auto fail = [&](std::string s) {
        res.ok = false;
        res.problems.push_back(std::move(s));
    };
    auto mc = move_wellformed(g, r.charlie, Player::charlie);
    auto me = move_wellformed(g, r.eve, Player::eve);
    for (auto& s : mc.problems) fail(std::move(s));
    for (auto& s : me.problems) fail(std::move(s));
    if (!res.ok) return res;
    if (plan.timelines.size() != g.vars().size()) {
        fail("plan does not match the game variables");
        return res;
    }

    std::size_t n = g.vars().size();
    std::vector<std::optional<ValueId>> starts(n), ends(n);
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions) {
            auto& slot = a.is_start() ? starts[a.var] : ends[a.var];
            if (slot) fail("two " + std::string(a.is_start() ? "start" : "end") + " actions on " +
                           g.vars()[a.var].name + " in one round");
            slot = a.value;
        }
    for (std::size_t x = 0; x < n; ++x) {
        const auto& tl = plan.timelines[x];
        const auto& name = g.vars()[x].name;
        if (tl.is_open() && starts[x]) fail("start on open timeline " + name);
        if (!tl.is_open() && !starts[x]) fail("closed timeline " + name + " is not started");
        if (ends[x]) {
            bool fresh = starts[x] && *starts[x] == *ends[x];
            bool tail = tl.is_open() && *tl.open_value() == *ends[x];
            if (!fresh && !tail)
                fail("end(" + name + "," + g.vars()[x].value_name(*ends[x]) +
                     ") matches neither a start in this round nor the open token");
        }
    }

    const Move& c = r.charlie;
    const Move& e = r.eve;
    if (e.wait) fail("Eve cannot wait");
    if (!c.wait) {
        if (c.t != plan.now || e.t != plan.now)
            fail("both players play: timestamps must equal now = " + std::to_string(plan.now));
    } else {
        if (!(c.t > plan.now)) fail("wait timestamp must exceed now = " + std::to_string(plan.now));
        if (e.t > c.t) fail("Eve timestamp exceeds the wait timestamp");
        if (e.t < plan.now) fail("Eve timestamp precedes now = " + std::to_string(plan.now));
    }
    return res;
}

PartialPlan apply_round(const Game& g, const PartialPlan& plan, const Round& r)
{
    auto app = round_applicable(g, plan, r);
    if (!app) throw Error("inapplicable round: " + app.problems.front());
    PartialPlan out = plan;
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions)
            if (a.is_start()) out.timelines[a.var].open(a.value);
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions)
            if (!a.is_start()) {
                auto& tl = out.timelines[a.var];
                Time start = tl.horizon();
                tl.close_open(m->t - start + 1);
            }
    out.now = std::min(r.charlie.t, r.eve.t) + 1;
    return out;
}

PlayResult apply_play(const Game& g, const PartialPlan& initial, const std::vector<Round>& rounds)
{
    PlayResult res{initial, std::nullopt, {}};
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        auto app = round_applicable(g, res.plan, rounds[i]);
        if (!app) {
            res.failed_index = i;
            res.diagnostic = app.problems.front();
            return res;
        }
        res.plan = apply_round(g, res.plan, rounds[i]);
    }
    return res;
}

namespace {

bool solves(const Problem& p, const PartialPlan& plan)
{
    if (plan.is_empty()) {
        ScheduledPlan s;
        s.timelines.resize(plan.timelines.size());
        return is_solution_plan(p, s);
    }
    return is_solution_plan(p, closure(plan));
}

} // namespace

bool is_admissible(const Game& g, const PartialPlan& plan) { return solves(g.domain_problem(), plan); }

bool is_successful(const Game& g, const PartialPlan& plan) { return solves(g.full_problem(), plan); }

namespace {

using Choice = std::vector<Action>;

std::vector<Move> product(const std::vector<std::vector<Choice>>& per_var, Time now)
{
    std::vector<Choice> acc{{}};
    for (const auto& choices : per_var) {
        std::vector<Choice> next;
        next.reserve(acc.size() * choices.size());
        for (const auto& a : acc)
            for (const auto& c : choices) {
                Choice m = a;
                m.insert(m.end(), c.begin(), c.end());
                next.push_back(std::move(m));
            }
        acc = std::move(next);
    }
    std::vector<Move> out;
    out.reserve(acc.size());
    for (auto& c : acc) out.push_back(Move::play(now, std::move(c)));
    std::sort(out.begin(), out.end(), move_less);
    return out;
}

Action start_of(VarId x, ValueId v) { return {Action::Kind::start, x, v}; }
Action end_of(VarId x, ValueId v) { return {Action::Kind::end, x, v}; }

} // namespace

std::vector<Move> charlie_moves(const Game& g, const std::vector<TimelineStatus>& st, Time now)
{
    std::vector<std::vector<Choice>> per_var;
    for (std::size_t xi = 0; xi < g.vars().size(); ++xi) {
        const auto& var = g.vars()[xi];
        auto x = static_cast<VarId>(xi);
        std::vector<Choice> ch;
        bool own = var.side == Side::controlled;
        auto nvals = static_cast<ValueId>(var.values.size());
        if (own && !st[xi].open) {
            for (ValueId v = 0; v < nvals; ++v) {
                ch.push_back({start_of(x, v)});
                if (var.control(v) == Control::controllable) ch.push_back({start_of(x, v), end_of(x, v)});
            }
        } else if (st[xi].open) {
            ch.push_back({});
            if (var.control(st[xi].value) == Control::controllable) ch.push_back({end_of(x, st[xi].value)});
        } else {
            // external and closed: Eve starts it; Charlie may end a controllable value
            ch.push_back({});
            for (ValueId v = 0; v < nvals; ++v)
                if (var.control(v) == Control::controllable) ch.push_back({end_of(x, v)});
        }
        per_var.push_back(std::move(ch));
    }
    return product(per_var, now);
}

std::vector<Move> eve_moves(const Game& g, const std::vector<TimelineStatus>& st, const Move& charlie)
{
    Time t = charlie.t;
    std::vector<std::optional<ValueId>> c_start(g.vars().size()), c_end(g.vars().size());
    for (const auto& a : charlie.actions)
        (a.is_start() ? c_start : c_end)[a.var] = a.value;

    std::vector<std::vector<Choice>> per_var;
    for (std::size_t xi = 0; xi < g.vars().size(); ++xi) {
        const auto& var = g.vars()[xi];
        auto x = static_cast<VarId>(xi);
        std::vector<Choice> ch;
        bool own = var.side == Side::external;
        auto nvals = static_cast<ValueId>(var.values.size());
        if (st[xi].open) {
            ch.push_back({});
            if (var.control(st[xi].value) == Control::uncontrollable && !c_end[xi])
                ch.push_back({end_of(x, st[xi].value)});
        } else if (own) {
            if (c_end[xi]) {
                ch.push_back({start_of(x, *c_end[xi])});
            } else {
                for (ValueId v = 0; v < nvals; ++v) {
                    ch.push_back({start_of(x, v)});
                    if (var.control(v) == Control::uncontrollable)
                        ch.push_back({start_of(x, v), end_of(x, v)});
                }
            }
        } else {
            ch.push_back({});
            if (c_start[xi] && !c_end[xi] && var.control(*c_start[xi]) == Control::uncontrollable)
                ch.push_back({end_of(x, *c_start[xi])});
        }
        per_var.push_back(std::move(ch));
    }
    return product(per_var, t);
}

Fault round_fault(const Game& g, const PartialPlan& before, const PartialPlan& after)
{
    bool charlie = false, eve = false;
    auto blame = [&](Player p) { (p == Player::charlie ? charlie : eve) = true; };
    for (std::size_t xi = 0; xi < g.vars().size(); ++xi) {
        const auto& var = g.vars()[xi];
        auto x = static_cast<VarId>(xi);
        const auto& b = before.timelines[xi];
        const auto& a = after.timelines[xi];
        if (!b.is_open()) {
            // a token was started this round
            ValueId v = *a.last_value();
            if (!b.tokens().empty() && !var.allows(b.tokens().back().value, v))
                blame(g.start_owner(x));
        }
        if (a.size() > b.size()) {
            const Token& tk = a.tokens().back();
            if (!var.duration(tk.value).contains(tk.duration)) blame(g.end_owner(x, tk.value));
        }
        if (a.is_open()) {
            ValueId v = *a.open_value();
            if (var.duration(v).hi < after.now - a.horizon()) blame(g.end_owner(x, v));
        }
    }
    if (charlie) return Fault::charlie;
    if (eve) return Fault::eve;
    return Fault::none;
}

Trace simulate(const Game& g, const CharlieStrategy& charlie, const EveStrategy& eve,
               std::size_t max_rounds)
{
    Trace tr;
    PartialPlan plan = PartialPlan::empty(g.vars().size());
    if (is_successful(g, plan)) {
        tr.success = true;
        return tr;
    }
    for (std::size_t i = 0; i < max_rounds; ++i) {
        Move mc, me;
        try {
            mc = charlie(plan);
        } catch (const std::exception& ex) {
            tr.error = "round " + std::to_string(i) + ": Charlie strategy failed: " + ex.what();
            return tr;
        }
        try {
            me = eve(plan, mc);
        } catch (const std::exception& ex) {
            tr.error = "round " + std::to_string(i) + ": Eve strategy failed: " + ex.what();
            return tr;
        }
        Round r{mc, me};
        auto app = round_applicable(g, plan, r);
        if (!app) {
            tr.error = "round " + std::to_string(i) + " inapplicable (" + to_string(g, mc) + " / " +
                       to_string(g, me) + "): " + app.problems.front();
            return tr;
        }
        PartialPlan next = apply_round(g, plan, r);
        tr.fault = round_fault(g, plan, next);
        plan = std::move(next);
        TraceStep s{i, mc, me, plan.now, is_admissible(g, plan), false};
        s.successful = s.admissible && is_successful(g, plan);
        tr.steps.push_back(s);
        tr.snapshots.push_back(plan);
        if (tr.fault != Fault::none) break;
        if (s.successful) {
            tr.success = true;
            break;
        }
    }
    return tr;
}

EveStrategy scripted_eve(const Game& g, std::vector<ScriptEntry> script)
{
    for (auto& e : script) {
        for (const auto& a : e.actions)
            if (g.owner(a) != Player::eve)
                throw Error("script contains a Charlie-owned action " + to_string(g, a) + " at " +
                            std::to_string(e.t));
        std::sort(e.actions.begin(), e.actions.end(), action_less);
    }
    std::stable_sort(script.begin(), script.end(),
                     [](const ScriptEntry& a, const ScriptEntry& b) { return a.t < b.t; });
    return [script = std::move(script)](const PartialPlan& plan, const Move& mc) -> Move {
        Time hi = mc.wait ? mc.t : plan.now;
        for (const auto& e : script)
            if (e.t >= plan.now && e.t <= hi) return Move::play(e.t, e.actions);
        return Move::play(hi, {});
    };
}

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::int64_t> parts)
{
    std::uint64_t h = splitmix(seed);
    for (auto p : parts) h = splitmix(h ^ static_cast<std::uint64_t>(p));
    return h;
}

Time geometric(std::uint64_t h, double p)
{
    std::mt19937_64 rng(h);
    std::geometric_distribution<Time> dist(p);
    return dist(rng);
}

} // namespace

EveStrategy random_admissible_eve(const Game& g, const RandomEveOptions& opts)
{
    const Time deadline = geometric(mix(opts.seed, {-1}), opts.p);
    return [&g, opts, deadline](const PartialPlan& plan, const Move& mc) -> Move {
        Time now = plan.now;
        Move cplay = mc.wait ? Move::play(now, {}) : mc;
        auto st = statuses(plan);

        std::vector<std::optional<ValueId>> c_start(g.vars().size()), c_end(g.vars().size());
        for (const auto& a : cplay.actions) (a.is_start() ? c_start : c_end)[a.var] = a.value;

        // intended duration of the token of x with value v starting at s
        auto target = [&](VarId x, Time s, ValueId v) {
            const auto& d = g.vars()[x].duration(v);
            Time t = d.lo + geometric(mix(opts.seed, {x, s, v}), opts.p);
            return d.hi.is_finite() ? std::min(t, d.hi.value()) : t;
        };

        std::vector<Action> acts;
        for (std::size_t xi = 0; xi < g.vars().size(); ++xi) {
            const auto& var = g.vars()[xi];
            auto x = static_cast<VarId>(xi);
            const auto& tl = plan.timelines[xi];
            std::optional<ValueId> fresh;
            if (!st[xi].open && var.side == Side::external) {
                ValueId v;
                if (c_end[xi]) {
                    v = *c_end[xi];
                } else {
                    std::vector<ValueId> cand;
                    auto last = tl.last_value();
                    for (ValueId w = 0; w < static_cast<ValueId>(var.values.size()); ++w)
                        if (!last || var.allows(*last, w)) cand.push_back(w);
                    if (cand.empty())
                        for (ValueId w = 0; w < static_cast<ValueId>(var.values.size()); ++w)
                            cand.push_back(w);
                    v = cand[mix(opts.seed, {x, now, 7}) % cand.size()];
                }
                acts.push_back({Action::Kind::start, x, v});
                fresh = v;
            } else if (!st[xi].open) {
                fresh = c_start[xi];
            }
            if (fresh) {
                if (var.control(*fresh) == Control::uncontrollable && !c_end[xi] &&
                    target(x, now, *fresh) <= 1)
                    acts.push_back({Action::Kind::end, x, *fresh});
            } else if (st[xi].open && var.control(st[xi].value) == Control::uncontrollable) {
                Time s = tl.horizon();
                if (now - s + 1 >= target(x, s, st[xi].value))
                    acts.push_back({Action::Kind::end, x, st[xi].value});
            }
        }
        Move chosen = Move::play(now, acts);
        if (now < deadline) return chosen;

        // past the deadline: prefer a reply that makes the plan admissible
        auto outcome_ok = [&](const Move& me) {
            Round r{cplay, me};
            if (!round_applicable(g, plan, r)) return false;
            PartialPlan next = apply_round(g, plan, r);
            if (round_fault(g, plan, next) == Fault::eve) return false;
            // every uncontrollable open token must still be able to end in bounds
            for (std::size_t xi = 0; xi < next.timelines.size(); ++xi) {
                const auto& tl = next.timelines[xi];
                if (!tl.is_open()) continue;
                ValueId v = *tl.open_value();
                if (g.vars()[xi].control(v) == Control::uncontrollable &&
                    g.vars()[xi].duration(v).hi < next.now - tl.horizon() + 1)
                    return false;
            }
            return is_admissible(g, next);
        };
        if (outcome_ok(chosen)) return chosen;
        for (const auto& me : eve_moves(g, st, cplay))
            if (outcome_ok(me)) return me;
        return chosen;
    };
}

std::string to_string(const Game& g, const Action& a)
{
    const auto& var = g.vars().at(a.var);
    return std::string(a.is_start() ? "start(" : "end(") + var.name + "," + var.value_name(a.value) + ")";
}

std::string actions_string(const Game& g, const std::vector<Action>& acts)
{
    if (acts.empty()) return "-";
    std::string s;
    for (const auto& a : acts) {
        if (!s.empty()) s += "+";
        s += to_string(g, a);
    }
    return s;
}

std::string to_string(const Game& g, const Move& m)
{
    if (m.wait) return "wait(" + std::to_string(m.t) + ")";
    return "play(" + std::to_string(m.t) + "," + actions_string(g, m.actions) + ")";
}

std::vector<Action> parse_actions(const Game& g, std::string_view text)
{
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    std::vector<Action> out;
    if (t.empty() || t == "-") return out;
    std::size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '+' || t[i] == ',') {
            ++i;
            continue;
        }
        std::size_t lp = t.find('(', i), rp = t.find(')', i);
        if (lp == std::string::npos || rp == std::string::npos || rp < lp)
            throw Error("malformed action list '" + std::string(text) + "'");
        std::string kw = t.substr(i, lp - i);
        std::string inner = t.substr(lp + 1, rp - lp - 1);
        std::size_t comma = inner.find(',');
        if ((kw != "start" && kw != "end") || comma == std::string::npos)
            throw Error("malformed action '" + t.substr(i, rp - i + 1) + "'");
        std::string vn = inner.substr(0, comma), val = inner.substr(comma + 1);
        VarId x = find_variable(g.vars(), vn);
        if (x < 0) throw Error("unknown variable '" + vn + "'");
        ValueId v = g.vars()[x].find_value(val);
        if (v < 0) throw Error("unknown value '" + val + "' of variable '" + vn + "'");
        out.push_back({kw == "start" ? Action::Kind::start : Action::Kind::end, x, v});
        i = rp + 1;
    }
    std::sort(out.begin(), out.end(), action_less);
    return out;
}

} // namespace tpg
