#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "tpg/flexible.hpp"
#include "tpg/frontend.hpp"
#include "tpg/game.hpp"
#include "tpg/solver.hpp"

#ifndef TPG_FIXTURES
#define TPG_FIXTURES "fixtures"
#endif

namespace tpg::test {

inline std::string fixture(const std::string& name) { return std::string(TPG_FIXTURES) + "/" + name; }

inline Model load(const std::string& name)
{
    auto p = parse_model(read_file(fixture(name)));
    if (!p.ok()) {
        std::string msg = "fixture " + name + " does not parse:";
        for (const auto& d : p.diagnostics) msg += "\n" + d.str(name);
        throw Error(msg);
    }
    return std::move(*p.value);
}

inline Game load_game(const std::string& name) { return load(name).game; }

inline PartialPlan load_plan(const std::string& name, const Variables& vars)
{
    auto p = parse_plan(read_file(fixture(name)), vars);
    if (!p.ok()) throw Error("plan fixture " + name + " does not parse");
    return p.value->plan;
}

// Random small games: at most 2 variables, 3 values, bounds up to 3.
struct GameGen {
    std::mt19937_64 rng;
    explicit GameGen(std::uint64_t seed) : rng(seed) {}

    int uni(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

    Interval bounds(int lo_min)
    {
        Time lo = uni(lo_min, 3);
        if (coin(0.2)) return {lo, Bound::infinity()};
        return {lo, Time(uni(static_cast<int>(lo), 3))};
    }

    Variables vars()
    {
        Variables vs;
        int n = uni(1, 2);
        for (int i = 0; i < n; ++i) {
            StateVariable v;
            v.name = "x" + std::to_string(i);
            v.side = coin(0.6) ? Side::controlled : Side::external;
            int k = uni(1, 3);
            for (int j = 0; j < k; ++j) {
                ValueDecl d;
                d.name = "v" + std::to_string(j);
                d.duration = bounds(1);
                if (d.duration.hi.is_inf() && coin()) d.duration.hi = Bound(3);
                d.control = coin(0.4) ? Control::uncontrollable : Control::controllable;
                v.values.push_back(d);
            }
            v.transitions.resize(k);
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b)
                    if (coin(0.7)) v.transitions[a].push_back(b);
                if (v.transitions[a].empty()) v.transitions[a].push_back(uni(0, k - 1));
            }
            vs.push_back(std::move(v));
        }
        return vs;
    }

    Binding binding(const Variables& vs, const std::string& name)
    {
        VarId x = uni(0, static_cast<int>(vs.size()) - 1);
        return {name, x, uni(0, static_cast<int>(vs[x].values.size()) - 1)};
    }

    Rule rule(const Variables& vs, const std::string& name)
    {
        Rule r;
        r.name = name;
        if (coin()) r.trigger = binding(vs, "t");
        int ns = uni(1, 2);
        for (int s = 0; s < ns; ++s) {
            Statement st;
            int nt = uni(r.trigger ? 0 : 1, 2);
            for (int k = 0; k < nt; ++k) st.tokens.push_back(binding(vs, "b" + std::to_string(k)));
            int lo_slot = r.trigger ? 0 : 1;
            int hi_slot = nt;
            if (hi_slot >= lo_slot) {
                int na = uni(0, 2);
                for (int a = 0; a < na; ++a) {
                    auto term = [&] {
                        return Term{uni(lo_slot, hi_slot), coin() ? Endpoint::start : Endpoint::end};
                    };
                    if (coin(0.25))
                        st.atoms.push_back(Atom::at(term(), uni(0, 3), bounds(0)));
                    else
                        st.atoms.push_back(Atom::binary(term(), term(), bounds(0)));
                }
            }
            r.body.push_back(std::move(st));
        }
        return r;
    }

    Game game(const std::string& name = "random")
    {
        Variables vs = vars();
        std::vector<Rule> sys, dom;
        int ns = uni(1, 2), nd = uni(0, 1);
        for (int i = 0; i < ns; ++i) sys.push_back(rule(vs, "s" + std::to_string(i)));
        for (int i = 0; i < nd; ++i) dom.push_back(rule(vs, "d" + std::to_string(i)));
        return Game(name, std::move(vs), std::move(sys), std::move(dom));
    }
};

// A valid partial plan with at most max_tokens tokens (open tails count).
inline PartialPlan random_partial_plan(GameGen& gen, const Variables& vs, int max_tokens)
{
    const int nv = static_cast<int>(vs.size());
    for (;;) {
        Time now = gen.uni(1, 6);
        PartialPlan p = PartialPlan::empty(vs.size());
        p.now = now;
        int used = 0;
        for (int x = 0; x < nv; ++x) {
            auto value = [&] { return gen.uni(0, static_cast<int>(vs[x].values.size()) - 1); };
            bool open = gen.coin();
            Time left = open ? gen.uni(0, static_cast<int>(now) - 1) : now;
            Timeline tl;
            while (left > 0) {
                Time d = gen.uni(1, static_cast<int>(left));
                tl.push({value(), d});
                left -= d;
                ++used;
            }
            if (open) {
                tl.open(value());
                ++used;
            }
            p.timelines[x] = std::move(tl);
        }
        if (used <= max_tokens) return p;
    }
}

// The rounds whose outcome is `target`: at each instant both players play the
// starts and ends they own.
inline std::vector<Round> rebuild_play(const Game& g, const PartialPlan& target)
{
    std::vector<Round> rounds;
    for (Time t = 0; t < target.now; ++t) {
        std::vector<Action> acts;
        for (std::size_t x = 0; x < target.timelines.size(); ++x) {
            const auto& tl = target.timelines[x];
            const auto var = static_cast<VarId>(x);
            for (std::size_t i = 0; i < tl.size(); ++i) {
                ValueId v = tl.tokens()[i].value;
                if (tl.start(i) == t) acts.push_back({Action::Kind::start, var, v});
                if (tl.end(i) == t + 1) acts.push_back({Action::Kind::end, var, v});
            }
            if (tl.is_open() && tl.horizon() == t) acts.push_back({Action::Kind::start, var, *tl.open_value()});
        }
        std::vector<Action> mine, theirs;
        for (const auto& a : acts) (g.owner(a) == Player::charlie ? mine : theirs).push_back(a);
        std::sort(mine.begin(), mine.end(), action_less);
        std::sort(theirs.begin(), theirs.end(), action_less);
        rounds.push_back({Move::play(t, mine), Move::play(t, theirs)});
    }
    return rounds;
}

// Outcome of a round recomputed from the definition, on plain vectors.
struct Expected {
    std::vector<std::vector<Token>> closed;
    std::vector<std::optional<ValueId>> open;
    Time now = 0;
};

inline Expected expected_outcome(const PartialPlan& p, const Round& r)
{
    Expected e;
    std::vector<Time> open_start(p.timelines.size(), 0);
    for (std::size_t x = 0; x < p.timelines.size(); ++x) {
        e.closed.push_back(p.timelines[x].tokens());
        e.open.push_back(p.timelines[x].open_value());
        Time h = 0;
        for (const auto& t : e.closed.back()) h += t.duration;
        open_start[x] = h;
    }
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions)
            if (a.is_start()) e.open[a.var] = a.value;
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions)
            if (!a.is_start()) {
                e.closed[a.var].push_back({a.value, m->t - open_start[a.var] + 1});
                e.open[a.var].reset();
            }
    e.now = std::min(r.charlie.t, r.eve.t) + 1;
    return e;
}

inline bool outcome_matches(const PartialPlan& p, const Expected& e)
{
    if (p.now != e.now) return false;
    for (std::size_t x = 0; x < p.timelines.size(); ++x)
        if (p.timelines[x].tokens() != e.closed[x] || p.timelines[x].open_value() != e.open[x]) return false;
    return true;
}

inline Round random_round(GameGen& gen, const Game& g, const PartialPlan& p)
{
    auto s = statuses(p);
    if (gen.coin(0.2)) {
        Time tc = p.now + gen.uni(1, 3);
        Time te = gen.uni(static_cast<int>(p.now), static_cast<int>(tc));
        auto em = eve_moves(g, s, Move::play(te, {}));
        return {Move::wait_until(tc), em[gen.uni(0, static_cast<int>(em.size()) - 1)]};
    }
    auto cm = charlie_moves(g, s, p.now);
    Move mc = cm[gen.uni(0, static_cast<int>(cm.size()) - 1)];
    auto em = eve_moves(g, s, mc);
    return {mc, em[gen.uni(0, static_cast<int>(em.size()) - 1)]};
}

// Second traversal of the game: collect every bound, then multiply the non-zero ones.
inline std::uint64_t window_again(const Game& g)
{
    std::vector<Time> factors;
    for (const auto& v : g.vars())
        for (const auto& d : v.values) {
            factors.push_back(d.duration.lo);
            if (d.duration.hi.is_finite()) factors.push_back(d.duration.hi.value());
        }
    for (const auto* rules : {&g.system_rules(), &g.domain_rules()})
        for (const auto& r : *rules)
            for (const auto& s : r.body)
                for (const auto& a : s.atoms) {
                    if (a.bounds.hi.is_inf()) continue;
                    factors.push_back(a.bounds.lo);
                    factors.push_back(a.bounds.hi.value());
                }
    std::uint64_t w = 1;
    for (Time f : factors)
        if (f != 0) w *= static_cast<std::uint64_t>(f);
    return w;
}

} // namespace tpg::test
