#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace tpg;

namespace {

Action st(VarId x, ValueId v) { return {Action::Kind::start, x, v}; }
Action en(VarId x, ValueId v) { return {Action::Kind::end, x, v}; }

PartialPlan run(const Game& g, std::vector<Round> rounds)
{
    auto r = apply_play(g, PartialPlan::empty(g.vars().size()), rounds);
    REQUIRE(r.ok());
    return r.plan;
}

// v1 held for d units from 0; Charlie idles.
PartialPlan v1_for(const Game& g, Time d)
{
    std::vector<Round> rs{{Move::play(0, {st(0, 0)}), Move::play(0, d == 1 ? std::vector<Action>{en(0, 0)} : std::vector<Action>{})}};
    for (Time t = 1; t < d; ++t)
        rs.push_back({Move::play(t, {}), Move::play(t, t == d - 1 ? std::vector<Action>{en(0, 0)} : std::vector<Action>{})});
    return run(g, rs);
}

bool has_action(const Move& m, const Action& a) { return std::find(m.actions.begin(), m.actions.end(), a) != m.actions.end(); }

// ---- hand-built arenas and exhaustive memoryless strategy enumeration --------

struct Arena {
    GameStructure gs;
};

Arena random_arena(std::mt19937_64& rng, int n)
{
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Arena a;
    auto& gs = a.gs;
    gs.nodes.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& nd = gs.nodes[i];
        nd.expanded = true;
        int kind = uni(0, 9);
        if (kind == 0) {
            nd.state.kind = SuccinctState::Kind::eve_fault;
            continue;
        }
        nd.labels.d = kind <= 4;
        nd.labels.w = nd.labels.d && kind == 1;
        if (nd.labels.w) continue;
        int edges = uni(1, 3);
        for (int e = 0; e < edges; ++e) {
            EveNode en;
            en.from = i;
            int k = uni(1, 3);
            for (int j = 0; j < k; ++j) en.succ.push_back(uni(0, n - 1));
            std::sort(en.succ.begin(), en.succ.end());
            en.succ.erase(std::unique(en.succ.begin(), en.succ.end()), en.succ.end());
            nd.edges.push_back(static_cast<int>(gs.eve_nodes.size()));
            gs.eve_nodes.push_back(std::move(en));
        }
    }
    return a;
}

bool target(const StructureNode& n) { return n.labels.w || n.state.kind == SuccinctState::Kind::eve_fault; }

// Does Eve have a path from root that visits d and never a target, forever?
bool eve_refutes(const GameStructure& gs, const std::vector<int>& choice, int root)
{
    const int n = static_cast<int>(gs.nodes.size());
    auto succ = [&](int c) -> const std::vector<int>& { return gs.eve_nodes[gs.nodes[c].edges[choice[c]]].succ; };
    // nodes from which an infinite target-free path exists
    std::vector<char> alive(n);
    for (int c = 0; c < n; ++c) alive[c] = !target(gs.nodes[c]);
    for (bool changed = true; changed;) {
        changed = false;
        for (int c = 0; c < n; ++c) {
            if (!alive[c]) continue;
            bool any = false;
            for (int s : succ(c)) any = any || alive[s];
            if (!any) {
                alive[c] = 0;
                changed = true;
            }
        }
    }
    // search over (node, seen d) along target-free paths
    std::vector<char> seen(2 * n, 0);
    std::vector<std::pair<int, int>> stack;
    if (target(gs.nodes[root])) return false;
    stack.push_back({root, gs.nodes[root].labels.d});
    while (!stack.empty()) {
        auto [c, d] = stack.back();
        stack.pop_back();
        if (seen[2 * c + d]++) continue;
        if (d && alive[c]) return true;
        for (int s : succ(c))
            if (!target(gs.nodes[s])) stack.push_back({s, d || gs.nodes[s].labels.d});
    }
    return false;
}

bool brute_force_wins(const GameStructure& gs, int root)
{
    const int n = static_cast<int>(gs.nodes.size());
    std::vector<int> choice(n, 0);
    std::function<bool(int)> rec = [&](int i) -> bool {
        if (i == n) return !eve_refutes(gs, choice, root);
        int k = static_cast<int>(gs.nodes[i].edges.size());
        if (k == 0) return rec(i + 1);
        for (choice[i] = 0; choice[i] < k; ++choice[i])
            if (rec(i + 1)) return true;
        choice[i] = 0;
        return false;
    };
    return rec(0);
}

} // namespace

TEST_CASE("window of the fixtures")
{
    Game choice = test::load_game("choice.game");
    Game gostop = test::load_game("gostop.game");
    CHECK(window(choice) == 300000);
    CHECK(test::window_again(choice) == 300000);
    CHECK(window(gostop) == 1);
    CHECK(test::window_again(gostop) == 1);
}

TEST_CASE("window of a single atom and a unit duration")
{
    Variables vs(1);
    vs[0].name = "x";
    vs[0].values.push_back({"a", {1, 1}, Control::controllable});
    vs[0].transitions = {{0}};
    Rule r;
    r.name = "r";
    r.trigger = Binding{"t", 0, 0};
    r.body.push_back({{{"b", 0, 0}}, {Atom::binary({0, Endpoint::end}, {1, Endpoint::start}, {2, 3})}});
    Game g("one", vs, {r}, {});
    CHECK(window(g) == 6);
}

TEST_CASE("window agrees with a second traversal and grows with rules")
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        test::GameGen gen(seed);
        Game g = gen.game();
        CHECK(window(g) == test::window_again(g));
        auto sys = g.system_rules();
        sys.push_back(gen.rule(g.vars(), "extra"));
        Game h(g.name(), g.vars(), sys, g.domain_rules());
        CHECK(window(h) >= window(g));
    }
}

TEST_CASE("Charlie's alphabet on one variable with two controllable values")
{
    Variables vs(1);
    vs[0].name = "x";
    vs[0].values = {{"a", {1, 3}, Control::controllable}, {"b", {1, 3}, Control::controllable}};
    vs[0].transitions = {{0, 1}, {0, 1}};
    Game g("alpha", vs, {}, {});

    // all subsets of {start a, start b, end a, end b}, filtered by integrity by hand
    std::vector<Action> all{st(0, 0), st(0, 1), en(0, 0), en(0, 1)};
    auto count = [&](std::optional<ValueId> open) {
        int n = 0;
        for (int mask = 0; mask < 16; ++mask) {
            std::vector<Action> a;
            for (int i = 0; i < 4; ++i)
                if (mask >> i & 1) a.push_back(all[i]);
            int starts = 0, ends = 0;
            std::optional<ValueId> started, ended;
            for (const auto& x : a) (x.is_start() ? (++starts, started) : (++ends, ended)) = x.value;
            if (starts > 1 || ends > 1) continue;
            if ((starts == 1) != !open) continue;
            if (ended && !(started ? *started == *ended : open && *open == *ended)) continue;
            ++n;
        }
        return n;
    };
    CHECK(count(std::nullopt) == 4);
    CHECK(count(ValueId{0}) == 2);
    CHECK(charlie_moves(g, {TimelineStatus{}}, 0).size() == 4);
    CHECK(charlie_moves(g, {TimelineStatus{true, 0}}, 3).size() == 2);
    CHECK(charlie_moves(g, {TimelineStatus{true, 1}}, 3).size() == 2);
}

TEST_CASE("a wait equals a run of empty plays")
{
    Game g = test::load_game("choice.game");
    PartialPlan p = run(g, {{Move::play(0, {st(0, 0)}), Move::play(0, {})}});
    PartialPlan waited = apply_round(g, p, {Move::wait_until(4), Move::play(4, {en(0, 0)})});
    PartialPlan stepped = p;
    for (Time t = 1; t < 4; ++t) stepped = apply_round(g, stepped, {Move::play(t, {}), Move::play(t, {})});
    stepped = apply_round(g, stepped, {Move::play(4, {}), Move::play(4, {en(0, 0)})});
    CHECK(waited == stepped);
    CHECK(closure(waited) == closure(stepped));

    PartialPlan w2 = apply_round(g, p, {Move::wait_until(6), Move::play(5, {})});
    PartialPlan s2 = p;
    for (Time t = 1; t <= 5; ++t) s2 = apply_round(g, s2, {Move::play(t, {}), Move::play(t, {})});
    CHECK(closure(w2) == closure(s2));
}

TEST_CASE("no-wait traces advance now by one per round")
{
    Game g = test::load_game("gostop.game");
    auto res = solve(g);
    Trace t = simulate(g, extract_strategy(g, *res.strategy), random_admissible_eve(g, {}), 50);
    for (const auto& s : t.steps) CHECK(s.now == static_cast<Time>(s.round) + 1);
}

TEST_CASE("abstraction forgets the settled distant past")
{
    Game g = test::load_game("choice.game");
    Abstraction abs(g);
    ValueId v1 = 0, v2 = 1, v3 = 2;
    auto plan = [&](std::vector<Token> ts, ValueId open) {
        Timeline t(ts);
        Time h = t.horizon();
        t.open(open);
        return PartialPlan{{t}, h + 2};
    };
    PartialPlan a = plan({{v1, 4}, {v2, 1}, {v2, 10}, {v2, 10}}, v2);
    PartialPlan b = plan({{v1, 2}, {v2, 3}, {v2, 10}, {v2, 10}}, v2);
    PartialPlan c = plan({{v1, 8}, {v3, 7}, {v2, 5}, {v2, 5}}, v2);
    REQUIRE(validate_partial_plan(a).ok);
    CHECK(abs.abstract(a).key() == abs.abstract(b).key());
    CHECK(abs.abstract(a).key() == abs.abstract(c).key());
    CHECK(is_successful(g, a) == is_successful(g, b));
    CHECK(is_admissible(g, a) == is_admissible(g, b));

    PartialPlan recent = plan({{v1, 4}, {v2, 1}, {v2, 10}, {v2, 10}}, v1);
    CHECK(abs.abstract(recent).key() != abs.abstract(a).key());
    CHECK(abs.abstract(a).key() == abs.abstract(a).key());
}

TEST_CASE("abstraction exactness probing")
{
    for (const char* f : {"choice.game", "gostop.game", "gostop-noD.game"}) {
        Game g = test::load_game(f);
        auto rep = probe_exactness(g, 3, 60, 14, 8);
        CHECK_MESSAGE(rep.mismatches == 0, f, ": ", rep.first_mismatch);
        CHECK(rep.classes > 1);
    }
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        test::GameGen gen(seed);
        Game g = gen.game();
        auto rep = probe_exactness(g, seed, 20, 8, 6);
        mismatches += rep.mismatches;
        CHECK_MESSAGE(rep.mismatches == 0, format_game(g), rep.first_mismatch);
    }
    CHECK(mismatches == 0);
}

TEST_CASE("go/stop structure")
{
    Game g = test::load_game("gostop.game");
    auto gs = build_structure(g, 100000);
    CHECK_FALSE(gs.truncated);
    CHECK(gs.nodes.size() == 47);
    CHECK(gs.label_mismatches == 0);
    for (const auto& n : gs.nodes)
        if (n.labels.w) CHECK(n.labels.d);
}

TEST_CASE("a long v1 followed by v2 can never succeed")
{
    Game g = test::load_game("choice.game");
    Abstraction abs(g);
    PartialPlan p = apply_round(g, v1_for(g, 7), {Move::play(7, {st(0, 1)}), Move::play(7, {})});
    SuccinctState s = abs.abstract(p);
    CHECK(s.w_impossible);

    auto gs = build_structure(g, 100000);
    std::vector<char> seen(gs.nodes.size());
    std::vector<int> stack;
    for (std::size_t i = 0; i < gs.nodes.size(); ++i)
        if (gs.nodes[i].state.key() == s.key()) stack.push_back(static_cast<int>(i));
    REQUIRE(stack.size() == 1);
    std::size_t visited = 0;
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        if (seen[c]++) continue;
        ++visited;
        CHECK_FALSE(gs.nodes[c].labels.w);
        for (int e : gs.nodes[c].edges)
            for (int x : gs.eve_nodes[e].succ) stack.push_back(x);
    }
    CHECK(visited > 1);
}

TEST_CASE("verdicts on the fixtures")
{
    CHECK(solve(test::load_game("gostop.game")).verdict == SolveResult::Verdict::win);
    CHECK(solve(test::load_game("gostop-noD.game")).verdict == SolveResult::Verdict::not_win);
    auto choice = solve(test::load_game("choice.game"));
    CHECK(choice.verdict == SolveResult::Verdict::win);
    CHECK(choice.window == 300000);
    CHECK(choice.strategy.has_value());
    CHECK(solve(test::load("choice.problem").game).verdict == SolveResult::Verdict::win);
    CHECK_FALSE(solve(test::load_game("gostop-noD.game")).strategy.has_value());
}

TEST_CASE("a truncated structure gives an unknown verdict")
{
    SolveOptions o;
    o.state_budget = 5;
    CHECK(solve(test::load_game("choice.game"), o).verdict == SolveResult::Verdict::unknown);
}

TEST_CASE("fixpoint agrees with exhaustive strategy enumeration on small arenas")
{
    std::mt19937_64 rng(21);
    int wins = 0, losses = 0;
    for (int n = 0; n < 300; ++n) {
        Arena a = random_arena(rng, 10);
        auto reg = solve_structure(a.gs);
        for (int root = 0; root < 10; ++root) {
            bool bf = brute_force_wins(a.gs, root);
            CHECK(reg.winning[root] == bf);
            (bf ? wins : losses)++;
        }
    }
    CHECK(wins > 100);
    CHECK(losses > 100);
}

TEST_CASE("fixpoint soundness on random games")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        test::GameGen gen(seed);
        Game g = gen.game();
        auto gs = build_structure(g, 20000);
        if (gs.truncated) continue;
        auto reg = solve_structure(gs);
        for (std::size_t c = 0; c < gs.nodes.size(); ++c) {
            const auto& n = gs.nodes[c];
            if (reg.rank[c] > 0) {
                bool down = false;
                for (int e : n.edges) {
                    bool all = true;
                    for (int s : gs.eve_nodes[e].succ) all = all && reg.rank[s] >= 0 && reg.rank[s] < reg.rank[c];
                    down = down || all;
                }
                CHECK(down);
            }
            if (reg.winning[c] && reg.rank[c] < 0) {
                CHECK_FALSE(n.labels.d);
                bool stay = false;
                for (int e : n.edges) {
                    bool all = true;
                    for (int s : gs.eve_nodes[e].succ) all = all && reg.winning[s];
                    stay = stay || all;
                }
                CHECK(stay);
            }
        }
    }
}

TEST_CASE("bounded oracle")
{
    Game choice = test::load_game("choice.game");
    CHECK(bounded_solve(choice, 13).verdict == BoundedResult::Verdict::win_within_k);
    Game nod = test::load_game("gostop-noD.game");
    for (int k = 1; k <= 8; ++k) CHECK(bounded_solve(nod, k).verdict == BoundedResult::Verdict::no_win_within_k);
    CHECK(bounded_solve(choice, 12, 50).verdict == BoundedResult::Verdict::refused);

    Game gostop = test::load_game("gostop.game");
    Rule never;
    never.name = "never";
    never.body.push_back({{{"a", 0, 0}}, {Atom::at({1, Endpoint::start}, 0, {1, 1})}});
    auto sys = gostop.system_rules();
    sys.push_back(never);
    Game unsat("unsat", gostop.vars(), sys, {});
    CHECK(bounded_solve(unsat, 1).verdict == BoundedResult::Verdict::no_win_within_k);
}

TEST_CASE("strategy moves on the v1 game")
{
    Game g = test::load_game("choice.game");
    auto res = solve(g);
    auto charlie = extract_strategy(g, *res.strategy);
    CHECK(has_action(charlie(PartialPlan::empty(1)), st(0, 0)));
    CHECK(has_action(charlie(v1_for(g, 4)), st(0, 1)));
    CHECK(has_action(charlie(v1_for(g, 7)), st(0, 2)));
    for (Time d = 1; d <= 10; ++d) CHECK(has_action(charlie(v1_for(g, d)), st(0, d <= 5 ? 1 : 2)));

    PartialPlan lost = apply_round(g, v1_for(g, 7), {Move::play(7, {st(0, 1)}), Move::play(7, {})});
    CHECK_THROWS_AS(charlie(lost), StrategyDomainError);
}

TEST_CASE("strategy moves on the go/stop game")
{
    Game g = test::load_game("gostop.game");
    auto res = solve(g);
    auto charlie = extract_strategy(g, *res.strategy);
    PartialPlan p = PartialPlan::empty(2);
    for (Time t = 0; t < 6; ++t) {
        Move m = charlie(p);
        CHECK_FALSE(has_action(m, st(0, 1)));
        auto em = eve_moves(g, statuses(p), m);
        Move me = Move::play(t, {st(1, 0), en(1, 0)});
        REQUIRE(std::find(em.begin(), em.end(), me) != em.end());
        p = apply_round(g, p, {m, me});
    }
}

TEST_CASE("strategy tables round trip and check the game")
{
    Game g = test::load_game("choice.game");
    auto res = solve(g);
    std::stringstream ss;
    write_strategy(g, *res.strategy, ss);
    auto back = read_strategy(g, ss);
    CHECK(back.id() == res.strategy->id());
    CHECK(back.entries.size() == res.strategy->entries.size());

    Game other = test::load_game("gostop.game");
    CHECK_THROWS_AS(extract_strategy(other, *res.strategy), StrategyError);
    std::stringstream again;
    write_strategy(g, *res.strategy, again);
    CHECK_THROWS_AS(read_strategy(other, again), Error);
}

TEST_CASE("strategy certification against random Eve")
{
    for (const char* f : {"choice.game", "gostop.game"}) {
        Game g = test::load_game(f);
        auto res = solve(g);
        auto charlie = extract_strategy(g, *res.strategy);
        int ok = 0;
        for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
            RandomEveOptions o;
            o.seed = seed;
            Trace t = simulate(g, charlie, random_admissible_eve(g, o), 400);
            ok += t.success && !t.error;
        }
        CHECK_MESSAGE(ok == 1000, f);
    }
}

TEST_CASE("solving is deterministic")
{
    Game g = test::load_game("choice.game");
    auto a = solve(g), b = solve(g);
    CHECK(a.states == b.states);
    CHECK(a.strategy->id() == b.strategy->id());
}
