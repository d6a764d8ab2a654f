// Acceptance suite: one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "support.hpp"

#ifndef TPG_CLI
#define TPG_CLI "tpg"
#endif

using namespace tpg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why)
    {
        if (pass) detail = why;
        pass = false;
    }
};

int cli(const std::string& args)
{
    std::string cmd = std::string(TPG_CLI) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fx(const std::string& name) { return "'" + test::fixture(name) + "'"; }

// 1: strategy for the v1 game against every Eve behaviour.
Outcome criterion1()
{
    Outcome o;
    auto t0 = Clock::now();
    Game g = test::load_game("choice.game");
    auto res = solve(g);
    if (res.verdict != SolveResult::Verdict::win) {
        o.fail("solve returned " + std::string(to_string(res.verdict)));
        return o;
    }
    auto charlie = extract_strategy(g, *res.strategy);
    std::size_t leaves = 0, longest = 0;
    std::set<Time> durations;
    std::function<void(const PartialPlan&, std::size_t)> explore = [&](const PartialPlan& p, std::size_t depth) {
        if (!o.pass) return;
        if (depth >= 14) {
            o.fail("no success within 14 rounds at " + format_plan(g.vars(), "p", p));
            return;
        }
        Move mc = charlie(p);
        for (const Move& me : eve_moves(g, statuses(p), mc)) {
            Round r{mc, me};
            if (!round_applicable(g, p, r)) {
                o.fail("strategy move not applicable");
                return;
            }
            PartialPlan q = apply_round(g, p, r);
            Fault f = round_fault(g, p, q);
            if (f == Fault::eve) continue; // Eve breaks a duration bound herself
            if (f == Fault::charlie) {
                o.fail("strategy breaks a bound");
                return;
            }
            if (is_successful(g, q)) {
                ++leaves;
                longest = std::max(longest, depth + 1);
                durations.insert(closure(q).timelines[0].tokens()[0].duration);
                continue;
            }
            explore(q, depth + 1);
        }
    };
    explore(PartialPlan::empty(1), 0);
    double s = seconds_since(t0);
    if (o.pass && durations.size() != 10) o.fail("saw " + std::to_string(durations.size()) + " v1 durations");
    if (o.pass && s >= 10) o.fail("took " + std::to_string(s) + " s");
    if (o.pass) {
        std::ostringstream os;
        os << "WIN; " << leaves << " Eve behaviours, v1 durations 1..10, success within " << longest
           << " rounds, " << s << " s";
        o.detail = os.str();
    }
    return o;
}

// 2: no flexible solution for the same specification.
Outcome criterion2()
{
    Outcome o;
    auto t0 = Clock::now();
    auto pb = *test::load("choice.problem").problem;
    auto r = refute_flexible_solutions(pb, 3);
    double s = seconds_since(t0);
    if (r.verdict != RefuteResult::Verdict::none_exists) o.fail(std::string("verdict ") + to_string(r.verdict));
    if (s >= 60) o.fail("took " + std::to_string(s) + " s");
    int rc = cli("refute-flex " + fx("choice.problem") + " --max-tokens 3");
    if (rc != 0) o.fail("refute-flex exit code " + std::to_string(rc));
    if (o.pass) {
        std::ostringstream os;
        os << "none exists up to bound 3 (" << r.sequences << " value sequences), " << s << " s";
        o.detail = os.str();
    }
    return o;
}

// 3: go/stop with and without the domain rule.
Outcome criterion3()
{
    Outcome o;
    auto a = solve(test::load_game("gostop.game"));
    auto b = solve(test::load_game("gostop-noD.game"));
    if (a.verdict != SolveResult::Verdict::win) o.fail("go/stop is not WIN");
    if (b.verdict != SolveResult::Verdict::not_win) o.fail("go/stop without D is not NOT_WIN");
    int ra = cli("solve " + fx("gostop.game")), rb = cli("solve " + fx("gostop-noD.game"));
    if (ra != 0 || rb != 1) o.fail("exit codes " + std::to_string(ra) + " and " + std::to_string(rb));
    if (o.pass) o.detail = "WIN (exit 0) and NOT_WIN (exit 1)";
    return o;
}

// 4: camera plans.
Outcome criterion4()
{
    Outcome o;
    Game g = test::load_game("camera.game");
    auto ok = check_solution(g.full_problem(), closure(test::load_plan("camera-ok.plan", g.vars())));
    auto bad = check_solution(g.full_problem(), closure(test::load_plan("camera-short.plan", g.vars())));
    if (!ok.ok) o.fail("hand-built plan rejected: " + ok.violations.front().message);
    bool cites = false;
    for (const auto& v : bad.violations)
        cites = cites || (v.kind == Violation::Kind::rule && v.message.find("cooldown") != std::string::npos);
    if (bad.ok || !cites) o.fail("shortened plan not rejected by the cooldown rule");
    int ra = cli("check " + fx("camera.game") + " --plan " + fx("camera-ok.plan"));
    int rb = cli("check " + fx("camera.game") + " --plan " + fx("camera-short.plan"));
    if (ra != 0 || rb != 1) o.fail("check exit codes " + std::to_string(ra) + " and " + std::to_string(rb));
    if (o.pass) o.detail = "plan accepted; gap of 3 rejected: " + bad.violations.front().message;
    return o;
}

// 5: fixpoint solver against the bounded oracle on random games, plus probing.
Outcome criterion5()
{
    Outcome o;
    auto t0 = Clock::now();
    std::size_t decided = 0, wins = 0, bounded_runs = 0, probed = 0, mismatches = 0;
    for (std::uint64_t seed = 1000; decided < 200 && seed < 2000; ++seed) {
        test::GameGen gen(seed);
        Game g = gen.game();
        SolveOptions so;
        so.state_budget = 50000;
        auto r = solve(g, so);
        if (r.verdict == SolveResult::Verdict::unknown) continue;
        mismatches += r.label_mismatches;
        bool win = r.verdict == SolveResult::Verdict::win;
        bool refused = false;
        for (int k = 1; k <= 8 && !refused; ++k) {
            auto b = bounded_solve(g, k, 200000);
            if (b.verdict == BoundedResult::Verdict::refused) {
                refused = true;
                break;
            }
            ++bounded_runs;
            if (b.verdict == BoundedResult::Verdict::win_within_k && !win)
                o.fail("seed " + std::to_string(seed) + ": WIN_WITHIN_" + std::to_string(k) + " but NOT_WIN");
        }
        if (refused) continue;
        auto gs = build_structure(g, 50000);
        auto reg = solve_structure(gs);
        int rank = reg.rank[gs.root];
        if (rank >= 1 && rank <= 8 &&
            bounded_solve(g, rank, 2000000).verdict == BoundedResult::Verdict::no_win_within_k)
            o.fail("seed " + std::to_string(seed) + ": attractor rank " + std::to_string(rank) +
                   " but no bounded win");
        auto pr = probe_exactness(g, seed, 30, 8, 6);
        ++probed;
        mismatches += pr.mismatches;
        if (pr.mismatches) o.fail("seed " + std::to_string(seed) + ": " + pr.first_mismatch);
        ++decided;
        wins += win;
    }
    if (decided < 200) o.fail("only " + std::to_string(decided) + " games decided");
    if (o.pass) {
        std::ostringstream os;
        os << decided << " games (" << wins << " WIN, " << decided - wins << " NOT_WIN), " << bounded_runs
           << " bounded runs K<=8, 0 contradictions, " << mismatches << " label mismatches, "
           << seconds_since(t0) << " s";
        o.detail = os.str();
    }
    return o;
}

// 6: round semantics.
Outcome criterion6()
{
    Outcome o;
    std::size_t rounds = 0, plans = 0;
    for (std::uint64_t seed = 0; rounds < 10000; ++seed) {
        test::GameGen gen(seed);
        Game g = gen.game();
        PartialPlan p = PartialPlan::empty(g.vars().size());
        for (int i = 0; i < 25; ++i) {
            Round r = test::random_round(gen, g, p);
            if (!round_applicable(g, p, r)) continue;
            PartialPlan q = apply_round(g, p, r);
            ++rounds;
            if (!validate_partial_plan(g.vars(), q).ok) o.fail("invalid outcome");
            if (!test::outcome_matches(q, test::expected_outcome(p, r))) o.fail("outcome differs from recomputation");
            p = std::move(q);
        }
    }
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        test::GameGen gen(seed + 50000);
        Game g = gen.game();
        PartialPlan target = test::random_partial_plan(gen, g.vars(), 8);
        auto res = apply_play(g, PartialPlan::empty(g.vars().size()), test::rebuild_play(g, target));
        if (!res.ok() || !(res.plan == target)) o.fail("plan not rebuilt: " + format_plan(g.vars(), "p", target));
        ++plans;
    }
    if (o.pass)
        o.detail = std::to_string(rounds) + " fuzzed rounds valid and matching; " + std::to_string(plans) +
                   " random plans rebuilt";
    return o;
}

// 7: window values.
Outcome criterion7()
{
    Outcome o;
    Game a = test::load_game("choice.game"), b = test::load_game("gostop.game");
    auto wa = window(a), wb = window(b);
    if (wa != 300000 || test::window_again(a) != 300000) o.fail("v1 game window " + std::to_string(wa));
    if (wb != 1 || test::window_again(b) != 1) o.fail("go/stop window " + std::to_string(wb));
    if (o.pass) o.detail = "300000 and 1, both recomputed";
    return o;
}

} // namespace

int main()
{
    const std::pair<const char*, Outcome (*)()> criteria[] = {
        {"v1 game solved, strategy wins against every Eve", criterion1},
        {"no flexible solution plan for the v1 problem", criterion2},
        {"go/stop WIN, go/stop without D NOT_WIN", criterion3},
        {"camera plan checks", criterion4},
        {"fixpoint and bounded oracle agree", criterion5},
        {"round semantics", criterion6},
        {"window values", criterion7},
    };
    int failed = 0, i = 0;
    for (const auto& [name, fn] : criteria) {
        ++i;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& ex) {
            o.fail(std::string("exception: ") + ex.what());
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i << " " << name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
