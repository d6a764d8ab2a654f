// tpg command line: validation, checking, solving, simulation and play.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tpg/flexible.hpp"
#include "tpg/frontend.hpp"
#include "tpg/json_io.hpp"
#include "tpg/solver.hpp"

using namespace tpg;

namespace {

enum Exit { ok = 0, negative = 1, usage = 2, undecided = 3 };

struct UsageError : Error {
    using Error::Error;
};

void print_diags(const std::vector<Diagnostic>& ds, const std::string& file)
{
    for (const auto& d : ds) std::cerr << d.str(file) << "\n";
}

std::string first_word(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string w;
        if (!(ls >> w) || w[0] == '#' || w.rfind("//", 0) == 0) continue;
        return w;
    }
    return {};
}

Model load_model(const std::string& path)
{
    auto parsed = parse_model(read_file(path));
    if (!parsed.ok()) {
        print_diags(parsed.diagnostics, path);
        throw UsageError("cannot load " + path);
    }
    return std::move(*parsed.value);
}

StrategyTable load_strategy(const Game& g, const std::string& path)
{
    std::istringstream in(read_file(path));
    return read_strategy(g, in);
}

CharlieStrategy charlie_for(const Game& g, const std::string& strategy_path)
{
    StrategyTable t;
    if (!strategy_path.empty()) {
        t = load_strategy(g, strategy_path);
    } else {
        auto r = solve(g);
        if (r.verdict != SolveResult::Verdict::win)
            throw Error(std::string("no winning strategy to play: verdict ") + to_string(r.verdict));
        t = std::move(*r.strategy);
    }
    return extract_strategy(g, t);
}

int cmd_validate(const std::string& file, const std::string& game_path, bool as_json)
{
    std::string text = read_file(file);
    std::string kind = first_word(text);
    std::vector<Diagnostic> diags;
    std::string summary;
    bool valid = false;
    if (kind == "game" || kind == "problem") {
        auto p = parse_model(text);
        diags = p.diagnostics;
        valid = p.ok();
        if (valid) {
            const Game& g = p.value->game;
            summary = kind + " " + g.name() + ": " + std::to_string(g.vars().size()) + " variables, " +
                      std::to_string(g.system_rules().size()) + " system rules, " +
                      std::to_string(g.domain_rules().size()) + " domain rules";
        }
    } else if (kind == "plan" || kind == "flexplan" || kind == "tpg-strategy") {
        if (game_path.empty()) throw UsageError(kind + " files are validated against a model: pass --game");
        Model m = load_model(game_path);
        if (kind == "plan") {
            auto p = parse_plan(text, m.game.vars());
            diags = p.diagnostics;
            valid = p.ok();
            if (valid) summary = "plan " + p.value->name;
        } else if (kind == "flexplan") {
            auto p = parse_flexplan(text, m.game.vars());
            diags = p.diagnostics;
            valid = p.ok();
            if (valid) summary = "flexplan " + p.value->name;
        } else {
            try {
                auto t = load_strategy(m.game, file);
                valid = true;
                summary = "strategy for " + t.game_name + ", " + std::to_string(t.entries.size()) + " entries";
            } catch (const Error& e) {
                diags.push_back({Diagnostic::Severity::error, 1, 1, e.what(), ""});
            }
        }
    } else {
        diags.push_back({Diagnostic::Severity::error, 1, 1, "unknown file kind '" + kind + "'",
                         "files start with game, problem, plan, flexplan or tpg-strategy"});
    }
    if (as_json) {
        std::cout << json{{"file", file}, {"valid", valid}, {"diagnostics", diagnostics_json(diags, file)}}.dump()
                  << "\n";
    } else {
        print_diags(diags, file);
        if (valid) std::cout << file << ": ok (" << summary << ")\n";
    }
    return valid ? ok : negative;
}

int cmd_check(const std::string& model_path, const std::string& plan_path, bool as_json)
{
    Model m = load_model(model_path);
    const Variables& vars = m.game.vars();
    auto parsed = parse_plan(read_file(plan_path), vars);
    if (!parsed.ok()) {
        print_diags(parsed.diagnostics, plan_path);
        throw UsageError("cannot load " + plan_path);
    }
    const PartialPlan& plan = parsed.value->plan;
    bool partial = parsed.value->has_now ||
                   std::any_of(plan.timelines.begin(), plan.timelines.end(),
                               [](const Timeline& t) { return t.is_open(); });
    if (partial) {
        bool d = is_admissible(m.game, plan), w = d && is_successful(m.game, plan);
        if (as_json)
            std::cout << json{{"partial", true}, {"admissible", d}, {"successful", w}}.dump() << "\n";
        else
            std::cout << "partial plan at now=" << plan.now << ": admissible=" << (d ? "yes" : "no")
                      << " successful=" << (w ? "yes" : "no") << "\n";
        return w ? ok : negative;
    }
    Problem p = m.problem ? Problem{vars, m.problem->rules} : m.game.full_problem();
    ScheduledPlan sp{plan.timelines};
    auto rep = check_solution(p, sp);
    if (as_json) {
        std::cout << check_json(vars, rep).dump() << "\n";
    } else {
        std::cout << (rep.ok ? "solution" : "not a solution") << "\n";
        for (const auto& v : rep.violations) std::cout << "  " << v.message << "\n";
    }
    return rep.ok ? ok : negative;
}

const ProblemWithUncertainty& need_problem(const Model& m, const std::string& path)
{
    if (!m.problem) throw UsageError(path + " is a game; this command needs a problem file");
    return *m.problem;
}

int cmd_flex_check(const std::string& path, const std::string& flex_path, bool as_json)
{
    Model m = load_model(path);
    const auto& prob = need_problem(m, path);
    auto parsed = parse_flexplan(read_file(flex_path), prob.vars);
    if (!parsed.ok()) {
        print_diags(parsed.diagnostics, flex_path);
        throw UsageError("cannot load " + flex_path);
    }
    auto v = is_flexible_solution(prob, parsed.value->plan);
    if (as_json) {
        std::cout << flex_json(prob.vars, v).dump() << "\n";
    } else {
        std::cout << to_string(v.kind);
        if (v.kind == FlexVerdict::Kind::not_solution) std::cout << " (condition " << v.condition << ")";
        std::cout << ": " << v.message << "\n";
    }
    switch (v.kind) {
    case FlexVerdict::Kind::solution: return ok;
    case FlexVerdict::Kind::not_solution: return negative;
    default: return undecided;
    }
}

int cmd_refute(const std::string& path, int max_tokens, std::size_t budget)
{
    Model m = load_model(path);
    const auto& prob = need_problem(m, path);
    auto r = refute_flexible_solutions(prob, max_tokens, budget);
    std::cout << refute_json(prob.vars, r).dump(2) << "\n";
    switch (r.verdict) {
    case RefuteResult::Verdict::none_exists: return ok;
    case RefuteResult::Verdict::solution_found: return negative;
    default: return undecided;
    }
}

int cmd_solve(const std::string& path, const std::string& engine, int horizon, bool as_json,
              const std::string& strategy_out, std::size_t budget)
{
    Model m = load_model(path);
    if (engine == "bounded") {
        auto r = bounded_solve(m.game, horizon, budget);
        if (as_json)
            std::cout << bounded_json(m.game, horizon, r).dump() << "\n";
        else
            std::cout << to_string(r.verdict) << " (horizon " << horizon << ", " << r.nodes << " nodes)\n";
        switch (r.verdict) {
        case BoundedResult::Verdict::win_within_k: return ok;
        case BoundedResult::Verdict::no_win_within_k: return negative;
        default: return undecided;
        }
    }
    SolveOptions opts;
    opts.state_budget = budget;
    auto r = solve(m.game, opts);
    if (!strategy_out.empty() && r.strategy) {
        std::ofstream out(strategy_out);
        if (!out) throw UsageError("cannot write " + strategy_out);
        write_strategy(m.game, *r.strategy, out);
    }
    if (as_json) {
        std::cout << solve_json(m.game, r).dump() << "\n";
    } else {
        std::cout << to_string(r.verdict) << "\n"
                  << "  states " << r.states << " (admissible " << r.d_states << ", successful " << r.w_states
                  << "), attractor " << r.attractor << ", winning " << r.winning << "\n"
                  << "  window " << r.window << "\n";
        if (r.strategy) std::cout << "  strategy " << r.strategy->id() << " (" << r.strategy->entries.size() << " entries)\n";
    }
    switch (r.verdict) {
    case SolveResult::Verdict::win: return ok;
    case SolveResult::Verdict::not_win: return negative;
    default: return undecided;
    }
}

int cmd_simulate(const std::string& path, const std::string& strategy_path, const std::vector<std::string>& eve,
                 std::uint64_t seed, std::size_t runs, std::size_t max_rounds, double p)
{
    Model m = load_model(path);
    const Game& g = m.game;
    if (eve.empty()) throw UsageError("--eve script FILE or --eve random is required");
    CharlieStrategy charlie = charlie_for(g, strategy_path);
    bool all = true;
    for (std::size_t run = 0; run < runs; ++run) {
        EveStrategy e;
        if (eve[0] == "script") {
            if (eve.size() != 2) throw UsageError("--eve script needs a FILE");
            auto sc = parse_script(read_file(eve[1]), g);
            if (!sc.ok()) {
                print_diags(sc.diagnostics, eve[1]);
                throw UsageError("cannot load " + eve[1]);
            }
            e = scripted_eve(g, *sc.value);
        } else if (eve[0] == "random") {
            e = random_admissible_eve(g, {seed + run, p});
        } else {
            throw UsageError("unknown Eve kind '" + eve[0] + "'");
        }
        Trace t = simulate(g, charlie, e, max_rounds);
        for (const auto& s : t.steps) std::cout << step_json(g, run, s).dump() << "\n";
        std::cout << run_summary_json(run, t).dump() << "\n";
        all = all && !t.error && (t.success || t.fault == Fault::eve);
    }
    return all ? ok : negative;
}

void repl_help()
{
    std::cout << "enter Eve's move: ACTIONS (at now), T ACTIONS, or '-' for no action\n"
                 "  ACTIONS: start(x,v)+end(y,w)\n"
                 "other commands: show, moves, help, quit\n";
}

int cmd_play(const std::string& path, const std::string& strategy_path, const std::string& transcript,
             std::size_t max_rounds)
{
    Model m = load_model(path);
    const Game& g = m.game;
    CharlieStrategy charlie = charlie_for(g, strategy_path);
    std::ofstream tr;
    if (!transcript.empty()) {
        tr.open(transcript);
        if (!tr) throw UsageError("cannot write " + transcript);
        tr << "# transcript of a play session on " << g.name() << "\n";
    }
    std::cout << "game " << g.name() << ": you play Eve\n";
    repl_help();
    PartialPlan plan = PartialPlan::empty(g.vars().size());
    if (is_successful(g, plan)) {
        std::cout << "the empty plan is already successful\n";
        return ok;
    }
    std::string line;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        Move mc = charlie(plan);
        std::cout << "now " << plan.now << ": Charlie " << to_string(g, mc) << "\n";
        for (;;) {
            std::cout << "eve> " << std::flush;
            if (!std::getline(std::cin, line)) return negative;
            std::istringstream ls(line);
            std::string w;
            if (!(ls >> w)) continue;
            if (w == "quit") return negative;
            if (w == "help") {
                repl_help();
                continue;
            }
            if (w == "show") {
                std::cout << format_plan(g.vars(), "current", plan);
                continue;
            }
            if (w == "moves") {
                for (const auto& me : eve_moves(g, statuses(plan), mc)) std::cout << "  " << to_string(g, me) << "\n";
                continue;
            }
            Move me;
            try {
                Time t = mc.wait ? mc.t : plan.now;
                std::string acts = line;
                if (std::isdigit(static_cast<unsigned char>(w[0]))) {
                    t = std::stoll(w);
                    std::getline(ls, acts);
                }
                me = Move::play(t, parse_actions(g, acts));
                for (const auto& a : me.actions)
                    if (g.owner(a) != Player::eve) throw Error(to_string(g, a) + " is not Eve's action");
            } catch (const std::exception& e) {
                std::cout << "error: " << e.what() << "\n";
                continue;
            }
            auto app = round_applicable(g, plan, {mc, me});
            if (!app) {
                std::cout << "not applicable: " << app.problems.front() << "\n";
                continue;
            }
            plan = apply_round(g, plan, {mc, me});
            TraceStep s{round, mc, me, plan.now, is_admissible(g, plan), false};
            s.successful = s.admissible && is_successful(g, plan);
            std::cout << "  now " << plan.now << ", admissible " << (s.admissible ? "yes" : "no")
                      << ", successful " << (s.successful ? "yes" : "no") << "\n";
            if (tr) {
                tr << me.t << " " << actions_string(g, me.actions) << "\n";
                tr << "# " << step_json(g, 0, s).dump() << "\n";
            }
            if (s.successful) {
                std::cout << "successful plan reached\n" << format_plan(g.vars(), "final", plan);
                return ok;
            }
            break;
        }
    }
    return negative;
}

int cmd_format(const std::string& file, const std::string& game_path)
{
    std::string text = read_file(file);
    std::string kind = first_word(text);
    if (kind == "game" || kind == "problem") {
        Model m = load_model(file);
        std::cout << (m.problem ? format_problem(*m.problem) : format_game(m.game));
        return ok;
    }
    if (game_path.empty()) throw UsageError("pass --game to format " + kind + " files");
    Model m = load_model(game_path);
    if (kind == "plan") {
        auto p = parse_plan(text, m.game.vars());
        if (!p.ok()) {
            print_diags(p.diagnostics, file);
            return negative;
        }
        std::cout << format_plan(m.game.vars(), p.value->name, p.value->plan, p.value->has_now);
        return ok;
    }
    auto p = parse_flexplan(text, m.game.vars());
    if (!p.ok()) {
        print_diags(p.diagnostics, file);
        return negative;
    }
    std::cout << format_flexplan(m.game.vars(), p.value->name, p.value->plan);
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Timeline-based planning games"};
    app.require_subcommand(1);

    std::string file, game_path, plan_path, flex_path, engine = "fixpoint", strategy_out, strategy, transcript;
    bool as_json = false;
    int max_tokens = 3, horizon = 8;
    std::size_t budget = 0, runs = 1, max_rounds = 64;
    std::uint64_t seed = 1;
    double p = 0.3;
    std::vector<std::string> eve;

    auto* validate = app.add_subcommand("validate", "parse and type-check a file");
    validate->add_option("FILE", file)->required();
    validate->add_option("--game", game_path, "model for plan, flexplan and strategy files");
    validate->add_flag("--json", as_json);

    auto* check = app.add_subcommand("check", "check a plan against a game or problem");
    check->add_option("MODEL", file)->required();
    check->add_option("--plan", plan_path)->required();
    check->add_flag("--json", as_json);

    auto* flex = app.add_subcommand("flex-check", "check a flexible solution plan");
    flex->add_option("PROBLEM", file)->required();
    flex->add_option("--flex", flex_path)->required();
    flex->add_flag("--json", as_json);

    auto* refute = app.add_subcommand("refute-flex", "search for flexible solution plans up to a bound");
    refute->add_option("PROBLEM", file)->required();
    refute->add_option("--max-tokens", max_tokens)->check(CLI::PositiveNumber);
    refute->add_option("--budget", budget);

    auto* window_cmd = app.add_subcommand("window", "print window(G)");
    window_cmd->add_option("MODEL", file)->required();

    auto* solve_cmd = app.add_subcommand("solve", "decide whether Charlie has a winning strategy");
    solve_cmd->add_option("MODEL", file)->required();
    solve_cmd->add_option("--engine", engine)->check(CLI::IsMember({"fixpoint", "bounded"}));
    solve_cmd->add_option("--horizon", horizon, "rounds explored by the bounded engine")->check(CLI::NonNegativeNumber);
    solve_cmd->add_option("--budget", budget, "state or node budget");
    solve_cmd->add_option("--strategy-out", strategy_out);
    solve_cmd->add_flag("--json", as_json);

    auto* sim = app.add_subcommand("simulate", "run a strategy against an Eve strategy");
    sim->add_option("MODEL", file)->required();
    sim->add_option("--strategy", strategy, "strategy file (solved on the fly when omitted)");
    sim->add_option("--eve", eve, "script FILE | random")->expected(1, 2)->required();
    sim->add_option("--seed", seed);
    sim->add_option("--runs", runs)->check(CLI::PositiveNumber);
    sim->add_option("--max-rounds", max_rounds);
    sim->add_option("--p", p, "deadline parameter of the random Eve")->check(CLI::Range(0.01, 1.0));

    auto* play = app.add_subcommand("play", "play Eve against a strategy");
    play->add_option("MODEL", file)->required();
    play->add_option("--strategy", strategy);
    play->add_option("--transcript", transcript, "write Eve's moves as a replayable script");
    play->add_option("--max-rounds", max_rounds);

    auto* fmt = app.add_subcommand("format", "print a file in canonical form");
    fmt->add_option("FILE", file)->required();
    fmt->add_option("--game", game_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*validate) return cmd_validate(file, game_path, as_json);
        if (*check) return cmd_check(file, plan_path, as_json);
        if (*flex) return cmd_flex_check(file, flex_path, as_json);
        if (*refute) return cmd_refute(file, max_tokens, budget);
        if (*window_cmd) {
            std::cout << window(load_model(file).game) << "\n";
            return ok;
        }
        if (*solve_cmd) return cmd_solve(file, engine, horizon, as_json, strategy_out, budget);
        if (*sim) return cmd_simulate(file, strategy, eve, seed, runs, max_rounds, p);
        if (*play) return cmd_play(file, strategy, transcript, max_rounds);
        if (*fmt) return cmd_format(file, game_path);
    } catch (const UsageError& e) {
        std::cerr << "tpg: " << e.what() << "\n";
        return usage;
    } catch (const BudgetExceeded& e) {
        std::cerr << "tpg: " << e.what() << "\n";
        return undecided;
    } catch (const std::exception& e) {
        std::cerr << "tpg: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
