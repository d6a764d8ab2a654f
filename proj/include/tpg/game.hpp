#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/rules.hpp"

namespace tpg {

enum class Player { charlie, eve };

struct Action {
    enum class Kind : std::uint8_t { start, end };
    Kind kind = Kind::start;
    VarId var = 0;
    ValueId value = 0;

    bool is_start() const { return kind == Kind::start; }
    friend bool operator==(const Action&, const Action&) = default;
};

// Order used for tie-breaking: variable, value, start before end.
bool action_less(const Action& a, const Action& b);

struct Move {
    bool wait = false;
    Time t = 0;
    std::vector<Action> actions; // kept sorted by action_less

    static Move play(Time t, std::vector<Action> actions = {});
    static Move wait_until(Time t);
    friend bool operator==(const Move&, const Move&) = default;
};

// Fewer actions first, then lexicographic on the sorted action list.
bool move_less(const Move& a, const Move& b);

struct Round {
    Move charlie;
    Move eve;
};

class Game {
public:
    Game() = default;
    Game(std::string name, Variables vars, std::vector<Rule> system_rules,
         std::vector<Rule> domain_rules);

    const std::string& name() const { return name_; }
    const Variables& vars() const { return vars_; }
    const std::vector<Rule>& system_rules() const { return system_; }
    const std::vector<Rule>& domain_rules() const { return domain_; }
    const Problem& domain_problem() const { return p_d_; }
    const Problem& full_problem() const { return p_g_; }

    Player owner(const Action& a) const;
    Player start_owner(VarId x) const;
    Player end_owner(VarId x, ValueId v) const;

private:
    std::string name_;
    Variables vars_;
    std::vector<Rule> system_;
    std::vector<Rule> domain_;
    Problem p_d_;
    Problem p_g_;
};

struct Applicability {
    bool ok = true;
    std::vector<std::string> problems;
    explicit operator bool() const { return ok; }
};

Applicability move_wellformed(const Game& g, const Move& m, Player p);
Applicability round_applicable(const Game& g, const PartialPlan& plan, const Round& r);
PartialPlan apply_round(const Game& g, const PartialPlan& plan, const Round& r);

struct PlayResult {
    PartialPlan plan;
    std::optional<std::size_t> failed_index;
    std::string diagnostic;
    bool ok() const { return !failed_index; }
};

PlayResult apply_play(const Game& g, const PartialPlan& initial, const std::vector<Round>& rounds);

// Labels; the empty plan is judged as the scheduled plan with empty timelines.
bool is_admissible(const Game& g, const PartialPlan& plan);
bool is_successful(const Game& g, const PartialPlan& plan);

// Per variable: closed, or open on a value.
struct TimelineStatus {
    bool open = false;
    ValueId value = 0;
    friend bool operator==(const TimelineStatus&, const TimelineStatus&) = default;
};

std::vector<TimelineStatus> statuses(const PartialPlan& plan);

// Moves with t = now that can appear in some applicable round, sorted by move_less.
std::vector<Move> charlie_moves(const Game& g, const std::vector<TimelineStatus>& st, Time now);
// Eve replies to a given Charlie play move.
std::vector<Move> eve_moves(const Game& g, const std::vector<TimelineStatus>& st, const Move& charlie);

// Structural fault introduced by the last round (transition or duration bound),
// blamed on the player owning the offending action; ties blame Charlie.
enum class Fault { none, charlie, eve };
Fault round_fault(const Game& g, const PartialPlan& before, const PartialPlan& after);

class StrategyError : public Error {
public:
    using Error::Error;
};

using CharlieStrategy = std::function<Move(const PartialPlan&)>;
using EveStrategy = std::function<Move(const PartialPlan&, const Move&)>;

struct TraceStep {
    std::size_t round = 0;
    Move charlie;
    Move eve;
    Time now = 0;
    bool admissible = false;
    bool successful = false;
};

struct Trace {
    std::vector<TraceStep> steps;
    std::vector<PartialPlan> snapshots; // plan after each step
    bool success = false;
    Fault fault = Fault::none; // the run stops at the first fault
    std::optional<std::string> error;
};

Trace simulate(const Game& g, const CharlieStrategy& charlie, const EveStrategy& eve,
               std::size_t max_rounds);

struct ScriptEntry {
    Time t = 0;
    std::vector<Action> actions;
};

EveStrategy scripted_eve(const Game& g, std::vector<ScriptEntry> script);

struct RandomEveOptions {
    std::uint64_t seed = 1;
    double p = 0.3; // success probability of the geometric deadlines
};

EveStrategy random_admissible_eve(const Game& g, const RandomEveOptions& opts);

std::string to_string(const Game& g, const Action& a);
std::string to_string(const Game& g, const Move& m);
// "start(x,v)+end(x,v)" or "-"
std::string actions_string(const Game& g, const std::vector<Action>& acts);
// Inverse of actions_string; accepts ',' or '+' between actions and ignores blanks.
std::vector<Action> parse_actions(const Game& g, std::string_view text);

} // namespace tpg
