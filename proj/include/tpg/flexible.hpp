#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tpg/game.hpp"

namespace tpg {

struct FlexibleToken {
    std::string name;
    ValueId value = 0;
    Interval end{1, 1};
    Interval duration{1, 1};
    friend bool operator==(const FlexibleToken&, const FlexibleToken&) = default;
};

struct FlexibleTimeline {
    VarId var = 0;
    std::vector<FlexibleToken> tokens;
    friend bool operator==(const FlexibleTimeline&, const FlexibleTimeline&) = default;
};

struct FlexTerm {
    VarId var = 0;
    std::size_t index = 0; // 0-based token index on the timeline of var
    Endpoint ep = Endpoint::start;
    friend bool operator==(const FlexTerm&, const FlexTerm&) = default;
};

// Same reading as Atom: binary bounds right - left, pointwise bounds instant - left.
struct FlexAtom {
    bool pointwise = false;
    FlexTerm left;
    FlexTerm right;
    Time instant = 0;
    Interval bounds;
    friend bool operator==(const FlexAtom&, const FlexAtom&) = default;
};

struct FlexiblePlan {
    std::vector<FlexibleTimeline> timelines;
    std::vector<FlexAtom> constraints;

    const FlexibleTimeline* find(VarId var) const;
    friend bool operator==(const FlexiblePlan&, const FlexiblePlan&) = default;
};

struct ProblemWithUncertainty {
    std::string name;
    Variables vars; // side tells controlled from external
    std::vector<Rule> rules;
    FlexiblePlan observation;
};

// Well-formedness of a flexible timeline (window shapes and the nesting clause).
Report check_nesting(const Variables& vars, const FlexibleTimeline& tl);
// Timelines, constraint references, observation restricted to external variables.
Report check_flexible_plan(const Variables& vars, const FlexiblePlan& plan);
Report check_problem(const ProblemWithUncertainty& p);

class InstanceMismatch : public Error {
public:
    enum class Kind { length, variable };
    InstanceMismatch(Kind k, const std::string& msg) : Error(msg), kind(k) {}
    Kind kind;
};

bool is_instance(const FlexibleTimeline& flex, VarId var, const Timeline& sched);

bool flex_atom_holds(const FlexAtom& a, const ScheduledPlan& plan);

struct EnumerationStats {
    std::size_t instances = 0;
    bool capped = false; // some unbounded duration window was cut at the cap
};

// Instances in ascending lexicographic order of durations (timelines in the
// order given, tokens left to right). The callback returns false to stop.
// Throws BudgetExceeded once more than `budget` instances are produced.
EnumerationStats enumerate_instances(const FlexiblePlan& plan, std::size_t nvars, Time cap,
                                     std::size_t budget,
                                     const std::function<bool(const ScheduledPlan&)>& fn);

std::size_t default_instance_budget(); // TPG_INSTANCE_BUDGET or 10^6

struct FlexVerdict {
    enum class Kind { solution, not_solution, likely, unknown };
    Kind kind = Kind::unknown;
    int condition = 0; // failing condition, 0 for malformed candidates
    std::string message;
    std::optional<ScheduledPlan> counterexample;
    std::size_t instances = 0;
    bool capped = false;
};

const char* to_string(FlexVerdict::Kind k);

struct FlexOptions {
    std::size_t budget = 0; // 0: default_instance_budget()
    Time cap = 0;           // 0: window of the associated game
    std::uint64_t seed = 1;
};

FlexVerdict is_flexible_solution(const ProblemWithUncertainty& problem, const FlexiblePlan& candidate,
                                 const FlexOptions& opts = {});

// Controlled and external variables, S as system rules, O encoded as domain rules.
Game associate_game(const ProblemWithUncertainty& problem);

struct RefuteResult {
    enum class Verdict { none_exists, solution_found, unknown };
    Verdict verdict = Verdict::unknown;
    int bound = 0;
    std::optional<FlexiblePlan> solution;
    std::size_t sequences = 0;
    std::size_t filtered = 0;
    std::optional<Time> cap; // set when an unbounded window was capped
    std::string note;
};

const char* to_string(RefuteResult::Verdict v);

RefuteResult refute_flexible_solutions(const ProblemWithUncertainty& problem, int max_tokens,
                                       std::size_t budget = 0);

} // namespace tpg
