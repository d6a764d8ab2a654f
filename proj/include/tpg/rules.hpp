#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpg/model.hpp"

namespace tpg {

enum class Endpoint : std::uint8_t { start, end };

// Slot 0 is the trigger, slots 1..n the tokens quantified by a statement.
struct Term {
    int slot = 0;
    Endpoint ep = Endpoint::start;
    friend bool operator==(const Term&, const Term&) = default;
};

// binary:    l <= time(right) - time(left) <= u
// pointwise: l <= instant - time(left) <= u
struct Atom {
    enum class Kind : std::uint8_t { binary, pointwise };

    Kind kind = Kind::binary;
    Term left;
    Term right;
    Time instant = 0;
    Interval bounds;

    bool pointwise() const { return kind == Kind::pointwise; }
    bool bounded() const { return bounds.hi.is_finite(); }

    static Atom binary(Term l, Term r, Interval b) { return {Kind::binary, l, r, 0, b}; }
    static Atom at(Term l, Time t, Interval b) { return {Kind::pointwise, l, Term{}, t, b}; }

    friend bool operator==(const Atom&, const Atom&) = default;
};

// Sugar, expanded into core atoms.
Atom meets(int a, int b);
std::vector<Atom> during(int a, int b); // a within b
Atom duration_in(int a, Interval b);
Atom starts_at(int a, Time t);

struct Binding {
    std::string name;
    VarId var = 0;
    ValueId value = 0;
    friend bool operator==(const Binding&, const Binding&) = default;
};

struct Statement {
    std::vector<Binding> tokens; // slot i+1
    std::vector<Atom> atoms;
    friend bool operator==(const Statement&, const Statement&) = default;
};

struct Rule {
    std::string name;
    std::optional<Binding> trigger;
    std::vector<Statement> body;

    bool triggerless() const { return !trigger.has_value(); }
    friend bool operator==(const Rule&, const Rule&) = default;
};

struct Problem {
    Variables vars;
    std::vector<Rule> rules;
};

// Empty string when the rule is well typed against vars.
std::string check_rule(const Rule& rule, const Variables& vars);

using Assignment = std::vector<std::optional<Span>>;

bool atom_eval(const Atom& atom, std::span<const std::optional<Span>> assignment);

struct MatchOptions {
    bool distinct_witnesses = false;
};

struct TokenRef {
    VarId var = 0;
    std::size_t index = 0; // 0-based closed token index
    friend bool operator==(const TokenRef&, const TokenRef&) = default;
    friend auto operator<=>(const TokenRef&, const TokenRef&) = default;
};

using Witness = std::vector<TokenRef>;

std::optional<Witness> match_statement(const Statement& st, const ScheduledPlan& plan,
                                       std::optional<TokenRef> trigger = std::nullopt,
                                       const MatchOptions& opts = {});

// First trigger token for which no statement has a witness; for triggerless
// rules the result carries no token.
struct RuleCheck {
    bool satisfied = true;
    std::optional<TokenRef> failing_trigger;
};

RuleCheck check_rule_on(const Rule& rule, const ScheduledPlan& plan, const MatchOptions& opts = {});
bool rule_satisfied(const Rule& rule, const ScheduledPlan& plan, const MatchOptions& opts = {});

struct Violation {
    enum class Kind { shape, transition, duration, rule };
    Kind kind = Kind::shape;
    VarId var = -1;
    std::size_t index = 0;
    int rule = -1;
    std::string message;
};

struct SolutionReport {
    bool ok = true;
    std::vector<Violation> violations;
};

SolutionReport check_solution(const Problem& problem, const ScheduledPlan& plan,
                              const MatchOptions& opts = {});
bool is_solution_plan(const Problem& problem, const ScheduledPlan& plan,
                      const MatchOptions& opts = {});

} // namespace tpg
