#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/flexible.hpp"
#include "tpg/game.hpp"

namespace tpg {

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    int line = 0;
    int col = 0;
    std::string message;
    std::string hint;

    // "file:line:col: error: message" plus an indented hint line
    std::string str(std::string_view file = "") const;
};

template <class T>
struct Parsed {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    bool ok() const
    {
        if (!value) return false;
        for (const auto& d : diagnostics)
            if (d.severity == Diagnostic::Severity::error) return false;
        return true;
    }
};

// A game file, or a problem file together with its associated game.
struct Model {
    Game game;
    std::optional<ProblemWithUncertainty> problem;
};

struct NamedPlan {
    std::string name;
    PartialPlan plan;
    bool has_now = false;
};

struct NamedFlexPlan {
    std::string name;
    FlexiblePlan plan;
};

Parsed<Game> parse_game(std::string_view text);
Parsed<ProblemWithUncertainty> parse_problem(std::string_view text);
Parsed<Model> parse_model(std::string_view text);
Parsed<NamedPlan> parse_plan(std::string_view text, const Variables& vars);
Parsed<NamedFlexPlan> parse_flexplan(std::string_view text, const Variables& vars);
// One "T ACTIONS" entry per line; ACTIONS is "-" or e.g. "start(x,v)+end(y,w)".
Parsed<std::vector<ScriptEntry>> parse_script(std::string_view text, const Game& g);

std::string format_game(const Game& g);
std::string format_problem(const ProblemWithUncertainty& p);
std::string format_plan(const Variables& vars, const std::string& name, const PartialPlan& plan,
                        bool with_now = true);
std::string format_flexplan(const Variables& vars, const std::string& name, const FlexiblePlan& plan);

std::string read_file(const std::string& path); // throws Error

} // namespace tpg
