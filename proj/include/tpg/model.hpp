#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/time.hpp"

namespace tpg {

using VarId = int;
using ValueId = int;

enum class Side { controlled, external };
enum class Control { controllable, uncontrollable };

struct ValueDecl {
    std::string name;
    Interval duration{1, 1};
    Control control = Control::controllable;
};

struct StateVariable {
    std::string name;
    Side side = Side::controlled;
    std::vector<ValueDecl> values;
    // transitions[v] = values allowed to follow v
    std::vector<std::vector<ValueId>> transitions;

    ValueId find_value(std::string_view name) const;
    bool allows(ValueId from, ValueId to) const;
    const Interval& duration(ValueId v) const { return values.at(v).duration; }
    Control control(ValueId v) const { return values.at(v).control; }
    const std::string& value_name(ValueId v) const { return values.at(v).name; }

    // Empty string when the declaration is well formed.
    std::string check() const;
};

using Variables = std::vector<StateVariable>;

VarId find_variable(const Variables& vars, std::string_view name);

struct Token {
    ValueId value = 0;
    Time duration = 1;
    friend bool operator==(const Token&, const Token&) = default;
};

struct Span {
    Time start = 0;
    Time end = 0;
    friend bool operator==(const Span&, const Span&) = default;
};

// Closed tokens with cached end times, plus an optional open tail.
class Timeline {
public:
    Timeline() = default;
    explicit Timeline(const std::vector<Token>& tokens);

    void push(Token t);
    void open(ValueId v);
    void close_open(Time duration);
    void pop();

    const std::vector<Token>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    bool is_open() const { return open_.has_value(); }
    bool empty() const { return tokens_.empty() && !open_; }
    std::optional<ValueId> open_value() const { return open_; }

    // 0-based
    Time start(std::size_t i) const { return i == 0 ? 0 : ends_[i - 1]; }
    Time end(std::size_t i) const { return ends_[i]; }
    Span span(std::size_t i) const { return {start(i), end(i)}; }
    Time horizon() const { return ends_.empty() ? 0 : ends_.back(); }

    // value of the last token, open or closed
    std::optional<ValueId> last_value() const;

    friend bool operator==(const Timeline& a, const Timeline& b)
    {
        return a.tokens_ == b.tokens_ && a.open_ == b.open_;
    }

private:
    std::vector<Token> tokens_;
    std::vector<Time> ends_;
    std::optional<ValueId> open_;
};

struct ScheduledPlan {
    std::vector<Timeline> timelines;
    friend bool operator==(const ScheduledPlan&, const ScheduledPlan&) = default;
};

struct PartialPlan {
    std::vector<Timeline> timelines;
    Time now = 0;

    static PartialPlan empty(std::size_t nvars);
    bool is_empty() const;
    friend bool operator==(const PartialPlan&, const PartialPlan&) = default;
};

struct Report {
    bool ok = true;
    std::string message;

    explicit operator bool() const { return ok; }
    static Report pass() { return {}; }
    static Report fail(std::string msg) { return {false, std::move(msg)}; }
};

// index is 1-based, following the usual tau_1 ... tau_k numbering
Span token_interval(const PartialPlan& plan, VarId var, std::size_t index);
Span token_interval(const Variables& vars, const PartialPlan& plan, std::string_view var,
                    std::size_t index);

ScheduledPlan closure(const PartialPlan& plan);

Report validate_partial_plan(const PartialPlan& plan);
// Also checks that every value id is declared.
Report validate_partial_plan(const Variables& vars, const PartialPlan& plan);

} // namespace tpg
