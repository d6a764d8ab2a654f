#include "tpg/model.hpp"

#include <algorithm>

namespace tpg {

ValueId StateVariable::find_value(std::string_view n) const
{
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].name == n) return static_cast<ValueId>(i);
    return -1;
}

bool StateVariable::allows(ValueId from, ValueId to) const
{
    const auto& t = transitions.at(from);
    return std::find(t.begin(), t.end(), to) != t.end();
}

std::string StateVariable::check() const
{
    if (values.empty()) return "variable '" + name + "' has no values";
    if (transitions.size() != values.size())
        return "variable '" + name + "' has no transition entry for some value";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& d = values[i].duration;
        if (d.lo < 1) return "value '" + values[i].name + "' of '" + name + "' has d_min < 1";
        if (d.empty())
            return "value '" + values[i].name + "' of '" + name + "' has d_min > d_max";
        for (ValueId t : transitions[i])
            if (t < 0 || t >= static_cast<ValueId>(values.size()))
                return "transition target outside the domain of '" + name + "'";
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i].name == values[j].name)
                return "duplicate value '" + values[i].name + "' in '" + name + "'";
    }
    return {};
}

VarId find_variable(const Variables& vars, std::string_view name)
{
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) return static_cast<VarId>(i);
    return -1;
}

Timeline::Timeline(const std::vector<Token>& tokens)
{
    for (const auto& t : tokens) push(t);
}

void Timeline::push(Token t)
{
    if (open_) throw Error("push on an open timeline");
    if (t.duration < 1) throw Error("token duration must be positive");
    ends_.push_back(sat_add(horizon(), t.duration));
    tokens_.push_back(t);
}

void Timeline::open(ValueId v)
{
    if (open_) throw Error("timeline already open");
    open_ = v;
}

void Timeline::close_open(Time duration)
{
    if (!open_) throw Error("no open token to close");
    ValueId v = *open_;
    open_.reset();
    push({v, duration});
}

void Timeline::pop()
{
    if (open_) {
        open_.reset();
        return;
    }
    if (tokens_.empty()) throw Error("pop on empty timeline");
    tokens_.pop_back();
    ends_.pop_back();
}

std::optional<ValueId> Timeline::last_value() const
{
    if (open_) return open_;
    if (tokens_.empty()) return std::nullopt;
    return tokens_.back().value;
}

PartialPlan PartialPlan::empty(std::size_t nvars)
{
    PartialPlan p;
    p.timelines.resize(nvars);
    return p;
}

bool PartialPlan::is_empty() const
{
    return now == 0 && std::all_of(timelines.begin(), timelines.end(),
                                   [](const Timeline& t) { return t.empty(); });
}

Span token_interval(const PartialPlan& plan, VarId var, std::size_t index)
{
    if (var < 0 || static_cast<std::size_t>(var) >= plan.timelines.size())
        throw Error("unknown variable");
    const auto& tl = plan.timelines[var];
    if (index < 1 || index > tl.size())
        throw Error("token index " + std::to_string(index) + " out of range");
    return tl.span(index - 1);
}

Span token_interval(const Variables& vars, const PartialPlan& plan, std::string_view var,
                    std::size_t index)
{
    VarId id = find_variable(vars, var);
    if (id < 0) throw Error("unknown variable '" + std::string(var) + "'");
    return token_interval(plan, id, index);
}

ScheduledPlan closure(const PartialPlan& plan)
{
    if (plan.is_empty()) throw Error("closure of the empty partial plan");
    ScheduledPlan out;
    out.timelines.reserve(plan.timelines.size());
    for (const auto& tl : plan.timelines) {
        Timeline c = tl;
        if (c.is_open()) c.close_open(plan.now - c.horizon());
        out.timelines.push_back(std::move(c));
    }
    return out;
}

Report validate_partial_plan(const PartialPlan& plan)
{
    if (plan.now < 0) return Report::fail("negative current time");
    for (std::size_t i = 0; i < plan.timelines.size(); ++i) {
        const auto& tl = plan.timelines[i];
        for (const auto& t : tl.tokens())
            if (t.duration < 1)
                return Report::fail("timeline " + std::to_string(i) + " has a token of duration < 1");
        if (tl.is_open()) {
            if (!(tl.horizon() < plan.now))
                return Report::fail("open timeline " + std::to_string(i) +
                                    " has horizon " + std::to_string(tl.horizon()) +
                                    " not below now = " + std::to_string(plan.now));
        } else if (tl.horizon() != plan.now) {
            return Report::fail("closed timeline " + std::to_string(i) + " has horizon " +
                                std::to_string(tl.horizon()) + " but now = " +
                                std::to_string(plan.now));
        }
    }
    return Report::pass();
}

Report validate_partial_plan(const Variables& vars, const PartialPlan& plan)
{
    if (plan.timelines.size() != vars.size())
        return Report::fail("plan has " + std::to_string(plan.timelines.size()) +
                            " timelines for " + std::to_string(vars.size()) + " variables");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto n = static_cast<ValueId>(vars[i].values.size());
        const auto& tl = plan.timelines[i];
        for (const auto& t : tl.tokens())
            if (t.value < 0 || t.value >= n)
                return Report::fail("undeclared value on timeline " + vars[i].name);
        if (tl.open_value() && (*tl.open_value() < 0 || *tl.open_value() >= n))
            return Report::fail("undeclared value on timeline " + vars[i].name);
    }
    return validate_partial_plan(plan);
}

} // namespace tpg
