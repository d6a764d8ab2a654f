#include "tpg/json_io.hpp"

namespace tpg {

json solve_json(const Game& g, const SolveResult& r)
{
    json j = {{"game", g.name()},
              {"engine", "fixpoint"},
              {"verdict", to_string(r.verdict)},
              {"window", r.window},
              {"states", r.states},
              {"eve_states", r.eve_states},
              {"d_states", r.d_states},
              {"w_states", r.w_states},
              {"attractor", r.attractor},
              {"winning", r.winning},
              {"label_mismatches", r.label_mismatches}};
    if (r.strategy) {
        j["strategy_id"] = r.strategy->id();
        j["strategy_entries"] = r.strategy->entries.size();
    } else {
        j["strategy_id"] = nullptr;
        j["strategy_entries"] = 0;
    }
    return j;
}

json bounded_json(const Game& g, int horizon, const BoundedResult& r)
{
    return {{"game", g.name()},
            {"engine", "bounded"},
            {"horizon", horizon},
            {"verdict", to_string(r.verdict)},
            {"nodes", r.nodes}};
}

json plan_json(const Variables& vars, const ScheduledPlan& p)
{
    json j = json::object();
    for (std::size_t x = 0; x < p.timelines.size(); ++x) {
        json toks = json::array();
        const auto& tl = p.timelines[x];
        for (std::size_t i = 0; i < tl.size(); ++i)
            toks.push_back({{"value", vars[x].value_name(tl.tokens()[i].value)},
                            {"start", tl.start(i)},
                            {"end", tl.end(i)}});
        j[vars[x].name] = toks;
    }
    return j;
}

json check_json(const Variables& vars, const SolutionReport& r)
{
    json vs = json::array();
    for (const auto& v : r.violations) {
        static const char* kinds[] = {"shape", "transition", "duration", "rule"};
        json e = {{"kind", kinds[static_cast<int>(v.kind)]}, {"message", v.message}};
        if (v.var >= 0) {
            e["variable"] = vars[v.var].name;
            e["token"] = v.index + 1;
        }
        vs.push_back(e);
    }
    return {{"solution", r.ok}, {"violations", vs}};
}

json flex_json(const Variables& vars, const FlexVerdict& v)
{
    json j = {{"verdict", to_string(v.kind)},
              {"condition", v.condition},
              {"message", v.message},
              {"instances", v.instances},
              {"capped", v.capped}};
    j["counterexample"] = v.counterexample ? plan_json(vars, *v.counterexample) : json(nullptr);
    return j;
}

json refute_json(const Variables& vars, const RefuteResult& r)
{
    json j = {{"verdict", to_string(r.verdict)},
              {"bound", r.bound},
              {"sequences", r.sequences},
              {"filtered", r.filtered},
              {"note", r.note}};
    j["cap"] = r.cap ? json(*r.cap) : json(nullptr);
    j["counterexample"] = r.solution ? json(format_flexplan(vars, "solution", *r.solution)) : json(nullptr);
    return j;
}

json step_json(const Game& g, std::size_t run, const TraceStep& s)
{
    return {{"run", run},
            {"round", s.round},
            {"charlie", to_string(g, s.charlie)},
            {"eve", to_string(g, s.eve)},
            {"now", s.now},
            {"admissible", s.admissible},
            {"successful", s.successful}};
}

namespace {

const char* run_result(const Trace& t)
{
    if (t.error) return "error";
    if (t.success) return "success";
    if (t.fault == Fault::eve) return "eve-fault";
    if (t.fault == Fault::charlie) return "charlie-fault";
    return "no-success";
}

} // namespace

json run_summary_json(std::size_t run, const Trace& t)
{
    json j = {{"run", run},
              {"result", run_result(t)},
              {"rounds", t.steps.size()}};
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    return j;
}

json diagnostics_json(const std::vector<Diagnostic>& ds, const std::string& file)
{
    json arr = json::array();
    for (const auto& d : ds)
        arr.push_back({{"file", file},
                       {"line", d.line},
                       {"col", d.col},
                       {"severity", d.severity == Diagnostic::Severity::error ? "error" : "warning"},
                       {"message", d.message},
                       {"hint", d.hint}});
    return arr;
}

} // namespace tpg
