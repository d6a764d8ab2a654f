#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tpg/flexible.hpp"
#include "tpg/frontend.hpp"
#include "tpg/solver.hpp"

namespace tpg {

using nlohmann::json;

json solve_json(const Game& g, const SolveResult& r);
json bounded_json(const Game& g, int horizon, const BoundedResult& r);
json check_json(const Variables& vars, const SolutionReport& r);
json flex_json(const Variables& vars, const FlexVerdict& v);
json refute_json(const Variables& vars, const RefuteResult& r);
json step_json(const Game& g, std::size_t run, const TraceStep& s);
json run_summary_json(std::size_t run, const Trace& t);
json diagnostics_json(const std::vector<Diagnostic>& ds, const std::string& file);

json plan_json(const Variables& vars, const ScheduledPlan& p);

} // namespace tpg
