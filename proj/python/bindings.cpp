#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tpg/json_io.hpp"

namespace py = pybind11;
using namespace tpg;

namespace {

py::object to_py(const json& j)
{
    switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
        py::list out;
        for (const auto& e : j) out.append(to_py(e));
        return out;
    }
    case json::value_t::object: {
        py::dict out;
        for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
        return out;
    }
    default: return py::none();
    }
}

std::string joined(const std::vector<Diagnostic>& ds, const std::string& file)
{
    std::string s;
    for (const auto& d : ds) s += "\n" + d.str(file);
    return s;
}

Model model_from_text(const std::string& text, const std::string& file = "<text>")
{
    auto p = parse_model(text);
    if (!p.ok()) throw py::value_error("cannot parse " + file + ":" + joined(p.diagnostics, file));
    return std::move(*p.value);
}

const ProblemWithUncertainty& need_problem(const Model& m)
{
    if (!m.problem) throw py::value_error("this operation needs a problem, not a game");
    return *m.problem;
}

} // namespace

PYBIND11_MODULE(_tpg, m)
{
    m.doc() = "Timeline-based planning games";

    py::register_exception<Error>(m, "TpgError", PyExc_RuntimeError);

    py::class_<Model>(m, "Model")
        .def_static("parse", [](const std::string& text) { return model_from_text(text); }, py::arg("text"))
        .def_static("load", [](const std::string& path) { return model_from_text(read_file(path), path); },
                    py::arg("path"))
        .def_property_readonly("name", [](const Model& md) { return md.game.name(); })
        .def_property_readonly("is_problem", [](const Model& md) { return md.problem.has_value(); })
        .def_property_readonly("variables",
                               [](const Model& md) {
                                   py::dict out;
                                   for (const auto& v : md.game.vars()) {
                                       py::list vals;
                                       for (const auto& d : v.values) vals.append(d.name);
                                       out[py::str(v.name)] = vals;
                                   }
                                   return out;
                               })
        .def("window", [](const Model& md) { return window(md.game); })
        .def(
            "solve",
            [](const Model& md, std::size_t budget) {
                SolveOptions o;
                o.state_budget = budget;
                SolveResult r;
                {
                    py::gil_scoped_release nogil;
                    r = solve(md.game, o);
                }
                py::dict out = to_py(solve_json(md.game, r));
                if (r.strategy) {
                    std::ostringstream s;
                    write_strategy(md.game, *r.strategy, s);
                    out["strategy"] = s.str();
                }
                return out;
            },
            py::arg("budget") = 0)
        .def(
            "bounded",
            [](const Model& md, int horizon, std::size_t budget) {
                BoundedResult r;
                {
                    py::gil_scoped_release nogil;
                    r = bounded_solve(md.game, horizon, budget);
                }
                return to_py(bounded_json(md.game, horizon, r));
            },
            py::arg("horizon"), py::arg("budget") = 0)
        .def(
            "check_plan",
            [](const Model& md, const std::string& text) {
                const Variables& vars = md.game.vars();
                auto p = parse_plan(text, vars);
                if (!p.ok()) throw py::value_error("cannot parse plan:" + joined(p.diagnostics, "<plan>"));
                Problem pb = md.problem ? Problem{vars, md.problem->rules} : md.game.full_problem();
                return to_py(check_json(vars, check_solution(pb, ScheduledPlan{p.value->plan.timelines})));
            },
            py::arg("plan"))
        .def(
            "flex_check",
            [](const Model& md, const std::string& text) {
                const auto& prob = need_problem(md);
                auto p = parse_flexplan(text, prob.vars);
                if (!p.ok()) throw py::value_error("cannot parse flexplan:" + joined(p.diagnostics, "<flexplan>"));
                return to_py(flex_json(prob.vars, is_flexible_solution(prob, p.value->plan)));
            },
            py::arg("flexplan"))
        .def(
            "refute_flex",
            [](const Model& md, int max_tokens, std::size_t budget) {
                const auto& prob = need_problem(md);
                RefuteResult r;
                {
                    py::gil_scoped_release nogil;
                    r = refute_flexible_solutions(prob, max_tokens, budget);
                }
                return to_py(refute_json(prob.vars, r));
            },
            py::arg("max_tokens") = 3, py::arg("budget") = 0)
        .def("format", [](const Model& md) { return md.problem ? format_problem(*md.problem) : format_game(md.game); })
        .def("__repr__", [](const Model& md) {
            return std::string("<tpg.Model ") + (md.problem ? "problem " : "game ") + md.game.name() + ">";
        });

    m.def(
        "diagnostics",
        [](const std::string& text, const std::string& file) {
            return to_py(diagnostics_json(parse_model(text).diagnostics, file));
        },
        py::arg("text"), py::arg("file") = "<text>");
}
