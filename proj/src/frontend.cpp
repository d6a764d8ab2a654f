#include "tpg/frontend.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tpg {

std::string Diagnostic::str(std::string_view file) const
{
    std::string s;
    if (!file.empty()) s += std::string(file) + ":";
    s += std::to_string(line) + ":" + std::to_string(col) + ": ";
    s += severity == Severity::error ? "error: " : "warning: ";
    s += message;
    if (!hint.empty()) s += "\n  hint: " + hint;
    return s;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

struct Tok {
    enum class K { ident, number, punct, end };
    K k = K::end;
    std::string text;
    int line = 1;
    int col = 1;
};

struct ParseError {
    Diagnostic d;
};

std::vector<Tok> lex(std::string_view s)
{
    std::vector<Tok> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t j = 0; j < n && i < s.size(); ++j, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < s.size() && s[i + 1] == '/')) {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        Tok t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.k = Tok::K::ident;
            t.text = std::string(s.substr(i, j - i));
            adv(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.k = Tok::K::number;
            t.text = std::string(s.substr(i, j - i));
            adv(j - i);
        } else {
            t.k = Tok::K::punct;
            std::string two(s.substr(i, 2));
            if (two == "=>" || two == "->") {
                t.text = two;
                adv(2);
            } else if (std::string_view("{}[](),;:.=-&+").find(c) != std::string_view::npos) {
                t.text = std::string(1, c);
                adv(1);
            } else {
                throw ParseError{{Diagnostic::Severity::error, line, col,
                                  std::string("unexpected character '") + c + "'", ""}};
            }
        }
        out.push_back(std::move(t));
    }
    Tok e;
    e.line = line;
    e.col = col;
    e.text = "end of input";
    out.push_back(e);
    return out;
}

// Token reference inside a rule or plan constraint, resolved later.
struct NamedTerm {
    std::string name;
    Endpoint ep = Endpoint::start;
    Tok at;
};

struct RawAtom {
    bool pointwise = false;
    NamedTerm left;
    NamedTerm right;
    Time instant = 0;
    Interval bounds;
};

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    std::vector<Diagnostic> diags;

    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at_end() const { return peek().k == Tok::K::end; }
    const Tok& next()
    {
        const Tok& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool is(std::string_view s, std::size_t k = 0) const
    {
        return peek(k).k != Tok::K::end && peek(k).k != Tok::K::number && peek(k).text == s;
    }
    bool accept(std::string_view s)
    {
        if (!is(s)) return false;
        next();
        return true;
    }
    [[noreturn]] void fail(const Tok& t, const std::string& msg, const std::string& hint = "")
    {
        throw ParseError{{Diagnostic::Severity::error, t.line, t.col, msg, hint}};
    }
    void report(const Tok& t, const std::string& msg, const std::string& hint = "")
    {
        diags.push_back({Diagnostic::Severity::error, t.line, t.col, msg, hint});
    }
    const Tok& expect(std::string_view s)
    {
        if (!is(s)) fail(peek(), "expected '" + std::string(s) + "' but found '" + peek().text + "'");
        return next();
    }
    const Tok& ident(const char* what = "a name")
    {
        if (peek().k != Tok::K::ident) fail(peek(), std::string("expected ") + what + " but found '" + peek().text + "'");
        return next();
    }
    Time number()
    {
        if (peek().k != Tok::K::number) fail(peek(), "expected a number but found '" + peek().text + "'");
        const Tok& t = next();
        if (t.text.size() > 15) fail(t, "number too large");
        return std::stoll(t.text);
    }
    Time signed_number()
    {
        bool neg = accept("-");
        Time n = number();
        return neg ? -n : n;
    }
    // [l,u] with u possibly inf; reports empty intervals but keeps going
    Interval interval()
    {
        const Tok& open = expect("[");
        Interval i;
        i.lo = signed_number();
        expect(",");
        if (accept("inf"))
            i.hi = Bound::infinity();
        else
            i.hi = signed_number();
        expect("]");
        if (i.empty())
            report(open, "empty bound interval " + i.str(), "the lower bound must not exceed the upper bound");
        else if (i.lo < 0)
            report(open, "negative lower bound in " + i.str(), "bounds are natural numbers");
        return i;
    }

    // ---- model ----------------------------------------------------------------

    void var_decl(Variables& vars)
    {
        expect("var");
        const Tok& nt = ident("a variable name");
        StateVariable v;
        v.name = nt.text;
        if (accept("controlled"))
            v.side = Side::controlled;
        else if (accept("external"))
            v.side = Side::external;
        else
            fail(peek(), "expected 'controlled' or 'external' after the variable name");
        expect("{");
        bool have_trans = false;
        std::vector<std::pair<Tok, std::vector<Tok>>> trans;
        while (!accept("}")) {
            if (accept("values")) {
                do {
                    const Tok& vt = ident("a value name");
                    ValueDecl d;
                    d.name = vt.text;
                    d.duration = interval();
                    if (d.duration.lo < 1)
                        report(vt, "value '" + d.name + "' allows durations below 1",
                               "token durations are positive");
                    if (accept("uncontrollable"))
                        d.control = Control::uncontrollable;
                    else
                        accept("controllable");
                    for (const auto& o : v.values)
                        if (o.name == d.name) report(vt, "duplicate value '" + d.name + "'");
                    v.values.push_back(d);
                } while (accept(","));
                expect(";");
            } else if (accept("transitions")) {
                have_trans = true;
                expect("{");
                while (!accept("}")) {
                    Tok from = ident("a value name");
                    expect("->");
                    std::vector<Tok> to;
                    if (!is(";")) {
                        do to.push_back(ident("a value name"));
                        while (accept(","));
                    }
                    expect(";");
                    trans.push_back({from, to});
                }
            } else {
                fail(peek(), "expected 'values', 'transitions' or '}' in variable " + v.name);
            }
        }
        const std::size_t n = v.values.size();
        v.transitions.assign(n, {});
        if (!have_trans) {
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) v.transitions[a].push_back(static_cast<ValueId>(b));
        }
        for (const auto& [from, to] : trans) {
            ValueId f = v.find_value(from.text);
            if (f < 0) {
                report(from, "unknown value '" + from.text + "' of variable " + v.name);
                continue;
            }
            for (const auto& t : to) {
                ValueId tv = v.find_value(t.text);
                if (tv < 0)
                    report(t, "unknown value '" + t.text + "' of variable " + v.name);
                else if (std::find(v.transitions[f].begin(), v.transitions[f].end(), tv) ==
                         v.transitions[f].end())
                    v.transitions[f].push_back(tv);
            }
        }
        for (auto& t : v.transitions) std::sort(t.begin(), t.end());
        if (find_variable(vars, v.name) >= 0) report(nt, "duplicate variable '" + v.name + "'");
        if (v.values.empty()) report(nt, "variable " + v.name + " declares no values");
        vars.push_back(std::move(v));
    }

    // VAR '=' VALUE inside brackets
    std::pair<VarId, ValueId> var_value(const Variables& vars)
    {
        const Tok& vt = ident("a variable name");
        expect("=");
        const Tok& valt = ident("a value name");
        VarId x = find_variable(vars, vt.text);
        if (x < 0) {
            report(vt, "undeclared variable '" + vt.text + "'", "declare it with 'var " + vt.text + " ...'");
            return {-1, -1};
        }
        ValueId v = vars[x].find_value(valt.text);
        if (v < 0) report(valt, "unknown value '" + valt.text + "' of variable " + vars[x].name);
        return {x, v};
    }

    NamedTerm term()
    {
        NamedTerm t;
        t.at = ident("a token name");
        t.name = t.at.text;
        expect(".");
        if (accept("start"))
            t.ep = Endpoint::start;
        else if (accept("end"))
            t.ep = Endpoint::end;
        else
            fail(peek(), "expected 'start' or 'end' after '" + t.name + ".'");
        return t;
    }

    NamedTerm ref_name()
    {
        NamedTerm t;
        t.at = ident("a token name");
        t.name = t.at.text;
        return t;
    }

    // Appends the core atoms of one (possibly sugared) atom.
    void atom(std::vector<RawAtom>& out)
    {
        auto endpoint = [](NamedTerm t, Endpoint ep) {
            t.ep = ep;
            return t;
        };
        if (peek().k == Tok::K::ident && is("(", 1) &&
            (is("meets") || is("during") || is("before") || is("duration"))) {
            std::string kw = next().text;
            expect("(");
            NamedTerm a = ref_name();
            if (kw == "duration") {
                expect(")");
                Interval b;
                if (accept("=")) {
                    Time k = number();
                    b = {k, k};
                } else {
                    expect("in");
                    b = interval();
                }
                out.push_back({false, endpoint(a, Endpoint::start), endpoint(a, Endpoint::end), 0, b});
                return;
            }
            expect(",");
            NamedTerm b = ref_name();
            expect(")");
            if (kw == "meets") {
                out.push_back({false, endpoint(a, Endpoint::end), endpoint(b, Endpoint::start), 0, {0, 0}});
            } else if (kw == "before") {
                out.push_back({false, endpoint(a, Endpoint::end), endpoint(b, Endpoint::start), 0,
                               {0, Bound::infinity()}});
            } else {
                out.push_back({false, endpoint(b, Endpoint::start), endpoint(a, Endpoint::start), 0,
                               {0, Bound::infinity()}});
                out.push_back({false, endpoint(a, Endpoint::end), endpoint(b, Endpoint::end), 0,
                               {0, Bound::infinity()}});
            }
            return;
        }
        if (peek().k == Tok::K::number) {
            Time n = number();
            expect("-");
            NamedTerm t = term();
            expect("in");
            out.push_back({true, t, {}, n, interval()});
            return;
        }
        NamedTerm x = term();
        if (accept("at")) {
            Time n = number();
            out.push_back({true, x, {}, n, {0, 0}});
            return;
        }
        expect("-");
        NamedTerm y = term();
        expect("in");
        out.push_back({false, y, x, 0, interval()});
    }

    std::vector<RawAtom> clause()
    {
        std::vector<RawAtom> atoms;
        if (accept("true")) return atoms;
        do atom(atoms);
        while (accept("&") || accept("and"));
        return atoms;
    }

    Rule rule(const Variables& vars)
    {
        const Tok& kw = expect("rule");
        (void)kw;
        const Tok& nt = ident("a rule name");
        Rule r;
        r.name = nt.text;
        expect("{");
        std::map<std::string, int> scope0;
        if (!accept("true")) {
            const Tok& tn = ident("a trigger token name");
            expect("[");
            auto [x, v] = var_value(vars);
            expect("]");
            r.trigger = Binding{tn.text, x, v};
            scope0[tn.text] = 0;
        }
        expect("=>");
        do {
            Statement st;
            std::map<std::string, int> scope = scope0;
            if (accept("exists")) {
                do {
                    const Tok& bn = ident("a token name");
                    expect("[");
                    auto [x, v] = var_value(vars);
                    expect("]");
                    if (scope.count(bn.text))
                        report(bn, "duplicate token name '" + bn.text + "' in rule '" + r.name + "'");
                    st.tokens.push_back({bn.text, x, v});
                    scope[bn.text] = static_cast<int>(st.tokens.size());
                } while (accept(","));
                expect(".");
            }
            for (const auto& ra : clause()) {
                auto slot = [&](const NamedTerm& t) -> Term {
                    auto it = scope.find(t.name);
                    if (it == scope.end()) {
                        report(t.at, "unknown token name '" + t.name + "' in rule '" + r.name + "'",
                               "only the trigger and the tokens bound by 'exists' can be used");
                        return {0, t.ep};
                    }
                    return {it->second, t.ep};
                };
                if (ra.pointwise)
                    st.atoms.push_back(Atom::at(slot(ra.left), ra.instant, ra.bounds));
                else
                    st.atoms.push_back(Atom::binary(slot(ra.left), slot(ra.right), ra.bounds));
            }
            r.body.push_back(std::move(st));
        } while (accept("or"));
        accept(";");
        expect("}");
        return r;
    }

    // ---- flexible timelines ------------------------------------------------------

    struct FlexBlock {
        FlexiblePlan plan;
        std::map<std::string, std::pair<VarId, std::size_t>> names;
    };

    void flex_timeline(const Variables& vars, FlexBlock& fb)
    {
        expect("timeline");
        const Tok& vt = ident("a variable name");
        VarId x = find_variable(vars, vt.text);
        if (x < 0) report(vt, "undeclared variable '" + vt.text + "'");
        if (x >= 0 && fb.plan.find(x)) report(vt, "second timeline for variable " + vt.text);
        FlexibleTimeline tl;
        tl.var = x;
        expect("{");
        while (!accept("}")) {
            FlexibleToken t;
            Tok first = ident("a token name or value");
            Tok valt = first;
            if (accept(":")) {
                t.name = first.text;
                valt = ident("a value name");
            } else {
                t.name = vt.text + std::to_string(tl.tokens.size() + 1);
            }
            if (x >= 0) {
                t.value = vars[x].find_value(valt.text);
                if (t.value < 0) report(valt, "unknown value '" + valt.text + "' of variable " + vars[x].name);
            }
            expect("end");
            t.end = interval();
            expect("duration");
            t.duration = interval();
            expect(";");
            if (fb.names.count(t.name)) report(first, "duplicate token name '" + t.name + "'");
            fb.names[t.name] = {x, tl.tokens.size()};
            tl.tokens.push_back(std::move(t));
        }
        if (x >= 0 && !fb.plan.find(x)) {
            bool values_ok = std::all_of(tl.tokens.begin(), tl.tokens.end(),
                                         [](const FlexibleToken& t) { return t.value >= 0; });
            if (values_ok)
                if (auto r = check_nesting(vars, tl); !r)
                    report(vt, r.message,
                           "end windows must nest: the first token's end window equals its duration window, "
                           "and each later end window lies within [e+d, e'+d'] of the previous end window "
                           "and its own duration window");
            fb.plan.timelines.push_back(std::move(tl));
        }
    }

    void flex_constraint(FlexBlock& fb, std::vector<std::pair<RawAtom, Tok>>& pending)
    {
        const Tok& kw = expect("constraint");
        std::vector<RawAtom> atoms;
        atom(atoms);
        expect(";");
        for (auto& a : atoms) pending.push_back({a, kw});
        (void)fb;
    }

    void resolve_constraints(FlexBlock& fb, const std::vector<std::pair<RawAtom, Tok>>& pending)
    {
        for (const auto& [ra, kw] : pending) {
            bool ok = true;
            auto term = [&](const NamedTerm& t) {
                auto it = fb.names.find(t.name);
                if (it == fb.names.end()) {
                    report(t.at, "constraint refers to unknown token '" + t.name + "'");
                    ok = false;
                    return FlexTerm{};
                }
                return FlexTerm{it->second.first, it->second.second, t.ep};
            };
            FlexAtom a;
            a.pointwise = ra.pointwise;
            a.left = term(ra.left);
            if (!ra.pointwise) a.right = term(ra.right);
            a.instant = ra.instant;
            a.bounds = ra.bounds;
            if (ok) fb.plan.constraints.push_back(a);
        }
    }

    FlexBlock flex_body(const Variables& vars)
    {
        FlexBlock fb;
        std::vector<std::pair<RawAtom, Tok>> pending;
        expect("{");
        while (!accept("}")) {
            if (is("timeline"))
                flex_timeline(vars, fb);
            else if (is("constraint"))
                flex_constraint(fb, pending);
            else
                fail(peek(), "expected 'timeline', 'constraint' or '}'");
        }
        resolve_constraints(fb, pending);
        return fb;
    }

    // ---- documents ---------------------------------------------------------------

    Game game_doc()
    {
        expect("game");
        const Tok& nt = ident("a game name");
        expect("{");
        Variables vars;
        std::vector<Rule> sys, dom;
        while (!accept("}")) {
            if (is("var")) {
                var_decl(vars);
            } else if (accept("system")) {
                sys.push_back(rule(vars));
            } else if (accept("domain")) {
                dom.push_back(rule(vars));
            } else if (is("rule")) {
                fail(peek(), "rules in a game must be marked 'system' or 'domain'");
            } else {
                fail(peek(), "expected 'var', 'system rule', 'domain rule' or '}'");
            }
        }
        if (!at_end()) fail(peek(), "unexpected '" + peek().text + "' after the game");
        if (has_errors()) return Game{};
        try {
            return Game(nt.text, std::move(vars), std::move(sys), std::move(dom));
        } catch (const Error& e) {
            report(nt, e.what());
            return Game{};
        }
    }

    ProblemWithUncertainty problem_doc()
    {
        expect("problem");
        const Tok& nt = ident("a problem name");
        ProblemWithUncertainty p;
        p.name = nt.text;
        expect("{");
        bool have_obs = false;
        while (!accept("}")) {
            if (is("var")) {
                var_decl(p.vars);
            } else if (is("rule") || is("system")) {
                accept("system");
                p.rules.push_back(rule(p.vars));
            } else if (is("observation")) {
                const Tok& ot = next();
                if (have_obs) report(ot, "second observation block");
                have_obs = true;
                p.observation = flex_body(p.vars).plan;
            } else {
                fail(peek(), "expected 'var', 'rule', 'observation' or '}'");
            }
        }
        if (!at_end()) fail(peek(), "unexpected '" + peek().text + "' after the problem");
        if (!has_errors())
            if (auto r = check_problem(p); !r) report(nt, r.message);
        return p;
    }

    NamedPlan plan_doc(const Variables& vars)
    {
        expect("plan");
        NamedPlan np;
        np.name = ident("a plan name").text;
        np.plan = PartialPlan::empty(vars.size());
        expect("{");
        std::set<VarId> seen;
        while (!accept("}")) {
            if (accept("now")) {
                np.plan.now = number();
                np.has_now = true;
                expect(";");
                continue;
            }
            expect("timeline");
            const Tok& vt = ident("a variable name");
            VarId x = find_variable(vars, vt.text);
            if (x < 0) report(vt, "undeclared variable '" + vt.text + "'");
            if (x >= 0 && !seen.insert(x).second) report(vt, "second timeline for variable " + vt.text);
            Timeline tl;
            Time prev_end = 0;
            bool ended_open = false;
            expect("{");
            while (!accept("}")) {
                const Tok& valt = ident("a value name");
                expect("[");
                Time s = number();
                expect(",");
                bool open = false;
                Time e = 0;
                const Tok& et = peek();
                if (accept("open"))
                    open = true;
                else
                    e = number();
                expect(")");
                expect(";");
                ValueId v = -1;
                if (x >= 0) {
                    v = vars[x].find_value(valt.text);
                    if (v < 0) report(valt, "unknown value '" + valt.text + "' of variable " + vars[x].name);
                }
                if (ended_open) {
                    report(valt, "token after the open token on " + vt.text, "only the last token may be open");
                    continue;
                }
                if (s != prev_end)
                    report(valt,
                           "timeline gap/overlap on " + vt.text + ": token starts at " + std::to_string(s) +
                               " but the previous token ends at " + std::to_string(prev_end),
                           "tokens are contiguous and the first one starts at 0");
                if (!open && e <= s) {
                    report(et, "token [" + std::to_string(s) + "," + std::to_string(e) + ") has no duration");
                    continue;
                }
                ended_open = open;
                if (!open) prev_end = e;
                if (v < 0) continue;
                if (open)
                    tl.open(v);
                else
                    tl.push({v, e - s});
            }
            if (x >= 0) np.plan.timelines[x] = std::move(tl);
        }
        if (!at_end()) fail(peek(), "unexpected '" + peek().text + "' after the plan");
        if (!np.has_now) {
            Time h = 0;
            for (const auto& tl : np.plan.timelines) h = std::max(h, tl.horizon());
            np.plan.now = h;
        }
        return np;
    }

    NamedFlexPlan flexplan_doc(const Variables& vars)
    {
        expect("flexplan");
        NamedFlexPlan np;
        np.name = ident("a plan name").text;
        np.plan = flex_body(vars).plan;
        if (!at_end()) fail(peek(), "unexpected '" + peek().text + "' after the flexible plan");
        return np;
    }

    bool has_errors() const
    {
        return std::any_of(diags.begin(), diags.end(),
                           [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
    }

private:
    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
};

template <class T, class F>
Parsed<T> run(std::string_view text, F&& body)
{
    Parsed<T> out;
    try {
        Parser p(text);
        try {
            T v = body(p);
            out.diagnostics = std::move(p.diags);
            out.value = std::move(v);
        } catch (const ParseError& e) {
            out.diagnostics = std::move(p.diags);
            out.diagnostics.push_back(e.d);
        }
    } catch (const ParseError& e) {
        out.diagnostics.push_back(e.d);
    }
    return out;
}

} // namespace

Parsed<Game> parse_game(std::string_view text)
{
    return run<Game>(text, [](Parser& p) { return p.game_doc(); });
}

Parsed<ProblemWithUncertainty> parse_problem(std::string_view text)
{
    return run<ProblemWithUncertainty>(text, [](Parser& p) { return p.problem_doc(); });
}

Parsed<Model> parse_model(std::string_view text)
{
    Parsed<Model> out;
    bool problem = false;
    try {
        auto toks = lex(text);
        problem = !toks.empty() && toks.front().k == Tok::K::ident && toks.front().text == "problem";
    } catch (const ParseError&) {
    }
    if (!problem) {
        auto g = parse_game(text);
        out.diagnostics = std::move(g.diagnostics);
        if (g.ok()) out.value = Model{std::move(*g.value), std::nullopt};
        return out;
    }
    auto p = parse_problem(text);
    out.diagnostics = std::move(p.diagnostics);
    if (!p.ok()) return out;
    try {
        Game g = associate_game(*p.value);
        out.value = Model{std::move(g), std::move(*p.value)};
    } catch (const Error& e) {
        out.diagnostics.push_back({Diagnostic::Severity::error, 1, 1, e.what(), ""});
    }
    return out;
}

Parsed<NamedPlan> parse_plan(std::string_view text, const Variables& vars)
{
    auto out = run<NamedPlan>(text, [&](Parser& p) { return p.plan_doc(vars); });
    if (out.ok() && out.value->has_now)
        if (auto r = validate_partial_plan(vars, out.value->plan); !r)
            out.diagnostics.push_back({Diagnostic::Severity::error, 1, 1, r.message,
                                       "closed timelines end at now, open ones start before it"});
    return out;
}

Parsed<NamedFlexPlan> parse_flexplan(std::string_view text, const Variables& vars)
{
    return run<NamedFlexPlan>(text, [&](Parser& p) { return p.flexplan_doc(vars); });
}

Parsed<std::vector<ScriptEntry>> parse_script(std::string_view text, const Game& g)
{
    Parsed<std::vector<ScriptEntry>> out;
    std::vector<ScriptEntry> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string t, rest;
        if (!(ls >> t)) continue;
        std::getline(ls, rest);
        ScriptEntry e;
        try {
            std::size_t used = 0;
            e.t = std::stoll(t, &used);
            if (used != t.size() || e.t < 0) throw Error("bad time");
        } catch (const std::exception&) {
            out.diagnostics.push_back({Diagnostic::Severity::error, lineno, 1,
                                       "expected a time at the start of the line", "lines read 'T ACTIONS'"});
            continue;
        }
        try {
            e.actions = parse_actions(g, rest);
        } catch (const Error& err) {
            out.diagnostics.push_back({Diagnostic::Severity::error, lineno, static_cast<int>(t.size()) + 2,
                                       err.what(), "actions read start(x,v) or end(x,v), joined by '+'"});
            continue;
        }
        entries.push_back(std::move(e));
    }
    out.value = std::move(entries);
    return out;
}

// ---- serializers ----------------------------------------------------------------

namespace {

std::string ep_str(Endpoint e) { return e == Endpoint::start ? "start" : "end"; }

std::string binding_str(const Variables& vars, const Binding& b)
{
    return b.name + "[" + vars[b.var].name + "=" + vars[b.var].value_name(b.value) + "]";
}

std::string format_var(const StateVariable& v)
{
    std::string s = "  var " + v.name + (v.side == Side::controlled ? " controlled" : " external") + " {\n";
    s += "    values";
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const auto& d = v.values[i];
        s += (i ? ", " : " ") + d.name + " " + d.duration.str() +
             (d.control == Control::controllable ? " controllable" : " uncontrollable");
    }
    s += ";\n    transitions {\n";
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        s += "      " + v.values[i].name + " ->";
        for (std::size_t j = 0; j < v.transitions[i].size(); ++j)
            s += (j ? ", " : " ") + v.value_name(v.transitions[i][j]);
        s += ";\n";
    }
    return s + "    }\n  }\n";
}

std::string format_rule(const Variables& vars, const std::string& prefix, const Rule& r)
{
    std::string s = "  " + prefix + "rule " + r.name + " {\n    ";
    s += r.trigger ? binding_str(vars, *r.trigger) : "true";
    s += " =>";
    for (std::size_t j = 0; j < r.body.size(); ++j) {
        const auto& st = r.body[j];
        s += j ? "\n      or " : "\n      ";
        auto name = [&](const Term& t) {
            return (t.slot == 0 ? r.trigger->name : st.tokens[t.slot - 1].name) + "." + ep_str(t.ep);
        };
        if (!st.tokens.empty()) {
            s += "exists ";
            for (std::size_t k = 0; k < st.tokens.size(); ++k)
                s += (k ? ", " : "") + binding_str(vars, st.tokens[k]);
            s += " . ";
        }
        if (st.atoms.empty()) s += "true";
        for (std::size_t k = 0; k < st.atoms.size(); ++k) {
            const auto& a = st.atoms[k];
            if (k) s += " & ";
            if (a.pointwise())
                s += std::to_string(a.instant) + " - " + name(a.left) + " in " + a.bounds.str();
            else
                s += name(a.right) + " - " + name(a.left) + " in " + a.bounds.str();
        }
    }
    return s + ";\n  }\n";
}

std::string format_flex_body(const Variables& vars, const FlexiblePlan& p, const std::string& indent)
{
    std::string s;
    for (const auto& tl : p.timelines) {
        s += indent + "timeline " + vars[tl.var].name + " {\n";
        for (const auto& t : tl.tokens)
            s += indent + "  " + t.name + ": " + vars[tl.var].value_name(t.value) + " end " + t.end.str() +
                 " duration " + t.duration.str() + ";\n";
        s += indent + "}\n";
    }
    auto name = [&](const FlexTerm& t) {
        return p.find(t.var)->tokens.at(t.index).name + "." + ep_str(t.ep);
    };
    for (const auto& a : p.constraints) {
        s += indent + "constraint ";
        if (a.pointwise)
            s += std::to_string(a.instant) + " - " + name(a.left);
        else
            s += name(a.right) + " - " + name(a.left);
        s += " in " + a.bounds.str() + ";\n";
    }
    return s;
}

} // namespace

std::string format_game(const Game& g)
{
    std::string s = "game " + g.name() + " {\n";
    for (const auto& v : g.vars()) s += format_var(v);
    for (const auto& r : g.system_rules()) s += format_rule(g.vars(), "system ", r);
    for (const auto& r : g.domain_rules()) s += format_rule(g.vars(), "domain ", r);
    return s + "}\n";
}

std::string format_problem(const ProblemWithUncertainty& p)
{
    std::string s = "problem " + p.name + " {\n";
    for (const auto& v : p.vars) s += format_var(v);
    for (const auto& r : p.rules) s += format_rule(p.vars, "", r);
    s += "  observation {\n" + format_flex_body(p.vars, p.observation, "    ") + "  }\n";
    return s + "}\n";
}

std::string format_plan(const Variables& vars, const std::string& name, const PartialPlan& plan,
                        bool with_now)
{
    std::string s = "plan " + name + " {\n";
    if (with_now) s += "  now " + std::to_string(plan.now) + ";\n";
    for (std::size_t x = 0; x < plan.timelines.size(); ++x) {
        const auto& tl = plan.timelines[x];
        s += "  timeline " + vars[x].name + " {";
        for (std::size_t i = 0; i < tl.size(); ++i)
            s += " " + vars[x].value_name(tl.tokens()[i].value) + " [" + std::to_string(tl.start(i)) + "," +
                 std::to_string(tl.end(i)) + ");";
        if (tl.is_open())
            s += " " + vars[x].value_name(*tl.open_value()) + " [" + std::to_string(tl.horizon()) + ",open);";
        s += " }\n";
    }
    return s + "}\n";
}

std::string format_flexplan(const Variables& vars, const std::string& name, const FlexiblePlan& plan)
{
    return "flexplan " + name + " {\n" + format_flex_body(vars, plan, "  ") + "}\n";
}

} // namespace tpg
