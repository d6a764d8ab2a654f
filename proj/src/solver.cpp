#include "tpg/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tpg {

namespace {

std::size_t env_budget(const char* name, std::size_t dflt)
{
    if (const char* v = std::getenv(name)) {
        char* end = nullptr;
        unsigned long long n = std::strtoull(v, &end, 10);
        if (end != v && n > 0) return static_cast<std::size_t>(n);
    }
    return dflt;
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Labels concrete_labels(const Game& g, const PartialPlan& p)
{
    Labels l;
    l.d = is_admissible(g, p);
    l.w = l.d && is_successful(g, p);
    return l;
}

} // namespace

std::size_t default_state_budget() { return env_budget("TPG_STATE_BUDGET", 1000000); }
std::size_t default_oracle_budget() { return env_budget("TPG_ORACLE_BUDGET", 10000000); }

const char* to_string(SolveResult::Verdict v)
{
    switch (v) {
    case SolveResult::Verdict::win: return "WIN";
    case SolveResult::Verdict::not_win: return "NOT_WIN";
    default: return "UNKNOWN";
    }
}

const char* to_string(BoundedResult::Verdict v)
{
    switch (v) {
    case BoundedResult::Verdict::win_within_k: return "WIN_WITHIN_K";
    case BoundedResult::Verdict::no_win_within_k: return "NO_WIN_WITHIN_K";
    default: return "REFUSED";
    }
}

GameStructure build_structure(const Game& g, std::size_t budget)
{
    if (budget == 0) budget = default_state_budget();
    Abstraction abs(g);
    GameStructure gs;
    std::unordered_map<std::string, int> index;

    auto add = [&](SuccinctState st, PartialPlan rep) -> int {
        std::string k = st.key();
        auto it = index.find(k);
        if (it != index.end()) return it->second;
        StructureNode n;
        n.labels = concrete_labels(g, rep);
        n.abstract_labels = abs.labels(st);
        if (!(n.labels == n.abstract_labels)) ++gs.label_mismatches;
        n.state = std::move(st);
        n.rep = std::move(rep);
        int id = static_cast<int>(gs.nodes.size());
        gs.nodes.push_back(std::move(n));
        index.emplace(std::move(k), id);
        return id;
    };

    gs.root = add(abs.initial(), PartialPlan::empty(g.vars().size()));
    for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
        if (gs.nodes.size() > budget) {
            gs.truncated = true;
            break;
        }
        const auto kind = gs.nodes[i].state.kind;
        if (kind == SuccinctState::Kind::dead) {
            EveNode e{static_cast<int>(i), Move::play(gs.nodes[i].rep.now), {static_cast<int>(i)}};
            gs.nodes[i].edges.push_back(static_cast<int>(gs.eve_nodes.size()));
            gs.eve_nodes.push_back(std::move(e));
            gs.nodes[i].expanded = true;
            continue;
        }
        if (kind == SuccinctState::Kind::eve_fault || gs.nodes[i].labels.w) {
            gs.nodes[i].expanded = true;
            continue;
        }
        const SuccinctState state = gs.nodes[i].state;
        const PartialPlan rep = gs.nodes[i].rep;
        auto st = abs.status(state);
        for (const Move& mc : charlie_moves(g, st, rep.now)) {
            EveNode e{static_cast<int>(i), mc, {}};
            for (const Move& me : eve_moves(g, st, mc)) {
                Round r{mc, me};
                SuccinctState ns = abs.step(state, events_of(g, r));
                auto it = index.find(ns.key());
                int id = it != index.end() ? it->second : add(std::move(ns), apply_round(g, rep, r));
                e.succ.push_back(id);
            }
            std::sort(e.succ.begin(), e.succ.end());
            e.succ.erase(std::unique(e.succ.begin(), e.succ.end()), e.succ.end());
            gs.nodes[i].edges.push_back(static_cast<int>(gs.eve_nodes.size()));
            gs.eve_nodes.push_back(std::move(e));
        }
        gs.nodes[i].expanded = true;
    }
    return gs;
}

namespace {

bool is_target(const StructureNode& n)
{
    return n.state.kind == SuccinctState::Kind::eve_fault ||
           (n.state.kind == SuccinctState::Kind::live && n.labels.w);
}

} // namespace

Regions solve_structure(const GameStructure& gs)
{
    const std::size_t N = gs.nodes.size(), E = gs.eve_nodes.size();
    std::vector<std::vector<int>> preds(N);
    for (std::size_t e = 0; e < E; ++e)
        for (int s : gs.eve_nodes[e].succ) preds[s].push_back(static_cast<int>(e));

    Regions reg;
    reg.rank.assign(N, -1);
    std::vector<std::size_t> missing(E);
    for (std::size_t e = 0; e < E; ++e) missing[e] = gs.eve_nodes[e].succ.size();
    std::deque<int> q;
    for (std::size_t c = 0; c < N; ++c)
        if (is_target(gs.nodes[c])) {
            reg.rank[c] = 0;
            q.push_back(static_cast<int>(c));
        }
    while (!q.empty()) {
        int c = q.front();
        q.pop_front();
        for (int e : preds[c]) {
            if (--missing[e] != 0) continue;
            int p = gs.eve_nodes[e].from;
            if (reg.rank[p] >= 0) continue;
            reg.rank[p] = reg.rank[c] + 1;
            q.push_back(p);
        }
    }

    // Greatest fixpoint: stay in the attractor, or stay outside d forever.
    reg.winning.assign(N, true);
    std::vector<std::size_t> bad(E, 0);
    std::vector<std::size_t> ok_children(N, 0);
    for (std::size_t c = 0; c < N; ++c) ok_children[c] = gs.nodes[c].edges.size();
    std::vector<int> work;
    auto removable = [&](std::size_t c) {
        if (reg.rank[c] >= 0) return false;
        if (!gs.nodes[c].expanded) return true;
        return gs.nodes[c].labels.d || ok_children[c] == 0;
    };
    for (std::size_t c = 0; c < N; ++c)
        if (removable(c)) {
            reg.winning[c] = false;
            work.push_back(static_cast<int>(c));
        }
    while (!work.empty()) {
        int c = work.back();
        work.pop_back();
        for (int e : preds[c]) {
            if (bad[e]++ != 0) continue;
            int p = gs.eve_nodes[e].from;
            --ok_children[p];
            if (reg.winning[p] && removable(p)) {
                reg.winning[p] = false;
                work.push_back(p);
            }
        }
    }
    return reg;
}

std::string fingerprint(const Game& g)
{
    std::ostringstream os;
    os << g.name() << '\n';
    for (const auto& v : g.vars()) {
        os << "var " << v.name << ' ' << (v.side == Side::controlled ? 'C' : 'E') << '\n';
        for (std::size_t i = 0; i < v.values.size(); ++i) {
            const auto& d = v.values[i];
            os << ' ' << d.name << ' ' << d.duration.str() << ' '
               << (d.control == Control::controllable ? 'c' : 'u') << " ->";
            for (ValueId t : v.transitions[i]) os << ' ' << t;
            os << '\n';
        }
    }
    auto rules = [&](const char* tag, const std::vector<Rule>& rs) {
        for (const auto& r : rs) {
            os << tag << ' ' << r.name;
            if (r.trigger) os << " [" << r.trigger->var << '=' << r.trigger->value << ']';
            for (const auto& st : r.body) {
                os << " |";
                for (const auto& b : st.tokens) os << ' ' << b.var << '=' << b.value;
                for (const auto& a : st.atoms)
                    os << " a" << static_cast<int>(a.kind) << ':' << a.left.slot
                       << static_cast<int>(a.left.ep) << ':' << a.right.slot
                       << static_cast<int>(a.right.ep) << ':' << a.instant << ':' << a.bounds.str();
            }
            os << '\n';
        }
    };
    rules("S", g.system_rules());
    rules("D", g.domain_rules());
    return hex64(fnv1a(os.str()));
}

std::string StrategyTable::id() const
{
    std::string s = game_name + ' ' + fingerprint + '\n';
    for (const auto& [k, e] : entries) {
        s += k;
        s += e.mode == StrategyEntry::Mode::attract ? " a " : " s ";
        for (const auto& a : e.actions)
            s += std::to_string(static_cast<int>(a.kind)) + ':' + std::to_string(a.var) + ':' +
                 std::to_string(a.value) + ' ';
        s += '\n';
    }
    return hex64(fnv1a(s));
}

SolveResult solve(const Game& g, const SolveOptions& opts)
{
    SolveResult res;
    res.window = window(g);
    GameStructure gs = build_structure(g, opts.state_budget);
    Regions reg = solve_structure(gs);

    res.states = gs.nodes.size();
    res.eve_states = gs.eve_nodes.size();
    res.label_mismatches = gs.label_mismatches;
    for (std::size_t c = 0; c < gs.nodes.size(); ++c) {
        res.d_states += gs.nodes[c].labels.d;
        res.w_states += gs.nodes[c].labels.w;
        res.attractor += reg.rank[c] >= 0;
        res.winning += reg.winning[c];
    }
    if (gs.truncated) {
        res.verdict = SolveResult::Verdict::unknown;
        return res;
    }
    res.verdict = reg.winning[gs.root] ? SolveResult::Verdict::win : SolveResult::Verdict::not_win;
    if (res.verdict != SolveResult::Verdict::win) return res;

    StrategyTable t;
    t.game_name = g.name();
    t.fingerprint = fingerprint(g);
    Abstraction abs(g);
    for (std::size_t c = 0; c < gs.nodes.size(); ++c) {
        const auto& n = gs.nodes[c];
        if (!reg.winning[c] || n.state.kind != SuccinctState::Kind::live) continue;
        StrategyEntry entry;
        if (reg.rank[c] == 0) {
            auto moves = charlie_moves(g, abs.status(n.state), n.rep.now);
            entry.actions = moves.front().actions;
        } else {
            bool attract = reg.rank[c] > 0;
            entry.mode = attract ? StrategyEntry::Mode::attract : StrategyEntry::Mode::safe;
            bool found = false;
            for (int e : n.edges) {
                const auto& en = gs.eve_nodes[e];
                bool good = std::all_of(en.succ.begin(), en.succ.end(), [&](int s) {
                    return attract ? (reg.rank[s] >= 0 && reg.rank[s] < reg.rank[c])
                                   : static_cast<bool>(reg.winning[s]);
                });
                if (good) {
                    entry.actions = en.move.actions;
                    found = true;
                    break;
                }
            }
            if (!found) throw Error("internal: winning state without a winning move");
        }
        t.entries.emplace(n.state.key(), std::move(entry));
    }
    res.strategy = std::move(t);
    return res;
}

CharlieStrategy extract_strategy(const Game& g, const StrategyTable& table)
{
    if (table.fingerprint != fingerprint(g))
        throw StrategyError("strategy was computed for a different game");
    auto abs = std::make_shared<Abstraction>(g);
    auto tab = std::make_shared<StrategyTable>(table);
    const Game* gp = &g;
    return [abs, tab, gp](const PartialPlan& plan) -> Move {
        SuccinctState s = abs->abstract(plan);
        if (s.kind != SuccinctState::Kind::live || abs->labels(s).w)
            return charlie_moves(*gp, statuses(plan), plan.now).front();
        auto it = tab->entries.find(s.key());
        if (it == tab->entries.end())
            throw StrategyDomainError("plan at now=" + std::to_string(plan.now) +
                                      " is outside the strategy domain");
        return Move::play(plan.now, it->second.actions);
    };
}

void write_strategy(const Game& g, const StrategyTable& t, std::ostream& os)
{
    os << "tpg-strategy 1\n";
    os << "game " << t.game_name << ' ' << t.fingerprint << '\n';
    for (const auto& [k, e] : t.entries)
        os << "entry " << (e.mode == StrategyEntry::Mode::attract ? "attract" : "safe") << ' '
           << actions_string(g, e.actions) << ' ' << k << '\n';
}

StrategyTable read_strategy(const Game& g, std::istream& is)
{
    StrategyTable t;
    std::string line;
    if (!std::getline(is, line) || line != "tpg-strategy 1") throw Error("not a strategy file");
    if (!std::getline(is, line)) throw Error("strategy file lacks a game line");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> t.game_name >> t.fingerprint;
        if (tag != "game" || t.fingerprint.empty()) throw Error("malformed game line in strategy file");
    }
    if (t.fingerprint != fingerprint(g)) throw Error("strategy was computed for a different game");
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, mode, acts, key;
        ls >> tag >> mode >> acts >> key;
        if (tag != "entry" || key.empty() || (mode != "attract" && mode != "safe"))
            throw Error("malformed strategy entry at line " + std::to_string(lineno));
        StrategyEntry e;
        e.mode = mode == "attract" ? StrategyEntry::Mode::attract : StrategyEntry::Mode::safe;
        e.actions = parse_actions(g, acts);
        t.entries.emplace(std::move(key), std::move(e));
    }
    return t;
}

// ---- bounded oracle ----------------------------------------------------------

namespace {

std::string plan_key(const PartialPlan& p)
{
    std::string k = std::to_string(p.now);
    for (const auto& tl : p.timelines) {
        k += '|';
        for (const auto& t : tl.tokens()) k += std::to_string(t.value) + ':' + std::to_string(t.duration) + ',';
        if (tl.is_open()) k += "o" + std::to_string(*tl.open_value());
    }
    return k;
}

struct Oracle {
    const Game& g;
    std::size_t budget;
    std::size_t nodes = 0;
    std::unordered_map<std::string, bool> memo;

    bool win(const PartialPlan& p, bool seen_d, int k)
    {
        if (++nodes > budget) throw BudgetExceeded("oracle budget exhausted");
        bool d = is_admissible(g, p);
        if (d && is_successful(g, p)) return true;
        bool seen = seen_d || d;
        if (k == 0) return false;
        std::string key = plan_key(p) + (seen ? "#1#" : "#0#") + std::to_string(k);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        auto st = statuses(p);
        bool result = false;
        for (const Move& mc : charlie_moves(g, st, p.now)) {
            bool all = true;
            for (const Move& me : eve_moves(g, st, mc)) {
                PartialPlan np = apply_round(g, p, {mc, me});
                Fault f = round_fault(g, p, np);
                bool ok;
                if (f == Fault::eve)
                    ok = true;
                else if (f == Fault::charlie)
                    ok = !seen;
                else
                    ok = win(np, seen, k - 1);
                if (!ok) {
                    all = false;
                    break;
                }
            }
            if (all) {
                result = true;
                break;
            }
        }
        memo.emplace(std::move(key), result);
        return result;
    }
};

} // namespace

BoundedResult bounded_solve(const Game& g, int horizon, std::size_t budget)
{
    Oracle o{g, budget == 0 ? default_oracle_budget() : budget, 0, {}};
    BoundedResult r;
    try {
        bool w = o.win(PartialPlan::empty(g.vars().size()), false, horizon);
        r.verdict = w ? BoundedResult::Verdict::win_within_k : BoundedResult::Verdict::no_win_within_k;
    } catch (const BudgetExceeded&) {
        r.verdict = BoundedResult::Verdict::refused;
    }
    r.nodes = o.nodes;
    return r;
}

// ---- exactness probing -------------------------------------------------------

ProbeReport probe_exactness(const Game& g, std::uint64_t seed, std::size_t plays, int depth,
                            int continuation)
{
    Abstraction abs(g);
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto random_round = [&](const PartialPlan& p) {
        auto st = statuses(p);
        auto cm = charlie_moves(g, st, p.now);
        Move mc = cm[pick(cm.size())];
        auto em = eve_moves(g, st, mc);
        return Round{mc, em[pick(em.size())]};
    };

    ProbeReport rep;
    auto mismatch = [&](const std::string& what) {
        if (rep.mismatches++ == 0) rep.first_mismatch = what;
    };
    std::unordered_map<std::string, std::vector<PartialPlan>> classes;
    auto record = [&](const SuccinctState& s, const PartialPlan& p) {
        ++rep.plans;
        ++rep.comparisons;
        Labels lc = concrete_labels(g, p);
        if (!(lc == abs.labels(s))) mismatch("labels differ from succinct state at " + plan_key(p));
        if (abs.abstract(p).key() != s.key()) mismatch("replay key differs at " + plan_key(p));
        auto& v = classes[s.key()];
        if (v.size() < 4 && std::find(v.begin(), v.end(), p) == v.end()) v.push_back(p);
    };

    for (std::size_t n = 0; n < plays; ++n) {
        PartialPlan p = PartialPlan::empty(g.vars().size());
        SuccinctState s = abs.initial();
        record(s, p);
        for (int i = 0; i < depth; ++i) {
            Round r = random_round(p);
            s = abs.step(s, events_of(g, r));
            p = apply_round(g, p, r);
            record(s, p);
        }
    }

    rep.classes = classes.size();
    for (const auto& [key, reps] : classes) {
        if (reps.size() < 2) continue;
        const bool live = key != "DEAD" && key != "EVE_FAULT";
        for (std::size_t j = 1; j < reps.size(); ++j) {
            PartialPlan a = reps[0], b = reps[j];
            ++rep.comparisons;
            if (!(concrete_labels(g, a) == concrete_labels(g, b)))
                mismatch("class " + key + " separates " + plan_key(a) + " and " + plan_key(b));
            for (int i = 0; i < continuation; ++i) {
                if (live) {
                    Round r = random_round(a);
                    Round rb = r;
                    rb.charlie.t = rb.eve.t = b.now;
                    a = apply_round(g, a, r);
                    b = apply_round(g, b, rb);
                } else {
                    a = apply_round(g, a, random_round(a));
                    b = apply_round(g, b, random_round(b));
                }
                ++rep.comparisons;
                Labels la = concrete_labels(g, a), lb = concrete_labels(g, b);
                if (live ? !(la == lb) : (la.d || lb.d)) {
                    mismatch("continuation of class " + key + " separates " + plan_key(a) + " and " +
                             plan_key(b));
                    break;
                }
            }
        }
    }
    return rep;
}

} // namespace tpg
