#include <algorithm>

#include "tpg/solver.hpp"

namespace tpg {

namespace {

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b)
{
    if (a == 0 || b == 0) return 0;
    if (a > UINT64_MAX / b) return UINT64_MAX;
    return a * b;
}

} // namespace

std::uint64_t window(const Game& g)
{
    std::uint64_t w = 1;
    auto take = [&](Time v) {
        if (v > 0) w = mul_sat(w, static_cast<std::uint64_t>(v));
    };
    for (const auto* rs : {&g.system_rules(), &g.domain_rules()})
        for (const auto& r : *rs)
            for (const auto& st : r.body)
                for (const auto& a : st.atoms)
                    if (a.bounded()) {
                        take(a.bounds.lo);
                        take(a.bounds.hi.value());
                    }
    for (const auto& var : g.vars())
        for (const auto& v : var.values) {
            take(v.duration.lo);
            if (v.duration.hi.is_finite()) take(v.duration.hi.value());
        }
    return w;
}

StepEvents events_of(const Game& g, const Round& r)
{
    StepEvents ev;
    ev.start.resize(g.vars().size());
    ev.end.assign(g.vars().size(), false);
    for (const Move* m : {&r.charlie, &r.eve})
        for (const auto& a : m->actions) {
            if (a.is_start())
                ev.start[a.var] = a.value;
            else
                ev.end[a.var] = true;
        }
    return ev;
}

namespace {

struct Ep {
    enum St { fixed, open_end, future };
    St st = future;
    int age = 0;
    bool fresh = false;
    int r0 = 0; // earliest offset from now for unfixed endpoints
};

Ep resolve(const SuccinctState& s, const Record& r, const Term& t, int cap)
{
    const SlotRef& ref = r[t.slot];
    switch (ref.kind) {
    case SlotRef::free:
        return {Ep::future, 0, false, t.ep == Endpoint::start ? 0 : 1};
    case SlotRef::old:
        return {Ep::fixed, cap, false, 0};
    default:
        break;
    }
    const SliceToken& tk = s.slice[ref.var][ref.idx];
    if (t.ep == Endpoint::start) return {Ep::fixed, tk.start_age, tk.start_age == 1, 0};
    if (tk.open()) return {Ep::open_end, 0, false, 0};
    return {Ep::fixed, tk.end_age, tk.end_age == 0, 0};
}

SuccinctState sink(SuccinctState::Kind k)
{
    SuccinctState s;
    s.kind = k;
    return s;
}

void sort_unique(RecordSet& rs)
{
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
}

} // namespace

Abstraction::Abstraction(const Game& g) : g_(g)
{
    for (const auto& r : g.domain_rules()) rules_.push_back({&r, true});
    for (const auto& r : g.system_rules()) rules_.push_back({&r, false});

    Time h = 1, tmax = -1;
    for (const auto& rr : rules_)
        for (const auto& st : rr.rule->body)
            for (const auto& a : st.atoms) {
                if (a.bounds.hi.is_finite()) h = std::max(h, a.bounds.hi.value());
                if (a.pointwise())
                    tmax = std::max(tmax, a.instant);
                else
                    h = std::max(h, a.bounds.lo);
            }
    for (const auto& var : g.vars())
        for (const auto& v : var.values) {
            h = std::max(h, v.duration.lo);
            if (v.duration.hi.is_finite()) h = std::max(h, v.duration.hi.value());
        }
    if (h > 20000 || tmax > 1000000) throw Error("bounds too large for the succinct representation");
    horizon_ = static_cast<int>(h);
    cap_ = horizon_ + 2;
    t_sat_ = tmax < 0 ? 0 : static_cast<int>(tmax) + 2;
}

bool Abstraction::prune(const SuccinctState& s, const Statement& st, const Record& r) const
{
    for (const auto& a : st.atoms) {
        Ep L = resolve(s, r, a.left, cap_);
        if (a.pointwise()) {
            if (L.st == Ep::fixed) {
                if (L.fresh && !a.bounds.contains(a.instant - (s.clock - L.age))) return false;
            } else if (s.clock + L.r0 > a.instant - a.bounds.lo) {
                return false;
            }
            continue;
        }
        Ep R = resolve(s, r, a.right, cap_);
        if (L.st == Ep::fixed && R.st == Ep::fixed) {
            if ((L.fresh || R.fresh) && !a.bounds.contains(L.age - R.age)) return false;
        } else if (L.st == Ep::fixed) {
            if (a.bounds.hi < L.age + R.r0) return false;
        } else if (R.st == Ep::fixed) {
            if (R.age + L.r0 + a.bounds.lo > 0) return false;
        }
    }
    return true;
}

bool Abstraction::settles(const SuccinctState& s, const Statement& st, const Record& r) const
{
    for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k].kind == SlotRef::free) return false;
    for (const auto& a : st.atoms) {
        if (resolve(s, r, a.left, cap_).st != Ep::fixed) return false;
        if (!a.pointwise() && resolve(s, r, a.right, cap_).st != Ep::fixed) return false;
    }
    return true;
}

bool Abstraction::closure_ok(const SuccinctState& s, const Statement& st, const Record& r) const
{
    for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k].kind == SlotRef::free) return false;
    for (const auto& a : st.atoms) {
        Ep L = resolve(s, r, a.left, cap_);
        if (a.pointwise()) {
            if (L.st == Ep::open_end && !a.bounds.contains(a.instant - s.clock)) return false;
            continue;
        }
        Ep R = resolve(s, r, a.right, cap_);
        if (L.st != Ep::open_end && R.st != Ep::open_end) continue; // checked when fixed
        if (!a.bounds.contains(L.age - R.age)) return false;
    }
    return true;
}

bool Abstraction::rule_holds_now(const SuccinctState& s, std::size_t ri) const
{
    const Rule& rule = *rules_[ri].rule;
    const RuleProgress& rp = s.rules[ri];
    auto inst_ok = [&](const Instance& inst) {
        for (std::size_t j = 0; j < inst.size(); ++j)
            for (const auto& r : inst[j])
                if (closure_ok(s, rule.body[j], r)) return true;
        return false;
    };
    if (rule.triggerless()) {
        if (rp.settled) return true;
        return !rp.pending.empty() && inst_ok(rp.pending.front());
    }
    return std::all_of(rp.pending.begin(), rp.pending.end(), inst_ok);
}

namespace {

using Fresh = std::vector<std::pair<int, int>>;

void branch(RecordSet& rs, const Statement& st, const SuccinctState& s, const Fresh& fresh)
{
    for (auto [x, i] : fresh) {
        ValueId v = s.slice[x][i].value;
        for (std::size_t k = 1; k <= st.tokens.size(); ++k) {
            if (st.tokens[k - 1].var != x || st.tokens[k - 1].value != v) continue;
            std::size_t n = rs.size();
            for (std::size_t j = 0; j < n; ++j) {
                if (rs[j][k].kind != SlotRef::free) continue;
                Record r = rs[j];
                r[k] = {SlotRef::token, static_cast<std::int16_t>(x), static_cast<std::int16_t>(i)};
                rs.push_back(std::move(r));
            }
        }
    }
}

} // namespace

SuccinctState Abstraction::initial() const
{
    SuccinctState s;
    s.slice.resize(g_.vars().size());
    init_progress(s);
    return s;
}

void Abstraction::init_progress(SuccinctState& s) const
{
    s.rules.clear();
    for (const auto& rr : rules_) {
        RuleProgress rp;
        const Rule& rule = *rr.rule;
        Instance fresh_inst;
        for (const auto& st : rule.body) fresh_inst.push_back({Record(st.tokens.size() + 1)});
        if (rule.triggerless())
            rp.pending.push_back(std::move(fresh_inst));
        else
            rp.global = std::move(fresh_inst);
        s.rules.push_back(std::move(rp));
    }
    // prune against the empty history
    for (std::size_t ri = 0; ri < rules_.size(); ++ri) {
        const Rule& rule = *rules_[ri].rule;
        auto& rp = s.rules[ri];
        for (std::size_t j = 0; j < rp.global.size(); ++j)
            std::erase_if(rp.global[j], [&](const Record& r) { return !prune(s, rule.body[j], r); });
        bool violated = false;
        for (auto& inst : rp.pending) {
            bool any = false;
            for (std::size_t j = 0; j < inst.size(); ++j) {
                std::erase_if(inst[j], [&](const Record& r) { return !prune(s, rule.body[j], r); });
                any = any || !inst[j].empty();
            }
            violated = violated || !any;
        }
        if (violated) {
            rp.pending.clear();
            if (rules_[ri].domain) s.d_impossible = true;
            s.w_impossible = true;
        }
    }
    if (s.d_impossible)
        for (auto& rp : s.rules) rp = RuleProgress{};
    else if (s.w_impossible)
        for (std::size_t ri = 0; ri < rules_.size(); ++ri)
            if (!rules_[ri].domain) s.rules[ri] = RuleProgress{};
}

SuccinctState Abstraction::step(const SuccinctState& s0, const StepEvents& ev) const
{
    if (s0.kind != SuccinctState::Kind::live) return s0;
    SuccinctState s = s0;
    const int C = cap_;
    for (auto& tl : s.slice)
        for (auto& t : tl) {
            t.start_age = std::min(t.start_age + 1, C);
            if (!t.open()) t.end_age = std::min(t.end_age + 1, C);
        }

    bool fc = false, fe = false;
    auto blame = [&](Player p) { (p == Player::charlie ? fc : fe) = true; };
    Fresh fresh;
    for (std::size_t xi = 0; xi < s.slice.size(); ++xi) {
        auto x = static_cast<VarId>(xi);
        const auto& var = g_.vars()[xi];
        auto& tl = s.slice[xi];
        if (ev.start[xi]) {
            ValueId v = *ev.start[xi];
            if (!tl.empty()) {
                if (tl.back().open()) throw Error("start event on an open timeline");
                if (!var.allows(tl.back().value, v)) blame(g_.start_owner(x));
            }
            tl.push_back({v, 1, -1});
            fresh.push_back({static_cast<int>(xi), static_cast<int>(tl.size() - 1)});
        }
        if (ev.end[xi]) {
            if (tl.empty() || !tl.back().open()) throw Error("end event without an open token");
            auto& tk = tl.back();
            tk.end_age = 0;
            if (!var.duration(tk.value).contains(tk.start_age)) blame(g_.end_owner(x, tk.value));
        }
        if (!tl.empty() && tl.back().open() && var.duration(tl.back().value).hi < tl.back().start_age)
            blame(g_.end_owner(x, tl.back().value));
    }
    if (fc) return sink(SuccinctState::Kind::dead);
    if (fe) return sink(SuccinctState::Kind::eve_fault);

    s.clock = std::min(s.clock + 1, t_sat_);

    for (std::size_t ri = 0; ri < rules_.size(); ++ri) {
        const Rule& rule = *rules_[ri].rule;
        const bool domain = rules_[ri].domain;
        auto& rp = s.rules[ri];
        if (s.d_impossible || (!domain && s.w_impossible)) continue;
        if (rule.triggerless() && (rp.settled || rp.pending.empty())) continue;

        for (auto& inst : rp.pending)
            for (std::size_t j = 0; j < inst.size(); ++j) branch(inst[j], rule.body[j], s, fresh);
        for (std::size_t j = 0; j < rp.global.size(); ++j) branch(rp.global[j], rule.body[j], s, fresh);
        if (rule.trigger)
            for (auto [x, i] : fresh) {
                if (x != rule.trigger->var || s.slice[x][i].value != rule.trigger->value) continue;
                Instance inst(rule.body.size());
                for (std::size_t j = 0; j < rule.body.size(); ++j)
                    for (const auto& r : rp.global[j]) {
                        Record nr = r;
                        nr[0] = {SlotRef::token, static_cast<std::int16_t>(x),
                                 static_cast<std::int16_t>(i)};
                        inst[j].push_back(std::move(nr));
                    }
                rp.pending.push_back(std::move(inst));
            }

        for (std::size_t j = 0; j < rp.global.size(); ++j)
            std::erase_if(rp.global[j], [&](const Record& r) { return !prune(s, rule.body[j], r); });

        bool violated = false;
        std::vector<Instance> keep;
        for (auto& inst : rp.pending) {
            bool any = false, settled = false;
            for (std::size_t j = 0; j < inst.size(); ++j) {
                std::erase_if(inst[j], [&](const Record& r) { return !prune(s, rule.body[j], r); });
                any = any || !inst[j].empty();
                for (const auto& r : inst[j])
                    if (settles(s, rule.body[j], r)) {
                        settled = true;
                        break;
                    }
            }
            if (settled) {
                if (rule.triggerless()) rp.settled = true;
            } else if (!any) {
                violated = true;
            } else {
                keep.push_back(std::move(inst));
            }
        }
        rp.pending = std::move(keep);
        if (violated) {
            rp.pending.clear();
            if (domain) s.d_impossible = true;
            s.w_impossible = true;
        }
    }
    if (s.d_impossible)
        for (auto& rp : s.rules) rp = RuleProgress{};
    else if (s.w_impossible)
        for (std::size_t ri = 0; ri < rules_.size(); ++ri)
            if (!rules_[ri].domain) s.rules[ri] = RuleProgress{};

    compact(s);
    return s;
}

void Abstraction::compact(SuccinctState& s) const
{
    const std::size_t nv = s.slice.size();
    std::vector<std::vector<char>> used(nv);
    std::vector<std::vector<char>> old(nv);
    for (std::size_t x = 0; x < nv; ++x) {
        used[x].assign(s.slice[x].size(), 0);
        old[x].assign(s.slice[x].size(), 0);
        for (std::size_t i = 0; i < s.slice[x].size(); ++i) {
            const auto& t = s.slice[x][i];
            old[x][i] = !t.open() && t.end_age >= cap_;
        }
        if (!s.slice[x].empty()) used[x].back() = 1;
    }
    auto visit = [&](auto&& fn) {
        for (auto& rp : s.rules) {
            for (auto& rs : rp.global)
                for (auto& r : rs) fn(r);
            for (auto& inst : rp.pending)
                for (auto& rs : inst)
                    for (auto& r : rs) fn(r);
        }
    };
    visit([&](Record& r) {
        for (auto& ref : r) {
            if (ref.kind != SlotRef::token) continue;
            if (old[ref.var][ref.idx])
                ref = {SlotRef::old, 0, 0};
            else
                used[ref.var][ref.idx] = 1;
        }
    });
    std::vector<std::vector<int>> remap(nv);
    for (std::size_t x = 0; x < nv; ++x) {
        std::vector<SliceToken> kept;
        remap[x].assign(s.slice[x].size(), -1);
        for (std::size_t i = 0; i < s.slice[x].size(); ++i)
            if (used[x][i]) {
                remap[x][i] = static_cast<int>(kept.size());
                kept.push_back(s.slice[x][i]);
            }
        s.slice[x] = std::move(kept);
    }
    visit([&](Record& r) {
        for (auto& ref : r)
            if (ref.kind == SlotRef::token) ref.idx = static_cast<std::int16_t>(remap[ref.var][ref.idx]);
    });
    for (auto& rp : s.rules) {
        for (auto& rs : rp.global) sort_unique(rs);
        for (auto& inst : rp.pending)
            for (auto& rs : inst) sort_unique(rs);
        std::sort(rp.pending.begin(), rp.pending.end());
        rp.pending.erase(std::unique(rp.pending.begin(), rp.pending.end()), rp.pending.end());
    }
}

SuccinctState Abstraction::abstract(const PartialPlan& plan) const
{
    if (plan.timelines.size() != g_.vars().size()) throw Error("plan does not match the game");
    std::vector<StepEvents> evs(static_cast<std::size_t>(plan.now));
    for (auto& e : evs) {
        e.start.resize(g_.vars().size());
        e.end.assign(g_.vars().size(), false);
    }
    for (std::size_t x = 0; x < plan.timelines.size(); ++x) {
        const auto& tl = plan.timelines[x];
        for (std::size_t i = 0; i < tl.size(); ++i) {
            evs.at(tl.start(i)).start[x] = tl.tokens()[i].value;
            evs.at(tl.end(i) - 1).end[x] = true;
        }
        if (tl.is_open()) evs.at(tl.horizon()).start[x] = *tl.open_value();
    }
    SuccinctState s = initial();
    for (const auto& e : evs) s = step(s, e);
    return s;
}

Labels Abstraction::labels(const SuccinctState& s) const
{
    if (s.kind != SuccinctState::Kind::live || s.d_impossible) return {};
    bool d = true;
    for (std::size_t x = 0; x < s.slice.size() && d; ++x) {
        const auto& tl = s.slice[x];
        if (!tl.empty() && tl.back().open() &&
            tl.back().start_age < g_.vars()[x].duration(tl.back().value).lo)
            d = false;
    }
    for (std::size_t ri = 0; ri < rules_.size() && d; ++ri)
        if (rules_[ri].domain && !rule_holds_now(s, ri)) d = false;
    bool w = d && !s.w_impossible;
    for (std::size_t ri = 0; ri < rules_.size() && w; ++ri)
        if (!rules_[ri].domain && !rule_holds_now(s, ri)) w = false;
    return {d, w};
}

std::vector<TimelineStatus> Abstraction::status(const SuccinctState& s) const
{
    std::vector<TimelineStatus> st(g_.vars().size());
    for (std::size_t x = 0; x < s.slice.size(); ++x)
        if (!s.slice[x].empty() && s.slice[x].back().open()) st[x] = {true, s.slice[x].back().value};
    return st;
}

std::string SuccinctState::key() const
{
    if (kind == Kind::dead) return "DEAD";
    if (kind == Kind::eve_fault) return "EVE_FAULT";
    std::string k = "c" + std::to_string(clock) + (d_impossible ? "D" : w_impossible ? "W" : "");
    for (const auto& tl : slice) {
        k += '|';
        for (const auto& t : tl) {
            k += std::to_string(t.value) + '.' + std::to_string(t.start_age);
            if (!t.open()) k += '.' + std::to_string(t.end_age);
            k += ',';
        }
    }
    auto rec = [&](const Record& r) {
        k += '(';
        for (const auto& ref : r) {
            if (ref.kind == SlotRef::free)
                k += '_';
            else if (ref.kind == SlotRef::old)
                k += 'o';
            else
                k += std::to_string(ref.var) + ':' + std::to_string(ref.idx);
            k += ';';
        }
        k += ')';
    };
    for (const auto& rp : rules) {
        k += rp.settled ? "#S" : "#";
        for (const auto& rs : rp.global) {
            k += 'g';
            for (const auto& r : rs) rec(r);
        }
        for (const auto& inst : rp.pending) {
            k += 'p';
            for (const auto& rs : inst) {
                k += '/';
                for (const auto& r : rs) rec(r);
            }
        }
    }
    return k;
}

} // namespace tpg
