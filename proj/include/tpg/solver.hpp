#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpg/game.hpp"

namespace tpg {

// Product of the non-zero finite bounds of the game; saturates at UINT64_MAX.
std::uint64_t window(const Game& g);

// ---- succinct representation ------------------------------------------------

struct SliceToken {
    ValueId value = 0;
    int start_age = 0;
    int end_age = -1; // -1 while open
    bool open() const { return end_age < 0; }
    friend auto operator<=>(const SliceToken&, const SliceToken&) = default;
};

struct SlotRef {
    enum Kind : std::uint8_t { free = 0, old = 1, token = 2 };
    Kind kind = free;
    std::int16_t var = 0;
    std::int16_t idx = 0;
    friend auto operator<=>(const SlotRef&, const SlotRef&) = default;
};

using Record = std::vector<SlotRef>;       // slot 0 = trigger
using RecordSet = std::vector<Record>;     // sorted, unique
using Instance = std::vector<RecordSet>;   // one set per statement

struct RuleProgress {
    bool settled = false;              // triggerless rules
    std::vector<RecordSet> global;     // triggered: matches waiting for a future trigger
    std::vector<Instance> pending;     // unsettled obligations
    friend auto operator<=>(const RuleProgress&, const RuleProgress&) = default;
};

struct SuccinctState {
    enum class Kind : std::uint8_t { live, dead, eve_fault };
    Kind kind = Kind::live;
    int clock = 0;
    bool w_impossible = false;
    bool d_impossible = false; // a domain rule is violated for good; only faults still matter
    std::vector<std::vector<SliceToken>> slice;
    std::vector<RuleProgress> rules; // domain rules first, then system rules

    std::string key() const;
};

struct Labels {
    bool d = false;
    bool w = false;
    friend bool operator==(const Labels&, const Labels&) = default;
};

// Per-variable events of one no-wait round at time now.
struct StepEvents {
    std::vector<std::optional<ValueId>> start;
    std::vector<bool> end;
};

StepEvents events_of(const Game& g, const Round& r);

class Abstraction {
public:
    explicit Abstraction(const Game& g);

    const Game& game() const { return g_; }
    int horizon() const { return horizon_; }
    int age_cap() const { return cap_; }
    int clock_cap() const { return t_sat_; }

    SuccinctState initial() const;
    SuccinctState step(const SuccinctState& s, const StepEvents& ev) const;
    SuccinctState abstract(const PartialPlan& plan) const;
    Labels labels(const SuccinctState& s) const;
    std::vector<TimelineStatus> status(const SuccinctState& s) const;

private:
    struct RuleRef {
        const Rule* rule;
        bool domain;
    };

    const Game& g_;
    std::vector<RuleRef> rules_;
    int horizon_ = 1;
    int cap_ = 3;
    int t_sat_ = 0;

    void init_progress(SuccinctState& s) const;
    bool prune(const SuccinctState& s, const Statement& st, const Record& r) const;
    bool settles(const SuccinctState& s, const Statement& st, const Record& r) const;
    bool closure_ok(const SuccinctState& s, const Statement& st, const Record& r) const;
    bool rule_holds_now(const SuccinctState& s, std::size_t ri) const;
    void compact(SuccinctState& s) const;
};

// ---- game structure and solving -------------------------------------------

struct StructureNode {
    SuccinctState state;
    PartialPlan rep;
    Labels labels;          // from the representative plan
    Labels abstract_labels; // from the succinct state
    std::vector<int> edges; // Eve nodes
    bool expanded = false;
};

struct EveNode {
    int from = 0;
    Move move;
    std::vector<int> succ;
};

struct GameStructure {
    std::vector<StructureNode> nodes;
    std::vector<EveNode> eve_nodes;
    int root = 0;
    bool truncated = false;
    std::size_t label_mismatches = 0;
};

std::size_t default_state_budget();   // TPG_STATE_BUDGET or 10^6
std::size_t default_oracle_budget();  // TPG_ORACLE_BUDGET or 10^7

GameStructure build_structure(const Game& g, std::size_t budget);

struct StrategyEntry {
    enum class Mode { attract, safe };
    Mode mode = Mode::attract;
    std::vector<Action> actions;
};

struct StrategyTable {
    std::string game_name;
    std::string fingerprint;
    std::map<std::string, StrategyEntry> entries;

    std::string id() const;
};

struct SolveResult {
    enum class Verdict { win, not_win, unknown };
    Verdict verdict = Verdict::unknown;
    std::size_t states = 0;
    std::size_t eve_states = 0;
    std::size_t d_states = 0;
    std::size_t w_states = 0;
    std::size_t attractor = 0;
    std::size_t winning = 0;
    std::size_t label_mismatches = 0;
    std::uint64_t window = 0;
    std::optional<StrategyTable> strategy;
};

const char* to_string(SolveResult::Verdict v);

struct SolveOptions {
    std::size_t state_budget = 0; // 0: default
};

// Winning regions of a structure: Attr(w ∪ eve_fault) and the greatest fixpoint.
struct Regions {
    std::vector<int> rank;   // -1 outside the attractor
    std::vector<bool> winning;
};

Regions solve_structure(const GameStructure& gs);

SolveResult solve(const Game& g, const SolveOptions& opts = {});

std::string fingerprint(const Game& g);

class StrategyDomainError : public StrategyError {
public:
    using StrategyError::StrategyError;
};

CharlieStrategy extract_strategy(const Game& g, const StrategyTable& table);

void write_strategy(const Game& g, const StrategyTable& t, std::ostream& os);
StrategyTable read_strategy(const Game& g, std::istream& is);

// ---- brute-force oracle ------------------------------------------------------

struct BoundedResult {
    enum class Verdict { win_within_k, no_win_within_k, refused };
    Verdict verdict = Verdict::refused;
    std::size_t nodes = 0;
};

const char* to_string(BoundedResult::Verdict v);

BoundedResult bounded_solve(const Game& g, int horizon, std::size_t budget = 0);

// ---- exactness probing -------------------------------------------------------

struct ProbeReport {
    std::size_t plans = 0;
    std::size_t classes = 0;
    std::size_t comparisons = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
};

ProbeReport probe_exactness(const Game& g, std::uint64_t seed, std::size_t plays, int depth,
                            int continuation);

} // namespace tpg
