#pragma once

// Classical reactive Turing machines: rules over finite alphabets, tape
// instances with a single marked cell, stepping, and configuration-graph
// generation.  Tapes are kept normalized (no unmarked boundary blanks), so
// machines idling on blank tape have finite reachable graphs.

#include <atomata/lts.hpp>

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace atomata {

enum class Move : char { Left = 'L', Right = 'R' };

struct RtmRule {
    Term source; // control states are terms; classical machines use constants
    Term read;
    Term action;
    Term write;
    Move move = Move::Right;
    Term target;

    friend bool operator==(const RtmRule&, const RtmRule&) = default;
};

struct Rtm {
    Term initial;
    std::vector<RtmRule> rules;

    std::set<Term> states() const
    {
        std::set<Term> out{initial};
        for (const RtmRule& r : rules) {
            out.insert(r.source);
            out.insert(r.target);
        }
        return out;
    }
    std::set<Term> data_alphabet() const
    {
        std::set<Term> out{blank_term()};
        for (const RtmRule& r : rules) {
            out.insert(r.read);
            out.insert(r.write);
        }
        return out;
    }
    std::set<Term> action_alphabet() const
    {
        std::set<Term> out;
        for (const RtmRule& r : rules) out.insert(r.action);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Tape instances and configurations

struct TapeInstance {
    std::vector<Term> cells{blank_term()};
    std::size_t head = 0;

    void normalize()
    {
        while (cells.size() > 1 && head != 0 && cells.front() == blank_term()) {
            cells.erase(cells.begin());
            --head;
        }
        while (cells.size() > 1 && head != cells.size() - 1 && cells.back() == blank_term())
            cells.pop_back();
    }

    const Term& at_head() const { return cells[head]; }

    friend bool operator==(const TapeInstance&, const TapeInstance&) = default;
    friend bool operator<(const TapeInstance& a, const TapeInstance& b)
    {
        if (a.head != b.head) return a.head < b.head;
        return a.cells < b.cells;
    }

    std::string str() const
    {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ' ';
            if (i == head) out += '[';
            out += cells[i].str();
            if (i == head) out += ']';
        }
        return out;
    }
};

struct Configuration {
    Term state;
    TapeInstance tape;

    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend bool operator<(const Configuration& a, const Configuration& b)
    {
        if (a.state != b.state) return a.state < b.state;
        return a.tape < b.tape;
    }

    std::string str() const { return "(" + state.str() + ", " + tape.str() + ")"; }
};

inline Configuration initial_configuration(const Term& state)
{
    return Configuration{state, TapeInstance{}};
}

// Writes `e` at the head, then moves: a left move places the head on the
// rightmost symbol of the left part (a fresh blank when there is none), and
// symmetrically for right.  The result is normalized.
inline Configuration apply_rule_at(const Configuration& c, const Term& write, Move move,
                                   const Term& target_state)
{
    Configuration out;
    out.state = target_state;
    out.tape = c.tape;
    out.tape.cells[out.tape.head] = write;
    if (move == Move::Left) {
        if (out.tape.head == 0)
            out.tape.cells.insert(out.tape.cells.begin(), blank_term());
        else
            --out.tape.head;
    } else {
        if (out.tape.head + 1 == out.tape.cells.size()) out.tape.cells.push_back(blank_term());
        ++out.tape.head;
    }
    out.tape.normalize();
    return out;
}

// One successor per applicable rule; an empty set is a deadlock.
inline std::vector<std::pair<Term, Configuration>> step(const Rtm& m, const Configuration& c)
{
    std::vector<std::pair<Term, Configuration>> out;
    for (const RtmRule& r : m.rules) {
        if (r.source != c.state || r.read != c.tape.at_head()) continue;
        out.emplace_back(r.action, apply_rule_at(c, r.write, r.move, r.target));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration graphs

namespace detail {

template <typename StepFn>
ReachResult config_bfs(const Configuration& init, StepFn&& stepfn, std::size_t depth,
                       std::size_t max_states)
{
    ReachResult res;
    std::map<std::string, std::size_t> index;
    std::deque<std::pair<Configuration, std::size_t>> frontier;

    auto intern = [&](const Configuration& c, std::size_t d) {
        std::string key = c.str();
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        std::size_t id = res.graph.num_states++;
        index.emplace(key, id);
        res.graph.state_names.push_back(key);
        if (d < depth && res.graph.num_states <= max_states)
            frontier.emplace_back(c, d);
        else
            res.closed = false;
        return id;
    };

    res.graph.initial = intern(init, 0);
    while (!frontier.empty()) {
        auto [c, d] = frontier.front();
        frontier.pop_front();
        std::size_t from = index.at(c.str());
        for (auto& [action, succ] : stepfn(c)) {
            std::size_t to = intern(succ, d + 1);
            LtsTransition t{from, label_of(action), to};
            if (std::find(res.graph.transitions.begin(), res.graph.transitions.end(), t) ==
                res.graph.transitions.end())
                res.graph.transitions.push_back(t);
        }
    }
    return res;
}

} // namespace detail

constexpr std::size_t kDefaultConfigCap = 100000;

// BFS of `step` from (initial, blank tape) to the given depth, states
// deduplicated by normalized configuration.
inline ReachResult config_lts(const Rtm& m, std::size_t depth,
                              std::size_t max_states = kDefaultConfigCap)
{
    return detail::config_bfs(
        initial_configuration(m.initial), [&](const Configuration& c) { return step(m, c); }, depth,
        max_states);
}

// Explores until the reachable set closes or the cap is hit.
inline ReachResult config_lts_full(const Rtm& m, std::size_t max_states = kDefaultConfigCap)
{
    return config_lts(m, max_states + 1, max_states);
}

// ---------------------------------------------------------------------------
// Validation and the .rtm text format

struct Verdict {
    bool ok = true;
    std::vector<std::string> problems;
};

inline Verdict validate(const Rtm& m)
{
    Verdict v;
    auto need_ground = [&](const Term& t, const char* role) {
        if (!t.ground()) v.problems.push_back(std::string(role) + " " + t.str() + " contains variables");
    };
    need_ground(m.initial, "initial state");
    for (const RtmRule& r : m.rules) {
        need_ground(r.source, "state");
        need_ground(r.target, "state");
        need_ground(r.read, "read symbol");
        need_ground(r.write, "write symbol");
        need_ground(r.action, "action");
    }
    v.ok = v.problems.empty();
    return v;
}

// `initial: <state>` then `rule: <s> <d> <a> <e> <L|R> <t>` lines; `#`
// comment lines allowed.  State names are bare identifiers; symbols use the
// term syntax, with a bare identifier accepted as shorthand for a constant.
inline Rtm parse_rtm(std::string_view text, const TermLimits& limits = {})
{
    Rtm m;
    bool have_initial = false;
    std::size_t pos = 0, lineno = 0;

    auto parse_symbol = [&](std::string_view tok) -> Term {
        // bare identifiers denote constants in the ground .rtm format
        if (!tok.empty() && tok[0] >= 'a' && tok[0] <= 'z') {
            bool plain = true;
            for (char ch : tok)
                if (!is_symbol_char(ch)) plain = false;
            if (plain) return Term::constant(std::string(tok));
        }
        return Term::parse(tok, limits);
    };

    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, (nl == std::string_view::npos ? text.size() : nl) - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        try {
            if (line.substr(0, 8) == "initial:") {
                std::string_view rest = line.substr(8);
                std::size_t i = 0;
                detail::skip_spaces(rest, i);
                m.initial = Term::constant(std::string(rest.substr(i)));
                have_initial = true;
            } else if (line.substr(0, 5) == "rule:") {
                std::string_view rest = line.substr(5);
                std::vector<std::string> toks;
                std::size_t i = 0;
                while (i < rest.size()) {
                    detail::skip_spaces(rest, i);
                    if (i >= rest.size()) break;
                    std::size_t start = i;
                    int paren = 0;
                    while (i < rest.size() && (paren > 0 || (rest[i] != ' ' && rest[i] != '\t'))) {
                        if (rest[i] == '(') ++paren;
                        if (rest[i] == ')') --paren;
                        ++i;
                    }
                    toks.emplace_back(rest.substr(start, i - start));
                }
                if (toks.size() != 6) throw ParseError("rule needs 6 fields: s d a e L|R t");
                RtmRule r;
                r.source = Term::constant(toks[0]);
                r.read = parse_symbol(toks[1]);
                r.action = parse_symbol(toks[2]);
                r.write = parse_symbol(toks[3]);
                if (toks[4] == "L")
                    r.move = Move::Left;
                else if (toks[4] == "R")
                    r.move = Move::Right;
                else
                    throw ParseError("unknown move symbol '" + toks[4] + "'");
                r.target = Term::constant(toks[5]);
                m.rules.push_back(std::move(r));
            } else {
                throw ParseError("unrecognized line");
            }
        } catch (const ParseError& e) {
            throw ParseError(".rtm line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_initial) throw ParseError(".rtm: missing initial: line (undeclared initial state)");
    return m;
}

inline std::string emit_rtm(const Rtm& m)
{
    std::string out = "initial: " + m.initial.symbol() + "\n";
    for (const RtmRule& r : m.rules) {
        out += "rule: " + r.source.symbol() + " " + r.read.str() + " " + r.action.str() + " " +
               r.write.str() + " " + (r.move == Move::Left ? "L" : "R") + " " + r.target.symbol() +
               "\n";
    }
    return out;
}

} // namespace atomata
