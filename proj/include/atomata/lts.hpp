#pragma once

// Labelled transition systems in three presentations: finite concrete
// graphs (.aut), descriptor-presented systems with atoms, and
// enumerator-backed effective systems.  Exploration is orbit-quotiented:
// successors are computed per orbit over the support, fresh variables are
// instantiated canonically, and states are stored in canonical form.

#include <atomata/orbitsets.hpp>

#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace atomata {

inline const std::string kTauLabel = "tau";

// The label string of a term-labelled edge.  Constants print bare, so the
// silent constant maps onto the plain "tau" used by the .aut format and a
// machine action 'a lines up with an .aut label "a".
inline std::string label_of(const Term& action)
{
    if (action.is_constant()) return action.symbol();
    return action.str();
}

// ---------------------------------------------------------------------------
// FiniteLts

struct LtsTransition {
    std::size_t from = 0;
    std::string label;
    std::size_t to = 0;

    friend bool operator==(const LtsTransition&, const LtsTransition&) = default;
    friend auto operator<=>(const LtsTransition&, const LtsTransition&) = default;
};

struct FiniteLts {
    std::size_t num_states = 0;
    std::size_t initial = 0;
    std::vector<LtsTransition> transitions;
    std::vector<std::string> state_names; // optional, for diagnostics

    friend bool operator==(const FiniteLts& a, const FiniteLts& b)
    {
        return a.num_states == b.num_states && a.initial == b.initial &&
               a.transitions == b.transitions;
    }
};

inline std::vector<std::pair<std::string, std::size_t>> out_concrete(const FiniteLts& l,
                                                                     std::size_t state)
{
    if (state >= l.num_states)
        throw std::invalid_argument("out_concrete: unknown state " + std::to_string(state));
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const LtsTransition& t : l.transitions)
        if (t.from == state) out.emplace_back(t.label, t.to);
    std::sort(out.begin(), out.end());
    return out;
}

// `des (<init>,<m>,<n>)` header followed by m lines `(<from>,"<label>",<to>)`.
inline FiniteLts parse_aut(std::string_view text)
{
    FiniteLts lts;
    std::size_t pos = 0, lineno = 0;
    std::size_t expected = 0;
    auto next_line = [&]() -> std::optional<std::string_view> {
        if (pos >= text.size()) return std::nullopt;
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, (nl == std::string_view::npos ? text.size() : nl) - pos);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    };
    auto fail = [&](const std::string& msg) -> void {
        throw ParseError(".aut line " + std::to_string(lineno) + ": " + msg);
    };

    auto header = next_line();
    if (!header) throw ParseError(".aut: empty input");
    {
        unsigned long init, m, n;
        if (std::sscanf(std::string(*header).c_str(), "des (%lu,%lu,%lu)", &init, &m, &n) != 3)
            fail("malformed header, expected des (<init>,<m>,<n>)");
        lts.initial = init;
        lts.num_states = n;
        expected = m;
        if (init >= n && n > 0) fail("initial state out of range");
    }
    while (auto line = next_line()) {
        if (line->empty()) continue;
        std::string_view s = *line;
        if (s.front() != '(' || s.back() != ')') fail("expected (<from>,\"<label>\",<to>)");
        s = s.substr(1, s.size() - 2);
        std::size_t c1 = s.find(',');
        if (c1 == std::string_view::npos) fail("missing ','");
        std::size_t q1 = s.find('"', c1);
        std::size_t q2 = s.rfind('"');
        if (q1 == std::string_view::npos || q2 == q1) fail("missing quoted label");
        std::size_t c2 = s.find(',', q2);
        if (c2 == std::string_view::npos) fail("missing ',' after label");
        LtsTransition t;
        try {
            t.from = std::stoul(std::string(s.substr(0, c1)));
            t.to = std::stoul(std::string(s.substr(c2 + 1)));
        } catch (const std::exception&) {
            fail("bad state number");
        }
        t.label = std::string(s.substr(q1 + 1, q2 - q1 - 1));
        if (t.from >= lts.num_states || t.to >= lts.num_states) fail("state out of range");
        lts.transitions.push_back(std::move(t));
    }
    if (lts.transitions.size() != expected)
        throw ParseError(".aut: header declares " + std::to_string(expected) + " transitions, found " +
                         std::to_string(lts.transitions.size()));
    return lts;
}

inline std::string emit_aut(const FiniteLts& l)
{
    std::string out = "des (" + std::to_string(l.initial) + "," + std::to_string(l.transitions.size()) +
                      "," + std::to_string(l.num_states) + ")\n";
    for (const LtsTransition& t : l.transitions)
        out += "(" + std::to_string(t.from) + ",\"" + t.label + "\"," + std::to_string(t.to) + ")\n";
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic transition systems with atoms

struct SymbolicLtsA {
    std::set<Atom> support;
    OrbitSet state_space;      // over state terms
    OrbitSet transition_space; // over (state, label, state) triples
    Term initial;
};

struct KSupportVerdict {
    bool supported = false;
    std::vector<Atom> offending;
};

// Sufficient and, for this presentation, exact: all descriptor constants of
// both spaces must lie in the declared support.
inline KSupportVerdict check_k_supported(const SymbolicLtsA& l)
{
    KSupportVerdict v;
    std::set<Atom> bad;
    auto scan = [&](const OrbitSet& os) {
        for (const OrbitDescriptor& d : os.descriptors)
            for (Atom a : d.explicit_atoms())
                if (!l.support.count(a)) bad.insert(a);
    };
    scan(l.state_space);
    scan(l.transition_space);
    v.supported = bad.empty();
    v.offending.assign(bad.begin(), bad.end());
    return v;
}

// ---------------------------------------------------------------------------
// Effective transition systems with atoms

// Deterministic pull-stream of triple codes for one state code.
struct CodeStream {
    std::function<std::optional<SetBuilderCode>()> next;
};

struct EffectiveLtsA {
    std::set<Atom> support;
    SetBuilderCode initial_code; // single-descriptor list for the initial state's orbit
    std::vector<Atom> initial_atoms;
    std::function<CodeStream(const SetBuilderCode&)> out;
    TermLimits limits{};
};

inline CodeStream stream_of(std::vector<SetBuilderCode> codes)
{
    auto shared = std::make_shared<std::vector<SetBuilderCode>>(std::move(codes));
    auto idx = std::make_shared<std::size_t>(0);
    return CodeStream{[shared, idx]() -> std::optional<SetBuilderCode> {
        if (*idx >= shared->size()) return std::nullopt;
        return (*shared)[(*idx)++];
    }};
}

// ---------------------------------------------------------------------------
// Exploration

struct ReachResult {
    FiniteLts graph;
    bool closed = true;    // the reachable set was exhausted within the depth
    bool truncated = false; // an enumerator stream hit its cap
};

constexpr std::size_t kDefaultStreamCap = 10000;

namespace detail {

struct Explorer {
    FiniteLts graph;
    std::map<std::string, std::size_t> index;
    std::deque<std::pair<std::string, std::size_t>> frontier; // key, depth
    bool closed = true;
    bool truncated = false;

    std::size_t state(const std::string& key, std::size_t depth, std::size_t max_depth)
    {
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        std::size_t id = graph.num_states++;
        index.emplace(key, id);
        graph.state_names.push_back(key);
        if (depth < max_depth)
            frontier.emplace_back(key, depth);
        else
            closed = false; // unexpanded state at the horizon
        return id;
    }
};

} // namespace detail

// Orbit-quotient reachable graph of a symbolic system: successors are
// enumerated per transition descriptor, with variables not bound by the
// source instantiated over the support, the source's atoms, and one
// canonical fresh atom per class.
inline ReachResult bounded_reach(const SymbolicLtsA& l, std::size_t depth)
{
    detail::Explorer ex;
    Term init = canonicalize(l.initial, l.support).first;
    ex.graph.initial = ex.state(init.str(), 0, depth);

    std::map<std::string, Term> term_of{{init.str(), init}};

    while (!ex.frontier.empty()) {
        auto [key, d] = ex.frontier.front();
        ex.frontier.pop_front();
        std::size_t from = ex.index.at(key);
        const Term src = term_of.at(key);

        std::set<Atom> known = l.support;
        for (Atom a : support_of(src)) known.insert(a);

        std::set<std::pair<std::string, std::string>> emitted;
        for (const OrbitDescriptor& td : l.transition_space.descriptors) {
            if (!td.pattern.is_tuple() || td.pattern.items().size() != 3)
                throw DescriptorError("transition descriptor must be a (state,label,state) triple");
            std::map<std::string, Atom> bound;
            if (!match_pattern(td.pattern.items()[0], src, bound)) continue;
            std::vector<std::string> residual;
            for (const std::string& v : td.vars())
                if (!bound.count(v)) residual.push_back(v);
            detail::for_each_canonical_valuation(
                residual, known, td.constraint, bound, [&](const std::map<std::string, Atom>& val) {
                    // canonicalize the (label, target) pair over the source
                    // frame so same-orbit successors collapse to one edge
                    Term pair = canonicalize(Term::tuple({substitute(td.pattern.items()[1], val),
                                                          substitute(td.pattern.items()[2], val)}),
                                             known)
                                    .first;
                    Term label = pair.items()[0];
                    Term target = canonicalize(pair.items()[1], l.support).first;
                    std::string tkey = target.str();
                    if (!emitted.insert({label_of(label), tkey}).second) return;
                    term_of.emplace(tkey, target);
                    std::size_t to = ex.state(tkey, d + 1, depth);
                    ex.graph.transitions.push_back({from, label_of(label), to});
                });
        }
    }
    return {std::move(ex.graph), ex.closed, ex.truncated};
}

// Descriptor of the orbit of a ground term over K: non-support atoms become
// variables (named x0, x1, ... by first occurrence), kept pairwise distinct
// and apart from every support atom.
inline OrbitDescriptor orbit_descriptor_of(const Term& t, const std::set<Atom>& k)
{
    std::vector<Atom> occ;
    collect_atoms(t, occ);
    std::map<Atom, std::string> var_of;
    std::vector<std::string> vars;
    for (Atom a : occ) {
        if (k.count(a) || var_of.count(a)) continue;
        std::string v = "x" + std::to_string(vars.size());
        var_of[a] = v;
        vars.push_back(v);
    }
    std::function<Term(const Term&)> abstract = [&](const Term& s) -> Term {
        switch (s.kind()) {
        case Term::Kind::Atom: {
            auto it = var_of.find(s.atom_value());
            return it == var_of.end() ? s : Term::var(it->second);
        }
        case Term::Kind::Tuple: {
            std::vector<Term> items;
            items.reserve(s.items().size());
            for (const Term& x : s.items()) items.push_back(abstract(x));
            return Term::tuple(std::move(items));
        }
        default: return s;
        }
    };
    OrbitDescriptor d;
    d.pattern = abstract(t);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            d.constraint.literals.push_back(
                {EqOperand::variable(vars[i]), EqOperand::variable(vars[j]), false});
        for (Atom a : k)
            d.constraint.literals.push_back({EqOperand::variable(vars[i]), EqOperand::atomic(a), false});
    }
    return d;
}

// Atom tuple valuating orbit_descriptor_of(t, k)'s variables, in order.
inline std::vector<Atom> orbit_atoms_of(const Term& t, const std::set<Atom>& k)
{
    std::vector<Atom> occ, out;
    collect_atoms(t, occ);
    for (Atom a : occ)
        if (!k.count(a)) out.push_back(a);
    return out;
}

// Exploration of an enumerator-backed system.  States are concrete terms
// built from (code, atom tuple) pairs; each emitted triple code must carry
// the queried state descriptor as its source component.
inline ReachResult bounded_reach(const EffectiveLtsA& l, std::size_t depth,
                                 std::size_t stream_cap = kDefaultStreamCap)
{
    detail::Explorer ex;

    struct Node {
        SetBuilderCode code;
        Term term;
    };
    std::map<std::string, Node> node_of;

    auto intern = [&](const SetBuilderCode& code, const Term& term, std::size_t d) {
        Term canon = canonicalize(term, l.support).first;
        std::string key = canon.str();
        node_of.emplace(key, Node{code, canon});
        return ex.state(key, d, depth);
    };

    auto initial_descriptor = decode(l.initial_code, l.limits);
    if (initial_descriptor.size() != 1)
        throw DescriptorError("initial code must encode a single descriptor");
    {
        std::map<std::string, Atom> val;
        auto vars = initial_descriptor[0].vars();
        if (vars.size() != l.initial_atoms.size())
            throw DescriptorError("initial atom tuple does not match the descriptor's variables");
        for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = l.initial_atoms[i];
        Term init = instantiate(initial_descriptor[0], val);
        ex.graph.initial = intern(l.initial_code, init, 0);
    }

    while (!ex.frontier.empty()) {
        auto [key, d] = ex.frontier.front();
        ex.frontier.pop_front();
        std::size_t from = ex.index.at(key);
        const Node node = node_of.at(key);

        auto state_ds = decode(node.code, l.limits);
        if (state_ds.size() != 1) throw DescriptorError("state code must encode a single descriptor");
        const OrbitDescriptor& sd = state_ds[0];

        // bind the state descriptor's variables against the canonical term
        std::map<std::string, Atom> bound;
        if (!match_pattern(sd.pattern, node.term, bound))
            throw DescriptorError("state term does not match its own descriptor");

        std::set<Atom> known = l.support;
        for (Atom a : support_of(node.term)) known.insert(a);

        CodeStream stream = l.out(node.code);
        std::size_t emitted_count = 0;
        std::set<std::pair<std::string, std::string>> emitted;
        while (auto code = stream.next()) {
            if (emitted_count++ >= stream_cap) {
                ex.truncated = true;
                ex.closed = false;
                break;
            }
            auto triple_ds = decode(*code, l.limits);
            if (triple_ds.size() != 1)
                throw DescriptorError("triple code must encode a single descriptor");
            const OrbitDescriptor& td = triple_ds[0];
            if (!td.pattern.is_tuple() || td.pattern.items().size() != 3)
                throw DescriptorError("triple code must encode a (state,label,state) pattern");
            if (!(td.pattern.items()[0] == sd.pattern))
                throw DescriptorError("emitted triple's source component does not match the "
                                      "queried state descriptor");
            std::vector<std::string> residual;
            for (const std::string& v : td.vars())
                if (!bound.count(v)) residual.push_back(v);
            detail::for_each_canonical_valuation(
                residual, known, td.constraint, bound, [&](const std::map<std::string, Atom>& val) {
                    Term label = substitute(td.pattern.items()[1], val);
                    Term target = substitute(td.pattern.items()[2], val);
                    Term canon_target = canonicalize(target, l.support).first;
                    if (!emitted.insert({label_of(label), canon_target.str()}).second) return;
                    // re-derive the target's own orbit code so its variables
                    // follow the first-occurrence naming convention
                    SetBuilderCode target_code =
                        encode({orbit_descriptor_of(canon_target, l.support)});
                    std::size_t to = intern(target_code, target, d + 1);
                    ex.graph.transitions.push_back({from, label_of(label), to});
                });
        }
    }
    return {std::move(ex.graph), ex.closed, ex.truncated};
}

// Enumerator view of a symbolic system: per state orbit, the outgoing
// transition descriptors are split into one triple code per canonical
// valuation case, so stage-wise consumers can valuate shared variables from
// the source tuple and freshen the rest.
inline EffectiveLtsA effective_of_symbolic(const SymbolicLtsA& l)
{
    EffectiveLtsA e;
    e.support = l.support;
    Term init = canonicalize(l.initial, l.support).first;
    e.initial_code = encode({orbit_descriptor_of(init, l.support)});
    e.initial_atoms = orbit_atoms_of(init, l.support);
    auto sys = std::make_shared<SymbolicLtsA>(l);
    e.out = [sys](const SetBuilderCode& state_code) -> CodeStream {
        auto ds = decode(state_code);
        if (ds.size() != 1) throw DescriptorError("state code must encode a single descriptor");
        const OrbitDescriptor sd = ds[0];
        // canonical instance of this orbit
        std::map<std::string, Atom> val;
        std::set<Atom> avoid = sys->support;
        for (const std::string& v : sd.vars()) {
            Atom f = fresh_atom(avoid);
            avoid.insert(f);
            val[v] = f;
        }
        Term src = instantiate(sd, val);
        std::map<Atom, std::string> var_of;
        for (auto& [v, a] : val) var_of[a] = v;

        std::set<Atom> known = sys->support;
        for (Atom a : support_of(src)) known.insert(a);

        std::vector<SetBuilderCode> codes;
        std::set<SetBuilderCode> seen;
        for (const OrbitDescriptor& td : sys->transition_space.descriptors) {
            if (!td.pattern.is_tuple() || td.pattern.items().size() != 3)
                throw DescriptorError("transition descriptor must be a (state,label,state) triple");
            std::map<std::string, Atom> bound;
            if (!match_pattern(td.pattern.items()[0], src, bound)) continue;
            std::vector<std::string> residual;
            for (const std::string& v : td.vars())
                if (!bound.count(v)) residual.push_back(v);
            detail::for_each_canonical_valuation(
                residual, known, td.constraint, bound, [&](const std::map<std::string, Atom>& v2) {
                    // same joint canonicalization as bounded_reach, so the
                    // code-level view and the direct view emit equal graphs
                    Term pair = canonicalize(Term::tuple({substitute(td.pattern.items()[1], v2),
                                                          substitute(td.pattern.items()[2], v2)}),
                                             known)
                                    .first;
                    // triple term in the source's frame; shared atoms keep the
                    // source variable names
                    Term triple = Term::tuple({src, pair.items()[0], pair.items()[1]});
                    OrbitDescriptor od = orbit_descriptor_of(triple, sys->support);
                    SetBuilderCode code = encode({od});
                    if (seen.insert(code).second) codes.push_back(code);
                });
        }
        return stream_of(std::move(codes));
    };
    return e;
}

// ---------------------------------------------------------------------------
// .ltsa file format: support / initial headers, then `states:` and
// `transitions:` sections of descriptor lines.

inline SymbolicLtsA parse_ltsa(std::string_view text, const TermLimits& limits = {})
{
    SymbolicLtsA l;
    bool have_initial = false;
    int section = 0; // 0 none, 1 states, 2 transitions
    std::size_t pos = 0, lineno = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, (nl == std::string_view::npos ? text.size() : nl) - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        try {
            if (line.substr(0, 8) == "support:") {
                std::string_view rest = line.substr(8);
                std::size_t i = 0;
                while (i < rest.size()) {
                    detail::skip_spaces(rest, i);
                    if (i >= rest.size()) break;
                    if (rest[i] != '#') throw ParseError("support entries must be atoms");
                    ++i;
                    std::size_t start = i;
                    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
                    if (i == start) throw ParseError("bad atom in support");
                    l.support.insert(
                        Atom{static_cast<std::uint32_t>(std::stoul(std::string(rest.substr(start, i - start))))});
                }
            } else if (line.substr(0, 8) == "initial:") {
                l.initial = Term::parse(line.substr(8), limits);
                have_initial = true;
            } else if (line == "states:") {
                section = 1;
            } else if (line == "transitions:") {
                section = 2;
            } else if (line.substr(0, 6) == "orbit ") {
                if (section == 1)
                    l.state_space.descriptors.push_back(parse_descriptor(line, limits));
                else if (section == 2)
                    l.transition_space.descriptors.push_back(parse_descriptor(line, limits));
                else
                    throw ParseError("descriptor outside states:/transitions: section");
            } else {
                throw ParseError("unrecognized line");
            }
        } catch (const ParseError& e) {
            throw ParseError(".ltsa line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_initial) throw ParseError(".ltsa: missing initial: header");
    l.state_space.support = l.support;
    l.transition_space.support = l.support;
    return l;
}

inline std::string emit_ltsa(const SymbolicLtsA& l)
{
    std::string out;
    if (!l.support.empty()) {
        out += "support:";
        for (Atom a : l.support) out += " " + to_string(a);
        out += "\n";
    }
    out += "initial: " + l.initial.str() + "\n";
    out += "states:\n";
    for (const OrbitDescriptor& d : l.state_space.descriptors) out += d.str() + "\n";
    out += "transitions:\n";
    for (const OrbitDescriptor& d : l.transition_space.descriptors) out += d.str() + "\n";
    return out;
}

} // namespace atomata
