#pragma once

// Reactive Turing machines with atoms: rule schemas over orbit-finite
// alphabets with canonical stepping, the copy / fresh / label-production
// gadgets, infinitary machines backed by host rule streams, and extraction
// of the enumerator-backed transition system of a machine.
//
// Canonical stepping instantiates every variable that is not bound by the
// (state, head symbol) match with (i) each atom of the machine support and
// the configuration that satisfies the constraint and (ii) exactly one
// canonical fresh atom per variable class, which keeps the successor set
// finite and faithful to the full one up to support-fixing automorphism.

#include <atomata/rtm.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace atomata {

// ---------------------------------------------------------------------------
// Rule schemas and machines

struct RuleSchema {
    Term source;
    Term read;
    Term action;
    Term write;
    Move move = Move::Right;
    Term target;
    EqConstraint constraint;

    friend bool operator==(const RuleSchema&, const RuleSchema&) = default;

    std::vector<std::string> vars() const
    {
        std::vector<std::string> out;
        collect_vars(source, out);
        collect_vars(read, out);
        collect_vars(action, out);
        collect_vars(write, out);
        collect_vars(target, out);
        return out;
    }

    std::set<Atom> explicit_atoms() const
    {
        std::set<Atom> out;
        for (const Term* t : {&source, &read, &action, &write, &target})
            for (Atom a : support_of(*t)) out.insert(a);
        for (Atom a : constraint.atoms()) out.insert(a);
        return out;
    }

    std::string str() const
    {
        std::string out = "schema: " + source.str() + " " + read.str() + " " + action.str() + " " +
                          write.str() + " " + (move == Move::Left ? "L" : "R") + " " + target.str();
        if (!constraint.empty()) out += " where " + constraint.str();
        return out;
    }
};

struct RtmA {
    std::set<Atom> support;
    OrbitSet state_space;
    std::vector<RuleSchema> schemas;
    Term initial;
};

// State space presented by the schemas themselves: one descriptor per
// distinct source/target pattern, plus the initial state's orbit.
inline OrbitSet derive_state_space(const std::set<Atom>& support,
                                   const std::vector<RuleSchema>& schemas, const Term& initial)
{
    OrbitSet space;
    space.support = support;
    auto add = [&](const Term& pattern, const EqConstraint& c) {
        OrbitDescriptor d;
        d.pattern = pattern;
        auto vars = pattern_vars(pattern);
        for (const EqLiteral& l : c.literals) {
            auto known = [&](const EqOperand& o) {
                return !o.is_var || std::find(vars.begin(), vars.end(), o.var) != vars.end();
            };
            if (known(l.lhs) && known(l.rhs)) d.constraint.literals.push_back(l);
        }
        for (const OrbitDescriptor& e : space.descriptors)
            if (e == d) return;
        space.descriptors.push_back(std::move(d));
    };
    add(orbit_descriptor_of(initial, support).pattern, orbit_descriptor_of(initial, support).constraint);
    for (const RuleSchema& s : schemas) {
        add(s.source, s.constraint);
        add(s.target, s.constraint);
    }
    return space;
}

inline Verdict validate_rtma(const RtmA& m, const TermLimits& limits = {})
{
    Verdict v;
    auto check_term = [&](const Term& t, const std::string& where) {
        if (t.depth() > limits.max_depth)
            v.problems.push_back(where + ": pattern " + t.str() + " exceeds depth limit");
        std::function<void(const Term&)> arity = [&](const Term& s) {
            if (s.is_tuple()) {
                if (s.items().size() > limits.max_arity)
                    v.problems.push_back(where + ": tuple arity exceeds limit in " + t.str());
                for (const Term& x : s.items()) arity(x);
            }
        };
        arity(t);
    };
    for (std::size_t i = 0; i < m.schemas.size(); ++i) {
        const RuleSchema& s = m.schemas[i];
        std::string where = "schema " + std::to_string(i) + " (" + s.source.str() + ")";
        for (Atom a : s.explicit_atoms())
            if (!m.support.count(a))
                v.problems.push_back(where + ": atom " + to_string(a) + " outside the support");
        for (const Term* t : {&s.source, &s.read, &s.action, &s.write, &s.target})
            check_term(*t, where);
        auto vars = s.vars();
        for (const std::string& cv : s.constraint.vars())
            if (std::find(vars.begin(), vars.end(), cv) == vars.end())
                v.problems.push_back(where + ": constraint variable '" + cv + "' unused in patterns");
    }
    for (Atom a : support_of(m.initial))
        if (!m.support.count(a))
            v.problems.push_back("initial state atom " + to_string(a) + " outside the support");
    v.ok = v.problems.empty();
    return v;
}

// ---------------------------------------------------------------------------
// Canonical stepping

inline Term config_term(const Configuration& c);
inline Configuration configuration_of_term(const Term& t);

// Successors are canonicalized jointly with their action over the source
// frame (machine support plus the source configuration's atoms), so two
// instantiations in the same orbit over that frame collapse to one edge and
// fresh atoms are named by first occurrence.
inline std::vector<std::pair<Term, Configuration>> step_canonical(const RtmA& m,
                                                                  const Configuration& c)
{
    std::set<Atom> known = m.support;
    for (Atom a : support_of(c.state)) known.insert(a);
    for (const Term& cell : c.tape.cells)
        for (Atom a : support_of(cell)) known.insert(a);

    std::vector<std::pair<Term, Configuration>> out;
    std::set<std::string> seen;
    for (const RuleSchema& s : m.schemas) {
        std::map<std::string, Atom> bound;
        if (!match_pattern(s.source, c.state, bound)) continue;
        if (!match_pattern(s.read, c.tape.at_head(), bound)) continue;
        std::vector<std::string> residual;
        for (const std::string& v : s.vars())
            if (!bound.count(v)) residual.push_back(v);
        detail::for_each_canonical_valuation(
            residual, known, s.constraint, bound, [&](const std::map<std::string, Atom>& val) {
                Term action = substitute(s.action, val);
                Configuration succ =
                    apply_rule_at(c, substitute(s.write, val), s.move, substitute(s.target, val));
                Term pair =
                    canonicalize(Term::tuple({action, config_term(succ)}), known).first;
                action = pair.items()[0];
                succ = configuration_of_term(pair.items()[1]);
                std::string key = action.str() + "|" + succ.str();
                if (seen.insert(key).second) out.emplace_back(std::move(action), std::move(succ));
            });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical configurations

// Injective term encoding of a configuration; atoms appear exactly as in the
// state and tape, so canonicalizing the encoding canonicalizes both
// consistently.
inline Term config_term(const Configuration& c)
{
    std::vector<Term> pre(c.tape.cells.begin(), c.tape.cells.begin() + c.tape.head);
    std::vector<Term> post(c.tape.cells.begin() + c.tape.head + 1, c.tape.cells.end());
    return Term::tuple({Term::constant("cfg"), c.state, Term::tuple(std::move(pre)),
                        c.tape.at_head(), Term::tuple(std::move(post))});
}

inline Configuration configuration_of_term(const Term& t)
{
    if (!t.is_tuple() || t.items().size() != 5 || !(t.items()[0] == Term::constant("cfg")))
        throw DescriptorError("not a configuration term: " + t.str());
    Configuration c;
    c.state = t.items()[1];
    c.tape.cells.clear();
    for (const Term& x : t.items()[2].items()) c.tape.cells.push_back(x);
    c.tape.head = c.tape.cells.size();
    c.tape.cells.push_back(t.items()[3]);
    for (const Term& x : t.items()[4].items()) c.tape.cells.push_back(x);
    return c;
}

inline Configuration canonical_configuration(const Configuration& c, const std::set<Atom>& support)
{
    return configuration_of_term(canonicalize(config_term(c), support).first);
}

// BFS under canonical stepping with configurations canonicalized over the
// machine support.
inline ReachResult config_lts_canonical(const RtmA& m, std::size_t depth,
                                        std::size_t max_states = kDefaultConfigCap)
{
    Configuration init = canonical_configuration(initial_configuration(m.initial), m.support);
    return detail::config_bfs(
        init,
        [&](const Configuration& c) {
            auto raw = step_canonical(m, c);
            for (auto& [a, succ] : raw) succ = canonical_configuration(succ, m.support);
            return raw;
        },
        depth, max_states);
}

// ---------------------------------------------------------------------------
// Gadgets

enum class GadgetKind { Copy, Fresh };

// The copy and fresh rule families.  Copy duplicates the atom under the head
// to the first blank on the right.  Fresh guesses an atom into the first
// blank, scans left checking it against every tape atom, and re-guesses on
// collision; the scan ends at a blank.
inline RtmA emit_gadget(GadgetKind kind)
{
    auto V = [](const char* n) { return Term::var(n); };
    auto C = [](const char* n) { return Term::constant(n); };
    auto tup = [](std::vector<Term> v) { return Term::tuple(std::move(v)); };
    const Term tau = tau_term();
    const Term blank = blank_term();
    auto neq = [](const char* a, const char* b) {
        return EqLiteral{EqOperand::variable(a), EqOperand::variable(b), false};
    };

    RtmA m;
    if (kind == GadgetKind::Copy) {
        m.initial = C("copy");
        m.schemas = {
            {C("copy"), V("x"), tau, V("x"), Move::Right, tup({C("copying"), V("x")}), {}},
            {tup({C("copying"), V("x")}), V("y"), tau, V("y"), Move::Right,
             tup({C("copying"), V("x")}), {}},
            {tup({C("copying"), V("x")}), blank, tau, V("x"), Move::Right, C("finish"), {}},
        };
    } else {
        m.initial = C("fresh");
        m.schemas = {
            // guess an atom into the blank destination cell
            {C("fresh"), blank, tau, V("x"), Move::Left, tup({C("check"), V("x")}), {}},
            // scan left over atoms different from the guess
            {tup({C("check"), V("x")}), V("y"), tau, V("y"), Move::Left, tup({C("check"), V("x")}),
             {{neq("x", "y")}}},
            // collision: walk right to the guess cell and re-guess there
            {tup({C("check"), V("x")}), V("x"), tau, V("x"), Move::Right,
             tup({C("refresh"), V("x")}), {}},
            {tup({C("refresh"), V("x")}), V("y"), tau, V("y"), Move::Right,
             tup({C("refresh"), V("x")}), {{neq("x", "y")}}},
            {tup({C("refresh"), V("x")}), V("x"), tau, V("y"), Move::Left, tup({C("check"), V("y")}),
             {{neq("x", "y")}}},
            // the left end of the atom zone is blank: creation finished
            {tup({C("check"), V("x")}), blank, tau, blank, Move::Right, C("finish"), {}},
        };
    }
    m.state_space = derive_state_space(m.support, m.schemas, m.initial);
    return m;
}

// One program per orbit of `labels`: entered via the code state 'e<i> with
// the label's atom tuple laid out on the tape, the program collects the
// atoms cell by cell into its control state and then fires the single
// transition labelled by the assembled label.
inline RtmA emit_gadget_produce_label(const OrbitSet& labels)
{
    RtmA m;
    m.support = labels.support;
    const Term tau = tau_term();
    const Term blank = blank_term();
    for (std::size_t i = 0; i < labels.descriptors.size(); ++i) {
        const OrbitDescriptor& d = labels.descriptors[i];
        d.check_valid();
        auto vars = d.vars();
        Term entry = Term::constant("e" + std::to_string(i));
        Term fired = Term::constant("fired" + std::to_string(i));
        if (vars.empty()) {
            m.schemas.push_back({entry, blank, d.pattern, blank, Move::Right, fired, d.constraint});
            continue;
        }
        auto collector = [&](std::size_t j) { // state holding the first j atoms
            std::vector<Term> held;
            for (std::size_t k = 0; k < j; ++k) held.push_back(Term::var(vars[k]));
            return Term::tuple({Term::constant("col" + std::to_string(i)), Term::tuple(held)});
        };
        m.schemas.push_back(
            {entry, Term::var(vars[0]), tau, Term::var(vars[0]), Move::Right, collector(1), {}});
        for (std::size_t j = 1; j < vars.size(); ++j)
            m.schemas.push_back({collector(j), Term::var(vars[j]), tau, Term::var(vars[j]),
                                 Move::Right, collector(j + 1), {}});
        m.schemas.push_back(
            {collector(vars.size()), blank, d.pattern, blank, Move::Right, fired, d.constraint});
    }
    m.initial = Term::constant("e0");
    m.state_space = derive_state_space(m.support, m.schemas, m.initial);
    return m;
}

// ---------------------------------------------------------------------------
// Effective system of a machine

// The enumerator-backed transition system whose out, on a configuration
// code, emits triple codes for exactly the canonical-step successors.
inline EffectiveLtsA extract_effective_ltsa(const RtmA& m)
{
    EffectiveLtsA e;
    e.support = m.support;
    Term init = canonicalize(config_term(initial_configuration(m.initial)), m.support).first;
    e.initial_code = encode({orbit_descriptor_of(init, m.support)});
    e.initial_atoms = orbit_atoms_of(init, m.support);
    auto machine = std::make_shared<RtmA>(m);
    e.out = [machine](const SetBuilderCode& state_code) -> CodeStream {
        auto ds = decode(state_code);
        if (ds.size() != 1) throw DescriptorError("state code must encode a single descriptor");
        std::map<std::string, Atom> val;
        std::set<Atom> avoid = machine->support;
        for (const std::string& v : ds[0].vars()) {
            Atom f = fresh_atom(avoid);
            avoid.insert(f);
            val[v] = f;
        }
        Term src = instantiate(ds[0], val);
        Configuration c = configuration_of_term(src);
        std::vector<SetBuilderCode> codes;
        std::set<SetBuilderCode> seen;
        for (auto& [action, succ] : step_canonical(*machine, c)) {
            Term triple = Term::tuple({src, action, config_term(succ)});
            SetBuilderCode code = encode({orbit_descriptor_of(triple, machine->support)});
            if (seen.insert(code).second) codes.push_back(code);
        }
        return stream_of(std::move(codes));
    };
    return e;
}

// ---------------------------------------------------------------------------
// Infinitary machines

struct InfRule {
    Term action;
    Term write;
    Move move = Move::Right;
    Term target;

    friend bool operator==(const InfRule&, const InfRule&) = default;
};

// Deterministic pull-stream: re-querying out_rules yields the same prefix.
struct RuleStream {
    std::function<std::optional<InfRule>()> next;
};

struct RtmInf {
    Term initial;
    std::function<RuleStream(const Term& state, const Term& read)> out_rules;
};

inline RuleStream rule_stream_of(std::vector<InfRule> rules)
{
    auto shared = std::make_shared<std::vector<InfRule>>(std::move(rules));
    auto idx = std::make_shared<std::size_t>(0);
    return RuleStream{[shared, idx]() -> std::optional<InfRule> {
        if (*idx >= shared->size()) return std::nullopt;
        return (*shared)[(*idx)++];
    }};
}

struct StepInfResult {
    std::vector<std::pair<Term, Configuration>> successors;
    bool truncated = false; // the stream had emissions beyond the budget
};

inline StepInfResult step_inf(const RtmInf& m, const Configuration& c, std::size_t budget)
{
    StepInfResult res;
    RuleStream stream = m.out_rules(c.state, c.tape.at_head());
    std::size_t taken = 0;
    while (auto r = stream.next()) {
        if (taken == budget) {
            res.truncated = true;
            break;
        }
        ++taken;
        res.successors.emplace_back(r->action, apply_rule_at(c, r->write, r->move, r->target));
    }
    return res;
}

// BFS of step_inf; truncation anywhere is recorded on the result.
inline ReachResult config_lts_inf(const RtmInf& m, std::size_t depth, std::size_t budget,
                                  std::size_t max_states = kDefaultConfigCap)
{
    bool truncated = false;
    auto res = detail::config_bfs(
        initial_configuration(m.initial),
        [&](const Configuration& c) {
            auto r = step_inf(m, c, budget);
            truncated = truncated || r.truncated;
            return r.successors;
        },
        depth, max_states);
    res.truncated = truncated;
    if (truncated) res.closed = false;
    return res;
}

// ---------------------------------------------------------------------------
// .rtma text format

inline RtmA parse_rtma(std::string_view text, const TermLimits& limits = {})
{
    RtmA m;
    bool have_initial = false;
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
                    m.support.insert(Atom{
                        static_cast<std::uint32_t>(std::stoul(std::string(rest.substr(start, i - start))))});
                }
            } else if (line.substr(0, 8) == "initial:") {
                m.initial = Term::parse(line.substr(8), limits);
                have_initial = true;
            } else if (line.substr(0, 7) == "schema:") {
                std::string_view rest = line.substr(7);
                std::size_t where_pos = rest.find(" where ");
                std::string_view fields =
                    where_pos == std::string_view::npos ? rest : rest.substr(0, where_pos);
                std::vector<std::string> toks;
                std::size_t i = 0;
                while (i < fields.size()) {
                    detail::skip_spaces(fields, i);
                    if (i >= fields.size()) break;
                    std::size_t start = i;
                    int paren = 0;
                    while (i < fields.size() && (paren > 0 || (fields[i] != ' ' && fields[i] != '\t'))) {
                        if (fields[i] == '(') ++paren;
                        if (fields[i] == ')') --paren;
                        ++i;
                    }
                    toks.emplace_back(fields.substr(start, i - start));
                }
                if (toks.size() != 6) throw ParseError("schema needs 6 fields: src read act write L|R tgt");
                RuleSchema s;
                s.source = Term::parse(toks[0], limits);
                s.read = Term::parse(toks[1], limits);
                s.action = Term::parse(toks[2], limits);
                s.write = Term::parse(toks[3], limits);
                if (toks[4] == "L")
                    s.move = Move::Left;
                else if (toks[4] == "R")
                    s.move = Move::Right;
                else
                    throw ParseError("unknown move symbol '" + toks[4] + "'");
                s.target = Term::parse(toks[5], limits);
                if (where_pos != std::string_view::npos)
                    s.constraint = detail::parse_constraint(rest.substr(where_pos + 7));
                m.schemas.push_back(std::move(s));
            } else {
                throw ParseError("unrecognized line");
            }
        } catch (const ParseError& e) {
            throw ParseError(".rtma line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_initial) throw ParseError(".rtma: missing initial: line");
    m.state_space = derive_state_space(m.support, m.schemas, m.initial);
    return m;
}

inline std::string emit_rtma(const RtmA& m)
{
    std::string out;
    if (!m.support.empty()) {
        out += "support:";
        for (Atom a : m.support) out += " " + to_string(a);
        out += "\n";
    }
    out += "initial: " + m.initial.str() + "\n";
    for (const RuleSchema& s : m.schemas) out += s.str() + "\n";
    return out;
}

} // namespace atomata
