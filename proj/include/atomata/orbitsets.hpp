#pragma once

// Finite symbolic presentations of legal, orbit-finite sets with atoms:
// patterns with equality constraints, set-builder codes, membership,
// canonical per-orbit enumeration, and support-violation certificates.

#include <atomata/atoms.hpp>

#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace atomata {

struct DescriptorError : std::runtime_error {
    explicit DescriptorError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Equality constraints: conjunctions of v = w / v != w over variables and
// explicit atoms.

struct EqOperand {
    bool is_var = true;
    std::string var;
    Atom atom{0};

    static EqOperand variable(std::string name) { return {true, std::move(name), Atom{0}}; }
    static EqOperand atomic(Atom a) { return {false, {}, a}; }

    friend bool operator==(const EqOperand&, const EqOperand&) = default;
    friend bool operator<(const EqOperand& a, const EqOperand& b)
    {
        if (a.is_var != b.is_var) return a.is_var < b.is_var;
        return a.is_var ? a.var < b.var : a.atom < b.atom;
    }

    std::string str() const { return is_var ? var : to_string(atom); }
};

struct EqLiteral {
    EqOperand lhs, rhs;
    bool equal = true;

    friend bool operator==(const EqLiteral&, const EqLiteral&) = default;
    std::string str() const { return lhs.str() + (equal ? " = " : " != ") + rhs.str(); }
};

struct EqConstraint {
    std::vector<EqLiteral> literals;

    friend bool operator==(const EqConstraint&, const EqConstraint&) = default;
    bool empty() const { return literals.empty(); }

    std::vector<std::string> vars() const
    {
        std::vector<std::string> out;
        auto add = [&](const EqOperand& o) {
            if (o.is_var && std::find(out.begin(), out.end(), o.var) == out.end())
                out.push_back(o.var);
        };
        for (const EqLiteral& l : literals) {
            add(l.lhs);
            add(l.rhs);
        }
        return out;
    }

    std::set<Atom> atoms() const
    {
        std::set<Atom> out;
        for (const EqLiteral& l : literals) {
            if (!l.lhs.is_var) out.insert(l.lhs.atom);
            if (!l.rhs.is_var) out.insert(l.rhs.atom);
        }
        return out;
    }

    std::string str() const
    {
        std::string out;
        for (std::size_t i = 0; i < literals.size(); ++i) {
            if (i) out += ", ";
            out += literals[i].str();
        }
        return out;
    }
};

namespace detail {

// Union-find keyed by operand.
class OperandUnion {
public:
    EqOperand find(EqOperand o)
    {
        auto it = parent_.find(o);
        if (it == parent_.end() || it->second == o) return o;
        EqOperand root = find(it->second);
        parent_[o] = root;
        return root;
    }
    void unite(const EqOperand& a, const EqOperand& b)
    {
        EqOperand ra = find(a), rb = find(b);
        if (!(ra == rb)) parent_[ra] = rb;
    }

private:
    std::map<EqOperand, EqOperand> parent_;
};

} // namespace detail

// Satisfiability over the infinite atom carrier: union equality literals,
// then check that no disequality joins a class and no two distinct explicit
// atoms share a class.
inline bool sat(const EqConstraint& c)
{
    detail::OperandUnion uf;
    for (const EqLiteral& l : c.literals)
        if (l.equal) uf.unite(l.lhs, l.rhs);

    std::map<EqOperand, Atom> atom_of_class;
    auto touch = [&](const EqOperand& o) -> bool {
        if (o.is_var) return true;
        EqOperand root = uf.find(o);
        auto it = atom_of_class.find(root);
        if (it != atom_of_class.end()) return it->second == o.atom;
        atom_of_class.emplace(root, o.atom);
        return true;
    };
    for (const EqLiteral& l : c.literals) {
        if (!touch(l.lhs) || !touch(l.rhs)) return false;
        if (!l.equal && uf.find(l.lhs) == uf.find(l.rhs)) return false;
    }
    return true;
}

// Evaluates a fully valuated constraint.  Returns the first violated literal
// when not satisfied.
inline std::optional<EqLiteral> violated_literal(const EqConstraint& c,
                                                 const std::map<std::string, Atom>& val)
{
    auto value = [&](const EqOperand& o) -> std::optional<Atom> {
        if (!o.is_var) return o.atom;
        auto it = val.find(o.var);
        if (it == val.end()) return std::nullopt;
        return it->second;
    };
    for (const EqLiteral& l : c.literals) {
        auto a = value(l.lhs), b = value(l.rhs);
        if (!a || !b) return l; // unvaluated variable counts as violation
        if ((*a == *b) != l.equal) return l;
    }
    return std::nullopt;
}

inline bool satisfied(const EqConstraint& c, const std::map<std::string, Atom>& val)
{
    return !violated_literal(c, val).has_value();
}

// ---------------------------------------------------------------------------
// Orbit descriptors and orbit sets

struct OrbitDescriptor {
    Term pattern;
    EqConstraint constraint;

    friend bool operator==(const OrbitDescriptor&, const OrbitDescriptor&) = default;

    std::vector<std::string> vars() const { return pattern_vars(pattern); }

    std::set<Atom> explicit_atoms() const
    {
        std::set<Atom> out = support_of(pattern);
        for (Atom a : constraint.atoms()) out.insert(a);
        return out;
    }

    // `orbit <pattern>` or `orbit <pattern> where <lit>, <lit>`
    std::string str() const
    {
        std::string out = "orbit " + pattern.str();
        if (!constraint.empty()) out += " where " + constraint.str();
        return out;
    }

    // Constraint variables must all occur in the pattern; otherwise the
    // descriptor's semantics would need quantification.
    void check_valid() const
    {
        auto pv = vars();
        for (const std::string& v : constraint.vars())
            if (std::find(pv.begin(), pv.end(), v) == pv.end())
                throw DescriptorError("constraint variable '" + v + "' not in pattern");
    }
};

struct OrbitSet {
    std::set<Atom> support;
    std::vector<OrbitDescriptor> descriptors;

    friend bool operator==(const OrbitSet&, const OrbitSet&) = default;
};

// ---------------------------------------------------------------------------
// Matching and instantiation

// Matches a pattern against a ground term, extending `val`.  Variables bind
// atoms only.
inline bool match_pattern(const Term& pattern, const Term& t, std::map<std::string, Atom>& val)
{
    switch (pattern.kind()) {
    case Term::Kind::Constant: return t.is_constant() && t.symbol() == pattern.symbol();
    case Term::Kind::Atom: return t.is_atom() && t.atom_value() == pattern.atom_value();
    case Term::Kind::Var: {
        if (!t.is_atom()) return false;
        auto it = val.find(pattern.var_name());
        if (it != val.end()) return it->second == t.atom_value();
        val.emplace(pattern.var_name(), t.atom_value());
        return true;
    }
    case Term::Kind::Tuple: {
        if (!t.is_tuple() || t.items().size() != pattern.items().size()) return false;
        for (std::size_t i = 0; i < pattern.items().size(); ++i)
            if (!match_pattern(pattern.items()[i], t.items()[i], val)) return false;
        return true;
    }
    }
    return false;
}

inline Term substitute(const Term& pattern, const std::map<std::string, Atom>& val)
{
    switch (pattern.kind()) {
    case Term::Kind::Var: {
        auto it = val.find(pattern.var_name());
        if (it == val.end())
            throw DescriptorError("variable '" + pattern.var_name() + "' has no value");
        return Term::atom(it->second);
    }
    case Term::Kind::Tuple: {
        std::vector<Term> items;
        items.reserve(pattern.items().size());
        for (const Term& s : pattern.items()) items.push_back(substitute(s, val));
        return Term::tuple(std::move(items));
    }
    default: return pattern;
    }
}

inline Term instantiate(const OrbitDescriptor& d, const std::map<std::string, Atom>& val)
{
    for (const std::string& v : d.vars())
        if (!val.count(v)) throw DescriptorError("missing value for variable '" + v + "'");
    if (auto bad = violated_literal(d.constraint, val))
        throw DescriptorError("valuation violates literal '" + bad->str() + "'");
    return substitute(d.pattern, val);
}

inline bool member(const Term& t, const OrbitSet& s)
{
    for (const OrbitDescriptor& d : s.descriptors) {
        std::map<std::string, Atom> val;
        if (match_pattern(d.pattern, t, val) && satisfied(d.constraint, val)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Descriptor text syntax

namespace detail {

inline void skip_spaces(std::string_view s, std::size_t& i)
{
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline EqOperand parse_operand(std::string_view s, std::size_t& i)
{
    skip_spaces(s, i);
    if (i >= s.size()) throw ParseError("expected constraint operand");
    if (s[i] == '#') {
        ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
        if (i == start) throw ParseError("expected atom index after '#'");
        return EqOperand::atomic(
            Atom{static_cast<std::uint32_t>(std::stoul(std::string(s.substr(start, i - start))))});
    }
    if (s[i] >= 'a' && s[i] <= 'z') {
        std::size_t start = i;
        while (i < s.size() && is_symbol_char(s[i])) ++i;
        return EqOperand::variable(std::string(s.substr(start, i - start)));
    }
    throw ParseError("bad constraint operand");
}

inline EqConstraint parse_constraint(std::string_view s)
{
    EqConstraint c;
    std::size_t i = 0;
    for (;;) {
        EqLiteral lit;
        lit.lhs = parse_operand(s, i);
        skip_spaces(s, i);
        if (i < s.size() && s[i] == '=') {
            lit.equal = true;
            ++i;
        } else if (i + 1 < s.size() && s[i] == '!' && s[i + 1] == '=') {
            lit.equal = false;
            i += 2;
        } else {
            throw ParseError("expected '=' or '!=' in constraint");
        }
        lit.rhs = parse_operand(s, i);
        c.literals.push_back(std::move(lit));
        skip_spaces(s, i);
        if (i >= s.size()) break;
        if (s[i] != ',') throw ParseError("expected ',' between constraint literals");
        ++i;
    }
    return c;
}

} // namespace detail

inline EqConstraint parse_constraint_text(std::string_view text)
{
    return detail::parse_constraint(text);
}

inline OrbitDescriptor parse_descriptor(std::string_view line, const TermLimits& limits = {})
{
    std::string_view rest = line;
    if (rest.substr(0, 6) != "orbit ") throw ParseError("descriptor must start with 'orbit '");
    rest.remove_prefix(6);
    std::size_t where_pos = rest.find(" where ");
    OrbitDescriptor d;
    if (where_pos == std::string_view::npos) {
        d.pattern = Term::parse(rest, limits);
    } else {
        d.pattern = Term::parse(rest.substr(0, where_pos), limits);
        d.constraint = detail::parse_constraint(rest.substr(where_pos + 7));
    }
    d.check_valid();
    return d;
}

// ---------------------------------------------------------------------------
// Set builder codes
//
// A code is the natural number whose base-256 digits spell the canonical
// serialization of a descriptor list (one descriptor per line).  Arithmetic
// is never needed; only injectivity, round-trip and computable projections.

struct SetBuilderCode {
    std::string bytes;

    friend bool operator==(const SetBuilderCode&, const SetBuilderCode&) = default;
    friend bool operator<(const SetBuilderCode& a, const SetBuilderCode& b)
    {
        return a.bytes < b.bytes;
    }
};

inline SetBuilderCode encode(const std::vector<OrbitDescriptor>& ds)
{
    std::string out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (i) out += '\n';
        out += ds[i].str();
    }
    return SetBuilderCode{std::move(out)};
}

inline std::vector<OrbitDescriptor> decode(const SetBuilderCode& c,
                                           const TermLimits& limits = {})
{
    std::vector<OrbitDescriptor> ds;
    std::size_t pos = 0;
    const std::string& text = c.bytes;
    if (text.empty()) throw DescriptorError("decode: empty code");
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (nl == std::string::npos ? text.size() : nl) - pos);
        try {
            ds.push_back(parse_descriptor(line, limits));
        } catch (const ParseError& e) {
            throw DescriptorError(std::string("decode: not an image code: ") + e.what());
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    if (encode(ds).bytes != text)
        throw DescriptorError("decode: not an image code (non-canonical form)");
    return ds;
}

// Projection to one component of a tuple-patterned descriptor: keeps the
// component pattern plus the constraint literals that mention only its
// variables.  Variable names are preserved, so shared variables stay shared
// across projections of the same code.
inline OrbitDescriptor project_component(const OrbitDescriptor& d, std::size_t idx)
{
    if (!d.pattern.is_tuple() || idx >= d.pattern.items().size())
        throw DescriptorError("project_component: pattern is not a tuple with that arity");
    OrbitDescriptor out;
    out.pattern = d.pattern.items()[idx];
    auto vars = pattern_vars(out.pattern);
    auto known = [&](const EqOperand& o) {
        return !o.is_var || std::find(vars.begin(), vars.end(), o.var) != vars.end();
    };
    for (const EqLiteral& l : d.constraint.literals)
        if (known(l.lhs) && known(l.rhs)) out.constraint.literals.push_back(l);
    return out;
}

inline SetBuilderCode project_component(const SetBuilderCode& c, std::size_t idx,
                                        const TermLimits& limits = {})
{
    auto ds = decode(c, limits);
    if (ds.size() != 1) throw DescriptorError("project_component: expected a single descriptor");
    return encode({project_component(ds[0], idx)});
}

// ---------------------------------------------------------------------------
// Canonical enumeration
//
// Enumerates the equality types of a descriptor's variables: a partition of
// the variables (restricted growth strings, lexicographically) with each
// class assigned either a support atom or a fresh atom.  Every orbit of the
// denoted set over support-fixing automorphisms yields exactly one canonical
// representative.

namespace detail {

// Calls fn(valuation) for every canonical valuation of `vars` built from
// `known` atoms plus canonically fresh atoms; a class assignment passing the
// constraint produces one valuation.
inline void for_each_canonical_valuation(const std::vector<std::string>& vars,
                                         const std::set<Atom>& known, const EqConstraint& constraint,
                                         const std::map<std::string, Atom>& fixed,
                                         const std::function<void(const std::map<std::string, Atom>&)>& fn)
{
    const std::size_t n = vars.size();
    if (n == 0) {
        if (satisfied(constraint, fixed)) fn(fixed);
        return;
    }
    if (n > 12) throw DescriptorError("too many variables for canonical enumeration");

    std::vector<Atom> known_sorted(known.begin(), known.end());
    std::vector<std::size_t> rgs(n, 0);

    auto enumerate_assignments = [&](std::size_t num_classes) {
        // options per class: 0..known-1 are support atoms, `known` means fresh
        const std::size_t options = known_sorted.size() + 1;
        std::vector<std::size_t> choice(num_classes, 0);
        for (;;) {
            // distinct known atoms per class; fresh classes each draw their
            // own fresh atom, so repetition of the fresh option is fine
            bool ok = true;
            std::set<std::size_t> used;
            for (std::size_t c = 0; c < num_classes && ok; ++c)
                if (choice[c] < known_sorted.size() && !used.insert(choice[c]).second) ok = false;
            if (ok) {
                std::map<std::string, Atom> val = fixed;
                std::set<Atom> avoid = known;
                for (auto& [_, a] : fixed) avoid.insert(a);
                std::vector<Atom> class_atom(num_classes, Atom{0});
                for (std::size_t c = 0; c < num_classes; ++c) {
                    if (choice[c] < known_sorted.size()) {
                        class_atom[c] = known_sorted[choice[c]];
                    } else {
                        Atom f = fresh_atom(avoid);
                        avoid.insert(f);
                        class_atom[c] = f;
                    }
                }
                for (std::size_t i = 0; i < n; ++i) val[vars[i]] = class_atom[rgs[i]];
                if (satisfied(constraint, val)) fn(val);
            }
            std::size_t k = 0;
            while (k < num_classes) {
                if (++choice[k] < options) break;
                choice[k] = 0;
                ++k;
            }
            if (k == num_classes) break;
        }
    };

    // enumerate restricted growth strings
    for (;;) {
        std::size_t num_classes = 0;
        for (std::size_t v : rgs) num_classes = std::max(num_classes, v + 1);
        enumerate_assignments(num_classes);

        // next RGS
        std::size_t i = n;
        bool advanced = false;
        while (i > 1) {
            --i;
            std::size_t maxv = 0;
            for (std::size_t j = 0; j < i; ++j) maxv = std::max(maxv, rgs[j]);
            if (rgs[i] <= maxv) {
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                advanced = true;
                break;
            }
            rgs[i] = 0;
        }
        if (!advanced) break;
    }
}

} // namespace detail

inline std::vector<Term> canonical_enumerate(const OrbitSet& s)
{
    std::vector<Term> out;
    std::set<std::string> seen;
    for (const OrbitDescriptor& d : s.descriptors) {
        d.check_valid();
        detail::for_each_canonical_valuation(
            d.vars(), s.support, d.constraint, {}, [&](const std::map<std::string, Atom>& val) {
                Term t = substitute(d.pattern, val);
                Term key = canonicalize(t, s.support).first;
                if (seen.insert(key.str()).second) out.push_back(key);
            });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Support violation certificates

struct SupportViolation {
    Permutation perm; // K-fixing transposition
    Term witness;     // sample element moved out of the set
    Term image;       // apply(perm, witness), rejected by the oracle
};

// Bounded search for a K-fixing transposition that maps a sample element out
// of the set.  Absent means "no violation found within the budget", not
// "K-supported".
inline std::optional<SupportViolation>
support_violation(const std::vector<Term>& sample, const std::function<bool(const Term&)>& membership,
                  const std::set<Atom>& k, std::size_t atom_budget = 8)
{
    std::set<Atom> pool;
    for (const Term& t : sample)
        for (Atom a : support_of(t)) pool.insert(a);
    std::set<Atom> avoid = pool;
    for (Atom a : k) avoid.insert(a);
    std::vector<Atom> candidates(pool.begin(), pool.end());
    for (std::size_t i = 0; i < atom_budget; ++i) {
        Atom f = fresh_atom(avoid);
        avoid.insert(f);
        candidates.push_back(f);
    }

    for (const Term& t : sample) {
        for (Atom a : support_of(t)) {
            if (k.count(a)) continue;
            for (Atom b : candidates) {
                if (b == a || k.count(b)) continue;
                Permutation p = Permutation::transposition(a, b);
                Term image = apply(p, t);
                if (!membership(image)) return SupportViolation{p, t, image};
            }
        }
    }
    return std::nullopt;
}

} // namespace atomata
