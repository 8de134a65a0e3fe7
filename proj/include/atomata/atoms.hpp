#pragma once

// Atoms, finitely supported permutations, and the term language shared by
// every machine model in this library: constants drawn from a declared
// alphabet, atoms with pure equality, and bounded tuples.  Patterns are the
// same terms with variables allowed at atom positions.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atomata {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Atom

struct Atom {
    std::uint32_t index = 0;

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

inline std::string to_string(Atom a) { return "#" + std::to_string(a.index); }

// Least-index atom outside `avoid`.
inline Atom fresh_atom(const std::set<Atom>& avoid)
{
    std::uint32_t i = 0;
    for (Atom a : avoid) {
        if (a.index > i) break;
        if (a.index == i) ++i;
    }
    return Atom{i};
}

// ---------------------------------------------------------------------------
// Term

struct TermLimits {
    std::size_t max_depth = 3;  // tuples nested at most this deep
    std::size_t max_arity = 16; // entries per tuple
};

class Term {
public:
    enum class Kind : std::uint8_t { Constant, Atom, Var, Tuple };

    Term() : kind_(Kind::Constant), sym_("_") {}

    static Term constant(std::string symbol)
    {
        Term t;
        t.kind_ = Kind::Constant;
        t.sym_ = std::move(symbol);
        return t;
    }
    static Term atom(Atom a)
    {
        Term t;
        t.kind_ = Kind::Atom;
        t.atom_ = a;
        return t;
    }
    static Term var(std::string name)
    {
        Term t;
        t.kind_ = Kind::Var;
        t.sym_ = std::move(name);
        return t;
    }
    static Term tuple(std::vector<Term> items)
    {
        Term t;
        t.kind_ = Kind::Tuple;
        t.items_ = std::move(items);
        return t;
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    bool is_atom() const { return kind_ == Kind::Atom; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_tuple() const { return kind_ == Kind::Tuple; }

    const std::string& symbol() const { return sym_; }
    Atom atom_value() const { return atom_; }
    const std::string& var_name() const { return sym_; }
    const std::vector<Term>& items() const { return items_; }

    bool ground() const
    {
        switch (kind_) {
        case Kind::Var: return false;
        case Kind::Tuple:
            for (const Term& t : items_)
                if (!t.ground()) return false;
            return true;
        default: return true;
        }
    }

    std::size_t depth() const
    {
        if (kind_ != Kind::Tuple) return 0;
        std::size_t d = 0;
        for (const Term& t : items_) d = std::max(d, t.depth());
        return d + 1;
    }

    friend bool operator==(const Term& a, const Term& b)
    {
        if (a.kind_ != b.kind_) return false;
        switch (a.kind_) {
        case Kind::Constant:
        case Kind::Var: return a.sym_ == b.sym_;
        case Kind::Atom: return a.atom_ == b.atom_;
        case Kind::Tuple: return a.items_ == b.items_;
        }
        return false;
    }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

    friend bool operator<(const Term& a, const Term& b)
    {
        if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
        switch (a.kind_) {
        case Kind::Constant:
        case Kind::Var: return a.sym_ < b.sym_;
        case Kind::Atom: return a.atom_ < b.atom_;
        case Kind::Tuple: return a.items_ < b.items_;
        }
        return false;
    }

    // Canonical serialization: '#<n>' atoms, "'sym" constants, bare
    // variables, "(t1,...,tn)" tuples.  parse(str(t)) == t, byte for byte.
    std::string str() const
    {
        std::string out;
        print(out);
        return out;
    }

    static Term parse(std::string_view text);
    static Term parse(std::string_view text, const TermLimits& limits);

private:
    void print(std::string& out) const
    {
        switch (kind_) {
        case Kind::Constant:
            out += '\'';
            out += sym_;
            break;
        case Kind::Atom:
            out += to_string(atom_);
            break;
        case Kind::Var:
            out += sym_;
            break;
        case Kind::Tuple:
            out += '(';
            for (std::size_t i = 0; i < items_.size(); ++i) {
                if (i) out += ',';
                items_[i].print(out);
            }
            out += ')';
            break;
        }
    }

    Kind kind_;
    std::string sym_;
    Atom atom_{0};
    std::vector<Term> items_;
};

inline const Term& tau_term()
{
    static const Term t = Term::constant("tau");
    return t;
}
inline const Term& blank_term()
{
    static const Term t = Term::constant("_");
    return t;
}

inline bool is_symbol_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

namespace detail {

class TermParser {
public:
    TermParser(std::string_view text, const TermLimits& limits) : text_(text), limits_(limits) {}

    Term parse_all()
    {
        Term t = parse_term(0);
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input after term");
        return t;
    }

    Term parse_term(std::size_t depth)
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '\'') {
            ++pos_;
            std::string sym = read_symbol();
            if (sym.empty()) fail("empty constant symbol");
            return Term::constant(std::move(sym));
        }
        if (c == '#') {
            ++pos_;
            return Term::atom(Atom{read_number()});
        }
        if (c == '(') {
            if (depth >= limits_.max_depth)
                fail("tuple nesting exceeds depth limit " + std::to_string(limits_.max_depth));
            ++pos_;
            std::vector<Term> items;
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ')') {
                ++pos_;
                return Term::tuple({});
            }
            for (;;) {
                items.push_back(parse_term(depth + 1));
                if (items.size() > limits_.max_arity)
                    fail("tuple arity exceeds limit " + std::to_string(limits_.max_arity));
                skip_ws();
                if (pos_ >= text_.size()) fail("unterminated tuple");
                if (text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (text_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ')' in tuple");
            }
            return Term::tuple(std::move(items));
        }
        if (c >= 'a' && c <= 'z') {
            std::string name = read_symbol();
            return Term::var(std::move(name));
        }
        fail(std::string("unexpected character '") + c + "' in term");
        return Term();
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    std::string read_symbol()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_symbol_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    std::uint32_t read_number()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ == start) fail("expected atom index after '#'");
        unsigned long v = std::stoul(std::string(text_.substr(start, pos_ - start)));
        return static_cast<std::uint32_t>(v);
    }
    [[noreturn]] void fail(const std::string& msg)
    {
        throw ParseError(msg + " at offset " + std::to_string(pos_));
    }

    std::string_view text_;
    TermLimits limits_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Term Term::parse(std::string_view text, const TermLimits& limits)
{
    return detail::TermParser(text, limits).parse_all();
}

inline Term Term::parse(std::string_view text) { return parse(text, TermLimits{}); }

// Atoms occurring in `t`, in first-occurrence order.
inline void collect_atoms(const Term& t, std::vector<Atom>& out)
{
    switch (t.kind()) {
    case Term::Kind::Atom:
        if (std::find(out.begin(), out.end(), t.atom_value()) == out.end())
            out.push_back(t.atom_value());
        break;
    case Term::Kind::Tuple:
        for (const Term& s : t.items()) collect_atoms(s, out);
        break;
    default: break;
    }
}

// Least support of a single term: exactly the atoms occurring in it.
inline std::set<Atom> support_of(const Term& t)
{
    std::vector<Atom> v;
    collect_atoms(t, v);
    return std::set<Atom>(v.begin(), v.end());
}

inline void collect_vars(const Term& t, std::vector<std::string>& out)
{
    switch (t.kind()) {
    case Term::Kind::Var:
        if (std::find(out.begin(), out.end(), t.var_name()) == out.end())
            out.push_back(t.var_name());
        break;
    case Term::Kind::Tuple:
        for (const Term& s : t.items()) collect_vars(s, out);
        break;
    default: break;
    }
}

inline std::vector<std::string> pattern_vars(const Term& t)
{
    std::vector<std::string> v;
    collect_vars(t, v);
    return v;
}

// ---------------------------------------------------------------------------
// Permutation: finitely supported bijection on atoms, identity elsewhere.

class Permutation {
public:
    Permutation() = default;

    static Permutation identity() { return Permutation(); }

    static Permutation transposition(Atom a, Atom b)
    {
        Permutation p;
        if (a != b) {
            p.fwd_[a] = b;
            p.fwd_[b] = a;
        }
        return p;
    }

    // Builds a permutation from source->target pairs, completing the partial
    // injection to a bijection with equal domain and range.  Rejects
    // non-injective input.
    static std::optional<Permutation> from_pairs(const std::vector<std::pair<Atom, Atom>>& pairs)
    {
        std::map<Atom, Atom> fwd;
        std::set<Atom> range;
        for (auto& [a, b] : pairs) {
            auto it = fwd.find(a);
            if (it != fwd.end()) {
                if (it->second != b) return std::nullopt;
                continue;
            }
            if (range.count(b)) return std::nullopt;
            fwd[a] = b;
            range.insert(b);
        }
        // close: atoms in range but not in domain must map onto atoms in
        // domain but not in range, in sorted order
        std::vector<Atom> need_dom, free_tgt;
        for (Atom b : range)
            if (!fwd.count(b)) need_dom.push_back(b);
        for (auto& [a, b] : fwd)
            if (!range.count(a)) free_tgt.push_back(a);
        if (need_dom.size() != free_tgt.size()) return std::nullopt;
        for (std::size_t i = 0; i < need_dom.size(); ++i) fwd[need_dom[i]] = free_tgt[i];
        Permutation p;
        for (auto& [a, b] : fwd)
            if (a != b) p.fwd_[a] = b;
        return p;
    }

    Atom operator()(Atom a) const
    {
        auto it = fwd_.find(a);
        return it == fwd_.end() ? a : it->second;
    }

    Permutation inverse() const
    {
        Permutation p;
        for (auto& [a, b] : fwd_) p.fwd_[b] = a;
        return p;
    }

    // this, then other
    Permutation then(const Permutation& other) const
    {
        Permutation p;
        std::set<Atom> dom;
        for (auto& [a, _] : fwd_) dom.insert(a);
        for (auto& [a, _] : other.fwd_) dom.insert(a);
        for (Atom a : dom) {
            Atom b = other((*this)(a));
            if (b != a) p.fwd_[a] = b;
        }
        return p;
    }

    bool is_identity() const { return fwd_.empty(); }

    std::vector<Atom> moved() const
    {
        std::vector<Atom> v;
        for (auto& [a, _] : fwd_) v.push_back(a);
        return v;
    }

    bool fixes(const std::set<Atom>& atoms) const
    {
        for (Atom a : atoms)
            if ((*this)(a) != a) return false;
        return true;
    }

    std::string str() const
    {
        std::string out = "{";
        bool first = true;
        for (auto& [a, b] : fwd_) {
            if (!first) out += ", ";
            first = false;
            out += to_string(a) + "->" + to_string(b);
        }
        out += "}";
        return out;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::map<Atom, Atom> fwd_; // no identity entries
};

inline Term apply(const Permutation& p, const Term& t)
{
    switch (t.kind()) {
    case Term::Kind::Atom: return Term::atom(p(t.atom_value()));
    case Term::Kind::Tuple: {
        std::vector<Term> items;
        items.reserve(t.items().size());
        for (const Term& s : t.items()) items.push_back(apply(p, s));
        return Term::tuple(std::move(items));
    }
    default: return t;
    }
}

// ---------------------------------------------------------------------------
// Canonical forms

// Renames non-protected atoms, in first-occurrence order, to the least atoms
// outside `protected_atoms`.  Returns the canonical term together with a
// permutation p satisfying apply(p, t) == canonical term.
inline std::pair<Term, Permutation> canonicalize(const Term& t, const std::set<Atom>& protected_atoms)
{
    std::vector<Atom> occ;
    collect_atoms(t, occ);
    std::vector<std::pair<Atom, Atom>> pairs;
    std::set<Atom> used = protected_atoms;
    for (Atom a : occ) {
        if (protected_atoms.count(a)) continue;
        Atom target = fresh_atom(used);
        used.insert(target);
        pairs.emplace_back(a, target);
    }
    auto p = Permutation::from_pairs(pairs);
    // targets are disjoint from protected atoms and sources are distinct, so
    // the completion always exists
    return {apply(*p, t), *p};
}

// A protected-fixing permutation p with apply(p, t1) == t2, when one exists.
inline std::optional<Permutation> orbit_eq(const Term& t1, const Term& t2,
                                           const std::set<Atom>& protected_atoms)
{
    std::vector<std::pair<Atom, Atom>> pairs;
    std::map<Atom, Atom> fwd, bwd;

    // structural walk accumulating an injective atom correspondence
    std::vector<std::pair<const Term*, const Term*>> stack{{&t1, &t2}};
    while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        if (a->kind() != b->kind()) return std::nullopt;
        switch (a->kind()) {
        case Term::Kind::Constant:
        case Term::Kind::Var:
            if (a->symbol() != b->symbol()) return std::nullopt;
            break;
        case Term::Kind::Atom: {
            Atom x = a->atom_value(), y = b->atom_value();
            if (protected_atoms.count(x) || protected_atoms.count(y)) {
                if (x != y) return std::nullopt;
            }
            auto it = fwd.find(x);
            if (it != fwd.end()) {
                if (it->second != y) return std::nullopt;
            } else {
                if (bwd.count(y)) return std::nullopt;
                fwd[x] = y;
                bwd[y] = x;
                pairs.emplace_back(x, y);
            }
            break;
        }
        case Term::Kind::Tuple:
            if (a->items().size() != b->items().size()) return std::nullopt;
            for (std::size_t i = 0; i < a->items().size(); ++i)
                stack.push_back({&a->items()[i], &b->items()[i]});
            break;
        }
    }
    auto p = Permutation::from_pairs(pairs);
    if (!p) return std::nullopt;
    if (!p->fixes(protected_atoms)) return std::nullopt;
    return p;
}

inline std::string atoms_str(const std::set<Atom>& s)
{
    std::string out = "{";
    bool first = true;
    for (Atom a : s) {
        if (!first) out += ",";
        first = false;
        out += to_string(a);
    }
    return out + "}";
}

} // namespace atomata
