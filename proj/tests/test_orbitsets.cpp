#include <catch2/catch_amalgamated.hpp>

#include <atomata/orbitsets.hpp>

#include <random>

using namespace atomata;

namespace {

Term T(const char* s) { return Term::parse(s); }
OrbitDescriptor D(const char* s) { return parse_descriptor(s); }

EqConstraint C(const char* s) { return parse_constraint_text(s); }

// Brute-force satisfiability over a finite carrier: a pure-equality
// constraint with n variables is satisfiable iff it has a model using at
// most n + #constants atoms, so a 6-atom carrier suffices for <=4 variables.
bool sat_brute(const EqConstraint& c, std::uint32_t carrier = 6)
{
    auto vars = c.vars();
    std::vector<std::uint32_t> choice(vars.size(), 0);
    for (;;) {
        std::map<std::string, Atom> val;
        for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = Atom{choice[i]};
        if (satisfied(c, val)) return true;
        std::size_t k = 0;
        while (k < choice.size()) {
            if (++choice[k] < carrier) break;
            choice[k] = 0;
            ++k;
        }
        if (k == choice.size()) return false;
        if (choice.empty()) return false;
    }
}

EqConstraint random_constraint(std::mt19937& rng)
{
    const char* vars[] = {"x", "y", "z", "w"};
    std::uniform_int_distribution<int> nlits(0, 5), opkind(0, 5), vi(0, 3), ai(0, 2), eq(0, 1);
    EqConstraint c;
    int n = nlits(rng);
    for (int i = 0; i < n; ++i) {
        auto operand = [&]() {
            if (opkind(rng) == 0) return EqOperand::atomic(Atom{static_cast<std::uint32_t>(ai(rng))});
            return EqOperand::variable(vars[vi(rng)]);
        };
        c.literals.push_back({operand(), operand(), eq(rng) == 1});
    }
    return c;
}

} // namespace

TEST_CASE("sat examples")
{
    CHECK(sat(C("x != y")));
    CHECK_FALSE(sat(C("x = y, x != y")));
    CHECK_FALSE(sat(C("x = #1, x != #1")));
    CHECK(sat(C("x = #1, y = #2")));
    CHECK_FALSE(sat(C("x = #1, x = #2")));
    CHECK(sat(EqConstraint{}));
}

TEST_CASE("sat agrees with brute force over a 6-atom carrier")
{
    std::mt19937 rng(101);
    for (int i = 0; i < 2000; ++i) {
        EqConstraint c = random_constraint(rng);
        CHECK(sat(c) == sat_brute(c));
    }
}

TEST_CASE("member examples")
{
    OrbitSet diag{{}, {D("orbit (x,x)")}};
    CHECK(member(T("(#3,#3)"), diag));
    CHECK_FALSE(member(T("(#3,#4)"), diag));

    OrbitSet tau{{}, {D("orbit 'tau")}};
    CHECK(member(T("'tau"), tau));
}

TEST_CASE("instantiate examples")
{
    OrbitDescriptor d = D("orbit (x,y) where x != y");
    CHECK(instantiate(d, {{"x", Atom{1}}, {"y", Atom{2}}}) == T("(#1,#2)"));
    CHECK_THROWS_WITH(instantiate(d, {{"x", Atom{1}}, {"y", Atom{1}}}),
                      Catch::Matchers::ContainsSubstring("x != y"));
    CHECK(instantiate(D("orbit x"), {{"x", Atom{9}}}) == T("#9"));
    CHECK_THROWS_WITH(instantiate(d, {{"x", Atom{1}}}),
                      Catch::Matchers::ContainsSubstring("'y'"));
}

TEST_CASE("descriptor validity")
{
    CHECK_THROWS_AS(parse_descriptor("orbit (x,y) where x != z"), DescriptorError);
    CHECK_NOTHROW(parse_descriptor("orbit (x,#1) where x != #1"));
}

TEST_CASE("encode and decode round trip")
{
    std::vector<OrbitDescriptor> ds{D("orbit (x,y) where x != y"), D("orbit 'tau"),
                                    D("orbit (x,x,#2)")};
    SetBuilderCode c = encode(ds);
    CHECK(decode(c) == ds);
    CHECK(encode(decode(c)) == c);

    std::vector<OrbitDescriptor> other{D("orbit (x,y)")};
    CHECK_FALSE(encode(other) == c);

    CHECK_THROWS_AS(decode(SetBuilderCode{"garbage"}), DescriptorError);
    CHECK_THROWS_AS(decode(SetBuilderCode{"orbit  (x,y)"}), DescriptorError); // non-canonical
}

TEST_CASE("triple projection is computable from the code")
{
    SetBuilderCode triple = encode({D("orbit ('s,(x,y),('t,x)) where x != y")});
    SetBuilderCode a = project_component(triple, 1);
    auto ds = decode(a);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].pattern == T("(x,y)"));
    CHECK(ds[0].constraint.str() == "x != y");

    SetBuilderCode t = project_component(triple, 2);
    CHECK(decode(t)[0].pattern == T("('t,x)"));
    CHECK(decode(t)[0].constraint.empty());
}

TEST_CASE("canonical_enumerate examples")
{
    OrbitSet pairs{{}, {D("orbit (x,y)")}};
    auto reps = canonical_enumerate(pairs);
    REQUIRE(reps.size() == 2);
    CHECK(reps[0] == T("(#0,#0)"));
    CHECK(reps[1] == T("(#0,#1)"));

    OrbitSet tau{{}, {D("orbit 'tau")}};
    auto treps = canonical_enumerate(tau);
    REQUIRE(treps.size() == 1);
    CHECK(treps[0] == T("'tau"));

    OrbitSet avoid0{{Atom{0}}, {D("orbit x where x != #0")}};
    auto areps = canonical_enumerate(avoid0);
    REQUIRE(areps.size() == 1);
    CHECK(areps[0] == T("#1"));
}

TEST_CASE("canonical_enumerate covers random instantiations")
{
    OrbitSet s{{Atom{0}},
               {D("orbit (x,y,#0) where x != y"), D("orbit ('q,x)"), D("orbit (x,x)")}};
    auto reps = canonical_enumerate(s);

    std::mt19937 rng(7);
    std::uniform_int_distribution<std::uint32_t> ai(0, 9);
    for (int i = 0; i < 400; ++i) {
        for (const OrbitDescriptor& d : s.descriptors) {
            std::map<std::string, Atom> val;
            for (auto& v : d.vars()) val[v] = Atom{ai(rng)};
            if (!satisfied(d.constraint, val)) continue;
            Term t = substitute(d.pattern, val);
            int hits = 0;
            for (const Term& rep : reps)
                if (orbit_eq(t, rep, s.support)) ++hits;
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("descriptor sets are closed under support-fixing permutations")
{
    OrbitSet s{{Atom{0}},
               {D("orbit (x,y,#0) where x != y"), D("orbit ('q,x) where x != #0")}};
    std::mt19937 rng(13);
    std::uniform_int_distribution<std::uint32_t> ai(1, 11);
    for (int i = 0; i < 500; ++i) {
        for (const OrbitDescriptor& d : s.descriptors) {
            std::map<std::string, Atom> val;
            for (auto& v : d.vars()) val[v] = Atom{ai(rng)};
            if (!satisfied(d.constraint, val)) continue;
            Term t = substitute(d.pattern, val);
            REQUIRE(member(t, s));
            Permutation p = Permutation::transposition(Atom{ai(rng)}, Atom{ai(rng)});
            CHECK(member(apply(p, t), s) == member(t, s));
        }
    }
}

TEST_CASE("support_violation finds the even-family certificate")
{
    // enumerated stand-in for labels num(2n): triples ('up, #2n, 'down)
    auto is_even_triple = [](const Term& t) {
        if (!t.is_tuple() || t.items().size() != 3) return false;
        if (t.items()[0] != Term::constant("up") || t.items()[2] != Term::constant("down"))
            return false;
        return t.items()[1].is_atom() && t.items()[1].atom_value().index % 2 == 0;
    };
    std::vector<Term> sample{T("('up,#2,'down)"), T("('up,#4,'down)"), T("('up,#6,'down)")};
    auto cert = support_violation(sample, is_even_triple, {});
    REQUIRE(cert.has_value());
    CHECK_FALSE(is_even_triple(cert->image));
    CHECK(apply(cert->perm, cert->witness) == cert->image);
}

TEST_CASE("support_violation finds the odd-chain certificate for any small K")
{
    auto in_chain = [](const Term& t) {
        // (('s,#n), #n, ('s,#n+2)) for odd n
        if (!t.is_tuple() || t.items().size() != 3) return false;
        const Term& s1 = t.items()[0];
        const Term& lab = t.items()[1];
        const Term& s2 = t.items()[2];
        if (!s1.is_tuple() || s1.items().size() != 2 || !s2.is_tuple() || s2.items().size() != 2)
            return false;
        if (s1.items()[0] != Term::constant("s") || s2.items()[0] != Term::constant("s"))
            return false;
        if (!s1.items()[1].is_atom() || !lab.is_atom() || !s2.items()[1].is_atom()) return false;
        auto n = s1.items()[1].atom_value().index;
        return n % 2 == 1 && lab.atom_value().index == n && s2.items()[1].atom_value().index == n + 2;
    };
    std::vector<Term> sample{T("(('s,#1),#1,('s,#3))"), T("(('s,#3),#3,('s,#5))"),
                             T("(('s,#5),#5,('s,#7))"), T("(('s,#7),#7,('s,#9))"),
                             T("(('s,#9),#9,('s,#11))"), T("(('s,#11),#11,('s,#13))")};
    std::vector<std::set<Atom>> ks{{},
                                   {Atom{1}},
                                   {Atom{1}, Atom{3}},
                                   {Atom{1}, Atom{3}, Atom{5}},
                                   {Atom{1}, Atom{3}, Atom{5}, Atom{7}},
                                   {Atom{1}, Atom{3}, Atom{5}, Atom{7}, Atom{9}}};
    for (const auto& k : ks) {
        auto cert = support_violation(sample, in_chain, k);
        REQUIRE(cert.has_value());
        CHECK(cert->perm.fixes(k));
        CHECK_FALSE(in_chain(cert->image));
    }
}

TEST_CASE("support_violation is absent on the equivariant diagonal")
{
    auto diag = [](const Term& t) {
        return t.is_tuple() && t.items().size() == 2 && t.items()[0].is_atom() &&
               t.items()[0] == t.items()[1];
    };
    std::vector<Term> sample{T("(#0,#0)"), T("(#5,#5)")};
    CHECK_FALSE(support_violation(sample, diag, {}).has_value());
    CHECK_FALSE(support_violation(sample, diag, {}, 32).has_value());
}
