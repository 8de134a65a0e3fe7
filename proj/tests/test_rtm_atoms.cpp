#include <catch2/catch_amalgamated.hpp>

#include <atomata/bisim.hpp>
#include <atomata/rtm_atoms.hpp>

#include <deque>
#include <random>

using namespace atomata;

namespace {

Term T(const char* s) { return Term::parse(s); }

Configuration config_with_tape(Term state, std::vector<Term> cells, std::size_t head)
{
    Configuration c;
    c.state = std::move(state);
    c.tape.cells = std::move(cells);
    c.tape.head = head;
    return c;
}

// Plain BFS over raw canonical stepping (no quotienting), for gadget replays
// that must preserve the literal atoms of the start configuration.
struct Replay {
    std::vector<Configuration> terminals;
    std::vector<std::pair<Term, Configuration>> labelled; // non-tau edges
    std::size_t explored = 0;
};

Replay replay(const RtmA& m, const Configuration& start, std::size_t max_states = 2000)
{
    Replay r;
    std::deque<Configuration> frontier{start};
    std::set<std::string> seen{start.str()};
    while (!frontier.empty() && r.explored < max_states) {
        Configuration c = frontier.front();
        frontier.pop_front();
        ++r.explored;
        auto succ = step_canonical(m, c);
        if (succ.empty()) r.terminals.push_back(c);
        for (auto& [a, nc] : succ) {
            if (!(a == tau_term())) r.labelled.emplace_back(a, nc);
            if (seen.insert(nc.str()).second) frontier.push_back(nc);
        }
    }
    return r;
}

} // namespace

TEST_CASE("validate_rtma accepts the gadgets and rejects support escapes")
{
    CHECK(validate_rtma(emit_gadget(GadgetKind::Copy)).ok);
    CHECK(validate_rtma(emit_gadget(GadgetKind::Fresh)).ok);

    RtmA bad = emit_gadget(GadgetKind::Copy);
    bad.schemas.push_back({T("'copy"), T("#7"), tau_term(), T("#7"), Move::Right, T("'copy"), {}});
    auto v = validate_rtma(bad);
    CHECK_FALSE(v.ok);
    REQUIRE_FALSE(v.problems.empty());
    CHECK(v.problems[0].find("#7") != std::string::npos);

    // arity cap enforced at parse
    std::string wide = "initial: 'q\nschema: 'q (a,b,c,d,e,f,g,h,i,j,k,l,m,n,o,p,q2) 'tau '_ R 'q\n";
    CHECK_THROWS_AS(parse_rtma(wide), ParseError);
}

TEST_CASE("step_canonical on the copy gadget registers the head atom")
{
    RtmA copy = emit_gadget(GadgetKind::Copy);
    Configuration c = config_with_tape(T("'copy"), {T("#1"), T("#2"), T("'_")}, 0);
    auto succ = step_canonical(copy, c);
    REQUIRE(succ.size() == 1);
    CHECK(succ[0].first == tau_term());
    CHECK(succ[0].second.state == T("('copying,#1)"));
    CHECK(succ[0].second.tape.head == 1);
}

TEST_CASE("step_canonical with no matching schema")
{
    RtmA copy = emit_gadget(GadgetKind::Copy);
    CHECK(step_canonical(copy, config_with_tape(T("'nowhere"), {T("#1")}, 0)).empty());
}

TEST_CASE("fresh entry guesses every known atom plus one canonical fresh atom")
{
    RtmA fresh = emit_gadget(GadgetKind::Fresh);
    Configuration c = config_with_tape(T("'fresh"), {T("#0"), T("#1"), T("'_")}, 2);
    auto succ = step_canonical(fresh, c);
    REQUIRE(succ.size() == 3); // guesses #0, #1, and fresh #2
    std::set<std::string> guesses;
    for (auto& [a, nc] : succ) {
        CHECK(a == tau_term());
        guesses.insert(nc.state.str());
    }
    CHECK(guesses == std::set<std::string>{"('check,#0)", "('check,#1)", "('check,#2)"});
}

TEST_CASE("copy gadget appends the designated atom")
{
    RtmA copy = emit_gadget(GadgetKind::Copy);
    Configuration start = config_with_tape(T("'copy"), {T("#1"), T("#2"), T("'_")}, 0);
    auto r = replay(copy, start);
    REQUIRE(r.terminals.size() == 1);
    CHECK(r.terminals[0].state == T("'finish"));
    REQUIRE(r.terminals[0].tape.cells.size() >= 3);
    CHECK(r.terminals[0].tape.cells[0] == T("#1"));
    CHECK(r.terminals[0].tape.cells[1] == T("#2"));
    CHECK(r.terminals[0].tape.cells[2] == T("#1"));
    CHECK(r.labelled.empty());
}

TEST_CASE("fresh gadget terminals form a single orbit with one new atom")
{
    RtmA fresh = emit_gadget(GadgetKind::Fresh);
    Configuration start = config_with_tape(T("'fresh"), {T("#0"), T("#1"), T("'_")}, 2);
    auto r = replay(fresh, start);
    REQUIRE_FALSE(r.terminals.empty());
    for (const Configuration& t : r.terminals) {
        CHECK(t.state == T("'finish"));
        REQUIRE(t.tape.cells.size() == 3);
        CHECK(t.tape.cells[0] == T("#0"));
        CHECK(t.tape.cells[1] == T("#1"));
        // the appended atom is outside the initial tape
        CHECK(t.tape.cells[2].is_atom());
        CHECK(t.tape.cells[2] != T("#0"));
        CHECK(t.tape.cells[2] != T("#1"));
        // single orbit: orbit-equal to the canonical representative
        Term rep = Term::tuple({T("#0"), T("#1"), T("#2")});
        Term got = Term::tuple({t.tape.cells[0], t.tape.cells[1], t.tape.cells[2]});
        CHECK(orbit_eq(got, rep, {}).has_value());
    }
    CHECK(r.labelled.empty());
}

TEST_CASE("produce_label fires exactly one labelled transition")
{
    OrbitSet labels{{}, {parse_descriptor("orbit (x,y) where x != y")}};
    RtmA prog = emit_gadget_produce_label(labels);
    CHECK(validate_rtma(prog).ok);

    Configuration start = config_with_tape(T("'e0"), {T("#3"), T("#4")}, 0);
    auto r = replay(prog, start);
    REQUIRE(r.labelled.size() == 1);
    CHECK(r.labelled[0].first == T("(#3,#4)"));

    // a constraint-violating tuple collects but never fires
    Configuration diag = config_with_tape(T("'e0"), {T("#3"), T("#3")}, 0);
    CHECK(replay(prog, diag).labelled.empty());
}

TEST_CASE("produce_label handles constant-only orbits")
{
    OrbitSet labels{{}, {parse_descriptor("orbit 'tau")}};
    RtmA prog = emit_gadget_produce_label(labels);
    Configuration start = config_with_tape(T("'e0"), {T("'_")}, 0);
    auto r = replay(prog, start);
    REQUIRE(r.labelled.size() == 1);
    CHECK(r.labelled[0].first == T("'tau"));
}

TEST_CASE("config_lts_canonical of the one-shot machine")
{
    RtmA m;
    m.initial = T("'up");
    m.schemas = {
        {T("'up"), blank_term(), Term::var("x"), Term::var("x"), Move::Right, T("'s1"), {}},
        {T("'s1"), blank_term(), tau_term(), blank_term(), Move::Left, T("'s2"), {}},
        {T("'s2"), Term::var("x"), Term::var("x"), blank_term(), Move::Right, T("'s3"), {}},
    };
    m.state_space = derive_state_space(m.support, m.schemas, m.initial);
    REQUIRE(validate_rtma(m).ok);

    auto r = config_lts_canonical(m, 10);
    CHECK(r.closed);
    CHECK(r.graph.num_states == 4);
    REQUIRE(r.graph.transitions.size() == 3);
    CHECK(r.graph.transitions[0].label == "#0");
    CHECK(r.graph.transitions[1].label == "tau");
    CHECK(r.graph.transitions[2].label == "#0");

    auto r0 = config_lts_canonical(m, 0);
    CHECK(r0.graph.num_states == 1);
    CHECK(r0.graph.transitions.empty());
}

TEST_CASE("canonical stepping is faithful to concrete instantiations")
{
    RtmA m;
    m.support = {Atom{0}};
    m.initial = T("'q");
    m.schemas = {
        {T("'q"), blank_term(), Term::tuple({Term::var("x"), Term::var("y")}), Term::var("y"),
         Move::Right, T("'q"),
         parse_constraint_text("x != y, y != #0")},
    };
    m.state_space = derive_state_space(m.support, m.schemas, m.initial);

    Configuration c = config_with_tape(T("'q"), {T("#5"), T("'_")}, 1);
    auto canonical = step_canonical(m, c);
    std::set<Atom> frame = {Atom{0}, Atom{5}};

    std::mt19937 rng(23);
    std::uniform_int_distribution<std::uint32_t> ai(0, 30);
    for (int i = 0; i < 300; ++i) {
        std::map<std::string, Atom> val{{"x", Atom{ai(rng)}}, {"y", Atom{ai(rng)}}};
        if (!satisfied(m.schemas[0].constraint, val)) continue;
        Term action = substitute(m.schemas[0].action, val);
        Configuration succ = apply_rule_at(c, substitute(m.schemas[0].write, val), Move::Right, T("'q"));
        Term concrete = Term::tuple({action, config_term(succ)});
        bool matched = false;
        for (auto& [ca, cc] : canonical)
            if (orbit_eq(concrete, Term::tuple({ca, config_term(cc)}), frame)) matched = true;
        CHECK(matched);
    }
}

TEST_CASE("canonical stepping is equivariant")
{
    RtmA fresh = emit_gadget(GadgetKind::Fresh);
    std::mt19937 rng(31);
    std::uniform_int_distribution<std::uint32_t> ai(0, 9);
    int done = 0;
    for (int i = 0; i < 500; ++i) {
        Atom a{ai(rng)}, b{ai(rng)};
        Configuration c = config_with_tape(T("'fresh"), {Term::atom(a), Term::atom(b), T("'_")}, 2);
        Permutation p = Permutation::transposition(Atom{ai(rng)}, Atom{ai(rng)});
        Configuration pc = config_with_tape(T("'fresh"),
                                            {apply(p, Term::atom(a)), apply(p, Term::atom(b)), T("'_")}, 2);
        auto s1 = step_canonical(fresh, c);
        auto s2 = step_canonical(fresh, pc);
        REQUIRE(s1.size() == s2.size());
        // each permuted successor is orbit-equal to some successor of the
        // permuted configuration (over the permuted frame)
        std::set<Atom> frame2 = support_of(config_term(pc));
        for (auto& [act, succ] : s1) {
            Term image = apply(p, Term::tuple({act, config_term(succ)}));
            bool found = false;
            for (auto& [act2, succ2] : s2)
                if (orbit_eq(image, Term::tuple({act2, config_term(succ2)}), frame2)) found = true;
            CHECK(found);
        }
        ++done;
    }
    CHECK(done == 500);
}

TEST_CASE("extracted effective system reproduces the canonical graph")
{
    for (auto kind : {GadgetKind::Copy, GadgetKind::Fresh}) {
        RtmA m = emit_gadget(kind);
        auto direct = config_lts_canonical(m, 8);
        auto via_codes = bounded_reach(extract_effective_ltsa(m), 8);
        CHECK(direct.graph.num_states == via_codes.graph.num_states);
        CHECK(direct.graph.initial == via_codes.graph.initial);
        std::set<LtsTransition> a(direct.graph.transitions.begin(), direct.graph.transitions.end());
        std::set<LtsTransition> b(via_codes.graph.transitions.begin(), via_codes.graph.transitions.end());
        CHECK(a == b);
    }
}

TEST_CASE("extract_effective_ltsa of an empty machine")
{
    RtmA m;
    m.initial = T("'q");
    m.state_space = derive_state_space({}, {}, m.initial);
    auto r = bounded_reach(extract_effective_ltsa(m), 5);
    CHECK(r.graph.num_states == 1);
    CHECK(r.graph.transitions.empty());
}

TEST_CASE("copy gadget's effective system is tau-only")
{
    RtmA m = emit_gadget(GadgetKind::Copy);
    auto r = config_lts_canonical(m, 8);
    for (auto& t : r.graph.transitions) CHECK(t.label == kTauLabel);
}

TEST_CASE("step_inf budgets and truncation")
{
    // machine with unbounded rules at (q, blank): action #i for every i
    RtmInf m;
    m.initial = T("'q");
    m.out_rules = [](const Term& state, const Term& read) -> RuleStream {
        if (!(state == Term::constant("q")) || !(read == blank_term()))
            return rule_stream_of({});
        auto counter = std::make_shared<std::uint32_t>(0);
        return RuleStream{[counter]() -> std::optional<InfRule> {
            InfRule r{Term::atom(Atom{*counter}), blank_term(), Move::Right, Term::constant("q")};
            ++*counter;
            return r;
        }};
    };
    auto res = step_inf(m, initial_configuration(m.initial), 5);
    CHECK(res.successors.size() == 5);
    CHECK(res.truncated);

    auto zero = step_inf(m, initial_configuration(m.initial), 0);
    CHECK(zero.successors.empty());
    CHECK(zero.truncated);

    // finite-backed machine: complete set, no flag
    RtmInf fin;
    fin.initial = T("'q");
    fin.out_rules = [](const Term&, const Term&) {
        return rule_stream_of({{Term::constant("a"), blank_term(), Move::Right, Term::constant("q")}});
    };
    auto full = step_inf(fin, initial_configuration(fin.initial), 10);
    CHECK(full.successors.size() == 1);
    CHECK_FALSE(full.truncated);
}

TEST_CASE("rtma parse and emit round trip")
{
    RtmA m = emit_gadget(GadgetKind::Fresh);
    std::string text = emit_rtma(m);
    RtmA back = parse_rtma(text);
    CHECK(emit_rtma(back) == text);
    CHECK(back.schemas == m.schemas);
    CHECK(back.initial == m.initial);

    CHECK_THROWS_WITH(parse_rtma("schema: 'q '_ 'tau '_ R 'q\n"),
                      Catch::Matchers::ContainsSubstring("initial"));
    CHECK_THROWS_WITH(parse_rtma("initial: 'q\nschema: 'q '_ 'tau '_ X 'q\n"),
                      Catch::Matchers::ContainsSubstring("move"));
}
