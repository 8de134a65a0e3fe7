#pragma once

// Branching bisimilarity and its divergence-preserving refinement on finite
// LTSs, decided by signature refinement on the disjoint union, plus an
// independent clause-by-clause relation verifier used as a testing oracle.
//
// Divergence on finite graphs reduces to block-internal tau-cycle
// reachability: a state diverges w.r.t. a partition iff it reaches, through
// tau-steps inside its own block, a tau-cycle inside that block.

#include <atomata/lts.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace atomata {

struct BisimVerdict {
    bool related = false;
    // witness: cross-side relation (state of l1, state of l2) when related
    std::vector<std::pair<std::size_t, std::size_t>> witness;
    // distinguishing info otherwise
    std::size_t left_state = 0;
    std::size_t right_state = 0;
    std::string action;
};

namespace detail {

struct UnionGraph {
    std::size_t n = 0;
    std::size_t offset2 = 0; // states of l2 start here
    std::vector<std::vector<std::pair<std::string, std::size_t>>> succ;
    std::vector<std::vector<std::size_t>> tau_succ;

    UnionGraph(const FiniteLts& l1, const FiniteLts& l2)
    {
        offset2 = l1.num_states;
        n = l1.num_states + l2.num_states;
        succ.resize(n);
        tau_succ.resize(n);
        for (const LtsTransition& t : l1.transitions) add(t.from, t.label, t.to);
        for (const LtsTransition& t : l2.transitions) add(offset2 + t.from, t.label, offset2 + t.to);
    }

    void add(std::size_t from, const std::string& label, std::size_t to)
    {
        succ[from].emplace_back(label, to);
        if (label == kTauLabel) tau_succ[from].push_back(to);
    }
};

using Signature = std::set<std::pair<std::string, std::size_t>>;

// States reachable from s via tau-steps that never leave block(s).
inline std::vector<std::size_t> inert_closure(const UnionGraph& g, const std::vector<std::size_t>& block,
                                              std::size_t s)
{
    std::vector<std::size_t> out{s};
    std::set<std::size_t> seen{s};
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t t : g.tau_succ[out[i]])
            if (block[t] == block[s] && seen.insert(t).second) out.push_back(t);
    return out;
}

// Divergence w.r.t. the partition: can s, moving through tau-steps inside its
// block, reach a tau-cycle inside the block?  On finite graphs this is
// equivalent to the closure containing a state with an intra-block tau-step
// back into the closure that lies on a cycle; detected by looking for any
// cycle in the closure's intra-block tau-subgraph.
inline bool diverges(const UnionGraph& g, const std::vector<std::size_t>& block, std::size_t s)
{
    auto closure = inert_closure(g, block, s);
    std::set<std::size_t> in_closure(closure.begin(), closure.end());
    // Kahn peeling: remove states without intra-closure tau-successors; a
    // nonempty remainder contains a cycle reachable from s.
    std::map<std::size_t, std::size_t> outdeg;
    std::map<std::size_t, std::vector<std::size_t>> preds;
    for (std::size_t u : closure) {
        std::size_t d = 0;
        for (std::size_t t : g.tau_succ[u])
            if (block[t] == block[s] && in_closure.count(t)) {
                ++d;
                preds[t].push_back(u);
            }
        outdeg[u] = d;
    }
    std::vector<std::size_t> queue;
    for (auto& [u, d] : outdeg)
        if (d == 0) queue.push_back(u);
    std::size_t removed = 0;
    while (!queue.empty()) {
        std::size_t u = queue.back();
        queue.pop_back();
        ++removed;
        for (std::size_t p : preds[u])
            if (--outdeg[p] == 0) queue.push_back(p);
    }
    return removed < closure.size();
}

inline Signature signature(const UnionGraph& g, const std::vector<std::size_t>& block, std::size_t s)
{
    Signature sig;
    for (std::size_t u : inert_closure(g, block, s))
        for (auto& [label, t] : g.succ[u])
            if (label != kTauLabel || block[t] != block[s]) sig.insert({label, block[t]});
    return sig;
}

struct RefineOutcome {
    std::vector<std::size_t> block;
    // first refinement round at which the two initials were separated, with a
    // label from the signature difference observed there
    std::optional<std::string> separating_action;
};

inline RefineOutcome refine_to_stability(const UnionGraph& g, std::size_t init1, std::size_t init2,
                                         bool divergence)
{
    std::vector<std::size_t> block(g.n, 0);
    std::optional<std::string> separating;
    if (g.n == 0) return {block, separating};
    std::size_t blocks_before = 1;
    for (;;) {
        // key: (old block, signature, divergence bit); splitting only, so an
        // unchanged block count means the partition is stable
        std::map<std::tuple<std::size_t, Signature, bool>, std::size_t> ids;
        std::vector<std::size_t> next(g.n);
        std::vector<std::tuple<std::size_t, Signature, bool>> keys(g.n);
        for (std::size_t s = 0; s < g.n; ++s) {
            keys[s] = {block[s], signature(g, block, s),
                       divergence ? diverges(g, block, s) : false};
            auto [it, fresh] = ids.emplace(keys[s], ids.size());
            next[s] = it->second;
        }
        if (!separating && next[init1] != next[init2]) {
            const auto& [b1, sig1, d1] = keys[init1];
            const auto& [b2, sig2, d2] = keys[init2];
            std::vector<std::pair<std::string, std::size_t>> diff;
            std::set_symmetric_difference(sig1.begin(), sig1.end(), sig2.begin(), sig2.end(),
                                          std::back_inserter(diff));
            if (!diff.empty())
                separating = diff.front().first;
            else if (d1 != d2)
                separating = "divergence";
            else
                separating = kTauLabel; // separated transitively via earlier blocks
        }
        if (ids.size() == blocks_before) break;
        blocks_before = ids.size();
        block = std::move(next);
    }
    return {block, separating};
}

inline BisimVerdict decide(const FiniteLts& l1, const FiniteLts& l2, bool divergence)
{
    UnionGraph g(l1, l2);
    std::size_t init1 = l1.initial;
    std::size_t init2 = g.offset2 + l2.initial;
    auto outcome = refine_to_stability(g, init1, init2, divergence);

    BisimVerdict v;
    v.related = outcome.block[init1] == outcome.block[init2];
    if (v.related) {
        for (std::size_t s = 0; s < g.offset2; ++s)
            for (std::size_t t = g.offset2; t < g.n; ++t)
                if (outcome.block[s] == outcome.block[t])
                    v.witness.emplace_back(s, t - g.offset2);
    } else {
        v.left_state = l1.initial;
        v.right_state = l2.initial;
        v.action = outcome.separating_action.value_or(kTauLabel);
    }
    return v;
}

} // namespace detail

inline BisimVerdict branching_bisim(const FiniteLts& l1, const FiniteLts& l2)
{
    return detail::decide(l1, l2, false);
}

inline BisimVerdict dp_branching_bisim(const FiniteLts& l1, const FiniteLts& l2)
{
    return detail::decide(l1, l2, true);
}

// ---------------------------------------------------------------------------
// Clause-by-clause verifier.  True iff R is a branching bisimulation (with
// the divergence clauses when flagged) that contains the initial pair.

inline bool check_relation(const std::vector<std::pair<std::size_t, std::size_t>>& relation,
                           const FiniteLts& l1, const FiniteLts& l2, bool divergence)
{
    std::set<std::pair<std::size_t, std::size_t>> R(relation.begin(), relation.end());
    if (!R.count({l1.initial, l2.initial})) return false;

    auto tau_reach = [](const FiniteLts& l, std::size_t s) {
        std::vector<std::size_t> out{s};
        std::set<std::size_t> seen{s};
        for (std::size_t i = 0; i < out.size(); ++i)
            for (const LtsTransition& t : l.transitions)
                if (t.from == out[i] && t.label == kTauLabel && seen.insert(t.to).second)
                    out.push_back(t.to);
        return out;
    };

    auto transfer = [&](std::size_t s1, std::size_t s2, bool left_moves) -> bool {
        const FiniteLts& mover = left_moves ? l1 : l2;
        const FiniteLts& other = left_moves ? l2 : l1;
        std::size_t ms = left_moves ? s1 : s2;
        std::size_t os = left_moves ? s2 : s1;
        auto rel = [&](std::size_t a, std::size_t b) {
            return left_moves ? R.count({a, b}) > 0 : R.count({b, a}) > 0;
        };
        for (const LtsTransition& t : mover.transitions) {
            if (t.from != ms) continue;
            bool matched = false;
            for (std::size_t mid : tau_reach(other, os)) {
                if (!rel(ms, mid)) continue;
                if (t.label == kTauLabel && rel(t.to, mid)) {
                    matched = true; // the (a) option: stutter
                    break;
                }
                for (const LtsTransition& u : other.transitions)
                    if (u.from == mid && u.label == t.label && rel(t.to, u.to)) {
                        matched = true;
                        break;
                    }
                if (matched) break;
            }
            if (!matched) return false;
        }
        return true;
    };

    // Divergence clause for the left side (clause 3); `swap` gives clause 4.
    auto divergence_ok = [&](std::size_t s1, std::size_t s2, bool left_moves) -> bool {
        const FiniteLts& mover = left_moves ? l1 : l2;
        const FiniteLts& other = left_moves ? l2 : l1;
        std::size_t ms = left_moves ? s1 : s2;
        std::size_t os = left_moves ? s2 : s1;
        auto rel = [&](std::size_t a, std::size_t b) {
            return left_moves ? R.count({a, b}) > 0 : R.count({b, a}) > 0;
        };
        // H: mover states related to os
        std::set<std::size_t> H;
        for (std::size_t u = 0; u < mover.num_states; ++u)
            if (rel(u, os)) H.insert(u);
        if (!H.count(ms)) return true;
        // tau+ successors of os
        std::set<std::size_t> plus;
        {
            std::vector<std::size_t> stack;
            for (const LtsTransition& t : other.transitions)
                if (t.from == os && t.label == kTauLabel && plus.insert(t.to).second)
                    stack.push_back(t.to);
            while (!stack.empty()) {
                std::size_t u = stack.back();
                stack.pop_back();
                for (const LtsTransition& t : other.transitions)
                    if (t.from == u && t.label == kTauLabel && plus.insert(t.to).second)
                        stack.push_back(t.to);
            }
        }
        // good states: related to some tau+ successor of os
        std::set<std::size_t> good;
        for (std::size_t u : H)
            for (std::size_t v : plus)
                if (rel(u, v)) {
                    good.insert(u);
                    break;
                }
        // violation iff a lasso within H avoiding `good` starts at ms
        if (good.count(ms)) return true;
        std::set<std::size_t> bad; // H minus good
        for (std::size_t u : H)
            if (!good.count(u)) bad.insert(u);
        // reachability from ms inside `bad` via tau
        std::set<std::size_t> reach{ms};
        std::vector<std::size_t> stack{ms};
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (const LtsTransition& t : mover.transitions)
                if (t.from == u && t.label == kTauLabel && bad.count(t.to) && reach.insert(t.to).second)
                    stack.push_back(t.to);
        }
        // cycle detection inside reach (intra-bad tau edges) by Kahn peeling
        std::map<std::size_t, std::size_t> outdeg;
        std::map<std::size_t, std::vector<std::size_t>> preds;
        for (std::size_t u : reach) {
            std::size_t d = 0;
            for (const LtsTransition& t : mover.transitions)
                if (t.from == u && t.label == kTauLabel && reach.count(t.to)) {
                    ++d;
                    preds[t.to].push_back(u);
                }
            outdeg[u] = d;
        }
        std::vector<std::size_t> queue;
        for (auto& [u, d] : outdeg)
            if (d == 0) queue.push_back(u);
        std::size_t removed = 0;
        while (!queue.empty()) {
            std::size_t u = queue.back();
            queue.pop_back();
            ++removed;
            for (std::size_t p : preds[u])
                if (--outdeg[p] == 0) queue.push_back(p);
        }
        bool lasso = removed < reach.size();
        return !lasso;
    };

    for (auto& [s1, s2] : R) {
        if (s1 >= l1.num_states || s2 >= l2.num_states) return false;
        if (!transfer(s1, s2, true)) return false;
        if (!transfer(s1, s2, false)) return false;
        if (divergence) {
            if (!divergence_ok(s1, s2, true)) return false;
            if (!divergence_ok(s1, s2, false)) return false;
        }
    }
    return true;
}

} // namespace atomata
