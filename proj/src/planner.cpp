#include "srp/planner.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace srp::plan {

std::string GroundedAction::str() const {
    std::string s = name + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ",";
        s += args[i];
    }
    return s + ")";
}

namespace {

Atom substitute(const SchemaAtom& sa, const std::map<std::string, std::string>& binding,
                const std::set<std::string>& regions) {
    Atom a;
    a.pred = sa.pred;
    a.args.reserve(sa.args.size());
    for (const auto& arg : sa.args) {
        if (!arg.empty() && arg[0] == '?')
            a.args.push_back(binding.at(arg));
        else
            a.args.push_back(arg);
    }
    return normalize_in(std::move(a), regions);
}

bool is_static_pred(const std::string& pred) { return pred == "vessel" || pred == "stackable" || pred == "has"; }

}  // namespace

std::vector<GroundedAction> ground_actions(const Domain& domain, const Problem& problem) {
    std::set<std::string> regions;
    for (const auto& c : problem.objects)
        if (c.type == "region") regions.insert(c.name);

    std::vector<GroundedAction> out;
    for (const ActionSchema& schema : domain.schemas) {
        const size_t np = schema.params.size();
        std::vector<std::vector<std::string>> pools(np);
        bool empty_pool = false;
        for (size_t p = 0; p < np; ++p) {
            pools[p] = problem.of_type(schema.params[p].second);
            if (pools[p].empty()) empty_pool = true;
        }
        if (empty_pool) continue;

        auto emit = [&](const std::map<std::string, std::string>& binding) {
            GroundedAction ga;
            ga.name = schema.name;
            for (const auto& [param, type] : schema.params) ga.args.push_back(binding.at(param));
            for (const SchemaAtom& sa : schema.preconditions) {
                Atom a = substitute(sa, binding, regions);
                // statics never change; resolve against init and prune
                if (is_static_pred(a.pred)) {
                    if (!problem.init.holds(a)) return;
                } else {
                    ga.preconditions.push_back(std::move(a));
                }
            }
            for (const SchemaAtom& sa : schema.add_effects)
                ga.add_effects.push_back(substitute(sa, binding, regions));
            for (const SchemaAtom& sa : schema.delete_effects)
                ga.delete_effects.push_back(substitute(sa, binding, regions));
            out.push_back(std::move(ga));
        };

        if (np == 0) {
            emit({});
            continue;
        }
        // odometer over pools, leftmost parameter most significant
        std::vector<size_t> idx(np, 0);
        for (bool done = false; !done;) {
            std::map<std::string, std::string> binding;
            bool distinct = true;
            for (size_t p = 0; p < np && distinct; ++p) {
                const std::string& value = pools[p][idx[p]];
                for (size_t q = 0; q < p; ++q)
                    if (binding.at(schema.params[q].first) == value) distinct = false;
                binding[schema.params[p].first] = value;
            }
            if (distinct) emit(binding);
            done = true;
            for (size_t p = np; p-- > 0;) {
                if (++idx[p] < pools[p].size()) {
                    done = false;
                    break;
                }
                idx[p] = 0;
            }
        }
    }
    return out;
}

namespace {

// Compact state: bitset over interned atoms.
struct BitState {
    std::vector<uint64_t> words;

    bool operator==(const BitState&) const = default;
    void set(int i) { words[static_cast<size_t>(i) >> 6] |= 1ull << (i & 63); }
    void reset(int i) { words[static_cast<size_t>(i) >> 6] &= ~(1ull << (i & 63)); }
    bool test(int i) const { return (words[static_cast<size_t>(i) >> 6] >> (i & 63)) & 1; }
};

struct BitStateHash {
    size_t operator()(const BitState& s) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (uint64_t w : s.words) {
            h ^= w;
            h *= 0x100000001b3ull;
        }
        return static_cast<size_t>(h);
    }
};

struct AtomTable {
    std::map<Atom, int> ids;
    int intern(const Atom& a) {
        auto [it, inserted] = ids.emplace(a, static_cast<int>(ids.size()));
        return it->second;
    }
};

struct IntAction {
    std::vector<int> pre, add, del;
};

}  // namespace

PlanResult plan_bfs(const Problem& problem, const Domain& domain, size_t max_states) {
    auto grounded = ground_actions(domain, problem);

    AtomTable table;
    for (const Atom& a : problem.init.atoms) table.intern(a);
    for (const Atom& a : problem.goal) table.intern(a);
    std::vector<IntAction> acts(grounded.size());
    for (size_t i = 0; i < grounded.size(); ++i) {
        for (const Atom& a : grounded[i].preconditions) acts[i].pre.push_back(table.intern(a));
        for (const Atom& a : grounded[i].add_effects) acts[i].add.push_back(table.intern(a));
        for (const Atom& a : grounded[i].delete_effects) acts[i].del.push_back(table.intern(a));
    }
    const size_t n_atoms = table.ids.size();
    const size_t n_words = (n_atoms + 63) / 64;

    auto make_state = [n_words]() { return BitState{std::vector<uint64_t>(n_words, 0)}; };
    BitState init = make_state();
    for (const Atom& a : problem.init.atoms) init.set(table.ids.at(a));
    std::vector<int> goal_ids;
    for (const Atom& a : problem.goal) goal_ids.push_back(table.ids.at(a));

    auto entails_goal = [&goal_ids](const BitState& s) {
        return std::all_of(goal_ids.begin(), goal_ids.end(), [&s](int g) { return s.test(g); });
    };
    auto applicable = [](const BitState& s, const IntAction& a) {
        return std::all_of(a.pre.begin(), a.pre.end(), [&s](int p) { return s.test(p); });
    };

    struct Node {
        BitState state;
        int parent = -1;
        int action = -1;
    };

    PlanResult result;
    if (entails_goal(init)) {
        result.status = PlanStatus::Found;
        return result;
    }

    std::vector<Node> nodes;
    nodes.push_back({init, -1, -1});
    std::unordered_set<BitState, BitStateHash> visited;
    visited.insert(init);
    std::deque<int> frontier{0};

    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        ++result.expanded;
        for (size_t a = 0; a < acts.size(); ++a) {
            if (!applicable(nodes[cur].state, acts[a])) continue;
            BitState next = nodes[cur].state;
            for (int d : acts[a].del) next.reset(d);
            for (int ad : acts[a].add) next.set(ad);
            if (visited.count(next)) continue;
            if (entails_goal(next)) {
                std::vector<int> chain{static_cast<int>(a)};
                for (int n = cur; n > 0; n = nodes[n].parent) chain.push_back(nodes[n].action);
                std::reverse(chain.begin(), chain.end());
                for (int id : chain) result.actions.push_back(grounded[static_cast<size_t>(id)]);
                result.status = PlanStatus::Found;
                return result;
            }
            if (visited.size() >= max_states) {
                result.status = PlanStatus::SearchLimit;
                return result;
            }
            visited.insert(next);
            nodes.push_back({std::move(next), cur, static_cast<int>(a)});
            frontier.push_back(static_cast<int>(nodes.size()) - 1);
        }
    }
    result.status = PlanStatus::Unsolvable;
    return result;
}

ValidationResult validate(const std::vector<GroundedAction>& plan, const Problem& problem) {
    GroundedState state = problem.init;
    for (size_t i = 0; i < plan.size(); ++i) {
        for (const Atom& pre : plan[i].preconditions) {
            if (!state.holds(pre)) {
                return {false, Violation{static_cast<int>(i),
                                         plan[i].str() + ": precondition " + pre.str() + " not satisfied"}};
            }
        }
        for (const Atom& d : plan[i].delete_effects) state.atoms.erase(d);
        for (const Atom& a : plan[i].add_effects) state.atoms.insert(a);
    }
    if (!state.entails(problem.goal)) {
        for (const Atom& g : problem.goal)
            if (!state.holds(g)) return {false, Violation{-1, "goal atom " + g.str() + " not reached"}};
    }
    return {true, std::nullopt};
}

}  // namespace srp::plan
