#include "srp/pddl.hpp"

#include <algorithm>
#include <sstream>

namespace srp::plan {

using scenegraph::Predicate;
using scenegraph::SceneGraph;

std::string Atom::str() const {
    std::string s = "(" + pred;
    for (const auto& a : args) s += " " + a;
    return s + ")";
}

bool GroundedState::entails(const std::set<Atom>& goal) const {
    return std::all_of(goal.begin(), goal.end(), [this](const Atom& a) { return holds(a); });
}

void GroundedState::validate() const {
    int holding = 0;
    bool handempty = false;
    for (const Atom& a : atoms) {
        if (a.pred == "holding") ++holding;
        if (a.pred == "handempty") handempty = true;
    }
    if (holding > 1) throw std::runtime_error("state: more than one holding(.)");
    if (holding == 1 && handempty) throw std::runtime_error("state: holding and handempty both present");
    if (holding == 0 && !handempty) throw std::runtime_error("state: neither holding nor handempty");
}

int Domain::arity(const std::string& pred) const {
    for (const auto& [name, n] : predicates)
        if (name == pred) return n;
    return -1;
}

bool Problem::is_region(const std::string& name) const {
    for (const auto& c : objects)
        if (c.name == name) return c.type == "region";
    return false;
}

std::vector<std::string> Problem::of_type(const std::string& type) const {
    std::vector<std::string> out;
    for (const auto& c : objects)
        if (type == "object" || c.type == type) out.push_back(c.name);
    if (type == "object") out.push_back("table");
    return out;
}

Atom normalize_in(Atom a, const std::set<std::string>& regions) {
    if (a.pred == "in" && a.args.size() == 2 && !regions.count(a.args[0]) && regions.count(a.args[1]))
        std::swap(a.args[0], a.args[1]);
    return a;
}

std::string emit_domain() {
    return R"((define (domain srp)
  (:requirements :strips :typing)
  (:types item region)
  (:constants table)
  (:predicates (on ?x ?y) (in ?x ?y) (clear ?x) (holding ?x) (handempty) (has ?x ?y) (vessel ?x) (stackable ?x))
  (:action pick
    :parameters (?x - item)
    :precondition (and (clear ?x) (on ?x table) (handempty))
    :effect (and (holding ?x) (not (on ?x table)) (not (clear ?x)) (not (handempty))))
  (:action place
    :parameters (?x - item)
    :precondition (and (holding ?x))
    :effect (and (on ?x table) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x - item ?y - item)
    :precondition (and (holding ?x) (clear ?y) (stackable ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - item ?y - item)
    :precondition (and (on ?x ?y) (clear ?x) (handempty) (stackable ?y))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty))))
  (:action place_in
    :parameters (?x - item ?y - object)
    :precondition (and (holding ?x) (clear ?y) (vessel ?y))
    :effect (and (in ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action remove_from
    :parameters (?x - item ?y - object)
    :precondition (and (in ?x ?y) (clear ?x) (handempty) (vessel ?y))
    :effect (and (holding ?x) (clear ?y) (not (in ?x ?y)) (not (clear ?x)) (not (handempty))))
)
)";
}

namespace {

void check_symbol(const std::string& s) {
    if (s.empty()) throw std::runtime_error("empty identifier");
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        if (!ok) throw std::runtime_error("identifier not expressible in PDDL: '" + s + "'");
    }
    if (s == "table") throw std::runtime_error("instance id 'table' is reserved");
}

Atom atom_from_axiom(const scenegraph::Axiom& a) {
    return {scenegraph::predicate_name(a.predicate), a.args};
}

}  // namespace

GroundedState state_from_graphs(const SceneGraph& initial, const SceneGraph& goal) {
    GroundedState st;
    st.atoms.insert(atom("handempty"));
    for (const auto& a : initial.axioms) {
        if (a.predicate == Predicate::Exist) continue;
        st.atoms.insert(atom_from_axiom(a));
    }
    for (const auto& [id, inst] : initial.instances) {
        if (inst.concave)
            st.atoms.insert(atom("vessel", {id}));
        else
            st.atoms.insert(atom("stackable", {id}));
    }
    std::set<std::string> regions = initial.regions;
    regions.insert(goal.regions.begin(), goal.regions.end());
    for (const std::string& r : regions) {
        st.atoms.insert(atom("vessel", {r}));
        bool occupied = false;
        for (const auto& a : initial.axioms)
            if (a.predicate == Predicate::In && a.args[0] == r) occupied = true;
        if (!occupied) st.atoms.insert(atom("clear", {r}));
    }
    return st;
}

std::set<Atom> goal_from_graph(const SceneGraph& goal) {
    std::set<Atom> out;
    for (const auto& a : scenegraph::relational_axioms(goal)) out.insert(atom_from_axiom(a));
    // A region goal in(g, x) fixes x's placement; the support atom between x
    // and the region's parent is a geometric consequence of that placement,
    // not a separately achievable atom, so it leaves the symbolic goal.
    std::map<std::string, std::string> region_parent;
    for (const auto& a : goal.axioms)
        if (a.predicate == Predicate::Has) region_parent[a.args[1]] = a.args[0];
    for (const auto& a : goal.axioms) {
        if (a.predicate != Predicate::In) continue;
        auto it = region_parent.find(a.args[0]);
        if (it == region_parent.end()) continue;
        const std::string& child = a.args[1];
        out.erase(atom("on", {child, it->second}));
        out.erase(atom("in", {child, it->second}));
    }
    return out;
}

std::string emit_problem(const SceneGraph& initial, const SceneGraph& goal) {
    // constants: union of instances; model ids must agree where shared
    std::map<std::string, const scenegraph::Instance*> items;
    for (const auto& [id, inst] : initial.instances) items[id] = &inst;
    for (const auto& [id, inst] : goal.instances) {
        auto it = items.find(id);
        if (it != items.end() && it->second->model_id != inst.model_id)
            throw std::runtime_error("emit_pddl: instance " + id + " has different models in the two graphs");
        items.emplace(id, &inst);
    }
    std::set<std::string> regions = initial.regions;
    regions.insert(goal.regions.begin(), goal.regions.end());
    for (const auto& [id, _] : items) {
        check_symbol(id);
        if (regions.count(id)) throw std::runtime_error("emit_pddl: id used as both instance and region: " + id);
    }
    for (const auto& r : regions) check_symbol(r);

    std::ostringstream out;
    out << "(define (problem srp-task)\n  (:domain srp)\n  (:objects";
    for (const auto& [id, _] : items) out << " " << id;
    if (!items.empty()) out << " - item";
    if (!regions.empty()) {
        for (const auto& r : regions) out << " " << r;
        out << " - region";
    }
    out << ")\n  (:init\n";
    GroundedState init = state_from_graphs(initial, goal);
    for (const Atom& a : init.atoms) out << "    " << a.str() << "\n";
    out << "  )\n  (:goal (and\n";
    for (const Atom& a : goal_from_graph(goal)) out << "    " << a.str() << "\n";
    out << "  ))\n)\n";
    return out.str();
}

std::pair<std::string, std::string> emit_pddl(const SceneGraph& initial, const SceneGraph& goal) {
    return {emit_domain(), emit_problem(initial, goal)};
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    std::string text;  // "(", ")" or a symbol
    int line = 1, col = 1;
};

struct Node {
    // either a symbol or a list
    std::string symbol;
    std::vector<Node> list;
    bool is_list = false;
    int line = 1, col = 1;

    const std::string& sym() const { return symbol; }
};

[[noreturn]] void fail(const std::string& file, int line, int col, const std::string& msg) {
    throw ParseError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}
[[noreturn]] void fail(const std::string& file, const Node& n, const std::string& msg) {
    fail(file, n.line, n.col, msg);
}

std::vector<Token> tokenize(const std::string& text, const std::string& file) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ';') {  // comment to end of line
            while (i < text.size() && text[i] != '\n') advance(text[i++]);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(c);
            ++i;
            continue;
        }
        if (c == '(' || c == ')') {
            out.push_back({std::string(1, c), line, col});
            advance(c);
            ++i;
            continue;
        }
        int start_col = col;
        std::string sym;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
               text[i] != '(' && text[i] != ')' && text[i] != ';') {
            sym.push_back(text[i]);
            advance(text[i]);
            ++i;
        }
        out.push_back({sym, line, start_col});
    }
    if (out.empty()) fail(file, 1, 1, "empty input");
    return out;
}

Node read_node(const std::vector<Token>& toks, size_t& i, const std::string& file) {
    if (i >= toks.size()) fail(file, toks.back().line, toks.back().col, "unexpected end of input");
    const Token& t = toks[i];
    if (t.text == ")") fail(file, t.line, t.col, "unexpected ')'");
    Node n;
    n.line = t.line;
    n.col = t.col;
    if (t.text == "(") {
        n.is_list = true;
        ++i;
        while (i < toks.size() && toks[i].text != ")") n.list.push_back(read_node(toks, i, file));
        if (i >= toks.size()) fail(file, t.line, t.col, "unclosed '('");
        ++i;  // consume ')'
    } else {
        n.symbol = t.text;
        ++i;
    }
    return n;
}

Node read_single(const std::string& text, const std::string& file) {
    auto toks = tokenize(text, file);
    size_t i = 0;
    Node n = read_node(toks, i, file);
    if (i != toks.size()) fail(file, toks[i].line, toks[i].col, "trailing input after top-level form");
    return n;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

const Node& expect_list(const Node& n, const std::string& file, const std::string& what) {
    if (!n.is_list) fail(file, n, "expected " + what + ", found symbol '" + n.symbol + "'");
    return n;
}

const std::set<std::string> kUnsupported = {"forall", "exists", "when",     "or",      "imply",
                                            "=",      "not",    "and",      "increase", "decrease",
                                            "assign"};

SchemaAtom parse_schema_atom(const Node& n, const Domain& dom, const std::string& file) {
    expect_list(n, file, "an atom");
    if (n.list.empty() || n.list[0].is_list) fail(file, n, "malformed atom");
    if (kUnsupported.count(lower(n.list[0].sym())))
        fail(file, n, "unsupported construct '" + lower(n.list[0].sym()) + "'");
    SchemaAtom a;
    a.pred = lower(n.list[0].sym());
    for (size_t i = 1; i < n.list.size(); ++i) {
        if (n.list[i].is_list) fail(file, n.list[i], "nested list inside an atom");
        a.args.push_back(lower(n.list[i].sym()));
    }
    int want = dom.arity(a.pred);
    if (want < 0) fail(file, n, "unknown predicate '" + a.pred + "'");
    if (want != static_cast<int>(a.args.size()))
        fail(file, n, "predicate '" + a.pred + "' expects " + std::to_string(want) + " arguments, got " +
                          std::to_string(a.args.size()));
    return a;
}

// Typed name sequence: a b c - item d - region ...
std::vector<TypedConstant> parse_typed_names(const Node& n, const std::string& file,
                                             const std::string& default_type) {
    std::vector<TypedConstant> out;
    std::vector<std::string> pending;
    for (size_t i = 0; i < n.list.size(); ++i) {
        const Node& e = n.list[i];
        if (e.is_list) fail(file, e, "unexpected list in a typed name sequence");
        if (e.sym() == "-") {
            if (i + 1 >= n.list.size()) fail(file, e, "missing type after '-'");
            std::string type = lower(n.list[++i].sym());
            for (auto& name : pending) out.push_back({name, type});
            pending.clear();
        } else {
            pending.push_back(lower(e.sym()));
        }
    }
    for (auto& name : pending) out.push_back({name, default_type});
    return out;
}

void parse_action(const Node& n, Domain& dom, const std::string& file) {
    ActionSchema schema;
    if (n.list.size() < 2 || n.list[1].is_list) fail(file, n, "action needs a name");
    schema.name = lower(n.list[1].sym());
    size_t i = 2;
    while (i < n.list.size()) {
        if (n.list[i].is_list || n.list[i].sym().empty() || n.list[i].sym()[0] != ':')
            fail(file, n.list[i], "expected :parameters/:precondition/:effect");
        std::string key = lower(n.list[i].sym());
        if (i + 1 >= n.list.size()) fail(file, n.list[i], "missing value after " + key);
        const Node& val = n.list[i + 1];
        if (key == ":parameters") {
            for (auto& tc : parse_typed_names(expect_list(val, file, "parameter list"), file, "object")) {
                if (tc.name.empty() || tc.name[0] != '?') fail(file, val, "parameters must start with '?'");
                schema.params.emplace_back(tc.name, tc.type);
            }
        } else if (key == ":precondition") {
            expect_list(val, file, "precondition");
            if (val.list.empty()) fail(file, val, "empty precondition");
            if (!val.list[0].is_list && lower(val.list[0].sym()) == "and") {
                for (size_t k = 1; k < val.list.size(); ++k) {
                    if (!val.list[k].is_list) fail(file, val.list[k], "expected an atom");
                    if (!val.list[k].list.empty() && !val.list[k].list[0].is_list &&
                        kUnsupported.count(lower(val.list[k].list[0].sym())))
                        fail(file, val.list[k], "unsupported construct '" + lower(val.list[k].list[0].sym()) + "'");
                    schema.preconditions.push_back(parse_schema_atom(val.list[k], dom, file));
                }
            } else if (!val.list[0].is_list && kUnsupported.count(lower(val.list[0].sym()))) {
                fail(file, val, "unsupported construct '" + lower(val.list[0].sym()) + "'");
            } else {
                schema.preconditions.push_back(parse_schema_atom(val, dom, file));
            }
        } else if (key == ":effect") {
            expect_list(val, file, "effect");
            if (val.list.empty()) fail(file, val, "empty effect");
            std::vector<const Node*> effects;
            if (!val.list[0].is_list && lower(val.list[0].sym()) == "and") {
                for (size_t k = 1; k < val.list.size(); ++k) effects.push_back(&val.list[k]);
            } else {
                effects.push_back(&val);
            }
            for (const Node* e : effects) {
                expect_list(*e, file, "effect atom");
                if (!e->list.empty() && !e->list[0].is_list && lower(e->list[0].sym()) == "not") {
                    if (e->list.size() != 2) fail(file, *e, "'not' takes one atom");
                    schema.delete_effects.push_back(parse_schema_atom(e->list[1], dom, file));
                } else if (!e->list.empty() && !e->list[0].is_list &&
                           kUnsupported.count(lower(e->list[0].sym()))) {
                    fail(file, *e, "unsupported construct '" + lower(e->list[0].sym()) + "'");
                } else {
                    schema.add_effects.push_back(parse_schema_atom(*e, dom, file));
                }
            }
        } else {
            fail(file, n.list[i], "unsupported action field " + key);
        }
        i += 2;
    }
    // effects must mention only parameters or domain constants
    auto known = [&schema, &dom](const std::string& a) {
        if (!a.empty() && a[0] == '?') {
            for (auto& [p, t] : schema.params)
                if (p == a) return true;
            return false;
        }
        return std::find(dom.constants.begin(), dom.constants.end(), a) != dom.constants.end();
    };
    for (const auto* atoms : {&schema.preconditions, &schema.add_effects, &schema.delete_effects})
        for (const auto& sa : *atoms)
            for (const auto& a : sa.args)
                if (!known(a)) fail(file, n, "unbound name '" + a + "' in action " + schema.name);
    dom.schemas.push_back(std::move(schema));
}

Domain parse_domain(const std::string& text) {
    const std::string file = "domain";
    Node root = read_single(text, file);
    expect_list(root, file, "(define ...)");
    if (root.list.empty() || root.list[0].is_list || lower(root.list[0].sym()) != "define")
        fail(file, root, "expected (define (domain ...) ...)");
    Domain dom;
    for (size_t i = 1; i < root.list.size(); ++i) {
        const Node& sec = expect_list(root.list[i], file, "a domain section");
        if (sec.list.empty()) fail(file, sec, "empty section");
        std::string head = sec.list[0].is_list ? "" : lower(sec.list[0].sym());
        if (head == "domain") {
            if (sec.list.size() != 2 || sec.list[1].is_list) fail(file, sec, "malformed (domain name)");
            dom.name = lower(sec.list[1].sym());
        } else if (head == ":requirements") {
            for (size_t k = 1; k < sec.list.size(); ++k) {
                std::string req = lower(sec.list[k].sym());
                if (req != ":strips" && req != ":typing")
                    fail(file, sec.list[k], "unsupported requirement " + req);
            }
        } else if (head == ":types") {
            for (size_t k = 1; k < sec.list.size(); ++k) {
                if (sec.list[k].is_list) fail(file, sec.list[k], "malformed type list");
                std::string t = lower(sec.list[k].sym());
                if (t == "-") {
                    if (k + 1 >= sec.list.size() || lower(sec.list[k + 1].sym()) != "object")
                        fail(file, sec.list[k], "types may only derive from object");
                    ++k;
                    continue;
                }
                if (t != "item" && t != "region") fail(file, sec.list[k], "unsupported type '" + t + "'");
            }
        } else if (head == ":constants") {
            for (auto& tc : parse_typed_names(sec, file, "object")) {
                if (tc.name == ":constants") continue;
                dom.constants.push_back(tc.name);
            }
        } else if (head == ":predicates") {
            for (size_t k = 1; k < sec.list.size(); ++k) {
                const Node& p = expect_list(sec.list[k], file, "a predicate declaration");
                if (p.list.empty() || p.list[0].is_list) fail(file, p, "malformed predicate");
                int arity = 0;
                for (size_t a = 1; a < p.list.size(); ++a) {
                    if (p.list[a].is_list) fail(file, p.list[a], "malformed predicate parameter");
                    if (p.list[a].sym() == "-") { ++a; continue; }  // typed parameter
                    ++arity;
                }
                dom.predicates.emplace_back(lower(p.list[0].sym()), arity);
            }
        } else if (head == ":action") {
            parse_action(sec, dom, file);
        } else if (head.rfind(':', 0) == 0) {
            fail(file, sec, "unsupported section " + head);
        } else {
            fail(file, sec, "unexpected form");
        }
    }
    if (dom.name.empty()) fail(file, root, "missing (domain name)");
    return dom;
}

Problem parse_problem(const std::string& text, const Domain& dom) {
    const std::string file = "problem";
    Node root = read_single(text, file);
    expect_list(root, file, "(define ...)");
    if (root.list.empty() || root.list[0].is_list || lower(root.list[0].sym()) != "define")
        fail(file, root, "expected (define (problem ...) ...)");
    Problem prob;
    std::set<std::string> region_names;

    auto ground_atom = [&](const Node& n) {
        SchemaAtom sa = parse_schema_atom(n, dom, file);
        for (const auto& a : sa.args) {
            if (!a.empty() && a[0] == '?') fail(file, n, "variables are not allowed here");
            bool known = a == "table" ||
                         std::any_of(prob.objects.begin(), prob.objects.end(),
                                     [&a](const TypedConstant& c) { return c.name == a; });
            if (!known) fail(file, n, "unknown constant '" + a + "'");
        }
        return normalize_in(Atom{sa.pred, sa.args}, region_names);
    };

    for (size_t i = 1; i < root.list.size(); ++i) {
        const Node& sec = expect_list(root.list[i], file, "a problem section");
        if (sec.list.empty()) fail(file, sec, "empty section");
        std::string head = sec.list[0].is_list ? "" : lower(sec.list[0].sym());
        if (head == "problem") {
            if (sec.list.size() != 2 || sec.list[1].is_list) fail(file, sec, "malformed (problem name)");
            prob.name = lower(sec.list[1].sym());
        } else if (head == ":domain") {
            if (sec.list.size() != 2 || sec.list[1].is_list) fail(file, sec, "malformed (:domain name)");
            prob.domain_name = lower(sec.list[1].sym());
            if (prob.domain_name != dom.name)
                fail(file, sec, "problem domain '" + prob.domain_name + "' does not match '" + dom.name + "'");
        } else if (head == ":objects") {
            for (auto& tc : parse_typed_names(sec, file, "object")) {
                if (tc.name == ":objects") continue;
                if (tc.type != "item" && tc.type != "region")
                    fail(file, sec, "object '" + tc.name + "' must be typed item or region");
                prob.objects.push_back(tc);
                if (tc.type == "region") region_names.insert(tc.name);
            }
        } else if (head == ":init") {
            for (size_t k = 1; k < sec.list.size(); ++k)
                prob.init.atoms.insert(ground_atom(sec.list[k]));
        } else if (head == ":goal") {
            if (sec.list.size() != 2) fail(file, sec, "goal takes a single formula");
            const Node& g = expect_list(sec.list[1], file, "goal formula");
            if (!g.list.empty() && !g.list[0].is_list && lower(g.list[0].sym()) == "and") {
                for (size_t k = 1; k < g.list.size(); ++k) prob.goal.insert(ground_atom(g.list[k]));
            } else if (!g.list.empty() && !g.list[0].is_list && kUnsupported.count(lower(g.list[0].sym()))) {
                fail(file, g, "unsupported construct '" + lower(g.list[0].sym()) + "'");
            } else {
                prob.goal.insert(ground_atom(g));
            }
        } else if (head.rfind(':', 0) == 0) {
            fail(file, sec, "unsupported section " + head);
        } else {
            fail(file, sec, "unexpected form");
        }
    }
    prob.init.validate();
    return prob;
}

}  // namespace

ParsedPddl parse_pddl(const std::string& domain_text, const std::string& problem_text) {
    ParsedPddl parsed;
    parsed.domain = parse_domain(domain_text);
    parsed.problem = parse_problem(problem_text, parsed.domain);
    return parsed;
}

}  // namespace srp::plan
