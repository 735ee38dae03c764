#pragma once

// PDDL+ front end: domain/problem ASTs, the parser for the supported
// grammar subset (see docs/pddl-subset.md), a pretty-printer, and the
// linker that cross-checks a (domain, problem) pair into a
// PlanningInstance.
//
// Names are compared case-insensitively and stored lower-cased.
// Numbers are double-precision reals.

#include <cctype>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/sexpr.hpp"

namespace hsc::pddl {

struct link_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// type expression: a single primitive name, or (either t1 ... tk)
struct TypeExpr {
    std::vector<std::string> names{"object"};
    bool is_either() const { return names.size() > 1; }
    bool operator==(const TypeExpr&) const = default;
};

struct TypedVar {
    std::string name;  // variables stored without the leading '?'
    TypeExpr type;
    bool operator==(const TypedVar&) const = default;
};

struct PredSignature {
    std::string name;
    std::vector<TypedVar> params;
    bool operator==(const PredSignature&) const = default;
};

// ---------------------------------------------------------------------------
// Expressions (PDDL terms and numeric f-exps)

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Num, Var, Name, App, Arith };

struct Expr {
    ExprKind kind;
    double num = 0.0;
    std::string sym;            // Var/Name: identifier; App: function; Arith: op
    std::vector<ExprPtr> args;
};

inline ExprPtr e_num(double v) { Expr e{ExprKind::Num, v}; return std::make_shared<Expr>(std::move(e)); }
inline ExprPtr e_var(std::string n) { Expr e{ExprKind::Var, 0, std::move(n)}; return std::make_shared<Expr>(std::move(e)); }
inline ExprPtr e_name(std::string n) { Expr e{ExprKind::Name, 0, std::move(n)}; return std::make_shared<Expr>(std::move(e)); }
inline ExprPtr e_app(std::string f, std::vector<ExprPtr> args) {
    Expr e{ExprKind::App, 0, std::move(f)};
    e.args = std::move(args);
    return std::make_shared<Expr>(std::move(e));
}
inline ExprPtr e_arith(std::string op, std::vector<ExprPtr> args) {
    Expr e{ExprKind::Arith, 0, std::move(op)};
    e.args = std::move(args);
    return std::make_shared<Expr>(std::move(e));
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind || a->sym != b->sym || a->num != b->num ||
        a->args.size() != b->args.size())
        return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Goal descriptions

struct Gd;
using GdPtr = std::shared_ptr<const Gd>;

enum class GdKind { True, Atom, Comp, Not, And, Or, Imply, Exists, Forall };

struct Gd {
    GdKind kind;
    std::string sym;            // Atom: predicate; Comp: one of < <= = >= >
    std::vector<ExprPtr> args;  // Atom args, or Comp {lhs, rhs}
    std::vector<GdPtr> sub;
    std::vector<TypedVar> binders;
};

inline GdPtr g_true() { return std::make_shared<Gd>(Gd{GdKind::True}); }
inline GdPtr g_atom(std::string p, std::vector<ExprPtr> args) {
    Gd g{GdKind::Atom, std::move(p), std::move(args)};
    return std::make_shared<Gd>(std::move(g));
}
inline GdPtr g_comp(std::string op, ExprPtr l, ExprPtr r) {
    Gd g{GdKind::Comp, std::move(op), {std::move(l), std::move(r)}};
    return std::make_shared<Gd>(std::move(g));
}
inline GdPtr g_not(GdPtr x) { Gd g{GdKind::Not}; g.sub = {std::move(x)}; return std::make_shared<Gd>(std::move(g)); }
inline GdPtr g_conn(GdKind k, std::vector<GdPtr> xs) {
    Gd g{k};
    g.sub = std::move(xs);
    return std::make_shared<Gd>(std::move(g));
}
inline GdPtr g_quant(GdKind k, std::vector<TypedVar> binders, GdPtr body) {
    Gd g{k};
    g.binders = std::move(binders);
    g.sub = {std::move(body)};
    return std::make_shared<Gd>(std::move(g));
}

// ---------------------------------------------------------------------------
// Effects

struct Effect;
using EffectPtr = std::shared_ptr<const Effect>;

enum class EffKind { And, Forall, When, Lit, Num };

struct Effect {
    EffKind kind;
    std::vector<EffectPtr> sub;      // And / Forall / When (single child)
    std::vector<TypedVar> binders;   // Forall
    GdPtr cond;                      // When
    // Lit
    std::string sym;
    std::vector<ExprPtr> args;
    bool positive = true;
    // Num: op in {assign, increase, decrease, scale-up, scale-down}
    std::string num_op;
    ExprPtr value;
};

// process effect entry, extracted from (increase <f-head> (* #t <f-exp>))
struct ProcEff {
    std::string fn;
    std::vector<ExprPtr> args;
    ExprPtr rate;  // the #t wrapper is consumed by parsing
};

enum class SchemaKind { Action, Event, Process };

struct Schema {
    SchemaKind kind;
    std::string name;
    std::vector<TypedVar> params;
    GdPtr pre;
    EffectPtr eff;               // actions/events
    std::vector<ProcEff> peff;   // processes
};

// ---------------------------------------------------------------------------
// Domain / Problem

struct Domain {
    std::string name;
    std::set<std::string> requirements;
    std::vector<std::pair<std::string, TypeExpr>> types;
    std::vector<TypedVar> constants;
    std::vector<PredSignature> predicates;
    std::vector<PredSignature> functions;
    std::vector<Schema> actions, events, processes;
};

struct GroundAtom {
    std::string sym;
    std::vector<std::string> args;
    bool operator==(const GroundAtom&) const = default;
};
struct InitAssign {
    std::string fn;
    std::vector<std::string> args;
    double value;
};
struct Til {
    double time;
    std::string sym;
    std::vector<std::string> args;
    bool positive;
};

struct Problem {
    std::string name, domain_name;
    std::vector<TypedVar> objects;
    std::vector<GroundAtom> init_atoms;
    std::vector<InitAssign> init_assigns;
    std::vector<Til> tils;
    GdPtr goal;
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool is_number(const std::string& a) {
    char* end = nullptr;
    std::strtod(a.c_str(), &end);
    return end && *end == '\0' && end != a.c_str();
}

inline std::string atom_of(const SNode& n) {
    if (!n.is_atom) throw parse_error("expected a name", n.line, n.col);
    return lower(n.atom);
}

// parse `<thing>+ [- TE]` groups into typed entries
inline std::vector<TypedVar> typed_list(const SNode& n, bool variables) {
    std::vector<TypedVar> out;
    std::vector<std::string> pending;
    auto parse_te = [](const SNode& t) {
        TypeExpr te;
        te.names.clear();
        if (t.is_atom) te.names.push_back(lower(t.atom));
        else {
            if (!t.head_is("either"))
                throw parse_error("expected a type name or (either ...)", t.line, t.col);
            for (size_t i = 1; i < t.size(); ++i) te.names.push_back(atom_of(t.at(i)));
            if (te.names.empty())
                throw parse_error("(either) needs at least one type", t.line, t.col);
        }
        return te;
    };
    for (size_t i = 0; i < n.size(); ++i) {
        const SNode& item = n.at(i);
        if (item.is_atom && item.atom == "-") {
            if (i + 1 >= n.size())
                throw parse_error("dangling '-' in typed list", item.line, item.col);
            TypeExpr te = parse_te(n.at(i + 1));
            for (auto& name : pending) out.push_back({name, te});
            pending.clear();
            ++i;
            continue;
        }
        std::string name = atom_of(item);
        if (variables) {
            if (name.empty() || name[0] != '?')
                throw parse_error("expected a ?variable", item.line, item.col);
            name = name.substr(1);
        }
        pending.push_back(name);
    }
    for (auto& name : pending) out.push_back({name, TypeExpr{}});  // default type object
    return out;
}

inline ExprPtr expr(const SNode& n) {
    if (n.is_atom) {
        std::string a = lower(n.atom);
        if (is_number(a)) return e_num(std::strtod(a.c_str(), nullptr));
        if (a[0] == '?') return e_var(a.substr(1));
        return e_name(a);
    }
    std::string h = atom_of(n.at(0));
    if (h == "+" || h == "-" || h == "*" || h == "/") {
        std::vector<ExprPtr> args;
        for (size_t i = 1; i < n.size(); ++i) args.push_back(expr(n.at(i)));
        if (args.empty())
            throw parse_error("arithmetic needs operands", n.line, n.col);
        return e_arith(h, std::move(args));
    }
    std::vector<ExprPtr> args;
    for (size_t i = 1; i < n.size(); ++i) args.push_back(expr(n.at(i)));
    return e_app(h, std::move(args));
}

inline GdPtr gd(const SNode& n) {
    if (n.is_atom)
        throw parse_error("expected a goal description", n.line, n.col);
    if (n.size() == 0) return g_true();
    std::string h = atom_of(n.at(0));
    if (h == "and" || h == "or") {
        std::vector<GdPtr> xs;
        for (size_t i = 1; i < n.size(); ++i) xs.push_back(gd(n.at(i)));
        if (h == "and" && xs.empty()) return g_true();
        return g_conn(h == "and" ? GdKind::And : GdKind::Or, std::move(xs));
    }
    if (h == "not") return g_not(gd(n.at(1)));
    if (h == "imply") return g_conn(GdKind::Imply, {gd(n.at(1)), gd(n.at(2))});
    if (h == "exists" || h == "forall") {
        auto binders = typed_list(n.at(1), true);
        return g_quant(h == "exists" ? GdKind::Exists : GdKind::Forall,
                       std::move(binders), gd(n.at(2)));
    }
    if (h == "<" || h == "<=" || h == "=" || h == ">=" || h == ">")
        return g_comp(h, expr(n.at(1)), expr(n.at(2)));
    std::vector<ExprPtr> args;
    for (size_t i = 1; i < n.size(); ++i) args.push_back(expr(n.at(i)));
    return g_atom(h, std::move(args));
}

inline EffectPtr effect(const SNode& n, bool inside_when = false) {
    if (n.is_atom)
        throw parse_error("expected an effect", n.line, n.col);
    Effect e{};
    if (n.size() == 0) { e.kind = EffKind::And; return std::make_shared<Effect>(std::move(e)); }
    std::string h = atom_of(n.at(0));
    if (h == "and") {
        e.kind = EffKind::And;
        for (size_t i = 1; i < n.size(); ++i) e.sub.push_back(effect(n.at(i), inside_when));
        return std::make_shared<Effect>(std::move(e));
    }
    if (h == "forall") {
        e.kind = EffKind::Forall;
        e.binders = typed_list(n.at(1), true);
        e.sub.push_back(effect(n.at(2), inside_when));
        return std::make_shared<Effect>(std::move(e));
    }
    if (h == "when") {
        if (inside_when)
            throw parse_error("nested (when ...) is not allowed", n.line, n.col);
        e.kind = EffKind::When;
        e.cond = gd(n.at(1));
        e.sub.push_back(effect(n.at(2), true));
        return std::make_shared<Effect>(std::move(e));
    }
    if (h == "assign" || h == "increase" || h == "decrease" ||
        h == "scale-up" || h == "scale-down") {
        e.kind = EffKind::Num;
        e.num_op = h;
        const SNode& head = n.at(1);
        if (head.is_atom)
            throw parse_error("numeric effect head must be a function term", head.line, head.col);
        e.sym = atom_of(head.at(0));
        for (size_t i = 1; i < head.size(); ++i) e.args.push_back(expr(head.at(i)));
        e.value = expr(n.at(2));
        return std::make_shared<Effect>(std::move(e));
    }
    if (h == "not") {
        const SNode& a = n.at(1);
        e.kind = EffKind::Lit;
        e.positive = false;
        e.sym = atom_of(a.at(0));
        for (size_t i = 1; i < a.size(); ++i) e.args.push_back(expr(a.at(i)));
        return std::make_shared<Effect>(std::move(e));
    }
    e.kind = EffKind::Lit;
    e.positive = true;
    e.sym = h;
    for (size_t i = 1; i < n.size(); ++i) e.args.push_back(expr(n.at(i)));
    return std::make_shared<Effect>(std::move(e));
}

// (and (increase <f-head> (* #t <f-exp>))*) -- the simplified grammar,
// enforced exactly
inline std::vector<ProcEff> process_effect(const SNode& n) {
    std::vector<ProcEff> out;
    std::vector<const SNode*> entries;
    if (n.head_is("and"))
        for (size_t i = 1; i < n.size(); ++i) entries.push_back(&n.at(i));
    else if (n.size() > 0)
        entries.push_back(&n);
    for (const SNode* pe : entries) {
        const SNode& x = *pe;
        if (!x.head_is("increase") || x.size() != 3)
            throw parse_error("process effect must be (increase <f-head> (* #t <f-exp>))",
                              x.line, x.col);
        ProcEff p;
        const SNode& head = x.at(1);
        if (head.is_atom)
            throw parse_error("process effect head must be a function term", head.line, head.col);
        p.fn = atom_of(head.at(0));
        for (size_t i = 1; i < head.size(); ++i) p.args.push_back(expr(head.at(i)));
        const SNode& rate = x.at(2);
        if (rate.is_atom || rate.size() != 3 || !rate.head_is("*") ||
            !rate.at(1).is_atom || lower(rate.at(1).atom) != "#t")
            throw parse_error("process effect rate must have the form (* #t <f-exp>)",
                              rate.line, rate.col);
        p.rate = expr(rate.at(2));
        out.push_back(std::move(p));
    }
    return out;
}

inline PredSignature signature(const SNode& n) {
    PredSignature s;
    s.name = atom_of(n.at(0));
    SNode rest = n;
    rest.list.erase(rest.list.begin());
    s.params = typed_list(rest, true);
    return s;
}

inline Schema schema(const SNode& n, SchemaKind kind) {
    Schema s;
    s.kind = kind;
    s.name = atom_of(n.at(1));
    s.pre = g_true();
    size_t i = 2;
    bool saw_effect = false;
    SNode eff_node;
    while (i < n.size()) {
        std::string key = atom_of(n.at(i));
        if (i + 1 >= n.size())
            throw parse_error("missing value after " + key, n.at(i).line, n.at(i).col);
        const SNode& val = n.at(i + 1);
        if (key == ":parameters") s.params = typed_list(val, true);
        else if (key == ":precondition") s.pre = gd(val);
        else if (key == ":effect") { saw_effect = true; eff_node = val; }
        else throw parse_error("unknown schema section " + key, n.at(i).line, n.at(i).col);
        i += 2;
    }
    if (saw_effect) {
        if (kind == SchemaKind::Process) s.peff = process_effect(eff_node);
        else s.eff = effect(eff_node);
    } else if (kind != SchemaKind::Process) {
        Effect empty{};
        empty.kind = EffKind::And;
        s.eff = std::make_shared<Effect>(std::move(empty));
    }
    return s;
}

inline const std::set<std::string>& supported_requirements() {
    static const std::set<std::string> reqs = {
        ":adl", ":fluents", ":typing", ":timed-initial-literals",
        ":time", ":negative-preconditions",
        // members of :adl commonly spelled out
        ":strips", ":equality", ":disjunctive-preconditions",
        ":existential-preconditions", ":universal-preconditions",
        ":quantified-preconditions", ":conditional-effects",
    };
    return reqs;
}

} // namespace detail

inline Domain parse_domain(const std::string& text) {
    using namespace detail;
    SNode top = parse_sexpr(text);
    if (!top.head_is("define"))
        throw parse_error("expected (define (domain ...) ...)", top.line, top.col);
    Domain d;
    if (!top.at(1).head_is("domain"))
        throw parse_error("expected (domain <name>)", top.at(1).line, top.at(1).col);
    d.name = atom_of(top.at(1).at(1));
    for (size_t i = 2; i < top.size(); ++i) {
        const SNode& sec = top.at(i);
        if (sec.is_atom || sec.size() == 0 || !sec.at(0).is_atom)
            throw parse_error("expected a domain section", sec.line, sec.col);
        std::string key = atom_of(sec.at(0));
        if (key == ":requirements") {
            for (size_t j = 1; j < sec.size(); ++j) {
                std::string r = atom_of(sec.at(j));
                if (r == ":durative-actions")
                    throw parse_error("unsupported requirement :durative-actions "
                                      "(durative actions are not compiled)",
                                      sec.at(j).line, sec.at(j).col);
                if (!supported_requirements().count(r))
                    throw parse_error("unsupported requirement " + r, sec.at(j).line, sec.at(j).col);
                d.requirements.insert(r);
            }
        } else if (key == ":types") {
            SNode rest = sec;
            rest.list.erase(rest.list.begin());
            for (auto& tv : typed_list(rest, false))
                d.types.emplace_back(tv.name, tv.type);
        } else if (key == ":constants") {
            SNode rest = sec;
            rest.list.erase(rest.list.begin());
            d.constants = typed_list(rest, false);
        } else if (key == ":predicates") {
            for (size_t j = 1; j < sec.size(); ++j) d.predicates.push_back(signature(sec.at(j)));
        } else if (key == ":functions") {
            for (size_t j = 1; j < sec.size(); ++j) d.functions.push_back(signature(sec.at(j)));
        } else if (key == ":action") {
            d.actions.push_back(schema(sec, SchemaKind::Action));
        } else if (key == ":event") {
            d.events.push_back(schema(sec, SchemaKind::Event));
        } else if (key == ":process") {
            d.processes.push_back(schema(sec, SchemaKind::Process));
        } else if (key == ":durative-action") {
            throw parse_error("unsupported feature :durative-actions "
                              "(durative actions are not compiled)", sec.line, sec.col);
        } else {
            throw parse_error("unknown domain section " + key, sec.line, sec.col);
        }
    }
    return d;
}

inline Problem parse_problem(const std::string& text) {
    using namespace detail;
    SNode top = parse_sexpr(text);
    if (!top.head_is("define"))
        throw parse_error("expected (define (problem ...) ...)", top.line, top.col);
    Problem p;
    p.goal = g_true();
    if (!top.at(1).head_is("problem"))
        throw parse_error("expected (problem <name>)", top.at(1).line, top.at(1).col);
    p.name = atom_of(top.at(1).at(1));
    auto ground_args = [](const SNode& a) {
        std::vector<std::string> out;
        for (size_t i = 1; i < a.size(); ++i) out.push_back(detail::atom_of(a.at(i)));
        return out;
    };
    for (size_t i = 2; i < top.size(); ++i) {
        const SNode& sec = top.at(i);
        std::string key = atom_of(sec.at(0));
        if (key == ":domain") {
            p.domain_name = atom_of(sec.at(1));
        } else if (key == ":objects") {
            SNode rest = sec;
            rest.list.erase(rest.list.begin());
            p.objects = typed_list(rest, false);
        } else if (key == ":init") {
            for (size_t j = 1; j < sec.size(); ++j) {
                const SNode& e = sec.at(j);
                if (e.is_atom)
                    throw parse_error("init entry must be a list", e.line, e.col);
                std::string h = atom_of(e.at(0));
                if (h == "=") {
                    const SNode& head = e.at(1);
                    InitAssign ia;
                    ia.fn = atom_of(head.at(0));
                    ia.args = ground_args(head);
                    ia.value = std::strtod(atom_of(e.at(2)).c_str(), nullptr);
                    if (!is_number(atom_of(e.at(2))))
                        throw parse_error("init assignment value must be a number",
                                          e.at(2).line, e.at(2).col);
                    p.init_assigns.push_back(std::move(ia));
                } else if (h == "at" && e.size() == 3 && e.at(1).is_atom &&
                           is_number(atom_of(e.at(1)))) {
                    Til til;
                    til.time = std::strtod(atom_of(e.at(1)).c_str(), nullptr);
                    const SNode* lit = &e.at(2);
                    til.positive = true;
                    if (lit->head_is("not")) { til.positive = false; lit = &lit->at(1); }
                    til.sym = atom_of(lit->at(0));
                    til.args = ground_args(*lit);
                    p.tils.push_back(std::move(til));
                } else if (h == "not") {
                    // negative init literal: a closed-world no-op, accepted
                } else {
                    GroundAtom ga;
                    ga.sym = h;
                    ga.args = ground_args(e);
                    p.init_atoms.push_back(std::move(ga));
                }
            }
        } else if (key == ":goal") {
            p.goal = gd(sec.at(1));
        } else if (key == ":metric") {
            // ignored: plan metrics do not affect validation
        } else {
            throw parse_error("unknown problem section " + key, sec.line, sec.col);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Pretty printer (used by the re-parse round-trip property)

namespace detail {

inline void print_expr(std::ostream& os, const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Num: {
            std::ostringstream t;
            t << e->num;
            os << t.str();
            break;
        }
        case ExprKind::Var: os << "?" << e->sym; break;
        case ExprKind::Name: os << e->sym; break;
        case ExprKind::App:
        case ExprKind::Arith:
            os << "(" << e->sym;
            for (const auto& a : e->args) { os << " "; print_expr(os, a); }
            os << ")";
            break;
    }
}

inline void print_type(std::ostream& os, const TypeExpr& te) {
    if (!te.is_either()) { os << te.names[0]; return; }
    os << "(either";
    for (const auto& n : te.names) os << " " << n;
    os << ")";
}

inline void print_typed_list(std::ostream& os, const std::vector<TypedVar>& vs, bool variables) {
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) os << " ";
        if (variables) os << "?";
        os << vs[i].name << " - ";
        print_type(os, vs[i].type);
    }
}

inline void print_gd(std::ostream& os, const GdPtr& g) {
    switch (g->kind) {
        case GdKind::True: os << "(and)"; break;
        case GdKind::Atom:
            os << "(" << g->sym;
            for (const auto& a : g->args) { os << " "; print_expr(os, a); }
            os << ")";
            break;
        case GdKind::Comp:
            os << "(" << g->sym << " ";
            print_expr(os, g->args[0]);
            os << " ";
            print_expr(os, g->args[1]);
            os << ")";
            break;
        case GdKind::Not:
            os << "(not ";
            print_gd(os, g->sub[0]);
            os << ")";
            break;
        case GdKind::And:
        case GdKind::Or:
            os << (g->kind == GdKind::And ? "(and" : "(or");
            for (const auto& x : g->sub) { os << " "; print_gd(os, x); }
            os << ")";
            break;
        case GdKind::Imply:
            os << "(imply ";
            print_gd(os, g->sub[0]);
            os << " ";
            print_gd(os, g->sub[1]);
            os << ")";
            break;
        case GdKind::Exists:
        case GdKind::Forall:
            os << (g->kind == GdKind::Exists ? "(exists (" : "(forall (");
            print_typed_list(os, g->binders, true);
            os << ") ";
            print_gd(os, g->sub[0]);
            os << ")";
            break;
    }
}

inline void print_effect(std::ostream& os, const EffectPtr& e) {
    switch (e->kind) {
        case EffKind::And:
            os << "(and";
            for (const auto& x : e->sub) { os << " "; print_effect(os, x); }
            os << ")";
            break;
        case EffKind::Forall:
            os << "(forall (";
            print_typed_list(os, e->binders, true);
            os << ") ";
            print_effect(os, e->sub[0]);
            os << ")";
            break;
        case EffKind::When:
            os << "(when ";
            print_gd(os, e->cond);
            os << " ";
            print_effect(os, e->sub[0]);
            os << ")";
            break;
        case EffKind::Lit:
            if (!e->positive) os << "(not ";
            os << "(" << e->sym;
            for (const auto& a : e->args) { os << " "; print_expr(os, a); }
            os << ")";
            if (!e->positive) os << ")";
            break;
        case EffKind::Num:
            os << "(" << e->num_op << " (" << e->sym;
            for (const auto& a : e->args) { os << " "; print_expr(os, a); }
            os << ") ";
            print_expr(os, e->value);
            os << ")";
            break;
    }
}

inline void print_signature(std::ostream& os, const PredSignature& s) {
    os << "(" << s.name;
    if (!s.params.empty()) { os << " "; print_typed_list(os, s.params, true); }
    os << ")";
}

} // namespace detail

inline std::string to_pddl(const Domain& d) {
    using namespace detail;
    std::ostringstream os;
    os << "(define (domain " << d.name << ")\n";
    if (!d.requirements.empty()) {
        os << "  (:requirements";
        for (const auto& r : d.requirements) os << " " << r;
        os << ")\n";
    }
    if (!d.types.empty()) {
        os << "  (:types";
        for (const auto& [t, te] : d.types) {
            os << " " << t << " - ";
            print_type(os, te);
        }
        os << ")\n";
    }
    if (!d.constants.empty()) {
        os << "  (:constants ";
        print_typed_list(os, d.constants, false);
        os << ")\n";
    }
    if (!d.predicates.empty()) {
        os << "  (:predicates";
        for (const auto& p : d.predicates) { os << " "; print_signature(os, p); }
        os << ")\n";
    }
    if (!d.functions.empty()) {
        os << "  (:functions";
        for (const auto& f : d.functions) { os << " "; print_signature(os, f); }
        os << ")\n";
    }
    auto print_schema = [&](const Schema& s) {
        const char* kw = s.kind == SchemaKind::Action ? ":action"
                       : s.kind == SchemaKind::Event ? ":event" : ":process";
        os << "  (" << kw << " " << s.name << "\n    :parameters (";
        print_typed_list(os, s.params, true);
        os << ")\n    :precondition ";
        print_gd(os, s.pre);
        os << "\n    :effect ";
        if (s.kind == SchemaKind::Process) {
            os << "(and";
            for (const auto& pe : s.peff) {
                os << " (increase (" << pe.fn;
                for (const auto& a : pe.args) { os << " "; print_expr(os, a); }
                os << ") (* #t ";
                print_expr(os, pe.rate);
                os << "))";
            }
            os << ")";
        } else {
            print_effect(os, s.eff);
        }
        os << ")\n";
    };
    for (const auto& s : d.actions) print_schema(s);
    for (const auto& s : d.events) print_schema(s);
    for (const auto& s : d.processes) print_schema(s);
    os << ")\n";
    return os.str();
}

inline std::string to_pddl(const Problem& p) {
    using namespace detail;
    std::ostringstream os;
    os << "(define (problem " << p.name << ")\n  (:domain " << p.domain_name << ")\n";
    if (!p.objects.empty()) {
        os << "  (:objects ";
        print_typed_list(os, p.objects, false);
        os << ")\n";
    }
    os << "  (:init";
    auto atom = [&](const std::string& sym, const std::vector<std::string>& args) {
        os << "(" << sym;
        for (const auto& a : args) os << " " << a;
        os << ")";
    };
    for (const auto& ga : p.init_atoms) { os << " "; atom(ga.sym, ga.args); }
    for (const auto& ia : p.init_assigns) {
        os << " (= ";
        atom(ia.fn, ia.args);
        std::ostringstream v;
        v << ia.value;
        os << " " << v.str() << ")";
    }
    for (const auto& til : p.tils) {
        std::ostringstream v;
        v << til.time;
        os << " (at " << v.str() << " ";
        if (!til.positive) os << "(not ";
        atom(til.sym, til.args);
        if (!til.positive) os << ")";
        os << ")";
    }
    os << ")\n  (:goal ";
    print_gd(os, p.goal);
    os << ")\n)\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Linking

struct PlanningInstance {
    Domain dom;
    Problem prob;

    // resolved views
    std::map<std::string, TypeExpr> object_types;           // O ∪ C
    std::map<std::string, size_t> pred_arity, fn_arity;
    std::map<std::string, std::set<std::string>> supertypes; // type -> ancestors incl. self
    std::vector<std::string> objects_sorted;                  // deterministic order

    bool is_subtype(const std::string& t, const std::string& super) const {
        auto it = supertypes.find(t);
        return it != supertypes.end() && it->second.count(super);
    }
    bool object_has_type(const std::string& obj, const std::string& type) const {
        auto it = object_types.find(obj);
        if (it == object_types.end()) return false;
        for (const auto& t : it->second.names)
            if (is_subtype(t, type)) return true;
        return false;
    }
    bool object_matches(const std::string& obj, const TypeExpr& te) const {
        for (const auto& t : te.names)
            if (object_has_type(obj, t)) return true;
        return false;
    }
    std::vector<std::string> objects_of(const TypeExpr& te) const {
        std::vector<std::string> out;
        for (const auto& o : objects_sorted)
            if (object_matches(o, te)) out.push_back(o);
        return out;
    }
};

namespace detail {

struct Linker {
    const Domain& dom;
    const Problem& prob;
    PlanningInstance& inst;

    std::set<std::string> type_names, pred_names, fn_names, proc_names;

    void fail(const std::string& msg) { throw link_error(msg); }

    void build_types() {
        type_names.insert("object");
        for (const auto& [t, _] : dom.types)
            if (!type_names.insert(t).second) fail("type '" + t + "' declared twice");
        // parents used without their own declaration are implicitly declared
        for (const auto& [t, te] : dom.types)
            for (const auto& p : te.names) type_names.insert(p);
        // ancestor closure
        for (const auto& t : type_names) inst.supertypes[t] = {t, "object"};
        bool changed = true;
        size_t rounds = 0;
        while (changed) {
            changed = false;
            if (++rounds > type_names.size() + 2) fail("cycle in type hierarchy");
            for (const auto& [t, te] : dom.types)
                for (const auto& p : te.names)
                    for (const auto& anc : inst.supertypes[p])
                        if (inst.supertypes[t].insert(anc).second) changed = true;
        }
        for (const auto& [t, te] : dom.types)
            for (const auto& p : te.names) {
                if (p == t) fail("type '" + t + "' lists itself as parent");
                if (inst.supertypes[p].count(t)) fail("cycle in type hierarchy");
            }
    }

    void check_type_expr(const TypeExpr& te, const std::string& where) {
        for (const auto& n : te.names)
            if (!type_names.count(n))
                fail(where + ": undeclared type '" + n + "'");
    }

    void build_symbols() {
        for (const auto& p : dom.predicates) {
            if (type_names.count(p.name))
                fail("predicate '" + p.name + "' collides with a type name");
            if (!pred_names.insert(p.name).second)
                fail("predicate '" + p.name + "' declared twice");
            inst.pred_arity[p.name] = p.params.size();
            for (const auto& v : p.params) check_type_expr(v.type, "predicate " + p.name);
        }
        for (const auto& f : dom.functions) {
            if (type_names.count(f.name) || pred_names.count(f.name))
                fail("function '" + f.name + "' collides with another symbol");
            if (!fn_names.insert(f.name).second)
                fail("function '" + f.name + "' declared twice");
            inst.fn_arity[f.name] = f.params.size();
            for (const auto& v : f.params) check_type_expr(v.type, "function " + f.name);
        }
        auto add_objects = [&](const std::vector<TypedVar>& objs, const char* where) {
            for (const auto& o : objs) {
                if (type_names.count(o.name) || pred_names.count(o.name) || fn_names.count(o.name))
                    fail(std::string(where) + " '" + o.name + "' collides with another symbol");
                if (inst.object_types.count(o.name))
                    fail(std::string(where) + " '" + o.name + "' declared twice");
                check_type_expr(o.type, std::string(where) + " " + o.name);
                inst.object_types[o.name] = o.type;
            }
        };
        add_objects(dom.constants, "constant");
        add_objects(prob.objects, "object");
        for (const auto& [o, _] : inst.object_types) inst.objects_sorted.push_back(o);
        for (const auto& s : dom.processes) proc_names.insert(s.name);
    }

    void check_expr(const ExprPtr& e, const std::set<std::string>& scope,
                    const std::string& where) {
        switch (e->kind) {
            case ExprKind::Num: return;
            case ExprKind::Var:
                if (!scope.count(e->sym))
                    fail(where + ": unbound variable ?" + e->sym);
                return;
            case ExprKind::Name:
                if (!inst.object_types.count(e->sym))
                    fail(where + ": unknown object '" + e->sym + "'");
                return;
            case ExprKind::App: {
                auto it = inst.fn_arity.find(e->sym);
                if (it == inst.fn_arity.end())
                    fail(where + ": unknown function '" + e->sym + "'");
                if (it->second != e->args.size())
                    fail(where + ": function '" + e->sym + "' expects " +
                         std::to_string(it->second) + " arguments");
                for (const auto& a : e->args) check_expr(a, scope, where);
                return;
            }
            case ExprKind::Arith:
                for (const auto& a : e->args) check_expr(a, scope, where);
                return;
        }
    }

    void check_gd(const GdPtr& g, std::set<std::string> scope, const std::string& where) {
        switch (g->kind) {
            case GdKind::True: return;
            case GdKind::Atom: {
                if (proc_names.count(g->sym))
                    fail(where + ": process '" + g->sym + "' may not appear in a goal description");
                auto it = inst.pred_arity.find(g->sym);
                if (it == inst.pred_arity.end()) {
                    // a typed-list type name used as unary predicate is fine
                    if (type_names.count(g->sym) && g->args.size() == 1) {
                        check_expr(g->args[0], scope, where);
                        return;
                    }
                    fail(where + ": unknown predicate '" + g->sym + "'");
                }
                if (it->second != g->args.size())
                    fail(where + ": predicate '" + g->sym + "' expects " +
                         std::to_string(it->second) + " arguments");
                for (const auto& a : g->args) check_expr(a, scope, where);
                return;
            }
            case GdKind::Comp:
                check_expr(g->args[0], scope, where);
                check_expr(g->args[1], scope, where);
                return;
            case GdKind::Exists:
            case GdKind::Forall:
                for (const auto& b : g->binders) {
                    check_type_expr(b.type, where);
                    scope.insert(b.name);
                }
                check_gd(g->sub[0], scope, where);
                return;
            default:
                for (const auto& x : g->sub) check_gd(x, scope, where);
        }
    }

    void check_effect(const EffectPtr& e, std::set<std::string> scope, const std::string& where) {
        switch (e->kind) {
            case EffKind::And:
                for (const auto& x : e->sub) check_effect(x, scope, where);
                return;
            case EffKind::Forall:
                for (const auto& b : e->binders) {
                    check_type_expr(b.type, where);
                    scope.insert(b.name);
                }
                check_effect(e->sub[0], scope, where);
                return;
            case EffKind::When:
                check_gd(e->cond, scope, where);
                check_effect(e->sub[0], scope, where);
                return;
            case EffKind::Lit: {
                auto it = inst.pred_arity.find(e->sym);
                if (it == inst.pred_arity.end())
                    fail(where + ": unknown predicate '" + e->sym + "' in effect");
                if (it->second != e->args.size())
                    fail(where + ": predicate '" + e->sym + "' expects " +
                         std::to_string(it->second) + " arguments");
                for (const auto& a : e->args) check_expr(a, scope, where);
                return;
            }
            case EffKind::Num: {
                auto it = inst.fn_arity.find(e->sym);
                if (it == inst.fn_arity.end())
                    fail(where + ": unknown function '" + e->sym + "' in effect");
                if (it->second != e->args.size())
                    fail(where + ": function '" + e->sym + "' expects " +
                         std::to_string(it->second) + " arguments");
                for (const auto& a : e->args) check_expr(a, scope, where);
                check_expr(e->value, scope, where);
                return;
            }
        }
    }

    void check_schema(const Schema& s) {
        std::string where = (s.kind == SchemaKind::Action ? "action "
                             : s.kind == SchemaKind::Event ? "event " : "process ") + s.name;
        std::set<std::string> scope;
        for (const auto& p : s.params) {
            check_type_expr(p.type, where);
            scope.insert(p.name);
        }
        check_gd(s.pre, scope, where);
        if (s.kind == SchemaKind::Process) {
            for (const auto& pe : s.peff) {
                auto it = inst.fn_arity.find(pe.fn);
                if (it == inst.fn_arity.end())
                    fail(where + ": unknown function '" + pe.fn + "' in process effect");
                if (it->second != pe.args.size())
                    fail(where + ": function '" + pe.fn + "' expects " +
                         std::to_string(it->second) + " arguments");
                for (const auto& a : pe.args) check_expr(a, scope, where);
                check_expr(pe.rate, scope, where);
            }
        } else {
            check_effect(s.eff, scope, where);
        }
    }

    void check_problem() {
        for (const auto& ga : prob.init_atoms) {
            auto it = inst.pred_arity.find(ga.sym);
            if (it == inst.pred_arity.end())
                fail("init: unknown predicate '" + ga.sym + "'");
            if (it->second != ga.args.size())
                fail("init: predicate '" + ga.sym + "' expects " +
                     std::to_string(it->second) + " arguments");
            for (const auto& a : ga.args)
                if (!inst.object_types.count(a)) fail("init: unknown object '" + a + "'");
        }
        for (const auto& ia : prob.init_assigns) {
            auto it = inst.fn_arity.find(ia.fn);
            if (it == inst.fn_arity.end())
                fail("init: unknown function '" + ia.fn + "'");
            if (it->second != ia.args.size())
                fail("init: function '" + ia.fn + "' expects " +
                     std::to_string(it->second) + " arguments");
            for (const auto& a : ia.args)
                if (!inst.object_types.count(a)) fail("init: unknown object '" + a + "'");
        }
        for (const auto& til : prob.tils) {
            auto it = inst.pred_arity.find(til.sym);
            if (it == inst.pred_arity.end())
                fail("init: unknown predicate '" + til.sym + "' in timed initial literal");
            if (it->second != til.args.size())
                fail("init: predicate '" + til.sym + "' expects " +
                     std::to_string(it->second) + " arguments");
        }
        check_gd(prob.goal, {}, "goal");
    }

    void run() {
        build_types();
        build_symbols();
        for (const auto& s : dom.actions) check_schema(s);
        for (const auto& s : dom.events) check_schema(s);
        for (const auto& s : dom.processes) check_schema(s);
        check_problem();
    }
};

} // namespace detail

inline PlanningInstance link(Domain dom, Problem prob) {
    PlanningInstance inst;
    inst.dom = std::move(dom);
    inst.prob = std::move(prob);
    detail::Linker lk{inst.dom, inst.prob, inst};
    lk.run();
    return inst;
}

} // namespace hsc::pddl
