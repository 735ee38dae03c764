#pragma once

// Sorted logical AST for situation-calculus terms and formulas.
//
// Terms and formulas are immutable nodes behind shared_ptr<const ...>;
// builders check sorts at construction time.  The canonical text form is
// a prefix s-expression (documented in docs/axiom-format.md) printed
// after canonical variable renaming, so alpha-equivalent axioms
// serialize identically.

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/sexpr.hpp"

namespace hsc {

enum class Sort { Object, Real, Action, Situation };
// Time is an alias of Real.
inline constexpr Sort Time = Sort::Real;

inline const char* sort_name(Sort s) {
    switch (s) {
        case Sort::Object: return "object";
        case Sort::Real: return "real";
        case Sort::Action: return "action";
        case Sort::Situation: return "situation";
    }
    return "?";
}

struct sort_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Terms

enum class TermKind {
    Variable, Constant, RealLit, FuncApp, ActionApp,
    Do, S0, Start, TimeOf, Integral, Arith
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    TermKind kind;
    Sort sort;
    std::string sym;            // variable/constant/function/action name, or arith op
    double num = 0.0;           // RealLit
    std::vector<TermPtr> args;  // Integral: {integrand, lower, upper}, sym = bound var
};

inline TermPtr mk_var(std::string name, Sort sort) {
    return std::make_shared<Term>(Term{TermKind::Variable, sort, std::move(name)});
}
inline TermPtr mk_const(std::string name) {
    return std::make_shared<Term>(Term{TermKind::Constant, Sort::Object, std::move(name)});
}
inline TermPtr mk_real(double v) {
    Term t{TermKind::RealLit, Sort::Real, ""};
    t.num = v;
    return std::make_shared<Term>(std::move(t));
}
inline TermPtr mk_func(std::string sym, std::vector<TermPtr> args, Sort sort = Sort::Real) {
    Term t{TermKind::FuncApp, sort, std::move(sym)};
    t.args = std::move(args);
    return std::make_shared<Term>(std::move(t));
}
// args = object arguments followed by the time term.
inline TermPtr mk_action(std::string sym, std::vector<TermPtr> args) {
    if (args.empty() || args.back()->sort != Sort::Real)
        throw sort_error("action term '" + sym + "' needs a trailing time argument");
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i]->sort != Sort::Object)
            throw sort_error("action term '" + sym + "': object argument expected");
    Term t{TermKind::ActionApp, Sort::Action, std::move(sym)};
    t.args = std::move(args);
    return std::make_shared<Term>(std::move(t));
}
inline TermPtr mk_do(TermPtr a, TermPtr s) {
    if (a->sort != Sort::Action || s->sort != Sort::Situation)
        throw sort_error("do(a,s) expects an action and a situation");
    Term t{TermKind::Do, Sort::Situation, "do"};
    t.args = {std::move(a), std::move(s)};
    return std::make_shared<Term>(std::move(t));
}
inline TermPtr mk_s0() {
    return std::make_shared<Term>(Term{TermKind::S0, Sort::Situation, "s0"});
}
inline TermPtr mk_start(TermPtr s) {
    if (s->sort != Sort::Situation) throw sort_error("start() expects a situation");
    Term t{TermKind::Start, Sort::Real, "start"};
    t.args = {std::move(s)};
    return std::make_shared<Term>(std::move(t));
}
inline TermPtr mk_time_of(TermPtr a) {
    if (a->sort != Sort::Action) throw sort_error("time() expects an action");
    Term t{TermKind::TimeOf, Sort::Real, "time"};
    t.args = {std::move(a)};
    return std::make_shared<Term>(std::move(t));
}
inline TermPtr mk_integral(std::string bound_var, TermPtr integrand, TermPtr lower, TermPtr upper) {
    if (integrand->sort != Sort::Real || lower->sort != Sort::Real || upper->sort != Sort::Real)
        throw sort_error("integral parts must have sort real");
    Term t{TermKind::Integral, Sort::Real, std::move(bound_var)};
    t.args = {std::move(integrand), std::move(lower), std::move(upper)};
    return std::make_shared<Term>(std::move(t));
}
// op in {+,-,*,/}; unary "-" is negation.
inline TermPtr mk_arith(std::string op, std::vector<TermPtr> args) {
    for (const auto& a : args)
        if (a->sort != Sort::Real) throw sort_error("arithmetic over non-real term");
    Term t{TermKind::Arith, Sort::Real, std::move(op)};
    t.args = std::move(args);
    return std::make_shared<Term>(std::move(t));
}

// ---------------------------------------------------------------------------
// Formulas

enum class FormulaKind {
    Pred,       // static predicate or type predicate over object terms
    Fluent,     // relational fluent: object args + trailing situation term
    Compare,    // sym in {<,<=,=,>=,>}
    Not, And, Or, Implies, Iff, Exists, Forall,
    Poss,       // terms = {action, situation}
    Natural     // terms = {action}
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind;
    std::string sym;
    std::vector<TermPtr> terms;
    std::vector<FormulaPtr> sub;
    std::vector<std::pair<std::string, Sort>> binders;  // Exists/Forall
};

inline FormulaPtr mk_pred(std::string sym, std::vector<TermPtr> args) {
    for (const auto& a : args)
        if (a->sort != Sort::Object)
            throw sort_error("predicate '" + sym + "' expects object arguments");
    Formula f{FormulaKind::Pred, std::move(sym), std::move(args)};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_fluent(std::string sym, std::vector<TermPtr> args) {
    if (args.empty() || args.back()->sort != Sort::Situation)
        throw sort_error("fluent '" + sym + "' needs a trailing situation argument");
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i]->sort != Sort::Object)
            throw sort_error("fluent '" + sym + "': object argument expected");
    Formula f{FormulaKind::Fluent, std::move(sym), std::move(args)};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_cmp(std::string op, TermPtr lhs, TermPtr rhs) {
    bool eq = op == "=";
    if (lhs->sort != rhs->sort)
        throw sort_error("comparison between different sorts");
    if (!eq && lhs->sort != Sort::Real)
        throw sort_error("ordering comparison over non-real terms");
    Formula f{FormulaKind::Compare, std::move(op), {std::move(lhs), std::move(rhs)}};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_not(FormulaPtr g) {
    Formula f{FormulaKind::Not, "", {}, {std::move(g)}};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_and(std::vector<FormulaPtr> gs) {
    Formula f{FormulaKind::And, "", {}, std::move(gs)};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_or(std::vector<FormulaPtr> gs) {
    Formula f{FormulaKind::Or, "", {}, std::move(gs)};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b) {
    Formula f{FormulaKind::Implies, "", {}, {std::move(a), std::move(b)}};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b) {
    Formula f{FormulaKind::Iff, "", {}, {std::move(a), std::move(b)}};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_exists(std::vector<std::pair<std::string, Sort>> binders, FormulaPtr body) {
    Formula f{FormulaKind::Exists, "", {}, {std::move(body)}};
    f.binders = std::move(binders);
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_forall(std::vector<std::pair<std::string, Sort>> binders, FormulaPtr body) {
    Formula f{FormulaKind::Forall, "", {}, {std::move(body)}};
    f.binders = std::move(binders);
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_poss(TermPtr action, TermPtr sit) {
    if (action->sort != Sort::Action || sit->sort != Sort::Situation)
        throw sort_error("poss(a,s) expects an action and a situation");
    Formula f{FormulaKind::Poss, "", {std::move(action), std::move(sit)}};
    return std::make_shared<Formula>(std::move(f));
}
inline FormulaPtr mk_natural(TermPtr action) {
    if (action->sort != Sort::Action) throw sort_error("natural() expects an action");
    Formula f{FormulaKind::Natural, "", {std::move(action)}};
    return std::make_shared<Formula>(std::move(f));
}

inline FormulaPtr mk_true() { return mk_and({}); }
inline FormulaPtr mk_false() { return mk_or({}); }

// Flattening conjunction/disjunction used by the compiler so emitted
// axioms do not carry degenerate (and)/(or) wrappers.
inline FormulaPtr conj(std::vector<FormulaPtr> gs) {
    std::vector<FormulaPtr> flat;
    for (auto& g : gs) {
        if (g->kind == FormulaKind::And)
            flat.insert(flat.end(), g->sub.begin(), g->sub.end());
        else
            flat.push_back(std::move(g));
    }
    if (flat.size() == 1) return flat[0];
    return mk_and(std::move(flat));
}
inline FormulaPtr disj(std::vector<FormulaPtr> gs) {
    std::vector<FormulaPtr> flat;
    for (auto& g : gs) {
        if (g->kind == FormulaKind::Or)
            flat.insert(flat.end(), g->sub.begin(), g->sub.end());
        else
            flat.push_back(std::move(g));
    }
    if (flat.size() == 1) return flat[0];
    return mk_or(std::move(flat));
}

// ---------------------------------------------------------------------------
// Axioms

enum class AxiomKind {
    Apa, Ssa, Sea, Una, TypeAxiom, DomainClosure, Init, NaturalDecl, TimeAxiom, GoalDef
};

inline const char* axiom_kind_name(AxiomKind k) {
    switch (k) {
        case AxiomKind::Apa: return "apa";
        case AxiomKind::Ssa: return "ssa";
        case AxiomKind::Sea: return "sea";
        case AxiomKind::Una: return "una";
        case AxiomKind::TypeAxiom: return "type";
        case AxiomKind::DomainClosure: return "closure";
        case AxiomKind::Init: return "init";
        case AxiomKind::NaturalDecl: return "natural";
        case AxiomKind::TimeAxiom: return "time";
        case AxiomKind::GoalDef: return "goal";
    }
    return "?";
}

struct Axiom {
    AxiomKind kind;
    std::string subject;  // symbol the axiom is about
    FormulaPtr formula;
};

// ---------------------------------------------------------------------------
// Structural equality

inline bool equal(const TermPtr& a, const TermPtr& b);
inline bool equal(const FormulaPtr& a, const FormulaPtr& b);

inline bool equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->sort != b->sort || a->sym != b->sym) return false;
    if (a->kind == TermKind::RealLit && a->num != b->num) return false;
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
    return true;
}

inline bool equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->sym != b->sym) return false;
    if (a->terms.size() != b->terms.size() || a->sub.size() != b->sub.size() ||
        a->binders != b->binders)
        return false;
    for (size_t i = 0; i < a->terms.size(); ++i)
        if (!equal(a->terms[i], b->terms[i])) return false;
    for (size_t i = 0; i < a->sub.size(); ++i)
        if (!equal(a->sub[i], b->sub[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Free variables

namespace detail {

inline void free_vars_term(const TermPtr& t, std::set<std::string>& bound,
                           std::map<std::string, Sort>& out) {
    switch (t->kind) {
        case TermKind::Variable:
            if (!bound.count(t->sym)) out.emplace(t->sym, t->sort);
            break;
        case TermKind::Integral: {
            // bound variable is free in the integrand only
            bool was = bound.count(t->sym) > 0;
            bound.insert(t->sym);
            free_vars_term(t->args[0], bound, out);
            if (!was) bound.erase(t->sym);
            free_vars_term(t->args[1], bound, out);
            free_vars_term(t->args[2], bound, out);
            break;
        }
        default:
            for (const auto& a : t->args) free_vars_term(a, bound, out);
    }
}

inline void free_vars_formula(const FormulaPtr& f, std::set<std::string>& bound,
                              std::map<std::string, Sort>& out) {
    if (f->kind == FormulaKind::Exists || f->kind == FormulaKind::Forall) {
        std::vector<std::string> added;
        for (const auto& [name, sort] : f->binders)
            if (bound.insert(name).second) added.push_back(name);
        free_vars_formula(f->sub[0], bound, out);
        for (const auto& n : added) bound.erase(n);
        return;
    }
    for (const auto& t : f->terms) free_vars_term(t, bound, out);
    for (const auto& g : f->sub) free_vars_formula(g, bound, out);
}

} // namespace detail

inline std::map<std::string, Sort> free_vars(const FormulaPtr& f) {
    std::map<std::string, Sort> out;
    std::set<std::string> bound;
    detail::free_vars_formula(f, bound, out);
    return out;
}
inline std::map<std::string, Sort> free_vars(const TermPtr& t) {
    std::map<std::string, Sort> out;
    std::set<std::string> bound;
    detail::free_vars_term(t, bound, out);
    return out;
}

// ---------------------------------------------------------------------------
// Substitution (capture-avoiding, sort-checked)

using Binding = std::map<std::string, TermPtr>;

namespace detail {

inline TermPtr subst_term(const TermPtr& t, const Binding& b);
inline FormulaPtr subst_formula(const FormulaPtr& f, const Binding& b);

inline std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    for (int i = 1;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (!taken.count(cand)) return cand;
    }
}

inline TermPtr subst_term(const TermPtr& t, const Binding& b) {
    switch (t->kind) {
        case TermKind::Variable: {
            auto it = b.find(t->sym);
            if (it == b.end()) return t;
            if (it->second->sort != t->sort)
                throw sort_error("substitution changes sort of variable '" + t->sym + "'");
            return it->second;
        }
        case TermKind::Integral: {
            Binding inner = b;
            inner.erase(t->sym);
            std::string bound = t->sym;
            TermPtr body = t->args[0];
            // rename the bound variable if some replacement captures it
            std::set<std::string> clash;
            for (const auto& [k, v] : inner)
                for (const auto& [fv, _] : free_vars(v)) clash.insert(fv);
            if (clash.count(bound)) {
                std::string nb = fresh_name(bound, clash);
                Binding ren{{bound, mk_var(nb, Sort::Real)}};
                body = subst_term(body, ren);
                bound = nb;
            }
            return mk_integral(bound, subst_term(body, inner),
                               subst_term(t->args[1], b), subst_term(t->args[2], b));
        }
        default: {
            if (t->args.empty()) return t;
            Term copy = *t;
            for (auto& a : copy.args) a = subst_term(a, b);
            return std::make_shared<Term>(std::move(copy));
        }
    }
}

inline FormulaPtr subst_formula(const FormulaPtr& f, const Binding& b) {
    if (f->kind == FormulaKind::Exists || f->kind == FormulaKind::Forall) {
        Binding inner = b;
        for (const auto& [name, _] : f->binders) inner.erase(name);
        std::set<std::string> clash;
        for (const auto& [k, v] : inner)
            for (const auto& [fv, _] : free_vars(v)) clash.insert(fv);
        auto binders = f->binders;
        FormulaPtr body = f->sub[0];
        Binding ren;
        for (auto& [name, sort] : binders) {
            if (clash.count(name)) {
                std::string nb = fresh_name(name, clash);
                ren[name] = mk_var(nb, sort);
                name = nb;
            }
        }
        if (!ren.empty()) body = subst_formula(body, ren);
        body = subst_formula(body, inner);
        return f->kind == FormulaKind::Exists ? mk_exists(std::move(binders), body)
                                              : mk_forall(std::move(binders), body);
    }
    Formula copy = *f;
    for (auto& t : copy.terms) t = subst_term(t, b);
    for (auto& g : copy.sub) g = subst_formula(g, b);
    return std::make_shared<Formula>(std::move(copy));
}

} // namespace detail

inline FormulaPtr substitute(const FormulaPtr& f, const Binding& b) {
    return detail::subst_formula(f, b);
}
inline TermPtr substitute(const TermPtr& t, const Binding& b) {
    return detail::subst_term(t, b);
}

// ---------------------------------------------------------------------------
// Uniformity check (Reiter): the formula mentions no Poss, no situation
// quantification or equality, and no situation term other than the given
// situation variable.

namespace detail {

inline bool uniform_term(const TermPtr& t, const std::string& s) {
    switch (t->kind) {
        case TermKind::Do:
        case TermKind::S0:
            return false;
        case TermKind::Variable:
            return t->sort != Sort::Situation || t->sym == s;
        default:
            for (const auto& a : t->args)
                if (!uniform_term(a, s)) return false;
            return true;
    }
}

inline bool uniform_formula(const FormulaPtr& f, const std::string& s) {
    switch (f->kind) {
        case FormulaKind::Poss:
            return false;
        case FormulaKind::Compare:
            if (f->terms[0]->sort == Sort::Situation) return false;  // situation equality
            break;
        case FormulaKind::Exists:
        case FormulaKind::Forall:
            for (const auto& [_, sort] : f->binders)
                if (sort == Sort::Situation) return false;
            break;
        default:
            break;
    }
    for (const auto& t : f->terms)
        if (!uniform_term(t, s)) return false;
    for (const auto& g : f->sub)
        if (!uniform_formula(g, s)) return false;
    return true;
}

} // namespace detail

inline bool check_uniform(const FormulaPtr& phi, const std::string& situation_var) {
    return detail::uniform_formula(phi, situation_var);
}

// ---------------------------------------------------------------------------
// Canonical renaming + printing

inline std::string real_to_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

// Canonical renaming: every variable instance (binders in binder-list
// order, free variables at first occurrence) gets a per-sort name.  When a
// sort has a single instance in the axiom the bare prefix is used ("t"),
// otherwise numbered names ("t1", "t2", ...).
struct Renamer {
    std::vector<Sort> instance_sorts;                 // pass 1 result
    std::map<std::string, std::string> final_names;   // instance key -> name
    bool assign_pass = false;

    std::map<std::string, int> free_ids;  // free var name -> instance id
    int next_id = 0;

    static const char* prefix(Sort s) {
        switch (s) {
            case Sort::Object: return "x";
            case Sort::Real: return "t";
            case Sort::Action: return "a";
            case Sort::Situation: return "s";
        }
        return "v";
    }

    std::string key(int id) const { return "#" + std::to_string(id); }

    int new_instance(Sort sort) {
        int id = next_id++;
        if (!assign_pass) instance_sorts.push_back(sort);
        return id;
    }

    std::string name_of(int id) const { return final_names.at(key(id)); }

    void compute_names() {
        std::map<Sort, int> totals, counters;
        for (Sort s : instance_sorts) totals[s]++;
        for (size_t i = 0; i < instance_sorts.size(); ++i) {
            Sort s = instance_sorts[i];
            int n = ++counters[s];
            std::string nm = prefix(s);
            if (totals[s] > 1) nm += std::to_string(n);
            final_names[key(int(i))] = nm;
        }
    }

    using Env = std::map<std::string, int>;  // source name -> instance id

    TermPtr rename(const TermPtr& t, Env& env) {
        switch (t->kind) {
            case TermKind::Variable: {
                auto it = env.find(t->sym);
                int id;
                if (it != env.end()) id = it->second;
                else {
                    auto fit = free_ids.find(t->sym);
                    if (fit != free_ids.end()) id = fit->second;
                    else { id = new_instance(t->sort); free_ids[t->sym] = id; }
                }
                return assign_pass ? mk_var(name_of(id), t->sort) : t;
            }
            case TermKind::Integral: {
                int id = new_instance(Sort::Real);
                Env inner = env;
                inner[t->sym] = id;
                auto body = rename(t->args[0], inner);
                auto lo = rename(t->args[1], env);
                auto hi = rename(t->args[2], env);
                return assign_pass ? mk_integral(name_of(id), body, lo, hi) : t;
            }
            default: {
                Term copy = *t;
                for (auto& a : copy.args) a = rename(a, env);
                return assign_pass ? std::make_shared<Term>(std::move(copy)) : t;
            }
        }
    }

    FormulaPtr rename(const FormulaPtr& f, Env& env) {
        if (f->kind == FormulaKind::Exists || f->kind == FormulaKind::Forall) {
            Env inner = env;
            auto binders = f->binders;
            for (auto& [name, sort] : binders) {
                int id = new_instance(sort);
                inner[name] = id;
                if (assign_pass) name = name_of(id);
            }
            auto body = rename(f->sub[0], inner);
            if (!assign_pass) return f;
            return f->kind == FormulaKind::Exists ? mk_exists(std::move(binders), body)
                                                  : mk_forall(std::move(binders), body);
        }
        Formula copy = *f;
        for (auto& t : copy.terms) t = rename(t, env);
        for (auto& g : copy.sub) g = rename(g, env);
        return assign_pass ? std::make_shared<Formula>(std::move(copy)) : f;
    }
};

} // namespace detail

inline FormulaPtr canonicalize(const FormulaPtr& f) {
    detail::Renamer r;
    detail::Renamer::Env env;
    r.rename(f, env);                // pass 1: collect instances
    r.compute_names();
    r.assign_pass = true;
    r.next_id = 0;
    r.free_ids.clear();
    detail::Renamer::Env env2;
    return r.rename(f, env2);        // pass 2: rebuild with final names
}

namespace detail {

inline void print_term(std::ostream& os, const TermPtr& t);
inline void print_formula(std::ostream& os, const FormulaPtr& f);

inline void print_term(std::ostream& os, const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Variable:
        case TermKind::Constant:
            os << t->sym;
            break;
        case TermKind::RealLit:
            os << real_to_string(t->num);
            break;
        case TermKind::S0:
            os << "s0";
            break;
        case TermKind::Integral:
            os << "(integral " << t->sym << " ";
            print_term(os, t->args[1]);
            os << " ";
            print_term(os, t->args[2]);
            os << " ";
            print_term(os, t->args[0]);
            os << ")";
            break;
        default:
            os << "(" << t->sym;
            for (const auto& a : t->args) { os << " "; print_term(os, a); }
            os << ")";
    }
}

inline void print_binders(std::ostream& os, const std::vector<std::pair<std::string, Sort>>& bs) {
    os << "(";
    for (size_t i = 0; i < bs.size(); ++i) {
        if (i) os << " ";
        os << bs[i].first;
    }
    os << ")";
}

inline void print_formula(std::ostream& os, const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::Pred:
        case FormulaKind::Fluent:
            os << "(" << f->sym;
            for (const auto& t : f->terms) { os << " "; print_term(os, t); }
            os << ")";
            break;
        case FormulaKind::Compare:
            os << "(" << f->sym << " ";
            print_term(os, f->terms[0]);
            os << " ";
            print_term(os, f->terms[1]);
            os << ")";
            break;
        case FormulaKind::Not:
            os << "(not ";
            print_formula(os, f->sub[0]);
            os << ")";
            break;
        case FormulaKind::And:
        case FormulaKind::Or:
            os << (f->kind == FormulaKind::And ? "(and" : "(or");
            for (const auto& g : f->sub) { os << " "; print_formula(os, g); }
            os << ")";
            break;
        case FormulaKind::Implies:
            os << "(-> ";
            print_formula(os, f->sub[0]);
            os << " ";
            print_formula(os, f->sub[1]);
            os << ")";
            break;
        case FormulaKind::Iff:
            os << "(<-> ";
            print_formula(os, f->sub[0]);
            os << " ";
            print_formula(os, f->sub[1]);
            os << ")";
            break;
        case FormulaKind::Exists:
        case FormulaKind::Forall:
            os << (f->kind == FormulaKind::Exists ? "(exists " : "(forall ");
            print_binders(os, f->binders);
            os << " ";
            print_formula(os, f->sub[0]);
            os << ")";
            break;
        case FormulaKind::Poss:
            os << "(poss ";
            print_term(os, f->terms[0]);
            os << " ";
            print_term(os, f->terms[1]);
            os << ")";
            break;
        case FormulaKind::Natural:
            os << "(natural ";
            print_term(os, f->terms[0]);
            os << ")";
            break;
    }
}

} // namespace detail

inline std::string to_text(const FormulaPtr& f) {
    std::ostringstream os;
    detail::print_formula(os, f);
    return os.str();
}
inline std::string to_text(const TermPtr& t) {
    std::ostringstream os;
    detail::print_term(os, t);
    return os.str();
}

inline std::string serialize(const Axiom& a) {
    return to_text(canonicalize(a.formula));
}

// ---------------------------------------------------------------------------
// Parsing canonical axiom text back into the AST.  The parser needs a
// signature to classify applied symbols; variable sorts are recovered
// from argument positions (iterated to a fixpoint).

enum class SymKind {
    StaticPred, TypePred, RelFluent, StaticFunc, DynFluent, TempFluent, InitFluent, ActionSym, ObjConst
};

struct Signature {
    std::map<std::string, SymKind> syms;

    std::optional<SymKind> find(const std::string& name) const {
        auto it = syms.find(name);
        if (it == syms.end()) return std::nullopt;
        return it->second;
    }
};

namespace detail {

struct FormulaParser {
    const Signature& sig;
    std::map<std::string, Sort>& var_sorts;

    Sort var_sort(const std::string& name) const {
        auto it = var_sorts.find(name);
        return it == var_sorts.end() ? Sort::Real : it->second;  // Real until known
    }
    void want(const std::string& name, Sort s) {
        var_sorts[name] = s;  // later positional evidence wins; fixpoint loop reruns
    }

    static bool is_number(const std::string& a) {
        char* end = nullptr;
        std::strtod(a.c_str(), &end);
        return end && *end == '\0' && end != a.c_str();
    }

    TermPtr term(const SNode& n, std::optional<Sort> expect = std::nullopt) {
        if (n.is_atom) {
            if (n.atom == "s0") return mk_s0();
            if (is_number(n.atom)) return mk_real(std::strtod(n.atom.c_str(), nullptr));
            if (auto k = sig.find(n.atom); k && *k == SymKind::ObjConst) return mk_const(n.atom);
            if (expect) want(n.atom, *expect);
            return mk_var(n.atom, var_sort(n.atom));
        }
        const std::string& h = n.at(0).atom;
        if (h == "do") return mk_do(term(n.at(1), Sort::Action), term(n.at(2), Sort::Situation));
        if (h == "start") return mk_start(term(n.at(1), Sort::Situation));
        if (h == "time") return mk_time_of(term(n.at(1), Sort::Action));
        if (h == "integral") {
            want(n.at(1).atom, Sort::Real);
            return mk_integral(n.at(1).atom, term(n.at(4), Sort::Real),
                               term(n.at(2), Sort::Real), term(n.at(3), Sort::Real));
        }
        if (h == "+" || h == "-" || h == "*" || h == "/") {
            std::vector<TermPtr> args;
            for (size_t i = 1; i < n.size(); ++i) args.push_back(term(n.at(i), Sort::Real));
            return mk_arith(h, std::move(args));
        }
        auto k = sig.find(h);
        if (!k) throw parse_error("unknown symbol '" + h + "'", n.line, n.col);
        std::vector<TermPtr> args;
        size_t argc = n.size() - 1;
        for (size_t i = 1; i < n.size(); ++i) {
            size_t pos = i - 1;
            std::optional<Sort> es;
            switch (*k) {
                case SymKind::StaticFunc: es = Sort::Object; break;
                case SymKind::DynFluent:
                case SymKind::InitFluent:
                    es = (pos + 1 == argc) ? Sort::Situation : Sort::Object; break;
                case SymKind::TempFluent:
                    es = (pos + 2 == argc) ? Sort::Real
                       : (pos + 1 == argc) ? Sort::Situation : Sort::Object; break;
                case SymKind::ActionSym:
                    es = (pos + 1 == argc) ? Sort::Real : Sort::Object; break;
                default: es = Sort::Object;
            }
            args.push_back(term(n.at(i), es));
        }
        if (*k == SymKind::ActionSym) return mk_action(h, std::move(args));
        return mk_func(h, std::move(args));
    }

    FormulaPtr formula(const SNode& n) {
        if (n.is_atom)
            throw parse_error("expected a formula", n.line, n.col);
        const std::string& h = n.at(0).atom;
        if (h == "and" || h == "or") {
            std::vector<FormulaPtr> gs;
            for (size_t i = 1; i < n.size(); ++i) gs.push_back(formula(n.at(i)));
            return h == "and" ? mk_and(std::move(gs)) : mk_or(std::move(gs));
        }
        if (h == "not") return mk_not(formula(n.at(1)));
        if (h == "->") return mk_implies(formula(n.at(1)), formula(n.at(2)));
        if (h == "<->") return mk_iff(formula(n.at(1)), formula(n.at(2)));
        if (h == "exists" || h == "forall") {
            std::vector<std::pair<std::string, Sort>> binders;
            for (const auto& b : n.at(1).list)
                binders.emplace_back(b.atom, var_sort(b.atom));
            auto body = formula(n.at(2));
            for (auto& [name, sort] : binders) sort = var_sort(name);
            return h == "exists" ? mk_exists(std::move(binders), body)
                                 : mk_forall(std::move(binders), body);
        }
        if (h == "poss")
            return mk_poss(term(n.at(1), Sort::Action), term(n.at(2), Sort::Situation));
        if (h == "natural") return mk_natural(term(n.at(1), Sort::Action));
        if (h == "<" || h == "<=" || h == "=" || h == ">=" || h == ">") {
            auto l = term(n.at(1));
            auto r = term(n.at(2));
            // align variable sorts across an equality on actions
            if (h == "=" && (l->sort == Sort::Action || r->sort == Sort::Action)) {
                if (l->kind == TermKind::Variable) { want(l->sym, Sort::Action); l = mk_var(l->sym, Sort::Action); }
                if (r->kind == TermKind::Variable) { want(r->sym, Sort::Action); r = mk_var(r->sym, Sort::Action); }
            }
            return mk_cmp(h, l, r);
        }
        auto k = sig.find(h);
        if (!k) throw parse_error("unknown symbol '" + h + "'", n.line, n.col);
        std::vector<TermPtr> args;
        size_t argc = n.size() - 1;
        for (size_t i = 1; i < n.size(); ++i) {
            size_t pos = i - 1;
            Sort es = Sort::Object;
            if (*k == SymKind::RelFluent && pos + 1 == argc) es = Sort::Situation;
            args.push_back(term(n.at(i), es));
        }
        if (*k == SymKind::RelFluent) return mk_fluent(h, std::move(args));
        return mk_pred(h, std::move(args));
    }
};

} // namespace detail

inline FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
    SNode n = parse_sexpr(text);
    std::map<std::string, Sort> var_sorts;
    // two rounds: the first discovers variable sorts from positions, the
    // second rebuilds with them settled
    detail::FormulaParser p1{sig, var_sorts};
    p1.formula(n);
    detail::FormulaParser p2{sig, var_sorts};
    return p2.formula(n);
}

} // namespace hsc
