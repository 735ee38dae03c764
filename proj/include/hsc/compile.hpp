#pragma once

// Axiom compiler: emits the hybrid basic action theory for a linked
// planning instance.
//
//   - action/event preconditions           -> precondition axioms (APA)
//   - effects, normalized per Reiter       -> successor state axioms (SSA)
//   - processes                            -> begin/end natural actions,
//                                             process fluents, and state
//                                             evolution axioms (SEA) built
//                                             from the per-process temporal
//                                             change parts
//   - timed initial literals               -> one-shot natural actions
//   - init/goal, types, closure, UNA, time -> the initial theory
//
// SEAs are kept lazily as their context/rate part list (B_F); the full
// power-set expansion is generated on demand and capped.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/classify.hpp"
#include "hsc/logic.hpp"
#include "hsc/pddl.hpp"

namespace hsc {

struct compile_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reserved internal variable names.  '@' cannot occur in PDDL names, so
// these never collide with schema parameters; canonical renaming strips
// them before any axiom is printed.
namespace var {
inline const std::string t = "@t";    // action time
inline const std::string s = "@s";    // situation
inline const std::string a = "@a";    // action variable of an SSA
inline const std::string y = "@y";    // functional-fluent value
inline const std::string y2 = "@y2";
inline const std::string tp = "@tp";  // integration variable
inline TermPtr tv() { return mk_var(t, Sort::Real); }
inline TermPtr sv() { return mk_var(s, Sort::Situation); }
inline TermPtr av() { return mk_var(a, Sort::Action); }
inline TermPtr yv() { return mk_var(y, Sort::Real); }
inline std::string x(size_t i) { return "@x" + std::to_string(i + 1); }
inline TermPtr xv(size_t i) { return mk_var(x(i), Sort::Object); }
} // namespace var

// ---------------------------------------------------------------------------
// Normalized effect axiom (Reiter's three shapes): under condition `cond`,
// action `action` adds/deletes a relational fluent or sets a functional /
// init fluent value.

struct EffectRule {
    std::string action;
    std::vector<std::string> params;                  // object parameter variables
    std::vector<pddl::TypedVar> quant;                // extra universally quantified vars
    FormulaPtr cond;                                  // uniform in @s; may be true
    enum class Target { AddRel, DelRel, SetFn, SetInit } target;
    std::string fluent;                               // target symbol (SetInit: the temporal fluent)
    std::vector<TermPtr> args;                        // object argument terms
    TermPtr value;                                    // SetFn / SetInit
};

// one temporal-change part: a ground-surplus context atom and its rate
struct SeaEntry {
    std::vector<TermPtr> head_pattern;  // per fluent argument: Variable or Constant
    FormulaPtr context;                 // process-fluent atom over pattern vars + constants
    TermPtr rate;                       // free vars: pattern vars; time var @tp; situation @s
    std::string process;
};

struct Sea {
    std::string fluent;
    size_t arity = 0;
    std::vector<SeaEntry> entries;      // B_F, deterministic order
    bool normal_form = true;            // power-set construction guarantees exclusivity
};

struct ActionInfo {
    std::string name;
    std::vector<pddl::TypedVar> params;
    bool natural = false;
    double til_time = -1.0;  // >= 0 for TIL actions
};

struct GoalDef {
    FormulaPtr body;     // hat(goal): free @t and @s
    double horizon = 0;  // T, the latest TIL time
    Axiom axiom;         // the existential wrapper
};

struct HybridBat {
    // foundational axioms are represented by this opaque marker; the
    // validator realizes the tree-of-situations semantics operationally
    std::string sigma_marker = "sigma";

    SymbolTable table;
    std::vector<Axiom> d_ap;
    std::vector<Axiom> d_ss;
    std::vector<Axiom> d_una;
    std::vector<Axiom> d_s0;
    std::vector<Sea> d_se;
    GoalDef goal;
    double tils_horizon = 0;

    // execution views
    std::map<std::string, ActionInfo> actions;
    std::map<std::string, FormulaPtr> apa_rhs;  // free vars: params, @t, @s
    std::vector<EffectRule> rules;

    const Sea* sea_for(const std::string& fluent) const {
        for (const auto& s : d_se)
            if (s.fluent == fluent) return &s;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// The hat mapping (PDDL expressions/GDs -> SC terms/formulas)

namespace detail {

inline FormulaPtr type_guard(const pddl::TypeExpr& te, const TermPtr& v) {
    std::vector<FormulaPtr> alts;
    for (const auto& t : te.names) {
        if (t == "object") return mk_true();  // everything is an object
        alts.push_back(mk_pred(t, {v}));
    }
    return disj(std::move(alts));
}

struct HatCtx {
    const SymbolTable& tab;
    TermPtr t = var::tv();
    TermPtr s = var::sv();
};

inline TermPtr hat_expr(const pddl::ExprPtr& e, const HatCtx& cx) {
    using pddl::ExprKind;
    switch (e->kind) {
        case ExprKind::Num: return mk_real(e->num);
        case ExprKind::Var: return mk_var(e->sym, Sort::Object);
        case ExprKind::Name: return mk_const(e->sym);
        case ExprKind::App: {
            std::vector<TermPtr> args;
            for (const auto& a : e->args) args.push_back(hat_expr(a, cx));
            if (cx.tab.f_t.count(e->sym)) {
                args.push_back(cx.t);
                args.push_back(cx.s);
            } else if (cx.tab.f_d.count(e->sym)) {
                args.push_back(cx.s);
            } else if (!cx.tab.f_s.count(e->sym)) {
                throw compile_error("unclassified function '" + e->sym + "'");
            }
            return mk_func(e->sym, std::move(args));
        }
        case ExprKind::Arith: {
            std::vector<TermPtr> args;
            for (const auto& a : e->args) args.push_back(hat_expr(a, cx));
            return mk_arith(e->sym, std::move(args));
        }
    }
    throw compile_error("unreachable expression kind");
}

inline FormulaPtr hat_gd(const pddl::GdPtr& g, const HatCtx& cx) {
    using pddl::GdKind;
    switch (g->kind) {
        case GdKind::True: return mk_true();
        case GdKind::Atom: {
            if (cx.tab.process_fluents.count(g->sym))
                throw compile_error("process atom '" + g->sym +
                                    "' may not appear in a goal description");
            std::vector<TermPtr> args;
            for (const auto& a : g->args) args.push_back(hat_expr(a, cx));
            if (cx.tab.r_d.count(g->sym)) {
                args.push_back(cx.s);
                return mk_fluent(g->sym, std::move(args));
            }
            return mk_pred(g->sym, std::move(args));  // static or type predicate
        }
        case GdKind::Comp:
            return mk_cmp(g->sym, hat_expr(g->args[0], cx), hat_expr(g->args[1], cx));
        case GdKind::Not: return mk_not(hat_gd(g->sub[0], cx));
        case GdKind::And: {
            std::vector<FormulaPtr> xs;
            for (const auto& x : g->sub) xs.push_back(hat_gd(x, cx));
            return conj(std::move(xs));
        }
        case GdKind::Or: {
            std::vector<FormulaPtr> xs;
            for (const auto& x : g->sub) xs.push_back(hat_gd(x, cx));
            return disj(std::move(xs));
        }
        case GdKind::Imply:
            return mk_implies(hat_gd(g->sub[0], cx), hat_gd(g->sub[1], cx));
        case GdKind::Exists:
        case GdKind::Forall: {
            std::vector<std::pair<std::string, Sort>> binders;
            std::vector<FormulaPtr> guards;
            for (const auto& b : g->binders) {
                binders.emplace_back(b.name, Sort::Object);
                auto gd = type_guard(b.type, mk_var(b.name, Sort::Object));
                if (!(gd->kind == FormulaKind::And && gd->sub.empty()))
                    guards.push_back(gd);
            }
            FormulaPtr body = hat_gd(g->sub[0], cx);
            if (g->kind == GdKind::Exists) {
                guards.push_back(body);
                return mk_exists(std::move(binders), conj(std::move(guards)));
            }
            FormulaPtr guard = conj(std::move(guards));
            if (guard->kind == FormulaKind::And && guard->sub.empty())
                return mk_forall(std::move(binders), body);
            return mk_forall(std::move(binders), mk_implies(guard, body));
        }
    }
    throw compile_error("unreachable GD kind");
}

inline bool is_true(const FormulaPtr& f) {
    return f->kind == FormulaKind::And && f->sub.empty();
}

} // namespace detail

// Table-1 mapping, exposed for tests and the goal compiler.
inline FormulaPtr hat_map(const pddl::GdPtr& g, const SymbolTable& tab) {
    detail::HatCtx cx{tab};
    return detail::hat_gd(g, cx);
}
inline TermPtr hat_map(const pddl::ExprPtr& e, const SymbolTable& tab) {
    detail::HatCtx cx{tab};
    return detail::hat_expr(e, cx);
}

// ---------------------------------------------------------------------------
// Table-2 mapping: effects of one action/event schema into normalized
// effect rules (Theorem 2's three shapes)

namespace detail {

struct TildeWalker {
    const SymbolTable& tab;
    const pddl::Schema& schema;
    std::vector<EffectRule> out;

    void walk(const pddl::EffectPtr& e, std::vector<pddl::TypedVar> quant,
              std::vector<FormulaPtr> conds) {
        using pddl::EffKind;
        HatCtx cx{tab};
        switch (e->kind) {
            case EffKind::And:
                for (const auto& x : e->sub) walk(x, quant, conds);
                return;
            case EffKind::Forall: {
                for (const auto& b : e->binders) {
                    quant.push_back(b);
                    auto g = type_guard(b.type, mk_var(b.name, Sort::Object));
                    if (!is_true(g)) conds.push_back(g);
                }
                walk(e->sub[0], std::move(quant), std::move(conds));
                return;
            }
            case EffKind::When:
                conds.push_back(hat_gd(e->cond, cx));
                walk(e->sub[0], std::move(quant), std::move(conds));
                return;
            case EffKind::Lit: {
                if (tab.r_s.count(e->sym) || !tab.is_rel_fluent(e->sym) ||
                    tab.process_fluents.count(e->sym))
                    throw compile_error("schema '" + schema.name + "': effect on symbol '" +
                                        e->sym + "' contradicts its static classification");
                EffectRule r = base(quant, conds);
                r.target = e->positive ? EffectRule::Target::AddRel : EffectRule::Target::DelRel;
                r.fluent = e->sym;
                for (const auto& a : e->args) r.args.push_back(hat_expr(a, cx));
                out.push_back(std::move(r));
                return;
            }
            case EffKind::Num: {
                if (tab.f_s.count(e->sym))
                    throw compile_error("schema '" + schema.name + "': effect on symbol '" +
                                        e->sym + "' contradicts its static classification");
                EffectRule r = base(quant, conds);
                bool temporal = tab.f_t.count(e->sym) > 0;
                r.target = temporal ? EffectRule::Target::SetInit : EffectRule::Target::SetFn;
                r.fluent = e->sym;
                for (const auto& a : e->args) r.args.push_back(hat_expr(a, cx));
                TermPtr rhs = hat_expr(e->value, cx);
                if (e->num_op == "assign") {
                    r.value = rhs;
                } else {
                    // the current value of the target, read at action time
                    TermPtr cur = hat_expr(pddl::e_app(e->sym, e->args), cx);
                    std::string op = e->num_op == "increase" ? "+"
                                   : e->num_op == "decrease" ? "-"
                                   : e->num_op == "scale-up" ? "*" : "/";
                    r.value = mk_arith(op, {cur, rhs});
                }
                out.push_back(std::move(r));
                return;
            }
        }
    }

    EffectRule base(const std::vector<pddl::TypedVar>& quant,
                    const std::vector<FormulaPtr>& conds) const {
        EffectRule r;
        r.action = schema.name;
        for (const auto& p : schema.params) r.params.push_back(p.name);
        r.quant = quant;
        r.cond = conj(conds);
        return r;
    }
};

} // namespace detail

inline std::vector<EffectRule> tilde_map(const pddl::Schema& schema, const SymbolTable& tab) {
    detail::TildeWalker w{tab, schema};
    w.walk(schema.eff, {}, {});
    return w.out;
}

// ---------------------------------------------------------------------------
// SSA compilation (Reiter's solution to the frame problem)

namespace detail {

// one disjunct of gamma+/gamma-/phi: EXISTS params,quant,t . a=A(...) /\ x=args /\ cond [/\ y = value]
inline FormulaPtr rule_disjunct(const EffectRule& r, const std::vector<TermPtr>& lhs_args,
                                const TermPtr& value_var) {
    std::vector<std::pair<std::string, Sort>> binders;
    std::vector<FormulaPtr> body;
    std::vector<TermPtr> act_args;
    for (const auto& p : r.params) {
        binders.emplace_back(p, Sort::Object);
        act_args.push_back(mk_var(p, Sort::Object));
    }
    std::vector<FormulaPtr> guards;
    for (const auto& q : r.quant) {
        binders.emplace_back(q.name, Sort::Object);
        auto g = type_guard(q.type, mk_var(q.name, Sort::Object));
        if (!is_true(g)) guards.push_back(g);
    }
    binders.emplace_back(var::t, Sort::Real);
    act_args.push_back(var::tv());
    body.push_back(mk_cmp("=", var::av(), mk_action(r.action, std::move(act_args))));
    for (size_t i = 0; i < lhs_args.size(); ++i)
        body.push_back(mk_cmp("=", lhs_args[i], r.args[i]));
    for (auto& g : guards) body.push_back(std::move(g));
    if (!is_true(r.cond)) body.push_back(r.cond);
    if (value_var) body.push_back(mk_cmp("=", value_var, r.value));
    return mk_exists(std::move(binders), conj(std::move(body)));
}

inline std::vector<TermPtr> fluent_param_vars(size_t n) {
    std::vector<TermPtr> xs;
    for (size_t i = 0; i < n; ++i) xs.push_back(var::xv(i));
    return xs;
}

} // namespace detail

// Compile all collected effect rules into one SSA per affected fluent.
// `arity_of` supplies the target fluents' arities; `init_of` names the
// F_init counterparts; `trivial_init` lists temporal fluents owed the
// trivial SSA.
inline std::vector<Axiom> compile_ssa(const std::vector<EffectRule>& rules,
                                      const SymbolTable& tab,
                                      const std::map<std::string, size_t>& arity_of) {
    using detail::rule_disjunct;
    // contradictory unconditional ground effects: same relational fluent both
    // added and deleted by one action with structurally equal arguments
    for (const auto& r1 : rules)
        for (const auto& r2 : rules) {
            if (r1.action != r2.action || r1.fluent != r2.fluent) continue;
            if (r1.target != EffectRule::Target::AddRel ||
                r2.target != EffectRule::Target::DelRel)
                continue;
            if (!detail::is_true(r1.cond) || !detail::is_true(r2.cond)) continue;
            if (r1.args.size() != r2.args.size()) continue;
            bool same = true;
            for (size_t i = 0; i < r1.args.size(); ++i)
                if (!equal(r1.args[i], r2.args[i])) same = false;
            if (same)
                throw compile_error("action '" + r1.action + "' both adds and deletes '" +
                                    r1.fluent + "' unconditionally");
        }

    // group rule indices per fluent, preserving declaration order
    std::vector<std::string> order;
    std::map<std::string, std::vector<const EffectRule*>> by_fluent;
    for (const auto& r : rules) {
        if (!by_fluent.count(r.fluent)) order.push_back(r.fluent);
        by_fluent[r.fluent].push_back(&r);
    }

    std::vector<Axiom> out;
    auto do_as = mk_do(var::av(), var::sv());

    std::set<std::string> handled_init;
    for (const auto& f : order) {
        if (tab.process_fluents.count(f)) continue;  // dedicated SSA already emitted
        const auto& rs = by_fluent[f];
        size_t arity = arity_of.at(f);
        auto xs = detail::fluent_param_vars(arity);
        if (tab.is_rel_fluent(f)) {
            std::vector<FormulaPtr> pos, neg;
            for (const auto* r : rs) {
                if (r->target == EffectRule::Target::AddRel)
                    pos.push_back(rule_disjunct(*r, xs, nullptr));
                else if (r->target == EffectRule::Target::DelRel)
                    neg.push_back(rule_disjunct(*r, xs, nullptr));
            }
            auto largs = xs;
            largs.push_back(do_as);
            auto frame_args = xs;
            frame_args.push_back(var::sv());
            FormulaPtr frame = mk_fluent(f, frame_args);
            if (!neg.empty()) frame = conj({frame, mk_not(disj(std::move(neg)))});
            FormulaPtr rhs = pos.empty() ? frame : disj({disj(std::move(pos)), frame});
            out.push_back({AxiomKind::Ssa, f, mk_iff(mk_fluent(f, largs), rhs)});
        } else if (tab.f_d.count(f)) {
            std::vector<FormulaPtr> phi, phi2;
            for (const auto* r : rs)
                if (r->target == EffectRule::Target::SetFn) {
                    phi.push_back(rule_disjunct(*r, xs, var::yv()));
                    phi2.push_back(rule_disjunct(*r, xs, mk_var(var::y2, Sort::Real)));
                }
            auto largs = xs;
            largs.push_back(do_as);
            auto cur_args = xs;
            cur_args.push_back(var::sv());
            FormulaPtr lhs = mk_cmp("=", mk_func(f, largs), var::yv());
            FormulaPtr frame = mk_cmp("=", var::yv(), mk_func(f, cur_args));
            FormulaPtr rhs;
            if (phi.empty()) {
                rhs = frame;
            } else {
                FormulaPtr none = mk_not(mk_exists({{var::y2, Sort::Real}}, disj(std::move(phi2))));
                rhs = disj({disj(std::move(phi)), conj({frame, none})});
            }
            out.push_back({AxiomKind::Ssa, f, mk_iff(lhs, rhs)});
        } else if (tab.f_t.count(f)) {
            // effects on a temporal fluent target its init counterpart
            const std::string& init = tab.init_of.at(f);
            std::vector<FormulaPtr> e1, e2;
            for (const auto* r : rs)
                if (r->target == EffectRule::Target::SetInit) {
                    e1.push_back(rule_disjunct(*r, xs, var::yv()));
                    e2.push_back(rule_disjunct(*r, xs, mk_var(var::y2, Sort::Real)));
                }
            auto largs = xs;
            largs.push_back(do_as);
            FormulaPtr lhs = mk_cmp("=", mk_func(init, largs), var::yv());
            auto most_recent_args = xs;
            most_recent_args.push_back(mk_time_of(var::av()));
            most_recent_args.push_back(var::sv());
            FormulaPtr cont = mk_cmp("=", var::yv(), mk_func(f, most_recent_args));
            FormulaPtr none = mk_not(mk_exists({{var::y2, Sort::Real}}, disj(std::move(e2))));
            FormulaPtr rhs = disj({disj(std::move(e1)), conj({cont, none})});
            out.push_back({AxiomKind::Ssa, init, mk_iff(lhs, rhs)});
            handled_init.insert(f);
        } else {
            // pure frame: the fluent was forced dynamic without any rule
            auto largs = xs;
            largs.push_back(do_as);
            auto frame_args = xs;
            frame_args.push_back(var::sv());
            out.push_back({AxiomKind::Ssa, f,
                           mk_iff(mk_fluent(f, largs), mk_fluent(f, frame_args))});
        }
    }

    // trivial F_init SSA for every temporal fluent untouched by effects:
    //   F_init(x, do(a,s)) = y <-> F(x, time(a), s) = y
    for (const auto& f : tab.f_t) {
        if (handled_init.count(f)) continue;
        size_t arity = arity_of.count(f) ? arity_of.at(f) : 0;
        auto xs = detail::fluent_param_vars(arity);
        auto largs = xs;
        largs.push_back(do_as);
        auto rargs = xs;
        rargs.push_back(mk_time_of(var::av()));
        rargs.push_back(var::sv());
        out.push_back({AxiomKind::Ssa, tab.init_of.at(f),
                       mk_iff(mk_cmp("=", mk_func(tab.init_of.at(f), largs), var::yv()),
                              mk_cmp("=", mk_func(f, rargs), var::yv()))});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Processes

struct ProcessAxioms {
    Axiom begin_apa, end_apa, fluent_ssa;
    std::vector<Axiom> natural_decls;
    std::vector<EffectRule> rules;  // AddRel on begin, DelRel on end
};

inline ProcessAxioms compile_process(const pddl::Schema& p, const SymbolTable& tab) {
    ProcessAxioms out;
    detail::HatCtx cx{tab};
    std::vector<FormulaPtr> guards;
    std::vector<TermPtr> pvars;
    for (const auto& b : p.params) {
        pvars.push_back(mk_var(b.name, Sort::Object));
        auto g = detail::type_guard(b.type, pvars.back());
        if (!detail::is_true(g)) guards.push_back(g);
    }
    FormulaPtr pre = hat_map(p.pre, tab);
    const std::string& bsym = tab.begin_of.at(p.name);
    const std::string& esym = tab.end_of.at(p.name);

    auto act_args = pvars;
    act_args.push_back(var::tv());
    auto begin_act = mk_action(bsym, act_args);
    auto end_act = mk_action(esym, act_args);

    auto with_guards = [&](FormulaPtr body) {
        auto gs = guards;
        gs.push_back(std::move(body));
        return conj(std::move(gs));
    };
    out.begin_apa = {AxiomKind::Apa, bsym,
                     mk_iff(mk_poss(begin_act, var::sv()), with_guards(pre))};
    out.end_apa = {AxiomKind::Apa, esym,
                   mk_iff(mk_poss(end_act, var::sv()), with_guards(mk_not(pre)))};

    // P(x, do(a,s)) <-> (exists t) a = begin_P(x,t) \/ P(x,s) /\ not (exists t) a = end_P(x,t)
    auto xs = detail::fluent_param_vars(p.params.size());
    Binding to_x;
    for (size_t i = 0; i < p.params.size(); ++i) to_x[p.params[i].name] = xs[i];
    auto largs = xs;
    largs.push_back(mk_do(var::av(), var::sv()));
    auto sargs = xs;
    sargs.push_back(var::sv());
    auto began = mk_exists({{var::t, Sort::Real}},
                           mk_cmp("=", var::av(), substitute(begin_act, to_x)));
    auto ended = mk_exists({{var::t, Sort::Real}},
                           mk_cmp("=", var::av(), substitute(end_act, to_x)));
    out.fluent_ssa = {AxiomKind::Ssa, p.name,
                      mk_iff(mk_fluent(p.name, largs),
                             disj({began, conj({mk_fluent(p.name, sargs), mk_not(ended)})}))};

    out.natural_decls.push_back({AxiomKind::NaturalDecl, bsym, mk_natural(begin_act)});
    out.natural_decls.push_back({AxiomKind::NaturalDecl, esym, mk_natural(end_act)});

    for (bool begin : {true, false}) {
        EffectRule r;
        r.action = begin ? bsym : esym;
        for (const auto& b : p.params) r.params.push_back(b.name);
        r.cond = mk_true();
        r.target = begin ? EffectRule::Target::AddRel : EffectRule::Target::DelRel;
        r.fluent = p.name;
        r.args = pvars;
        out.rules.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// SEA construction

inline Sea compile_sea(const pddl::PlanningInstance& inst, const SymbolTable& tab,
                       const std::string& fluent) {
    Sea sea;
    sea.fluent = fluent;
    sea.arity = inst.fn_arity.at(fluent);
    detail::HatCtx rate_cx{tab, mk_var(var::tp, Sort::Real), var::sv()};

    for (const auto& p : inst.dom.processes) {
        for (const auto& pe : p.peff) {
            if (pe.fn != fluent) continue;
            // head pattern: variables or constants only
            std::vector<TermPtr> pattern;
            std::set<std::string> head_vars;
            for (const auto& a : pe.args) {
                if (a->kind == pddl::ExprKind::Var) {
                    if (!head_vars.insert(a->sym).second)
                        throw compile_error("process '" + p.name +
                                            "': repeated variable in effect head of '" +
                                            fluent + "'");
                    pattern.push_back(mk_var(a->sym, Sort::Object));
                } else if (a->kind == pddl::ExprKind::Name) {
                    pattern.push_back(mk_const(a->sym));
                } else {
                    throw compile_error("process '" + p.name +
                                        "': effect head arguments must be variables or objects");
                }
            }
            // surplus parameters (in the process but not in the head) are
            // grounded over the typed objects, in all possible ways
            std::vector<pddl::TypedVar> surplus;
            for (const auto& b : p.params)
                if (!head_vars.count(b.name)) surplus.push_back(b);
            std::vector<Binding> groundings{{}};
            for (const auto& w : surplus) {
                std::vector<Binding> next;
                for (const auto& g : groundings)
                    for (const auto& o : inst.objects_of(w.type)) {
                        Binding g2 = g;
                        g2[w.name] = mk_const(o);
                        next.push_back(std::move(g2));
                    }
                groundings = std::move(next);
            }
            if (!surplus.empty() && groundings.size() == 1 && groundings[0].empty())
                continue;  // a surplus variable with no objects: no entries
            TermPtr rate = detail::hat_expr(pe.rate, rate_cx);
            std::vector<TermPtr> ctx_args;
            for (const auto& b : p.params) ctx_args.push_back(mk_var(b.name, Sort::Object));
            ctx_args.push_back(var::sv());
            FormulaPtr ctx = mk_fluent(p.name, ctx_args);
            for (const auto& g : groundings) {
                SeaEntry e;
                e.head_pattern = pattern;
                e.context = substitute(ctx, g);
                e.rate = substitute(rate, g);
                e.process = p.name;
                sea.entries.push_back(std::move(e));
            }
        }
    }
    return sea;
}

// Fully expanded SEA over the power set of B_F (2^k disjuncts).
inline Axiom expand_sea(const Sea& sea, const SymbolTable& tab, size_t cap = size_t(1) << 20) {
    size_t k = sea.entries.size();
    if (k < 64 && (size_t(1) << k) > cap)
        throw compile_error("SEA for '" + sea.fluent + "' would expand to 2^" +
                            std::to_string(k) + " disjuncts (cap " + std::to_string(cap) +
                            "); use the lazy representation");
    auto xs = detail::fluent_param_vars(sea.arity);

    // normalize each entry's context/rate onto the fluent's argument
    // variables x1..xn (the substitution theta of the construction)
    std::vector<FormulaPtr> ctxs;
    std::vector<TermPtr> rates;
    std::vector<std::vector<FormulaPtr>> pattern_eqs;
    for (const auto& e : sea.entries) {
        Binding theta;
        std::vector<FormulaPtr> eqs;
        for (size_t i = 0; i < e.head_pattern.size(); ++i) {
            if (e.head_pattern[i]->kind == TermKind::Variable)
                theta[e.head_pattern[i]->sym] = xs[i];
            else
                eqs.push_back(mk_cmp("=", xs[i], e.head_pattern[i]));
        }
        ctxs.push_back(substitute(e.context, theta));
        rates.push_back(substitute(e.rate, theta));
        pattern_eqs.push_back(std::move(eqs));
    }

    auto init_args = xs;
    init_args.push_back(var::sv());
    TermPtr init = mk_func(tab.init_of.at(sea.fluent), init_args);

    std::vector<FormulaPtr> disjuncts;
    for (size_t mask = 0; mask < (size_t(1) << k); ++mask) {
        std::vector<FormulaPtr> parts;
        std::vector<TermPtr> active;
        for (size_t i = 0; i < k; ++i) {
            if (mask & (size_t(1) << i)) {
                parts.push_back(ctxs[i]);
                for (const auto& eq : pattern_eqs[i]) parts.push_back(eq);
                active.push_back(rates[i]);
            } else {
                parts.push_back(mk_not(ctxs[i]));
            }
        }
        TermPtr value;
        if (active.empty()) {
            value = init;
        } else {
            TermPtr sum = active.size() == 1 ? active[0] : mk_arith("+", active);
            value = mk_arith("+", {init, mk_integral(var::tp, sum, mk_start(var::sv()), var::tv())});
        }
        parts.push_back(mk_cmp("=", var::yv(), value));
        disjuncts.push_back(conj(std::move(parts)));
    }
    auto largs = xs;
    largs.push_back(var::tv());
    largs.push_back(var::sv());
    FormulaPtr lhs = mk_cmp("=", mk_func(sea.fluent, largs), var::yv());
    return {AxiomKind::Sea, sea.fluent, mk_iff(lhs, disj(std::move(disjuncts)))};
}

// ---------------------------------------------------------------------------
// Timed initial literals

struct TilAxioms {
    std::vector<Axiom> apas, natural_decls;
    std::vector<EffectRule> rules;
    std::vector<ActionInfo> actions;
    std::map<std::string, FormulaPtr> apa_rhs;
    std::vector<std::string> fired_fluents;
    double horizon = 0;
};

inline TilAxioms compile_til(const std::vector<pddl::Til>& tils, SymbolTable& tab) {
    TilAxioms out;
    std::map<double, std::vector<const pddl::Til*>> by_time;
    for (const auto& t : tils) {
        if (t.time < 0)
            throw compile_error("timed initial literal at negative time " +
                                real_to_string(t.time));
        by_time[t.time].push_back(&t);
        out.horizon = std::max(out.horizon, t.time);
    }
    int k = 0;
    for (const auto& [time, lits] : by_time) {
        ++k;
        std::string act = "til_" + std::to_string(k);
        std::string fired = "fired_" + std::to_string(k);
        tab.natural_actions.insert(act);
        tab.r_d.insert(fired);
        out.fired_fluents.push_back(fired);

        auto action_term = mk_action(act, {var::tv()});
        FormulaPtr rhs = conj({mk_cmp("=", var::tv(), mk_real(time)),
                               mk_not(mk_fluent(fired, {var::sv()}))});
        out.apas.push_back({AxiomKind::Apa, act, mk_iff(mk_poss(action_term, var::sv()), rhs)});
        out.apa_rhs[act] = rhs;
        out.natural_decls.push_back({AxiomKind::NaturalDecl, act, mk_natural(action_term)});

        ActionInfo info;
        info.name = act;
        info.natural = true;
        info.til_time = time;
        out.actions.push_back(info);

        EffectRule guard;
        guard.action = act;
        guard.cond = mk_true();
        guard.target = EffectRule::Target::AddRel;
        guard.fluent = fired;
        out.rules.push_back(guard);
        for (const auto* lit : lits) {
            EffectRule r;
            r.action = act;
            r.cond = mk_true();
            r.target = lit->positive ? EffectRule::Target::AddRel : EffectRule::Target::DelRel;
            r.fluent = lit->sym;
            for (const auto& a : lit->args) r.args.push_back(mk_const(a));
            out.rules.push_back(std::move(r));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Goal

inline GoalDef compile_goal(const pddl::GdPtr& goal, double T, const SymbolTable& tab) {
    GoalDef g;
    g.body = hat_map(goal, tab);
    g.horizon = T;
    FormulaPtr wrapped = mk_exists(
        {{var::t, Sort::Real}},
        conj({mk_cmp(">=", var::tv(), mk_start(var::sv())),
              mk_cmp(">=", var::tv(), mk_real(T)), g.body}));
    g.axiom = {AxiomKind::GoalDef, "goal", wrapped};
    return g;
}

// ---------------------------------------------------------------------------
// Whole-theory assembly

namespace detail {

inline Axiom action_una(const std::string& name, size_t nparams) {
    std::vector<std::pair<std::string, Sort>> binders;
    std::vector<TermPtr> u, v;
    for (size_t i = 0; i < nparams; ++i) {
        binders.emplace_back("@u" + std::to_string(i), Sort::Object);
        u.push_back(mk_var("@u" + std::to_string(i), Sort::Object));
    }
    binders.emplace_back("@tu", Sort::Real);
    u.push_back(mk_var("@tu", Sort::Real));
    for (size_t i = 0; i < nparams; ++i) {
        binders.emplace_back("@v" + std::to_string(i), Sort::Object);
        v.push_back(mk_var("@v" + std::to_string(i), Sort::Object));
    }
    binders.emplace_back("@tv", Sort::Real);
    v.push_back(mk_var("@tv", Sort::Real));
    std::vector<FormulaPtr> eqs;
    for (size_t i = 0; i <= nparams; ++i) eqs.push_back(mk_cmp("=", u[i], v[i]));
    return {AxiomKind::Una, name,
            mk_forall(std::move(binders),
                      mk_implies(mk_cmp("=", mk_action(name, u), mk_action(name, v)),
                                 conj(std::move(eqs))))};
}

inline Axiom action_distinct(const std::string& a, size_t na, const std::string& b, size_t nb) {
    std::vector<std::pair<std::string, Sort>> binders;
    std::vector<TermPtr> u, v;
    for (size_t i = 0; i < na; ++i) {
        binders.emplace_back("@u" + std::to_string(i), Sort::Object);
        u.push_back(mk_var("@u" + std::to_string(i), Sort::Object));
    }
    binders.emplace_back("@tu", Sort::Real);
    u.push_back(mk_var("@tu", Sort::Real));
    for (size_t i = 0; i < nb; ++i) {
        binders.emplace_back("@v" + std::to_string(i), Sort::Object);
        v.push_back(mk_var("@v" + std::to_string(i), Sort::Object));
    }
    binders.emplace_back("@tv", Sort::Real);
    v.push_back(mk_var("@tv", Sort::Real));
    return {AxiomKind::Una, a + "/" + b,
            mk_forall(std::move(binders),
                      mk_not(mk_cmp("=", mk_action(a, u), mk_action(b, v))))};
}

inline Axiom time_axiom(const std::string& name, size_t nparams) {
    std::vector<TermPtr> args;
    for (size_t i = 0; i < nparams; ++i) args.push_back(var::xv(i));
    args.push_back(var::tv());
    return {AxiomKind::TimeAxiom, name,
            mk_cmp("=", mk_time_of(mk_action(name, args)), var::tv())};
}

} // namespace detail

inline HybridBat compile(const pddl::PlanningInstance& inst) {
    std::vector<std::string> diags;
    auto guard = [&](auto&& fn) {
        try { fn(); } catch (const std::exception& e) { diags.push_back(e.what()); }
    };

    HybridBat bat;
    bat.table = classify(inst);
    SymbolTable& tab = bat.table;

    std::map<std::string, size_t> arity_of;
    for (const auto& [p, n] : inst.pred_arity) arity_of[p] = n;
    for (const auto& [f, n] : inst.fn_arity) arity_of[f] = n;

    // agent actions and events share the compilation path; events add a
    // natural declaration
    std::vector<Axiom> natural_decls;
    auto compile_schema = [&](const pddl::Schema& s, bool natural) {
        std::vector<FormulaPtr> guards;
        std::vector<TermPtr> act_args;
        for (const auto& b : s.params) {
            act_args.push_back(mk_var(b.name, Sort::Object));
            auto g = detail::type_guard(b.type, act_args.back());
            if (!detail::is_true(g)) guards.push_back(g);
        }
        act_args.push_back(var::tv());
        auto action_term = mk_action(s.name, act_args);
        guards.push_back(hat_map(s.pre, tab));
        FormulaPtr rhs = conj(std::move(guards));
        bat.d_ap.push_back({AxiomKind::Apa, s.name,
                            mk_iff(mk_poss(action_term, var::sv()), rhs)});
        bat.apa_rhs[s.name] = rhs;
        ActionInfo info;
        info.name = s.name;
        info.params = s.params;
        info.natural = natural;
        bat.actions[s.name] = info;
        if (natural)
            natural_decls.push_back({AxiomKind::NaturalDecl, s.name, mk_natural(action_term)});
        for (auto& r : tilde_map(s, tab)) bat.rules.push_back(std::move(r));
    };
    for (const auto& s : inst.dom.actions) guard([&] { compile_schema(s, false); });
    for (const auto& s : inst.dom.events) guard([&] { compile_schema(s, true); });

    for (const auto& p : inst.dom.processes) {
        guard([&] {
            auto pa = compile_process(p, tab);
            bat.d_ap.push_back(pa.begin_apa);
            bat.d_ap.push_back(pa.end_apa);
            bat.apa_rhs[tab.begin_of.at(p.name)] = pa.begin_apa.formula->sub[1];
            bat.apa_rhs[tab.end_of.at(p.name)] = pa.end_apa.formula->sub[1];
            for (auto& d : pa.natural_decls) natural_decls.push_back(std::move(d));
            for (auto& r : pa.rules) bat.rules.push_back(std::move(r));
            bat.d_ss.push_back(pa.fluent_ssa);
            for (bool begin : {true, false}) {
                ActionInfo info;
                info.name = begin ? tab.begin_of.at(p.name) : tab.end_of.at(p.name);
                info.params = p.params;
                info.natural = true;
                bat.actions[info.name] = info;
            }
            arity_of[p.name] = p.params.size();
        });
    }

    guard([&] {
        auto til = compile_til(inst.prob.tils, tab);
        bat.tils_horizon = til.horizon;
        for (auto& a : til.apas) bat.d_ap.push_back(std::move(a));
        for (auto& d : til.natural_decls) natural_decls.push_back(std::move(d));
        for (auto& r : til.rules) bat.rules.push_back(std::move(r));
        for (auto& [k, v] : til.apa_rhs) bat.apa_rhs[k] = v;
        for (auto& a : til.actions) bat.actions[a.name] = a;
        for (auto& f : til.fired_fluents) arity_of[f] = 0;
    });

    guard([&] {
        auto ssas = compile_ssa(bat.rules, tab, arity_of);
        for (auto& a : ssas) bat.d_ss.push_back(std::move(a));
    });

    for (const auto& f : tab.f_t)
        guard([&] { bat.d_se.push_back(compile_sea(inst, tab, f)); });

    // ---- initial theory -------------------------------------------------
    for (const auto& [t, te] : inst.dom.types) {
        auto v = mk_var("@x", Sort::Object);
        bat.d_s0.push_back({AxiomKind::TypeAxiom, t,
                            mk_forall({{"@x", Sort::Object}},
                                      mk_implies(mk_pred(t, {v}),
                                                 detail::type_guard(te, v)))});
    }
    for (const auto& o : inst.objects_sorted) {
        auto g = detail::type_guard(inst.object_types.at(o), mk_const(o));
        if (!detail::is_true(g))
            bat.d_s0.push_back({AxiomKind::TypeAxiom, o, g});
    }
    // object unique names + domain closure
    for (size_t i = 0; i < inst.objects_sorted.size(); ++i)
        for (size_t j = i + 1; j < inst.objects_sorted.size(); ++j)
            bat.d_una.push_back(
                {AxiomKind::Una, inst.objects_sorted[i] + "/" + inst.objects_sorted[j],
                 mk_not(mk_cmp("=", mk_const(inst.objects_sorted[i]),
                               mk_const(inst.objects_sorted[j])))});
    if (!inst.objects_sorted.empty()) {
        auto v = mk_var("@x", Sort::Object);
        std::vector<FormulaPtr> alts;
        for (const auto& o : inst.objects_sorted) alts.push_back(mk_cmp("=", v, mk_const(o)));
        bat.d_s0.push_back({AxiomKind::DomainClosure, "object",
                            mk_forall({{"@x", Sort::Object}}, disj(std::move(alts)))});
        for (const auto& [t, _] : inst.dom.types) {
            std::vector<FormulaPtr> talts;
            for (const auto& o : inst.objects_sorted)
                if (inst.object_has_type(o, t)) talts.push_back(mk_cmp("=", v, mk_const(o)));
            bat.d_s0.push_back(
                {AxiomKind::DomainClosure, t,
                 mk_forall({{"@x", Sort::Object}},
                           mk_implies(mk_pred(t, {v}), disj(std::move(talts))))});
        }
    }
    // action unique names (injectivity per symbol, distinctness per pair)
    for (const auto& [name, info] : bat.actions)
        bat.d_una.push_back(detail::action_una(name, info.params.size()));
    for (auto i = bat.actions.begin(); i != bat.actions.end(); ++i)
        for (auto j = std::next(i); j != bat.actions.end(); ++j)
            bat.d_una.push_back(detail::action_distinct(i->first, i->second.params.size(),
                                                        j->first, j->second.params.size()));
    for (const auto& [name, info] : bat.actions)
        bat.d_s0.push_back(detail::time_axiom(name, info.params.size()));
    for (auto& d : natural_decls) bat.d_s0.push_back(std::move(d));
    bat.d_s0.push_back({AxiomKind::TimeAxiom, "s0",
                        mk_cmp("=", mk_start(mk_s0()), mk_real(0))});

    // init state translated with S0 for the situation, 0 for the time
    guard([&] {
        for (const auto& ga : inst.prob.init_atoms) {
            std::vector<TermPtr> args;
            for (const auto& a : ga.args) args.push_back(mk_const(a));
            FormulaPtr f;
            if (tab.is_rel_fluent(ga.sym)) {
                args.push_back(mk_s0());
                f = mk_fluent(ga.sym, args);
            } else {
                f = mk_pred(ga.sym, args);
            }
            bat.d_s0.push_back({AxiomKind::Init, ga.sym, f});
        }
        for (const auto& ia : inst.prob.init_assigns) {
            std::vector<TermPtr> args;
            for (const auto& a : ia.args) args.push_back(mk_const(a));
            if (tab.f_t.count(ia.fn)) {
                args.push_back(mk_real(0));
                args.push_back(mk_s0());
            } else if (tab.f_d.count(ia.fn)) {
                args.push_back(mk_s0());
            }
            bat.d_s0.push_back({AxiomKind::Init, ia.fn,
                                mk_cmp("=", mk_func(ia.fn, args), mk_real(ia.value))});
        }
    });

    guard([&] {
        bat.goal = compile_goal(inst.prob.goal, bat.tils_horizon, tab);
    });

    if (!diags.empty()) {
        std::string all = "compilation failed:";
        for (const auto& d : diags) all += "\n  " + d;
        throw compile_error(all);
    }
    return bat;
}

// ---------------------------------------------------------------------------
// Well-definedness findings

struct Finding {
    enum class Tag { Guaranteed, RuntimeChecked, PotentialViolation } tag;
    std::string message;
};

namespace detail {

inline bool term_can_be_zero(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::RealLit: return t->num == 0.0;
        case TermKind::FuncApp: return true;  // fluent-dependent value
        case TermKind::Variable: return true;
        case TermKind::Arith:
            if (t->sym == "/" || t->sym == "*") {
                for (const auto& a : t->args)
                    if (term_can_be_zero(a)) return true;
                return false;
            }
            return true;  // sums/differences: no cheap bound
        default: return true;
    }
}

inline void scan_divisions(const TermPtr& t, const std::string& where,
                           std::vector<Finding>& out) {
    if (t->kind == TermKind::Arith && t->sym == "/" && t->args.size() >= 2) {
        for (size_t i = 1; i < t->args.size(); ++i)
            if (term_can_be_zero(t->args[i]))
                out.push_back({Finding::Tag::PotentialViolation,
                               where + ": division by a term that can be 0: " +
                                   to_text(t->args[i])});
    }
    for (const auto& a : t->args) scan_divisions(a, where, out);
}

inline void scan_divisions_formula(const FormulaPtr& f, const std::string& where,
                                   std::vector<Finding>& out) {
    for (const auto& t : f->terms) scan_divisions(t, where, out);
    for (const auto& g : f->sub) scan_divisions_formula(g, where, out);
}

} // namespace detail

inline std::vector<Finding> check_well_defined(const HybridBat& bat,
                                               const pddl::PlanningInstance& inst) {
    std::vector<Finding> out;
    for (const auto& sea : bat.d_se) {
        if (sea.normal_form) {
            out.push_back({Finding::Tag::Guaranteed,
                           "SEA contexts for '" + sea.fluent +
                               "' are pairwise mutually exclusive (power-set form)"});
        } else {
            // hand-built: contexts that are not complements of each other can
            // overlap; differing rates then violate value uniqueness
            for (size_t i = 0; i < sea.entries.size(); ++i)
                for (size_t j = i + 1; j < sea.entries.size(); ++j) {
                    const auto& a = sea.entries[i];
                    const auto& b = sea.entries[j];
                    bool complementary =
                        (a.context->kind == FormulaKind::Not && equal(a.context->sub[0], b.context)) ||
                        (b.context->kind == FormulaKind::Not && equal(b.context->sub[0], a.context));
                    if (complementary) continue;
                    if (!equal(a.rate, b.rate))
                        out.push_back({Finding::Tag::PotentialViolation,
                                       "SEA for '" + sea.fluent + "': contexts " +
                                           to_text(a.context) + " and " + to_text(b.context) +
                                           " can overlap with different rates"});
                }
        }
        for (const auto& e : sea.entries)
            detail::scan_divisions(e.rate, "rate of '" + sea.fluent + "'", out);
    }
    for (const auto& r : bat.rules) {
        if (r.value) detail::scan_divisions(r.value, "effect of '" + r.action + "'", out);
        detail::scan_divisions_formula(r.cond, "effect condition of '" + r.action + "'", out);
    }
    out.push_back({Finding::Tag::RuntimeChecked,
                   "init-consistency (f_init matches the SEA at start) is asserted "
                   "at every transition"});
    (void)inst;
    return out;
}

// ---------------------------------------------------------------------------
// Serialization of the whole theory

namespace detail {

inline std::string sea_lazy_text(const Sea& sea) {
    // (sea (f x1..xn t s) ((ctx) rate)*) with the head pattern normalized
    // onto x1..xn; documented in docs/axiom-format.md
    auto xs = fluent_param_vars(sea.arity);
    std::ostringstream os;
    os << "(sea (" << sea.fluent;
    for (size_t i = 0; i < sea.arity; ++i) os << " x" << i + 1;
    os << " t s)";
    for (const auto& e : sea.entries) {
        Binding theta;
        for (size_t i = 0; i < e.head_pattern.size(); ++i)
            if (e.head_pattern[i]->kind == TermKind::Variable)
                theta[e.head_pattern[i]->sym] = mk_var("x" + std::to_string(i + 1), Sort::Object);
        Binding pretty = theta;
        pretty[var::tp] = mk_var("tp", Sort::Real);
        pretty[var::s] = mk_var("s", Sort::Situation);
        os << " (" << to_text(substitute(e.context, pretty)) << " "
           << to_text(substitute(e.rate, pretty)) << ")";
    }
    os << ")";
    return os.str();
}

} // namespace detail

struct SerializeOpts {
    bool expand_sea = false;
    size_t sea_cap = size_t(1) << 20;
};

inline std::string serialize_bat(const HybridBat& bat, const pddl::PlanningInstance& inst,
                                 const SerializeOpts& opts = {}) {
    std::ostringstream os;
    os << ";; hybrid basic action theory\n";
    os << ";; domain: " << inst.dom.name << "  problem: " << inst.prob.name << "\n";
    os << ";; " << bat.sigma_marker
       << ": second-order foundational axioms, represented opaquely\n";
    auto section = [&](const char* name, const std::vector<Axiom>& axs) {
        os << ";; ---- " << name << "\n";
        for (const auto& a : axs)
            os << serialize(a) << " ; " << axiom_kind_name(a.kind) << " " << a.subject << "\n";
    };
    section("action-precondition-axioms", bat.d_ap);
    section("successor-state-axioms", bat.d_ss);
    os << ";; ---- state-evolution-axioms\n";
    for (const auto& sea : bat.d_se) {
        if (opts.expand_sea) {
            Axiom a = expand_sea(sea, bat.table, opts.sea_cap);
            os << serialize(a) << " ; sea " << sea.fluent << "\n";
        } else {
            os << detail::sea_lazy_text(sea) << " ; sea " << sea.fluent << "\n";
        }
    }
    section("unique-name-axioms", bat.d_una);
    section("initial-theory", bat.d_s0);
    os << ";; ---- goal\n";
    os << serialize(bat.goal.axiom) << " ; goal (T = " << real_to_string(bat.goal.horizon)
       << ")\n";
    return os.str();
}

// signature for re-parsing emitted axioms (round-trip tests)
inline Signature make_signature(const HybridBat& bat, const pddl::PlanningInstance& inst) {
    Signature sig;
    const auto& tab = bat.table;
    for (const auto& p : tab.r_s) sig.syms[p] = SymKind::StaticPred;
    for (const auto& t : tab.type_preds) sig.syms[t] = SymKind::TypePred;
    for (const auto& p : tab.r_d) sig.syms[p] = SymKind::RelFluent;
    for (const auto& p : tab.process_fluents) sig.syms[p] = SymKind::RelFluent;
    for (const auto& f : tab.f_s) sig.syms[f] = SymKind::StaticFunc;
    for (const auto& f : tab.f_d) sig.syms[f] = SymKind::DynFluent;
    for (const auto& f : tab.f_t) sig.syms[f] = SymKind::TempFluent;
    for (const auto& [_, init] : tab.init_of) sig.syms[init] = SymKind::InitFluent;
    for (const auto& [name, _] : bat.actions) sig.syms[name] = SymKind::ActionSym;
    for (const auto& [o, _] : inst.object_types) sig.syms[o] = SymKind::ObjConst;
    return sig;
}

} // namespace hsc
