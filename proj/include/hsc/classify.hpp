#pragma once

// Partition predicates into static/dynamic and functions into
// static/dynamic/temporal, and derive the situation-calculus symbols the
// mapping introduces (process fluents, begin/end actions, *_init fluents,
// natural actions for events).

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hsc/pddl.hpp"

namespace hsc {

struct classify_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SymbolTable {
    std::set<std::string> r_s, r_d;        // predicates
    std::set<std::string> f_s, f_d, f_t;   // functions
    std::set<std::string> process_fluents; // process names double as relational fluents
    std::set<std::string> type_preds;

    std::map<std::string, std::string> init_of;              // F in F_t -> F_init symbol
    std::map<std::string, std::string> begin_of, end_of;     // process -> natural actions
    std::set<std::string> natural_actions;                   // events, begin/end (TILs added later)
    std::set<std::string> agent_actions;

    // temporal fluents never mentioned in any action/event effect; the
    // compiler owes each one a trivial F_init SSA
    std::set<std::string> trivial_init;

    bool is_static_pred(const std::string& p) const { return r_s.count(p) > 0; }
    bool is_rel_fluent(const std::string& p) const {
        return r_d.count(p) > 0 || process_fluents.count(p) > 0;
    }
};

namespace detail {

inline void collect_effect_symbols(const pddl::EffectPtr& e, std::set<std::string>& preds,
                                   std::set<std::string>& fns) {
    using pddl::EffKind;
    switch (e->kind) {
        case EffKind::And:
        case EffKind::Forall:
            for (const auto& x : e->sub) collect_effect_symbols(x, preds, fns);
            break;
        case EffKind::When:
            collect_effect_symbols(e->sub[0], preds, fns);
            break;
        case EffKind::Lit:
            preds.insert(e->sym);  // negative occurrences count: deletion is change
            break;
        case EffKind::Num:
            fns.insert(e->sym);
            break;
    }
}

inline std::string fresh_symbol(std::string base, const std::set<std::string>& taken) {
    while (taken.count(base)) base += "_";
    return base;
}

} // namespace detail

inline SymbolTable classify(const pddl::PlanningInstance& inst) {
    SymbolTable tab;
    const auto& dom = inst.dom;

    std::set<std::string> all_names;  // the shared PDDL namespace
    all_names.insert("object");
    for (const auto& [t, _] : dom.types) all_names.insert(t);
    for (const auto& [o, _] : inst.object_types) all_names.insert(o);
    for (const auto& p : dom.predicates) all_names.insert(p.name);
    for (const auto& f : dom.functions) all_names.insert(f.name);
    for (const auto& s : dom.actions) all_names.insert(s.name);
    for (const auto& s : dom.events) all_names.insert(s.name);
    for (const auto& s : dom.processes) all_names.insert(s.name);

    tab.type_preds.insert("object");
    for (const auto& [t, _] : dom.types) tab.type_preds.insert(t);

    std::set<std::string> eff_preds, eff_fns;
    for (const auto& s : dom.actions) detail::collect_effect_symbols(s.eff, eff_preds, eff_fns);
    for (const auto& s : dom.events) detail::collect_effect_symbols(s.eff, eff_preds, eff_fns);
    // TIL literals flip at their time point, so their predicates are dynamic
    for (const auto& til : inst.prob.tils) eff_preds.insert(til.sym);

    for (const auto& s : dom.processes)
        for (const auto& pe : s.peff) {
            tab.f_t.insert(pe.fn);
            if (inst.pred_arity.count(pe.fn))
                throw classify_error("process '" + s.name +
                                     "' has a predicate in its effect: " + pe.fn);
        }

    for (const auto& p : dom.predicates)
        (eff_preds.count(p.name) ? tab.r_d : tab.r_s).insert(p.name);
    for (const auto& f : dom.functions) {
        if (tab.f_t.count(f.name)) continue;
        (eff_fns.count(f.name) ? tab.f_d : tab.f_s).insert(f.name);
    }
    for (const auto& f : tab.f_t)
        if (!eff_fns.count(f)) tab.trivial_init.insert(f);

    for (const auto& f : tab.f_t) {
        std::string init = detail::fresh_symbol(f + "_init", all_names);
        all_names.insert(init);
        tab.init_of[f] = init;
    }
    for (const auto& s : dom.processes) {
        tab.process_fluents.insert(s.name);
        std::string b = detail::fresh_symbol("begin_" + s.name, all_names);
        all_names.insert(b);
        std::string e = detail::fresh_symbol("end_" + s.name, all_names);
        all_names.insert(e);
        tab.begin_of[s.name] = b;
        tab.end_of[s.name] = e;
        tab.natural_actions.insert(b);
        tab.natural_actions.insert(e);
    }
    for (const auto& s : dom.events) tab.natural_actions.insert(s.name);
    for (const auto& s : dom.actions) tab.agent_actions.insert(s.name);
    return tab;
}

// one line per symbol; used by the `check` command
inline std::string classification_table(const SymbolTable& tab) {
    std::ostringstream os;
    auto row = [&](const char* cls, const std::set<std::string>& names) {
        for (const auto& n : names) os << cls << " " << n << "\n";
    };
    row("predicate static   ", tab.r_s);
    row("predicate dynamic  ", tab.r_d);
    row("function  static   ", tab.f_s);
    row("function  dynamic  ", tab.f_d);
    row("function  temporal ", tab.f_t);
    row("process   fluent   ", tab.process_fluents);
    for (const auto& [f, init] : tab.init_of)
        os << "derived   init     " << init << " (for " << f << ")\n";
    for (const auto& [p, b] : tab.begin_of)
        os << "derived   natural  " << b << ", " << tab.end_of.at(p) << " (for " << p << ")\n";
    return os.str();
}

} // namespace hsc
