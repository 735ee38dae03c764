#pragma once

// Plan validator: executes a timestamped plan against a compiled theory,
// inserting natural actions as soon as their preconditions trigger, and
// searches for a goal witness time.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "hsc/numeric.hpp"

namespace hsc {

// ---------------------------------------------------------------------------
// Plan file: one step per line, `time action(arg,...)`; ';' comments

struct PlanStep {
    double time = 0;
    std::string name;
    std::vector<std::string> args;
    int line = 0;
};

inline std::vector<PlanStep> parse_plan(const std::string& text) {
    std::vector<PlanStep> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw.substr(0, raw.find(';'));
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        std::istringstream ls(line);
        double t;
        if (!(ls >> t))
            throw parse_error("plan line must start with a time", lineno, 1);
        std::string rest;
        std::getline(ls, rest);
        b = rest.find_first_not_of(" \t");
        if (b == std::string::npos)
            throw parse_error("plan line missing an action", lineno, 1);
        rest = rest.substr(b);
        PlanStep step;
        step.time = t;
        step.line = lineno;
        size_t paren = rest.find('(');
        if (paren == std::string::npos) {
            step.name = rest;
        } else {
            step.name = rest.substr(0, paren);
            size_t close = rest.rfind(')');
            if (close == std::string::npos || close < paren)
                throw parse_error("unbalanced parentheses in plan step", lineno, 1);
            std::string inner = rest.substr(paren + 1, close - paren - 1);
            std::string cur;
            for (char c : inner) {
                if (c == ',' || c == ' ' || c == '\t') {
                    if (!cur.empty()) step.args.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!cur.empty()) step.args.push_back(cur);
        }
        while (!step.name.empty() && (step.name.back() == ' ' || step.name.back() == '\t'))
            step.name.pop_back();
        if (step.name.empty())
            throw parse_error("plan line missing an action name", lineno, 1);
        for (auto& c : step.name) c = char(std::tolower(static_cast<unsigned char>(c)));
        for (auto& a : step.args)
            for (auto& c : a) c = char(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(step));
    }
    return out;
}

// ---------------------------------------------------------------------------

struct ExecutedAction {
    double time = 0;
    std::string name;
    std::vector<std::string> args;
    bool natural = false;

    std::string text() const {
        std::string s = real_to_string(time) + " " + name + "(";
        for (size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
        return s + ")";
    }
};

struct ValidationReport {
    enum class Verdict {
        Valid,
        GoalUnreached,
        PreconditionFailure,
        NaturalActionViolation,
        NumericError
    };
    Verdict verdict = Verdict::GoalUnreached;
    std::string message;
    int failing_step = -1;  // 1-based plan step index
    std::vector<ExecutedAction> sequence;
    std::optional<double> witness;

    static const char* verdict_name(Verdict v) {
        switch (v) {
            case Verdict::Valid: return "valid";
            case Verdict::GoalUnreached: return "goal-unreached";
            case Verdict::PreconditionFailure: return "precondition-failure";
            case Verdict::NaturalActionViolation: return "natural-action-violation";
            case Verdict::NumericError: return "numeric-error";
        }
        return "?";
    }
};

// ---------------------------------------------------------------------------
// World and initial state

inline World make_world(const pddl::PlanningInstance& inst, const HybridBat& bat) {
    World w;
    w.bat = &bat;
    w.inst = &inst;
    for (const auto& [f, i] : bat.table.init_of) w.init_syms.insert(i);
    for (const auto& ga : inst.prob.init_atoms)
        if (!bat.table.is_rel_fluent(ga.sym)) {
            std::vector<std::string> args(ga.args.begin(), ga.args.end());
            w.static_rel.insert(ground_key(ga.sym, args));
        }
    for (const auto& ia : inst.prob.init_assigns)
        if (bat.table.f_s.count(ia.fn)) {
            std::vector<std::string> args(ia.args.begin(), ia.args.end());
            w.static_fn[ground_key(ia.fn, args)] = ia.value;
        }
    return w;
}

inline GroundState initial_state(const World& w) {
    GroundState st;
    st.start = 0;
    const auto& tab = w.bat->table;
    for (const auto& ga : w.inst->prob.init_atoms) {
        if (!tab.is_rel_fluent(ga.sym)) continue;
        std::vector<std::string> args(ga.args.begin(), ga.args.end());
        std::string key = ground_key(ga.sym, args);
        if (tab.process_fluents.count(ga.sym)) st.active.insert(key);
        else st.rel.insert(key);
    }
    for (const auto& ia : w.inst->prob.init_assigns) {
        std::vector<std::string> args(ia.args.begin(), ia.args.end());
        std::string key = ground_key(ia.fn, args);
        if (tab.f_t.count(ia.fn)) st.init[key] = ia.value;
        else if (tab.f_d.count(ia.fn)) st.fn[key] = ia.value;
    }
    // every zero-ary temporal fluent needs its value at time 0; instances
    // with object arguments are checked lazily at first evaluation
    for (const auto& f : tab.f_t) {
        if (w.inst->fn_arity.at(f) != 0) continue;
        if (!st.init.count(f))
            throw eval_error("missing initial value for temporal fluent '" + f + "'");
    }
    return st;
}

// ---------------------------------------------------------------------------
// Ground actions

struct GroundAction {
    std::string name;
    std::vector<std::string> args;
    bool natural = false;

    std::string key() const {
        std::string k = name + "(";
        for (size_t i = 0; i < args.size(); ++i) k += (i ? "," : "") + args[i];
        return k + ")";
    }
};

inline std::vector<GroundAction> ground_naturals(const World& w) {
    std::vector<GroundAction> out;
    for (const auto& [name, info] : w.bat->actions) {
        if (!info.natural) continue;
        std::vector<std::vector<std::string>> tuples{{}};
        for (const auto& p : info.params) {
            std::vector<std::vector<std::string>> next;
            for (const auto& tup : tuples)
                for (const auto& o : w.inst->objects_of(p.type)) {
                    auto t2 = tup;
                    t2.push_back(o);
                    next.push_back(std::move(t2));
                }
            tuples = std::move(next);
        }
        for (auto& tup : tuples) out.push_back({name, std::move(tup), true});
    }
    std::sort(out.begin(), out.end(),
              [](const GroundAction& a, const GroundAction& b) { return a.key() < b.key(); });
    return out;
}

inline Env action_env(const World& w, const GroundAction& ga, double t) {
    const auto& info = w.bat->actions.at(ga.name);
    Env env;
    for (size_t i = 0; i < info.params.size(); ++i) env[info.params[i].name] = ga.args[i];
    env[var::t] = t;
    return env;
}

inline bool poss(const World& w, const Evaluator& ev, const GroundAction& ga, double t) {
    auto it = w.bat->apa_rhs.find(ga.name);
    if (it == w.bat->apa_rhs.end())
        throw eval_error("unknown action '" + ga.name + "'");
    return ev.holds(it->second, action_env(w, ga, t));
}

// Apply a possible ground action at time t: all effect conditions and values
// are read in the old state (two-phase update, add wins over delete); the
// F_init default branch freezes each temporal fluent's value at t.
inline GroundState apply(const World& w, const GroundState& st, const NumParams& np,
                         const GroundAction& ga, double t) {
    if (t < st.start - np.eps_t)
        throw eval_error("action '" + ga.key() + "' at t=" + real_to_string(t) +
                         " precedes situation start " + real_to_string(st.start));
    Evaluator ev(w, st, np);
    const auto& tab = w.bat->table;
    Env base = action_env(w, ga, t);

    std::set<std::string> adds_rel, dels_rel, adds_act, dels_act;
    std::map<std::string, double> set_fn, set_init;

    for (const auto& r : w.bat->rules) {
        if (r.action != ga.name) continue;
        // enumerate the rule's extra universally quantified variables
        std::vector<Env> envs{base};
        for (const auto& q : r.quant) {
            std::vector<Env> next;
            for (const auto& e : envs)
                for (const auto& o : w.inst->objects_sorted) {
                    Env e2 = e;
                    e2[q.name] = o;
                    next.push_back(std::move(e2));
                }
            envs = std::move(next);
        }
        for (const auto& env : envs) {
            if (!ev.holds(r.cond, env)) continue;
            std::vector<std::string> args;
            for (const auto& a : r.args) args.push_back(ev.obj(a, env));
            std::string key = ground_key(r.fluent, args);
            switch (r.target) {
                case EffectRule::Target::AddRel:
                    (tab.process_fluents.count(r.fluent) ? adds_act : adds_rel).insert(key);
                    break;
                case EffectRule::Target::DelRel:
                    (tab.process_fluents.count(r.fluent) ? dels_act : dels_rel).insert(key);
                    break;
                case EffectRule::Target::SetFn:
                    set_fn[key] = ev.num(r.value, env);
                    break;
                case EffectRule::Target::SetInit:
                    set_init[key] = ev.num(r.value, env);
                    break;
            }
        }
    }

    GroundState out = st;
    out.suppressed.clear();
    out.start = t;
    out.history.push_back(ga.key() + "@" + real_to_string(t));
    for (const auto& k : dels_rel) out.rel.erase(k);
    for (const auto& k : adds_rel) out.rel.insert(k);
    for (const auto& k : dels_act) out.active.erase(k);
    for (const auto& k : adds_act) out.active.insert(k);
    for (const auto& [k, v] : set_fn) out.fn[k] = v;
    // temporal fluents: explicit effect value, otherwise continuity (the most
    // recent value, evaluated in the old situation at the action's time)
    for (auto& [k, v] : out.init) {
        auto it = set_init.find(k);
        v = it != set_init.end() ? it->second : ev.flow().value(k, t);
    }
    for (const auto& [k, v] : set_init)
        out.init[k] = v;
    return out;
}

// ---------------------------------------------------------------------------
// Natural-action scheduling: fire naturals as soon as possible, in
// lexicographic order at shared instants, skipping firings that would not
// change the state (which the precondition axioms otherwise allow forever).

struct Scheduler {
    const World& w;
    NumParams np;
    std::vector<GroundAction> naturals;
    size_t fired_count = 0;

    explicit Scheduler(const World& w_, const NumParams& np_)
        : w(w_), np(np_), naturals(ground_naturals(w_)) {}

    // earliest trigger of any natural in [state.start, until]; none if quiet
    std::optional<double> next_trigger(const GroundState& st, double until) const {
        Evaluator ev(w, st, np);
        std::optional<double> best;
        double cap = std::min(until, st.start + np.horizon);
        for (const auto& ga : naturals) {
            if (st.suppressed.count(ga.key())) continue;
            double tmax = best ? std::min(*best, cap) : cap;
            auto rhs = w.bat->apa_rhs.at(ga.name);
            auto t = find_trigger_time(rhs, var::t, ev, action_env(w, ga, st.start),
                                       st.start, tmax);
            if (t && (!best || *t < *best)) best = t;
        }
        return best;
    }

    // fire every natural triggering within eps_t of `t`, lexicographically
    void fire_at(GroundState& st, double t, std::vector<ExecutedAction>& seq) {
        // `naturals` is already sorted by key
        for (const auto& ga : naturals) {
            if (st.suppressed.count(ga.key())) continue;
            Evaluator ev(w, st, np);
            if (!poss(w, ev, ga, t)) continue;
            GroundState next = apply(w, st, np, ga, t);
            if (next.same_values(st, np.eps_v)) {
                st.suppressed.insert(ga.key());  // no-op: suppress until state changes
                continue;
            }
            if (++fired_count > np.natural_cap)
                throw eval_error("natural-action firing cap exceeded (livelock?)");
            seq.push_back({t, ga.name, ga.args, true});
            st = std::move(next);
        }
    }

    // advance the state by firing all naturals with triggers <= until
    void run(GroundState& st, double until, std::vector<ExecutedAction>& seq) {
        for (size_t guard = 0; guard <= np.natural_cap; ++guard) {
            auto t = next_trigger(st, until);
            if (!t) return;
            size_t before = seq.size();
            fire_at(st, *t, seq);
            if (seq.size() == before && *t >= until - np.eps_t) return;
        }
        throw eval_error("natural-action scheduling did not converge (livelock?)");
    }
};

// ---------------------------------------------------------------------------
// Validation

inline ValidationReport validate(const World& w, const std::vector<PlanStep>& plan,
                                 const NumParams& np) {
    ValidationReport rep;
    try {
        GroundState st = initial_state(w);
        Scheduler sched(w, np);

        for (size_t i = 0; i + 1 < plan.size(); ++i)
            if (plan[i + 1].time < plan[i].time - np.eps_t)
                throw parse_error("plan times must be nondecreasing", plan[i + 1].line, 1);

        double last_time = 0;
        for (size_t i = 0; i < plan.size(); ++i) {
            const auto& step = plan[i];
            auto it = w.bat->actions.find(step.name);
            if (it == w.bat->actions.end())
                throw parse_error("unknown action '" + step.name + "'", step.line, 1);
            if (it->second.params.size() != step.args.size())
                throw parse_error("action '" + step.name + "' expects " +
                                      std::to_string(it->second.params.size()) + " argument(s)",
                                  step.line, 1);
            for (const auto& a : step.args)
                if (!w.inst->object_types.count(a))
                    throw parse_error("unknown object '" + a + "'", step.line, 1);
            if (it->second.natural) {
                rep.verdict = ValidationReport::Verdict::NaturalActionViolation;
                rep.failing_step = int(i) + 1;
                rep.message = "'" + step.name + "' is a natural action; it fires on its "
                              "own and may not be scheduled by the plan";
                return rep;
            }
            if (i + 1 < plan.size() && std::fabs(plan[i + 1].time - step.time) <= np.eps_t) {
                rep.verdict = ValidationReport::Verdict::PreconditionFailure;
                rep.failing_step = int(i) + 2;
                rep.message = "two agent actions share the instant t=" +
                              real_to_string(step.time) + "; ordering would be ambiguous";
                return rep;
            }

            // naturals triggering at or before the step fire first
            sched.run(st, step.time, rep.sequence);

            GroundAction ga{step.name, step.args, false};
            if (step.time < st.start - np.eps_t) {
                rep.verdict = ValidationReport::Verdict::NaturalActionViolation;
                rep.failing_step = int(i) + 1;
                rep.message = "a natural action advanced the situation to t=" +
                              real_to_string(st.start) + ", after the planned time t=" +
                              real_to_string(step.time);
                return rep;
            }
            Evaluator ev(w, st, np);
            if (!poss(w, ev, ga, step.time)) {
                rep.verdict = ValidationReport::Verdict::PreconditionFailure;
                rep.failing_step = int(i) + 1;
                rep.message = "precondition of '" + ga.key() + "' is false at t=" +
                              real_to_string(step.time);
                return rep;
            }
            st = apply(w, st, np, ga, step.time);
            rep.sequence.push_back({step.time, step.name, step.args, false});
            last_time = step.time;
        }

        // goal search, interleaved with any remaining natural firings: within
        // each quiet segment the earliest witness is sought before the next
        // natural changes the situation
        double T = w.bat->goal.horizon;
        double end = std::max(last_time, T) + np.goal_margin;
        for (size_t guard = 0; guard <= np.natural_cap; ++guard) {
            double lo = std::max(st.start, T);
            auto trig = sched.next_trigger(st, end);
            double hi = trig ? std::min(*trig, end) : end;
            Evaluator ev(w, st, np);
            auto witness = find_trigger_time(w.bat->goal.body, var::t, ev, {}, lo, hi);
            if (witness) {
                rep.verdict = ValidationReport::Verdict::Valid;
                rep.witness = *witness;
                return rep;
            }
            if (!trig || *trig > end) break;
            // fire (or suppress, for no-ops) whatever triggers at *trig; either
            // way the next iteration sees a strictly later trigger or none
            sched.fire_at(st, *trig, rep.sequence);
        }
        rep.verdict = ValidationReport::Verdict::GoalUnreached;
        rep.message = "no goal witness found in [" +
                      real_to_string(std::max(st.start, T)) + ", " + real_to_string(end) + "]";
    } catch (const eval_error& e) {
        rep.verdict = ValidationReport::Verdict::NumericError;
        rep.message = e.what();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Trajectory export: CSV rows of all ground temporal and atemporal numeric
// fluents at the sampling resolution, with '#' situation boundary markers.

inline std::string trace(const World& w, const std::vector<PlanStep>& plan,
                         const NumParams& np, double sample_step,
                         std::optional<double> until = std::nullopt) {
    // re-run the validation to collect the executed sequence and witness
    ValidationReport rep = validate(w, plan, np);
    if (rep.verdict == ValidationReport::Verdict::NumericError)
        throw eval_error(rep.message);

    // column set: every temporal fluent instance from init, then F_d keys
    GroundState st = initial_state(w);
    std::vector<std::string> tcols, dcols;
    for (const auto& [k, _] : st.init) tcols.push_back(k);
    for (const auto& [k, _] : st.fn) dcols.push_back(k);

    std::ostringstream os;
    auto col_name = [](const std::string& key) {
        std::string c = key;
        for (auto& ch : c)
            if (ch == ' ') ch = ':';
        return c;
    };
    os << "time";
    for (const auto& c : tcols) os << "," << col_name(c);
    for (const auto& c : dcols) os << "," << col_name(c);
    os << "\n";

    double end = until ? *until
               : rep.witness ? std::max(*rep.witness, st.start)
                             : (rep.sequence.empty() ? 0.0 : rep.sequence.back().time);

    auto emit_segment = [&](const GroundState& s, double from, double to) {
        Evaluator ev(w, s, np);
        for (double t = from; t <= to + 1e-12; t += sample_step) {
            double tt = std::min(t, to);
            os << real_to_string(tt);
            for (const auto& c : tcols) os << "," << real_to_string(ev.flow().value(c, tt));
            for (const auto& c : dcols) os << "," << real_to_string(s.fn.at(c));
            os << "\n";
            if (tt >= to) break;
        }
        // close the segment exactly at its end
        if (to > from && std::fmod(to - from, sample_step) > 1e-12) {
            os << real_to_string(to);
            for (const auto& c : tcols) os << "," << real_to_string(ev.flow().value(c, to));
            for (const auto& c : dcols) os << "," << real_to_string(s.fn.at(c));
            os << "\n";
        }
    };

    size_t idx = 0;
    for (const auto& ea : rep.sequence) {
        double to = std::max(ea.time, st.start);
        emit_segment(st, st.start, to);
        os << "# " << ea.text() << (ea.natural ? " (natural)" : "") << "\n";
        st = apply(w, st, np, {ea.name, ea.args, ea.natural}, ea.time);
        ++idx;
    }
    (void)idx;
    if (end > st.start) emit_segment(st, st.start, end);
    else emit_segment(st, st.start, st.start);
    return os.str();
}

inline std::string report_text(const ValidationReport& rep) {
    std::ostringstream os;
    os << "verdict: " << ValidationReport::verdict_name(rep.verdict) << "\n";
    if (rep.witness) os << "witness: t = " << real_to_string(*rep.witness) << "\n";
    if (rep.failing_step >= 0) os << "failing step: " << rep.failing_step << "\n";
    if (!rep.message.empty()) os << "detail: " << rep.message << "\n";
    os << "executed sequence:\n";
    for (const auto& ea : rep.sequence)
        os << "  " << ea.text() << (ea.natural ? " (natural)" : "") << "\n";
    return os.str();
}

} // namespace hsc
