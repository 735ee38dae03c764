#pragma once

// Ground numeric engine: evaluates terms and uniform formulas over a ground
// state, integrates temporal fluents within a situation (closed form for
// polynomial rates, joint RK4 otherwise), and finds earliest trigger times
// for natural-action conditions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hsc/compile.hpp"

namespace hsc {

struct eval_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumParams {
    double h = 1e-2;          // integration / scan step
    double eps_t = 1e-6;      // time tolerance
    double eps_v = 1e-9;      // value tolerance
    double horizon = 1e4;     // natural-action search horizon
    size_t natural_cap = 100000;
    double goal_margin = 1000;  // goal-witness search extends this far past the plan
    double diverge = 1e12;    // |value| beyond this aborts integration
};

inline std::string ground_key(const std::string& sym, const std::vector<std::string>& args) {
    std::string k = sym;
    for (const auto& a : args) k += " " + a;
    return k;
}

// immutable per-instance context shared by all states
struct World {
    const HybridBat* bat = nullptr;
    const pddl::PlanningInstance* inst = nullptr;
    std::map<std::string, double> static_fn;  // ground F_s values
    std::set<std::string> static_rel;         // ground static predicate atoms
    std::set<std::string> init_syms;          // the F_init symbols

    bool is_init_sym(const std::string& s) const { return init_syms.count(s) > 0; }
    std::string base_of(const std::string& init_sym) const {
        for (const auto& [f, i] : bat->table.init_of)
            if (i == init_sym) return f;
        return init_sym;
    }
};

struct GroundState {
    double start = 0;
    std::set<std::string> rel;            // ground relational fluent atoms
    std::set<std::string> active;         // ground process-fluent atoms
    std::map<std::string, double> fn;     // ground F_d values
    std::map<std::string, double> init;   // ground F_t values at `start`
    std::vector<std::string> history;     // serialized ground action terms
    std::set<std::string> suppressed;     // naturals whose firing is a no-op here

    bool same_values(const GroundState& o, double eps_v) const {
        if (rel != o.rel || active != o.active) return false;
        if (fn.size() != o.fn.size() || init.size() != o.init.size()) return false;
        for (const auto& [k, v] : fn) {
            auto it = o.fn.find(k);
            if (it == o.fn.end() || std::fabs(it->second - v) > eps_v) return false;
        }
        for (const auto& [k, v] : init) {
            auto it = o.init.find(k);
            if (it == o.init.end() || std::fabs(it->second - v) > eps_v) return false;
        }
        return true;
    }
};

// ---------------------------------------------------------------------------
// Flow: the within-situation trajectories of all ground temporal fluents.
// Built lazily per state; trajectory samples are cached monotonically so that
// trigger scans amortize to one integration pass.

namespace detail {

// polynomial in the integration variable; index = degree
using Poly = std::vector<double>;

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}
inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

} // namespace detail

class Flow {
public:
    Flow(const World& w, const GroundState& st, const NumParams& np)
        : w_(w), st_(st), np_(np) {
        build();
    }

    bool flowing(const std::string& key) const { return index_.count(key) > 0; }

    // value of ground temporal fluent `key` at time t within this situation
    double value(const std::string& key, double t) {
        if (t < st_.start - np_.eps_t)
            throw eval_error("temporal fluent '" + key + "' evaluated at t=" +
                             real_to_string(t) + " before situation start " +
                             real_to_string(st_.start));
        t = std::max(t, st_.start);
        auto ii = index_.find(key);
        if (ii == index_.end()) {
            auto iv = st_.init.find(key);
            if (iv == st_.init.end())
                throw eval_error("missing initial value for temporal fluent '" + key + "'");
            return iv->second;
        }
        size_t i = ii->second;
        if (items_[i].poly) {
            // closed form: init + integral of the polynomial rate
            double dt = t - st_.start, acc = 0, p = dt;
            for (size_t k = 0; k < items_[i].poly->size(); ++k) {
                acc += (*items_[i].poly)[k] / double(k + 1) * p;
                p *= dt;
            }
            return items_[i].init + acc;
        }
        size_t n = size_t(std::floor((t - st_.start) / np_.h + 1e-12));
        extend(n);
        double tn = st_.start + double(n) * np_.h;
        double dt = t - tn;
        if (dt <= 1e-13) return samples_[n][i];
        return rk4_step(samples_[n], tn, dt)[i];
    }

    std::vector<std::string> flowing_keys() const {
        std::vector<std::string> ks;
        for (const auto& it : items_) ks.push_back(it.key);
        return ks;
    }

private:
    struct Item {
        std::string key;
        double init = 0;
        std::vector<TermPtr> rates;            // ground; free vars @tp (time) only
        std::optional<detail::Poly> poly;      // set when the summed rate is polynomial
    };

    const World& w_;
    const GroundState& st_;
    NumParams np_;
    std::vector<Item> items_;
    std::map<std::string, size_t> index_;
    std::vector<std::vector<double>> samples_;  // samples_[k][i]: value at start + k*h

    void build() {
        const auto& tab = w_.bat->table;
        for (const auto& sea : w_.bat->d_se) {
            // enumerate ground argument tuples of the fluent
            std::vector<std::vector<std::string>> tuples{{}};
            for (size_t i = 0; i < sea.arity; ++i) {
                std::vector<std::vector<std::string>> next;
                for (const auto& tup : tuples)
                    for (const auto& o : w_.inst->objects_sorted) {
                        auto t2 = tup;
                        t2.push_back(o);
                        next.push_back(std::move(t2));
                    }
                tuples = std::move(next);
            }
            for (const auto& tup : tuples) {
                std::vector<TermPtr> rates;
                for (const auto& e : sea.entries) {
                    // head constants must match the tuple; head variables bind
                    Binding bind;
                    bool match = true;
                    for (size_t i = 0; i < e.head_pattern.size(); ++i) {
                        if (e.head_pattern[i]->kind == TermKind::Constant) {
                            if (e.head_pattern[i]->sym != tup[i]) { match = false; break; }
                        } else {
                            bind[e.head_pattern[i]->sym] = mk_const(tup[i]);
                        }
                    }
                    if (!match) continue;
                    // context atom, now ground: active in this state?
                    FormulaPtr ctx = substitute(e.context, bind);
                    std::vector<std::string> cargs;
                    for (size_t i = 0; i + 1 < ctx->terms.size(); ++i)
                        cargs.push_back(ctx->terms[i]->sym);
                    if (!st_.active.count(ground_key(ctx->sym, cargs))) continue;
                    rates.push_back(substitute(e.rate, bind));
                }
                if (rates.empty()) continue;
                Item it;
                it.key = ground_key(sea.fluent, tup);
                auto iv = st_.init.find(it.key);
                if (iv == st_.init.end())
                    throw eval_error("missing initial value for temporal fluent '" +
                                     it.key + "'");
                it.init = iv->second;
                it.rates = std::move(rates);
                index_[it.key] = items_.size();
                items_.push_back(std::move(it));
            }
        }
        (void)tab;
        // closed-form dispatch: only when every rate in the situation is a
        // polynomial in the time variable with atemporal coefficients
        bool all_poly = true;
        for (auto& it : items_) {
            detail::Poly sum{0.0};
            bool ok = true;
            for (const auto& r : it.rates) {
                auto p = as_poly(r);
                if (!p) { ok = false; break; }
                sum = detail::poly_add(sum, *p);
            }
            if (ok) it.poly = sum; else all_poly = false;
        }
        if (!all_poly)
            for (auto& it : items_) it.poly.reset();  // joint RK4 for everything
        if (!items_.empty() && samples_.empty()) {
            std::vector<double> y0;
            for (const auto& it : items_) y0.push_back(it.init);
            samples_.push_back(std::move(y0));
        }
    }

    std::optional<detail::Poly> as_poly(const TermPtr& t) const {
        using detail::Poly;
        switch (t->kind) {
            case TermKind::RealLit: return Poly{t->num};
            case TermKind::Variable:
                if (t->sort == Sort::Real) return Poly{0.0, 1.0};  // the time variable
                return std::nullopt;
            case TermKind::FuncApp: {
                const auto& tab = w_.bat->table;
                std::vector<std::string> args;
                for (const auto& a : t->args)
                    if (a->kind == TermKind::Constant) args.push_back(a->sym);
                if (tab.f_s.count(t->sym)) {
                    auto it = w_.static_fn.find(ground_key(t->sym, args));
                    if (it == w_.static_fn.end()) return std::nullopt;
                    return Poly{it->second};
                }
                if (tab.f_d.count(t->sym)) {
                    auto it = st_.fn.find(ground_key(t->sym, args));
                    if (it == st_.fn.end()) return std::nullopt;
                    return Poly{it->second};
                }
                return std::nullopt;  // temporal fluent: not atemporal
            }
            case TermKind::Arith: {
                if (t->sym == "+" || t->sym == "*") {
                    Poly acc = t->sym == "+" ? Poly{0.0} : Poly{1.0};
                    for (const auto& a : t->args) {
                        auto p = as_poly(a);
                        if (!p) return std::nullopt;
                        acc = t->sym == "+" ? detail::poly_add(acc, *p)
                                            : detail::poly_mul(acc, *p);
                    }
                    return acc;
                }
                if (t->sym == "-") {
                    auto p0 = as_poly(t->args[0]);
                    if (!p0) return std::nullopt;
                    if (t->args.size() == 1) {
                        for (auto& c : *p0) c = -c;
                        return p0;
                    }
                    Poly acc = *p0;
                    for (size_t i = 1; i < t->args.size(); ++i) {
                        auto p = as_poly(t->args[i]);
                        if (!p) return std::nullopt;
                        for (auto& c : *p) c = -c;
                        acc = detail::poly_add(acc, *p);
                    }
                    return acc;
                }
                if (t->sym == "/") {
                    auto p0 = as_poly(t->args[0]);
                    if (!p0) return std::nullopt;
                    double d = 1;
                    for (size_t i = 1; i < t->args.size(); ++i) {
                        auto p = as_poly(t->args[i]);
                        if (!p || p->size() != 1) return std::nullopt;
                        d *= (*p)[0];
                    }
                    if (d == 0) throw eval_error("division by zero in rate expression");
                    for (auto& c : *p0) c /= d;
                    return p0;
                }
                return std::nullopt;
            }
            default: return std::nullopt;
        }
    }

    // rate evaluation at (tau, Y): Y holds the flowing fluents' candidate values
    double rate_at(const TermPtr& t, double tau, const std::vector<double>& y) const {
        switch (t->kind) {
            case TermKind::RealLit: return t->num;
            case TermKind::Variable:
                if (t->sort == Sort::Real) return tau;  // the integration variable
                throw eval_error("unbound variable '" + t->sym + "' in rate expression");
            case TermKind::FuncApp: {
                const auto& tab = w_.bat->table;
                std::vector<std::string> args;
                for (const auto& a : t->args)
                    if (a->kind == TermKind::Constant) args.push_back(a->sym);
                if (tab.f_t.count(t->sym)) {
                    std::string key = ground_key(t->sym, args);
                    const TermPtr& time_arg = t->args[t->args.size() - 2];
                    auto it = index_.find(key);
                    if (it == index_.end()) {
                        auto iv = st_.init.find(key);
                        if (iv == st_.init.end())
                            throw eval_error("missing initial value for temporal fluent '" +
                                             key + "'");
                        return iv->second;
                    }
                    if (time_arg->kind == TermKind::Variable && time_arg->sort == Sort::Real)
                        return y[it->second];
                    throw eval_error("rate for a temporal fluent may only read other "
                                     "temporal fluents at the current time");
                }
                std::string key = ground_key(t->sym, args);
                if (tab.f_s.count(t->sym)) {
                    auto it = w_.static_fn.find(key);
                    if (it == w_.static_fn.end())
                        throw eval_error("no value for static function '" + key + "'");
                    return it->second;
                }
                auto it = st_.fn.find(key);
                if (it == st_.fn.end())
                    throw eval_error("no value for fluent '" + key + "'");
                return it->second;
            }
            case TermKind::Arith: {
                std::vector<double> xs;
                for (const auto& a : t->args) xs.push_back(rate_at(a, tau, y));
                if (t->sym == "+") {
                    double s = 0;
                    for (double x : xs) s += x;
                    return s;
                }
                if (t->sym == "*") {
                    double s = 1;
                    for (double x : xs) s *= x;
                    return s;
                }
                if (t->sym == "-") {
                    if (xs.size() == 1) return -xs[0];
                    double s = xs[0];
                    for (size_t i = 1; i < xs.size(); ++i) s -= xs[i];
                    return s;
                }
                if (t->sym == "/") {
                    double s = xs[0];
                    for (size_t i = 1; i < xs.size(); ++i) {
                        if (xs[i] == 0)
                            throw eval_error("division by zero in rate expression");
                        s /= xs[i];
                    }
                    return s;
                }
                throw eval_error("unknown arithmetic operator '" + t->sym + "'");
            }
            default:
                throw eval_error("unsupported term in rate expression");
        }
    }

    std::vector<double> derivs(double tau, const std::vector<double>& y) const {
        std::vector<double> d(items_.size(), 0.0);
        for (size_t i = 0; i < items_.size(); ++i)
            for (const auto& r : items_[i].rates) d[i] += rate_at(r, tau, y);
        return d;
    }

    std::vector<double> rk4_step(const std::vector<double>& y, double tau, double dt) const {
        auto k1 = derivs(tau, y);
        std::vector<double> tmp(y.size());
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt / 2 * k1[i];
        auto k2 = derivs(tau + dt / 2, tmp);
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt / 2 * k2[i];
        auto k3 = derivs(tau + dt / 2, tmp);
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt * k3[i];
        auto k4 = derivs(tau + dt, tmp);
        std::vector<double> out(y.size());
        for (size_t i = 0; i < y.size(); ++i) {
            out[i] = y[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            if (!std::isfinite(out[i]) || std::fabs(out[i]) > np_.diverge)
                throw eval_error("integration diverged for '" + items_[i].key +
                                 "' near t=" + real_to_string(tau));
        }
        return out;
    }

    void extend(size_t n) {
        while (samples_.size() <= n) {
            size_t k = samples_.size() - 1;
            double tau = st_.start + double(k) * np_.h;
            samples_.push_back(rk4_step(samples_[k], tau, np_.h));
        }
    }
};

// ---------------------------------------------------------------------------
// Evaluator: terms and uniform ground formulas over (World, GroundState)

using Value = std::variant<std::string, double>;
using Env = std::map<std::string, Value>;

class Evaluator {
public:
    Evaluator(const World& w, const GroundState& st, const NumParams& np)
        : w_(w), st_(st), np_(np) {}

    Flow& flow() const {
        if (!flow_) flow_ = std::make_shared<Flow>(w_, st_, np_);
        return *flow_;
    }

    double num(const TermPtr& t, const Env& env) const {
        Value v = eval(t, env);
        if (auto* d = std::get_if<double>(&v)) return *d;
        throw eval_error("expected a numeric term, got object '" +
                         std::get<std::string>(v) + "'");
    }

    std::string obj(const TermPtr& t, const Env& env) const {
        Value v = eval(t, env);
        if (auto* s = std::get_if<std::string>(&v)) return *s;
        throw eval_error("expected an object term");
    }

    Value eval(const TermPtr& t, const Env& env) const {
        const auto& tab = w_.bat->table;
        switch (t->kind) {
            case TermKind::Variable: {
                auto it = env.find(t->sym);
                if (it == env.end())
                    throw eval_error("unbound variable '" + t->sym + "'");
                return it->second;
            }
            case TermKind::Constant: return t->sym;
            case TermKind::RealLit: return t->num;
            case TermKind::Start: return st_.start;
            case TermKind::TimeOf: {
                const TermPtr& a = t->args[0];
                if (a->kind == TermKind::ActionApp && !a->args.empty())
                    return num(a->args.back(), env);
                throw eval_error("time() applied to a non-ground action term");
            }
            case TermKind::FuncApp: {
                if (tab.f_t.count(t->sym)) {
                    std::vector<std::string> args;
                    for (size_t i = 0; i + 2 < t->args.size(); ++i)
                        args.push_back(obj(t->args[i], env));
                    double tt = num(t->args[t->args.size() - 2], env);
                    return flow().value(ground_key(t->sym, args), tt);
                }
                bool dyn = tab.f_d.count(t->sym) > 0;
                bool ini = w_.is_init_sym(t->sym);
                size_t nargs = t->args.size() - ((dyn || ini) ? 1 : 0);
                std::vector<std::string> args;
                for (size_t i = 0; i < nargs; ++i) args.push_back(obj(t->args[i], env));
                std::string key = ground_key(t->sym, args);
                if (ini) {
                    // the initial-value store is keyed by the base fluent name
                    std::string bkey = ground_key(w_.base_of(t->sym), args);
                    auto it = st_.init.find(bkey);
                    if (it == st_.init.end())
                        throw eval_error("missing initial value for temporal fluent '" +
                                         bkey + "'");
                    return it->second;
                }
                if (dyn) {
                    auto it = st_.fn.find(key);
                    if (it == st_.fn.end())
                        throw eval_error("no value for fluent '" + key + "'");
                    return it->second;
                }
                auto it = w_.static_fn.find(key);
                if (it == w_.static_fn.end())
                    throw eval_error("no value for static function '" + key + "'");
                return it->second;
            }
            case TermKind::Arith: {
                std::vector<double> xs;
                for (const auto& a : t->args) xs.push_back(num(a, env));
                if (t->sym == "+") {
                    double s = 0;
                    for (double x : xs) s += x;
                    return s;
                }
                if (t->sym == "*") {
                    double s = 1;
                    for (double x : xs) s *= x;
                    return s;
                }
                if (t->sym == "-") {
                    if (xs.size() == 1) return -xs[0];
                    double s = xs[0];
                    for (size_t i = 1; i < xs.size(); ++i) s -= xs[i];
                    return s;
                }
                if (t->sym == "/") {
                    double s = xs[0];
                    for (size_t i = 1; i < xs.size(); ++i) {
                        if (xs[i] == 0) throw eval_error("division by zero");
                        s /= xs[i];
                    }
                    return s;
                }
                throw eval_error("unknown arithmetic operator '" + t->sym + "'");
            }
            case TermKind::Integral: {
                // numeric quadrature by stepping the integrand at the flow step
                double lo = num(t->args[1], env), hi = num(t->args[2], env);
                if (hi < lo) return -integrate_quad(t, hi, lo, env);
                return integrate_quad(t, lo, hi, env);
            }
            default:
                throw eval_error("term of this kind has no ground value");
        }
    }

    bool holds(const FormulaPtr& f, const Env& env) const {
        const auto& tab = w_.bat->table;
        switch (f->kind) {
            case FormulaKind::Pred: {
                std::vector<std::string> args;
                for (const auto& t : f->terms) args.push_back(obj(t, env));
                if (tab.type_preds.count(f->sym))
                    return w_.inst->object_has_type(args[0], f->sym);
                return w_.static_rel.count(ground_key(f->sym, args)) > 0;
            }
            case FormulaKind::Fluent: {
                std::vector<std::string> args;
                for (size_t i = 0; i + 1 < f->terms.size(); ++i)
                    args.push_back(obj(f->terms[i], env));
                std::string key = ground_key(f->sym, args);
                if (tab.process_fluents.count(f->sym)) return st_.active.count(key) > 0;
                return st_.rel.count(key) > 0;
            }
            case FormulaKind::Compare: {
                Value a = eval(f->terms[0], env), b = eval(f->terms[1], env);
                if (std::holds_alternative<std::string>(a) ||
                    std::holds_alternative<std::string>(b)) {
                    if (f->sym != "=" && f->sym != "!=")
                        throw eval_error("ordered comparison of object terms");
                    bool eq = a == b;
                    return f->sym == "=" ? eq : !eq;
                }
                double d = std::get<double>(a) - std::get<double>(b);
                if (f->sym == "=") return std::fabs(d) <= np_.eps_v;
                if (f->sym == "!=") return std::fabs(d) > np_.eps_v;
                if (f->sym == "<") return d < -np_.eps_v;
                if (f->sym == ">") return d > np_.eps_v;
                if (f->sym == "<=") return d <= np_.eps_v;
                if (f->sym == ">=") return d >= -np_.eps_v;
                throw eval_error("unknown comparison '" + f->sym + "'");
            }
            case FormulaKind::Not: return !holds(f->sub[0], env);
            case FormulaKind::And:
                for (const auto& g : f->sub)
                    if (!holds(g, env)) return false;
                return true;
            case FormulaKind::Or:
                for (const auto& g : f->sub)
                    if (holds(g, env)) return true;
                return false;
            case FormulaKind::Implies:
                return !holds(f->sub[0], env) || holds(f->sub[1], env);
            case FormulaKind::Iff:
                return holds(f->sub[0], env) == holds(f->sub[1], env);
            case FormulaKind::Exists:
            case FormulaKind::Forall: {
                // object quantifiers range over the finite domain closure
                for (const auto& [v, sort] : f->binders)
                    if (sort != Sort::Object)
                        throw eval_error("cannot decide a quantifier over sort '" +
                                         std::string(sort == Sort::Real ? "real" : "situation") +
                                         "' by enumeration");
                std::vector<Env> envs{env};
                for (const auto& [v, _] : f->binders) {
                    std::vector<Env> next;
                    for (const auto& e : envs)
                        for (const auto& o : w_.inst->objects_sorted) {
                            Env e2 = e;
                            e2[v] = o;
                            next.push_back(std::move(e2));
                        }
                    envs = std::move(next);
                }
                if (f->kind == FormulaKind::Exists) {
                    for (const auto& e : envs)
                        if (holds(f->sub[0], e)) return true;
                    return false;
                }
                for (const auto& e : envs)
                    if (!holds(f->sub[0], e)) return false;
                return true;
            }
            default:
                throw eval_error("formula of this kind is not ground-evaluable");
        }
    }

    const GroundState& state() const { return st_; }
    const World& world() const { return w_; }
    const NumParams& params() const { return np_; }

private:
    const World& w_;
    const GroundState& st_;
    NumParams np_;
    mutable std::shared_ptr<Flow> flow_;

    double integrate_quad(const TermPtr& t, double lo, double hi, const Env& env) const {
        size_t n = std::max<size_t>(2, size_t(std::ceil((hi - lo) / np_.h)));
        if (n % 2) ++n;  // composite Simpson needs an even panel count
        double dt = (hi - lo) / double(n), acc = 0;
        for (size_t k = 0; k <= n; ++k) {
            Env e = env;
            e[t->sym] = lo + double(k) * dt;
            double v = num(t->args[0], e);
            acc += v * (k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0));
        }
        return acc * dt / 3.0;
    }
};

// ---------------------------------------------------------------------------
// Earliest trigger time of a condition with one free time variable

namespace detail {

inline void collect_comparisons(const FormulaPtr& f, std::vector<const Formula*>& out) {
    if (f->kind == FormulaKind::Compare) out.push_back(f.get());
    for (const auto& g : f->sub) collect_comparisons(g, out);
}

} // namespace detail

// Earliest t in [t0, tmax] at which `cond` (free time variable `tvar`) holds.
// Scans at the sampling step; refines each first-true bracket by bisection on
// the condition, and probes comparison-atom roots so that isolated equality
// triggers (e.g. t = 5) are not stepped over.
inline std::optional<double> find_trigger_time(const FormulaPtr& cond, const std::string& tvar,
                                               const Evaluator& ev, const Env& base_env,
                                               double t0, double tmax) {
    const auto& np = ev.params();
    auto holds_at = [&](double t) {
        Env e = base_env;
        e[tvar] = t;
        return ev.holds(cond, e);
    };
    if (tmax < t0) return std::nullopt;
    if (holds_at(t0)) return t0;
    if (!free_vars(cond).count(tvar)) return std::nullopt;  // time-independent and false

    std::vector<const Formula*> atoms;
    detail::collect_comparisons(cond, atoms);
    auto diff_at = [&](const Formula* a, double t) -> std::optional<double> {
        Env e = base_env;
        e[tvar] = t;
        Value l = ev.eval(a->terms[0], e), r = ev.eval(a->terms[1], e);
        if (!std::holds_alternative<double>(l) || !std::holds_alternative<double>(r))
            return std::nullopt;
        return std::get<double>(l) - std::get<double>(r);
    };

    std::vector<std::optional<double>> prev_diff(atoms.size());
    for (size_t i = 0; i < atoms.size(); ++i) prev_diff[i] = diff_at(atoms[i], t0);

    double t_prev = t0;
    while (t_prev < tmax - 1e-15) {
        double t = std::min(t_prev + np.h, tmax);
        // candidate roots of comparison atoms inside (t_prev, t]
        std::optional<double> best;
        auto consider = [&](double r) {
            if (r < t0 - 1e-15 || r > tmax + 1e-15) return;
            for (double probe : {r, r - np.eps_t / 2, r + np.eps_t / 2}) {
                if (probe < t0 || probe > tmax) continue;
                if (holds_at(probe)) {
                    if (!best || probe < *best) best = probe;
                    return;
                }
            }
        };
        for (size_t i = 0; i < atoms.size(); ++i) {
            auto d1 = diff_at(atoms[i], t);
            auto d0 = prev_diff[i];
            prev_diff[i] = d1;
            if (!d0 || !d1) continue;
            if ((*d0 > 0) == (*d1 > 0) && *d0 != 0 && *d1 != 0) continue;
            // bisect the sign change to high precision
            double lo = t_prev, hi = t, flo = *d0;
            if (flo == 0) { consider(lo); continue; }
            for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
                double mid = (lo + hi) / 2;
                auto fm = diff_at(atoms[i], mid);
                if (!fm) break;
                if (*fm == 0 || (*fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = *fm;
                    if (*fm == 0) { hi = mid; break; }
                } else {
                    hi = mid;
                }
            }
            double root = (lo + hi) / 2;
            // snap to a clean value when the atom is affine on the bracket
            auto da = diff_at(atoms[i], t_prev);
            auto db = diff_at(atoms[i], t);
            auto dm = diff_at(atoms[i], (t_prev + t) / 2);
            if (da && db && dm) {
                double lin = (*da + *db) / 2;
                double scale = std::max({std::fabs(*da), std::fabs(*db), 1.0});
                if (std::fabs(*dm - lin) <= 1e-9 * scale && *db != *da) {
                    double exact = t_prev - *da * (t - t_prev) / (*db - *da);
                    if (std::fabs(exact - root) <= np.h) root = exact;
                }
            }
            consider(root);
        }
        if (holds_at(t)) {
            // first true grid point: the switch is in (t_prev, t]; bisect on truth
            double lo = t_prev, hi = t;
            while (hi - lo > np.eps_t / 8) {
                double mid = (lo + hi) / 2;
                if (holds_at(mid)) hi = mid; else lo = mid;
            }
            if (!best || hi < *best) best = hi;
        }
        if (best) return *best;
        t_prev = t;
    }
    return std::nullopt;
}

} // namespace hsc
