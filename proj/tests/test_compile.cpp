#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hsc/compile.hpp"

using namespace hsc;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

static const std::string kFixtures = HSC_FIXTURES;

static pddl::PlanningInstance instance(const std::string& base,
                                       const std::string& prob_base = "") {
    std::string pb = prob_base.empty() ? base : prob_base;
    return pddl::link(pddl::parse_domain(slurp(kFixtures + "/" + base + "-domain.pddl")),
                      pddl::parse_problem(slurp(kFixtures + "/" + pb + "-problem.pddl")));
}

static std::string axiom_text(const std::vector<Axiom>& axs, const std::string& subject) {
    for (const auto& a : axs)
        if (a.subject == subject) return serialize(a);
    FAIL(("no axiom for subject " + subject).c_str());
    return "";
}

TEST_CASE("car precondition axioms match their sources") {
    auto bat = compile(instance("car"));
    CHECK(axiom_text(bat.d_ap, "accelerate") ==
          "(<-> (poss (accelerate t) s) (and (running s) (< (a s) (up_limit))))");
    CHECK(axiom_text(bat.d_ap, "stop") ==
          "(<-> (poss (stop t) s) (and (= (v t s) 0) (>= (d t s) 30)))");
    // begin/end of a process get Pre and its negation
    CHECK(axiom_text(bat.d_ap, "begin_m") == "(<-> (poss (begin_m t) s) (running s))");
    CHECK(axiom_text(bat.d_ap, "end_m") == "(<-> (poss (end_m t) s) (not (running s)))");
    CHECK(axiom_text(bat.d_ap, "begin_w") ==
          "(<-> (poss (begin_w t) s) (and (running s) (>= (v t s) 50)))");
}

TEST_CASE("successor state axioms follow the three shapes") {
    auto bat = compile(instance("car"));
    // relational: positive/negative effect disjuncts around the frame
    CHECK(axiom_text(bat.d_ss, "running") ==
          "(<-> (running (do a s)) (and (running s) (not (or (exists (t1) (= a (stop "
          "t1))) (exists (t2) (= a (expl t2)))))))");
    CHECK(axiom_text(bat.d_ss, "engine_blown") ==
          "(<-> (engine_blown (do a s)) (or (exists (t) (= a (expl t))) (engine_blown "
          "s)))");
    // process fluent: begin adds, end deletes
    CHECK(axiom_text(bat.d_ss, "m") ==
          "(<-> (m (do a s)) (or (exists (t1) (= a (begin_m t1))) (and (m s) (not "
          "(exists (t2) (= a (end_m t2)))))))");
    // functional: effect values or inertia
    std::string a_ssa = axiom_text(bat.d_ss, "a");
    CHECK(a_ssa.find("(+ (a s) 1)") != std::string::npos);
    CHECK(a_ssa.find("(- (a s) 1)") != std::string::npos);
    CHECK(a_ssa.find("(expl") != std::string::npos);
    // temporal fluents untouched by discrete effects: the trivial init SSA
    CHECK(axiom_text(bat.d_ss, "v_init") ==
          "(<-> (= (v_init (do a s)) t) (= (v (time a) s) t))");
}

TEST_CASE("discrete effects on temporal fluents redirect to the init fluent") {
    std::string d =
        "(define (domain r) (:requirements :fluents :time) (:predicates (on)) "
        "(:functions (x)) "
        "(:action reset :parameters () :precondition (and) :effect (assign (x) 0)) "
        "(:action bump :parameters () :precondition (and) :effect (increase (x) 2)) "
        "(:process p :parameters () :precondition (on) "
        ":effect (increase (x) (* #t 1))))";
    std::string p =
        "(define (problem r1) (:domain r) (:init (= (x) 0)) (:goal (>= (x) 1)))";
    auto bat = compile(pddl::link(pddl::parse_domain(d), pddl::parse_problem(p)));
    std::string ssa = axiom_text(bat.d_ss, "x_init");
    // assign: y = 0; increase: y = x(time(a), s) + 2; default: continuity
    CHECK(ssa.find("(= t1 0)") != std::string::npos);          // assign
    CHECK(ssa.find("(+ (x t3 s) 2)") != std::string::npos);     // increase, read at action time
    CHECK(ssa.find("(= t1 (x (time a) s))") != std::string::npos);  // continuity default
}

TEST_CASE("type guards from Table 1 wrap quantifiers and parameters") {
    std::string d = R"((define (domain t)
      (:requirements :typing :adl)
      (:types block)
      (:predicates (clear ?b - block) (shaken))
      (:action shake
        :parameters (?b - block)
        :precondition (forall (?c - block) (clear ?c))
        :effect (shaken))))";
    std::string p =
        "(define (problem t1) (:domain t) (:objects b1 b2 - block) "
        "(:init (clear b1) (clear b2)) (:goal (shaken)))";
    auto bat = compile(pddl::link(pddl::parse_domain(d), pddl::parse_problem(p)));
    std::string apa = axiom_text(bat.d_ap, "shake");
    CHECK(apa == "(<-> (poss (shake x1 t) s) (and (block x1) (forall (x2) (-> (block "
                 "x2) (clear x2)))))");  // clear has no effects, so it is static
}

TEST_CASE("SEA lazy form and power-set expansion") {
    auto bat = compile(instance("car"));
    REQUIRE(bat.d_se.size() == 2);
    const Sea* v = bat.sea_for("v");
    REQUIRE(v != nullptr);
    CHECK(v->entries.size() == 2);
    CHECK(v->normal_form);

    auto ax = expand_sea(*v, bat.table);
    std::string txt = serialize(ax);
    CHECK(txt == slurp(std::string(HSC_GOLDEN) + "/car-v-sea.txt").substr(
                     0, txt.size()));
    // 4 disjuncts: the parsed right side of the biconditional is a 4-way or
    CHECK(ax.formula->sub[1]->kind == FormulaKind::Or);
    CHECK(ax.formula->sub[1]->sub.size() == 4);

    // the d SEA has one context => 2 disjuncts
    auto d_ax = expand_sea(*bat.sea_for("d"), bat.table);
    CHECK(d_ax.formula->sub[1]->sub.size() == 2);
}

TEST_CASE("SEA expansion respects the cap") {
    auto bat = compile(instance("car"));
    CHECK_THROWS_AS(expand_sea(*bat.sea_for("v"), bat.table, 2), compile_error);
}

TEST_CASE("surplus process parameters are grounded into SEA contexts") {
    std::string d = R"((define (domain g)
      (:requirements :typing :fluents :time)
      (:types tap)
      (:predicates (open_ ?t - tap))
      (:functions (level))
      (:process fill
        :parameters (?t - tap)
        :precondition (open_ ?t)
        :effect (increase (level) (* #t 1)))))";
    std::string p =
        "(define (problem g1) (:domain g) (:objects t1 t2 - tap) "
        "(:init (= (level) 0)) (:goal (>= (level) 1)))";
    auto bat = compile(pddl::link(pddl::parse_domain(d), pddl::parse_problem(p)));
    const Sea* sea = bat.sea_for("level");
    REQUIRE(sea != nullptr);
    // one entry per grounding of the surplus variable ?t
    CHECK(sea->entries.size() == 2);
    CHECK(to_text(sea->entries[0].context) != to_text(sea->entries[1].context));
}

TEST_CASE("TILs become one-shot guarded natural actions") {
    auto bat = compile(instance("til"));
    CHECK(bat.tils_horizon == 5);
    CHECK(axiom_text(bat.d_ap, "til_1") ==
          "(<-> (poss (til_1 t) s) (and (= t 5) (not (fired_1 s))))");
    CHECK(bat.actions.at("til_1").natural);
    // the goal wrapper uses T = 5
    CHECK(serialize(bat.goal.axiom) ==
          "(exists (t) (and (>= t (start s)) (>= t 5) (ready s)))");
    // negative TIL times are rejected
    auto inst = instance("til");
    auto prob = inst.prob;
    prob.tils.push_back({-1.0, "ready", {}, true});
    CHECK_THROWS_AS(compile(pddl::link(inst.dom, prob)), compile_error);
}

TEST_CASE("initial theory carries closure, unique names, time, and init facts") {
    auto bat = compile(instance("car"));
    std::set<std::string> s0;
    for (const auto& a : bat.d_s0) s0.insert(serialize(a));
    CHECK(s0.count("(= (start s0) 0)"));
    CHECK(s0.count("(running s0)"));
    CHECK(s0.count("(= (v 0 s0) 0)"));
    CHECK(s0.count("(= (a s0) 0)"));
    CHECK(s0.count("(= (up_limit) 1)"));
    CHECK(s0.count("(natural (expl t))"));
    CHECK(s0.count("(= (time (accelerate t)) t)"));

    std::set<std::string> una;
    for (const auto& a : bat.d_una) una.insert(serialize(a));
    CHECK(una.count("(forall (t1 t2) (-> (= (accelerate t1) (accelerate t2)) (= t1 t2)))"));
    CHECK(una.count("(forall (t1 t2) (not (= (accelerate t1) (begin_m t2))))"));
}

TEST_CASE("contradictory unconditional ground effects are diagnosed") {
    std::string d =
        "(define (domain bad) (:predicates (p)) "
        "(:action go :parameters () :precondition (and) :effect (and (p) (not (p)))))";
    std::string pr = "(define (problem b) (:domain bad) (:init) (:goal (p)))";
    CHECK_THROWS_AS(compile(pddl::link(pddl::parse_domain(d), pddl::parse_problem(pr))),
                    compile_error);
}

TEST_CASE("compile aggregates diagnostics from independent passes") {
    std::string d =
        "(define (domain bad2) (:predicates (p) (q)) "
        "(:action go1 :parameters () :precondition (and) :effect (and (p) (not (p)))) "
        ")";
    std::string pr =
        "(define (problem b2) (:domain bad2) (:init (at -3 (q))) (:goal (p)))";
    try {
        compile(pddl::link(pddl::parse_domain(d), pddl::parse_problem(pr)));
        FAIL("expected compile_error");
    } catch (const compile_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("adds and deletes") != std::string::npos);
        CHECK(msg.find("negative time") != std::string::npos);
    }
}

TEST_CASE("every emitted axiom re-parses and is canonical") {
    for (const char* base : {"car", "tank", "til"}) {
        auto inst = instance(base);
        auto bat = compile(inst);
        auto sig = make_signature(bat, inst);
        std::vector<const std::vector<Axiom>*> groups{&bat.d_ap, &bat.d_ss, &bat.d_una,
                                                      &bat.d_s0};
        for (const auto* g : groups)
            for (const auto& a : *g) {
                std::string txt = serialize(a);
                auto re = parse_formula(txt, sig);
                CHECK(to_text(canonicalize(re)) == txt);
            }
        std::string g = serialize(bat.goal.axiom);
        CHECK(to_text(canonicalize(parse_formula(g, sig))) == g);
    }
}

TEST_CASE("well-definedness findings") {
    auto car_bat = compile(instance("car"));
    auto car_inst = instance("car");
    bool bad = false;
    for (const auto& f : check_well_defined(car_bat, car_inst))
        if (f.tag == Finding::Tag::PotentialViolation) bad = true;
    CHECK(!bad);

    // hand-built SEA with overlapping, non-complementary contexts
    Sea sea;
    sea.fluent = "x";
    sea.arity = 0;
    sea.normal_form = false;
    auto sv = mk_var("@s", Sort::Situation);
    SeaEntry e1{{}, mk_fluent("p", {sv}), mk_real(1), "p"};
    SeaEntry e2{{}, mk_fluent("q", {sv}), mk_real(2), "q"};
    sea.entries = {e1, e2};
    HybridBat hb = car_bat;
    hb.d_se = {sea};
    bool overlap = false;
    for (const auto& f : check_well_defined(hb, car_inst))
        if (f.tag == Finding::Tag::PotentialViolation &&
            f.message.find("overlap") != std::string::npos)
            overlap = true;
    CHECK(overlap);
}
