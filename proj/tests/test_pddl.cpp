#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hsc/pddl.hpp"

using namespace hsc;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

static const std::string kFixtures = HSC_FIXTURES;

TEST_CASE("car domain parses with all schema kinds") {
    auto dom = pddl::parse_domain(slurp(kFixtures + "/car-domain.pddl"));
    CHECK(dom.name == "car");
    CHECK(dom.actions.size() == 3);
    CHECK(dom.processes.size() == 2);
    CHECK(dom.events.size() == 1);
    CHECK(dom.predicates.size() == 2);
    CHECK(dom.functions.size() == 5);

    const auto& m = dom.processes[0];
    CHECK(m.name == "m");
    REQUIRE(m.peff.size() == 2);
    CHECK(m.peff[0].fn == "v");
    CHECK(m.peff[1].fn == "d");
    // the (* #t ...) wrapper is consumed; the stored rate is the inner f-exp
    CHECK(m.peff[0].rate->kind == pddl::ExprKind::App);
    CHECK(m.peff[0].rate->sym == "a");
}

TEST_CASE("problem parses init, goal, and TILs") {
    auto prob = pddl::parse_problem(slurp(kFixtures + "/car-problem.pddl"));
    CHECK(prob.name == "car1");
    CHECK(prob.init_atoms.size() == 1);
    CHECK(prob.init_assigns.size() == 5);
    CHECK(prob.goal->kind == pddl::GdKind::Comp);

    auto til = pddl::parse_problem(slurp(kFixtures + "/til-problem.pddl"));
    REQUIRE(til.tils.size() == 1);
    CHECK(til.tils[0].time == 5);
    CHECK(til.tils[0].sym == "ready");
    CHECK(til.tils[0].positive);
}

TEST_CASE("durative actions are rejected by name") {
    std::string d = "(define (domain bad) (:requirements :durative-actions))";
    try {
        pddl::parse_domain(d);
        FAIL("expected rejection");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("durative") != std::string::npos);
    }
    std::string d2 =
        "(define (domain bad2) (:durative-action go :parameters () :duration (= ?d 1) "
        ":condition (and) :effect (and)))";
    CHECK_THROWS_AS(pddl::parse_domain(d2), parse_error);
}

TEST_CASE("process effects must carry the (* #t ...) wrapper") {
    std::string d =
        "(define (domain bad) (:requirements :fluents :time) (:predicates (on)) "
        "(:functions (x)) (:process p :parameters () :precondition (on) "
        ":effect (increase (x) 2)))";
    CHECK_THROWS_AS(pddl::parse_domain(d), parse_error);
}

TEST_CASE("typed parameters, either types, and quantified effects") {
    std::string d = R"((define (domain typed)
      (:requirements :typing :adl :fluents)
      (:types truck plane - vehicle)
      (:predicates (moved ?v - vehicle) (at_base ?v - vehicle))
      (:action move_all
        :parameters (?t - (either truck plane))
        :precondition (at_base ?t)
        :effect (forall (?v - vehicle) (when (at_base ?v) (moved ?v))))))";
    auto dom = pddl::parse_domain(d);
    REQUIRE(dom.actions.size() == 1);
    const auto& a = dom.actions[0];
    REQUIRE(a.params.size() == 1);
    CHECK(a.params[0].type.is_either());
    CHECK(a.params[0].type.names.size() == 2);

    std::string p = R"((define (problem typed1) (:domain typed)
      (:objects tr1 - truck pl1 - plane)
      (:init (at_base tr1) (at_base pl1))
      (:goal (moved tr1))))";
    auto inst = pddl::link(dom, pddl::parse_problem(p));
    CHECK(inst.object_has_type("tr1", "truck"));
    CHECK(inst.object_has_type("tr1", "vehicle"));
    CHECK(!inst.object_has_type("tr1", "plane"));
    CHECK(inst.objects_of(pddl::TypeExpr{{"vehicle"}}).size() == 2);
}

TEST_CASE("linker rejects broken references") {
    auto dom = pddl::parse_domain(slurp(kFixtures + "/car-domain.pddl"));
    auto prob = pddl::parse_problem(slurp(kFixtures + "/car-problem.pddl"));
    CHECK_NOTHROW(pddl::link(dom, prob));

    SUBCASE("undeclared predicate in goal") {
        auto p2 = prob;
        p2.goal = pddl::g_atom("nonexistent", {});
        CHECK_THROWS_AS(pddl::link(dom, p2), pddl::link_error);
    }
    SUBCASE("wrong arity in init") {
        auto p2 = prob;
        p2.init_atoms.push_back({"running", {"x"}});
        CHECK_THROWS_AS(pddl::link(dom, p2), pddl::link_error);
    }
    SUBCASE("undeclared object in init") {
        auto p2 = prob;
        p2.init_atoms.push_back({"running", {}});
        p2.init_assigns.push_back({"v", {"ghost"}, 1.0});
        CHECK_THROWS_AS(pddl::link(dom, p2), pddl::link_error);
    }
    SUBCASE("type cycle") {
        std::string d = "(define (domain cyc) (:requirements :typing) (:types a - b b - a))";
        CHECK_THROWS_AS(pddl::link(pddl::parse_domain(d),
                                   pddl::parse_problem("(define (problem p) (:domain cyc) "
                                                       "(:init) (:goal (and)))")),
                        pddl::link_error);
    }
    SUBCASE("unbound variable in precondition") {
        std::string d =
            "(define (domain ub) (:predicates (p ?x)) "
            "(:action go :parameters () :precondition (p ?y) :effect (and)))";
        CHECK_THROWS_AS(pddl::link(pddl::parse_domain(d),
                                   pddl::parse_problem("(define (problem p) (:domain ub) "
                                                       "(:init) (:goal (and)))")),
                        pddl::link_error);
    }
}

TEST_CASE("domain and problem pretty-printers re-parse to the same structure") {
    for (const char* base : {"car", "tank", "til", "badrate"}) {
        auto dom = pddl::parse_domain(slurp(kFixtures + "/" + base + "-domain.pddl"));
        auto dom2 = pddl::parse_domain(pddl::to_pddl(dom));
        CHECK(pddl::to_pddl(dom) == pddl::to_pddl(dom2));
    }
    auto prob = pddl::parse_problem(slurp(kFixtures + "/car-problem.pddl"));
    auto prob2 = pddl::parse_problem(pddl::to_pddl(prob));
    CHECK(pddl::to_pddl(prob) == pddl::to_pddl(prob2));
}

TEST_CASE("names are case-insensitive (lowercased)") {
    std::string d =
        "(define (domain Case) (:predicates (On)) "
        "(:action Go :parameters () :precondition (ON) :effect (and)))";
    auto dom = pddl::parse_domain(d);
    CHECK(dom.name == "case");
    CHECK(dom.actions[0].name == "go");
    CHECK(dom.actions[0].pre->sym == "on");
}
