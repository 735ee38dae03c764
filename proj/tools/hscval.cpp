// hscval: compile PDDL+ instances to hybrid basic action theories and
// validate timestamped plans against them.
//
// Exit codes: 0 success/valid, 1 parse or link error, 2 compile error,
// 3 invalid plan, 4 numeric error or potential well-definedness violation.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsc/config.hpp"
#include "hsc/validate.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

struct Pipeline {
    hsc::pddl::Domain dom;
    hsc::pddl::Problem prob;
    hsc::pddl::PlanningInstance inst;
    hsc::HybridBat bat;
};

// exit 1 on parse/link errors, 2 on compile errors
Pipeline build(const std::string& domain_path, const std::string& problem_path) {
    Pipeline p;
    try {
        p.dom = hsc::pddl::parse_domain(slurp(domain_path));
        p.prob = hsc::pddl::parse_problem(slurp(problem_path));
        p.inst = hsc::pddl::link(p.dom, p.prob);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::exit(1);
    }
    try {
        p.bat = hsc::compile(p.inst);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::exit(2);
    }
    return p;
}

nlohmann::json report_json(const hsc::ValidationReport& rep) {
    nlohmann::json j;
    j["verdict"] = hsc::ValidationReport::verdict_name(rep.verdict);
    if (rep.witness) j["witness"] = *rep.witness;
    if (rep.failing_step >= 0) j["failing_step"] = rep.failing_step;
    if (!rep.message.empty()) j["detail"] = rep.message;
    auto& seq = j["sequence"] = nlohmann::json::array();
    for (const auto& ea : rep.sequence) {
        nlohmann::json a;
        a["time"] = ea.time;
        a["action"] = ea.name;
        a["args"] = ea.args;
        a["natural"] = ea.natural;
        seq.push_back(a);
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hscval: hybrid situation-calculus compiler and plan validator"};
    app.require_subcommand(1);

    hsc::Config cfg;
    std::string config_path;
    try {
        cfg = hsc::Config::from_environment();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::string domain_path, problem_path, plan_path;
    bool json_report = false;

    auto add_common = [&](CLI::App* c, bool with_plan) {
        c->add_option("domain", domain_path, "PDDL+ domain file")->required();
        c->add_option("problem", problem_path, "PDDL+ problem file")->required();
        if (with_plan) c->add_option("plan", plan_path, "plan file")->required();
        c->add_option("--config", config_path, "config file (key=value lines)");
        c->add_option("--step", cfg.num.h, "integration and scan step");
        c->add_option("--eps-time", cfg.num.eps_t, "time tolerance");
        c->add_option("--eps-value", cfg.num.eps_v, "value tolerance");
        c->add_option("--horizon", cfg.num.horizon, "natural-action search horizon");
        c->add_option("--goal-margin", cfg.num.goal_margin,
                      "goal-witness search margin past the plan");
        c->add_option("--natural-cap", cfg.num.natural_cap, "natural firing cap");
        c->add_option("--sea-cap", cfg.sea_cap, "SEA expansion disjunct cap");
        c->add_option("--out", cfg.out_path, "output file (default stdout)");
    };

    auto* c_compile = app.add_subcommand("compile", "emit the hybrid action theory");
    add_common(c_compile, false);
    c_compile->add_flag("--expand-sea", cfg.expand_sea,
                        "expand state evolution axioms to full power-set form");

    auto* c_validate = app.add_subcommand("validate", "validate a timestamped plan");
    add_common(c_validate, true);
    c_validate->add_flag("--json", json_report, "machine-readable report");

    auto* c_trace = app.add_subcommand("trace", "export fluent trajectories as CSV");
    add_common(c_trace, true);
    double until = -1;
    c_trace->add_option("--trace-step", cfg.trace_step, "sampling step for rows");
    c_trace->add_option("--until", until, "extend the trace to this time");
    c_trace->add_option("--csv", cfg.csv_path, "CSV output file (default stdout)");

    auto* c_check = app.add_subcommand("check",
                                       "print classification and well-definedness findings");
    add_common(c_check, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            // file values sit between defaults and flags: load, then re-apply flags
            hsc::Config file_cfg = cfg;
            file_cfg.load_file(config_path);
            // flags were parsed directly into cfg fields; a field keeps its
            // flag value only when the flag was actually given
            auto pick = [&](const CLI::App* sub) {
                auto given = [&](const std::string& name) {
                    auto* o = sub->get_option_no_throw(name);
                    return o && o->count() > 0;
                };
                if (!given("--step")) cfg.num.h = file_cfg.num.h;
                if (!given("--eps-time")) cfg.num.eps_t = file_cfg.num.eps_t;
                if (!given("--eps-value")) cfg.num.eps_v = file_cfg.num.eps_v;
                if (!given("--horizon")) cfg.num.horizon = file_cfg.num.horizon;
                if (!given("--goal-margin")) cfg.num.goal_margin = file_cfg.num.goal_margin;
                if (!given("--natural-cap")) cfg.num.natural_cap = file_cfg.num.natural_cap;
                if (!given("--sea-cap")) cfg.sea_cap = file_cfg.sea_cap;
                if (!given("--out")) cfg.out_path = file_cfg.out_path;
                if (!given("--trace-step")) cfg.trace_step = file_cfg.trace_step;
                if (!given("--csv")) cfg.csv_path = file_cfg.csv_path;
                if (!given("--expand-sea")) cfg.expand_sea = file_cfg.expand_sea;
            };
            for (auto* sub : {c_compile, c_validate, c_trace, c_check})
                if (sub->parsed()) pick(sub);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (c_compile->parsed()) {
        Pipeline p = build(domain_path, problem_path);
        try {
            hsc::SerializeOpts so;
            so.expand_sea = cfg.expand_sea;
            so.sea_cap = cfg.sea_cap;
            emit(cfg.out_path, hsc::serialize_bat(p.bat, p.inst, so));
        } catch (const hsc::compile_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }

    if (c_validate->parsed() || c_trace->parsed()) {
        Pipeline p = build(domain_path, problem_path);
        std::vector<hsc::PlanStep> plan;
        try {
            plan = hsc::parse_plan(slurp(plan_path));
        } catch (const std::exception& e) {
            std::cerr << "error: plan: " << e.what() << "\n";
            return 1;
        }
        hsc::World w = hsc::make_world(p.inst, p.bat);
        if (c_trace->parsed()) {
            try {
                std::optional<double> u;
                if (until >= 0) u = until;
                emit(cfg.csv_path, hsc::trace(w, plan, cfg.num, cfg.trace_step, u));
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 4;
            }
            return 0;
        }
        hsc::ValidationReport rep = hsc::validate(w, plan, cfg.num);
        std::string text = json_report ? report_json(rep).dump(2) + "\n"
                                       : hsc::report_text(rep);
        try {
            emit(cfg.out_path, text);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        using V = hsc::ValidationReport::Verdict;
        if (rep.verdict == V::Valid) return 0;
        if (rep.verdict == V::NumericError) return 4;
        return 3;
    }

    if (c_check->parsed()) {
        Pipeline p = build(domain_path, problem_path);
        std::ostringstream os;
        os << hsc::classification_table(p.bat.table);
        auto findings = hsc::check_well_defined(p.bat, p.inst);
        bool bad = false;
        os << "well-definedness findings:\n";
        for (const auto& f : findings) {
            const char* tag = f.tag == hsc::Finding::Tag::Guaranteed ? "guaranteed"
                            : f.tag == hsc::Finding::Tag::RuntimeChecked ? "runtime-checked"
                                                                         : "potential-violation";
            if (f.tag == hsc::Finding::Tag::PotentialViolation) bad = true;
            os << "  [" << tag << "] " << f.message << "\n";
        }
        try {
            emit(cfg.out_path, os.str());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return bad ? 4 : 0;
    }
    return 0;
}
