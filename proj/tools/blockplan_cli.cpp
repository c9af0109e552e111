#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blockplan/closure.hpp"
#include "blockplan/corpus.hpp"
#include "blockplan/instance_io.hpp"
#include "blockplan/planner.hpp"
#include "blockplan/render.hpp"
#include "blockplan/validator.hpp"

namespace bp = blockplan;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        bp::write_file(out_path, text);
}

int cmd_plan(const std::string& instance_path, int makespan, bool all, long max_nodes,
             long max_millis, const std::string& seed_order, const std::string& out_path) {
    if (seed_order != "default") {
        std::cerr << "unsupported --seed-order '" << seed_order << "' (only: default)\n";
        return 2;
    }
    bp::ProblemInstance inst = bp::load_instance(instance_path);
    bp::SearchLimits limits;
    limits.max_nodes = max_nodes;
    limits.max_millis = max_millis;
    if (makespan >= 0) limits.makespan = makespan;

    if (all) {
        bp::EnumerationResult res = bp::enumerate_plans(inst, limits);
        nlohmann::ordered_json doc;
        doc["format"] = bp::kFormatVersion;
        doc["plans"] = nlohmann::ordered_json::array();
        for (const bp::Plan& p : res.plans)
            doc["plans"].push_back(nlohmann::ordered_json::parse(bp::serialize_plan(p)));
        emit(doc.dump(2) + "\n", out_path);
        std::cerr << "plans: " << res.plans.size() << (res.complete ? "" : " (incomplete)")
                  << ", nodes: " << res.stats.nodes_expanded << "\n";
        if (!res.complete) {
            std::cerr << "resource limit hit during enumeration\n";
            return 1;
        }
        return res.plans.empty() ? 1 : 0;
    }

    bp::SearchResult res = bp::plan(inst, limits);
    std::ostringstream stats;
    stats << "nodes: " << res.stats.nodes_expanded
          << ", stability rejections: " << res.stats.stability_rejections
          << ", duplicates: " << res.stats.duplicates
          << ", horizons: " << res.stats.horizons_tried << ", workers: 1\n";
    switch (res.outcome) {
    case bp::SearchResult::Outcome::FoundPlan:
        emit(bp::serialize_plan(res.plan), out_path);
        std::cerr << "plan found, makespan " << res.plan.steps.size() << "\n" << stats.str();
        return 0;
    case bp::SearchResult::Outcome::Unsat:
        std::cerr << "unsat(" << res.unsat_makespan << "): no plan within the bound\n"
                  << stats.str();
        return 1;
    case bp::SearchResult::Outcome::ResourceLimit:
        std::cerr << "resource limit (" << res.limit << ") before a conclusion\n" << stats.str();
        return 1;
    }
    return 1;
}

int cmd_validate(const std::string& instance_path, const std::string& plan_path) {
    bp::ProblemInstance inst = bp::load_instance(instance_path);
    bp::Plan plan = bp::load_plan(plan_path, inst);
    auto violations = bp::validate_plan(inst, plan);
    if (violations.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& v : violations) {
        std::cerr << (v.step < 0 ? std::string("final") : "step " + std::to_string(v.step))
                  << " [" << bp::to_string(v.category) << "] " << v.detail << "\n";
    }
    return 1;
}

int cmd_check_stability(const std::string& instance_path, bool dump) {
    bp::ProblemInstance inst = bp::load_instance(instance_path, /*verify_stability=*/false);
    bp::ContactProblem cp = bp::extract_contacts(inst, inst.initial);
    if (dump) std::cout << bp::dump_lp(cp);
    bp::StabilityVerdict v = bp::check_static_equilibrium(cp);
    bool ok = v.stable;
    std::cout << "anchored: " << (v.stable ? "stable" : "unstable (body '" + v.witness + "')")
              << "\n";
    for (const auto& [g, held] : inst.initial.held) {
        bp::StabilityVerdict hv = bp::check_held_stability(inst, inst.initial, g);
        ok &= hv.stable;
        std::cout << "held " << g << " (" << held.members.size() << " blocks): "
                  << (hv.stable ? "stable" : "unstable (body '" + hv.witness + "')") << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_inspect(const std::string& instance_path) {
    bp::ProblemInstance inst = bp::load_instance(instance_path, /*verify_stability=*/false);
    std::cout << "surfaces:";
    for (const auto& s : inst.surfaces)
        std::cout << " " << s.id << "[" << s.x_lo << ".." << s.x_hi << "]@" << s.level;
    std::cout << "\nblocks:";
    for (const auto& b : inst.blocks)
        std::cout << " " << b.id << "(size " << b.size << ", weight " << b.weight << ")";
    std::cout << "\ngrippers:";
    for (const auto& g : inst.grippers) std::cout << " " << g;
    std::cout << "\nmakespan bound: " << inst.makespan << "\ncolumns: [" << inst.col_lo()
              << ".." << inst.col_hi() << "]\n";
    if (inst.ordering)
        std::cout << "ordering: left_to_right, slack " << inst.ordering->slack << "\n";

    bp::DerivedRelations rel = bp::derive_relations(inst, inst.initial);
    std::cout << "on:";
    for (const auto& a : rel.on)
        std::cout << " (" << a.b << "," << a.l << "," << a.u << "," << a.v << ")";
    std::cout << "\nsupported:";
    for (const auto& [b, l] : rel.supported) std::cout << " (" << b << "," << l << ")";
    std::cout << "\n" << bp::render_state(inst, inst.initial, bp::RenderSpec{});
    return 0;
}

int cmd_render(const std::string& instance_path, const std::string& plan_path,
               const std::string& format, bool per_step, int scale,
               const std::string& out_path) {
    bp::ProblemInstance inst = bp::load_instance(instance_path);
    bp::RenderSpec spec;
    spec.format = format == "svg" ? bp::RenderSpec::Format::Svg : bp::RenderSpec::Format::Ascii;
    spec.per_step = per_step;
    spec.scale = scale;
    std::string doc;
    if (plan_path.empty()) {
        doc = bp::render_state(inst, inst.initial, spec);
    } else {
        bp::Plan plan = bp::load_plan(plan_path, inst);
        doc = bp::render_plan(inst, plan, spec);
    }
    emit(doc, out_path);
    return 0;
}

int cmd_corpus_list(const std::string& dir) {
    for (const auto& e : bp::load_manifest(dir)) {
        std::cout << e.name << "  (" << e.file << ")";
        if (e.expect.unsat) std::cout << "  expect: unsat";
        else if (e.expect.makespan) std::cout << "  expect: makespan " << *e.expect.makespan;
        if (!e.expect.features.empty()) {
            std::cout << "  features:";
            for (const auto& f : e.expect.features) std::cout << " " << f;
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_corpus_run(const std::string& dir, int jobs, const std::string& out_dir) {
    auto results = bp::run_corpus(dir, jobs);
    bool all_pass = true;
    long total_ms = 0;
    for (const auto& r : results) {
        all_pass &= r.pass;
        total_ms += r.millis;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.millis
                  << " ms)  " << r.detail << "\n";
        if (!out_dir.empty())
            for (const auto& [name, bytes] : r.artifacts) {
                std::filesystem::create_directories(out_dir);
                bp::write_file(out_dir + "/" + name, bytes);
            }
    }
    std::cout << (all_pass ? "all passed" : "FAILURES") << " (" << results.size()
              << " instances, " << total_ms << " ms total)\n";
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"block construction planning toolkit"};
    app.require_subcommand(1);

    std::string instance_path, plan_path, out_path, format = "ascii";
    std::string seed_order = "default";
    std::string corpus_dir = bp::default_corpus_dir();
    int makespan = -1, scale = 1, jobs = 1;
    long max_nodes = 20'000'000, max_millis = 0;
    bool all = false, per_step = false, dump = false;

    auto* c_plan = app.add_subcommand("plan", "search for a minimal-makespan plan");
    c_plan->add_option("instance", instance_path)->required();
    c_plan->add_option("--makespan", makespan, "override the instance bound");
    c_plan->add_flag("--all", all, "enumerate every plan within the bound");
    c_plan->add_option("--max-nodes", max_nodes);
    c_plan->add_option("--max-millis", max_millis);
    c_plan->add_option("--seed-order", seed_order, "tie-breaking order (default)");
    c_plan->add_option("--out", out_path, "write the plan document here");

    auto* c_val = app.add_subcommand("validate", "re-verify a plan independently");
    c_val->add_option("instance", instance_path)->required();
    c_val->add_option("plan", plan_path)->required();

    auto* c_stab = app.add_subcommand("check-stability", "static equilibrium of the initial state");
    c_stab->add_option("instance", instance_path)->required();
    c_stab->add_flag("--dump-lp", dump, "print the feasibility system");

    auto* c_ins = app.add_subcommand("inspect", "summarize an instance and its relations");
    c_ins->add_option("instance", instance_path)->required();

    auto* c_ren = app.add_subcommand("render", "draw the initial state or a plan");
    c_ren->add_option("instance", instance_path)->required();
    c_ren->add_option("--plan", plan_path, "replay and render this plan");
    c_ren->add_option("--format", format)->check(CLI::IsMember({"ascii", "svg"}));
    c_ren->add_flag("--per-step", per_step);
    c_ren->add_option("--scale", scale)->check(CLI::PositiveNumber);
    c_ren->add_option("--out", out_path);

    auto* c_corpus = app.add_subcommand("corpus", "benchmark suite");
    c_corpus->require_subcommand(1);
    auto* c_list = c_corpus->add_subcommand("list", "show manifest entries");
    c_list->add_option("--dir", corpus_dir, "corpus directory");
    auto* c_run = c_corpus->add_subcommand("run", "run the whole suite");
    c_run->add_option("--dir", corpus_dir, "corpus directory");
    c_run->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
    c_run->add_option("--out", out_path, "write plan/render artifacts here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_plan->parsed())
            return cmd_plan(instance_path, makespan, all, max_nodes, max_millis, seed_order,
                            out_path);
        if (c_val->parsed()) return cmd_validate(instance_path, plan_path);
        if (c_stab->parsed()) return cmd_check_stability(instance_path, dump);
        if (c_ins->parsed()) return cmd_inspect(instance_path);
        if (c_ren->parsed())
            return cmd_render(instance_path, plan_path, format, per_step, scale, out_path);
        if (c_list->parsed()) return cmd_corpus_list(corpus_dir);
        if (c_run->parsed()) return cmd_corpus_run(corpus_dir, jobs, out_path);
    } catch (const bp::SyntaxError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const bp::FormatError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const bp::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
