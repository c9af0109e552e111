#include "blockplan/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "blockplan/closure.hpp"
#include "blockplan/instance_io.hpp"
#include "blockplan/planner.hpp"
#include "blockplan/render.hpp"
#include "blockplan/validator.hpp"

namespace blockplan {

const std::vector<std::string> kKnownFeatures = {
    "subassembly", "concurrent_placements", "multi_action_step", "nonmonotone", "ordering",
};

std::string default_corpus_dir() {
    if (const char* env = std::getenv("BLOCKPLAN_CORPUS_DIR")) return env;
    return "corpus";
}

std::vector<CorpusEntry> load_manifest(const std::string& dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(dir + "/manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", 0) != kFormatVersion)
        throw FormatError("manifest: missing or wrong format version");

    std::vector<CorpusEntry> out;
    for (const auto& j : doc.at("instances")) {
        CorpusEntry e;
        e.name = j.at("name").get<std::string>();
        e.file = j.at("file").get<std::string>();
        if (j.contains("expect")) {
            const auto& x = j.at("expect");
            e.expect.unsat = x.value("unsat", false);
            if (x.contains("makespan")) e.expect.makespan = x.at("makespan").get<int>();
            if (x.contains("features"))
                for (const auto& f : x.at("features")) {
                    std::string name = f.get<std::string>();
                    if (std::find(kKnownFeatures.begin(), kKnownFeatures.end(), name) ==
                        kKnownFeatures.end())
                        throw FormatError("manifest: unknown feature '" + name + "'");
                    e.expect.features.push_back(name);
                }
            e.expect.all_plans_concurrent = x.value("all_plans_concurrent", false);
            if (x.contains("overhang")) {
                const auto& o = x.at("overhang");
                OverhangExpect ov;
                ov.surface = o.at("surface").get<std::string>();
                ov.edge = o.at("edge").get<std::string>() == "left" ? GoalAtom::Edge::Left
                                                                    : GoalAtom::Edge::Right;
                ov.units = o.at("units").get<int>();
                e.expect.overhang = ov;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

struct PlanTraits {
    bool subassembly = false;
    bool concurrent_placements = false;
    bool multi_action_step = false;
    bool nonmonotone = false;
    WorldState final_state;
};

PlanTraits replay_traits(const ProblemInstance& inst, const Plan& plan) {
    PlanTraits t;
    WorldState state = initial_state(inst);
    StabilityCache cache;
    std::set<Sym> placed_before;
    for (const JointAction& ja : plan.steps) {
        int places = 0;
        for (const Action& a : ja) places += a.kind == Action::Kind::Place;
        t.multi_action_step |= ja.size() >= 2;
        t.concurrent_placements |= places >= 2;

        ApplyResult r = apply(inst, state, ja, &cache);
        if (!r.ok()) throw ValidationError("corpus plan does not replay: " + r.rejected);
        // picked this step: grippers loaded now that were not loaded before
        for (const auto& [g, held] : r.state->held)
            if (!state.holding(g)) {
                t.subassembly |= held.members.size() >= 2;
                for (const auto& m : held.members)
                    t.nonmonotone |= placed_before.count(m.block) > 0;
            }
        // placed this step: blocks anchored now that were not anchored before
        for (const auto& [id, p] : r.state->anchored) {
            (void)p;
            if (!state.is_anchored(id)) placed_before.insert(id);
        }
        state = std::move(*r.state);
    }
    t.final_state = std::move(state);
    return t;
}

bool has_double_placement(const Plan& p) {
    for (const auto& ja : p.steps) {
        int places = 0;
        for (const auto& a : ja) places += a.kind == Action::Kind::Place;
        if (places >= 2) return true;
    }
    return false;
}

} // namespace

CorpusResult run_corpus_entry(const std::string& dir, const CorpusEntry& entry) {
    CorpusResult res;
    res.name = entry.name;
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&](bool pass, std::string detail) {
        res.pass = pass;
        res.detail = std::move(detail);
        res.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
        return res;
    };

    ProblemInstance inst;
    try {
        inst = load_instance(dir + "/" + entry.file);
    } catch (const std::exception& e) {
        return done(false, std::string("load failed: ") + e.what());
    }

    SearchResult sr = plan(inst);

    if (entry.expect.unsat) {
        if (sr.outcome == SearchResult::Outcome::Unsat)
            return done(true, "unsat(" + std::to_string(sr.unsat_makespan) + ") as expected");
        return done(false, sr.outcome == SearchResult::Outcome::FoundPlan
                               ? "expected unsat but found a plan"
                               : "expected unsat but hit a resource limit");
    }

    if (sr.outcome == SearchResult::Outcome::Unsat)
        return done(false, "unsat(" + std::to_string(sr.unsat_makespan) + ")");
    if (sr.outcome == SearchResult::Outcome::ResourceLimit)
        return done(false, "resource limit (" + sr.limit + ")");

    res.makespan = (int)sr.plan.steps.size();
    if (entry.expect.makespan && *entry.expect.makespan != res.makespan)
        return done(false, "makespan " + std::to_string(res.makespan) + ", expected " +
                               std::to_string(*entry.expect.makespan));

    auto violations = validate_plan(inst, sr.plan);
    if (!violations.empty()) {
        std::string d = "plan fails validation:";
        for (const auto& v : violations)
            d += " [" + to_string(v.category) + "] " + v.detail + ";";
        return done(false, d);
    }

    PlanTraits traits;
    try {
        traits = replay_traits(inst, sr.plan);
    } catch (const std::exception& e) {
        return done(false, e.what());
    }

    for (const std::string& f : entry.expect.features) {
        bool have = f == "subassembly"             ? traits.subassembly
                    : f == "concurrent_placements" ? traits.concurrent_placements
                    : f == "multi_action_step"     ? traits.multi_action_step
                    : f == "nonmonotone"           ? traits.nonmonotone
                                                   : inst.ordering.has_value();
        if (!have) return done(false, "plan lacks expected feature '" + f + "'");
    }

    if (entry.expect.overhang) {
        const auto& ov = *entry.expect.overhang;
        int extent = overhang_extent(inst, traits.final_state, ov.surface, ov.edge);
        if (extent != ov.units)
            return done(false, "overhang extent " + std::to_string(extent) + ", expected " +
                                   std::to_string(ov.units));
    }

    if (entry.expect.all_plans_concurrent) {
        EnumerationResult all = enumerate_plans(inst);
        if (!all.complete) return done(false, "plan enumeration hit a resource limit");
        if (all.plans.empty()) return done(false, "plan enumeration found nothing");
        for (const Plan& p : all.plans)
            if (!has_double_placement(p))
                return done(false, "a plan without simultaneous placements exists");
    }

    RenderSpec ascii{RenderSpec::Format::Ascii, false, 1};
    RenderSpec svg{RenderSpec::Format::Svg, false, 1};
    res.artifacts[entry.name + ".plan.json"] = serialize_plan(sr.plan);
    res.artifacts[entry.name + ".final.txt"] = render_state(inst, traits.final_state, ascii);
    res.artifacts[entry.name + ".final.svg"] = render_state(inst, traits.final_state, svg);

    return done(true, "makespan " + std::to_string(res.makespan));
}

std::vector<CorpusResult> run_corpus(const std::string& dir, int jobs) {
    auto entries = load_manifest(dir);
    std::vector<CorpusResult> out(entries.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < entries.size(); ++i) out[i] = run_corpus_entry(dir, entries[i]);
        return out;
    }
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= entries.size()) return;
            out[i] = run_corpus_entry(dir, entries[i]);
        }
    };
    std::vector<std::future<void>> futs;
    for (int j = 0; j < jobs; ++j) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
    return out;
}

} // namespace blockplan
