#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "blockplan/model.hpp"
#include "blockplan/planner.hpp"
#include "blockplan/validator.hpp"
#include "testutil.hpp"

using namespace blockplan;

namespace {

ProblemInstance bare(std::vector<Surface> surfaces, std::vector<BlockSpec> blocks,
                     std::vector<Sym> grippers = {"g1"}) {
    ProblemInstance inst;
    inst.surfaces = std::move(surfaces);
    inst.blocks = std::move(blocks);
    inst.grippers = std::move(grippers);
    inst.makespan = 2;
    return inst;
}

void put(const ProblemInstance& inst, WorldState& s, const Sym& b, int x, int h) {
    GridIndex grid(inst, s);
    auto anchor = canonical_anchor(inst, grid, b, x, h);
    REQUIRE(anchor);
    s.anchored[b] = Placement{x, h, *anchor};
}

Action pick(const Sym& g, const Sym& b) {
    Action a;
    a.kind = Action::Kind::Pick;
    a.gripper = g;
    a.block = b;
    return a;
}

Action place(const Sym& g, const Sym& target, int u, int v) {
    Action a;
    a.kind = Action::Kind::Place;
    a.gripper = g;
    a.target = target;
    a.u = u;
    a.v = v;
    return a;
}

}  // namespace

TEST_CASE("pickable sets follow the support closure") {
    ProblemInstance inst = bare({{"table", 0, 0, 5}},
                                {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}, {"c", 1, 1.0, 0.5}});
    WorldState s;
    put(inst, s, "a", 0, 0);
    put(inst, s, "b", 0, 1);
    put(inst, s, "c", 0, 2);

    Pickable pa = pickable_set(inst, s, "a");
    CHECK(pa.ok());
    CHECK(pa.blocks == std::set<Sym>{"a", "b", "c"});
    Pickable pb = pickable_set(inst, s, "b");
    CHECK(pb.ok());
    CHECK(pb.blocks == std::set<Sym>{"b", "c"});
    Pickable pc = pickable_set(inst, s, "c");
    CHECK(pc.ok());
    CHECK(pc.blocks == std::set<Sym>{"c"});
}

TEST_CASE("a block resting on two locations cannot be picked") {
    ProblemInstance two_surfaces =
        bare({{"lsurf", 0, 0, 1}, {"rsurf", 0, 3, 4}}, {{"plank", 3, 1.0, 1.5}});
    WorldState bridge;
    put(two_surfaces, bridge, "plank", 1, 0);
    Pickable p = pickable_set(two_surfaces, bridge, "plank");
    CHECK(!p.ok());
    CHECK(!p.reason.empty());

    ProblemInstance piers = bare(
        {{"table", 0, 0, 5}}, {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}, {"deck", 3, 1.0, 1.5}});
    WorldState spanning;
    put(piers, spanning, "a", 0, 0);
    put(piers, spanning, "b", 2, 0);
    put(piers, spanning, "deck", 0, 1);
    CHECK(!pickable_set(piers, spanning, "deck").ok());
    // lifting a pier would tear the deck off its other pier
    CHECK(!pickable_set(piers, spanning, "a").ok());
    CHECK(!pickable_set(piers, spanning, "b").ok());
}

TEST_CASE("joint action enumeration is sorted, unique, and apply-clean") {
    for (const char* name : {"tiny_pair", "overhang1", "bridge_pillars"}) {
        ProblemInstance inst = testutil::load_corpus_instance(name);
        WorldState s = initial_state(inst);
        auto jas = enumerate_joint_actions(inst, s);
        REQUIRE(!jas.empty());
        CHECK(jas.front().empty());  // idle step always available
        CHECK(std::set<JointAction>(jas.begin(), jas.end()).size() == jas.size());
        CHECK(enumerate_joint_actions(inst, s) == jas);  // deterministic order
        StabilityCache cache;
        for (const auto& ja : jas) {
            for (size_t i = 1; i < ja.size(); ++i) CHECK(ja[i - 1].gripper < ja[i].gripper);
            CHECK_NOTHROW(apply(inst, s, ja, &cache));
        }
    }
}

TEST_CASE("apply reads preconditions from the pre-step state") {
    ProblemInstance inst =
        bare({{"table", 0, 0, 5}}, {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}}, {"g1", "g2"});
    WorldState s;
    put(inst, s, "a", 0, 0);
    put(inst, s, "b", 1, 0);

    // both grippers act at once
    ApplyResult both = apply(inst, s, {pick("g1", "a"), pick("g2", "b")});
    REQUIRE(both.ok());
    CHECK(both.state->anchored.empty());
    CHECK(both.state->holding("g1")->root == "a");
    CHECK(both.state->holding("g2")->root == "b");
    CHECK(both.state->t == s.t + 1);

    // placing into a cell only vacated this same step is malformed
    ApplyResult lifted = apply(inst, s, {pick("g1", "a")});
    REQUIRE(lifted.ok());
    CHECK_THROWS_AS(
        apply(inst, *lifted.state, {place("g1", "table", 1, 1), pick("g2", "b")}),
        ValidationError);

    // the same placement into a genuinely free cell is fine
    ApplyResult moved = apply(inst, *lifted.state, {place("g1", "table", 2, 1), pick("g2", "b")});
    REQUIRE(moved.ok());
    CHECK(moved.state->anchored.at("a").x == 2);
    CHECK(moved.state->holding("g2")->root == "b");
}

TEST_CASE("assemblies keep their internal anchors through a move") {
    ProblemInstance inst = testutil::load_corpus_instance("subassembly_move");
    WorldState s = initial_state(inst);

    ApplyResult up = apply(inst, s, {pick("g1", "m1")});
    REQUIRE(up.ok());
    const HeldAssembly* held = up.state->holding("g1");
    REQUIRE(held);
    CHECK(held->root == "m1");
    REQUIRE(held->members.size() == 2);
    const auto* rider = held->find("s1");
    REQUIRE(rider);
    CHECK(rider->dx == 1);
    CHECK(rider->dh == 1);
    CHECK(rider->anchor.loc == "m1");

    ApplyResult down = apply(inst, *up.state, {place("g1", "table", 5, 1)});
    REQUIRE(down.ok());
    CHECK(down.state->anchored.at("m1").x == 5);
    CHECK(down.state->anchored.at("s1").x == 6);
    CHECK(down.state->anchored.at("s1").h == 1);
    CHECK(down.state->anchored.at("s1").anchor.loc == "m1");
    CHECK(check_goal(inst, *down.state));
}

TEST_CASE("watermark ordering is enforced and updated") {
    ProblemInstance inst =
        bare({{"table", 0, 0, 5}}, {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}});
    inst.ordering = OrderingSpec{0};
    inst.makespan = 6;
    WorldState s;
    put(inst, s, "a", 0, 0);
    put(inst, s, "b", 1, 0);
    CHECK(!s.watermark.has_value());

    ApplyResult r1 = apply(inst, s, {pick("g1", "a")});
    REQUIRE(r1.ok());
    CHECK(!r1.state->watermark.has_value());  // picks never move it

    ApplyResult r2 = apply(inst, *r1.state, {place("g1", "table", 3, 1)});
    REQUIRE(r2.ok());
    CHECK(r2.state->watermark == 3);

    ApplyResult r3 = apply(inst, *r2.state, {pick("g1", "b")});
    REQUIRE(r3.ok());
    ApplyResult backwards = apply(inst, *r3.state, {place("g1", "table", 2, 1)});
    CHECK(!backwards.ok());
    CHECK(backwards.rejected == "ordering");

    ApplyResult onto = apply(inst, *r3.state, {place("g1", "a", 1, 1)});  // same column
    REQUIRE(onto.ok());
    CHECK(onto.state->watermark == 3);
}

TEST_CASE("unstable placements are rejected with a reason") {
    ProblemInstance inst = bare({{"table", 0, 0, 2}}, {{"m", 3, 1.0, 1.5}});
    WorldState s;
    put(inst, s, "m", 0, 0);
    ApplyResult up = apply(inst, s, {pick("g1", "m")});
    REQUIRE(up.ok());
    ApplyResult over = apply(inst, *up.state, {place("g1", "table", 2, 1)});
    CHECK(!over.ok());
    CHECK(over.rejected == "unstable");
}

TEST_CASE("goal requires empty grippers") {
    ProblemInstance inst =
        bare({{"table", 0, 0, 5}}, {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}});
    GoalAtom g;
    g.kind = GoalAtom::Kind::ExactCell;
    g.block = "a";
    g.x = 0;
    g.h = 0;
    inst.goal = {g};
    WorldState s;
    put(inst, s, "a", 0, 0);
    put(inst, s, "b", 2, 0);
    CHECK(check_goal(inst, s));
    ApplyResult held = apply(inst, s, {pick("g1", "b")});
    REQUIRE(held.ok());
    CHECK(!check_goal(inst, *held.state));
}

TEST_CASE("planning the corpus miniatures") {
    auto solve = [](const char* name) {
        return plan(testutil::load_corpus_instance(name));
    };

    SearchResult shift = solve("tiny_shift");
    REQUIRE(shift.outcome == SearchResult::Outcome::FoundPlan);
    CHECK(shift.plan.steps.size() == 2);
    CHECK(validate_plan(testutil::load_corpus_instance("tiny_shift"), shift.plan).empty());

    SearchResult done = solve("tiny_done");
    REQUIRE(done.outcome == SearchResult::Outcome::FoundPlan);
    CHECK(done.plan.steps.empty());

    SearchResult zero = solve("tiny_zero");
    REQUIRE(zero.outcome == SearchResult::Outcome::Unsat);
    CHECK(zero.unsat_makespan == 0);

    SearchResult unsat = solve("unsat_tiny");
    REQUIRE(unsat.outcome == SearchResult::Outcome::Unsat);
    CHECK(unsat.unsat_makespan == 2);

    SearchResult stack = solve("tiny_stack");
    REQUIRE(stack.outcome == SearchResult::Outcome::FoundPlan);
    CHECK(stack.plan.steps.size() == 2);
    CHECK(validate_plan(testutil::load_corpus_instance("tiny_stack"), stack.plan).empty());
    CHECK(stack.stats.nodes_expanded > 0);
}

TEST_CASE("search is deterministic") {
    ProblemInstance inst = testutil::load_corpus_instance("tiny_pair");
    SearchResult a = plan(inst);
    SearchResult b = plan(inst);
    REQUIRE(a.outcome == SearchResult::Outcome::FoundPlan);
    CHECK(a.plan == b.plan);
    CHECK(a.stats.nodes_expanded == b.stats.nodes_expanded);
    CHECK(a.stats.duplicates == b.stats.duplicates);
}

TEST_CASE("node cap reports a resource limit") {
    SearchLimits limits;
    limits.max_nodes = 1;
    SearchResult r = plan(testutil::load_corpus_instance("overhang1"), limits);
    CHECK(r.outcome == SearchResult::Outcome::ResourceLimit);
    CHECK(r.limit == "nodes");
}

TEST_CASE("exhaustive enumeration brackets the planner") {
    for (const char* name : {"tiny_shift", "tiny_pair", "tiny_done"}) {
        ProblemInstance inst = testutil::load_corpus_instance(name);
        EnumerationResult all = enumerate_plans(inst);
        REQUIRE(all.complete);
        REQUIRE(!all.plans.empty());
        SearchResult best = plan(inst);
        REQUIRE(best.outcome == SearchResult::Outcome::FoundPlan);
        size_t shortest = inst.makespan + 1;
        for (const Plan& p : all.plans) shortest = std::min(shortest, p.steps.size());
        CHECK(best.plan.steps.size() == shortest);
        CHECK(validate_plan(inst, best.plan).empty());
    }

    EnumerationResult none = enumerate_plans(testutil::load_corpus_instance("unsat_tiny"));
    CHECK(none.complete);
    CHECK(none.plans.empty());
}
