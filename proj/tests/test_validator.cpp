#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "blockplan/model.hpp"
#include "blockplan/planner.hpp"
#include "blockplan/validator.hpp"
#include "testutil.hpp"

using namespace blockplan;

namespace {

using Cat = Violation::Category;

int count_cat(const std::vector<Violation>& vs, Cat c) {
    return (int)std::count_if(vs.begin(), vs.end(), [&](const Violation& v) { return v.category == c; });
}

Plan solved(const ProblemInstance& inst) {
    SearchResult r = plan(inst);
    REQUIRE(r.outcome == SearchResult::Outcome::FoundPlan);
    return r.plan;
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

TEST_CASE("planner output replays cleanly") {
    for (const char* name : {"tiny_shift", "tiny_stack", "overhang1", "overhang3_rider",
                             "bridge_pillars", "subassembly_move"}) {
        CAPTURE(name);
        ProblemInstance inst = testutil::load_corpus_instance(name);
        Plan p = solved(inst);
        CHECK(validate_plan(inst, p).empty());
    }
}

TEST_CASE("removing the counterweight placement breaks stability") {
    ProblemInstance inst = testutil::load_corpus_instance("overhang4");
    Plan p = solved(inst);
    REQUIRE(validate_plan(inst, p).empty());

    Sym carrier;
    for (const auto& step : p.steps)
        for (const Action& a : step)
            if (a.kind == Action::Kind::Pick && a.block == "counter") carrier = a.gripper;
    REQUIRE(!carrier.empty());

    Plan mutated = p;
    bool erased = false;
    for (auto& step : mutated.steps) {
        auto it = std::find_if(step.begin(), step.end(), [&](const Action& a) {
            return a.kind == Action::Kind::Place && a.gripper == carrier;
        });
        if (it != step.end()) {
            step.erase(it);
            erased = true;
        }
    }
    REQUIRE(erased);

    auto vs = validate_plan(inst, mutated);
    CHECK(count_cat(vs, Cat::Stability) >= 1);
    CHECK(count_cat(vs, Cat::Goal) >= 1);  // the counterweight is still in hand
}

TEST_CASE("format problems: unknown names and overlong plans") {
    ProblemInstance inst = testutil::load_corpus_instance("tiny_shift");
    Plan good = solved(inst);

    Plan bad_gripper = good;
    bad_gripper.steps[0][0].gripper = "gX";
    auto vs = validate_plan(inst, bad_gripper);
    CHECK(count_cat(vs, Cat::Format) >= 1);

    Plan bad_block = good;
    REQUIRE(bad_block.steps[0][0].kind == Action::Kind::Pick);
    bad_block.steps[0][0].block = "nobody";
    vs = validate_plan(inst, bad_block);
    CHECK(count_cat(vs, Cat::Format) >= 1);

    Plan overlong = good;
    while ((int)overlong.steps.size() <= inst.makespan) overlong.steps.push_back({});
    vs = validate_plan(inst, overlong);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].category == Cat::Format);
    CHECK(vs[0].step == -1);
}

TEST_CASE("a gripper cannot act twice in one step") {
    ProblemInstance inst = testutil::load_corpus_instance("tiny_shift");
    Plan p = solved(inst);
    p.steps[0].push_back(p.steps[0][0]);
    auto vs = validate_plan(inst, p);
    CHECK(count_cat(vs, Cat::Concurrency) >= 1);
}

TEST_CASE("stopping early leaves the gripper loaded") {
    ProblemInstance inst = testutil::load_corpus_instance("tiny_shift");
    Plan p = solved(inst);
    p.steps.resize(1);  // pick happened, place never does
    auto vs = validate_plan(inst, p);
    REQUIRE(!vs.empty());
    bool goal_at_end = false;
    for (const auto& v : vs) goal_at_end |= v.category == Cat::Goal && v.step == -1;
    CHECK(goal_at_end);
}

TEST_CASE("ordering violations are reported with their column") {
    ProblemInstance inst;
    inst.surfaces = {{"table", 0, 0, 5}};
    inst.blocks = {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}};
    inst.grippers = {"g1"};
    inst.makespan = 4;
    inst.ordering = OrderingSpec{0};
    GoalAtom g;
    g.kind = GoalAtom::Kind::ExactCell;
    g.block = "b";
    g.x = 4;
    g.h = 0;
    inst.goal = {g};
    inst.initial.anchored["a"] = Placement{0, 0, {"table", 0, 1}};
    inst.initial.anchored["b"] = Placement{1, 0, {"table", 1, 1}};

    Plan right_then_left;
    right_then_left.steps = {{pick("g1", "b")},
                             {place("g1", "table", 4, 1)},
                             {pick("g1", "a")},
                             {place("g1", "table", 3, 1)}};
    auto vs = validate_plan(inst, right_then_left);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].category == Cat::Precondition);
    CHECK(vs[0].step == 3);
    CHECK(vs[0].detail.find("ordering") != std::string::npos);

    Plan left_then_right;
    left_then_right.steps = {{pick("g1", "a")},
                             {place("g1", "table", 3, 1)},
                             {pick("g1", "b")},
                             {place("g1", "table", 4, 1)}};
    CHECK(validate_plan(inst, left_then_right).empty());
}

TEST_CASE("non-canonical placement anchors are accepted") {
    ProblemInstance inst;
    inst.surfaces = {{"table", 0, 0, 5}};
    inst.blocks = {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}, {"plank", 2, 1.0, 1.0}};
    inst.grippers = {"g1"};
    inst.makespan = 2;
    GoalAtom g;
    g.kind = GoalAtom::Kind::ExactCell;
    g.block = "plank";
    g.x = 0;
    g.h = 1;
    inst.goal = {g};
    inst.initial.anchored["a"] = Placement{0, 0, {"table", 0, 1}};
    inst.initial.anchored["b"] = Placement{1, 0, {"table", 1, 1}};
    inst.initial.anchored["plank"] = Placement{3, 0, {"table", 3, 1}};

    Plan via_second_support;
    via_second_support.steps = {{pick("g1", "plank")}, {place("g1", "b", 1, 2)}};
    CHECK(validate_plan(inst, via_second_support).empty());

    Plan via_first_support;
    via_first_support.steps = {{pick("g1", "plank")}, {place("g1", "a", 1, 1)}};
    CHECK(validate_plan(inst, via_first_support).empty());
}

TEST_CASE("invalid actions are dropped and replay continues") {
    ProblemInstance inst = testutil::load_corpus_instance("tiny_pair");
    Plan p = solved(inst);
    REQUIRE(p.steps.size() == 2);

    Plan broken = p;
    bool corrupted = false;
    for (Action& a : broken.steps[0])
        if (a.kind == Action::Kind::Pick && a.gripper == "g2") {
            a.block = "zz";
            corrupted = true;
        }
    REQUIRE(corrupted);

    auto vs = validate_plan(inst, broken);
    CHECK(count_cat(vs, Cat::Format) >= 1);        // unknown block in the pick
    CHECK(count_cat(vs, Cat::Precondition) >= 1);  // later place from an empty gripper
    CHECK(count_cat(vs, Cat::Goal) >= 1);          // that block never reaches its cell
}
