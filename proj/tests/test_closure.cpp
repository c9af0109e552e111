#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blockplan/closure.hpp"
#include "blockplan/model.hpp"
#include "testutil.hpp"

using namespace blockplan;

namespace {

ProblemInstance scene(std::vector<Surface> surfaces, std::vector<BlockSpec> blocks) {
    ProblemInstance inst;
    inst.surfaces = std::move(surfaces);
    inst.blocks = std::move(blocks);
    inst.grippers = {"g1"};
    inst.makespan = 1;
    return inst;
}

void place(const ProblemInstance& inst, WorldState& state, const Sym& b, int x, int h) {
    GridIndex grid(inst, state);
    auto anchor = canonical_anchor(inst, grid, b, x, h);
    REQUIRE(anchor);
    state.anchored[b] = Placement{x, h, *anchor};
}

}  // namespace

TEST_CASE("above atoms: base, horizontal recursion, empty") {
    ProblemInstance inst = scene({{"table", 0, 0, 9}}, {{"b", 1, 1.0, 0.5}, {"m", 3, 1.0, 1.5}});

    WorldState empty;
    CHECK(compute_above(inst, empty).empty());

    WorldState s1;
    place(inst, s1, "b", 3, 0);
    CHECK(derive_on(inst, s1) == std::set<OnAtom>{{"b", "table", 3, 1}});
    CHECK(compute_above(inst, s1) == std::set<AboveAtom>{{1, "b", 1, 3}});

    WorldState s2;
    place(inst, s2, "b", 5, 0);
    place(inst, s2, "m", 5, 1);
    std::set<AboveAtom> expect = {{1, "b", 1, 5}, {2, "m", 1, 5}, {2, "m", 2, 6}, {2, "m", 3, 7}};
    CHECK(compute_above(inst, s2) == expect);
}

TEST_CASE("on atoms: neighbor ramification and partial support") {
    ProblemInstance inst = scene({{"table", 0, 0, 9}},
                                 {{"s1", 1, 1.0, 0.5}, {"s2", 1, 1.0, 0.5}, {"m", 3, 1.0, 1.5}});
    WorldState s;
    place(inst, s, "s1", 5, 0);
    place(inst, s, "s2", 7, 0);
    place(inst, s, "m", 5, 1);  // anchored on s1, lands on s2 as a ramification

    auto on = derive_on(inst, s);
    CHECK(on.count(OnAtom{"m", "s1", 1, 1}));
    CHECK(on.count(OnAtom{"m", "s2", 1, 3}));
    CHECK(!on.count(OnAtom{"m", "s1", 1, 2}));  // middle unit hovers

    // long block on a long block, two units hanging right: only units 1..3 rest
    ProblemInstance inst2 =
        scene({{"table", 0, 0, 9}}, {{"lo", 5, 1.0, 2.5}, {"hi", 5, 1.0, 2.5}});
    WorldState s2;
    place(inst2, s2, "lo", 0, 0);
    place(inst2, s2, "hi", 2, 1);
    auto on2 = derive_on(inst2, s2);
    for (int v = 1; v <= 3; ++v) CHECK(on2.count(OnAtom{"hi", "lo", v + 2, v}));
    CHECK(!on2.count(OnAtom{"hi", "lo", 6, 4}));
    int hi_atoms = 0;
    for (const auto& a : on2) hi_atoms += a.b == "hi";
    CHECK(hi_atoms == 3);
}

TEST_CASE("supported closure: rules and circularity") {
    using P = std::pair<Sym, Sym>;
    CHECK(supported_closure({P{"b", "table"}}) == std::set<P>{{"b", "table"}});
    CHECK(supported_closure({P{"b", "c"}, P{"c", "table"}}) ==
          std::set<P>{{"b", "c"}, {"c", "table"}, {"b", "table"}});
    CHECK_THROWS_AS(supported_closure({P{"b", "c"}, P{"c", "b"}}), CircularityError);
    try {
        supported_closure({P{"b", "c"}, P{"c", "b"}});
    } catch (const CircularityError& e) {
        CHECK((e.block == "b" || e.block == "c"));
    }
}

TEST_CASE("connected components and bridge sides") {
    ProblemInstance inst =
        scene({{"lsurf", 0, 0, 3}, {"rsurf", 0, 6, 9}},
              {{"a", 1, 1.0, 0.5}, {"b", 1, 1.0, 0.5}, {"top", 1, 1.0, 0.5}});
    WorldState towers;
    place(inst, towers, "a", 1, 0);
    place(inst, towers, "top", 1, 1);
    place(inst, towers, "b", 7, 0);
    Components c = connected_components(inst, towers, {"lsurf"}, {"rsurf"});
    CHECK(c.component.at("a") == c.component.at("top"));
    CHECK(c.component.at("a") != c.component.at("b"));
    CHECK(c.side.at("a") == std::set<Side>{Side::Left});
    CHECK(c.side.at("b") == std::set<Side>{Side::Right});
    CHECK(c.connected.count({"a", "top"}));
    CHECK(c.connected.count({"top", "a"}));  // symmetric

    ProblemInstance inst2 = scene({{"lsurf", 0, 0, 3}, {"rsurf", 0, 4, 7}},
                                  {{"plank", 2, 1.0, 1.0}, {"rider", 1, 1.0, 0.5}});
    WorldState bridge;
    place(inst2, bridge, "plank", 3, 0);  // covers the seam
    place(inst2, bridge, "rider", 3, 1);
    Components c2 = connected_components(inst2, bridge, {"lsurf"}, {"rsurf"});
    std::set<Side> both = {Side::Left, Side::Right};
    CHECK(c2.side.at("plank") == both);
    CHECK(c2.side.at("rider") == both);
}

TEST_CASE("overhang extent") {
    ProblemInstance inst = scene({{"table", 0, 0, 5}}, {{"m", 3, 1.0, 1.5}});
    WorldState inside;
    place(inst, inside, "m", 0, 0);
    CHECK(overhang_extent(inst, inside, "table", GoalAtom::Edge::Right) == 0);
    CHECK(overhang_extent(inst, inside, "table", GoalAtom::Edge::Left) == 0);

    WorldState out;
    place(inst, out, "m", 4, 0);  // one unit past the right edge
    CHECK(overhang_extent(inst, out, "table", GoalAtom::Edge::Right) == 1);
    CHECK(overhang_extent(inst, out, "table", GoalAtom::Edge::Left) == 0);
}

TEST_CASE("relations agree between grid and rule fixpoint on random states") {
    std::mt19937 rng(42);
    for (int i = 0; i < 300; ++i) {
        auto sc = testutil::random_scene(rng);
        OracleRelations oracle = fixpoint_oracle(sc.inst, sc.state);
        auto on = derive_on(sc.inst, sc.state);
        auto above = compute_above(sc.inst, sc.state);
        auto supported = supported_closure(project_on_aux(on));
        REQUIRE(oracle.on == on);
        REQUIRE(oracle.above == above);
        REQUIRE(oracle.supported == supported);

        // above is a function of (b, v)
        std::set<std::pair<Sym, int>> keys;
        for (const auto& a : above) CHECK(keys.insert({a.b, a.v}).second);
    }
}

TEST_CASE("valid states never raise circularity; cyclic inputs always do") {
    std::mt19937 rng(43);
    for (int i = 0; i < 300; ++i) {
        auto sc = testutil::random_scene(rng);
        CHECK_NOTHROW(supported_closure(project_on_aux(derive_on(sc.inst, sc.state))));
    }
    for (int i = 0; i < 50; ++i) {
        auto edges = testutil::cyclic_on_aux(rng);
        CHECK_THROWS_AS(supported_closure(edges), CircularityError);
    }
}

TEST_CASE("relations agree on the corpus") {
    for (const char* name : {"overhang4", "bridge_unlevel", "scaffold_swap", "pedestal_pair"}) {
        ProblemInstance inst = testutil::load_corpus_instance(name);
        WorldState s = initial_state(inst);
        OracleRelations oracle = fixpoint_oracle(inst, s);
        CHECK(oracle.on == derive_on(inst, s));
        CHECK(oracle.above == compute_above(inst, s));
        CHECK(oracle.supported == supported_closure(project_on_aux(derive_on(inst, s))));
    }
}
