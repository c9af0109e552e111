#include "blockplan/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blockplan/stability.hpp"

namespace blockplan {

using json = nlohmann::ordered_json;

namespace {

int line_of_offset(const std::string& text, size_t byte) {
    int line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

void expect_keys(const json& obj, const std::string& what,
                 const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("unknown key '" + it.key() + "' in " + what);
}

const json& require(const json& obj, const std::string& what, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError(what + " is missing key '" + key + "'");
    return *it;
}

int to_int(const json& v, const std::string& what) {
    if (!v.is_number_integer())
        throw ValidationError(what + " must be an integer");
    return v.get<int>();
}

double to_num(const json& v, const std::string& what) {
    if (!v.is_number())
        throw ValidationError(what + " must be a number");
    return v.get<double>();
}

std::string to_str(const json& v, const std::string& what) {
    if (!v.is_string())
        throw ValidationError(what + " must be a string");
    return v.get<std::string>();
}

// Reconstructs per-member anchors of an assembly from its relative grid:
// smallest unit of the member that has a member cell directly below.
void derive_assembly_anchors(const ProblemInstance& inst, HeldAssembly& asm_) {
    std::map<Cell, CellOccupant> local;
    for (const auto& m : asm_.members)
        for (int v = 1; v <= inst.block_size(m.block); ++v)
            local[Cell{m.dx + v - 1, m.dh}] = CellOccupant{m.block, v};
    for (auto& m : asm_.members) {
        if (m.block == asm_.root) { m.anchor = AnchorRef{}; continue; }
        bool found = false;
        for (int v = 1; v <= inst.block_size(m.block) && !found; ++v) {
            auto below = local.find(Cell{m.dx + v - 1, m.dh - 1});
            if (below != local.end()) {
                m.anchor = AnchorRef{below->second.block, below->second.unit, v};
                found = true;
            }
        }
        if (!found)
            throw ValidationError("assembly member '" + m.block + "' is floating");
    }
}

GoalAtom parse_goal_atom(const json& g, const ProblemInstance& inst) {
    GoalAtom atom;
    std::string type = to_str(require(g, "goal atom", "type"), "goal type");
    if (type == "bridge") {
        expect_keys(g, "bridge goal", {"type", "left", "right"});
        atom.kind = GoalAtom::Kind::Bridge;
        for (const auto& s : require(g, "bridge goal", "left"))
            atom.left_group.push_back(to_str(s, "bridge surface id"));
        for (const auto& s : require(g, "bridge goal", "right"))
            atom.right_group.push_back(to_str(s, "bridge surface id"));
        if (atom.left_group.empty() || atom.right_group.empty())
            throw ValidationError("bridge goal needs nonempty surface groups");
        for (const auto& id : atom.left_group)
            if (!inst.surface(id)) throw ValidationError("unknown surface id '" + id + "'");
        for (const auto& id : atom.right_group) {
            if (!inst.surface(id)) throw ValidationError("unknown surface id '" + id + "'");
            if (std::find(atom.left_group.begin(), atom.left_group.end(), id) !=
                atom.left_group.end())
                throw ValidationError("surface '" + id + "' is in both bridge groups");
        }
    } else if (type == "overhang") {
        expect_keys(g, "overhang goal", {"type", "surface", "edge", "min_units"});
        atom.kind = GoalAtom::Kind::Overhang;
        atom.surface = to_str(require(g, "overhang goal", "surface"), "surface id");
        if (!inst.surface(atom.surface))
            throw ValidationError("unknown surface id '" + atom.surface + "'");
        std::string edge = to_str(require(g, "overhang goal", "edge"), "edge");
        if (edge == "left") atom.edge = GoalAtom::Edge::Left;
        else if (edge == "right") atom.edge = GoalAtom::Edge::Right;
        else throw ValidationError("overhang edge must be 'left' or 'right'");
        atom.min_units = to_int(require(g, "overhang goal", "min_units"), "min_units");
        if (atom.min_units < 1) throw ValidationError("min_units must be positive");
    } else if (type == "placed_on") {
        expect_keys(g, "placed_on goal", {"type", "block", "on"});
        atom.kind = GoalAtom::Kind::PlacedOn;
        atom.block = to_str(require(g, "placed_on goal", "block"), "block id");
        atom.loc = to_str(require(g, "placed_on goal", "on"), "location id");
    } else if (type == "placed_on_at") {
        expect_keys(g, "placed_on_at goal", {"type", "block", "on", "u", "v"});
        atom.kind = GoalAtom::Kind::PlacedOnAt;
        atom.block = to_str(require(g, "placed_on_at goal", "block"), "block id");
        atom.loc = to_str(require(g, "placed_on_at goal", "on"), "location id");
        atom.u = to_int(require(g, "placed_on_at goal", "u"), "u");
        atom.v = to_int(require(g, "placed_on_at goal", "v"), "v");
    } else if (type == "exact_cell") {
        expect_keys(g, "exact_cell goal", {"type", "block", "x", "level"});
        atom.kind = GoalAtom::Kind::ExactCell;
        atom.block = to_str(require(g, "exact_cell goal", "block"), "block id");
        atom.x = to_int(require(g, "exact_cell goal", "x"), "x");
        atom.h = to_int(require(g, "exact_cell goal", "level"), "level");
    } else {
        throw ValidationError("unknown goal type '" + type + "'");
    }
    if (!atom.block.empty() && !inst.block(atom.block))
        throw ValidationError("unknown block id '" + atom.block + "'");
    if (!atom.loc.empty() && !inst.block(atom.loc) && !inst.surface(atom.loc))
        throw ValidationError("unknown location id '" + atom.loc + "'");
    return atom;
}

} // namespace

ProblemInstance parse_instance(const std::string& text, bool verify_stability) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError(line_of_offset(text, e.byte), e.what());
    }
    if (!doc.is_object()) throw ValidationError("instance document must be an object");
    expect_keys(doc, "instance document",
                {"format", "surfaces", "blocks", "grippers", "initial", "goal",
                 "makespan", "physics", "ordering"});
    if (to_int(require(doc, "instance document", "format"), "format") != kFormatVersion)
        throw ValidationError("unsupported format version");

    ProblemInstance inst;

    for (const auto& s : require(doc, "instance document", "surfaces")) {
        expect_keys(s, "surface", {"id", "level", "span"});
        Surface sur;
        sur.id = to_str(require(s, "surface", "id"), "surface id");
        sur.level = to_int(require(s, "surface", "level"), "surface level");
        const json& span = require(s, "surface", "span");
        if (!span.is_array() || span.size() != 2)
            throw ValidationError("surface span must be [x_lo, x_hi]");
        sur.x_lo = to_int(span[0], "span x_lo");
        sur.x_hi = to_int(span[1], "span x_hi");
        if (sur.x_hi < sur.x_lo) throw ValidationError("surface span is empty");
        if (sur.level < 0) throw ValidationError("surface level must be nonnegative");
        inst.surfaces.push_back(sur);
    }
    if (inst.surfaces.empty()) throw ValidationError("at least one surface is required");
    for (size_t i = 0; i < inst.surfaces.size(); ++i)
        for (size_t j = i + 1; j < inst.surfaces.size(); ++j) {
            const Surface &a = inst.surfaces[i], &b = inst.surfaces[j];
            if (a.id == b.id) throw ValidationError("duplicate surface id '" + a.id + "'");
            if (a.x_lo <= b.x_hi && b.x_lo <= a.x_hi)
                throw ValidationError("surfaces '" + a.id + "' and '" + b.id +
                                      "' have overlapping spans");
        }

    for (const auto& b : require(doc, "instance document", "blocks")) {
        expect_keys(b, "block", {"id", "size", "weight", "centroid_offset"});
        BlockSpec blk;
        blk.id = to_str(require(b, "block", "id"), "block id");
        blk.size = to_int(require(b, "block", "size"), "block size");
        blk.weight = to_num(require(b, "block", "weight"), "block weight");
        if (blk.size < 1) throw ValidationError("block size must be positive");
        if (!(blk.weight > 0)) throw ValidationError("block weight must be positive");
        blk.centroid_offset = b.contains("centroid_offset")
                                  ? to_num(b["centroid_offset"], "centroid_offset")
                                  : blk.size / 2.0;
        if (blk.centroid_offset < 0 || blk.centroid_offset > blk.size)
            throw ValidationError("centroid_offset outside the block footprint");
        if (inst.block(blk.id) || inst.surface(blk.id))
            throw ValidationError("duplicate id '" + blk.id + "'");
        inst.blocks.push_back(blk);
    }

    for (const auto& g : require(doc, "instance document", "grippers")) {
        Sym id = to_str(g, "gripper id");
        if (inst.is_gripper(id) || inst.block(id) || inst.surface(id))
            throw ValidationError("duplicate id '" + id + "'");
        inst.grippers.push_back(id);
    }
    if (inst.grippers.empty()) throw ValidationError("at least one gripper is required");

    const json& init = require(doc, "instance document", "initial");
    expect_keys(init, "initial state", {"placements", "held"});
    for (const auto& p : require(init, "initial state", "placements")) {
        expect_keys(p, "placement", {"block", "x", "level"});
        Sym id = to_str(require(p, "placement", "block"), "block id");
        if (!inst.block(id)) throw ValidationError("unknown block id '" + id + "'");
        Placement pl;
        pl.x = to_int(require(p, "placement", "x"), "placement x");
        pl.h = to_int(require(p, "placement", "level"), "placement level");
        if (!inst.initial.anchored.emplace(id, pl).second)
            throw ValidationError("block '" + id + "' placed twice");
    }
    if (init.contains("held")) {
        for (const auto& h : init["held"]) {
            expect_keys(h, "held assembly", {"gripper", "root", "members"});
            Sym g = to_str(require(h, "held assembly", "gripper"), "gripper id");
            if (!inst.is_gripper(g)) throw ValidationError("unknown gripper '" + g + "'");
            HeldAssembly asm_;
            asm_.root = to_str(require(h, "held assembly", "root"), "root id");
            for (const auto& m : require(h, "held assembly", "members")) {
                expect_keys(m, "assembly member", {"block", "dx", "dh"});
                HeldAssembly::Member mem;
                mem.block = to_str(require(m, "assembly member", "block"), "block id");
                mem.dx = to_int(require(m, "assembly member", "dx"), "dx");
                mem.dh = to_int(require(m, "assembly member", "dh"), "dh");
                asm_.members.push_back(mem);
            }
            std::sort(asm_.members.begin(), asm_.members.end(),
                      [](const auto& a, const auto& b) { return a.block < b.block; });
            derive_assembly_anchors(inst, asm_);
            if (!inst.initial.held.emplace(g, asm_).second)
                throw ValidationError("gripper '" + g + "' holds two assemblies");
        }
    }

    for (const auto& g : require(doc, "instance document", "goal"))
        inst.goal.push_back(parse_goal_atom(g, inst));
    if (inst.goal.empty()) throw ValidationError("goal must contain at least one atom");

    inst.makespan = to_int(require(doc, "instance document", "makespan"), "makespan");
    if (inst.makespan < 0) throw ValidationError("makespan must be nonnegative");

    if (doc.contains("physics")) {
        const json& ph = doc["physics"];
        expect_keys(ph, "physics", {"mu", "epsilon", "slack"});
        if (ph.contains("mu")) inst.physics.mu = to_num(ph["mu"], "mu");
        if (ph.contains("epsilon")) inst.physics.epsilon = to_num(ph["epsilon"], "epsilon");
        if (ph.contains("slack")) inst.physics.slack = to_num(ph["slack"], "slack");
        if (inst.physics.mu < 0) throw ValidationError("mu must be nonnegative");
        if (inst.physics.epsilon < 0) throw ValidationError("epsilon must be nonnegative");
        if (!(inst.physics.slack > 0)) throw ValidationError("slack must be positive");
    }

    if (doc.contains("ordering") && !doc["ordering"].is_null()) {
        const json& ord = doc["ordering"];
        expect_keys(ord, "ordering", {"type", "slack"});
        if (to_str(require(ord, "ordering", "type"), "ordering type") != "left_to_right")
            throw ValidationError("unknown ordering type");
        OrderingSpec spec;
        if (ord.contains("slack")) spec.slack = to_int(ord["slack"], "ordering slack");
        if (spec.slack < 0) throw ValidationError("ordering slack must be nonnegative");
        inst.ordering = spec;
    }

    // derive anchors for the initial placements (leftmost supported unit)
    {
        GridIndex grid(inst, inst.initial);
        for (auto& [id, p] : inst.initial.anchored) {
            auto a = canonical_anchor(inst, grid, id, p.x, p.h);
            if (!a) throw ValidationError("block '" + id + "' is floating");
            p.anchor = *a;
        }
    }

    check_state_invariants(inst, inst.initial);

    if (verify_stability) {
        StabilityVerdict v = check_static_equilibrium(extract_contacts(inst, inst.initial));
        if (!v.stable)
            throw ValidationError("unstable initial state (body '" + v.witness + "')");
        for (const auto& [g, asm_] : inst.initial.held) {
            (void)asm_;
            StabilityVerdict hv = check_held_stability(inst, inst.initial, g);
            if (!hv.stable)
                throw ValidationError("unstable held assembly in gripper '" + g + "'");
        }
    }

    return inst;
}

ProblemInstance load_instance(const std::string& path, bool verify_stability) {
    return parse_instance(read_file(path), verify_stability);
}

std::string serialize_instance(const ProblemInstance& inst) {
    json doc;
    doc["format"] = kFormatVersion;
    doc["surfaces"] = json::array();
    for (const auto& s : inst.surfaces)
        doc["surfaces"].push_back(
            {{"id", s.id}, {"level", s.level}, {"span", {s.x_lo, s.x_hi}}});
    doc["blocks"] = json::array();
    for (const auto& b : inst.blocks)
        doc["blocks"].push_back({{"id", b.id},
                                 {"size", b.size},
                                 {"weight", b.weight},
                                 {"centroid_offset", b.centroid_offset}});
    doc["grippers"] = inst.grippers;
    json placements = json::array();
    for (const auto& [id, p] : inst.initial.anchored)
        placements.push_back({{"block", id}, {"x", p.x}, {"level", p.h}});
    json held = json::array();
    for (const auto& [g, asm_] : inst.initial.held) {
        json members = json::array();
        for (const auto& m : asm_.members)
            members.push_back({{"block", m.block}, {"dx", m.dx}, {"dh", m.dh}});
        held.push_back({{"gripper", g}, {"root", asm_.root}, {"members", members}});
    }
    doc["initial"] = {{"placements", placements}, {"held", held}};
    doc["goal"] = json::array();
    for (const auto& g : inst.goal) {
        json atom;
        switch (g.kind) {
        case GoalAtom::Kind::Bridge:
            atom = {{"type", "bridge"}, {"left", g.left_group}, {"right", g.right_group}};
            break;
        case GoalAtom::Kind::Overhang:
            atom = {{"type", "overhang"},
                    {"surface", g.surface},
                    {"edge", g.edge == GoalAtom::Edge::Left ? "left" : "right"},
                    {"min_units", g.min_units}};
            break;
        case GoalAtom::Kind::PlacedOn:
            atom = {{"type", "placed_on"}, {"block", g.block}, {"on", g.loc}};
            break;
        case GoalAtom::Kind::PlacedOnAt:
            atom = {{"type", "placed_on_at"},
                    {"block", g.block},
                    {"on", g.loc},
                    {"u", g.u},
                    {"v", g.v}};
            break;
        case GoalAtom::Kind::ExactCell:
            atom = {{"type", "exact_cell"}, {"block", g.block}, {"x", g.x}, {"level", g.h}};
            break;
        }
        doc["goal"].push_back(atom);
    }
    doc["makespan"] = inst.makespan;
    doc["physics"] = {{"mu", inst.physics.mu},
                      {"epsilon", inst.physics.epsilon},
                      {"slack", inst.physics.slack}};
    if (inst.ordering)
        doc["ordering"] = {{"type", "left_to_right"}, {"slack", inst.ordering->slack}};
    return doc.dump(2) + "\n";
}

Plan parse_plan(const std::string& text, const ProblemInstance& inst) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(e.what());
    }
    try {
        if (!doc.is_object()) throw ValidationError("plan document must be an object");
        expect_keys(doc, "plan document", {"format", "steps"});
        if (to_int(require(doc, "plan document", "format"), "format") != kFormatVersion)
            throw ValidationError("unsupported format version");
        Plan plan;
        for (const auto& step : require(doc, "plan document", "steps")) {
            if (!step.is_array()) throw ValidationError("plan step must be an array");
            JointAction ja;
            for (const auto& a : step) {
                Action act;
                std::string op = to_str(require(a, "action", "op"), "op");
                act.gripper = to_str(require(a, "action", "gripper"), "gripper");
                if (op == "pick") {
                    expect_keys(a, "pick action", {"op", "gripper", "block"});
                    act.kind = Action::Kind::Pick;
                    act.block = to_str(require(a, "pick action", "block"), "block");
                } else if (op == "place") {
                    expect_keys(a, "place action", {"op", "gripper", "target", "u", "v"});
                    act.kind = Action::Kind::Place;
                    act.target = to_str(require(a, "place action", "target"), "target");
                    act.u = to_int(require(a, "place action", "u"), "u");
                    act.v = to_int(require(a, "place action", "v"), "v");
                } else {
                    throw ValidationError("unknown op '" + op + "'");
                }
                if (!inst.is_gripper(act.gripper))
                    throw ValidationError("unknown gripper '" + act.gripper + "'");
                ja.push_back(act);
            }
            std::sort(ja.begin(), ja.end());
            plan.steps.push_back(ja);
        }
        return plan;
    } catch (const ValidationError& e) {
        throw FormatError(e.what());
    }
}

Plan load_plan(const std::string& path, const ProblemInstance& inst) {
    return parse_plan(read_file(path), inst);
}

std::string serialize_plan(const Plan& plan) {
    json doc;
    doc["format"] = kFormatVersion;
    doc["steps"] = json::array();
    for (const auto& step : plan.steps) {
        json js = json::array();
        for (const auto& a : step) {
            if (a.kind == Action::Kind::Pick)
                js.push_back({{"op", "pick"}, {"gripper", a.gripper}, {"block", a.block}});
            else
                js.push_back({{"op", "place"},
                              {"gripper", a.gripper},
                              {"target", a.target},
                              {"u", a.u},
                              {"v", a.v}});
        }
        doc["steps"].push_back(js);
    }
    return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
}

} // namespace blockplan
