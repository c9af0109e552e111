#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for the block construction planner: problem instances,
// the grid-based world state, goals and plans. Everything here is a plain
// value type; states are copied, never mutated in place by the search.

namespace blockplan {

using Sym = std::string;

struct SyntaxError : std::runtime_error {
    int line;
    explicit SyntaxError(int line_, const std::string& what_)
        : std::runtime_error("syntax error (line " + std::to_string(line_) + "): " + what_),
          line(line_) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what_)
        : std::runtime_error("validation error: " + what_) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what_)
        : std::runtime_error("format error: " + what_) {}
};

struct BlockSpec {
    Sym id;
    int size = 1;                 // footprint in unit spaces
    double weight = 1.0;
    double centroid_offset = 0.5; // from the left end, in unit widths

    bool operator==(const BlockSpec&) const = default;
};

struct Surface {
    Sym id;
    int level = 0;  // height of the top face, in block heights
    int x_lo = 0;   // inclusive global column interval
    int x_hi = 0;

    int width() const { return x_hi - x_lo + 1; }
    bool covers(int x) const { return x >= x_lo && x <= x_hi; }
    bool operator==(const Surface&) const = default;
};

struct PhysicsParams {
    double mu = 0.5;       // friction coefficient
    double epsilon = 0.05; // disturbance force fraction of body weight
    double slack = 1e-9;   // LP feasibility tolerance

    bool operator==(const PhysicsParams&) const = default;
};

struct Cell {
    int x = 0; // global column
    int h = 0; // absolute level
    auto operator<=>(const Cell&) const = default;
};

struct CellOccupant {
    Sym block;
    int unit = 1; // 1..size, left to right
    bool operator==(const CellOccupant&) const = default;
};

// The single placement fact chosen when a block was placed. For block
// locations u is the supporting unit (1..size); for surfaces u is the
// global column of the supporting unit space.
struct AnchorRef {
    Sym loc;
    int u = 0;
    int v = 0;
    auto operator<=>(const AnchorRef&) const = default;
};

struct Placement {
    int x = 0; // global column of unit 1
    int h = 0; // absolute level
    AnchorRef anchor;
    bool operator==(const Placement&) const = default;
};

// Rigid group of blocks carried by one gripper. Offsets are relative to the
// root's unit-1 cell; the root is always the unique bottom member.
struct HeldAssembly {
    struct Member {
        Sym block;
        int dx = 0;
        int dh = 0;
        AnchorRef anchor; // within the assembly; unused for the root
        bool operator==(const Member&) const = default;
    };
    Sym root;
    std::vector<Member> members; // sorted by block id, includes the root

    const Member* find(const Sym& block) const;
    bool operator==(const HeldAssembly&) const = default;
};

struct WorldState {
    int t = 0;
    std::map<Sym, Placement> anchored;    // block -> placement
    std::map<Sym, HeldAssembly> held;     // gripper -> assembly
    std::optional<int> watermark;         // leftmost column of past placements
                                          // (tracked only under an ordering constraint)

    bool is_anchored(const Sym& block) const { return anchored.count(block) > 0; }
    const HeldAssembly* holding(const Sym& gripper) const;
    // gripper carrying the block, if any
    std::optional<Sym> carrier_of(const Sym& block) const;

    bool operator==(const WorldState& o) const {
        return anchored == o.anchored && held == o.held && watermark == o.watermark;
    }
};

struct GoalAtom {
    enum class Kind { Bridge, Overhang, PlacedOn, PlacedOnAt, ExactCell };
    enum class Edge { Left, Right };

    Kind kind = Kind::PlacedOn;
    // Bridge
    std::vector<Sym> left_group;
    std::vector<Sym> right_group;
    // Overhang
    Sym surface;
    Edge edge = Edge::Right;
    int min_units = 0;
    // PlacedOn / PlacedOnAt
    Sym block;
    Sym loc;
    int u = 0;
    int v = 0;
    // ExactCell
    int x = 0;
    int h = 0;

    bool operator==(const GoalAtom&) const = default;
};

struct OrderingSpec {
    int slack = 0; // columns a placement may fall behind the watermark
    bool operator==(const OrderingSpec&) const = default;
};

struct Action {
    enum class Kind { Pick, Place };
    Kind kind = Kind::Pick;
    Sym gripper;
    Sym block;  // pick only
    Sym target; // place only: block or surface id
    int u = 0;  // place: unit of target (global column for surfaces)
    int v = 0;  // place: unit of the held root

    auto operator<=>(const Action&) const = default;
};

using JointAction = std::vector<Action>; // kept sorted, at most one per gripper

struct Plan {
    std::vector<JointAction> steps;
    auto operator<=>(const Plan&) const = default;
};

struct ProblemInstance {
    std::vector<Surface> surfaces;
    std::vector<BlockSpec> blocks;
    std::vector<Sym> grippers;
    WorldState initial;
    std::vector<GoalAtom> goal;
    int makespan = 0;
    PhysicsParams physics;
    std::optional<OrderingSpec> ordering;

    const BlockSpec* block(const Sym& id) const;
    const Surface* surface(const Sym& id) const;
    bool is_gripper(const Sym& id) const;
    int block_size(const Sym& id) const;

    // Column envelope for placements: surface spans widened by the total
    // footprint of all blocks (an overhang can never reach further).
    int col_lo() const;
    int col_hi() const;

    bool operator==(const ProblemInstance&) const = default;
};

// Occupancy index of the anchored part of a state.
class GridIndex {
public:
    GridIndex() = default;
    GridIndex(const ProblemInstance& inst, const WorldState& state);

    const CellOccupant* at(int x, int h) const;
    bool occupied(int x, int h) const { return at(x, h) != nullptr; }
    const std::map<Cell, CellOccupant>& cells() const { return cells_; }
    int max_level() const { return max_level_; }

private:
    std::map<Cell, CellOccupant> cells_;
    int max_level_ = -1;
};

// true iff (x, h) lies inside the solid body of some surface (below its top)
bool inside_surface_solid(const ProblemInstance& inst, int x, int h);
// surface whose top face supports level h at column x, if any
const Surface* surface_under(const ProblemInstance& inst, int x, int h);

std::vector<Cell> block_cells(const ProblemInstance& inst, const Sym& block,
                              const Placement& p);

// Global cells a held assembly would occupy if its root's unit-1 cell were
// placed at (root_x, root_h). Order follows the member list.
std::vector<std::pair<Sym, Cell>> assembly_cells(const ProblemInstance& inst,
                                                 const HeldAssembly& held,
                                                 int root_x, int root_h);

// Resolve a placeOn target to the root's unit-1 cell, or nullopt if the
// anchor is geometrically meaningless (bad units, no such location).
std::optional<Cell> resolve_anchor(const ProblemInstance& inst, const WorldState& state,
                                   const Sym& target, int u, int v, const Sym& root);

// The canonical anchor for a placement of `root` with unit 1 at (x, h):
// the smallest unit v whose supporting cell exists. Requires a support.
std::optional<AnchorRef> canonical_anchor(const ProblemInstance& inst, const GridIndex& grid,
                                          const Sym& root, int x, int h);

// Checks every WorldState invariant (cell disjointness, support existence,
// solid overlap, held assembly shape). Throws ValidationError on violation.
void check_state_invariants(const ProblemInstance& inst, const WorldState& state);

// Canonical serialization of a state used for duplicate detection and
// deterministic hashing. Excludes the step index.
std::string state_key(const WorldState& state);

WorldState initial_state(const ProblemInstance& inst);

} // namespace blockplan
