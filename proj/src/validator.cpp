#include "blockplan/validator.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "blockplan/closure.hpp"
#include "blockplan/stability.hpp"

namespace blockplan {

std::string to_string(Violation::Category c) {
    switch (c) {
    case Violation::Category::Precondition: return "precondition";
    case Violation::Category::Concurrency: return "concurrency";
    case Violation::Category::Circularity: return "circularity";
    case Violation::Category::Stability: return "stability";
    case Violation::Category::HeldStability: return "held-stability";
    case Violation::Category::Goal: return "goal";
    case Violation::Category::Format: return "format";
    }
    return "?";
}

namespace {

struct Replay {
    const ProblemInstance& inst;
    std::vector<Violation> out;

    void add(int step, Violation::Category cat, std::string detail) {
        out.push_back(Violation{step, cat, std::move(detail)});
    }
};

// union-find over symbols, local to the validator on purpose
struct Dsu {
    std::map<Sym, Sym> up;
    Sym find(Sym x) {
        while (true) {
            auto it = up.find(x);
            if (it == up.end()) { up[x] = x; return x; }
            if (it->second == x) return x;
            x = it->second;
        }
    }
    void unite(const Sym& a, const Sym& b) {
        Sym ra = find(a), rb = find(b);
        if (ra != rb) up[ra] = rb;
    }
};

// assembly the pick would lift, from the oracle's relations
std::optional<std::set<Sym>> oracle_pick_set(const OracleRelations& rel, const Sym& b,
                                             std::string* why) {
    std::set<Sym> s{b};
    for (const auto& [bb, l] : rel.supported)
        if (l == b) s.insert(bb);
    for (const Sym& m : s) {
        std::set<Sym> parents;
        for (const auto& a : rel.on)
            if (a.b == m) parents.insert(a.l);
        if (m == b) {
            if (parents.size() != 1) {
                *why = "'" + b + "' rests on " + std::to_string(parents.size()) + " locations";
                return std::nullopt;
            }
        } else if (!std::includes(s.begin(), s.end(), parents.begin(), parents.end())) {
            *why = "member '" + m + "' is externally supported";
            return std::nullopt;
        }
    }
    return s;
}

struct StepAction {
    Action act;
    std::set<Sym> blocks;     // assembly picked or placed
    std::vector<Cell> cells;  // placement target cells
    Sym target;               // placement anchor location
    Cell root_cell;           // placement root position
    bool valid = true;
};

} // namespace

std::vector<Violation> validate_plan(const ProblemInstance& inst, const Plan& plan) {
    Replay r{inst, {}};

    if ((int)plan.steps.size() > inst.makespan)
        r.add(-1, Violation::Category::Format,
              "plan has " + std::to_string(plan.steps.size()) + " steps, instance bound is " +
                  std::to_string(inst.makespan));

    WorldState state = initial_state(inst);

    for (int si = 0; si < (int)plan.steps.size(); ++si) {
        const JointAction& ja = plan.steps[si];

        OracleRelations rel;
        bool rel_ok = true;
        try {
            rel = fixpoint_oracle(inst, state);
        } catch (const CircularityError& e) {
            r.add(si, Violation::Category::Circularity, e.what());
            rel_ok = false;
        }

        GridIndex grid(inst, state);
        std::vector<StepAction> acts;
        std::set<Sym> grippers_used;

        for (const Action& a : ja) {
            StepAction sa;
            sa.act = a;

            if (!inst.is_gripper(a.gripper)) {
                r.add(si, Violation::Category::Format, "unknown gripper '" + a.gripper + "'");
                sa.valid = false;
            } else if (!grippers_used.insert(a.gripper).second) {
                r.add(si, Violation::Category::Concurrency,
                      "gripper '" + a.gripper + "' issues two actions");
                sa.valid = false;
            }

            if (sa.valid && a.kind == Action::Kind::Pick) {
                if (!inst.block(a.block)) {
                    r.add(si, Violation::Category::Format, "unknown block '" + a.block + "'");
                    sa.valid = false;
                } else if (state.holding(a.gripper)) {
                    r.add(si, Violation::Category::Precondition,
                          "pick with loaded gripper '" + a.gripper + "'");
                    sa.valid = false;
                } else if (!state.is_anchored(a.block)) {
                    r.add(si, Violation::Category::Precondition,
                          "pick of '" + a.block + "' which is not anchored");
                    sa.valid = false;
                } else if (rel_ok) {
                    std::string why;
                    auto s = oracle_pick_set(rel, a.block, &why);
                    if (!s) {
                        r.add(si, Violation::Category::Precondition, "pick: " + why);
                        sa.valid = false;
                    } else {
                        sa.blocks = std::move(*s);
                    }
                } else {
                    sa.valid = false;
                }
            }

            if (sa.valid && a.kind == Action::Kind::Place) {
                const HeldAssembly* held = state.holding(a.gripper);
                bool target_ok =
                    state.is_anchored(a.target) || inst.surface(a.target) != nullptr;
                if (!held) {
                    r.add(si, Violation::Category::Precondition,
                          "place with empty gripper '" + a.gripper + "'");
                    sa.valid = false;
                } else if (!target_ok) {
                    r.add(si, Violation::Category::Precondition,
                          "placement target '" + a.target + "' is not available");
                    sa.valid = false;
                } else {
                    auto root = resolve_anchor(inst, state, a.target, a.u, a.v, held->root);
                    if (!root) {
                        r.add(si, Violation::Category::Precondition,
                              "placement anchor does not resolve");
                        sa.valid = false;
                    } else {
                        sa.target = a.target;
                        sa.root_cell = *root;
                        for (const auto& m : held->members) sa.blocks.insert(m.block);
                        bool cells_ok = true;
                        for (auto& [mb, c] : assembly_cells(inst, *held, root->x, root->h)) {
                            (void)mb;
                            sa.cells.push_back(c);
                            if (c.x < inst.col_lo() || c.x > inst.col_hi() || c.h < 0)
                                cells_ok = false;
                            else if (grid.occupied(c.x, c.h))
                                cells_ok = false;
                            else if (inside_surface_solid(inst, c.x, c.h))
                                cells_ok = false;
                        }
                        if (!cells_ok) {
                            r.add(si, Violation::Category::Precondition,
                                  "placement cells blocked or out of bounds");
                            sa.valid = false;
                        }
                    }
                }
            }

            acts.push_back(std::move(sa));
        }

        // pairwise concurrency constraints; the later action of a bad pair
        // is dropped
        for (size_t i = 0; i < acts.size(); ++i) {
            if (!acts[i].valid) continue;
            for (size_t j = 0; j < i; ++j) {
                if (!acts[j].valid) continue;
                const StepAction& a = acts[j];
                StepAction& b = acts[i];
                std::vector<Sym> common;
                std::set_intersection(a.blocks.begin(), a.blocks.end(), b.blocks.begin(),
                                      b.blocks.end(), std::back_inserter(common));
                if (!common.empty()) {
                    r.add(si, Violation::Category::Concurrency,
                          "two actions touch block '" + common.front() + "'");
                    b.valid = false;
                    continue;
                }
                bool cell_clash = false;
                for (const Cell& c : a.cells)
                    cell_clash |= std::find(b.cells.begin(), b.cells.end(), c) != b.cells.end();
                if (cell_clash) {
                    r.add(si, Violation::Category::Concurrency,
                          "two placements share a target cell");
                    b.valid = false;
                    continue;
                }
                bool a_on_b = !a.target.empty() && b.act.kind == Action::Kind::Pick &&
                              b.blocks.count(a.target);
                bool b_on_a = !b.target.empty() && a.act.kind == Action::Kind::Pick &&
                              a.blocks.count(b.target);
                if (a_on_b || b_on_a) {
                    r.add(si, Violation::Category::Concurrency,
                          "placement target is picked in the same step");
                    b.valid = false;
                }
            }
        }

        // simultaneous effects of the surviving actions
        WorldState next = state;
        next.t = state.t + 1;
        std::vector<int> placed_leftmosts;
        std::vector<std::vector<int>> placed_block_columns;
        for (const StepAction& sa : acts) {
            if (!sa.valid) continue;
            if (sa.act.kind == Action::Kind::Pick) {
                const Placement rp = state.anchored.at(sa.act.block);
                HeldAssembly held;
                held.root = sa.act.block;
                for (const Sym& m : sa.blocks) {
                    const Placement& mp = state.anchored.at(m);
                    HeldAssembly::Member mem;
                    mem.block = m;
                    mem.dx = mp.x - rp.x;
                    mem.dh = mp.h - rp.h;
                    if (m != held.root) mem.anchor = mp.anchor;
                    held.members.push_back(std::move(mem));
                    next.anchored.erase(m);
                }
                std::sort(held.members.begin(), held.members.end(),
                          [](const auto& a, const auto& b) { return a.block < b.block; });
                next.held[sa.act.gripper] = std::move(held);
            } else {
                const HeldAssembly* held = state.holding(sa.act.gripper);
                int leftmost = sa.root_cell.x;
                std::vector<int> cols;
                for (const auto& m : held->members) {
                    Placement p;
                    p.x = sa.root_cell.x + m.dx;
                    p.h = sa.root_cell.h + m.dh;
                    p.anchor = m.block == held->root
                                   ? AnchorRef{sa.act.target, sa.act.u, sa.act.v}
                                   : m.anchor;
                    next.anchored[m.block] = p;
                    cols.push_back(p.x);
                    leftmost = std::min(leftmost, p.x);
                }
                next.held.erase(sa.act.gripper);
                placed_leftmosts.push_back(leftmost);
                placed_block_columns.push_back(std::move(cols));
            }
        }

        try {
            check_state_invariants(inst, next);
        } catch (const ValidationError& e) {
            // a surviving combination still broke the grid; report and stop
            r.add(si, Violation::Category::Format,
                  std::string("replay produced an invalid state: ") + e.what());
            return r.out;
        }

        try {
            fixpoint_oracle(inst, next);
        } catch (const CircularityError& e) {
            r.add(si, Violation::Category::Circularity, e.what());
        }

        StabilityVerdict v = check_static_equilibrium(extract_contacts(inst, next));
        if (!v.stable)
            r.add(si, Violation::Category::Stability,
                  "state after step is unstable (body '" + v.witness + "')");
        for (const auto& [g, held] : next.held) {
            if (held.members.size() < 2) continue;
            StabilityVerdict hv = check_held_stability(inst, next, g);
            if (!hv.stable)
                r.add(si, Violation::Category::HeldStability,
                      "assembly held by '" + g + "' is unstable (body '" + hv.witness + "')");
        }

        if (inst.ordering) {
            for (int leftmost : placed_leftmosts)
                if (state.watermark && leftmost < *state.watermark - inst.ordering->slack)
                    r.add(si, Violation::Category::Precondition,
                          "ordering: placement at column " + std::to_string(leftmost) +
                              " is left of the watermark " + std::to_string(*state.watermark));
            for (const auto& cols : placed_block_columns)
                for (int c : cols)
                    next.watermark = next.watermark ? std::max(*next.watermark, c) : c;
        }

        state = std::move(next);
    }

    // final state: grippers empty, all goal conjuncts hold
    for (const auto& [g, held] : state.held)
        r.add(-1, Violation::Category::Goal,
              "gripper '" + g + "' still holds '" + held.root + "'");

    OracleRelations rel;
    bool rel_ok = true;
    try {
        rel = fixpoint_oracle(inst, state);
    } catch (const CircularityError& e) {
        r.add(-1, Violation::Category::Circularity, e.what());
        rel_ok = false;
    }

    Dsu dsu;
    if (rel_ok)
        for (const auto& a : rel.on) dsu.unite(a.b, a.l);

    for (const GoalAtom& g : inst.goal) {
        switch (g.kind) {
        case GoalAtom::Kind::Bridge: {
            if (!rel_ok) break;
            bool found = false;
            for (const auto& b : inst.blocks) {
                if (!state.is_anchored(b.id)) continue;
                bool left = false, right = false;
                for (const Sym& s : g.left_group) left |= dsu.find(b.id) == dsu.find(s);
                for (const Sym& s : g.right_group) right |= dsu.find(b.id) == dsu.find(s);
                if (left && right) {
                    found = true;
                    break;
                }
            }
            if (!found)
                r.add(-1, Violation::Category::Goal, "no block connects the bridge sides");
            break;
        }
        case GoalAtom::Kind::Overhang: {
            if (!rel_ok) break;
            const Surface* s = inst.surface(g.surface);
            if (!s) {
                r.add(-1, Violation::Category::Goal, "unknown surface '" + g.surface + "'");
                break;
            }
            std::map<int, std::set<int>> covered; // column -> levels (same component)
            for (const auto& b : inst.blocks) {
                if (!state.is_anchored(b.id)) continue;
                if (dsu.find(b.id) != dsu.find(s->id)) continue;
                for (const Cell& c : block_cells(inst, b.id, state.anchored.at(b.id)))
                    covered[c.x].insert(c.h);
            }
            int step = g.edge == GoalAtom::Edge::Right ? 1 : -1;
            int x = g.edge == GoalAtom::Edge::Right ? s->x_hi + 1 : s->x_lo - 1;
            int extent = 0;
            while (covered.count(x)) {
                ++extent;
                x += step;
            }
            if (extent < g.min_units)
                r.add(-1, Violation::Category::Goal,
                      "overhang extent " + std::to_string(extent) + " < " +
                          std::to_string(g.min_units));
            break;
        }
        case GoalAtom::Kind::PlacedOn: {
            if (!rel_ok) break;
            bool found = false;
            for (const auto& a : rel.on) found |= a.b == g.block && a.l == g.loc;
            if (!found)
                r.add(-1, Violation::Category::Goal,
                      "'" + g.block + "' does not rest on '" + g.loc + "'");
            break;
        }
        case GoalAtom::Kind::PlacedOnAt: {
            if (!rel_ok) break;
            if (!rel.on.count(OnAtom{g.block, g.loc, g.u, g.v}))
                r.add(-1, Violation::Category::Goal,
                      "'" + g.block + "' does not rest on '" + g.loc + "' at (" +
                          std::to_string(g.u) + "," + std::to_string(g.v) + ")");
            break;
        }
        case GoalAtom::Kind::ExactCell: {
            auto it = state.anchored.find(g.block);
            if (it == state.anchored.end() || it->second.x != g.x || it->second.h != g.h)
                r.add(-1, Violation::Category::Goal,
                      "'" + g.block + "' is not at (" + std::to_string(g.x) + "," +
                          std::to_string(g.h) + ")");
            break;
        }
        }
    }

    return r.out;
}

} // namespace blockplan
