#include "blockplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "blockplan/closure.hpp"

namespace blockplan {

namespace {

std::string anchored_key(const WorldState& state) {
    std::ostringstream os;
    for (const auto& [id, p] : state.anchored) os << id << '@' << p.x << ',' << p.h << ';';
    return os.str();
}

std::string held_key(const HeldAssembly& asm_) {
    std::ostringstream os;
    os << asm_.root << ':';
    for (const auto& m : asm_.members) os << m.block << '+' << m.dx << ',' << m.dh << ';';
    return os.str();
}

} // namespace

Pickable pickable_set(const ProblemInstance& inst, const WorldState& state, const Sym& b) {
    Pickable out;
    if (!state.is_anchored(b)) {
        out.reason = "block not anchored";
        return out;
    }
    auto on_aux = project_on_aux(derive_on(inst, state));
    auto sup = supported_closure(on_aux);

    out.blocks.insert(b);
    for (const auto& [bb, l] : sup)
        if (l == b) out.blocks.insert(bb);

    for (const Sym& m : out.blocks) {
        std::set<Sym> parents;
        for (const auto& [bb, l] : on_aux)
            if (bb == m) parents.insert(l);
        if (m == b) {
            if (parents.size() != 1) {
                out.blocks.clear();
                out.reason = "resting on multiple locations";
                return out;
            }
        } else {
            for (const Sym& p : parents)
                if (!out.blocks.count(p)) {
                    out.blocks.clear();
                    out.reason = "externally supported member";
                    return out;
                }
        }
    }
    return out;
}

namespace {

struct Option {
    Action act;              // meaningful iff !noop
    bool noop = true;
    std::set<Sym> blocks;    // blocks the action touches
    std::vector<Cell> cells; // placement target cells
    Sym place_target;        // anchor location for places
};

std::vector<Option> pick_options(const ProblemInstance& inst, const WorldState& state,
                                 const Sym& gripper) {
    std::vector<Option> out;
    for (const auto& [id, p] : state.anchored) {
        (void)p;
        Pickable pk = pickable_set(inst, state, id);
        if (!pk.ok()) continue;
        Option o;
        o.noop = false;
        o.act = Action{Action::Kind::Pick, gripper, id, {}, 0, 0};
        o.blocks = std::move(pk.blocks);
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<Option> place_options(const ProblemInstance& inst, const GridIndex& grid,
                                  const Sym& gripper, const HeldAssembly& held) {
    std::vector<Option> out;
    int root_size = inst.block_size(held.root);

    std::set<int> levels;
    for (const auto& s : inst.surfaces) levels.insert(s.level);
    for (const auto& [cell, occ] : grid.cells()) {
        (void)occ;
        levels.insert(cell.h + 1);
    }

    for (int x = inst.col_lo(); x <= inst.col_hi(); ++x) {
        for (int h : levels) {
            bool support = false;
            for (int xr = x; xr < x + root_size && !support; ++xr)
                support = surface_under(inst, xr, h) != nullptr ||
                          (h > 0 && grid.occupied(xr, h - 1));
            if (!support) continue;

            bool free = true;
            auto cells = assembly_cells(inst, held, x, h);
            for (const auto& [m, c] : cells) {
                (void)m;
                if (c.x < inst.col_lo() || c.x > inst.col_hi() || c.h < 0 ||
                    grid.occupied(c.x, c.h) || inside_surface_solid(inst, c.x, c.h)) {
                    free = false;
                    break;
                }
            }
            if (!free) continue;

            auto anchor = canonical_anchor(inst, grid, held.root, x, h);
            if (!anchor) continue;

            Option o;
            o.noop = false;
            o.act = Action{Action::Kind::Place, gripper, {}, anchor->loc, anchor->u, anchor->v};
            o.place_target = anchor->loc;
            for (const auto& m : held.members) o.blocks.insert(m.block);
            for (const auto& [mb, c] : cells) {
                (void)mb;
                o.cells.push_back(c);
            }
            out.push_back(std::move(o));
        }
    }
    return out;
}

bool conflicts(const Option& a, const Option& b) {
    for (const Sym& x : a.blocks)
        if (b.blocks.count(x)) return true;
    // overlapping placement cells
    for (const Cell& c : a.cells)
        if (std::find(b.cells.begin(), b.cells.end(), c) != b.cells.end()) return true;
    // a location being picked cannot serve as a placement target
    bool a_picks = a.act.kind == Action::Kind::Pick;
    bool b_picks = b.act.kind == Action::Kind::Pick;
    if (!a.place_target.empty() && b_picks && b.blocks.count(a.place_target)) return true;
    if (!b.place_target.empty() && a_picks && a.blocks.count(b.place_target)) return true;
    return false;
}

} // namespace

std::vector<JointAction> enumerate_joint_actions(const ProblemInstance& inst,
                                                 const WorldState& state) {
    GridIndex grid(inst, state);

    // per-gripper option lists; the no-op comes first so the empty joint
    // action is enumerated before anything else
    std::vector<std::vector<Option>> menu;
    std::vector<Option> picks; // identical for every empty gripper, computed once
    bool picks_ready = false;
    for (const Sym& g : inst.grippers) {
        std::vector<Option> opts;
        opts.emplace_back(); // noop
        if (const HeldAssembly* held = state.holding(g)) {
            for (auto& o : place_options(inst, grid, g, *held)) opts.push_back(std::move(o));
        } else {
            if (!picks_ready) {
                picks = pick_options(inst, state, g);
                picks_ready = true;
            }
            for (Option o : picks) {
                o.act.gripper = g;
                opts.push_back(std::move(o));
            }
        }
        menu.push_back(std::move(opts));
    }

    std::vector<JointAction> out;
    std::vector<const Option*> chosen;
    auto build = [&](auto&& self, size_t gi) -> void {
        if (gi == menu.size()) {
            JointAction ja;
            for (const Option* o : chosen)
                if (!o->noop) ja.push_back(o->act);
            std::sort(ja.begin(), ja.end());
            out.push_back(std::move(ja));
            return;
        }
        for (const Option& o : menu[gi]) {
            bool bad = false;
            if (!o.noop)
                for (const Option* prev : chosen)
                    if (!prev->noop && conflicts(*prev, o)) {
                        bad = true;
                        break;
                    }
            if (bad) continue;
            chosen.push_back(&o);
            self(self, gi + 1);
            chosen.pop_back();
        }
    };
    build(build, 0);
    return out;
}

ApplyResult apply(const ProblemInstance& inst, const WorldState& state, const JointAction& ja,
                  StabilityCache* cache) {
    WorldState next = state;
    next.t = state.t + 1;

    std::set<Sym> acted;
    for (const auto& act : ja) {
        if (!inst.is_gripper(act.gripper))
            throw ValidationError("unknown gripper '" + act.gripper + "'");
        if (!acted.insert(act.gripper).second)
            throw ValidationError("gripper '" + act.gripper + "' acts twice");
    }

    // effects are simultaneous: every precondition reads `state`
    for (const auto& act : ja) {
        if (act.kind != Action::Kind::Pick) continue;
        if (state.holding(act.gripper)) throw ValidationError("pick with a loaded gripper");
        Pickable pk = pickable_set(inst, state, act.block);
        if (!pk.ok())
            throw ValidationError("pick of '" + act.block + "': " + pk.reason);

        const Placement& rp = state.anchored.at(act.block);
        HeldAssembly held;
        held.root = act.block;
        for (const Sym& m : pk.blocks) {
            const Placement& mp = state.anchored.at(m);
            HeldAssembly::Member mem;
            mem.block = m;
            mem.dx = mp.x - rp.x;
            mem.dh = mp.h - rp.h;
            if (m != act.block) mem.anchor = mp.anchor;
            held.members.push_back(std::move(mem));
            next.anchored.erase(m);
        }
        std::sort(held.members.begin(), held.members.end(),
                  [](const auto& a, const auto& b) { return a.block < b.block; });
        next.held[act.gripper] = std::move(held);
    }

    std::vector<std::pair<int, std::vector<int>>> placed_columns; // leftmost, all leftmosts
    std::optional<GridIndex> pre_grid; // placement cells must be free before the step
    for (const auto& act : ja) {
        if (act.kind != Action::Kind::Place) continue;
        const HeldAssembly* held = state.holding(act.gripper);
        if (!held) throw ValidationError("place with an empty gripper");
        auto root_cell = resolve_anchor(inst, state, act.target, act.u, act.v, held->root);
        if (!root_cell) throw ValidationError("unresolvable placement anchor");
        if (!pre_grid) pre_grid.emplace(inst, state);
        for (const auto& [mb, c] : assembly_cells(inst, *held, root_cell->x, root_cell->h)) {
            (void)mb;
            if (c.x < inst.col_lo() || c.x > inst.col_hi() || c.h < 0 ||
                pre_grid->occupied(c.x, c.h) || inside_surface_solid(inst, c.x, c.h))
                throw ValidationError("placement cells blocked or out of bounds");
        }

        std::vector<int> lefts;
        int leftmost = root_cell->x;
        for (const auto& m : held->members) {
            Placement p;
            p.x = root_cell->x + m.dx;
            p.h = root_cell->h + m.dh;
            p.anchor = m.block == held->root ? AnchorRef{act.target, act.u, act.v} : m.anchor;
            next.anchored[m.block] = p;
            lefts.push_back(p.x);
            leftmost = std::min(leftmost, p.x);
        }
        next.held.erase(act.gripper);
        placed_columns.emplace_back(leftmost, std::move(lefts));
    }

    check_state_invariants(inst, next);

    ApplyResult res;
    {
        std::string key = anchored_key(next);
        const StabilityVerdict* v = nullptr;
        StabilityVerdict fresh;
        if (cache) {
            auto it = cache->anchored.find(key);
            if (it != cache->anchored.end()) v = &it->second;
        }
        if (!v) {
            fresh = check_static_equilibrium(extract_contacts(inst, next));
            if (cache) v = &(cache->anchored[key] = fresh);
            else v = &fresh;
        }
        if (!v->stable) {
            res.rejected = "unstable";
            return res;
        }
    }
    for (const auto& [g, held] : next.held) {
        if (held.members.size() < 2) continue;
        std::string key = held_key(held);
        const StabilityVerdict* v = nullptr;
        StabilityVerdict fresh;
        if (cache) {
            auto it = cache->held.find(key);
            if (it != cache->held.end()) v = &it->second;
        }
        if (!v) {
            fresh = check_held_stability(inst, next, g);
            if (cache) v = &(cache->held[key] = fresh);
            else v = &fresh;
        }
        if (!v->stable) {
            res.rejected = "held unstable";
            return res;
        }
    }

    if (inst.ordering) {
        int slack = inst.ordering->slack;
        for (const auto& [leftmost, lefts] : placed_columns) {
            (void)lefts;
            if (state.watermark && leftmost < *state.watermark - slack) {
                res.rejected = "ordering";
                return res;
            }
        }
        for (const auto& [leftmost, lefts] : placed_columns) {
            (void)leftmost;
            for (int l : lefts)
                next.watermark = next.watermark ? std::max(*next.watermark, l) : l;
        }
    }

    res.state = std::move(next);
    return res;
}

bool check_goal(const ProblemInstance& inst, const WorldState& state) {
    if (!state.held.empty()) return false;

    std::optional<std::set<OnAtom>> on;
    auto the_on = [&]() -> const std::set<OnAtom>& {
        if (!on) on = derive_on(inst, state);
        return *on;
    };

    for (const auto& g : inst.goal) {
        switch (g.kind) {
        case GoalAtom::Kind::Bridge: {
            Components comps =
                connected_components(inst, state, g.left_group, g.right_group);
            bool found = false;
            for (const auto& [id, sides] : comps.side)
                if (sides.count(Side::Left) && sides.count(Side::Right)) {
                    found = true;
                    break;
                }
            if (!found) return false;
            break;
        }
        case GoalAtom::Kind::Overhang:
            if (overhang_extent(inst, state, g.surface, g.edge) < g.min_units) return false;
            break;
        case GoalAtom::Kind::PlacedOn: {
            bool found = false;
            for (const auto& a : the_on())
                if (a.b == g.block && a.l == g.loc) {
                    found = true;
                    break;
                }
            if (!found) return false;
            break;
        }
        case GoalAtom::Kind::PlacedOnAt:
            if (!the_on().count(OnAtom{g.block, g.loc, g.u, g.v})) return false;
            break;
        case GoalAtom::Kind::ExactCell: {
            auto it = state.anchored.find(g.block);
            if (it == state.anchored.end() || it->second.x != g.x || it->second.h != g.h)
                return false;
            break;
        }
        }
    }
    return true;
}

namespace {

struct LimitHit {
    const char* kind;
};

// Admissible step count still needed: an anchored block sitting on the wrong
// cell of an exact-cell goal must be picked in one step and placed in a later
// one; a loaded gripper needs at least a placement step before the goal can
// hold.
int goal_lower_bound(const ProblemInstance& inst, const WorldState& state) {
    for (const GoalAtom& g : inst.goal) {
        if (g.kind != GoalAtom::Kind::ExactCell) continue;
        auto it = state.anchored.find(g.block);
        if (it != state.anchored.end() && (it->second.x != g.x || it->second.h != g.h)) return 2;
    }
    return state.held.empty() ? 0 : 1;
}

struct Search {
    Search(const ProblemInstance& inst_, const SearchLimits& limits_)
        : inst(inst_), limits(limits_) {}
    const ProblemInstance& inst;
    SearchLimits limits;
    SearchStats stats;
    StabilityCache cache;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void count_node() {
        ++stats.nodes_expanded;
        if (limits.max_nodes > 0 && stats.nodes_expanded > limits.max_nodes)
            throw LimitHit{"nodes"};
        if (limits.max_millis > 0 && (stats.nodes_expanded & 0xff) == 0) {
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            if (ms > limits.max_millis) throw LimitHit{"time"};
        }
    }
};

bool dfs_horizon(Search& s, const WorldState& state, int depth, int horizon,
                 std::map<std::string, int>& seen, std::vector<JointAction>& path) {
    if (depth == horizon) return check_goal(s.inst, state);
    if (goal_lower_bound(s.inst, state) > horizon - depth) return false;
    s.count_node();
    for (const JointAction& ja : enumerate_joint_actions(s.inst, state)) {
        ApplyResult r = apply(s.inst, state, ja, &s.cache);
        if (!r.ok()) {
            if (r.rejected != "ordering") ++s.stats.stability_rejections;
            continue;
        }
        std::string key = state_key(*r.state);
        auto it = seen.find(key);
        if (it != seen.end() && it->second <= depth + 1) {
            ++s.stats.duplicates;
            continue;
        }
        seen[key] = depth + 1;
        path.push_back(ja);
        if (dfs_horizon(s, *r.state, depth + 1, horizon, seen, path)) return true;
        path.pop_back();
    }
    return false;
}

} // namespace

SearchResult plan(const ProblemInstance& inst, const SearchLimits& limits) {
    Search s(inst, limits);
    int bound = limits.makespan.value_or(inst.makespan);
    WorldState start = initial_state(inst);

    SearchResult out;
    try {
        for (int horizon = 0; horizon <= bound; ++horizon) {
            ++s.stats.horizons_tried;
            std::map<std::string, int> seen;
            seen[state_key(start)] = 0;
            std::vector<JointAction> path;
            if (dfs_horizon(s, start, 0, horizon, seen, path)) {
                out.outcome = SearchResult::Outcome::FoundPlan;
                out.plan.steps = std::move(path);
                out.stats = s.stats;
                return out;
            }
        }
        out.outcome = SearchResult::Outcome::Unsat;
        out.unsat_makespan = bound;
    } catch (const LimitHit& hit) {
        out.outcome = SearchResult::Outcome::ResourceLimit;
        out.limit = hit.kind;
    }
    out.stats = s.stats;
    return out;
}

namespace {

void dfs_all(Search& s, const WorldState& state, int depth, int bound,
             std::vector<JointAction>& path, std::set<Plan>& plans) {
    if (check_goal(s.inst, state)) plans.insert(Plan{path});
    if (depth == bound) return;
    if (goal_lower_bound(s.inst, state) > bound - depth) return;
    s.count_node();
    for (const JointAction& ja : enumerate_joint_actions(s.inst, state)) {
        ApplyResult r = apply(s.inst, state, ja, &s.cache);
        if (!r.ok()) {
            if (r.rejected != "ordering") ++s.stats.stability_rejections;
            continue;
        }
        path.push_back(ja);
        dfs_all(s, *r.state, depth + 1, bound, path, plans);
        path.pop_back();
    }
}

} // namespace

EnumerationResult enumerate_plans(const ProblemInstance& inst, const SearchLimits& limits) {
    Search s(inst, limits);
    int bound = limits.makespan.value_or(inst.makespan);
    WorldState start = initial_state(inst);

    EnumerationResult out;
    try {
        std::vector<JointAction> path;
        dfs_all(s, start, 0, bound, path, out.plans);
        out.complete = true;
    } catch (const LimitHit&) {
        out.complete = false;
    }
    out.stats = s.stats;
    return out;
}

} // namespace blockplan
