#include "blockplan/closure.hpp"

#include <algorithm>

namespace blockplan {

namespace {

// plain union-find over symbol ids
struct UnionFind {
    std::map<Sym, Sym> parent;
    const Sym& find(const Sym& x) {
        auto it = parent.find(x);
        if (it == parent.end()) it = parent.emplace(x, x).first;
        if (it->second == x) return it->first;
        const Sym& root = find(it->second);
        it->second = root;
        return root;
    }
    void unite(const Sym& a, const Sym& b) {
        Sym ra = find(a), rb = find(b);
        if (ra != rb) parent[ra] = rb;
    }
};

std::map<Cell, CellOccupant> local_assembly_grid(const ProblemInstance& inst,
                                                 const HeldAssembly& asm_) {
    std::map<Cell, CellOccupant> local;
    for (const auto& m : asm_.members)
        for (int v = 1; v <= inst.block_size(m.block); ++v)
            local[Cell{m.dx + v - 1, m.dh}] = CellOccupant{m.block, v};
    return local;
}

} // namespace

std::set<OnAtom> derive_on(const ProblemInstance& inst, const WorldState& state) {
    std::set<OnAtom> out;
    GridIndex grid(inst, state);
    for (const auto& [id, p] : state.anchored) {
        for (const Cell& c : block_cells(inst, id, p)) {
            int v = c.x - p.x + 1;
            if (const Surface* s = surface_under(inst, c.x, c.h)) {
                out.insert(OnAtom{id, s->id, c.x, v});
            } else if (c.h > 0) {
                if (const CellOccupant* occ = grid.at(c.x, c.h - 1))
                    out.insert(OnAtom{id, occ->block, occ->unit, v});
            }
        }
    }
    for (const auto& [g, asm_] : state.held) {
        auto local = local_assembly_grid(inst, asm_);
        for (const auto& [cell, occ] : local) {
            if (cell.h == 0) continue;
            auto below = local.find(Cell{cell.x, cell.h - 1});
            if (below != local.end())
                out.insert(OnAtom{occ.block, below->second.block, below->second.unit, occ.unit});
        }
    }
    return out;
}

std::set<AboveAtom> compute_above(const ProblemInstance& inst, const WorldState& state) {
    std::set<AboveAtom> out;
    for (const auto& [id, p] : state.anchored)
        for (const Cell& c : block_cells(inst, id, p))
            out.insert(AboveAtom{c.h + 1, id, c.x - p.x + 1, c.x});
    return out;
}

std::set<std::pair<Sym, Sym>> project_on_aux(const std::set<OnAtom>& on) {
    std::set<std::pair<Sym, Sym>> aux;
    for (const auto& a : on) aux.emplace(a.b, a.l);
    return aux;
}

std::set<std::pair<Sym, Sym>> supported_closure(const std::set<std::pair<Sym, Sym>>& on_aux) {
    std::set<std::pair<Sym, Sym>> sup = on_aux;
    for (const auto& [b, l] : sup)
        if (b == l) throw CircularityError(b);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::pair<Sym, Sym>> fresh;
        for (const auto& [b, lp] : on_aux)
            for (const auto& [lp2, l] : sup) {
                if (lp2 != lp || b == lp) continue;
                if (!sup.count({b, l})) fresh.emplace_back(b, l);
            }
        for (const auto& p : fresh) {
            if (p.first == p.second) throw CircularityError(p.first);
            grew |= sup.insert(p).second;
        }
    }
    return sup;
}

Components connected_components(const ProblemInstance& inst, const WorldState& state,
                                const std::vector<Sym>& left_group,
                                const std::vector<Sym>& right_group) {
    UnionFind uf;
    std::vector<Sym> nodes;
    for (const auto& s : inst.surfaces) { uf.find(s.id); nodes.push_back(s.id); }
    for (const auto& [id, p] : state.anchored) { uf.find(id); nodes.push_back(id); }

    WorldState anchored_only = state;
    anchored_only.held.clear();
    for (const auto& a : derive_on(inst, anchored_only)) uf.unite(a.b, a.l);

    Components out;
    std::map<Sym, int> ids;
    for (const auto& n : nodes) {
        Sym root = uf.find(n);
        auto [it, fresh] = ids.emplace(root, (int)ids.size());
        out.component[n] = it->second;
    }
    for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j)
            if (out.component[nodes[i]] == out.component[nodes[j]]) {
                out.connected.emplace(nodes[i], nodes[j]);
                out.connected.emplace(nodes[j], nodes[i]);
            }
    for (const auto& [id, p] : state.anchored) {
        std::set<Side>& sides = out.side[id];
        for (const auto& s : left_group)
            if (out.component.count(s) && out.component[s] == out.component[id])
                sides.insert(Side::Left);
        for (const auto& s : right_group)
            if (out.component.count(s) && out.component[s] == out.component[id])
                sides.insert(Side::Right);
    }
    return out;
}

int overhang_extent(const ProblemInstance& inst, const WorldState& state,
                    const Sym& surface, GoalAtom::Edge edge) {
    const Surface* s = inst.surface(surface);
    if (!s) throw ValidationError("unknown surface id '" + surface + "'");
    Components comps = connected_components(inst, state, {}, {});
    GridIndex grid(inst, state);
    int comp = comps.component.at(surface);
    int step = edge == GoalAtom::Edge::Right ? 1 : -1;
    int x = edge == GoalAtom::Edge::Right ? s->x_hi + 1 : s->x_lo - 1;
    int extent = 0;
    while (true) {
        bool covered = false;
        for (int h = 0; h <= grid.max_level() && !covered; ++h) {
            const CellOccupant* occ = grid.at(x, h);
            covered = occ && comps.component.at(occ->block) == comp;
        }
        if (!covered) break;
        ++extent;
        x += step;
    }
    return extent;
}

DerivedRelations derive_relations(const ProblemInstance& inst, const WorldState& state,
                                  const std::vector<Sym>& left_group,
                                  const std::vector<Sym>& right_group) {
    DerivedRelations r;
    r.on = derive_on(inst, state);
    r.above = compute_above(inst, state);
    r.supported = supported_closure(project_on_aux(r.on));
    Components comps = connected_components(inst, state, left_group, right_group);
    r.connected = std::move(comps.connected);
    r.side = std::move(comps.side);
    return r;
}

// --- literal rule iteration ---------------------------------------------

namespace {

struct RuleSets {
    std::set<OnAtom> on;
    std::set<AboveAtom> above;
};

// Applies the defining rules until nothing new is derivable. `surfaces`
// empty means the local assembly frame, where above atoms are pre-seeded.
void iterate_rules(const ProblemInstance& inst, const std::vector<Surface>& surfaces,
                   RuleSets& rs, long max_rounds) {
    auto unit_lo = [&](const Sym& loc) {
        for (const auto& s : surfaces)
            if (s.id == loc) return s.x_lo;
        return 1;
    };
    auto unit_hi = [&](const Sym& loc) {
        for (const auto& s : surfaces)
            if (s.id == loc) return s.x_hi;
        return inst.block_size(loc);
    };
    auto is_surface = [&](const Sym& loc) {
        for (const auto& s : surfaces)
            if (s.id == loc) return true;
        return false;
    };

    long rounds = 0;
    bool grew = true;
    while (grew) {
        if (++rounds > max_rounds) throw NonTerminationError();
        grew = false;
        std::vector<OnAtom> new_on;
        std::vector<AboveAtom> new_above;

        for (const auto& a : rs.on) {
            // unit spaces of a long box rest pairwise once one of them does
            int right = std::min(inst.block_size(a.b) - a.v, unit_hi(a.l) - a.u);
            for (int i = 1; i <= right; ++i)
                new_on.push_back(OnAtom{a.b, a.l, a.u + i, a.v + i});
            int left = std::min(a.v - 1, a.u - unit_lo(a.l));
            for (int i = 1; i <= left; ++i)
                new_on.push_back(OnAtom{a.b, a.l, a.u - i, a.v - i});

            if (is_surface(a.l)) {
                // base of the height recursion: surface unit u is column u
                for (const auto& s : surfaces)
                    if (s.id == a.l) new_above.push_back(AboveAtom{s.level + 1, a.b, a.v, a.u});
            } else {
                // one level above the supporting unit, same column
                for (const auto& ab : rs.above)
                    if (ab.b == a.l && ab.v == a.u)
                        new_above.push_back(AboveAtom{ab.h + 1, a.b, a.v, ab.x});
            }
        }

        for (const auto& ab : rs.above) {
            // horizontal recursion along the box
            if (ab.v < inst.block_size(ab.b))
                new_above.push_back(AboveAtom{ab.h, ab.b, ab.v + 1, ab.x + 1});
            if (ab.v > 1)
                new_above.push_back(AboveAtom{ab.h, ab.b, ab.v - 1, ab.x - 1});

            // touching columns one level apart rest on each other
            for (const auto& ab2 : rs.above)
                if (ab2.h == ab.h - 1 && ab2.x == ab.x && ab2.b != ab.b)
                    new_on.push_back(OnAtom{ab.b, ab2.b, ab2.v, ab.v});
            // ... and likewise for a surface whose top face is at that level
            for (const auto& s : surfaces)
                if (s.level == ab.h - 1 && s.covers(ab.x))
                    new_on.push_back(OnAtom{ab.b, s.id, ab.x, ab.v});
        }

        for (const auto& a : new_on) grew |= rs.on.insert(a).second;
        for (const auto& a : new_above) grew |= rs.above.insert(a).second;
    }
}

} // namespace

OracleRelations fixpoint_oracle(const ProblemInstance& inst, const WorldState& state) {
    long cols = inst.col_hi() - inst.col_lo() + 1;
    long max_rounds = (long)inst.blocks.size() * (long)inst.blocks.size() * cols + 16;

    RuleSets anchored;
    for (const auto& [id, p] : state.anchored)
        anchored.on.insert(OnAtom{id, p.anchor.loc, p.anchor.u, p.anchor.v});
    iterate_rules(inst, inst.surfaces, anchored, max_rounds);

    OracleRelations out;
    out.on = anchored.on;
    out.above = anchored.above;

    for (const auto& [g, asm_] : state.held) {
        RuleSets local;
        // root acts as the ground of the assembly frame
        for (int v = 1; v <= inst.block_size(asm_.root); ++v)
            local.above.insert(AboveAtom{1, asm_.root, v, v - 1});
        for (const auto& m : asm_.members)
            if (m.block != asm_.root)
                local.on.insert(OnAtom{m.block, m.anchor.loc, m.anchor.u, m.anchor.v});
        iterate_rules(inst, {}, local, max_rounds);
        out.on.insert(local.on.begin(), local.on.end()); // scaffolding above atoms dropped
    }

    out.supported = supported_closure(project_on_aux(out.on));
    return out;
}

} // namespace blockplan
