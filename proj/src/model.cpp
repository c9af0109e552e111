#include "blockplan/model.hpp"

#include <algorithm>
#include <sstream>

namespace blockplan {

const HeldAssembly::Member* HeldAssembly::find(const Sym& block) const {
    for (const auto& m : members)
        if (m.block == block) return &m;
    return nullptr;
}

const HeldAssembly* WorldState::holding(const Sym& gripper) const {
    auto it = held.find(gripper);
    return it == held.end() ? nullptr : &it->second;
}

std::optional<Sym> WorldState::carrier_of(const Sym& block) const {
    for (const auto& [g, asm_] : held)
        if (asm_.find(block)) return g;
    return std::nullopt;
}

const BlockSpec* ProblemInstance::block(const Sym& id) const {
    for (const auto& b : blocks)
        if (b.id == id) return &b;
    return nullptr;
}

const Surface* ProblemInstance::surface(const Sym& id) const {
    for (const auto& s : surfaces)
        if (s.id == id) return &s;
    return nullptr;
}

bool ProblemInstance::is_gripper(const Sym& id) const {
    return std::find(grippers.begin(), grippers.end(), id) != grippers.end();
}

int ProblemInstance::block_size(const Sym& id) const {
    const BlockSpec* b = block(id);
    if (!b) throw ValidationError("unknown block id '" + id + "'");
    return b->size;
}

int ProblemInstance::col_lo() const {
    int lo = surfaces.empty() ? 0 : surfaces.front().x_lo;
    for (const auto& s : surfaces) lo = std::min(lo, s.x_lo);
    int total = 0;
    for (const auto& b : blocks) total += b.size;
    return lo - total;
}

int ProblemInstance::col_hi() const {
    int hi = surfaces.empty() ? 0 : surfaces.front().x_hi;
    for (const auto& s : surfaces) hi = std::max(hi, s.x_hi);
    int total = 0;
    for (const auto& b : blocks) total += b.size;
    return hi + total;
}

GridIndex::GridIndex(const ProblemInstance& inst, const WorldState& state) {
    for (const auto& [id, p] : state.anchored) {
        int size = inst.block_size(id);
        for (int v = 1; v <= size; ++v) {
            Cell c{p.x + v - 1, p.h};
            auto [it, fresh] = cells_.emplace(c, CellOccupant{id, v});
            if (!fresh)
                throw ValidationError("blocks '" + it->second.block + "' and '" + id +
                                      "' overlap at column " + std::to_string(c.x));
            max_level_ = std::max(max_level_, p.h);
        }
    }
}

const CellOccupant* GridIndex::at(int x, int h) const {
    auto it = cells_.find(Cell{x, h});
    return it == cells_.end() ? nullptr : &it->second;
}

bool inside_surface_solid(const ProblemInstance& inst, int x, int h) {
    for (const auto& s : inst.surfaces)
        if (s.covers(x) && h < s.level) return true;
    return false;
}

const Surface* surface_under(const ProblemInstance& inst, int x, int h) {
    for (const auto& s : inst.surfaces)
        if (s.covers(x) && s.level == h) return &s;
    return nullptr;
}

std::vector<Cell> block_cells(const ProblemInstance& inst, const Sym& block,
                              const Placement& p) {
    std::vector<Cell> out;
    int size = inst.block_size(block);
    out.reserve(size);
    for (int v = 1; v <= size; ++v) out.push_back(Cell{p.x + v - 1, p.h});
    return out;
}

std::vector<std::pair<Sym, Cell>> assembly_cells(const ProblemInstance& inst,
                                                 const HeldAssembly& held,
                                                 int root_x, int root_h) {
    std::vector<std::pair<Sym, Cell>> out;
    for (const auto& m : held.members) {
        int size = inst.block_size(m.block);
        for (int v = 1; v <= size; ++v)
            out.emplace_back(m.block, Cell{root_x + m.dx + v - 1, root_h + m.dh});
    }
    return out;
}

std::optional<Cell> resolve_anchor(const ProblemInstance& inst, const WorldState& state,
                                   const Sym& target, int u, int v, const Sym& root) {
    int size = inst.block_size(root);
    if (v < 1 || v > size) return std::nullopt;
    if (const Surface* s = inst.surface(target)) {
        if (!s->covers(u)) return std::nullopt;
        return Cell{u - (v - 1), s->level};
    }
    const BlockSpec* tb = inst.block(target);
    if (!tb) return std::nullopt;
    auto it = state.anchored.find(target);
    if (it == state.anchored.end()) return std::nullopt; // held or unknown placement
    if (u < 1 || u > tb->size) return std::nullopt;
    int ucol = it->second.x + u - 1;
    return Cell{ucol - (v - 1), it->second.h + 1};
}

std::optional<AnchorRef> canonical_anchor(const ProblemInstance& inst, const GridIndex& grid,
                                          const Sym& root, int x, int h) {
    int size = inst.block_size(root);
    for (int v = 1; v <= size; ++v) {
        int col = x + v - 1;
        if (const Surface* s = surface_under(inst, col, h))
            return AnchorRef{s->id, col, v};
        if (h > 0)
            if (const CellOccupant* occ = grid.at(col, h - 1))
                return AnchorRef{occ->block, occ->unit, v};
    }
    return std::nullopt;
}

void check_state_invariants(const ProblemInstance& inst, const WorldState& state) {
    GridIndex grid(inst, state); // throws on cell overlap

    for (const auto& [id, p] : state.anchored) {
        if (!inst.block(id)) throw ValidationError("unknown block id '" + id + "'");
        if (p.h < 0) throw ValidationError("block '" + id + "' below ground");
        bool supported = false;
        for (const Cell& c : block_cells(inst, id, p)) {
            if (c.x < inst.col_lo() || c.x > inst.col_hi())
                throw ValidationError("block '" + id + "' outside the column envelope");
            if (inside_surface_solid(inst, c.x, c.h))
                throw ValidationError("block '" + id + "' overlaps a surface body");
            if (surface_under(inst, c.x, c.h) || (c.h > 0 && grid.at(c.x, c.h - 1)))
                supported = true;
        }
        if (!supported) throw ValidationError("block '" + id + "' is floating");
        // the stored anchor must actually name a supporting cell
        auto at = resolve_anchor(inst, state, p.anchor.loc, p.anchor.u, p.anchor.v, id);
        if (!at || !(*at == Cell{p.x, p.h}))
            throw ValidationError("block '" + id + "' has an inconsistent anchor");
    }

    std::set<Sym> seen;
    for (const auto& [id, p] : state.anchored) seen.insert(id);

    for (const auto& [g, asm_] : state.held) {
        if (!inst.is_gripper(g)) throw ValidationError("unknown gripper '" + g + "'");
        if (asm_.members.empty()) throw ValidationError("empty assembly in gripper '" + g + "'");
        const HeldAssembly::Member* root = asm_.find(asm_.root);
        if (!root || root->dx != 0 || root->dh != 0)
            throw ValidationError("assembly root must sit at the local origin");
        std::map<Cell, Sym> local;
        for (const auto& m : asm_.members) {
            if (!inst.block(m.block)) throw ValidationError("unknown block id '" + m.block + "'");
            if (!seen.insert(m.block).second)
                throw ValidationError("block '" + m.block + "' appears twice");
            if (m.dh < 0) throw ValidationError("assembly member below its root");
            if (m.block != asm_.root && m.dh == 0)
                throw ValidationError("assembly root is not the unique bottom member");
            for (int v = 1; v <= inst.block_size(m.block); ++v)
                if (!local.emplace(Cell{m.dx + v - 1, m.dh}, m.block).second)
                    throw ValidationError("assembly members overlap in gripper '" + g + "'");
        }
        // every non-root member must rest on another member
        for (const auto& m : asm_.members) {
            if (m.block == asm_.root) continue;
            bool rests = false;
            for (int v = 1; v <= inst.block_size(m.block) && !rests; ++v)
                rests = local.count(Cell{m.dx + v - 1, m.dh - 1}) > 0;
            if (!rests)
                throw ValidationError("assembly member '" + m.block + "' is floating");
        }
    }

    for (const auto& b : inst.blocks)
        if (!seen.count(b.id))
            throw ValidationError("block '" + b.id + "' is neither placed nor held");
    if (seen.size() != inst.blocks.size())
        throw ValidationError("state mentions blocks not declared by the instance");
}

std::string state_key(const WorldState& state) {
    std::ostringstream os;
    for (const auto& [id, p] : state.anchored)
        os << id << '@' << p.x << ',' << p.h << ';';
    for (const auto& [g, asm_] : state.held) {
        os << '#' << g << ':' << asm_.root;
        for (const auto& m : asm_.members)
            os << '|' << m.block << '+' << m.dx << ',' << m.dh;
        os << ';';
    }
    if (state.watermark) os << "~w" << *state.watermark;
    return os.str();
}

WorldState initial_state(const ProblemInstance& inst) {
    WorldState s = inst.initial;
    s.t = 0;
    if (inst.ordering && !s.watermark) s.watermark = std::nullopt; // set on first placement
    return s;
}

} // namespace blockplan
