#include "blockplan/stability.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "blockplan/lp.hpp"

namespace blockplan {

namespace {

struct BodyRows {
    int fx = -1, fy = -1, tau = -1;
};

// Builds the equilibrium system for one disturbance scenario.
// dir in {-1, 0, +1} scales the horizontal load epsilon * weight per body.
FeasibilityResult solve_scenario(const ContactProblem& p, int dir,
                                 std::vector<Sym>* row_body = nullptr) {
    LinearProgram lp;
    std::map<Sym, const ContactProblem::Body*> bodies;
    for (const auto& b : p.bodies) bodies[b.id] = &b;

    Rat mu(p.mu), eps(p.epsilon);

    std::map<Sym, BodyRows> rows;
    int row_idx = 0;
    for (const auto& b : p.bodies) {
        if (b.fixed) continue;
        BodyRows r;
        LinearProgram::Row fx, fy, tau;
        Rat w(b.weight);
        fx.rhs = -Rat(dir) * eps * w; // contact forces balance the disturbance
        fy.rhs = w;                   // ... and gravity
        tau.rhs = 0;                  // both external loads act at the centroid
        lp.add_row(fx); r.fx = row_idx++;
        lp.add_row(fy); r.fy = row_idx++;
        lp.add_row(tau); r.tau = row_idx++;
        rows[b.id] = r;
        if (row_body) { row_body->push_back(b.id); row_body->push_back(b.id); row_body->push_back(b.id); }
    }

    auto add_term = [&lp](int row, int var, const Rat& c) {
        lp.rows[row].terms.emplace_back(var, c);
    };

    for (const auto& c : p.contacts) {
        auto lo = bodies.find(c.lower);
        auto up = bodies.find(c.upper);
        if (lo == bodies.end() || up == bodies.end())
            throw NumericalError("contact references unknown body");
        Rat y(c.y);
        for (double px : {c.xa, c.xb}) {
            int n = lp.add_var();                 // normal, pushes bodies apart
            int fp = lp.add_var(), fm = lp.add_var(); // friction = fp - fm
            // friction cone: fp + fm <= mu * n
            LinearProgram::Row cone;
            cone.equality = false;
            cone.rhs = 0;
            cone.terms = {{fp, Rat(1)}, {fm, Rat(1)}, {n, -mu}};
            lp.add_row(cone);
            if (row_body) row_body->push_back("");

            Rat x(px);
            const auto* ub = up->second;
            if (!ub->fixed) {
                const BodyRows& r = rows[ub->id];
                add_term(r.fy, n, Rat(1));
                add_term(r.fx, fp, Rat(1));
                add_term(r.fx, fm, Rat(-1));
                // torque about the centroid: (x-cx)*Fy - (y-cy)*Fx
                add_term(r.tau, n, x - Rat(ub->cx));
                add_term(r.tau, fp, -(y - Rat(ub->cy)));
                add_term(r.tau, fm, y - Rat(ub->cy));
            }
            const auto* lb = lo->second;
            if (!lb->fixed) {
                const BodyRows& r = rows[lb->id];
                add_term(r.fy, n, Rat(-1));
                add_term(r.fx, fp, Rat(-1));
                add_term(r.fx, fm, Rat(1));
                add_term(r.tau, n, -(x - Rat(lb->cx)));
                add_term(r.tau, fp, y - Rat(lb->cy));
                add_term(r.tau, fm, -(y - Rat(lb->cy)));
            }
        }
    }

    try {
        return solve_feasibility(lp, Rat(p.slack));
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
}

StabilityVerdict verdict_from(const ContactProblem& p, int dir) {
    std::vector<Sym> row_body;
    FeasibilityResult res = solve_scenario(p, dir, &row_body);
    StabilityVerdict v;
    v.stable = res.feasible;
    if (!v.stable) {
        // body whose equilibrium rows keep the largest residual
        std::map<Sym, Rat> blame;
        for (size_t i = 0; i < res.row_residual.size() && i < row_body.size(); ++i)
            if (!row_body[i].empty()) blame[row_body[i]] += res.row_residual[i];
        for (const auto& [id, r] : blame)
            if (v.witness.empty() || r > blame[v.witness]) v.witness = id;
    }
    return v;
}

} // namespace

StabilityVerdict check_static_equilibrium(const ContactProblem& p) {
    bool any_loose = false;
    for (const auto& b : p.bodies) any_loose |= !b.fixed;
    if (!any_loose) return StabilityVerdict{true, {}};

    std::vector<int> dirs = {0};
    if (p.epsilon > 0) { dirs.push_back(1); dirs.push_back(-1); }
    for (int dir : dirs) {
        StabilityVerdict v = verdict_from(p, dir);
        if (!v.stable) return v;
    }
    return StabilityVerdict{true, {}};
}

ContactProblem extract_contacts(const ProblemInstance& inst, const WorldState& state) {
    ContactProblem p;
    p.mu = inst.physics.mu;
    p.epsilon = inst.physics.epsilon;
    p.slack = inst.physics.slack;

    for (const auto& s : inst.surfaces)
        p.bodies.push_back({s.id, 0.0, 0.0, 0.0, true});
    GridIndex grid(inst, state);
    for (const auto& [id, pl] : state.anchored) {
        const BlockSpec* b = inst.block(id);
        p.bodies.push_back({id, b->weight, pl.x + b->centroid_offset, pl.h + 0.5, false});

        // maximal runs of columns sharing one supporter
        Sym run_support;
        int run_start = 0;
        int prev = 0;
        auto flush = [&](int end_col) {
            if (!run_support.empty())
                p.contacts.push_back({run_support, id, (double)run_start,
                                      (double)end_col + 1.0, (double)pl.h});
            run_support.clear();
        };
        for (const Cell& c : block_cells(inst, id, pl)) {
            Sym sup;
            if (const Surface* s = surface_under(inst, c.x, c.h)) sup = s->id;
            else if (c.h > 0)
                if (const CellOccupant* occ = grid.at(c.x, c.h - 1)) sup = occ->block;
            if (sup != run_support) {
                flush(prev);
                run_support = sup;
                run_start = c.x;
            }
            prev = c.x;
        }
        flush(prev);
    }
    return p;
}

StabilityVerdict check_held_stability(const ProblemInstance& inst, const WorldState& state,
                                      const Sym& gripper) {
    const HeldAssembly* asm_ = state.holding(gripper);
    if (!asm_) throw ValidationError("gripper '" + gripper + "' holds nothing");
    if (asm_->members.size() == 1) return StabilityVerdict{true, {}};

    ContactProblem p;
    p.mu = inst.physics.mu;
    p.epsilon = inst.physics.epsilon;
    p.slack = inst.physics.slack;

    std::map<Cell, CellOccupant> local;
    for (const auto& m : asm_->members) {
        const BlockSpec* b = inst.block(m.block);
        p.bodies.push_back({m.block, b->weight, m.dx + b->centroid_offset, m.dh + 0.5,
                            m.block == asm_->root});
        for (int v = 1; v <= b->size; ++v)
            local[Cell{m.dx + v - 1, m.dh}] = CellOccupant{m.block, v};
    }
    for (const auto& m : asm_->members) {
        if (m.block == asm_->root) continue;
        Sym run_support;
        int run_start = 0, prev = 0;
        auto flush = [&](int end_col) {
            if (!run_support.empty())
                p.contacts.push_back({run_support, m.block, (double)run_start,
                                      (double)end_col + 1.0, (double)m.dh});
            run_support.clear();
        };
        for (int v = 1; v <= inst.block_size(m.block); ++v) {
            int col = m.dx + v - 1;
            Sym sup;
            auto below = local.find(Cell{col, m.dh - 1});
            if (below != local.end()) sup = below->second.block;
            if (sup != run_support) {
                flush(prev);
                run_support = sup;
                run_start = col;
            }
            prev = col;
        }
        flush(prev);
    }
    return check_static_equilibrium(p);
}

std::optional<StabilityVerdict> tower_oracle(const ContactProblem& p) {
    std::map<Sym, const ContactProblem::Body*> bodies;
    for (const auto& b : p.bodies) bodies[b.id] = &b;

    std::map<Sym, Sym> supporter, supportee;
    for (const auto& c : p.contacts) {
        if (supporter.count(c.upper) || supportee.count(c.lower))
            return std::nullopt; // branching structure
        supporter[c.upper] = c.lower;
        supportee[c.lower] = c.upper;
    }
    for (const auto& b : p.bodies) {
        if (b.fixed) continue;
        if (!supporter.count(b.id)) return std::nullopt; // loose body off the chain
    }

    const double tol = 1e-9;
    StabilityVerdict v{true, {}};
    for (const auto& c : p.contacts) {
        // everything carried across this contact
        double w_sum = 0, wx = 0, wh = 0;
        Sym cur = c.upper;
        while (!cur.empty()) {
            const auto* b = bodies.at(cur);
            if (b->fixed) return std::nullopt;
            w_sum += b->weight;
            wx += b->weight * b->cx;
            wh += b->weight * (b->cy - c.y);
            auto nx = supportee.find(cur);
            cur = nx == supportee.end() ? Sym{} : nx->second;
        }
        if (w_sum <= 0) continue;
        double centroid = wx / w_sum;
        double margin = p.epsilon * (wh / w_sum);
        if (centroid < c.xa + margin - tol || centroid > c.xb - margin + tol) {
            v.stable = false;
            v.witness = c.upper;
            return v;
        }
    }
    if (p.epsilon > p.mu + tol && !supporter.empty()) {
        // the disturbance exceeds what friction can transmit
        v.stable = false;
        v.witness = supporter.begin()->first;
    }
    return v;
}

std::string dump_lp(const ContactProblem& p) {
    std::ostringstream os;
    os << "bodies:\n";
    for (const auto& b : p.bodies)
        os << "  " << b.id << " w=" << b.weight << " c=(" << b.cx << "," << b.cy << ")"
           << (b.fixed ? " fixed" : "") << "\n";
    os << "contacts:\n";
    for (const auto& c : p.contacts)
        os << "  " << c.lower << " -> " << c.upper << " [" << c.xa << "," << c.xb
           << "] at y=" << c.y << "\n";
    os << "mu=" << p.mu << " epsilon=" << p.epsilon << " slack=" << p.slack << "\n";
    for (int dir : {0, 1, -1}) {
        if (dir != 0 && p.epsilon <= 0) continue;
        os << "scenario dir=" << (dir == 0 ? "none" : (dir > 0 ? "+x" : "-x")) << ":\n";
        for (const auto& b : p.bodies) {
            if (b.fixed) continue;
            os << "  " << b.id << ": sum Fx = " << dir * p.epsilon * b.weight
               << ", sum Fy = " << b.weight << ", sum tau = 0"
               << "  (normals n>=0 at interval endpoints, |f| <= mu n)\n";
        }
    }
    return os.str();
}

} // namespace blockplan
