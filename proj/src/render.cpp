#include "blockplan/render.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "blockplan/planner.hpp"

namespace blockplan {

namespace {

std::map<Sym, char> block_letters(const ProblemInstance& inst) {
    std::map<Sym, char> out;
    int i = 0;
    for (const auto& b : inst.blocks) // blocks are kept sorted by id
        out[b.id] = (char)('A' + (i++ % 26));
    return out;
}

struct Extent {
    int x_lo, x_hi, top;
};

Extent view_extent(const ProblemInstance& inst, const WorldState& state) {
    Extent e{0, 0, 0};
    bool first = true;
    auto widen = [&](int x, int h) {
        if (first) {
            e = {x, x, h};
            first = false;
            return;
        }
        e.x_lo = std::min(e.x_lo, x);
        e.x_hi = std::max(e.x_hi, x);
        e.top = std::max(e.top, h);
    };
    for (const auto& s : inst.surfaces) {
        widen(s.x_lo, s.level);
        widen(s.x_hi, s.level);
    }
    for (const auto& [id, p] : state.anchored)
        for (const Cell& c : block_cells(inst, id, p)) widen(c.x, c.h + 1);
    return e;
}

std::string ascii_render(const ProblemInstance& inst, const WorldState& state,
                         const RenderSpec& spec) {
    GridIndex grid(inst, state);
    auto letters = block_letters(inst);
    Extent e = view_extent(inst, state);
    int w = std::max(1, spec.scale);

    std::ostringstream os;
    for (int h = e.top; h >= 0; --h) {
        for (int x = e.x_lo; x <= e.x_hi; ++x) {
            char c = '.';
            if (const CellOccupant* occ = grid.at(x, h)) c = letters.at(occ->block);
            else if (inside_surface_solid(inst, x, h)) c = '=';
            os << std::string(w, c);
        }
        os << '\n';
    }
    // ground line marks level-0 surface tops
    for (int x = e.x_lo; x <= e.x_hi; ++x) {
        const Surface* s = surface_under(inst, x, 0);
        os << std::string(w, s ? '=' : '.');
    }
    os << '\n';

    for (const auto& [g, held] : state.held) {
        os << "held " << g << ':';
        for (const auto& m : held.members)
            os << ' ' << m.block << (m.block == held.root ? "*" : "") << "(" << m.dx << ","
               << m.dh << ")";
        os << '\n';
    }
    os << "legend:";
    for (const auto& [id, c] : letters) os << ' ' << c << '=' << id;
    os << '\n';
    return os.str();
}

std::string svg_render(const ProblemInstance& inst, const WorldState& state,
                       const RenderSpec& spec) {
    Extent e = view_extent(inst, state);
    int u = 24 * std::max(1, spec.scale);
    int x0 = e.x_lo - 1;
    int cols = e.x_hi - e.x_lo + 3;
    int rows = e.top + 2;
    int width = cols * u;
    int height = rows * u + u / 4;
    auto px = [&](int x) { return (x - x0) * u; };
    auto py = [&](int h) { return (rows - 1 - h) * u; }; // pixel y of a level's top face

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    for (const auto& s : inst.surfaces) {
        int top = py(s.level) + u; // pixel y of the top face
        os << "<rect x=\"" << px(s.x_lo) << "\" y=\"" << top << "\" width=\""
           << s.width() * u << "\" height=\"" << (height - top) << "\" fill=\"#b0a89c\"/>\n";
        os << "<text x=\"" << px(s.x_lo) + (s.width() * u) / 2 << "\" y=\"" << top + u / 2
           << "\" font-size=\"" << u / 2 << "\" text-anchor=\"middle\" fill=\"#333\">" << s.id
           << "</text>\n";
    }
    for (const auto& [id, p] : state.anchored) {
        int size = inst.block_size(id);
        os << "<rect x=\"" << px(p.x) << "\" y=\"" << py(p.h) << "\" width=\"" << size * u
           << "\" height=\"" << u
           << "\" fill=\"#f3d36b\" stroke=\"black\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << px(p.x) + (size * u) / 2 << "\" y=\"" << py(p.h) + (2 * u) / 3
           << "\" font-size=\"" << u / 2 << "\" text-anchor=\"middle\">" << id << "</text>\n";
    }
    int hy = u / 2;
    for (const auto& [g, held] : state.held) {
        std::ostringstream line;
        line << "held " << g << ':';
        for (const auto& m : held.members)
            line << ' ' << m.block << (m.block == held.root ? "*" : "");
        os << "<text x=\"4\" y=\"" << hy << "\" font-size=\"" << u / 2 << "\">" << line.str()
           << "</text>\n";
        hy += u / 2 + 4;
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace

std::string render_state(const ProblemInstance& inst, const WorldState& state,
                         const RenderSpec& spec) {
    return spec.format == RenderSpec::Format::Ascii ? ascii_render(inst, state, spec)
                                                    : svg_render(inst, state, spec);
}

std::string render_plan(const ProblemInstance& inst, const Plan& plan, const RenderSpec& spec) {
    std::ostringstream os;
    WorldState state = initial_state(inst);
    StabilityCache cache;
    if (spec.per_step) os << "t=0\n" << render_state(inst, state, spec);
    int t = 0;
    for (const JointAction& ja : plan.steps) {
        ApplyResult r = apply(inst, state, ja, &cache);
        if (!r.ok())
            throw ValidationError("plan step " + std::to_string(t) +
                                  " does not apply: " + r.rejected);
        state = std::move(*r.state);
        ++t;
        if (spec.per_step) os << "t=" << t << '\n' << render_state(inst, state, spec);
    }
    if (!spec.per_step) os << render_state(inst, state, spec);
    return os.str();
}

} // namespace blockplan
