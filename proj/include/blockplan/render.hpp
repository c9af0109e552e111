#pragma once

#include <string>

#include "blockplan/model.hpp"

// Figure-style renderings of world states: a character grid or a simple
// SVG. Output bytes are a pure function of the inputs.

namespace blockplan {

struct RenderSpec {
    enum class Format { Ascii, Svg };
    Format format = Format::Ascii;
    bool per_step = false;  // render_plan: every intermediate state vs final only
    int scale = 1;          // column width multiplier
};

std::string render_state(const ProblemInstance& inst, const WorldState& state,
                         const RenderSpec& spec);

// Replays the plan from the initial state. Throws ValidationError if some
// step does not apply.
std::string render_plan(const ProblemInstance& inst, const Plan& plan, const RenderSpec& spec);

}  // namespace blockplan
