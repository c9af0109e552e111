#pragma once

#include <string>

#include "blockplan/model.hpp"

// JSON external interface. Instance and plan documents carry a `format`
// version field; unknown keys are rejected so typos fail loudly.

namespace blockplan {

constexpr int kFormatVersion = 1;

// Parses and fully validates an instance document, including static
// stability of the initial state. Throws SyntaxError on malformed JSON,
// ValidationError on semantic problems. `verify_stability = false` skips
// only the physics check so tools can inspect unstable setups.
ProblemInstance parse_instance(const std::string& text, bool verify_stability = true);
ProblemInstance load_instance(const std::string& path, bool verify_stability = true);

std::string serialize_instance(const ProblemInstance& inst);

// Plan documents. Throws FormatError on anything malformed; semantic
// checking is the validator's job.
Plan parse_plan(const std::string& text, const ProblemInstance& inst);
Plan load_plan(const std::string& path, const ProblemInstance& inst);

std::string serialize_plan(const Plan& plan);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace blockplan
