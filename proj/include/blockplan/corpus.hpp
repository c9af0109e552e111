#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockplan/model.hpp"

// Benchmark corpus: a manifest of instances with expected outcomes and the
// runner behind `corpus run`. Artifacts (plan document, final-state
// renders) are returned as bytes so callers control where they land.

namespace blockplan {

struct OverhangExpect {
    Sym surface;
    GoalAtom::Edge edge = GoalAtom::Edge::Right;
    int units = 0;  // exact extent required in the final state
};

struct CorpusExpect {
    bool unsat = false;
    std::optional<int> makespan;  // exact minimal makespan
    std::vector<std::string> features;  // see kKnownFeatures
    bool all_plans_concurrent = false;  // every plan has a 2-placement step
    std::optional<OverhangExpect> overhang;
};

struct CorpusEntry {
    std::string name;
    std::string file;
    CorpusExpect expect;
};

// subassembly: some pick lifts >= 2 blocks
// concurrent_placements: some step has >= 2 placements
// multi_action_step: some step has >= 2 actions
// nonmonotone: some block is placed and later picked again
// ordering: the instance carries an ordering constraint
extern const std::vector<std::string> kKnownFeatures;

std::vector<CorpusEntry> load_manifest(const std::string& dir);

struct CorpusResult {
    std::string name;
    bool pass = false;
    std::string detail;
    int makespan = -1;  // of the found plan, if any
    long millis = 0;
    std::map<std::string, std::string> artifacts;  // relative filename -> bytes
};

CorpusResult run_corpus_entry(const std::string& dir, const CorpusEntry& entry);

// Runs every manifest entry; `jobs` > 1 fans instances out to that many
// threads. Results keep manifest order regardless of scheduling.
std::vector<CorpusResult> run_corpus(const std::string& dir, int jobs = 1);

// Default corpus directory: $BLOCKPLAN_CORPUS_DIR or ./corpus.
std::string default_corpus_dir();

}  // namespace blockplan
