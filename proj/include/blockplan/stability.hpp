#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockplan/model.hpp"

// Static stability of block structures, reduced to a 2D rigid-body
// equilibrium feasibility problem. Each body must balance gravity, an
// optional horizontal disturbance (epsilon times its weight, applied at the
// centroid, same sign for all bodies per scenario), and contact forces.
// Contacts act at the two endpoints of each maximal contact interval with a
// nonnegative normal and Coulomb friction |f| <= mu * n. A structure is
// stable iff the force system is feasible for the no-disturbance, +x and -x
// scenarios.

namespace blockplan {

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what_)
        : std::runtime_error("numerical error: " + what_) {}
};

struct ContactProblem {
    struct Body {
        Sym id;
        double weight = 0.0;
        double cx = 0.0;    // centroid column coordinate
        double cy = 0.0;    // centroid height
        bool fixed = false; // surfaces, held roots: absorb any reaction
    };
    struct Contact {
        Sym lower;
        Sym upper;
        double xa = 0.0; // contact interval, xa < xb
        double xb = 0.0;
        double y = 0.0;  // height of the contact plane
    };
    std::vector<Body> bodies;
    std::vector<Contact> contacts;
    double mu = 0.5;
    double epsilon = 0.05;
    double slack = 1e-9;
};

struct StabilityVerdict {
    bool stable = false;
    Sym witness; // on instability: body with the largest unbalanced wrench
};

// One body per anchored block plus one fixed body per surface; one contact
// per maximal contiguous interval of vertical adjacency.
ContactProblem extract_contacts(const ProblemInstance& inst, const WorldState& state);

StabilityVerdict check_static_equilibrium(const ContactProblem& p);

// Stability of the assembly in `gripper` under a rigid grasp of its root:
// the root is fixed, there is no ground, every other member must be held in
// place by intra-assembly contacts. Single-member assemblies are stable.
StabilityVerdict check_held_stability(const ProblemInstance& inst, const WorldState& state,
                                      const Sym& gripper);

// Closed-form check for serial towers (every body has exactly one supporter
// and at most one supportee): stable iff at every contact the combined
// centroid of the bodies above lies within the contact interval narrowed by
// epsilon times their weighted height above the contact plane, and the
// disturbance does not exceed the friction cone. Returns nullopt when the
// problem is not a serial tower.
std::optional<StabilityVerdict> tower_oracle(const ContactProblem& p);

// Human-readable dump of the equilibrium constraints (all scenarios).
std::string dump_lp(const ContactProblem& p);

} // namespace blockplan
