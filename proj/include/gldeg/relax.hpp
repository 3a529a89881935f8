#pragma once

#include <utility>
#include <vector>

#include "gldeg/energy.hpp"
#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"

namespace gldeg {

struct FlowOptions {
    int max_steps = 600;
    double tol = 1e-3;        // interior residual target
    int checkpoint_every = 20;
    // when set, a loop-degree change detected at a checkpoint rolls the state
    // back to the previous checkpoint and ends the run (constrained-descent
    // semantics: the flow tracks one degree class)
    bool stop_on_degree_jump = false;
};

struct FlowCheckpoint {
    int step = 0;
    double energy = 0.0;
    double l2_increment = 0.0;  // L2 distance to the previous checkpoint state
    // smallest pre-projection boundary vertex modulus seen since the previous
    // checkpoint (the renormalization defect)
    double min_trial_boundary_modulus = 1.0;
    // smallest boundary edge-midpoint modulus of the accepted states since
    // the previous checkpoint; a loop-degree jump must be preceded by a dip
    // here (the winding crosses between two renormalized vertices)
    double min_edge_modulus = 1.0;
    DegreeSpec spec;            // p/q from loop windings, d = rounded abdeg
};

struct FlowState {
    ComplexField u;
    double eps = 0.0;
    int steps = 0;
    bool converged = false;
    bool stagnated = false;
    bool degree_jumped = false;          // a loop degree changed at a checkpoint
    bool crossing_detected = false;      // a boundary crossing ended the run (rolled back)
    std::vector<double> energy_history;  // [0] = initial, one entry per accepted step
    std::vector<FlowCheckpoint> checkpoints;
    ResidualReport residual;             // at termination
};

// Energy descent with an H1-preconditioned direction and Armijo backtracking.
// Interior vertices move freely; boundary vertices are renormalized to the
// unit circle after every accepted step, so the phase-flux condition emerges
// at stationarity instead of being imposed. A stalled line search sets
// `stagnated` rather than throwing.
FlowState gradient_flow(const ComplexField& u0, double eps, FlowOptions opts = {});

// Membership in the degree class: hole loop windings equal p, outer winding
// equals q, and every approximate bulk degree within 1/3 of its target.
std::pair<bool, DegreeSpec> class_membership(const ComplexField& u, const std::vector<int>& p,
                                             int q, const std::vector<int>& d);

struct LocalMinReport {
    FlowState flow;
    double I0_value = 0.0;
    int ae = 0;                  // class distance between (d, sum d) and (p, q)
    double target_energy = 0.0;  // I0 + pi * ae
    double converged_energy = 0.0;
    double ratio = 0.0;          // converged / target
    double starter_energy = 0.0;
    bool member = false;
    DegreeSpec spec;
    bool class_escape = false;   // some checkpoint left the 1/3 abdeg band
    std::vector<Vortex> vortices;
};

// Builds a starter in the class (winding base around each hole, degree
// mutation to reach the boundary degrees), flows it, and reports the
// converged energy against the I0 + pi * ae level.
LocalMinReport local_min_experiment(const std::vector<int>& p, int q, const std::vector<int>& d,
                                    double eps, const Mesh& mesh, FlowOptions opts = {});

} // namespace gldeg
