#pragma once

#include <string>
#include <vector>

#include "kep/ocp.hpp"

namespace kep {

struct BracketRecord {
    double lo = 0.0;   ///< [N]
    double hi = 0.0;   ///< [N]
    double s_lo = 0.0; ///< shooting value at lo [m]
    double s_hi = 0.0; ///< shooting value at hi [m]
};

struct BisectionOptions {
    double tol = 0.005;       ///< bracket-width stop [N]
    double s_tol = -1.0;      ///< optional |s| stop [m]; < 0 disables
    int max_expansions = 10;  ///< geometric bracket growth attempts per side
    int max_iterations = 200;
    bool speculative = false; ///< also evaluate quarter points of each bracket
    double refine_below_width = 0.1; ///< enable the 64-knot stage under this width [N]
    SolverOptions solver;
};

/// Full account of a limiting-thrust search.
struct BisectionReport {
    double tau_max = 0.0;           ///< returned limit [N]
    double s_at_tau_max = 0.0;      ///< shooting value there [m]
    double tau_at_width_tol = 0.0;  ///< midpoint when the width first met tol [N]
    double tolerance_achieved = 0.0;///< final bracket width [N]
    bool stopped_on_s_tol = false;
    int evaluations = 0;            ///< inner solves performed
    std::vector<BracketRecord> history; ///< bracket after each update
    std::vector<std::string> warnings;

    const BracketRecord& final_bracket() const { return history.back(); }
};

/// Finds the thrust bound separating infeasible (terminal perigee below
/// the atmosphere) from feasible missions by bisecting the shooting
/// function s(tau). The initial bracket [tau_lo, tau_hi] is expanded
/// geometrically when it does not straddle the sign change. Inner solves
/// are warm-started from the nearest previously solved thrust. Apparent
/// non-monotonicity of s across evaluations is recorded as a warning, not
/// an error.
/// Throws BracketFailure when no sign change can be established,
/// InnerSolverFailure when an inner solve fails irrecoverably.
BisectionReport find_tau_max(const OcpScenario& sc, double tau_lo, double tau_hi,
                             const BisectionOptions& opts = {});

} // namespace kep
