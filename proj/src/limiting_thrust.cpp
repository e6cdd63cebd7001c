#include "kep/limiting_thrust.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <memory>

namespace kep {

namespace {

struct Evaluation {
    double tau = 0.0;
    double s = 0.0;
    std::shared_ptr<OcpSolution> solution; // null when no perigee match exists
    const char* no_match_reason = nullptr; // set when solution is null
};

/// Serialized record of inner solves, providing warm starts and the
/// monotonicity audit. All mutation happens on the caller's thread;
/// parallel speculative solves run as pure calls and are inserted
/// afterwards in a fixed order.
class ShootingCache {
  public:
    ShootingCache(const OcpScenario& sc, BisectionReport& report)
        : sc_(sc), report_(report) {}

    Evaluation solve_pure(double tau, const SolverOptions& solver,
                          const OcpSolution* warm) const {
        Evaluation ev;
        ev.tau = tau;
        try {
            ev.solution =
                std::make_shared<OcpSolution>(solve_ocp(sc_, tau, solver, warm));
            ev.s = ev.solution->terminal_rp - sc_.constants.r_c;
        } catch (const Error& err) {
            // Both failure modes only occur well above the sign change: the
            // burn either escapes outright or cannot be sustained for the
            // whole arc. Either way the thrust bound is ample, so the search
            // counts the point as feasible and keeps the bracket honest.
            if (err.code() == ErrorCode::EventNeverFires)
                ev.no_match_reason = "escape";
            else if (err.code() == ErrorCode::NoConvergence)
                ev.no_match_reason = "mass exhausted";
            else
                throw Error(ErrorCode::InnerSolverFailure,
                            std::string("inner solve failed at tau = ") +
                                std::to_string(tau) + " N: " + err.what());
            ev.s = 1e12;
        }
        return ev;
    }

    void insert(const Evaluation& ev) {
        if (!ev.solution)
            report_.warnings.push_back("no perigee match at tau = " +
                                       std::to_string(ev.tau) + " N (" +
                                       ev.no_match_reason + "); counted as feasible");
        else if (!ev.solution->converged)
            report_.warnings.push_back("inner solve at tau = " + std::to_string(ev.tau) +
                                       " N hit its iteration budget");
        history_.push_back(ev);
    }

    Evaluation evaluate(double tau, const SolverOptions& solver) {
        if (const auto it = pending_.find(tau); it != pending_.end()) {
            Evaluation ev = it->second; // already counted when solved
            pending_.erase(it);
            insert(ev);
            return ev;
        }
        Evaluation ev = solve_pure(tau, solver, nearest_solution(tau));
        ++report_.evaluations;
        insert(ev);
        return ev;
    }

    /// Evaluates several thrusts concurrently (speculative mode). Results
    /// are inserted in the order given, so reports stay reproducible. The
    /// first thrust's evaluation is returned; the rest become pending.
    Evaluation evaluate_batch(const std::vector<double>& taus,
                              const SolverOptions& solver) {
        const OcpSolution* warm = nearest_solution(taus.front());
        std::vector<std::future<Evaluation>> futures;
        futures.reserve(taus.size());
        for (const double tau : taus)
            futures.push_back(std::async(std::launch::async, [this, tau, &solver, warm] {
                return solve_pure(tau, solver, warm);
            }));
        std::vector<Evaluation> evs;
        evs.reserve(taus.size());
        for (auto& f : futures) evs.push_back(f.get());
        report_.evaluations += static_cast<int>(evs.size());
        insert(evs.front());
        for (size_t i = 1; i < evs.size(); ++i) pending_[evs[i].tau] = evs[i];
        return evs.front();
    }

    const OcpSolution* nearest_solution(double tau) const {
        const OcpSolution* best = nullptr;
        double best_gap = 0.0;
        for (const auto& ev : history_) {
            if (!ev.solution) continue;
            const double gap = std::abs(std::log(std::max(ev.tau, 1e-30)) -
                                        std::log(std::max(tau, 1e-30)));
            if (!best || gap < best_gap) {
                best = ev.solution.get();
                best_gap = gap;
            }
        }
        return best;
    }

    /// Flags shooting values that break the expected monotone-increasing
    /// trend by more than solver scatter.
    void check_monotonicity() {
        std::vector<Evaluation> sorted = history_;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Evaluation& a, const Evaluation& b) { return a.tau < b.tau; });
        for (size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].s < sorted[i - 1].s - 1e-6) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "shooting value decreased from %.6g m at %.6g N to "
                              "%.6g m at %.6g N",
                              sorted[i - 1].s, sorted[i - 1].tau, sorted[i].s,
                              sorted[i].tau);
                report_.warnings.push_back(buf);
            }
        }
    }

  private:
    const OcpScenario& sc_;
    BisectionReport& report_;
    std::vector<Evaluation> history_;
    std::map<double, Evaluation> pending_;
};

} // namespace

BisectionReport find_tau_max(const OcpScenario& sc, double tau_lo, double tau_hi,
                             const BisectionOptions& opts) {
    if (!(tau_lo >= 0.0) || !(tau_hi > tau_lo))
        throw Error(ErrorCode::InvalidParameter,
                    "bracket must satisfy 0 <= tau_lo < tau_hi");

    BisectionReport report;
    ShootingCache cache(sc, report);

    SolverOptions coarse = opts.solver;
    coarse.refine = false; // the refined-knot stage engages once the bracket tightens

    Evaluation lo = cache.evaluate(tau_lo, coarse);
    Evaluation hi = cache.evaluate(tau_hi, coarse);

    // Expand geometrically until the bracket straddles the sign change.
    int expansions = 0;
    while (lo.s > 0.0 && expansions < opts.max_expansions) {
        ++expansions;
        hi = lo;
        lo = cache.evaluate(lo.tau / 2.0, coarse);
    }
    while (hi.s < 0.0 && expansions < opts.max_expansions) {
        ++expansions;
        lo = hi;
        hi = cache.evaluate(hi.tau * 2.0, coarse);
    }
    if (!(lo.s <= 0.0 && hi.s >= 0.0))
        throw Error(ErrorCode::BracketFailure,
                    "no sign change in s(tau) after " + std::to_string(expansions) +
                        " expansions; s(" + std::to_string(lo.tau) +
                        ") = " + std::to_string(lo.s) + " m, s(" +
                        std::to_string(hi.tau) + ") = " + std::to_string(hi.s) + " m");
    report.history.push_back({lo.tau, hi.tau, lo.s, hi.s});

    Evaluation mid;
    bool have_mid = false;
    bool width_tol_recorded = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const double width = hi.tau - lo.tau;
        if (width <= opts.tol && !width_tol_recorded) {
            report.tau_at_width_tol = 0.5 * (lo.tau + hi.tau);
            width_tol_recorded = true;
        }
        // The last midpoint is always an endpoint of the current bracket,
        // so it can serve as the returned point under the |s| stop.
        const bool s_done =
            opts.s_tol > 0.0 && have_mid && std::abs(mid.s) <= opts.s_tol;
        if (width <= opts.tol && (opts.s_tol <= 0.0 || s_done)) break;

        const SolverOptions& stage =
            width <= opts.refine_below_width ? opts.solver : coarse;
        const double tau_mid = 0.5 * (lo.tau + hi.tau);
        if (opts.speculative) {
            // The quarter points are exactly the next candidate midpoints,
            // so speculative solves are consumed by the following iteration.
            mid = cache.evaluate_batch({tau_mid, 0.5 * (lo.tau + tau_mid),
                                        0.5 * (tau_mid + hi.tau)},
                                       stage);
        } else {
            mid = cache.evaluate(tau_mid, stage);
        }
        have_mid = true;
        if (mid.s <= 0.0)
            lo = mid;
        else
            hi = mid;
        report.history.push_back({lo.tau, hi.tau, lo.s, hi.s});
    }

    cache.check_monotonicity();

    report.tolerance_achieved = hi.tau - lo.tau;
    if (!width_tol_recorded) report.tau_at_width_tol = 0.5 * (lo.tau + hi.tau);
    if (opts.s_tol > 0.0 && have_mid && std::abs(mid.s) <= opts.s_tol) {
        // Return the evaluated point meeting the shooting tolerance.
        report.stopped_on_s_tol = true;
        report.tau_max = mid.tau;
        report.s_at_tau_max = mid.s;
    } else {
        const double tau_mid = 0.5 * (lo.tau + hi.tau);
        const Evaluation final_eval = cache.evaluate(tau_mid, opts.solver);
        report.tau_max = tau_mid;
        report.s_at_tau_max = final_eval.s;
    }
    return report;
}

} // namespace kep
