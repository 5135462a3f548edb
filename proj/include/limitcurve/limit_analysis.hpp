#pragma once

#include "limitcurve/continuation.hpp"
#include "limitcurve/core.hpp"
#include "limitcurve/solver.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace limitcurve {

/// Two-sided enclosure of the limit factor at a given work level:
/// lower = I(u_omega)/omega, upper = t_omega, and lower <= upper <= t*.
/// Both sides are nondecreasing in omega.
struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
    double omega = 0.0;
};

Bracket bracket_t_star(const PotentialModel& model, const LoadVector& b, double omega,
                       const NewtonOptions& opts = {});

struct RecessionResult {
    double value = 0.0;
    bool infinite = false;   // value exceeded the cap while still growing
    bool converged = false;  // increments fell below the stagnation threshold
};

/// Limit of value(omega*v)/omega along a geometric omega grid. The sequence
/// is nondecreasing; it either stagnates (finite recession value), exceeds
/// `cap` (flagged infinite), or runs out of grid (inconclusive).
RecessionResult recession_value(const PotentialModel& model, const Vector& v,
                                double omega_max = 1e12, double cap = 1e8);

enum class Solvability { bounded_nonempty, boundary_case, unsolvable, inconclusive };

const char* to_string(Solvability verdict);

struct SolvabilityVerdict {
    Solvability verdict = Solvability::inconclusive;
    double t_inf_estimate = 0.0;
    bool estimate_is_lower_bound = false;  // trace was still growing when stopped
    double band = 1e-3;
    std::optional<std::pair<double, double>> bracket;
};

/// Classifies solvability of F(u) = b through the estimated limit factor:
/// above 1 + band the minimizer set is bounded and nonempty, below 1 - band
/// it is empty, inside the band is the boundary case. A trace stopped while
/// still growing below 1 + band yields an inconclusive verdict with the
/// final bracket attached.
SolvabilityVerdict classify_solvability(const PotentialModel& model, const LoadVector& b,
                                        double band = 1e-3, const ScheduleOptions& sched = {});

/// Limit factor of the lambda-reduced model: (estimate, converged flag).
std::pair<double, bool> ell_value(const ParamFamily& family, const LoadVector& b, double lambda,
                                  const ScheduleOptions& sched = {});

/// Root of ell(lambda) = 1 inside a valid bracket: requires
/// ell(lo) > 1 > ell(hi). Bisection with secant-assisted probes while both
/// endpoint evaluations converged; returns the midpoint of the final bracket
/// once it is narrower than root_tol.
double find_lambda_star_via_ell(const ParamFamily& family, const LoadVector& b,
                                std::pair<double, double> bracket, double root_tol = 1e-4,
                                const ScheduleOptions& sched = {});

struct EllSample {
    double lambda = 0.0;
    double ell = 0.0;
    bool converged = false;
};

struct EllCurve {
    std::vector<EllSample> samples;
    std::optional<double> lambda_star;
    double lambda0 = 0.0;
};

struct EllCurveOptions {
    ScheduleOptions sched;
    int threads = 0;  // <= 0: hardware parallelism
};

/// Per-lambda samples of the limit-factor curve; evaluations are independent
/// (no warm start across lambda) and may run concurrently. lambda_star is
/// filled by inverse linear interpolation when adjacent converged samples
/// bracket the value 1.
EllCurve ell_curve(const ParamFamily& family, const LoadVector& b,
                   std::span<const double> lambda_grid, const EllCurveOptions& opts = {});

/// CSV with header lambda,ell,converged and a trailing comment line
/// `# lambda_star=<value>` when the curve located the root.
void write_ell_csv(const EllCurve& curve, std::ostream& os);
std::string ell_csv(const EllCurve& curve);

/// Checks that the converged samples decrease strictly in lambda (within
/// 10 * tol) and that the interpolated curve passes through 1 at
/// lambda_star. Returns an empty string when the invariants hold.
std::string verify_ell_curve(const EllCurve& curve, double tol = 1e-4);

}  // namespace limitcurve
