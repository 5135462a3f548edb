#pragma once

#include "limitcurve/core.hpp"
#include "limitcurve/solver.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace limitcurve {

/// Adaptive schedule for the work-controlled continuation. NaN entries are
/// resolved from the model: the load-factor path probes one elastic-scale
/// solve (or falls back to 1e-2 * ||b||), the strength path starts one step
/// above the computed smallest admissible work level.
struct ScheduleOptions {
    double omega_start = std::numeric_limits<double>::quiet_NaN();
    double omega_step0 = std::numeric_limits<double>::quiet_NaN();
    double growth_factor = 2.0;
    // grow the step when the factor increment over the last step falls below
    // stall_threshold * |factor|; the relative form keeps the rule independent
    // of the physical scale of the work parameter
    double stall_threshold = 1e-3;
    // also grow once the covered omega span exceeds span_ratio * step, so a
    // long pre-limit ramp is traversed in O(log) rather than O(1/step) steps
    double span_ratio = 8.0;
    int max_steps = 200;
    int fos_window = 5;
    double fos_rel_tol = 1e-4;
    double factor_ceiling = 1e6;  // stop-and-flag level for factors that keep growing
    bool record_brackets = true;  // per-step lower bounds on the load-factor path
    int max_step_retries = 3;     // halvings of a failed increment before aborting
    NewtonOptions newton;
};

enum class TraceMethod { ll_direct, ll_indirect, ssr_indirect };

const char* to_string(TraceMethod method);

struct TraceRecord {
    double omega = 0.0;
    double factor = 0.0;  // t or lambda
    double work = 0.0;    // b'u at the solution
    double u_norm = 0.0;
    int newton_iters = 0;
    double residual = 0.0;
    bool ok = true;  // per-record solve status; not serialized
};

struct ContinuationTrace {
    std::vector<TraceRecord> records;
    TraceMethod method = TraceMethod::ll_indirect;
    double fos_estimate = 0.0;
    std::optional<std::pair<double, double>> fos_bracket;  // (lower, upper) at the last step
    bool converged = false;

    std::vector<double> lower_bounds;  // aligned with records; load-factor paths only
    double current_step = 0.0;         // schedule state consumed by next_omega
    bool ceiling_hit = false;
    std::string abort_reason;  // nonempty when a solve failure cut the trace short

    Vector final_u;  // solution at the last record, for field output
};

/// Work-controlled continuation for the load factor: solves the extended
/// system at an increasing omega schedule until the factor stagnates.
ContinuationTrace trace_ll_indirect(const PotentialModel& model, const LoadVector& b,
                                    const ScheduleOptions& sched = {});

/// Direct load stepping for comparison: one Newton solve per prescribed t,
/// warm started. Individual failures are recorded, not fatal.
ContinuationTrace trace_ll_direct(const PotentialModel& model, const LoadVector& b,
                                  std::span<const double> t_values,
                                  const NewtonOptions& opts = {});

/// Work-controlled continuation for the strength-reduction factor.
ContinuationTrace trace_ssr_indirect(const ParamFamily& family, const LoadVector& b,
                                     const ScheduleOptions& sched = {});

/// Next control value: last omega plus the current step, the step having been
/// grown by growth_factor when the factor increment over the last step fell
/// below stall_threshold * |factor|.
double next_omega(const ContinuationTrace& trace, const ScheduleOptions& sched);

/// (next omega, updated step) as used by the trace drivers.
std::pair<double, double> schedule_advance(const ContinuationTrace& trace,
                                           const ScheduleOptions& sched);

/// Estimate = last factor; converged iff the relative spread of the factor
/// over the trailing `window` records is below rel_tol.
std::pair<double, bool> estimate_fos(const ContinuationTrace& trace, int window, double rel_tol);

/// CSV with header omega,factor,work,u_norm,newton_iters,residual and
/// 17-significant-digit numbers.
void write_trace_csv(const ContinuationTrace& trace, std::ostream& os);
std::string trace_csv(const ContinuationTrace& trace);

/// Checks the monotonicity and bracket invariants every trace must satisfy;
/// returns an empty string when all hold, else a description of the first
/// violation.
std::string verify_trace_invariants(const ContinuationTrace& trace, double fos_rel_tol = 1e-4);

}  // namespace limitcurve
