#include "limitcurve/continuation.hpp"

#include "limitcurve/format.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace limitcurve {

namespace {

bool is_set(double x) { return std::isfinite(x); }

double auto_omega_start_ll(const PotentialModel& model, const LoadVector& b,
                           const NewtonOptions& opts) {
    // one solve at a small fraction of the load capacity (of the load itself
    // when no growth constant is known) sets the work scale
    const auto hint = model.growth_hint();
    const double t_probe = hint ? 0.01 * hint->c1 / b.norm() : 0.01;
    auto probe = newton_solve(model, b, t_probe, Vector::Zero(model.dim()), opts);
    if (probe.converged) {
        const double omega = b.dot(probe.u);
        if (omega > 0.0) {
            return omega;
        }
    }
    return 1e-2 * b.norm();
}

struct ResolvedSchedule {
    double omega_start;
    double step0;
};

ResolvedSchedule resolve_ll(const PotentialModel& model, const LoadVector& b,
                            const ScheduleOptions& sched) {
    ResolvedSchedule r{};
    r.omega_start = is_set(sched.omega_start) ? sched.omega_start
                                              : auto_omega_start_ll(model, b, sched.newton);
    r.step0 = is_set(sched.omega_step0) ? sched.omega_step0 : 5.0 * r.omega_start;
    if (!(r.omega_start > 0.0) || !(r.step0 > 0.0)) {
        throw std::invalid_argument("continuation: omega_start and omega_step0 must be positive");
    }
    return r;
}

void finalize_estimate(ContinuationTrace& trace, const ScheduleOptions& sched) {
    auto [estimate, conv] = estimate_fos(trace, sched.fos_window, sched.fos_rel_tol);
    trace.fos_estimate = estimate;
    if (!trace.records.empty() && !trace.lower_bounds.empty()) {
        trace.fos_bracket = std::make_pair(trace.lower_bounds.back(), trace.records.back().factor);
    }
    if (trace.abort_reason.empty()) {
        trace.converged = conv;
    }
}

}  // namespace

const char* to_string(TraceMethod method) {
    switch (method) {
        case TraceMethod::ll_direct: return "ll_direct";
        case TraceMethod::ll_indirect: return "ll_indirect";
        case TraceMethod::ssr_indirect: return "ssr_indirect";
    }
    return "unknown";
}

ContinuationTrace trace_ll_indirect(const PotentialModel& model, const LoadVector& b,
                                    const ScheduleOptions& sched) {
    ContinuationTrace trace;
    trace.method = TraceMethod::ll_indirect;

    const auto resolved = resolve_ll(model, b, sched);
    double omega = resolved.omega_start;
    trace.current_step = resolved.step0;

    Vector u = Vector::Zero(model.dim());
    double t = 0.0;
    double omega_prev = 0.0;
    int retries = 0;

    while (static_cast<int>(trace.records.size()) < sched.max_steps) {
        Vector u0 = omega_prev > 0.0 ? Vector((omega / omega_prev) * u) : u;
        auto outcome = saddle_solve_ll(model, b, omega, std::move(u0), t, sched.newton);
        if (!outcome.converged) {
            if (retries < sched.max_step_retries) {
                ++retries;
                omega = omega_prev + 0.5 * (omega - omega_prev);
                trace.current_step = omega - omega_prev;
                continue;
            }
            trace.abort_reason = std::string("saddle solve failed at omega=") +
                                 format_double(omega) + " (" +
                                 to_string(outcome.failure_reason) + ")";
            break;
        }
        retries = 0;
        u = outcome.u;
        t = outcome.extra;
        omega_prev = omega;

        trace.records.push_back(TraceRecord{omega, t, b.dot(u), u.norm(),
                                            outcome.iterations, outcome.residual, true});
        if (sched.record_brackets) {
            trace.lower_bounds.push_back(model.value(u) / omega);
        }
        trace.final_u = u;

        auto [estimate, conv] = estimate_fos(trace, sched.fos_window, sched.fos_rel_tol);
        (void)estimate;
        if (conv) {
            break;
        }
        if (t > sched.factor_ceiling) {
            trace.ceiling_hit = true;
            break;
        }
        auto [next, step] = schedule_advance(trace, sched);
        omega = next;
        trace.current_step = step;
    }

    finalize_estimate(trace, sched);
    return trace;
}

ContinuationTrace trace_ll_direct(const PotentialModel& model, const LoadVector& b,
                                  std::span<const double> t_values, const NewtonOptions& opts) {
    for (std::size_t k = 0; k < t_values.size(); ++k) {
        if (t_values[k] < 0.0 || (k > 0 && !(t_values[k - 1] < t_values[k]))) {
            throw std::invalid_argument("trace_ll_direct: t values must be nonnegative and increasing");
        }
    }

    ContinuationTrace trace;
    trace.method = TraceMethod::ll_direct;
    trace.converged = true;

    Vector u = Vector::Zero(model.dim());
    double best_t = 0.0;
    for (double t : t_values) {
        auto outcome = newton_solve(model, b, t, u, opts);
        const double work = b.dot(outcome.u);
        trace.records.push_back(TraceRecord{work, t, work, outcome.u.norm(),
                                            outcome.iterations, outcome.residual,
                                            outcome.converged});
        if (outcome.converged) {
            u = outcome.u;
            best_t = std::max(best_t, t);
            trace.final_u = u;
        } else {
            trace.converged = false;
        }
    }
    trace.fos_estimate = best_t;
    return trace;
}

ContinuationTrace trace_ssr_indirect(const ParamFamily& family, const LoadVector& b,
                                     const ScheduleOptions& sched) {
    ContinuationTrace trace;
    trace.method = TraceMethod::ssr_indirect;

    const double lambda0 = family.lambda0();
    auto base = newton_solve(*family.model_at(lambda0), b, 1.0,
                             Vector::Zero(family.dim()), sched.newton);
    if (!base.converged) {
        trace.abort_reason = std::string("base solve at lambda0 failed (") +
                             to_string(base.failure_reason) + ")";
        return trace;
    }
    const double omega0 = b.dot(base.u);

    const double step0 = is_set(sched.omega_step0)
                             ? sched.omega_step0
                             : std::max(0.5 * std::abs(omega0), 1e-2 * (1.0 + std::abs(omega0)));
    double omega = is_set(sched.omega_start) ? std::max(sched.omega_start, omega0 + step0)
                                             : omega0 + step0;
    trace.current_step = step0;

    Vector u = base.u;
    double lambda = lambda0;
    double omega_prev = omega0;
    int retries = 0;

    while (static_cast<int>(trace.records.size()) < sched.max_steps) {
        Vector u0 = omega_prev != 0.0 ? Vector((omega / omega_prev) * u) : u;
        auto outcome = saddle_solve_ssr(family, b, omega, std::move(u0), lambda, sched.newton);
        if (!outcome.converged) {
            if (retries < sched.max_step_retries && omega - omega_prev > 0.0) {
                ++retries;
                omega = omega_prev + 0.5 * (omega - omega_prev);
                trace.current_step = omega - omega_prev;
                continue;
            }
            trace.abort_reason = std::string("saddle solve failed at omega=") +
                                 format_double(omega) + " (" +
                                 to_string(outcome.failure_reason) + ")";
            break;
        }
        retries = 0;
        u = outcome.u;
        lambda = outcome.extra;
        omega_prev = omega;

        trace.records.push_back(TraceRecord{omega, lambda, b.dot(u), u.norm(),
                                            outcome.iterations, outcome.residual, true});
        trace.final_u = u;

        auto [estimate, conv] = estimate_fos(trace, sched.fos_window, sched.fos_rel_tol);
        (void)estimate;
        if (conv) {
            break;
        }
        if (lambda > sched.factor_ceiling) {
            trace.ceiling_hit = true;
            break;
        }
        auto [next, step] = schedule_advance(trace, sched);
        omega = next;
        trace.current_step = step;
    }

    finalize_estimate(trace, sched);
    return trace;
}

std::pair<double, double> schedule_advance(const ContinuationTrace& trace,
                                           const ScheduleOptions& sched) {
    if (trace.records.empty()) {
        throw std::invalid_argument("schedule_advance: empty trace");
    }
    double step = trace.current_step;
    const std::size_t n = trace.records.size();
    if (n >= 2) {
        const auto& a = trace.records[n - 2];
        const auto& c = trace.records[n - 1];
        const bool stalled = c.factor - a.factor < sched.stall_threshold * std::abs(c.factor);
        const double span = c.omega - trace.records.front().omega;
        if (stalled || step * sched.span_ratio < span) {
            step *= sched.growth_factor;
        }
    }
    return {trace.records.back().omega + step, step};
}

double next_omega(const ContinuationTrace& trace, const ScheduleOptions& sched) {
    return schedule_advance(trace, sched).first;
}

std::pair<double, bool> estimate_fos(const ContinuationTrace& trace, int window, double rel_tol) {
    if (trace.records.empty()) {
        return {0.0, false};
    }
    const double last = trace.records.back().factor;
    if (window <= 0 || static_cast<int>(trace.records.size()) < window) {
        return {last, false};
    }
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t k = trace.records.size() - window; k < trace.records.size(); ++k) {
        mx = std::max(mx, trace.records[k].factor);
        mn = std::min(mn, trace.records[k].factor);
    }
    const double rel = (mx - mn) / std::max(std::abs(mx), 1e-300);
    return {last, rel < rel_tol};
}

void write_trace_csv(const ContinuationTrace& trace, std::ostream& os) {
    os << "omega,factor,work,u_norm,newton_iters,residual\n";
    for (const auto& r : trace.records) {
        os << format_double(r.omega) << ',' << format_double(r.factor) << ','
           << format_double(r.work) << ',' << format_double(r.u_norm) << ','
           << r.newton_iters << ',' << format_double(r.residual) << '\n';
    }
}

std::string trace_csv(const ContinuationTrace& trace) {
    std::ostringstream os;
    write_trace_csv(trace, os);
    return os.str();
}

std::string verify_trace_invariants(const ContinuationTrace& trace, double fos_rel_tol) {
    const auto& rec = trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
        if (trace.method != TraceMethod::ll_direct && !(rec[k].omega < rec[k + 1].omega)) {
            return "omega not strictly increasing at step " + std::to_string(k + 1);
        }
        const double slack = 10.0 * fos_rel_tol * std::max(1.0, std::abs(rec[k].factor));
        if (rec[k + 1].factor < rec[k].factor - slack) {
            return "factor decreased at step " + std::to_string(k + 1);
        }
        if (trace.method != TraceMethod::ll_direct && !(rec[k].work < rec[k + 1].work)) {
            return "work not strictly increasing at step " + std::to_string(k + 1);
        }
    }
    if (trace.method != TraceMethod::ll_direct) {
        for (std::size_t k = 0; k < rec.size(); ++k) {
            if (std::abs(rec[k].work - rec[k].omega) > 1e-6 * (1.0 + std::abs(rec[k].omega))) {
                return "work does not match the prescribed omega at step " + std::to_string(k);
            }
        }
    }
    if (!trace.lower_bounds.empty()) {
        if (trace.lower_bounds.size() != rec.size()) {
            return "bracket column size mismatch";
        }
        for (std::size_t k = 0; k < rec.size(); ++k) {
            if (trace.lower_bounds[k] > rec[k].factor + 1e-10) {
                return "lower bound exceeds upper bound at step " + std::to_string(k);
            }
            if (k > 0 && trace.lower_bounds[k] < trace.lower_bounds[k - 1] -
                             1e-10 * (1.0 + std::abs(trace.lower_bounds[k - 1]))) {
                return "lower bound decreased at step " + std::to_string(k);
            }
        }
    }
    return {};
}

}  // namespace limitcurve
