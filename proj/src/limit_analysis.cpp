#include "limitcurve/limit_analysis.hpp"

#include "limitcurve/format.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace limitcurve {

Bracket bracket_t_star(const PotentialModel& model, const LoadVector& b, double omega,
                       const NewtonOptions& opts) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("bracket_t_star: omega must be positive");
    }
    auto outcome = saddle_solve_ll(model, b, omega, Vector::Zero(model.dim()), 0.0, opts);
    if (!outcome.converged) {
        throw std::runtime_error(std::string("bracket_t_star: saddle solve failed (") +
                                 to_string(outcome.failure_reason) + ")");
    }
    Bracket br;
    br.omega = omega;
    br.upper = outcome.extra;
    br.lower = scaled_value(model, omega, Vector(outcome.u / omega));
    return br;
}

RecessionResult recession_value(const PotentialModel& model, const Vector& v,
                                double omega_max, double cap) {
    if (!(omega_max >= 1.0)) {
        throw std::invalid_argument("recession_value: omega_max must be at least 1");
    }
    RecessionResult out;
    double prev = scaled_value(model, 1.0, v);
    out.value = prev;
    for (double omega = 2.0; omega <= omega_max; omega *= 2.0) {
        const double val = scaled_value(model, omega, v);
        out.value = val;
        if (val > cap) {
            out.infinite = true;
            out.converged = true;
            return out;
        }
        if (val - prev < 1e-8 * (1.0 + std::abs(val))) {
            out.converged = true;
            return out;
        }
        prev = val;
    }
    return out;
}

const char* to_string(Solvability verdict) {
    switch (verdict) {
        case Solvability::bounded_nonempty: return "BoundedNonempty";
        case Solvability::boundary_case: return "BoundaryCase";
        case Solvability::unsolvable: return "Unsolvable";
        case Solvability::inconclusive: return "Inconclusive";
    }
    return "unknown";
}

SolvabilityVerdict classify_solvability(const PotentialModel& model, const LoadVector& b,
                                        double band, const ScheduleOptions& sched) {
    SolvabilityVerdict out;
    out.band = band;

    auto trace = trace_ll_indirect(model, b, sched);
    out.t_inf_estimate = trace.fos_estimate;
    out.bracket = trace.fos_bracket;

    if (trace.converged) {
        if (trace.fos_estimate > 1.0 + band) {
            out.verdict = Solvability::bounded_nonempty;
        } else if (trace.fos_estimate < 1.0 - band) {
            out.verdict = Solvability::unsolvable;
        } else {
            out.verdict = Solvability::boundary_case;
        }
        return out;
    }

    out.estimate_is_lower_bound = true;
    if (trace.fos_estimate > 1.0 + band) {
        out.verdict = Solvability::bounded_nonempty;
    } else {
        out.verdict = Solvability::inconclusive;
    }
    return out;
}

std::pair<double, bool> ell_value(const ParamFamily& family, const LoadVector& b, double lambda,
                                  const ScheduleOptions& sched) {
    if (lambda < family.lambda0() - 1e-12) {
        throw std::invalid_argument("ell_value: lambda below lambda0");
    }
    auto trace = trace_ll_indirect(*family.model_at(lambda), b, sched);
    return {trace.fos_estimate, trace.converged};
}

double find_lambda_star_via_ell(const ParamFamily& family, const LoadVector& b,
                                std::pair<double, double> bracket, double root_tol,
                                const ScheduleOptions& sched) {
    double lo = bracket.first;
    double hi = bracket.second;
    if (!(lo < hi)) {
        throw std::invalid_argument("find_lambda_star_via_ell: bracket must satisfy lo < hi");
    }
    auto [ell_lo, conv_lo] = ell_value(family, b, lo, sched);
    auto [ell_hi, conv_hi] = ell_value(family, b, hi, sched);
    if (!(ell_lo > 1.0)) {
        throw std::invalid_argument("find_lambda_star_via_ell: ell at the lower end must exceed 1");
    }
    if (!conv_hi || !(ell_hi < 1.0)) {
        throw std::invalid_argument("find_lambda_star_via_ell: ell at the upper end must converge below 1");
    }

    bool bisect_next = false;
    while (hi - lo >= root_tol) {
        double probe = 0.5 * (lo + hi);
        if (!bisect_next && conv_lo && conv_hi) {
            // secant through the endpoint values, kept inside the middle 80%
            const double flo = ell_lo - 1.0;
            const double fhi = ell_hi - 1.0;
            const double secant = (lo * fhi - hi * flo) / (fhi - flo);
            const double margin = 0.1 * (hi - lo);
            if (std::isfinite(secant) && secant > lo + margin && secant < hi - margin) {
                probe = secant;
            }
        }
        bisect_next = !bisect_next;

        auto [val, conv] = ell_value(family, b, probe, sched);
        if (!conv && val <= 1.0) {
            throw std::runtime_error("find_lambda_star_via_ell: evaluation failed at lambda=" +
                                     format_double(probe) + "; bracket so far [" +
                                     format_double(lo) + ", " + format_double(hi) + "]");
        }
        if (val > 1.0) {
            lo = probe;
            ell_lo = val;
            conv_lo = conv;
        } else {
            hi = probe;
            ell_hi = val;
            conv_hi = conv;
        }
    }
    return 0.5 * (lo + hi);
}

EllCurve ell_curve(const ParamFamily& family, const LoadVector& b,
                   std::span<const double> lambda_grid, const EllCurveOptions& opts) {
    if (lambda_grid.size() < 2) {
        throw std::invalid_argument("ell_curve: need at least 2 grid points");
    }
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        if (lambda_grid[k] < family.lambda0() - 1e-12) {
            throw std::invalid_argument("ell_curve: grid point below lambda0");
        }
        if (k > 0 && !(lambda_grid[k - 1] < lambda_grid[k])) {
            throw std::invalid_argument("ell_curve: grid must be strictly increasing");
        }
    }

    EllCurve curve;
    curve.lambda0 = family.lambda0();
    curve.samples.resize(lambda_grid.size());

    const auto n = lambda_grid.size();
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    const unsigned workers =
        opts.threads > 0 ? static_cast<unsigned>(opts.threads) : hw;
    const unsigned pool = std::min<unsigned>(workers, static_cast<unsigned>(n));

    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            EllSample s;
            s.lambda = lambda_grid[i];
            try {
                auto [val, conv] = ell_value(family, b, lambda_grid[i], opts.sched);
                s.ell = val;
                s.converged = conv;
            } catch (const std::exception&) {
                s.ell = std::numeric_limits<double>::quiet_NaN();
                s.converged = false;
            }
            curve.samples[i] = s;
        }
    };

    if (pool <= 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (unsigned k = 0; k < pool; ++k) {
            threads.emplace_back(run);
        }
        for (auto& th : threads) {
            th.join();
        }
    }

    for (std::size_t k = 0; k + 1 < curve.samples.size(); ++k) {
        const auto& a = curve.samples[k];
        const auto& c = curve.samples[k + 1];
        if (!a.converged || !c.converged) {
            continue;
        }
        if (a.ell >= 1.0 && c.ell <= 1.0 && a.ell > c.ell) {
            curve.lambda_star =
                a.lambda + (a.ell - 1.0) * (c.lambda - a.lambda) / (a.ell - c.ell);
            break;
        }
    }
    return curve;
}

void write_ell_csv(const EllCurve& curve, std::ostream& os) {
    os << "lambda,ell,converged\n";
    for (const auto& s : curve.samples) {
        os << format_double(s.lambda) << ',' << format_double(s.ell) << ','
           << (s.converged ? 1 : 0) << '\n';
    }
    if (curve.lambda_star) {
        os << "# lambda_star=" << format_double(*curve.lambda_star) << '\n';
    }
}

std::string ell_csv(const EllCurve& curve) {
    std::ostringstream os;
    write_ell_csv(curve, os);
    return os.str();
}

std::string verify_ell_curve(const EllCurve& curve, double tol) {
    const EllSample* prev = nullptr;
    for (const auto& s : curve.samples) {
        if (!s.converged) {
            continue;
        }
        if (prev && !(s.ell < prev->ell - 10.0 * tol * std::abs(prev->ell))) {
            return "ell not strictly decreasing between lambda=" + format_double(prev->lambda) +
                   " and lambda=" + format_double(s.lambda);
        }
        prev = &s;
    }
    if (curve.lambda_star) {
        for (std::size_t k = 0; k + 1 < curve.samples.size(); ++k) {
            const auto& a = curve.samples[k];
            const auto& c = curve.samples[k + 1];
            if (!a.converged || !c.converged) {
                continue;
            }
            if (a.lambda <= *curve.lambda_star && *curve.lambda_star <= c.lambda) {
                const double interp =
                    a.ell + (c.ell - a.ell) * (*curve.lambda_star - a.lambda) /
                                (c.lambda - a.lambda);
                if (std::abs(interp - 1.0) > 100.0 * tol) {
                    return "interpolated ell at lambda_star is " + format_double(interp);
                }
            }
        }
    }
    return {};
}

}  // namespace limitcurve
