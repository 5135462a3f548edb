#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

namespace limitcurve::cli {

/// Safety-factor summary written next to the curve files. `fos` carries the
/// string sentinel "+inf-lower-bound" instead of a float infinity when the
/// factor exceeded its ceiling while still growing; the numeric lower bound
/// is then reported separately.
struct FosReport {
    std::string method;
    double fos = 0.0;
    bool fos_is_inf_lower_bound = false;
    std::optional<std::pair<double, double>> bracket;  // lower <= fos <= upper
    bool converged = false;
    int steps = 0;
    double wall_time_s = 0.0;
    std::optional<std::string> verdict;  // classify only
    nlohmann::ordered_json config_echo;

    void validate() const;
};

/// Pretty-printed JSON with a stable key order and 17-significant-digit
/// numbers; parses back losslessly.
std::string report_json(const FosReport& report);

void write_report(const FosReport& report, const std::filesystem::path& path);

}  // namespace limitcurve::cli
