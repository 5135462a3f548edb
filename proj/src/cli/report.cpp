#include "limitcurve/cli/report.hpp"

#include "limitcurve/format.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace limitcurve::cli {

namespace {

// nlohmann's dump() prints doubles with the shortest round-trip form; the
// report contract pins 17 significant digits instead, so serialize by hand.
void dump(const nlohmann::ordered_json& j, std::ostream& os, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    os << ",\n";
                }
                first = false;
                os << pad_in << nlohmann::json(it.key()).dump() << ": ";
                dump(it.value(), os, depth + 1);
            }
            os << '\n' << pad << '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            bool first = true;
            for (const auto& item : j) {
                if (!first) {
                    os << ",\n";
                }
                first = false;
                os << pad_in;
                dump(item, os, depth + 1);
            }
            os << '\n' << pad << ']';
            return;
        }
        case nlohmann::json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

}  // namespace

void FosReport::validate() const {
    if (bracket && !fos_is_inf_lower_bound) {
        if (!(bracket->first <= fos && fos <= bracket->second)) {
            throw std::logic_error("FosReport: fos must lie inside the bracket");
        }
    }
}

std::string report_json(const FosReport& report) {
    report.validate();
    nlohmann::ordered_json j;
    j["method"] = report.method;
    if (report.fos_is_inf_lower_bound) {
        j["fos"] = "+inf-lower-bound";
        j["fos_lower_bound"] = report.fos;
    } else {
        j["fos"] = report.fos;
    }
    if (report.bracket) {
        j["bracket"] = {{"lower", report.bracket->first}, {"upper", report.bracket->second}};
    } else {
        j["bracket"] = nullptr;
    }
    if (report.verdict) {
        j["verdict"] = *report.verdict;
    }
    j["converged"] = report.converged;
    j["steps"] = report.steps;
    j["wall_time_s"] = report.wall_time_s;
    j["config_echo"] = report.config_echo;

    std::ostringstream os;
    dump(j, os, 0);
    os << '\n';
    return os.str();
}

void write_report(const FosReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open report file for writing: " + path.string());
    }
    out << report_json(report);
    if (!out) {
        throw std::runtime_error("failed to write report: " + path.string());
    }
}

}  // namespace limitcurve::cli
