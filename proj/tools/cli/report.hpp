#pragma once

#include <finslab/curve.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace finslab::cli {

struct Assertion {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    /// Extra key=value pairs printed after the fixed keys.
    std::vector<std::pair<std::string, std::string>> extra;
};

struct Report {
    std::string experiment;
    std::string config;
    std::uint64_t seed = 0;
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, DiscreteCurve>> curves;

    /// value <= tolerance.
    Assertion& bound(std::string name, double value, double tolerance);
    /// Records a condition that is not a numeric bound.
    Assertion& check(std::string name, double value, double tolerance, bool pass);
    bool pass() const;
};

/// One line per assertion: experiment, name, value, tolerance, pass, then extras.
std::string format_records(const Report& r);

/// Writes report.txt and curves/<name>.csv under dir.
void write_report(const Report& r, const std::filesystem::path& dir);

} // namespace finslab::cli
