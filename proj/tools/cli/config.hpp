#pragma once

// Experiment configuration: an INI file with sections, loaded once and
// queried by the experiment runners.

#include <finslab/metric.hpp>
#include <finslab/variational.hpp>

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace finslab::cli {

/// Anything wrong with the configuration or the command line; exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"tensors",   "geodesic", "lightcone",           "conformal-pregeodesic",
                                                   "variation", "focal",    "focal-correspondence"};
    return names;
}

class Config {
public:
    static Config load(const std::filesystem::path& path);

    const std::filesystem::path& path() const noexcept { return path_; }
    bool has(const std::string& key) const;

    std::string text(const std::string& key) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    /// ';'-separated constant expressions (`pi` allowed).
    Vector vector(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    /// Section with `builtin = name`, `file = path` or `constant = c`.
    MetricDefinition metric(const std::string& section, int dimension_hint = 0) const;
    bool has_section(const std::string& section) const;

    /// [submanifold]: `components` in u0..u{d-1} and `u0`; absent means the point x.
    SubmanifoldPatch submanifold(const Vector& x) const;

    /// Tolerance override from [tolerances], else the default.
    double tolerance(const std::string& name, double fallback) const;

private:
    std::filesystem::path path_;
    boost::property_tree::ptree tree_;
};

/// Splits on ';' and trims; empty pieces are dropped.
std::vector<std::string> split_list(const std::string& s);

/// Evaluates a constant DSL expression such as `pi/2`.
double constant_expression(const std::string& s);

} // namespace finslab::cli
