#include "config.hpp"

#include <finslab/expr.hpp>

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <cctype>

namespace finslab::cli {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = std::min(s.find(';', start), s.size());
        std::string piece = s.substr(start, end - start);
        const auto first = piece.find_first_not_of(" \t");
        const auto last = piece.find_last_not_of(" \t");
        if (first != std::string::npos) out.push_back(piece.substr(first, last - first + 1));
        start = end + 1;
    }
    return out;
}

double constant_expression(const std::string& s) {
    try {
        const Expr e = parse_expression(s, VariableTable{});
        if (e.is_constant()) return e.constant_value();
        if (e.max_variable() >= 0) throw ConfigError("expected a constant expression: " + s);
        const double unused = 0.0;
        return e.evaluate<double>(std::span<const double>(&unused, 1));
    } catch (const Error& err) {
        throw ConfigError("cannot parse '" + s + "': " + err.what());
    }
}

Config Config::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    Config c;
    c.path_ = path;
    try {
        pt::read_ini(path.string(), c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.message());
    }
    return c;
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

bool Config::has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

std::string Config::text(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("missing key '" + key + "' in " + path_.string());
    return *v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
}

double Config::number(const std::string& key) const { return constant_expression(text(key)); }

double Config::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    try {
        std::size_t used = 0;
        const std::string s = text(key);
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs an integer");
    }
}

bool Config::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string s = text(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError("key '" + key + "' needs true or false");
}

std::vector<double> Config::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& piece : split_list(text(key))) out.push_back(constant_expression(piece));
    return out;
}

Vector Config::vector(const std::string& key) const {
    const auto v = numbers(key);
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

MetricDefinition Config::metric(const std::string& section, int dimension_hint) const {
    if (!has_section(section)) throw ConfigError("missing section [" + section + "] in " + path_.string());
    try {
        if (has(section + ".builtin")) return builtin_metric(text(section + ".builtin"));
        if (has(section + ".constant")) {
            if (dimension_hint <= 0) throw ConfigError("[" + section + "] constant needs a known dimension");
            return constant_factor(dimension_hint, number(section + ".constant"));
        }
        if (has(section + ".file")) {
            std::filesystem::path file = text(section + ".file");
            if (file.is_relative()) file = path_.parent_path() / file;
            if (!std::filesystem::exists(file)) throw ConfigError("metric file not found: " + file.string());
            return load_metric_file(file);
        }
    } catch (const Error& e) {
        throw ConfigError("[" + section + "]: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("[" + section + "]: " + e.what());
    }
    throw ConfigError("[" + section + "] needs one of builtin, file or constant");
}

SubmanifoldPatch Config::submanifold(const Vector& x) const {
    if (!has("submanifold.components")) return SubmanifoldPatch::point(x);
    const auto components = split_list(text("submanifold.components"));
    const Vector u0 = has("submanifold.u0") ? vector("submanifold.u0") : Vector(0);
    try {
        return SubmanifoldPatch::parse(components, u0, text("submanifold.name", "P"));
    } catch (const ParseError& e) {
        throw ConfigError(std::string("[submanifold]: ") + e.what());
    } catch (const DimensionMismatch& e) {
        throw ConfigError(std::string("[submanifold]: ") + e.what());
    }
}

double Config::tolerance(const std::string& name, double fallback) const {
    return number("tolerances." + name, fallback);
}

} // namespace finslab::cli
