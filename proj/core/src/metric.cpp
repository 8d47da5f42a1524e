#include "finslab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace finslab {

MetricDefinition::MetricDefinition(int n, Expr body, std::vector<Expr> domain, int degree, std::string name)
    : n_(n), body_(std::move(body)), domain_(std::move(domain)), degree_(degree), name_(std::move(name)),
      box_(static_cast<std::size_t>(n), Interval{-1.0, 1.0}) {
    if (n < 1) throw DimensionMismatch("metric dimension must be positive");
    if (body_.max_variable() >= 2 * n) throw DimensionMismatch("metric body references an undeclared variable");
    for (const auto& p : domain_)
        if (p.max_variable() >= 2 * n) throw DimensionMismatch("domain predicate references an undeclared variable");
}

MetricDefinition MetricDefinition::with_domain(std::vector<Expr> domain) const {
    MetricDefinition m = *this;
    for (const auto& p : domain)
        if (p.max_variable() >= 2 * n_) throw DimensionMismatch("domain predicate references an undeclared variable");
    m.domain_ = std::move(domain);
    return m;
}

MetricDefinition MetricDefinition::with_box(std::vector<Interval> box) const {
    if (static_cast<int>(box.size()) != n_) throw DimensionMismatch("sampling box has the wrong dimension");
    for (const auto& [lo, hi] : box)
        if (!(lo <= hi)) throw std::invalid_argument("sampling box interval is empty");
    MetricDefinition m = *this;
    m.box_ = std::move(box);
    return m;
}

MetricDefinition MetricDefinition::with_name(std::string name) const {
    MetricDefinition m = *this;
    m.name_ = std::move(name);
    return m;
}

void MetricDefinition::check_dimension(const TangentSample& v) const {
    if (v.x.size() != n_ || v.y.size() != n_) throw DimensionMismatch("sample dimension does not match the metric");
}

namespace {

std::vector<double> flatten(const Vector& x, const Vector& y) {
    std::vector<double> vars(static_cast<std::size_t>(x.size() + y.size()));
    std::copy(x.begin(), x.end(), vars.begin());
    std::copy(y.begin(), y.end(), vars.begin() + x.size());
    return vars;
}

} // namespace

bool MetricDefinition::admissible(const TangentSample& v) const {
    check_dimension(v);
    if (v.y.isZero(0.0)) return false;
    if (!v.x.allFinite() || !v.y.allFinite()) return false;
    const auto vars = flatten(v.x, v.y);
    for (const auto& p : domain_) {
        try {
            if (!(p.evaluate<double>(vars) > 0.0)) return false;
        } catch (const DomainError&) {
            return false;
        }
    }
    return true;
}

double MetricDefinition::value(const TangentSample& v) const {
    if (!admissible(v)) throw InadmissibleSample("sample lies outside the domain of " + (name_.empty() ? "the metric" : name_));
    return evaluate(v.x, v.y);
}

double MetricDefinition::evaluate(const Vector& x, const Vector& y) const {
    const auto vars = flatten(x, y);
    return body_.evaluate<double>(vars);
}

JetScalar MetricDefinition::jet(const TangentSample& v, int order, SeedMode mode) const {
    check_dimension(v);
    const auto vars = seed(v, order, mode);
    return body_.evaluate<JetScalar>(vars);
}

std::string MetricDefinition::body_source() const {
    return print_expression(body_, VariableTable::chart_and_fiber(n_));
}

std::vector<std::string> MetricDefinition::domain_source() const {
    std::vector<std::string> out;
    const auto table = VariableTable::chart_and_fiber(n_);
    for (const auto& p : domain_) out.push_back(print_expression(p, table));
    return out;
}

// ---------------------------------------------------------------------------

MetricDefinition parse_metric(std::string_view source, int n, const std::vector<std::string>& domain, int degree,
                              std::string name) {
    if (n < 1) throw DimensionMismatch("metric dimension must be positive");
    const auto table = VariableTable::chart_and_fiber(n);
    Expr body = parse_expression(source, table);
    std::vector<Expr> preds;
    for (const auto& d : domain) preds.push_back(parse_expression(d, table));
    return MetricDefinition(n, std::move(body), std::move(preds), degree, std::move(name));
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool is_header(const std::string& line, std::string& key, std::string& value) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) return false;
    key = trim(std::string_view(line).substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }))
        return false;
    value = trim(std::string_view(line).substr(eq + 1));
    return true;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("header '" + key + "' expects an integer", 1);
}

} // namespace

MetricDefinition parse_metric_file(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int dim = -1;
    int degree = 2;
    std::string name;
    std::vector<std::string> domain;
    std::vector<MetricDefinition::Interval> box;
    std::string body;
    bool in_body = false;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::string key, value;
        if (!in_body && is_header(line, key, value)) {
            if (key == "dim") dim = parse_int(key, value);
            else if (key == "degree") degree = parse_int(key, value);
            else if (key == "domain") domain = split(value, ';');
            else if (key == "name") name = value;
            else if (key == "box") {
                for (const auto& part : split(value, ';')) {
                    const auto colon = part.find(':');
                    if (colon == std::string::npos) throw ParseError("box entries take the form lo:hi", 1);
                    try {
                        box.emplace_back(std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1)));
                    } catch (const std::exception&) {
                        throw ParseError("malformed box entry '" + part + "'", 1);
                    }
                }
            } else {
                throw ParseError("unknown header '" + key + "'", 1);
            }
            continue;
        }
        in_body = true;
        body += (body.empty() ? "" : " ") + line;
    }
    if (dim < 1) throw ParseError("metric file lacks a positive 'dim' header", 1);
    if (body.empty()) throw ParseError("metric file has no body expression", 1);
    MetricDefinition m = parse_metric(body, dim, domain, degree, std::move(name));
    if (!box.empty()) m = m.with_box(std::move(box));
    return m;
}

MetricDefinition load_metric_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metric file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    MetricDefinition m = parse_metric_file(ss.str());
    if (m.name().empty()) m = m.with_name(path.stem().string());
    return m;
}

// ---------------------------------------------------------------------------

TangentSample sample_admissible(const MetricDefinition& m, std::mt19937_64& rng) {
    const int n = m.dimension();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TangentSample v{Vector(n), Vector(n)};
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        for (int i = 0; i < n; ++i) {
            const auto [lo, hi] = m.box()[static_cast<std::size_t>(i)];
            v.x[i] = lo + (hi - lo) * unit(rng);
        }
        for (int i = 0; i < n; ++i) v.y[i] = gauss(rng);
        const double norm = v.y.norm();
        if (norm == 0.0) continue;
        v.y *= (0.5 + 1.5 * unit(rng)) / norm;
        if (!m.admissible(v)) continue;
        try {
            if (!std::isfinite(m.evaluate(v.x, v.y))) continue;
        } catch (const DomainError&) {
            continue;
        }
        return v;
    }
    throw SamplingFailure("no admissible sample found for " + (m.name().empty() ? std::string("metric") : m.name())
                          + " after " + std::to_string(kMaxRejections) + " draws");
}

std::vector<TangentSample> sample_admissible(const MetricDefinition& m, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<TangentSample> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) out.push_back(sample_admissible(m, rng));
    return out;
}

HomogeneityReport validate_homogeneity(const MetricDefinition& m, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("validate_homogeneity needs at least one sample");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    HomogeneityReport report;
    for (int i = 0; i < samples; ++i) {
        const TangentSample v = sample_admissible(m, rng);
        const double s = scale(rng);
        const double base = m.evaluate(v.x, v.y);
        const double scaled = m.evaluate(v.x, s * v.y);
        const double expected = std::pow(s, m.degree()) * base;
        const double denom = std::max({std::abs(expected), std::abs(scaled), 1e-300});
        report.max_relative_error = std::max(report.max_relative_error, std::abs(scaled - expected) / denom);
    }
    report.samples = samples;
    report.pass = report.max_relative_error <= 1e-9;
    return report;
}

MetricDefinition constant_factor(int n, double c) {
    std::ostringstream name;
    name << "constant-" << c;
    return MetricDefinition(n, Expr::constant(c), {}, 0, name.str());
}

// ---------------------------------------------------------------------------
// Registry. Bodies are assembled from Expr builders rather than parsed text so
// that the DSL re-expressions in the tests are an independent path.

namespace {

Expr X(int i) { return Expr::variable(i); }

struct Builtin {
    const char* name;
    MetricDefinition (*make)();
};

MetricDefinition minkowski2() {
    const int n = 2;
    auto y = [](int i) { return X(n + i); };
    return MetricDefinition(n, -(y(0) * y(0)) + y(1) * y(1), {}, 2, "minkowski-2");
}

MetricDefinition minkowski2_future() {
    const int n = 2;
    auto y = [](int i) { return X(n + i); };
    return MetricDefinition(n, y(0) * y(0) - y(1) * y(1), {y(0) - y(1), y(0) + y(1)}, 2, "minkowski-2-future");
}

MetricDefinition minkowski3() {
    const int n = 3;
    auto y = [](int i) { return X(n + i); };
    return MetricDefinition(n, -(y(0) * y(0)) + y(1) * y(1) + y(2) * y(2), {}, 2, "minkowski-3");
}

MetricDefinition einstein_static() {
    const int n = 3;
    auto y = [](int i) { return X(n + i); };
    const Expr s = sin(X(1));
    MetricDefinition m(n, -(y(0) * y(0)) + y(1) * y(1) + s * s * (y(2) * y(2)), {s}, 2, "einstein-static");
    return m.with_box({{-1.0, 1.0}, {0.3, 2.8}, {-1.0, 1.0}});
}

MetricDefinition einstein_static_stereo() {
    const int n = 3;
    auto y = [](int i) { return X(n + i); };
    const Expr q = 1.0 + X(1) * X(1) + X(2) * X(2);
    return MetricDefinition(n, -(y(0) * y(0)) + 4.0 * (y(1) * y(1) + y(2) * y(2)) / (q * q), {}, 2,
                            "einstein-static-stereo");
}

MetricDefinition bogoslovsky() {
    const int n = 2;
    auto y = [](int i) { return X(n + i); };
    const Expr u = y(0) - y(1);
    const Expr w = y(0) + y(1);
    return MetricDefinition(n, pow(u, 1.3) * pow(w, 0.7), {u, w}, 2, "bogoslovsky");
}

MetricDefinition bogoslovsky_warped() {
    const int n = 2;
    auto y = [](int i) { return X(n + i); };
    const Expr u = y(0) - y(1);
    const Expr w = y(0) + y(1);
    const Expr b = 0.3 + 0.1 * sin(X(0));
    return MetricDefinition(n, exp(0.4 * X(1)) * pow(u, 1.0 + b) * pow(w, 1.0 - b), {u, w}, 2, "bogoslovsky-warped");
}

MetricDefinition warped3() {
    const int n = 3;
    auto y = [](int i) { return X(n + i); };
    return MetricDefinition(n, -(y(0) * y(0)) + exp(0.6 * X(0)) * (y(1) * y(1) + y(2) * y(2)), {}, 2, "warped-3");
}

MetricDefinition bogoslovsky_factor() {
    const int n = 2;
    auto y = [](int i) { return X(n + i); };
    const Expr u = y(0) - y(1);
    const Expr w = y(0) + y(1);
    return MetricDefinition(n, pow(u / w, 0.3), {u, w}, 0, "bogoslovsky-factor");
}

MetricDefinition einstein_factor() {
    const int n = 3;
    auto y = [](int i) { return X(n + i); };
    const Expr sum = y(0) * y(0) + y(1) * y(1) + y(2) * y(2);
    return MetricDefinition(n, 1.0 + 0.1 * (y(1) * y(1)) / sum, {}, 0, "einstein-factor");
}

const Builtin kBuiltins[] = {
    {"minkowski-2", minkowski2},
    {"minkowski-2-future", minkowski2_future},
    {"minkowski-3", minkowski3},
    {"einstein-static", einstein_static},
    {"einstein-static-stereo", einstein_static_stereo},
    {"bogoslovsky", bogoslovsky},
    {"bogoslovsky-warped", bogoslovsky_warped},
    {"warped-3", warped3},
    {"bogoslovsky-factor", bogoslovsky_factor},
    {"einstein-factor", einstein_factor},
};

} // namespace

MetricDefinition builtin_metric(std::string_view name) {
    for (const auto& b : kBuiltins)
        if (name == b.name) return b.make();
    throw std::invalid_argument("unknown built-in metric '" + std::string(name) + "'");
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> out;
    for (const auto& b : kBuiltins) out.emplace_back(b.name);
    return out;
}

} // namespace finslab
