#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace finslab::cli {

namespace {

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

Assertion& Report::bound(std::string name, double value, double tolerance) {
    return check(std::move(name), value, tolerance, value <= tolerance);
}

Assertion& Report::check(std::string name, double value, double tolerance, bool pass) {
    assertions.push_back({std::move(name), value, tolerance, pass, {}});
    return assertions.back();
}

bool Report::pass() const {
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

std::string format_records(const Report& r) {
    std::ostringstream out;
    out << "# finslab experiment=" << r.experiment << " seed=" << r.seed << " config=" << r.config << '\n';
    for (const auto& a : r.assertions) {
        out << "experiment=" << r.experiment << " name=" << a.name << " value=" << number(a.value)
            << " tolerance=" << number(a.tolerance) << " pass=" << (a.pass ? "true" : "false");
        for (const auto& [k, v] : a.extra) out << ' ' << k << '=' << v;
        out << '\n';
    }
    out << "# overall pass=" << (r.pass() ? "true" : "false") << '\n';
    return out.str();
}

void write_report(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "curves", ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::ofstream out(dir / "report.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "report.txt").string());
    out << format_records(r);
    for (const auto& [name, curve] : r.curves) write_curve_csv(curve, dir / "curves" / (name + ".csv"));
}

} // namespace finslab::cli
