#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string output;
};

// Runs the harness with stderr folded into the captured output.
Run finslab(const std::string& args) {
    const std::string cmd = std::string(FINSLAB_EXE) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string config(const std::string& name) { return (fs::path(FINSLAB_CONFIGS) / name).string(); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("finslab-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST(Cli, PassingRunExitsZero) {
    const auto dir = scratch("pass");
    const auto r = finslab("tensors --config " + config("tensors.ini") + " --out " + dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("# overall pass=true"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "report.txt"));
}

TEST(Cli, FailedAssertionExitsOne) {
    const auto dir = scratch("fail");
    const auto r = finslab("tensors --config " + config("tensors.ini") + " --tol 1e-30 --out " + dir.string());
    EXPECT_EQ(r.status, 1) << r.output;
    EXPECT_NE(r.output.find("pass=false"), std::string::npos);
    EXPECT_NE(r.output.find("tolerance=1e-30"), std::string::npos);
}

TEST(Cli, MissingMetricFileExitsTwo) {
    const auto dir = scratch("missing");
    const fs::path ini = dir / "broken.ini";
    std::ofstream(ini) << "[metric]\nfile = no-such.metric\n";
    const auto r = finslab("tensors --config " + ini.string() + " --out " + (dir / "out").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.output.find((dir / "no-such.metric").string()), std::string::npos) << r.output;
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(finslab("tensors").status, 2);
    EXPECT_EQ(finslab("no-such-experiment --config " + config("tensors.ini")).status, 2);
    EXPECT_EQ(finslab("tensors --config /nonexistent/finslab.ini").status, 2);
    const auto dir = scratch("usage");
    const fs::path ini = dir / "bad.ini";
    std::ofstream(ini) << "[metric]\nbuiltin = einstein-static\n[curve]\nx0 = 0; 1.2\nv0 = 1; 0; 1\nt1 = 1\n";
    EXPECT_EQ(finslab("geodesic --config " + ini.string() + " --out " + (dir / "out").string()).status, 2);
    EXPECT_EQ(finslab("geodesic --config " + config("geodesic.ini") + " --step -1").status, 2);
}

TEST(Cli, SameSeedGivesIdenticalOutput) {
    const auto a = scratch("det-a"), b = scratch("det-b");
    ASSERT_EQ(finslab("lightcone --config " + config("lightcone.ini") + " --seed 11 --out " + a.string()).status, 0);
    ASSERT_EQ(finslab("lightcone --config " + config("lightcone.ini") + " --seed 11 --out " + b.string()).status, 0);
    EXPECT_EQ(slurp(a / "report.txt"), slurp(b / "report.txt"));
    EXPECT_NE(slurp(a / "report.txt").find("seed=11"), std::string::npos);

    ASSERT_EQ(finslab("conformal-pregeodesic --config " + config("conformal-pregeodesic.ini") + " --out " + a.string())
                  .status,
              0);
    ASSERT_EQ(finslab("conformal-pregeodesic --config " + config("conformal-pregeodesic.ini") + " --out " + b.string())
                  .status,
              0);
    for (const char* f : {"report.txt", "curves/gamma.csv", "curves/gamma_tilde.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, RecordsKeepKeyOrder) {
    const auto dir = scratch("order");
    ASSERT_EQ(finslab("focal --config " + config("focal-sphere.ini") + " --out " + dir.string()).status, 0);
    std::istringstream in(slurp(dir / "report.txt"));
    const std::regex record(R"(^experiment=focal name=\S+ value=\S+ tolerance=\S+ pass=(true|false)( \w+=\S+)*$)");
    int records = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.starts_with("#")) continue;
        EXPECT_TRUE(std::regex_match(line, record)) << line;
        ++records;
    }
    EXPECT_GE(records, 3);
}

TEST(Cli, CurveHeader) {
    const auto dir = scratch("csv");
    ASSERT_EQ(finslab("geodesic --config " + config("geodesic.ini") + " --out " + dir.string()).status, 0);
    std::ifstream in(dir / "curves" / "geodesic.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "t,x0,x1,x2,y0,y1,y2");
}

TEST(Cli, TrivialFactorPairsFocalPoints) {
    const auto dir = scratch("trivial");
    const auto r = finslab("focal-correspondence --config " + config("correspondence-trivial.ini") + " --out " +
                           dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("name=focal_L_1"), std::string::npos);
    EXPECT_NE(r.output.find("name=focal_lambdaL_1"), std::string::npos);
}
