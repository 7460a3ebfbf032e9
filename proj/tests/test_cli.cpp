#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "io.hpp"

namespace fs = std::filesystem;
using namespace iucert;
using namespace iucert::cli;

namespace {

fs::path scratch() {
    auto d = fs::temp_directory_path() / "iucert_test_cli";
    fs::create_directories(d);
    return d;
}

fs::path write_cfg(const std::string& name, const std::string& body) {
    const auto p = scratch() / name;
    std::ofstream(p) << body;
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(IUCERT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
    std::istringstream in("# run\npotential.family = Q2\npotential.alpha=3  # inline\ngrid.N=200\niu.t=0.5,T,1.5T\n");
    const auto c = make_config(parse_key_values(in));
    EXPECT_EQ(c.potential.family, Family::LogPower);
    EXPECT_DOUBLE_EQ(c.potential.alpha, 3.0);
    EXPECT_EQ(c.N, 200u);
    ASSERT_EQ(c.t_list.size(), 3u);
    EXPECT_FALSE(c.t_list[0].in_T);
    EXPECT_DOUBLE_EQ(c.t_list[2].resolve(2.0), 3.0);
    EXPECT_EQ(c.t_list[1].label(), "1T");
}

TEST(Config, RejectsMalformedInput) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return make_config(parse_key_values(in));
    };
    EXPECT_THROW(parse("no equals sign\n"), ConfigError);
    EXPECT_THROW(parse("grid.N=12x\n"), ConfigError);
    EXPECT_THROW(parse("grid.N=3\ngrid.N=4\n"), ConfigError);
    EXPECT_THROW(parse("unknown.key=1\n"), ConfigError);
    EXPECT_THROW(parse("potential.family=cubic\n"), ConfigError);
    EXPECT_THROW(parse("iu.t=0.5,-1\n"), ConfigError);
    auto c = parse("tol.eigen=0\n");
    EXPECT_THROW(c.validate(), ConfigError);
    c = parse("grid.n_dim=2\n");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Csv, NumberFormatting) {
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(123456.0), "123456");
    EXPECT_EQ(format_number(1e6), "1.000000000000000e+06");
    EXPECT_EQ(format_number(-2.5e7), "-2.500000000000000e+07");
    EXPECT_EQ(format_number(0.0), "0");
}

TEST(Csv, AtomicWriteLeavesNoTemp) {
    const auto p = scratch() / "table.csv";
    CsvTable t({"a", "b"});
    t.add({1.0, 2e6});
    t.write(p);
    EXPECT_EQ(slurp(p), "a,b\n1,2.000000000000000e+06\n");
    EXPECT_FALSE(fs::exists(scratch() / "table.csv.tmp"));
    EXPECT_THROW(t.add({1.0}), ConfigError);
}

TEST(Cli, CheckPotentialExitCodes) {
    const auto out = (scratch() / "out").string();
    EXPECT_EQ(run("check-potential --config " + write_cfg("a3.cfg", "potential.alpha=3\n").string() + " --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "conditions.json"));
    EXPECT_EQ(run("check-potential --config " + write_cfg("a2.cfg", "potential.alpha=2\n").string() + " --out " + out), 2);
    EXPECT_EQ(run("check-potential --config " + write_cfg("bad.cfg", "potential.alpha\n").string()), 3);
    EXPECT_EQ(run("check-potential --config /nonexistent.cfg"), 3);
}

TEST(Cli, CertifyAndControl) {
    const auto out = scratch() / "cert";
    EXPECT_EQ(run("certify --config " + write_cfg("c.cfg", "grid.N=200\n").string() + " --out " + out.string()), 0);
    for (auto f : {"conditions.json", "rosen.json", "semigroup.json", "iu.json", "certificate.json"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const auto ctl = scratch() / "ctl";
    EXPECT_EQ(run("certify --config " + write_cfg("ctl.cfg", "grid.N=200\niu.control=r2\n").string() + " --out " +
                  ctl.string()),
              5);
}

TEST(Cli, PlotdataIsDeterministic) {
    const auto cfg = write_cfg("p.cfg", "grid.N=120\niu.t=0.5,T\n").string();
    const auto a = scratch() / "pa", b = scratch() / "pb";
    ASSERT_EQ(run("plotdata --config " + cfg + " --out " + a.string()), 0);
    ASSERT_EQ(run("plotdata --config " + cfg + " --out " + b.string()), 0);
    for (auto f : {"profile.csv", "schedule.csv", "constants.csv", "kernel_ratio.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}
