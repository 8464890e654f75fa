#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hlb/hlb.hpp"

using namespace hlb;
using namespace hlb::runner;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hlb_runner_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
json read_json(const fs::path& p) { return json::parse(slurp(p)); }
std::vector<std::vector<double>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> out;
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        out.push_back(r);
    }
    return out;
}

const char* zero_cfg = R"([experiment]
kind = simulate
[domain]
N = 64
[scenario]
class = zero
[run]
t_max = 0.1
)";

const char* small_sec3 = R"([experiment]
kind = simulate
[domain]
N = 128
[kernel]
family = modified
a = 0.1
[run]
t_max = 2
bkm_stop = 2
)";
}  // namespace

TEST(Runner, MinimalZeroConfig) {
    auto d = scratch("zero");
    write(d / "c.ini", zero_cfg);
    EXPECT_EQ(run_experiment(d / "c.ini", d / "out"), 0);
    EXPECT_EQ(slurp(d / "out" / "series.csv").substr(0, 47), "t,I,J,bkm,max_ux,max_omega,mass_half,supp_edge\n");
    auto rows = csv_rows(d / "out" / "series.csv");
    ASSERT_GE(rows.size(), 2u);
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 8u);
        EXPECT_EQ(r[1], 0.0);
        EXPECT_EQ(r[2], 0.0);
    }
    EXPECT_DOUBLE_EQ(rows.back()[0], 0.1);
    auto m = read_json(d / "out" / "manifest.json");
    EXPECT_EQ(m["result"]["termination"], "t-max");
    // every default is materialised
    EXPECT_EQ(m["config"]["run"]["ux_factor"], 0.05);
    EXPECT_EQ(m["config"]["kernel"]["a"], 0.1);
    EXPECT_EQ(m["config"]["domain"]["N"], 64);
    EXPECT_TRUE(m["config"]["lemmas"].contains("resolution"));
    fs::remove_all(d);
}

TEST(Runner, ConfigErrorsExitTwo) {
    auto d = scratch("bad");
    EXPECT_EQ(run_experiment(d / "missing.ini", d / "out"), 2);
    write(d / "a.ini", "[domain]\nN = 64\nbogus = 1\n");
    EXPECT_EQ(run_experiment(d / "a.ini", d / "out"), 2);
    write(d / "b.ini", "[domain]\nN = sixty\n");
    EXPECT_EQ(run_experiment(d / "b.ini", d / "out"), 2);
    write(d / "c.ini", "[run]\ncfl = 1.5\n");
    EXPECT_EQ(run_experiment(d / "c.ini", d / "out"), 2);
    write(d / "e.ini", "[domain]\nN = 63\n");
    EXPECT_EQ(run_experiment(d / "e.ini", d / "out"), 2);
    fs::remove_all(d);
}

TEST(Runner, EpsTooLargeExitsTwo) {
    auto d = scratch("eps");
    write(d / "c.ini", R"([domain]
N = 512
[kernel]
family = perturbed
perturbation = cos
[scenario]
class = sec4
eps = 0.24
[run]
t_max = 0.1
)");
    testing::internal::CaptureStderr();
    EXPECT_EQ(run_experiment(d / "c.ini", d / "out"), 2);
    auto err = testing::internal::GetCapturedStderr();
    EXPECT_NE(err.find("eps-too-large"), std::string::npos) << err;
    EXPECT_NE(err.find("negativity of u near 0"), std::string::npos) << err;
    fs::remove_all(d);
}

TEST(Runner, VerifyLemmasWritesEightReports) {
    auto d = scratch("lem");
    write(d / "c.ini", "[experiment]\nkind = verify-lemmas\n[lemmas]\nresolution = 100\n");
    EXPECT_EQ(run_experiment(d / "c.ini", d / "out"), 0);
    int n = 0;
    for (const auto& e : fs::directory_iterator(d / "out" / "reports")) {
        ++n;
        auto j = read_json(e.path());
        for (const char* k : {"property_id", "region", "resolution", "a", "extremal_value", "location_x",
                              "location_y", "estimated_constant", "pass", "refinement_ratio"})
            EXPECT_TRUE(j.contains(k)) << e.path() << " " << k;
        if (j["property_id"] != "quad_coeffs_periodic") EXPECT_TRUE(j["pass"].get<bool>()) << e.path();
    }
    EXPECT_EQ(n, 8);
    fs::remove_all(d);
}

TEST(Runner, RerunsAreByteIdentical) {
    auto d = scratch("det");
    write(d / "c.ini", small_sec3);
    ASSERT_EQ(run_experiment(d / "c.ini", d / "a"), 0);
    ASSERT_EQ(run_experiment(d / "c.ini", d / "b"), 0);
    auto a = slurp(d / "a" / "series.csv");
    EXPECT_GT(a.size(), 100u);
    EXPECT_EQ(a, slurp(d / "b" / "series.csv"));
    EXPECT_EQ(read_json(d / "a" / "manifest.json")["result"]["termination"], "bkm-stop");
    fs::remove_all(d);
}

TEST(Runner, OnePointSweepMatchesSingleRun) {
    auto d = scratch("sweep1");
    write(d / "single.ini", small_sec3);
    write(d / "sweep.ini", std::string(small_sec3) + "[sweep]\nkind = simulate\nkernel.a = 0.1\n");
    auto sc = load_config(d / "sweep.ini");
    sc.kind = "sweep";
    ASSERT_EQ(run_experiment(d / "single.ini", d / "s"), 0);
    ASSERT_EQ(run_experiment(sc, d / "w"), 0);
    EXPECT_EQ(slurp(d / "s" / "series.csv"), slurp(d / "w" / "rows" / "row_000" / "series.csv"));
    auto sum = slurp(d / "w" / "summary.csv");
    EXPECT_EQ(std::count(sum.begin(), sum.end(), '\n'), 2);
    EXPECT_NE(sum.find(",ok,bkm-stop,"), std::string::npos) << sum;
    fs::remove_all(d);
}

TEST(Runner, SweepRowsInDeclarationOrder) {
    auto d = scratch("sweep3");
    RunConfig c;
    c.kind = "sweep";
    c.sweep_kind = "ode-compare";
    c.ode_dt = 0.01;
    c.sweep = {{"ode.C", "1, 2"}, {"ode.I0", "1,4"}};
    ASSERT_EQ(run_experiment(c, d), 0);
    auto s = slurp(d / "summary.csv");
    std::stringstream ss(s);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "row,ode.C,ode.I0,status,termination,bkm,t_end,T_est,fit_quality");
    std::vector<std::string> lead;
    while (std::getline(ss, line)) lead.push_back(line.substr(0, line.find(",ok")));
    EXPECT_EQ(lead, (std::vector<std::string>{"0,1,1", "1,1,4", "2,2,1", "3,2,4"}));
    c.sweep = {{"domain.N", "64,abc"}};
    EXPECT_EQ(run_experiment(c, d / "bad"), 2);
    fs::remove_all(d);
}

TEST(Runner, OdeAndDeriveKernel) {
    auto d = scratch("misc");
    RunConfig c;
    c.kind = "ode-compare";
    c.ode_dt = 0.01;
    ASSERT_EQ(run_experiment(c, d / "ode"), 0);
    auto j = read_json(d / "ode" / "reports" / "ode.json");
    EXPECT_NEAR(j["T_blowup"].get<double>(), 2.9746, 0.01);
    c.kind = "derive-kernel";
    c.derive_points = 5;
    c.n_max = 1000;
    c.n_quad = 1000;
    ASSERT_EQ(run_experiment(c, d / "dk"), 0);
    auto k = read_json(d / "dk" / "reports" / "derive_kernel.json");
    EXPECT_EQ(k["rows"].size(), 5u);
    ASSERT_EQ(run_experiment(c, d / "dk2"), 0);
    EXPECT_EQ(slurp(d / "dk" / "reports" / "derive_kernel.json"), slurp(d / "dk2" / "reports" / "derive_kernel.json"));
    fs::remove_all(d);
}

TEST(Runner, Snapshots) {
    auto d = scratch("snap");
    RunConfig c;
    c.N = 64;
    c.t_max = 0.05;
    c.snapshot_every = 1;
    ASSERT_EQ(run_experiment(c, d), 0);
    int n = 0;
    for (const auto& e : fs::directory_iterator(d / "snapshots")) {
        ++n;
        EXPECT_EQ(slurp(e.path()).substr(0, 19), "x,jac,omega,theta,u");
    }
    EXPECT_GE(n, 2);
    fs::remove_all(d);
}

TEST(Runner, SetKeyAndFormat) {
    RunConfig c;
    set_key(c, "domain.N", "512");
    set_key(c, "lemmas.a", "0.5, 2");
    set_key(c, "lemmas.refine", "false");
    EXPECT_EQ(c.N, 512);
    EXPECT_EQ(c.lem_a, (std::vector<double>{0.5, 2}));
    EXPECT_FALSE(c.lem_refine);
    EXPECT_THROW(set_key(c, "nope.x", "1"), Error);
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(std::stod(fmt(1.0 / 3)), 1.0 / 3);
}
