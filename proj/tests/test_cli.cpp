// End-to-end tests driving the built CLI binary.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef ELLIPTICA_CLI_PATH
#error "ELLIPTICA_CLI_PATH must be defined"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ELLIPTICA_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    EXPECT_NE(pipe, nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string strip_wall_time(std::string text) {
    const auto pos = text.find("\"wall_time_ms\"");
    if (pos == std::string::npos) return text;
    const auto end = text.find_first_of(",}\n", pos);
    return text.substr(0, pos) + text.substr(end);
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST(Cli, CheckSelectedIdsPassWithExitZero) {
    const auto r = run_cli("check --ids unitarity,fay_mat2 --n 2,3 --seed 7 --count 10");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("\"overall_pass\": true"), std::string::npos);
    EXPECT_NE(r.out.find("\"id\": \"unitarity\""), std::string::npos);
    EXPECT_NE(r.out.find("\"id\": \"fay_mat2\""), std::string::npos);
}

TEST(Cli, UnknownIdIsUsageError) {
    const auto r = run_cli("check --ids nosuch");
    EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, BadFlagIsUsageError) {
    const auto r = run_cli("check --definitely-not-a-flag");
    EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, ToleranceOverrideAppearsInReport) {
    const auto r = run_cli("check --ids heat --count 4 --tolerance heat=1e-5");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("\"tolerance\": 1e-05"), std::string::npos);
}

TEST(Cli, ImpossibleToleranceFailsWithExitOne) {
    const auto r = run_cli("check --ids unitarity --count 4 --tolerance unitarity=1e-30");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.out.find("\"overall_pass\": false"), std::string::npos);
}

TEST(Cli, ReportsAreByteIdenticalMinusWallTime) {
    const std::string f1 = "/tmp/elliptica_cli_r1.json";
    const std::string f2 = "/tmp/elliptica_cli_r2.json";
    ASSERT_EQ(run_cli("check --ids unitarity,scalar_fay --count 6 --seed 11 --out " + f1)
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("check --ids unitarity,scalar_fay --count 6 --seed 11 --jobs 3 "
                      "--out " +
                      f2)
                  .exit_code,
              0);
    EXPECT_EQ(strip_wall_time(slurp(f1)), strip_wall_time(slurp(f2)));
    std::remove(f1.c_str());
    std::remove(f2.c_str());
}

TEST(Cli, EnvSeedOverridesDefault) {
    const std::string with_env =
        "ELLIPTICA_SEED=99 " + std::string(ELLIPTICA_CLI_PATH) +
        " check --ids unitarity --count 4 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(with_env.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    pclose(pipe);
    EXPECT_NE(out.find("\"seed\": 99"), std::string::npos);
    // explicit flag wins over the environment
    const auto r = run_cli("check --ids unitarity --count 4 --seed 5");
    EXPECT_NE(r.out.find("\"seed\": 5"), std::string::npos);
}

TEST(Cli, CsvFormat) {
    const auto r = run_cli("check --ids kappa_sum --count 3 --format csv");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.rfind("id,samples_run,max_residual", 0), 0u);
    EXPECT_NE(r.out.find("kappa_sum,3,"), std::string::npos);
}

TEST(Cli, ListShowsRegistry) {
    const auto r = run_cli("list");
    EXPECT_EQ(r.exit_code, 0);
    for (const char* id : {"scalar_fay", "aybe", "fay_mat2", "cm_qp_tau", "unitarity"})
        EXPECT_NE(r.out.find(id), std::string::npos) << id;
}

TEST(Cli, PviDefaultRunPasses) {
    const std::string csv = "/tmp/elliptica_cli_pvi.csv";
    const auto r = run_cli("pvi --out " + csv);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("\"pass\": true"), std::string::npos);
    const std::string table = slurp(csv);
    EXPECT_EQ(table.rfind("tau_re,tau_im,u_re,u_im,v_re,v_im,residual_h0", 0), 0u);
    EXPECT_GE(count_lines(table), 101);  // header + >= 100 steps
    std::remove(csv.c_str());
}

TEST(Cli, PviFreeMotionIsExact) {
    const std::string csv = "/tmp/elliptica_cli_pvi0.csv";
    const auto r = run_cli("pvi --nu 0,0,0,0 --u0 0.31+0.126i --v0 0.05 --out " + csv);
    EXPECT_EQ(r.exit_code, 0);
    // endpoint u = u0 + v0 (tau1 - tau0) exactly
    const std::string table = slurp(csv);
    const auto last_line = table.rfind("\r\n", table.size() - 3);
    std::stringstream row(table.substr(last_line + 2));
    std::string field;
    std::vector<double> vals;
    while (std::getline(row, field, ',')) vals.push_back(std::stod(field));
    EXPECT_NEAR(vals[2], 0.31 + 0.05 * 0.0, 1e-12);        // u_re
    EXPECT_NEAR(vals[3], 0.126 + 0.05 * 0.3, 1e-12);       // u_im
    std::remove(csv.c_str());
}

TEST(Cli, PviEvenNNotesEffectiveConstant) {
    const auto r = run_cli("pvi --n 2 --nu 0.1,0.2,0.3,0.4 --out /tmp/elliptica_n2.csv");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("\"effective_nu_sq\": 0.3"), std::string::npos);
    std::remove("/tmp/elliptica_n2.csv");
}

TEST(Cli, PviPoleApproachHaltsWithExitThree) {
    const auto r =
        run_cli("pvi --nu 0,0,0,0 --u0 0.08 --v0 -3i --out /tmp/elliptica_halt.csv");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.out.find("\"halted\": true"), std::string::npos);
    EXPECT_NE(r.out.find("halt_reason"), std::string::npos);
    std::remove("/tmp/elliptica_halt.csv");
}

TEST(Cli, TableGridShape) {
    const auto r = run_cli("table --nx 10 --ny 10 --tau 0.8i");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(count_lines(r.out), 101);  // header + 100 rows
    EXPECT_EQ(r.out.rfind("z_re,z_im,u_re,u_im,phi_re,phi_im,E1_re,E1_im,E2_re,E2_im,"
                          "wp_re,wp_im,pole_flag",
                          0),
              0u);
    // the z = 0 row is flagged, carries zeros, no NaNs anywhere
    EXPECT_NE(r.out.find("0,0,0.3,0,0,0,0,0,0,0,0,0,1"), std::string::npos);
    EXPECT_EQ(r.out.find("nan"), std::string::npos);
    EXPECT_EQ(r.out.find("inf"), std::string::npos);
}

TEST(Cli, TableMatchesLibraryPointValue) {
    // single point (z, u) = (0.2, 0.3): phi = 6.605502963032949...
    const auto r = run_cli("table --nx 5 --ny 5 --u 0.3 --tau 0.8i");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("0.2,0,0.3,0,6.6055"), std::string::npos);
}

TEST(Cli, GnuplotHint) {
    const auto r = run_cli("--gnuplot-hint table");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("gnuplot"), std::string::npos);
    EXPECT_NE(r.out.find("plot"), std::string::npos);
}
