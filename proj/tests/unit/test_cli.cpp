#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#ifdef FEHMM_CLI_PATH

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string err;
    std::string out;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("fehmm_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::string& args) {
    const auto out = scratch_dir() / "stdout.txt";
    const auto err = scratch_dir() / "stderr.txt";
    const std::string cmd =
        std::string(FEHMM_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

const char* kExample2 = R"J({
  "problem": {"example": "cli", "epsilon": 0.001, "coefficient": {"expr": "1/(2 - cos(2*pi*y))", "bounds": [0.3333333333333333, 1]},
              "rhs": "2*t*(x - x^2) + t^2", "exact_solution": "t^2*(x - x^2)"},
  "macro": {"n_elems": 4, "n_steps": 3},
  "micro": {"n_h": 64, "n_cell": 4},
  "oracle": {"n_y": 64, "n_s": 8}
})J";

}  // namespace

TEST(Cli, MissingConfigExitsOneWithPath) {
    const auto r = run("solve --config /no/such/file.json -o " + (scratch_dir() / "x").string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("/no/such/file.json"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").status, 1);
    EXPECT_EQ(run("frobnicate").status, 1);
    EXPECT_EQ(run("solve").status, 1);
    EXPECT_EQ(run("preset no-such-preset -o " + (scratch_dir() / "p").string()).status, 1);
}

TEST(Cli, InvalidConfigExitsOne) {
    const auto cfg = write_config("bad.json", R"J({"problem": {"epsilon": -1, "coefficient": "1"}, "extra": 1})J");
    const auto r = run("solve -c " + cfg.string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("problem.epsilon"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("$.extra"), std::string::npos) << r.err;
}

TEST(Cli, NumericalFailureExitsTwo) {
    // Declared bounds exclude the true range, so the cell assembly check fails.
    const auto cfg = write_config("num.json", R"J({
      "problem": {"epsilon": 0.01, "coefficient": {"expr": "1/(2 - cos(2*pi*y))", "bounds": [0.9, 1]}},
      "macro": {"n_elems": 4, "n_steps": 2},
      "micro": {"n_h": 32, "n_cell": 4}
    })J");
    EXPECT_EQ(run("solve -q -c " + cfg.string() + " -o " + (scratch_dir() / "num").string()).status, 2);
}

TEST(Cli, HomogenizePrintsOracle) {
    const auto cfg = write_config("ex2.json", kExample2);
    const auto r = run("homogenize -c " + cfg.string() + " -o " + (scratch_dir() / "hom").string());
    ASSERT_EQ(r.status, 0) << r.err;
    const auto at = r.out.find("a0_oracle ");
    ASSERT_NE(at, std::string::npos) << r.out;
    EXPECT_NEAR(std::stod(r.out.substr(at + 10)), 0.5, 1e-4);
    EXPECT_NE(r.out.find("harmonic_mean"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(scratch_dir() / "hom" / "manifest.json"));
}

TEST(Cli, SolveWritesTrajectoryAndManifest) {
    const auto cfg = write_config("ex2.json", kExample2);
    const auto dir = scratch_dir() / "solve";
    const auto r = run("solve -q -c " + cfg.string() + " -o " + dir.string());
    ASSERT_EQ(r.status, 0) << r.err;
    const std::string csv = slurp(dir / "trajectory.csv");
    EXPECT_EQ(csv.rfind("n,t_n,node_index,x,u\n", 0), 0u);
    EXPECT_NE(slurp(dir / "summary.json").find("err_l2"), std::string::npos);
    // re-running from the manifest reproduces the CSV byte for byte
    const auto dir2 = scratch_dir() / "solve2";
    ASSERT_EQ(run("solve -q -c " + (dir / "manifest.json").string() + " -o " + dir2.string()).status, 0);
    EXPECT_EQ(slurp(dir2 / "trajectory.csv"), csv);
}

TEST(Cli, CellDumpsCsv) {
    const auto cfg = write_config("ex2.json", kExample2);
    const auto dir = scratch_dir() / "cell";
    ASSERT_EQ(run("cell -c " + cfg.string() + " -o " + dir.string()).status, 0);
    EXPECT_EQ(slurp(dir / "cell.csv").rfind("k,s_k,dof_index,x,eta_value\n", 0), 0u);
}

TEST(Cli, PresetWriteConfig) {
    const auto dir = scratch_dir() / "preset";
    const auto r = run("preset paper-example-2 --write-config -o " + dir.string());
    ASSERT_EQ(r.status, 0) << r.err;
    const std::string m = slurp(dir / "manifest.json");
    EXPECT_NE(m.find("\"epsilon\": 0.001"), std::string::npos);
    EXPECT_NE(m.find("\"resolved\""), std::string::npos);
}

#endif
