#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zappa/cli.hpp"

using namespace zappa;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSmall = R"(profile = "parabolic"
kernel = "exponential"

[grid]
L = 400.0
Nx = 128
n_nodes = 8

[micro]
dt = 0.05
t_end = 2.0
output_times = [0.0, 1.0, 2.0]

[mc]
n_particles = 2000
seed = 7
t_outputs = [0.0, 1.0, 2.0, 3.0]
hist_x_bins = 8
hist_y_bins = 4

[macro]
method = "both"
)";

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "zappa");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("zappa_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.toml";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

}  // namespace

TEST(TomlLite, ParsesTheSupportedSubset) {
    const auto t = TomlLite::parse(R"(# header
a = 1
b = -2.5e1   # trailing comment
s = "x\ty"
lit = 'raw\n'
flag = true
arr = [1, 2,
       3,]
nested = [[1, 2], ["a"]]
[sec.sub]
k = "v"
dotted.key = 4
)");
    EXPECT_EQ(t["a"], 1);
    EXPECT_EQ(t["b"], -25.0);
    EXPECT_EQ(t["s"], "x\ty");
    EXPECT_EQ(t["lit"], "raw\\n");
    EXPECT_EQ(t["flag"], true);
    EXPECT_EQ(t["arr"], Json::parse("[1,2,3]"));
    EXPECT_EQ(t["nested"], Json::parse(R"([[1,2],["a"]])"));
    EXPECT_EQ(t["sec"]["sub"]["k"], "v");
    EXPECT_EQ(t["sec"]["sub"]["dotted"]["key"], 4);
}

TEST(TomlLite, ReportsErrorsWithLineNumbers) {
    for (const char* bad : {"a = 1\na = 2\n", "a = \"open\n", "a = 1 2\n", "a = 1.2.3\n", "x = {a = 1}\n",
                            "[t\n", "= 3\n", "a = [1 2]\n"}) {
        EXPECT_THROW(TomlLite::parse(bad), ConfigError) << bad;
    }
    try {
        TomlLite::parse("a = 1\n\nb = nope\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(RunConfig, PresetMatchesTheShippedConfigFile) {
    const auto preset = RunConfig::from_text(kPaperPreset);
    const auto file = RunConfig::from_file(std::string(ZAPPA_SOURCE_DIR) + "/configs/paper.toml");
    EXPECT_EQ(preset, file);
    EXPECT_EQ(preset.hash(), file.hash());
    EXPECT_EQ(preset.mc.seed, 20190417u);
    EXPECT_EQ(preset.grid.Nx, 1024);
    EXPECT_EQ(preset.mc.hist_x_bins, 64u);
}

TEST(RunConfig, TomlRoundTripIsLossless) {
    RunConfig cfg = RunConfig::from_text(kSmall);
    cfg.profile.kind = "poly";
    cfg.profile.coeffs = {Rational(3, 2), Rational(1, 2)};
    cfg.mc.initial_y = 0.25;
    cfg.micro.ic = "ypoly";
    cfg.micro.ic_coeffs = {1, 0, Rational(-1, 7)};
    const auto back = RunConfig::from_text(cfg.to_toml());
    EXPECT_EQ(back, cfg);
    EXPECT_EQ(back.profile.coeffs[0], Rational(3, 2));
    EXPECT_EQ(*back.mc.initial_y, 0.25);
}

TEST(RunConfig, UnknownKeysAreNamed) {
    try {
        RunConfig::from_text("[grid]\nNx = 64\nnx = 32\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("grid.nx"), std::string::npos) << e.what();
    }
    EXPECT_THROW(RunConfig::from_text("colour = 1\n"), ConfigError);
    EXPECT_THROW(RunConfig::from_text("[grid]\nboundary = \"open\"\n"), ConfigError);
}

TEST(RunConfig, RationalValuesAcceptStringsAndNumbers) {
    const auto a = RunConfig::from_text("profile = \"constant\"\nc = \"3/2\"\n");
    EXPECT_EQ(a.profile.c, Rational(3, 2));
    const auto b = RunConfig::from_text("profile = \"constant\"\nc = 1.5\n");
    EXPECT_EQ(b.profile.c, Rational(3, 2));
    const auto p = RunConfig::from_text("profile = \"poly\"\ncoeffs = [\"1/3\", 0, 2]\n");
    EXPECT_EQ(p.profile.coeffs, (std::vector<Rational>{Rational(1, 3), 0, 2}));
    EXPECT_THROW(RunConfig::from_text("profile = \"constant\"\nc = \"1/0\"\n"), Error);
}

TEST(RunConfig, OverridesPatchTheTree) {
    Json tree = TomlLite::parse(kSmall);
    apply_override(tree, "grid.Nx=256");
    apply_override(tree, "derive.order=3");
    apply_override(tree, "micro.output_times=[0.0, 2.0]");
    const auto cfg = RunConfig::from_tree(tree);
    EXPECT_EQ(cfg.grid.Nx, 256);
    EXPECT_EQ(cfg.derive.order, 3);
    EXPECT_EQ(cfg.micro.output_times, (std::vector<double>{0.0, 2.0}));
    EXPECT_THROW(apply_override(tree, "grid.Nx"), ConfigError);
}

TEST(Cli, DeriveWritesExactCoefficients) {
    const auto dir = scratch("derive");
    const auto r = run({"derive", "--preset", "paper", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = read_json(dir / "derive.json");
    EXPECT_EQ(doc["coefficients"]["A1"], "-2/3");
    EXPECT_EQ(doc["coefficients"]["A2"], "28/45");
    EXPECT_EQ(doc["V"][1]["poly"], "y^2 - 1/3");
    EXPECT_EQ(doc["V"][2]["poly"], "2*y^4 - 8/3*y^2 + 22/45");
    EXPECT_EQ(doc["exact"], true);
    EXPECT_EQ(doc["extension"], false);
    EXPECT_EQ(doc["seed"], 20190417u);
    EXPECT_EQ(RunConfig::from_tree(doc["config"]), RunConfig::from_text(kPaperPreset));
}

TEST(Cli, DeriveForAConstantProfileAndFirstOrder) {
    const auto dir = scratch("derive_const");
    auto r = run({"derive", "--preset", "paper", "--set", "profile=\"constant\"", "c=1", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = read_json(dir / "derive.json");
    EXPECT_EQ(doc["coefficients"]["A1"], "-1");
    EXPECT_EQ(doc["coefficients"]["A2"], "1");

    r = run({"derive", "--preset", "paper", "--set", "derive.order=1", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    doc = read_json(dir / "derive.json");
    EXPECT_EQ(doc["coefficients"].size(), 1u);
    EXPECT_EQ(doc["coefficients"]["A1"], "-2/3");
}

TEST(Cli, ConfigProblemsExitWithUsage) {
    auto r = run({"derive", "/nonexistent/zappa.toml"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cannot open"), std::string::npos);
    EXPECT_NE(r.err.find("--preset"), std::string::npos);

    const auto dir = scratch("badkey");
    r = run({"micro", write_config(dir, "[micro]\ndtt = 0.1\n").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("micro.dtt"), std::string::npos) << r.err;

    EXPECT_EQ(run({"derive"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndThreadCounts) {
    const auto base = scratch("determinism");
    const auto cfg = write_config(base, kSmall);
    const auto a = base / "a", b = base / "b";
    ASSERT_EQ(run({"all", cfg.string(), "--out", a.string(), "-j", "1"}).code, 0);
    ASSERT_EQ(run({"all", cfg.string(), "--out", b.string(), "-j", "3"}).code, 0);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        ASSERT_TRUE(fs::exists(b / name)) << name;
        EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
        ++files;
    }
    EXPECT_GE(files, 15u);
}

TEST(Cli, EveryOutputCarriesTheConfigAndHash) {
    const auto base = scratch("headers");
    const auto cfg = write_config(base, kSmall);
    const auto out = base / "out";
    ASSERT_EQ(run({"all", cfg.string(), "--out", out.string()}).code, 0);
    const auto manifest = read_json(out / "MANIFEST.json");
    const std::string hash = manifest["config_hash"];
    EXPECT_EQ(manifest["status"], "ok");
    for (const auto& stage : manifest["stages"]) {
        EXPECT_EQ(stage["status"], "ok") << stage.dump();
        for (const auto& f : stage["files"]) {
            const std::string name = f;
            if (name.ends_with(".json")) {
                const auto doc = read_json(out / name);
                EXPECT_EQ(doc["config_hash"], hash) << name;
                EXPECT_EQ(RunConfig::from_tree(doc["config"]), RunConfig::from_text(kSmall)) << name;
            } else {
                const auto text = slurp(out / name);
                EXPECT_EQ(text.substr(0, text.find('\n')), "# zappa config_hash=" + hash + " seed=7") << name;
            }
        }
    }
    // snapshot values are written with 17 significant digits
    std::istringstream snap(slurp(out / "micro_snapshots.csv"));
    std::string line;
    std::getline(snap, line);
    std::getline(snap, line);
    EXPECT_EQ(line, "t,x,y,u");
    std::getline(snap, line);
    const std::string u = line.substr(line.rfind(',') + 1);
    EXPECT_EQ(u, format_17(std::stod(u)));
    const auto mc = read_json(out / "mc_summary.json");
    EXPECT_TRUE(mc.contains("fit"));
    EXPECT_TRUE(fs::exists(out / "macro_fd.csv"));
}

TEST(Cli, OutputDirectoryFallsBackToTheEnvironment) {
    const auto base = scratch("env");
    const auto target = base / "from_env";
    ::setenv(kOutputDirEnv, target.string().c_str(), 1);
    const auto r = run({"derive", "--preset", "paper"});
    ::unsetenv(kOutputDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(target / "derive.json"));
}

TEST(Cli, AllRecordsAFailedStageAndKeepsPartialOutputs) {
    const auto base = scratch("partial");
    const auto cfg = write_config(base, std::string(kSmall) + "\n[grid2]\n");
    // an unknown table is a config error before anything runs
    EXPECT_EQ(run({"all", cfg.string(), "--out", (base / "x").string()}).code, 2);
    EXPECT_FALSE(fs::exists(base / "x"));

    const auto good = write_config(base, kSmall);
    const auto out = base / "out";
    const auto r = run({"all", good.string(), "--out", out.string(), "--set", "grid.boundary=\"inflow-zero\""});
    EXPECT_EQ(r.code, 2);
    const auto manifest = read_json(out / "MANIFEST.json");
    EXPECT_EQ(manifest["status"], "failed");
    std::map<std::string, std::string> status;
    for (const auto& s : manifest["stages"]) status[s["stage"]] = s["status"];
    EXPECT_EQ(status["derive"], "ok");
    EXPECT_EQ(status["micro"], "ok");
    EXPECT_EQ(status["residual"], "failed");
    EXPECT_EQ(status["compare"], "skipped");
    EXPECT_TRUE(fs::exists(out / "derive.json"));
    EXPECT_TRUE(fs::exists(out / "micro_summary.json"));
    EXPECT_FALSE(fs::exists(out / "compare.json"));
}

TEST(Cli, ShowConfigPrintsTheCanonicalForm) {
    const auto r = run({"show-config", "--preset", "paper", "--set", "grid.Nx=2048"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto cfg = RunConfig::from_text(r.out);
    EXPECT_EQ(cfg.grid.Nx, 2048);
    cfg.grid.Nx = 1024;
    EXPECT_EQ(cfg, RunConfig::from_text(kPaperPreset));
}

TEST(Cli, NumericalFailureMapsToExitCodeOne) {
    EXPECT_EQ(cli_detail::exit_code_for(NumericalFailure("x")), 1);
    EXPECT_EQ(cli_detail::exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(cli_detail::exit_code_for(InvalidArgument("x")), 2);
    EXPECT_EQ(cli_detail::exit_code_for(std::runtime_error("x")), 1);
}
