// CLI tests: runs the real binary end to end — fit/sample/inspect round trip,
// config files, determinism, error exit codes, and experiment report output.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rctgan/cli/commands.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return RCTGAN_CLI_PATH; }

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = fs::temp_directory_path() / ("rctgan_cli_out_" +
                                                       std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(cli_path()) + " " + args + " >" + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    fs::remove(out);
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// tiny dataset + fast hyperparameters shared by the fit/sample tests
fs::path write_tiny_csv() {
    const fs::path p = fs::temp_directory_path() / "rctgan_cli_tiny.csv";
    std::ofstream f(p);
    f << "x,y,cls\n";
    rctgan::Rng rng(3);
    for (int i = 0; i < 60; ++i) {
        const bool fail = i % 4 == 0;
        f << (fail ? 5.0 + rng.normal() : rng.normal()) << ","
          << (fail ? -2.0 + rng.normal() : 2.0 + rng.normal()) << ","
          << (fail ? "bad" : "good") << "\n";
    }
    return p;
}

const char* kTinyGan =
    " --epochs 2 --batch-size 20 --pac 2 --noise-dim 8 --gen-width 16 --critic-width 16";

}  // namespace

TEST(Cli, HelpListsSubcommandsAndKeysWithDefaults) {
    RunResult top = run_cli("--help");
    EXPECT_EQ(top.exit_code, 0);
    for (const char* sub : {"fit", "sample", "evaluate", "experiment", "inspect"})
        EXPECT_NE(top.output.find(sub), std::string::npos) << sub;
    RunResult fit = run_cli("fit --help");
    EXPECT_EQ(fit.exit_code, 0);
    for (const char* key : {"--epochs", "--batch-size", "--pac", "--lr", "--gp-lambda",
                            "--gumbel-tau", "--seed", "--mode", "--config"})
        EXPECT_NE(fit.output.find(key), std::string::npos) << key;
    EXPECT_NE(fit.output.find("0.0002"), std::string::npos);  // lr default shown
}

TEST(Cli, NoSubcommandIsUsageError) {
    EXPECT_EQ(run_cli("").exit_code, rctgan::cli::kExitUsage);
    EXPECT_EQ(run_cli("fit").exit_code, rctgan::cli::kExitUsage);  // missing --data
}

TEST(Cli, FitSampleInspectRoundTrip) {
    const fs::path csv = write_tiny_csv();
    const fs::path dir1 = fs::temp_directory_path() / "rctgan_cli_run1";
    const fs::path dir2 = fs::temp_directory_path() / "rctgan_cli_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    const std::string common = std::string("fit --data ") + csv.string() +
                               " --target cls --seed 7" + kTinyGan;
    RunResult f1 = run_cli(common + " --out " + dir1.string());
    ASSERT_EQ(f1.exit_code, 0) << f1.output;
    EXPECT_TRUE(fs::exists(dir1 / "model.rctg"));
    EXPECT_TRUE(fs::exists(dir1 / "schema.txt"));
    EXPECT_TRUE(fs::exists(dir1 / "losses.csv"));
    EXPECT_NE(f1.output.find("final losses"), std::string::npos);

    // loss curve has the documented header and one line per step
    std::ifstream losses(dir1 / "losses.csv");
    std::string header;
    std::getline(losses, header);
    EXPECT_EQ(header, "step,loss_d,loss_c,loss_g,gp");

    // same seed -> byte-identical checkpoint
    RunResult f2 = run_cli(common + " --out " + dir2.string());
    ASSERT_EQ(f2.exit_code, 0);
    EXPECT_EQ(read_file(dir1 / "model.rctg"), read_file(dir2 / "model.rctg"));

    // sample: count 0 -> header-only CSV
    const fs::path synth = fs::temp_directory_path() / "rctgan_cli_synth.csv";
    RunResult s0 = run_cli("sample --ckpt " + (dir1 / "model.rctg").string() +
                           " --class bad --count 0 --out " + synth.string());
    ASSERT_EQ(s0.exit_code, 0) << s0.output;
    EXPECT_EQ(read_file(synth), "x,y,cls\n");

    // sampled rows all carry the requested class
    RunResult s1 = run_cli("sample --ckpt " + (dir1 / "model.rctg").string() +
                           " --class bad --count 5 --out " + synth.string());
    ASSERT_EQ(s1.exit_code, 0);
    std::ifstream sf(synth);
    std::string line;
    std::getline(sf, line);
    int rows = 0;
    while (std::getline(sf, line)) {
        EXPECT_EQ(line.substr(line.rfind(',') + 1), "bad");
        ++rows;
    }
    EXPECT_EQ(rows, 5);

    // unknown class -> data error
    EXPECT_EQ(run_cli("sample --ckpt " + (dir1 / "model.rctg").string() +
                      " --class nope --count 1")
                  .exit_code,
              rctgan::cli::kExitData);

    // inspect prints metadata
    RunResult ins = run_cli("inspect --ckpt " + (dir1 / "model.rctg").string());
    EXPECT_EQ(ins.exit_code, 0);
    EXPECT_NE(ins.output.find("version: 1"), std::string::npos);
    EXPECT_NE(ins.output.find("g.l0.w"), std::string::npos);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
    fs::remove(synth);
    fs::remove(csv);
}

TEST(Cli, CorruptCheckpointMagicIsRejected) {
    const fs::path bad = fs::temp_directory_path() / "rctgan_cli_bad.rctg";
    {
        std::ofstream f(bad, std::ios::binary);
        f << "XXXXnot a checkpoint";
    }
    RunResult r = run_cli("sample --ckpt " + bad.string() + " --class a --count 1");
    EXPECT_EQ(r.exit_code, rctgan::cli::kExitData);
    EXPECT_NE(r.output.find("bad checkpoint magic"), std::string::npos);
    fs::remove(bad);
}

TEST(Cli, MissingInputFileIsIoError) {
    RunResult r = run_cli("fit --data /no/such/file.csv --target cls");
    EXPECT_EQ(r.exit_code, rctgan::cli::kExitIo);
}

TEST(Cli, ConfigFileWithOverridesAndUnknownKeyRejection) {
    const fs::path csv = write_tiny_csv();
    const fs::path cfg = fs::temp_directory_path() / "rctgan_cli_cfg.txt";
    const fs::path dir = fs::temp_directory_path() / "rctgan_cli_cfgrun";
    fs::remove_all(dir);
    {
        std::ofstream f(cfg);
        f << "# tiny run\n";
        f << "data=" << csv.string() << "\n";
        f << "target=cls\n";
        f << "epochs=2\nbatch-size=20\npac=2\nnoise-dim=8\ngen-width=16\ncritic-width=16\n";
        f << "seed=5\n";
    }
    RunResult r = run_cli("fit --config " + cfg.string() + " --out " + dir.string() +
                          " --epochs 1");  // flag overrides file
    ASSERT_EQ(r.exit_code, 0) << r.output;
    std::ifstream losses(dir / "losses.csv");
    std::string line;
    int rows = -1;  // header
    while (std::getline(losses, line)) ++rows;
    EXPECT_EQ(rows, 1 * (60 / 20));  // 1 epoch x 3 steps, not 2 epochs

    {
        std::ofstream f(cfg, std::ios::app);
        f << "definitely-unknown-key=1\n";
    }
    RunResult bad = run_cli("fit --config " + cfg.string());
    EXPECT_EQ(bad.exit_code, rctgan::cli::kExitUsage);

    fs::remove_all(dir);
    fs::remove(cfg);
    fs::remove(csv);
}

TEST(Cli, ExperimentWritesReportsAndIsDeterministic) {
    const fs::path dir1 = fs::temp_directory_path() / "rctgan_cli_exp1";
    const fs::path dir2 = fs::temp_directory_path() / "rctgan_cli_exp2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const std::string common =
        "experiment --synthetic-benchmark --rows 630 --ratio 1:20 --seeds 2 --seed 7 "
        "--strategies none,smote --classifiers dt --jobs 2";
    RunResult r1 = run_cli(common + " --out " + dir1.string());
    ASSERT_EQ(r1.exit_code, 0) << r1.output;
    EXPECT_NE(r1.output.find("strategy"), std::string::npos);
    EXPECT_NE(r1.output.find("none"), std::string::npos);
    ASSERT_TRUE(fs::exists(dir1 / "report.csv"));
    ASSERT_TRUE(fs::exists(dir1 / "report.txt"));

    RunResult r2 = run_cli(common + " --out " + dir2.string());
    ASSERT_EQ(r2.exit_code, 0);
    EXPECT_EQ(read_file(dir1 / "report.csv"), read_file(dir2 / "report.csv"));

    const std::string csv = read_file(dir1 / "report.csv");
    EXPECT_NE(csv.find("strategy,classifier,seed,gmean,tp,fn,fp,tn,error"),
              std::string::npos);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST(Cli, ExitCodeMappingForModuleErrors) {
    using namespace rctgan;
    EXPECT_EQ(cli::exit_code_for(DataError("x")), cli::kExitData);
    EXPECT_EQ(cli::exit_code_for(TrainingDiverged("x")), cli::kExitDiverged);
    EXPECT_EQ(cli::exit_code_for(IoError("x")), cli::kExitIo);
    EXPECT_EQ(cli::parse_ratio("1:500"), 500);
    EXPECT_EQ(cli::parse_ratio("42"), 42);
    EXPECT_THROW(cli::parse_ratio("zebra"), DataError);
}
