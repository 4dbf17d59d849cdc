// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Criteria 8-10 share a single desk-scale experiment run; criterion 11 runs
// the CLI binary twice and compares report bytes.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rctgan/bench/experiment.hpp"
#include "rctgan/cli/commands.hpp"
#include "test_util.hpp"

using namespace rctgan;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    const char* name;
    bool passed = false;
    ~Criterion() {
        std::printf("[ACCEPT] criterion %2d (%s): %s\n", id, name,
                    passed ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
};

// Schema with encoded width 69 and a 2-category target (cond width 2).
TableSchema paper_shape_schema() {
    TableSchema s;
    auto cont = [](const std::string& name, int k) {
        ColumnMeta c;
        c.name = name;
        c.kind = ColKind::continuous;
        for (int i = 0; i < k; ++i) c.modes.push_back({1.0 / k, i * 10.0, 1.0});
        return c;
    };
    s.columns.push_back(cont("c0", 10));
    for (int i = 1; i <= 6; ++i) s.columns.push_back(cont("c" + std::to_string(i), 5));
    for (int i = 7; i <= 10; ++i) s.columns.push_back(cont("c" + std::to_string(i), 4));
    ColumnMeta target;
    target.name = "failure";
    target.kind = ColKind::discrete;
    target.categories = {"normal", "failure"};
    target.frequencies = {0.99, 0.01};
    s.columns.push_back(target);
    s.target_column = "failure";
    return s;
}

// Shared desk-scale experiment for criteria 8, 9, 10 (run once).
struct DeskRun {
    ExperimentReport report;
    double wall_seconds = 0.0;
    ExperimentConfig config;

    static const DeskRun& get() {
        static DeskRun run = [] {
            DeskRun r;
            ExperimentConfig cfg;
            cfg.synthetic = true;
            cfg.bench.rows = 5050;
            cfg.bench.ratio = 100;
            cfg.bench.n_continuous = 8;
            cfg.bench.separation = 2.4;
            cfg.split.ratio = 100;
            cfg.n_seeds = 5;
            cfg.seed = 7;
            cfg.gan.epochs = 80;
            cfg.gan.batch_size = 250;
            cfg.gan.ema_decay = 0.998;
            cfg.jobs = 2;
            cfg.out_dir = (fs::temp_directory_path() / "rctgan_acceptance").string();
            r.config = cfg;
            const auto t0 = std::chrono::steady_clock::now();
            r.report = run_experiment(cfg);
            r.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            return r;
        }();
        return run;
    }
};

}  // namespace

// 1. Reverse-mode gradients match central finite differences: every op, and
//    each full network at random init on >= 20 random parameter coordinates.
TEST(Acceptance, C01_GradientCorrectness) {
    Criterion c{1, "gradient correctness vs finite differences"};
    const auto t0 = std::chrono::steady_clock::now();

    for (const auto& f : testutil::all_op_grad_failures()) ADD_FAILURE() << f;

    TableSchema schema = paper_shape_schema();
    GanConfig cfg;
    CondSpace cond = CondSpace::from(schema);
    struct Case {
        const char* name;
        Network net;
        int batch;
    };
    std::vector<Case> cases;
    cases.push_back({"generator", build_generator(schema, cond, cfg), 8});
    cases.push_back({"critic", build_critic(schema, cond, cfg), 4});
    cases.push_back({"classifier", build_classifier(schema, cfg), 12});

    bool all_ok = true;
    Rng seed_rng(2024);
    for (auto& cs : cases) {
        ParamSet params;
        Rng init_rng(101);
        init_params(cs.net, params, init_rng);
        Rng data_rng(55);
        Tensor2 x = testutil::random_tensor(data_rng, cs.batch, cs.net.input_dim, -1.0, 1.0);
        Tensor2 weight =
            testutil::random_tensor(data_rng, cs.batch, cs.net.output_dim, 0.2, 1.3);

        auto loss_value = [&] {
            Tape t(TapeMode::training);
            BoundNet b = bind(cs.net, params, t, true);
            Rng drop_rng(7);  // frozen dropout masks across evals
            ForwardTrace tr = forward(b, t.leaf(x), &drop_rng);
            return t.scalar(t.sum_all(t.mask_mul(tr.output, weight)));
        };

        Tape t(TapeMode::training);
        BoundNet b = bind(cs.net, params, t, true);
        Rng drop_rng(7);
        ForwardTrace tr = forward(b, t.leaf(x), &drop_rng);
        t.backward(t.sum_all(t.mask_mul(tr.output, weight)));
        GradMap grads = collect_grads(b);

        int checked = 0;
        while (checked < 20) {
            auto& block = params.blocks()[seed_rng.uniform_int(
                static_cast<int>(params.blocks().size()))];
            if (!block.trainable) continue;
            const int i = seed_rng.uniform_int(block.value.rows());
            const int j = seed_rng.uniform_int(block.value.cols());
            const double ad = grads.at(block.name)(i, j);
            const double fd = testutil::fd_entry(loss_value, block.value, i, j);
            const bool ok = testutil::close(ad, fd, 1e-4, 1e-8);
            EXPECT_TRUE(ok) << cs.name << " " << block.name << "(" << i << "," << j
                            << ") ad=" << ad << " fd=" << fd;
            all_ok = all_ok && ok;
            ++checked;
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 60.0);
    c.passed = all_ok && secs < 60.0 && !::testing::Test::HasFailure();
}

// 2. Gradient-penalty closed form for a linear critic.
TEST(Acceptance, C02_GradientPenaltyOracle) {
    Criterion c{2, "gradient penalty closed form (|w|=3 -> 40, |w|=1 -> 0)"};
    Rng rng(5);
    Tensor2 real = rng.normal_matrix(6, 4);
    Tensor2 fake = rng.normal_matrix(6, 4);
    auto penalty_for = [&](double scale) {
        Network net = make_network("d", 4, {linear_layer(4, 1)});
        ParamSet ps;
        Tensor2 w(1, 4);
        w(0, 0) = scale;
        ps.add("d.l0.w", w);
        ps.add("d.l0.b", Tensor2(1, 1));
        Tape t(TapeMode::training);
        BoundNet b = bind(net, ps, t, true);
        Rng gp_rng(9);
        return t.scalar(gradient_penalty(t, b, real, fake, 10.0, gp_rng));
    };
    EXPECT_NEAR(penalty_for(3.0), 40.0, 1e-6);
    EXPECT_NEAR(penalty_for(1.0), 0.0, 1e-9);
    c.passed = std::abs(penalty_for(3.0) - 40.0) <= 1e-6 &&
               std::abs(penalty_for(1.0)) <= 1e-9;
}

// 3. Table-3 shape reproduction: 130->386->642->69, 710->966->1222->1, clf 3.
TEST(Acceptance, C03_ShapeReproduction) {
    Criterion c{3, "network shape reproduction (130/386/642/69, 710/966/1222/1, 3)"};
    TableSchema s = paper_shape_schema();
    GanConfig cfg;  // paper defaults: noise 128, pac 10, widths 256
    CondSpace cond = CondSpace::from(s);
    bool ok = s.encoded_width() == 69 && cond.width == 2;

    Network gen = build_generator(s, cond, cfg);
    ok = ok && gen.input_dim == 130 && gen.layers[3].out_dim == 386 &&
         gen.layers[7].out_dim == 642 && gen.output_dim == 69;

    Network critic = build_critic(s, cond, cfg);
    ok = ok && critic.input_dim == 710 && critic.layers[3].out_dim == 966 &&
         critic.layers[7].out_dim == 1222 && critic.output_dim == 1;

    Network clf = build_classifier(s, cfg);
    ok = ok && clf.input_dim == 69 && clf.layers[0].out_dim == 256 &&
         clf.layers[3].out_dim == 128 && clf.output_dim == 3;

    // parameter blocks materialize at the same dims
    ParamSet ps;
    Rng rng(1);
    init_params(critic, ps, rng);
    ok = ok && ps.at("d.l0.w").rows() == 256 && ps.at("d.l0.w").cols() == 710 &&
         ps.at("d.l4.w").cols() == 966 && ps.at("d.l8.w").cols() == 1222;
    EXPECT_TRUE(ok);
    c.passed = ok;
}

// 4. Codec round trip on 1,000 random mixed-type rows.
TEST(Acceptance, C04_CodecRoundTrip) {
    Criterion c{4, "encode/decode round trip on 1,000 mixed rows"};
    Rng rng(11);
    Table t;
    t.names = {"bimodal", "uniform", "heavy", "sensor", "cls"};
    t.kinds = {ColKind::continuous, ColKind::continuous, ColKind::continuous,
               ColKind::discrete, ColKind::discrete};
    for (int i = 0; i < 1000; ++i) {
        const bool fail = i % 7 == 0;
        const double bimodal = i % 2 == 0 ? 5.0 + rng.normal() : 60.0 + 2.0 * rng.normal();
        const double uniform = rng.uniform(10.0, 20.0);
        const double heavy = 3.0 + std::exp(rng.normal());
        t.rows.push_back({Cell(bimodal), Cell(uniform), Cell(heavy),
                          Cell(std::string(i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c"))),
                          Cell(std::string(fail ? "failure" : "normal"))});
    }
    TableSchema schema = fit_schema(t, "cls");
    EncodedMatrix enc = encode(t, schema, rng);
    Table back = decode(enc, schema);
    bool ok = true;
    for (size_t r = 0; r < t.n_rows(); ++r) {
        for (int col = 0; col < 3; ++col)
            ok = ok && testutil::rel_err(num(back.rows[r][col]), num(t.rows[r][col])) <= 1e-9;
        ok = ok && str(back.rows[r][3]) == str(t.rows[r][3]);
        ok = ok && str(back.rows[r][4]) == str(t.rows[r][4]);
    }
    EXPECT_TRUE(ok);
    c.passed = ok;
}

// 5. Training-by-sampling matches the closed-form log-frequency weights.
TEST(Acceptance, C05_TrainingBySamplingDistribution) {
    Criterion c{5, "log-frequency condition sampling within 2% over 1e5 draws"};
    TableSchema s;
    ColumnMeta disc;
    disc.name = "cls";
    disc.kind = ColKind::discrete;
    disc.categories = {"major", "minor"};
    disc.frequencies = {0.99, 0.01};
    s.columns = {disc};
    s.target_column = "cls";
    Rng rng(8);
    const int draws = 100000;
    int counts[2] = {0, 0};
    for (int i = 0; i < draws; ++i) ++counts[sample_condition(s, rng).category];
    const double w_major = std::log1p(0.99), w_minor = std::log1p(0.01);
    const double e_minor = w_minor / (w_major + w_minor);
    const double e_major = w_major / (w_major + w_minor);
    const double r_minor = static_cast<double>(counts[1]) / draws;
    const double r_major = static_cast<double>(counts[0]) / draws;
    EXPECT_LE(testutil::rel_err(r_minor, e_minor), 0.02);
    EXPECT_LE(testutil::rel_err(r_major, e_major), 0.02);
    c.passed = testutil::rel_err(r_minor, e_minor) <= 0.02 &&
               testutil::rel_err(r_major, e_major) <= 0.02;
}

// 6. build_dataset reproduces Table 1 exactly.
TEST(Acceptance, C06_DatasetCounts) {
    Criterion c{6, "Table 1 split counts at ratios 1:100 and 1:500"};
    Table pool;
    pool.names = {"v", "cls"};
    pool.kinds = {ColKind::continuous, ColKind::discrete};
    for (int i = 0; i < 218; ++i)
        pool.rows.push_back({Cell(static_cast<double>(i)), Cell(std::string("failure"))});
    for (int i = 0; i < 120000; ++i)
        pool.rows.push_back({Cell(1000.0 + i), Cell(std::string("normal"))});
    Rng r1(1), r2(2);
    DataSplit a = build_dataset(pool, "cls", "failure", {0.8, 100}, r1);
    DataSplit b = build_dataset(pool, "cls", "failure", {0.8, 500}, r2);
    const bool ok = a.counts.fail_train == 174 && a.counts.norm_train == 17400 &&
                    a.counts.fail_test == 44 && a.counts.norm_test == 4400 &&
                    b.counts.fail_train == 174 && b.counts.norm_train == 87000 &&
                    b.counts.fail_test == 44 && b.counts.norm_test == 22000;
    EXPECT_TRUE(ok);
    c.passed = ok;
}

// 7. G-mean unit oracle.
TEST(Acceptance, C07_GMeanOracle) {
    Criterion c{7, "G-mean oracle incl. sqrt(0.9) ~ 0.948683"};
    const bool ok = g_mean({44, 0, 0, 4400}) == 1.0 && g_mean({0, 10, 5, 100}) == 0.0 &&
                    std::abs(g_mean({40, 4, 44, 4356}) - 0.948683) <= 1e-6;
    EXPECT_TRUE(ok);
    c.passed = ok;
}

// 8. Desk-scale end-to-end: median DT G-mean, rctgan >= none + 0.10, < 15 min.
TEST(Acceptance, C08_DeskScaleEndToEnd) {
    Criterion c{8, "desk-scale DT median: rctgan >= none + 0.10, < 15 min"};
    const DeskRun& run = DeskRun::get();
    const double none = run.report.median(Strategy::none, ClassifierKind::dt);
    const double rct = run.report.median(Strategy::rctgan, ClassifierKind::dt);
    std::printf("  DT medians: none %.4f, smote %.4f, ctgan %.4f, rctgan %.4f  (wall %.0fs)\n",
                none, run.report.median(Strategy::smote, ClassifierKind::dt),
                run.report.median(Strategy::ctgan, ClassifierKind::dt), rct,
                run.wall_seconds);
    EXPECT_FALSE(std::isnan(none));
    EXPECT_FALSE(std::isnan(rct));
    EXPECT_GE(rct - none, 0.10);
    EXPECT_LT(run.wall_seconds, 900.0);
    c.passed = !std::isnan(none) && !std::isnan(rct) && rct - none >= 0.10 &&
               run.wall_seconds < 900.0;
}

// 9. Training stability: mean |critic loss| over the final 20% of steps < 1.0
//    for >= 4 of 5 rctgan seeds; failures reported with their loss curves.
TEST(Acceptance, C09_TrainingStability) {
    Criterion c{9, "critic loss tail |mean| < 1.0 for >= 4/5 seeds"};
    const DeskRun& run = DeskRun::get();
    int stable = 0, total = 0;
    for (const auto& log : run.report.gan_logs) {
        if (log.strategy != Strategy::rctgan) continue;
        ++total;
        double tail = 0.0;
        int n = 0;
        for (size_t i = log.steps.size() * 4 / 5; i < log.steps.size(); ++i) {
            tail += std::abs(log.steps[i].loss_d);
            ++n;
        }
        const double mean_abs = tail / std::max(n, 1);
        std::printf("  rctgan seed %d: mean |loss_d| over final 20%% = %.4f\n",
                    log.seed_index, mean_abs);
        if (mean_abs < 1.0) {
            ++stable;
        } else {
            std::printf("  UNSTABLE seed %d loss curve (step, loss_d):\n", log.seed_index);
            for (size_t i = 0; i < log.steps.size(); i += std::max<size_t>(1, log.steps.size() / 40))
                std::printf("    %zu,%.4f\n", i, log.steps[i].loss_d);
        }
    }
    EXPECT_EQ(total, 5);
    EXPECT_GE(stable, 4);
    c.passed = total == 5 && stable >= 4;
}

// 10. The report carries rctgan and ctgan side by side with per-seed values
//     and medians (no ordering gate).
TEST(Acceptance, C10_SideBySideReport) {
    Criterion c{10, "rctgan-vs-ctgan report with per-seed values and medians"};
    const DeskRun& run = DeskRun::get();
    const std::string csv = run.report.to_csv();
    bool ok = true;
    for (const char* strat : {"ctgan", "rctgan"})
        for (int seed = 0; seed < 5; ++seed)
            ok = ok && csv.find(std::string(strat) + ",dt," + std::to_string(seed) + ",") !=
                           std::string::npos;
    const std::string table = run.report.to_table_text();
    ok = ok && table.find("ctgan") != std::string::npos &&
         table.find("rctgan") != std::string::npos;
    ok = ok && !std::isnan(run.report.median(Strategy::ctgan, ClassifierKind::dt)) &&
         !std::isnan(run.report.median(Strategy::rctgan, ClassifierKind::dt));
    std::printf("%s", table.c_str());
    EXPECT_TRUE(ok);
    c.passed = ok;
}

// 11. Byte-identical report CSVs across two CLI executions with --seed 7.
TEST(Acceptance, C11_CliDeterminism) {
    Criterion c{11, "byte-identical report.csv across two CLI runs"};
    const fs::path dir1 = fs::temp_directory_path() / "rctgan_accept_cli1";
    const fs::path dir2 = fs::temp_directory_path() / "rctgan_accept_cli2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const std::string base =
        std::string(RCTGAN_CLI_PATH) +
        " experiment --synthetic-benchmark --seed 7 --rows 1010 --ratio 1:20 --seeds 2 "
        "--epochs 3 --batch-size 50 --pac 5 --noise-dim 16 --gen-width 32 "
        "--critic-width 32 --mlp-epochs 10 --rf-trees 9 --jobs 2 --out ";
    const int rc1 = std::system((base + dir1.string() + " >/dev/null 2>&1").c_str());
    const int rc2 = std::system((base + dir2.string() + " >/dev/null 2>&1").c_str());
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string a = read_file(dir1 / "report.csv");
    const std::string b = read_file(dir2 / "report.csv");
    const bool ok = WEXITSTATUS(rc1) == 0 && WEXITSTATUS(rc2) == 0 && !a.empty() && a == b;
    EXPECT_EQ(WEXITSTATUS(rc1), 0);
    EXPECT_EQ(WEXITSTATUS(rc2), 0);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    c.passed = ok;
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}
