#pragma once
// Command implementations behind the CLI: fit, sample, evaluate, experiment,
// inspect. Every file output goes through the atomic temp+rename writer.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 training divergence, 4 I/O.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "rctgan/bench/experiment.hpp"
#include "rctgan/codec/csv.hpp"
#include "rctgan/gan/checkpoint.hpp"
#include "rctgan/gan/train.hpp"

namespace rctgan::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const TrainingDiverged*>(&e)) return kExitDiverged;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    return kExitData;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// "1:100" or "100" -> 100
inline int parse_ratio(const std::string& s) {
    const auto colon = s.find(':');
    const std::string tail = colon == std::string::npos ? s : s.substr(colon + 1);
    try {
        const int r = std::stoi(tail);
        if (r <= 0) throw DataError("ratio must be positive");
        return r;
    } catch (const std::logic_error&) {
        throw DataError("cannot parse ratio '" + s + "'");
    }
}

struct DataOptions {
    std::string data_path;
    std::string layout = "generic";
    std::string target;
    std::string model_filter = "ST4000DM000";
};

inline Table load_table(const DataOptions& d) {
    const CsvLayout layout =
        d.layout == "backblaze" ? CsvLayout::backblaze : CsvLayout::generic;
    CsvOptions opt;
    opt.target = d.target;
    opt.model_filter = d.model_filter;
    CsvResult res = load_csv(d.data_path, layout, opt);
    if (res.skipped_rows > 0)
        std::cerr << "warning: skipped " << res.skipped_rows
                  << " rows with unparsable numeric cells\n";
    if (res.table.n_rows() == 0) throw DataError("no rows loaded from " + d.data_path);
    return res.table;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOptions {
    DataOptions data;
    GanConfig gan;
    uint64_t seed = 0;
    int max_modes = 10;
    std::string out_dir = "run";
};

inline int cmd_fit(const FitOptions& opt) {
    return guarded([&] {
        Table rows = load_table(opt.data);
        const std::string target =
            opt.data.layout == "backblaze" ? "failure" : opt.data.target;
        TableSchema schema = fit_schema(rows, target, opt.max_modes);
        for (const auto& c : schema.columns)
            if (c.kind == ColKind::continuous && !c.em_converged)
                std::cerr << "warning: EM did not converge for column '" << c.name
                          << "', fell back to a single mode\n";

        std::filesystem::create_directories(opt.out_dir);
        std::ostringstream losses;
        losses << "step,loss_d,loss_c,loss_g,gp\n";
        StepMetrics last{};
        char buf[160];
        Checkpoint ck = fit(rows, schema, opt.gan, opt.seed,
                            [&](int step, const StepMetrics& sm) {
                                std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f\n",
                                              step, sm.loss_d, sm.loss_c, sm.loss_g, sm.gp);
                                losses << buf;
                                last = sm;
                            });

        namespace fs = std::filesystem;
        save_checkpoint(ck, (fs::path(opt.out_dir) / "model.rctg").string());
        write_file_atomic((fs::path(opt.out_dir) / "schema.txt").string(), ck.schema_text);
        write_file_atomic((fs::path(opt.out_dir) / "losses.csv").string(), losses.str());
        std::printf("wrote %s/model.rctg (%zu blocks)\n", opt.out_dir.c_str(),
                    ck.blocks.size());
        std::printf("final losses: loss_d %.6f loss_c %.6f loss_g %.6f gp %.6f\n",
                    last.loss_d, last.loss_c, last.loss_g, last.gp);
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleOptions {
    std::string ckpt_path;
    std::string cls;
    int count = 0;
    uint64_t seed = 0;
    std::string out_path;  // empty -> stdout
};

inline int cmd_sample(const SampleOptions& opt) {
    return guarded([&] {
        Checkpoint ck = load_checkpoint(opt.ckpt_path);
        GanModel model = model_from_checkpoint(ck);
        Rng rng(opt.seed);
        Table rows = sample_rows(model, opt.cls, opt.count, rng);
        std::ostringstream os;
        write_csv(os, rows);
        if (opt.out_path.empty()) {
            std::cout << os.str();
        } else {
            write_file_atomic(opt.out_path, os.str());
            std::printf("wrote %d rows to %s\n", opt.count, opt.out_path.c_str());
        }
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

inline int cmd_inspect(const std::string& ckpt_path) {
    return guarded([&] {
        Checkpoint ck = load_checkpoint(ckpt_path);
        std::printf("checkpoint %s\n", ckpt_path.c_str());
        std::printf("  version: %u\n", ck.version);
        std::printf("  seed: %llu\n", static_cast<unsigned long long>(ck.seed));
        TableSchema schema = schema_from_text(ck.schema_text);
        std::printf("  schema: %zu columns, encoded width %d, target '%s'\n",
                    schema.columns.size(), schema.encoded_width(),
                    schema.target_column.c_str());
        std::printf("  config:\n");
        std::istringstream cfg(ck.config_text);
        std::string line;
        while (std::getline(cfg, line)) std::printf("    %s\n", line.c_str());
        std::printf("  blocks: %zu\n", ck.blocks.size());
        for (const auto& [name, t] : ck.blocks)
            std::printf("    %-16s %s\n", name.c_str(), t.shape_str().c_str());
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// evaluate / experiment
// ---------------------------------------------------------------------------

struct BenchOptions {
    bool synthetic = false;
    DataOptions data;
    int rows = 5050;
    int ratio = 100;
    double separation = 2.5;
    int n_seeds = 5;
    uint64_t seed = 0;
    GanConfig gan;
    std::string policy = "parity";
    int jobs = 1;
    std::string out_dir;
    std::vector<std::string> strategies = {"none", "smote", "ctgan", "rctgan"};
    std::vector<std::string> classifiers = {"dt", "rf", "mlp"};
    int mlp_epochs = 100;
    int rf_trees = 45;
};

inline Strategy parse_strategy(const std::string& s) {
    if (s == "none") return Strategy::none;
    if (s == "smote") return Strategy::smote;
    if (s == "ctgan") return Strategy::ctgan;
    if (s == "rctgan") return Strategy::rctgan;
    throw DataError("unknown strategy '" + s + "'");
}

inline ClassifierKind parse_classifier(const std::string& s) {
    if (s == "dt") return ClassifierKind::dt;
    if (s == "rf") return ClassifierKind::rf;
    if (s == "mlp") return ClassifierKind::mlp;
    throw DataError("unknown classifier '" + s + "'");
}

inline ExperimentConfig to_experiment_config(const BenchOptions& opt) {
    ExperimentConfig cfg;
    cfg.synthetic = opt.synthetic;
    if (opt.synthetic) {
        cfg.bench.rows = opt.rows;
        cfg.bench.ratio = opt.ratio;
        cfg.bench.separation = opt.separation;
        cfg.target = "cls";
    } else {
        cfg.data = load_table(opt.data);
        cfg.target = opt.data.layout == "backblaze" ? "failure" : opt.data.target;
    }
    cfg.split.ratio = opt.ratio;
    cfg.strategies.clear();
    for (const auto& s : opt.strategies) cfg.strategies.push_back(parse_strategy(s));
    cfg.classifiers.clear();
    for (const auto& c : opt.classifiers) cfg.classifiers.push_back(parse_classifier(c));
    cfg.n_seeds = opt.n_seeds;
    cfg.seed = opt.seed;
    cfg.gan = opt.gan;
    if (opt.policy == "parity") cfg.policy = MixPolicy::parity;
    else if (opt.policy == "literal-1to1") cfg.policy = MixPolicy::literal_1to1;
    else throw DataError("unknown mixing policy '" + opt.policy + "'");
    cfg.jobs = opt.jobs;
    cfg.out_dir = opt.out_dir;
    cfg.mlp.epochs = opt.mlp_epochs;
    cfg.rf_trees = opt.rf_trees;
    return cfg;
}

inline int cmd_experiment(const BenchOptions& opt) {
    return guarded([&] {
        ExperimentConfig cfg = to_experiment_config(opt);
        ExperimentReport report = run_experiment(cfg);

        const std::string csv = report.to_csv();
        const std::string table = report.to_table_text();
        if (!opt.out_dir.empty()) {
            namespace fs = std::filesystem;
            write_file_atomic((fs::path(opt.out_dir) / "report.csv").string(), csv);
            write_file_atomic((fs::path(opt.out_dir) / "report.txt").string(), table);
        }
        std::printf("G-mean(%%) medians over %d seeds, ratio 1:%d\n", cfg.n_seeds,
                    cfg.split.ratio);
        std::fputs(table.c_str(), stdout);
        int failed = 0;
        for (const auto& c : report.cells)
            if (!c.ok) {
                ++failed;
                std::printf("cell %s/%s seed %d failed: %s\n", to_string(c.strategy),
                            to_string(c.clf), c.seed_index, c.error.c_str());
            }
        // nonzero only when every cell failed
        return failed == static_cast<int>(report.cells.size()) ? kExitData : kExitOk;
    });
}

inline int cmd_evaluate(const BenchOptions& opt, const std::string& strategy,
                        const std::string& classifier) {
    return guarded([&] {
        BenchOptions one = opt;
        one.strategies = {strategy};
        one.classifiers = {classifier};
        one.n_seeds = 1;
        ExperimentConfig cfg = to_experiment_config(one);
        ExperimentReport report = run_experiment(cfg);
        const CellResult& cell = report.cells.at(0);
        if (!cell.ok) throw DataError("evaluation failed: " + cell.error);
        std::printf("strategy %s, classifier %s, seed %llu\n", strategy.c_str(),
                    classifier.c_str(), static_cast<unsigned long long>(opt.seed));
        std::printf("confusion: tp %lld fn %lld fp %lld tn %lld\n",
                    static_cast<long long>(cell.cm.tp), static_cast<long long>(cell.cm.fn),
                    static_cast<long long>(cell.cm.fp), static_cast<long long>(cell.cm.tn));
        std::printf("g-mean: %.6f (%.2f%%)\n", cell.gmean, 100.0 * cell.gmean);
        return kExitOk;
    });
}

}  // namespace rctgan::cli
