#pragma once
// The evaluation framework: strategy x classifier x seed matrix over either a
// real CSV table or the synthetic benchmark. GAN strategies fit on the train
// split only; the test split stays untouched. Emits a per-cell CSV, an aligned
// medians table, per-fit loss curves, and 2-D projection dumps.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rctgan/bench/dataset.hpp"
#include "rctgan/bench/forest.hpp"
#include "rctgan/bench/metrics.hpp"
#include "rctgan/bench/mlp.hpp"
#include "rctgan/bench/pca.hpp"
#include "rctgan/bench/smote.hpp"
#include "rctgan/bench/tree.hpp"
#include "rctgan/gan/train.hpp"

namespace rctgan {

enum class Strategy : uint8_t { none, smote, ctgan, rctgan };
enum class ClassifierKind : uint8_t { dt, rf, mlp };
enum class MixPolicy : uint8_t { parity, literal_1to1 };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::none: return "none";
        case Strategy::smote: return "smote";
        case Strategy::ctgan: return "ctgan";
        default: return "rctgan";
    }
}
inline const char* to_string(ClassifierKind c) {
    switch (c) {
        case ClassifierKind::dt: return "dt";
        case ClassifierKind::rf: return "rf";
        default: return "mlp";
    }
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

using RowSynthesizer = std::function<Table(int count, Rng& rng)>;

// parity: synthesize minority rows until class counts match, then shuffle-mix.
// literal_1to1: synthetic rows = total real train rows. none: identity.
inline Table augment(const Table& train, const std::string& target,
                     const std::string& minority, MixPolicy policy,
                     const RowSynthesizer& synth, Rng& rng) {
    if (!synth) return train;  // strategy none: byte-identical
    const int col = train.require_col(target);
    int n_min = 0;
    for (const auto& r : train.rows)
        if (str(r[col]) == minority) ++n_min;
    const int n_other = static_cast<int>(train.n_rows()) - n_min;
    const int need = policy == MixPolicy::parity ? std::max(0, n_other - n_min)
                                                 : static_cast<int>(train.n_rows());
    Table synth_rows = synth(need, rng);
    Table mixed = train;
    for (auto& r : synth_rows.rows) mixed.rows.push_back(std::move(r));
    for (int i = static_cast<int>(mixed.rows.size()) - 1; i > 0; --i)
        std::swap(mixed.rows[i], mixed.rows[rng.uniform_int(i + 1)]);
    return mixed;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    bool synthetic = true;
    BenchmarkSpec bench;  // when synthetic
    Table data;           // when !synthetic
    std::string target = "cls";

    SplitSpec split;
    std::vector<Strategy> strategies = {Strategy::none, Strategy::smote, Strategy::ctgan,
                                        Strategy::rctgan};
    std::vector<ClassifierKind> classifiers = {ClassifierKind::dt, ClassifierKind::rf,
                                               ClassifierKind::mlp};
    int n_seeds = 5;
    uint64_t seed = 0;
    GanConfig gan;  // epochs etc. for the GAN strategies
    MixPolicy policy = MixPolicy::parity;
    MlpParams mlp;
    int rf_trees = 45;
    int smote_k = 5;
    int jobs = 1;
    std::string out_dir;  // optional: losses_*.csv + projection_*.csv
};

struct CellResult {
    Strategy strategy{};
    ClassifierKind clf{};
    int seed_index = 0;
    bool ok = false;
    double gmean = 0.0;
    ConfusionMatrix cm;
    double wall_s = 0.0;  // log only; never serialized into report.csv
    std::string error;
};

struct GanRunLog {
    Strategy strategy{};
    int seed_index = 0;
    std::vector<StepMetrics> steps;
};

struct ExperimentReport {
    std::vector<Strategy> strategies;
    std::vector<ClassifierKind> classifiers;
    int n_seeds = 0;
    std::vector<CellResult> cells;  // strategy-major, then classifier, then seed
    std::vector<GanRunLog> gan_logs;

    const CellResult& cell(Strategy s, ClassifierKind c, int seed) const {
        for (const auto& r : cells)
            if (r.strategy == s && r.clf == c && r.seed_index == seed) return r;
        throw std::logic_error("report: missing cell");
    }

    // median G-mean over successful seeds; nan when none succeeded
    double median(Strategy s, ClassifierKind c) const {
        std::vector<double> vals;
        for (const auto& r : cells)
            if (r.strategy == s && r.clf == c && r.ok) vals.push_back(r.gmean);
        if (vals.empty()) return std::nan("");
        std::sort(vals.begin(), vals.end());
        const size_t n = vals.size();
        return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    }

    std::string to_csv() const {
        std::string out = "strategy,classifier,seed,gmean,tp,fn,fp,tn,error\n";
        char buf[64];
        for (const auto& r : cells) {
            out += to_string(r.strategy);
            out += ",";
            out += to_string(r.clf);
            std::snprintf(buf, sizeof buf, ",%d,", r.seed_index);
            out += buf;
            if (r.ok) {
                std::snprintf(buf, sizeof buf, "%.6f,%lld,%lld,%lld,%lld,", r.gmean,
                              static_cast<long long>(r.cm.tp), static_cast<long long>(r.cm.fn),
                              static_cast<long long>(r.cm.fp), static_cast<long long>(r.cm.tn));
                out += buf;
            } else {
                out += ",,,,,";
                out += r.error;
            }
            out += "\n";
        }
        return out;
    }

    // aligned text, strategies as rows, classifiers as columns, G-mean in %
    std::string to_table_text() const {
        std::string out;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-10s", "strategy");
        out += buf;
        for (ClassifierKind c : classifiers) {
            std::snprintf(buf, sizeof buf, "%10s", to_string(c));
            out += buf;
        }
        out += "\n";
        for (Strategy s : strategies) {
            std::snprintf(buf, sizeof buf, "%-10s", to_string(s));
            out += buf;
            for (ClassifierKind c : classifiers) {
                const double m = median(s, c);
                if (std::isnan(m)) std::snprintf(buf, sizeof buf, "%10s", "-");
                else std::snprintf(buf, sizeof buf, "%10.2f", 100.0 * m);
                out += buf;
            }
            out += "\n";
        }
        return out;
    }
};

namespace bench_detail {

struct PreparedSeed {
    DataSplit split;
    TableSchema schema;  // fit on the train split only
    std::string positive;
};

inline PreparedSeed prepare_seed(const ExperimentConfig& cfg, int seed_index) {
    Table data;
    if (cfg.synthetic) {
        BenchmarkSpec bs = cfg.bench;
        bs.seed = mix_seed(cfg.seed, 1, seed_index);
        data = make_synthetic_benchmark(bs);
    } else {
        data = cfg.data;
    }
    PreparedSeed ps;
    ps.positive = minority_category(data, cfg.target);
    Rng split_rng(mix_seed(cfg.seed, 2, seed_index));
    ps.split = build_dataset(data, cfg.target, ps.positive, cfg.split, split_rng);
    ps.schema = fit_schema(ps.split.train, cfg.target);
    return ps;
}

inline std::vector<int> predict_with(ClassifierKind kind, const ExperimentConfig& cfg,
                                     const FeatureMatrix& train, const FeatureMatrix& test,
                                     int n_classes, uint64_t seed) {
    switch (kind) {
        case ClassifierKind::dt: {
            DecisionTree dt;
            dt.fit(train.x, train.y, n_classes);
            return dt.predict(test.x);
        }
        case ClassifierKind::rf: {
            RandomForest rf;
            RfParams rp;
            rp.n_trees = cfg.rf_trees;
            rf.fit(train.x, train.y, n_classes, rp, Rng(seed));
            return rf.predict(test.x);
        }
        default: {
            MlpClassifier mlp;
            mlp.fit(train.x, train.y, n_classes, cfg.mlp, Rng(seed));
            return mlp.predict(test.x);
        }
    }
}

}  // namespace bench_detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    ExperimentReport report;
    report.strategies = cfg.strategies;
    report.classifiers = cfg.classifiers;
    report.n_seeds = cfg.n_seeds;
    report.cells.resize(cfg.strategies.size() * cfg.classifiers.size() * cfg.n_seeds);

    struct Unit {  // one (strategy, seed) augmentation + its classifier cells
        size_t strat_index;
        int seed_index;
    };
    std::vector<Unit> units;
    for (size_t si = 0; si < cfg.strategies.size(); ++si)
        for (int k = 0; k < cfg.n_seeds; ++k) units.push_back({si, k});

    std::vector<GanRunLog> gan_logs(units.size());
    std::mutex out_mutex;
    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

    // the split and train-side schema are shared by every strategy at a seed
    std::vector<bench_detail::PreparedSeed> seeds(cfg.n_seeds);
    std::vector<std::string> seed_errors(cfg.n_seeds);
    auto prepare_one = [&](int k) {
        try {
            seeds[k] = bench_detail::prepare_seed(cfg, k);
        } catch (const std::exception& e) {
            seed_errors[k] = e.what();
        }
    };

    auto run_unit = [&](const Unit& u) {
        const Strategy strat = cfg.strategies[u.strat_index];
        using clock = std::chrono::steady_clock;
        auto cell_at = [&](size_t ci) -> CellResult& {
            return report.cells[(u.strat_index * cfg.classifiers.size() + ci) * cfg.n_seeds +
                                u.seed_index];
        };
        for (size_t ci = 0; ci < cfg.classifiers.size(); ++ci) {
            CellResult& cell = cell_at(ci);
            cell.strategy = strat;
            cell.clf = cfg.classifiers[ci];
            cell.seed_index = u.seed_index;
        }

        const bench_detail::PreparedSeed& ps = seeds[u.seed_index];
        std::string unit_error = seed_errors[u.seed_index];
        Table mixed;
        if (unit_error.empty()) try {
            Rng aug_rng(mix_seed(cfg.seed, 3 + static_cast<uint64_t>(strat), u.seed_index));
            RowSynthesizer synth;
            if (strat == Strategy::smote) {
                synth = [&](int count, Rng& rng) {
                    return smote_minority(ps.split.train, ps.schema, ps.positive, count, rng,
                                          cfg.smote_k);
                };
            } else if (strat == Strategy::ctgan || strat == Strategy::rctgan) {
                GanConfig gc = cfg.gan;
                gc.mode = strat == Strategy::ctgan ? GanMode::ctgan : GanMode::rctgan;
                GanRunLog& log = gan_logs[u.strat_index * cfg.n_seeds + u.seed_index];
                log.strategy = strat;
                log.seed_index = u.seed_index;
                Checkpoint ck = fit(ps.split.train, ps.schema, gc,
                                    mix_seed(cfg.seed, 10 + static_cast<uint64_t>(strat),
                                             u.seed_index),
                                    [&](int, const StepMetrics& sm) { log.steps.push_back(sm); });
                auto model = std::make_shared<GanModel>(model_from_checkpoint(ck));
                synth = [model, &ps](int count, Rng& rng) {
                    return sample_rows(*model, ps.positive, count, rng);
                };
                if (!cfg.out_dir.empty() && u.seed_index == 0) {
                    // 2-D projection dump of real vs synthetic for the first seed
                    Rng prng(17);
                    Table synth_rows = sample_rows(*model, ps.positive,
                                                   ps.split.counts.fail_train * 4, prng);
                    auto pts = project_2d(ps.split.train, synth_rows, ps.schema);
                    std::string out = "x,y,class,origin\n";
                    char buf[96];
                    for (const auto& p : pts) {
                        std::snprintf(buf, sizeof buf, "%.6f,%.6f,", p.x, p.y);
                        out += buf;
                        out += p.cls;
                        out += p.synthetic ? ",synthetic\n" : ",real\n";
                    }
                    std::lock_guard<std::mutex> lk(out_mutex);
                    write_file_atomic((std::filesystem::path(cfg.out_dir) /
                                       ("projection_" + std::string(to_string(strat)) +
                                        ".csv"))
                                          .string(),
                                      out);
                }
            }
            mixed = augment(ps.split.train, cfg.target, ps.positive, cfg.policy, synth,
                            aug_rng);
        } catch (const std::exception& e) {
            unit_error = e.what();
        }

        FeatureMatrix test_fm, train_fm;
        int n_classes = 0, positive_id = 0;
        if (unit_error.empty()) {
            try {
                const int tcol = ps.schema.target_index();
                n_classes = static_cast<int>(ps.schema.columns[tcol].categories.size());
                positive_id = ps.schema.columns[tcol].cat_index(ps.positive);
                // test split must be untouched by augmentation
                test_fm = featurize(ps.split.test, ps.schema);
                train_fm = featurize(mixed, ps.schema);
            } catch (const std::exception& e) {
                unit_error = e.what();
            }
        }

        for (size_t ci = 0; ci < cfg.classifiers.size(); ++ci) {
            CellResult& cell = cell_at(ci);
            if (!unit_error.empty()) {
                cell.error = unit_error;
                continue;
            }
            const auto start = clock::now();
            try {
                std::vector<int> pred = bench_detail::predict_with(
                    cfg.classifiers[ci], cfg, train_fm, test_fm, n_classes,
                    mix_seed(cfg.seed, 20 + static_cast<uint64_t>(cfg.classifiers[ci]),
                             u.seed_index));
                cell.cm = confusion(test_fm.y, pred, positive_id);
                cell.gmean = g_mean(cell.cm);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cell.wall_s =
                std::chrono::duration<double>(clock::now() - start).count();
        }
    };

    if (cfg.jobs <= 1) {
        for (int k = 0; k < cfg.n_seeds; ++k) prepare_one(k);
        for (const Unit& u : units) run_unit(u);
    } else {
        auto pool = [&](size_t count, auto&& work) {
            std::atomic<size_t> next{0};
            std::vector<std::thread> workers;
            const size_t jobs = std::min(static_cast<size_t>(cfg.jobs), count);
            for (size_t w = 0; w < jobs; ++w)
                workers.emplace_back([&] {
                    for (;;) {
                        const size_t i = next.fetch_add(1);
                        if (i >= count) return;
                        work(i);
                    }
                });
            for (auto& t : workers) t.join();
        };
        pool(cfg.n_seeds, [&](size_t k) { prepare_one(static_cast<int>(k)); });
        pool(units.size(), [&](size_t i) { run_unit(units[i]); });
    }

    for (auto& log : gan_logs)
        if (!log.steps.empty()) report.gan_logs.push_back(std::move(log));

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        for (const auto& log : report.gan_logs) {
            std::string out = "step,loss_d,loss_c,loss_g,gp\n";
            char buf[160];
            for (size_t i = 0; i < log.steps.size(); ++i) {
                const StepMetrics& sm = log.steps[i];
                std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", i, sm.loss_d,
                              sm.loss_c, sm.loss_g, sm.gp);
                out += buf;
            }
            write_file_atomic((fs::path(cfg.out_dir) /
                               ("losses_" + std::string(to_string(log.strategy)) + "_seed" +
                                std::to_string(log.seed_index) + ".csv"))
                                  .string(),
                              out);
        }
    }
    return report;
}

}  // namespace rctgan
