// table_codec tests: schema fitting (EM oracle on a known mixture), the
// encode/decode round trip, training-by-sampling distributions, and CSV
// ingestion for both layouts.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rctgan/codec/csv.hpp"
#include "rctgan/codec/encode.hpp"
#include "rctgan/codec/schema.hpp"
#include "test_util.hpp"

using namespace rctgan;

namespace {

Table two_column_table(const std::vector<double>& vals, const std::vector<std::string>& cls) {
    Table t;
    t.names = {"x", "label"};
    t.kinds = {ColKind::continuous, ColKind::discrete};
    for (size_t i = 0; i < vals.size(); ++i)
        t.rows.push_back({Cell(vals[i]), Cell(cls[i % cls.size()])});
    return t;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// fit_schema
// ---------------------------------------------------------------------------

TEST(FitSchema, ConstantColumnGetsSingleDegenerateMode) {
    Table t = two_column_table(std::vector<double>(50, 7.25), {"a", "b"});
    TableSchema s = fit_schema(t, "label");
    ASSERT_EQ(s.columns[0].modes.size(), 1u);
    EXPECT_DOUBLE_EQ(s.columns[0].modes[0].mean, 7.25);
    EXPECT_GE(s.columns[0].modes[0].stddev, 1e-6);
}

TEST(FitSchema, TwoGaussiansRecoverTwoModes) {
    // oracle: data drawn from a known equal mixture of N(0,1) and N(100,1)
    Rng rng(42);
    std::vector<double> vals;
    std::vector<std::string> cls;
    for (int i = 0; i < 1000; ++i) {
        vals.push_back(i % 2 == 0 ? rng.normal() : 100.0 + rng.normal());
        cls.push_back(i % 2 == 0 ? "a" : "b");
    }
    TableSchema s = fit_schema(two_column_table(vals, {"a", "b"}), "label");
    ASSERT_EQ(s.columns[0].modes.size(), 2u);
    double lo = s.columns[0].modes[0].mean, hi = s.columns[0].modes[1].mean;
    if (lo > hi) std::swap(lo, hi);
    EXPECT_NEAR(lo, 0.0, 0.5);
    EXPECT_NEAR(hi, 100.0, 0.5);
    double wsum = 0.0;
    for (const auto& m : s.columns[0].modes) wsum += m.weight;
    EXPECT_NEAR(wsum, 1.0, 1e-9);
}

TEST(FitSchema, DiscreteFrequenciesAreCounted) {
    Table t;
    t.names = {"status"};
    t.kinds = {ColKind::discrete};
    t.rows = {{Cell(std::string("ok"))}, {Cell(std::string("ok"))}, {Cell(std::string("fail"))}};
    TableSchema s = fit_schema(t, "status");
    ASSERT_EQ(s.columns[0].categories.size(), 2u);
    EXPECT_EQ(s.columns[0].categories[0], "ok");
    EXPECT_NEAR(s.columns[0].frequencies[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.columns[0].frequencies[1], 1.0 / 3.0, 1e-12);
}

TEST(FitSchema, ErrorsOnDegenerateInputs) {
    Table empty;
    empty.names = {"label"};
    empty.kinds = {ColKind::discrete};
    EXPECT_THROW(fit_schema(empty, "label"), DataError);

    Table constant = two_column_table({1.0, 2.0, 3.0}, {"only"});
    EXPECT_THROW(fit_schema(constant, "label"), DataError);
}

TEST(FitSchema, RetainedWeightsSumToOneAfterPruning) {
    Rng rng(7);
    std::vector<double> vals;
    std::vector<std::string> cls;
    for (int i = 0; i < 600; ++i) {
        const int m = i % 3;
        vals.push_back(m * 50.0 + rng.normal() * (1.0 + m));
        cls.push_back(i % 2 ? "a" : "b");
    }
    TableSchema s = fit_schema(two_column_table(vals, {"a", "b"}), "label");
    double wsum = 0.0;
    for (const auto& m : s.columns[0].modes) wsum += m.weight;
    EXPECT_NEAR(wsum, 1.0, 1e-9);
}

// ---------------------------------------------------------------------------
// encode / decode
// ---------------------------------------------------------------------------

TEST(Codec, AlphaZeroAtModeMeanAndOneAtFourSigma) {
    Table t = two_column_table({5.0, 5.0, 5.0, 9.0}, {"a", "b"});
    TableSchema s = fit_schema(t, "label");
    // force a known single mode so the assignment is deterministic
    s.columns[0].modes = {{1.0, 5.0, 2.0}};
    Rng rng(1);
    Table probe = two_column_table({5.0, 5.0 + 4.0 * 2.0}, {"a", "b"});
    EncodedMatrix enc = encode(probe, s, rng);
    EXPECT_DOUBLE_EQ(enc.data(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(enc.data(0, 1), 1.0);  // mode one-hot
    EXPECT_DOUBLE_EQ(enc.data(1, 0), 1.0);  // boundary alpha
}

TEST(Codec, RoundTripReproducesTable) {
    Rng rng(3);
    std::vector<double> vals;
    std::vector<std::string> cls;
    for (int i = 0; i < 200; ++i) {
        vals.push_back(i % 2 == 0 ? 5.0 + rng.normal() : 60.0 + 3.0 * rng.normal());
        cls.push_back(i % 3 == 0 ? "fail" : "ok");
    }
    Table t = two_column_table(vals, {"x"});
    for (size_t i = 0; i < t.rows.size(); ++i) t.rows[i][1] = cls[i];
    TableSchema s = fit_schema(t, "label");
    EncodedMatrix enc = encode(t, s, rng);
    Table back = decode(enc, s);
    for (size_t r = 0; r < t.n_rows(); ++r) {
        EXPECT_EQ(str(back.rows[r][1]), str(t.rows[r][1]));
        EXPECT_LE(testutil::rel_err(num(back.rows[r][0]), num(t.rows[r][0])), 1e-9);
    }
}

TEST(Codec, EveryOneHotSliceSumsToOne) {
    Rng rng(4);
    std::vector<double> vals;
    for (int i = 0; i < 100; ++i) vals.push_back(rng.uniform(0.0, 50.0));
    Table t = two_column_table(vals, {"a", "b", "c"});
    TableSchema s = fit_schema(t, "label");
    EncodedMatrix enc = encode(t, s, rng);
    for (int r = 0; r < enc.data.rows(); ++r)
        for (const Span& sp : enc.spans) {
            if (sp.role == SpanRole::alpha) continue;
            double sum = 0.0;
            for (int j = 0; j < sp.width; ++j) sum += enc.data(r, sp.offset + j);
            EXPECT_DOUBLE_EQ(sum, 1.0);
        }
}

TEST(Codec, SoftOneHotDecodesByArgmaxAndAlphaClamps) {
    TableSchema s;
    ColumnMeta cont;
    cont.name = "x";
    cont.kind = ColKind::continuous;
    cont.modes = {{1.0, 10.0, 1.0}};
    ColumnMeta disc;
    disc.name = "label";
    disc.kind = ColKind::discrete;
    disc.categories = {"a", "b"};
    disc.frequencies = {0.5, 0.5};
    s.columns = {cont, disc};
    s.target_column = "label";

    EncodedMatrix enc;
    enc.spans = s.spans();
    enc.data = Tensor2::of(1, 4, {2.5, 1.0, 0.1, 0.9});  // alpha beyond 1, soft one-hot
    Table back = decode(enc, s);
    EXPECT_DOUBLE_EQ(num(back.rows[0][0]), 10.0 + 4.0);  // clamped to alpha=1
    EXPECT_EQ(str(back.rows[0][1]), "b");
}

TEST(Codec, DecodeWidthMismatchThrows) {
    TableSchema s;
    ColumnMeta disc;
    disc.name = "label";
    disc.kind = ColKind::discrete;
    disc.categories = {"a", "b"};
    disc.frequencies = {0.5, 0.5};
    s.columns = {disc};
    s.target_column = "label";
    EncodedMatrix enc;
    enc.data = Tensor2(1, 3);
    EXPECT_THROW(decode(enc, s), DataError);
}

TEST(Codec, UnknownCategoryThrows) {
    Table t = two_column_table({1.0, 2.0}, {"a", "b"});
    TableSchema s = fit_schema(t, "label");
    Table probe = two_column_table({1.0}, {"zzz"});
    Rng rng(0);
    EXPECT_THROW(encode(probe, s, rng), DataError);
}

// ---------------------------------------------------------------------------
// sample_condition / draw_matching_rows
// ---------------------------------------------------------------------------

TEST(Condition, SingleCategoryIsAlwaysChosen) {
    TableSchema s;
    ColumnMeta disc;
    disc.name = "label";
    disc.kind = ColKind::discrete;
    disc.categories = {"only"};
    disc.frequencies = {1.0};
    s.columns = {disc};
    s.target_column = "label";
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        CondVector cv = sample_condition(s, rng);
        EXPECT_EQ(cv.column, 0);
        EXPECT_EQ(cv.category, 0);
    }
}

TEST(Condition, EqualFrequenciesDrawUniformly) {
    TableSchema s;
    ColumnMeta disc;
    disc.name = "label";
    disc.kind = ColKind::discrete;
    disc.categories = {"a", "b", "c", "d"};
    disc.frequencies = {0.25, 0.25, 0.25, 0.25};
    s.columns = {disc};
    s.target_column = "label";
    Rng rng(6);
    const int draws = 10000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[sample_condition(s, rng).category];
    // chi-square against uniform; 3 dof, p>0.01 ~ chi2 < 11.34
    double chi2 = 0.0;
    for (int c : counts) {
        const double e = draws / 4.0;
        chi2 += (c - e) * (c - e) / e;
    }
    EXPECT_LT(chi2, 11.34);
}

TEST(Condition, LogFrequencyWeightsForSkewedColumn) {
    TableSchema s;
    ColumnMeta disc;
    disc.name = "label";
    disc.kind = ColKind::discrete;
    disc.categories = {"major", "minor"};
    disc.frequencies = {0.99, 0.01};
    s.columns = {disc};
    s.target_column = "label";
    Rng rng(8);
    const int draws = 100000;
    int minor = 0;
    for (int i = 0; i < draws; ++i)
        if (sample_condition(s, rng).category == 1) ++minor;
    const double w_major = std::log1p(0.99), w_minor = std::log1p(0.01);
    const double expect_minor = w_minor / (w_major + w_minor);
    EXPECT_GT(static_cast<double>(minor) / draws, 0.01);  // log-smoothed >> raw frequency
    EXPECT_LE(testutil::rel_err(static_cast<double>(minor) / draws, expect_minor), 0.02);
}

TEST(Condition, DrawMatchingRowsHonorsConditionAndReplacement) {
    std::vector<double> vals;
    std::vector<std::string> cls;
    for (int i = 0; i < 174; ++i) {
        vals.push_back(static_cast<double>(i));
        cls.push_back("failure");
    }
    for (int i = 0; i < 1000; ++i) {
        vals.push_back(1000.0 + i);
        cls.push_back("normal");
    }
    Table t = two_column_table(vals, {"x"});
    for (size_t i = 0; i < t.rows.size(); ++i) t.rows[i][1] = cls[i];
    TableSchema s = fit_schema(t, "label");

    CondVector cv;
    cv.column = 1;
    cv.category = s.columns[1].cat_index("failure");
    Rng rng(9);
    auto ids = draw_matching_rows(t, s, cv, 500, rng);
    ASSERT_EQ(ids.size(), 500u);
    for (int id : ids) EXPECT_EQ(str(t.rows[id][1]), "failure");  // 174 matching rows

    // single matching row -> that row repeated
    Table single = two_column_table({1.0, 2.0, 3.0}, {"x"});
    single.rows[0][1] = std::string("rare");
    single.rows[1][1] = std::string("common");
    single.rows[2][1] = std::string("common");
    TableSchema s2 = fit_schema(single, "label");
    CondVector rare;
    rare.column = 1;
    rare.category = s2.columns[1].cat_index("rare");
    auto rep = draw_matching_rows(single, s2, rare, 10, rng);
    for (int id : rep) EXPECT_EQ(id, 0);

    CondVector missing;
    missing.column = 1;
    missing.category = s2.columns[1].cat_index("common");
    Table none = single;
    none.rows[1][1] = std::string("rare");
    none.rows[2][1] = std::string("rare");
    EXPECT_THROW(draw_matching_rows(none, s2, missing, 1, rng), DataError);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

TEST(Csv, GenericLayoutInfersKinds) {
    const std::string path = temp_path("rctgan_generic.csv");
    {
        std::ofstream f(path);
        f << "value,name\n1.5,alpha\n2.5,beta\n-3,gamma\n";
    }
    CsvResult res = load_csv(path, CsvLayout::generic, {.target = "name"});
    ASSERT_EQ(res.table.n_cols(), 2u);
    EXPECT_EQ(res.table.kinds[0], ColKind::continuous);
    EXPECT_EQ(res.table.kinds[1], ColKind::discrete);
    ASSERT_EQ(res.table.n_rows(), 3u);
    EXPECT_DOUBLE_EQ(num(res.table.rows[2][0]), -3.0);
    EXPECT_EQ(str(res.table.rows[0][1]), "alpha");
    std::remove(path.c_str());
}

TEST(Csv, BackblazeLayoutFiltersModelAndDropsEmptySmart) {
    const std::string path = temp_path("rctgan_bb.csv");
    {
        std::ofstream f(path);
        f << "date,serial_number,model,capacity_bytes,failure,smart_1_raw,smart_2_raw,"
             "smart_3_normalized\n";
        f << "2020-01-01,S1,ST4000DM000,4000,0,100,, 95\n";  // note smart_3 has junk space
        f << "2020-01-01,S2,OTHER,4000,1,50,,90\n";
        f << "2020-01-02,S3,ST4000DM000,4000,1,70,,88\n";
    }
    CsvResult res = load_csv(path, CsvLayout::backblaze, {});
    // model filter keeps S1 and S3; smart_2_raw entirely empty -> dropped;
    // smart_3 cell " 95" fails to parse -> S1 row skipped with a warning
    EXPECT_EQ(res.skipped_rows, 1);
    ASSERT_EQ(res.table.n_rows(), 1u);
    ASSERT_EQ(res.table.n_cols(), 3u);  // failure, smart_1_raw, smart_3_normalized
    EXPECT_EQ(res.table.names[0], "failure");
    EXPECT_EQ(str(res.table.rows[0][0]), "1");
    EXPECT_DOUBLE_EQ(num(res.table.rows[0][1]), 70.0);
    std::remove(path.c_str());
}

TEST(Csv, MissingHeaderOrTargetThrows) {
    const std::string path = temp_path("rctgan_empty.csv");
    {
        std::ofstream f(path);
    }
    EXPECT_THROW(load_csv(path, CsvLayout::generic, {.target = "y"}), DataError);
    {
        std::ofstream f(path);
        f << "a,b\n1,2\n";
    }
    EXPECT_THROW(load_csv(path, CsvLayout::generic, {.target = "zz"}), DataError);
    std::remove(path.c_str());
}

// ---------------------------------------------------------------------------
// schema descriptor text
// ---------------------------------------------------------------------------

TEST(SchemaText, RoundTripsLosslessly) {
    Rng rng(10);
    std::vector<double> vals;
    for (int i = 0; i < 300; ++i)
        vals.push_back(i % 2 == 0 ? rng.normal() * 0.37 : 25.0 + rng.normal());
    Table t = two_column_table(vals, {"ok", "fail"});
    TableSchema s = fit_schema(t, "label");
    TableSchema back = schema_from_text(schema_to_text(s));
    ASSERT_EQ(back.columns.size(), s.columns.size());
    EXPECT_EQ(back.target_column, s.target_column);
    for (size_t c = 0; c < s.columns.size(); ++c) {
        EXPECT_EQ(back.columns[c].name, s.columns[c].name);
        EXPECT_EQ(back.columns[c].kind, s.columns[c].kind);
        ASSERT_EQ(back.columns[c].modes.size(), s.columns[c].modes.size());
        for (size_t m = 0; m < s.columns[c].modes.size(); ++m) {
            EXPECT_DOUBLE_EQ(back.columns[c].modes[m].weight, s.columns[c].modes[m].weight);
            EXPECT_DOUBLE_EQ(back.columns[c].modes[m].mean, s.columns[c].modes[m].mean);
            EXPECT_DOUBLE_EQ(back.columns[c].modes[m].stddev, s.columns[c].modes[m].stddev);
        }
        EXPECT_EQ(back.columns[c].categories, s.columns[c].categories);
    }
}

TEST(SchemaText, RejectsGarbage) {
    EXPECT_THROW(schema_from_text("not a schema"), DataError);
}
