#include "support.hpp"

#include <gtest/gtest.h>

using namespace ckb;

namespace {

RunReport sample_report() {
    RunReport r;
    r.command = "adapt";
    r.config = {{"lambda1", 0.5}, {"variant", "ckb"}, {"sizes", {32, 64}}};
    DiscrepancyReport d = assemble(MetricKind::ckb, 0.1, 0.2, 0.05, 10, 12);
    d.epsilon = 0.01;
    d.sigma2.x_source = 1.0 / 3.0;
    d.sigma2.y_cross = 2.5;
    r.discrepancies.push_back(d);
    VerifySummary v;
    v.max_deviation = 3.1e-15;
    v.worst_seed = 17;
    v.instances.push_back({17, 3, 2, 10, 20, 0.1, 0.7, 0.7 + 1e-16, 1e-16});
    r.verification = v;
    ConvergeSummary c;
    c.sizes = {32, 64};
    c.epsilons = {0.42, 0.35};
    c.medians = {0.1, 0.07};
    c.slope = -0.51;
    c.intercept = 0.3;
    r.convergence = c;
    TrainingSummary t;
    LossRecord rec;
    rec.step = 4;
    rec.epoch = 1;
    rec.ce = 0.69;
    rec.entropy = 1.09;
    rec.ckb = 0.012;
    rec.mmd = 0.003;
    rec.lambda2_effective = 1.0;
    rec.total = 1.25;
    t.history = {rec};
    t.source_accuracy_before = 0.3;
    t.source_accuracy_after = 0.9;
    t.target_accuracy_before = 0.31;
    t.target_accuracy_after = 0.8;
    t.steps = 5;
    r.training = t;
    r.seed = 42;
    r.wall_ms = 12.5;
    return r;
}

} // namespace

TEST(Report, RoundTripIsLossless) {
    const RunReport r = sample_report();
    const Json j = to_json(r);
    const RunReport back = run_report_from_json(Json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.discrepancies[0].sigma2.x_source, 1.0 / 3.0);
    EXPECT_FALSE(back.discrepancies[0].sigma2.x_target);
    EXPECT_EQ(back.training->history[0].mmd, 0.003);
    EXPECT_EQ(back.verification->instances[0].primal, 0.7 + 1e-16);
}

TEST(Report, OptionalSectionsMayBeAbsent) {
    RunReport r;
    r.command = "metric";
    const Json j = to_json(r);
    EXPECT_FALSE(j.contains("training"));
    EXPECT_FALSE(j.contains("seed"));
    const RunReport back = run_report_from_json(j);
    EXPECT_FALSE(back.training);
    EXPECT_FALSE(back.seed);
}

TEST(Report, UnknownFieldsRejected) {
    Json j = to_json(sample_report());
    j["extra"] = 1;
    EXPECT_THROW(run_report_from_json(j), InputError);
    j = to_json(sample_report());
    j["training"]["history"][0]["bonus"] = 2;
    EXPECT_THROW(run_report_from_json(j), InputError);
    j = to_json(sample_report());
    j["discrepancies"][0]["sigma2"]["z"] = 2;
    EXPECT_THROW(run_report_from_json(j), InputError);
}

TEST(Report, SchemaVersionChecked) {
    Json j = to_json(sample_report());
    j["schema_version"] = kReportSchemaVersion + 1;
    EXPECT_THROW(run_report_from_json(j), InputError);
}

TEST(Report, NonFiniteValuesRefused) {
    RunReport r = sample_report();
    r.discrepancies[0].value = std::numeric_limits<double>::infinity();
    EXPECT_THROW(to_json(r), NumericalError);
    r = sample_report();
    r.training->history[0].ckb = std::nan("");
    EXPECT_THROW(to_json(r), NumericalError);
    r = sample_report();
    r.config["bad"] = std::nan("");
    EXPECT_THROW(to_json(r), NumericalError);
}
