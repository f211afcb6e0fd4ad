#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace ckb;
using namespace ckb::cli;

void add_metric(CLI::App& app, MetricOptions& o) {
    auto* c = app.add_subcommand("metric", "Discrepancy between two labeled CSV files");
    c->add_option("source", o.source, "Source CSV")->required();
    c->add_option("target", o.target, "Target CSV")->required();
    c->add_option("--metric", o.metric, "bures | kernel-bures | ckb | mmd")
        ->check(CLI::IsMember({"bures", "kernel-bures", "ckb", "mmd"}))
        ->capture_default_str();
    c->add_option("--kernel-x", o.kernel_x, "Feature kernel: gaussian, gaussian:<sigma2> or linear")
        ->capture_default_str();
    c->add_option("--kernel-y", o.kernel_y, "Label kernel: gaussian, gaussian:<sigma2> or linear")
        ->capture_default_str();
    c->add_option("--epsilon", o.epsilon, "Conditional covariance regularization")->capture_default_str();
    c->add_option("--sigma2", o.sigma2, "Fixed feature bandwidth (overrides the adaptive one)");
    c->add_option("--factor", o.factor, "Factor of B: evd | cholesky")
        ->check(CLI::IsMember({"evd", "cholesky"}))
        ->capture_default_str();
    c->add_option("--out", o.out, "Report path (default $CKB_OUT_DIR/metric_report.json)");
}

void add_verify(CLI::App& app, VerifyOptions& o) {
    auto* c = app.add_subcommand("verify", "Compare the kernel estimator with the primal oracle");
    c->add_option("--seeds", o.seeds, "Number of random instances")->capture_default_str();
    c->add_option("--seed", o.base_seed, "First instance seed")->capture_default_str();
    c->add_option("--dims", o.dims, "Feature dimension range a-b")->capture_default_str();
    c->add_option("--classes", o.classes, "Class count range a-b")->capture_default_str();
    c->add_option("--sizes", o.sizes, "Sample size range a-b")->capture_default_str();
    c->add_option("--epsilons", o.epsilons, "Candidate regularizations")->delimiter(',')->capture_default_str();
    c->add_option("--tolerance", o.tolerance, "Allowed relative deviation")->capture_default_str();
    c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--fault", o.fault, "Inject a fault")->group("");
    c->add_option("--out", o.out, "Report path (default $CKB_OUT_DIR/verify_report.json)");
}

void add_converge(CLI::App& app, ConvergeOptions& o) {
    auto* c = app.add_subcommand("converge", "Same-distribution CKB estimates against sample size");
    c->add_option("--sizes", o.sizes, "Samples per domain")->delimiter(',')->capture_default_str();
    c->add_option("--seeds", o.seeds, "Repetitions per size")->capture_default_str();
    c->add_option("--seed", o.base_seed, "Base seed")->capture_default_str();
    c->add_option("--epsilon-schedule", o.epsilon_schedule, "n^a, c*n^a or a constant")->capture_default_str();
    c->add_option("--factor", o.factor, "Factor of B: evd | cholesky")
        ->check(CLI::IsMember({"evd", "cholesky"}))
        ->capture_default_str();
    c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--out", o.out, "Report path (default $CKB_OUT_DIR/converge_report.json)");
}

void add_adapt(CLI::App& app, AdaptOptions& o, std::string& variant) {
    auto* c = app.add_subcommand("adapt", "Train a classifier with conditional alignment");
    AlignmentConfig& cfg = o.config;
    c->add_option("--source", o.source, "Labeled source CSV")->required();
    c->add_option("--target", o.target, "Target CSV (labels, if any, are used for evaluation only)")->required();
    c->add_option("--variant", variant, "ckb | ckb+mmd")->check(CLI::IsMember({"ckb", "ckb+mmd"}))->capture_default_str();
    c->add_option("--lambda1", cfg.lambda1, "Entropy weight")->capture_default_str();
    c->add_option("--lambda2", cfg.lambda2, "Alignment weight")->capture_default_str();
    c->add_option("--epsilon", cfg.epsilon, "Conditional covariance regularization")->capture_default_str();
    c->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    c->add_option("--batch-size", cfg.batch_size, "Samples per step, split across domains")->capture_default_str();
    c->add_option("--learning-rate", cfg.learning_rate, "Gradient descent step")->capture_default_str();
    c->add_option("--warmup-epochs", cfg.warmup_epochs, "Epochs with alignment weight 0")->capture_default_str();
    c->add_option("--feature-dim", cfg.feature_dim_out, "Extractor output width")->capture_default_str();
    c->add_option("--seed", cfg.seed, "Initialization and batching seed")->capture_default_str();
    c->add_option("--out", o.out, "Report path (default $CKB_OUT_DIR/adapt_report.json)");
}

void add_gen(CLI::App& app, GenOptions& o) {
    auto* c = app.add_subcommand("gen", "Write a synthetic source/target pair as CSV");
    c->add_option("--benchmark", o.benchmark, "default | swap | same")
        ->check(CLI::IsMember({"default", "swap", "same"}))
        ->capture_default_str();
    c->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
    c->add_option("--samples-per-class", o.samples_per_class, "Samples per class and domain")->capture_default_str();
    c->add_option("--out-dir", o.out_dir, "Output directory (default $CKB_OUT_DIR or .)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional kernel Bures metric toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ckb::kArtifactVersion));

    MetricOptions metric;
    VerifyOptions verify;
    ConvergeOptions converge;
    AdaptOptions adapt;
    std::string variant = "ckb";
    GenOptions gen;
    add_metric(app, metric);
    add_verify(app, verify);
    add_converge(app, converge);
    add_adapt(app, adapt, variant);
    add_gen(app, gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (app.got_subcommand("metric"))
            cmd_metric(metric);
        else if (app.got_subcommand("verify"))
            cmd_verify(verify);
        else if (app.got_subcommand("converge"))
            cmd_converge(converge);
        else if (app.got_subcommand("adapt")) {
            adapt.config.variant = align_variant_from_string(variant);
            cmd_adapt(adapt);
        } else if (app.got_subcommand("gen"))
            cmd_gen(gen);
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerificationError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const ckb::Json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}
