#pragma once

// Command implementations behind the `ckb` executable. Kept separate from
// argument parsing so tests can drive them directly.

#include <ckb/ckb.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ckb::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kVerificationError = 4 };

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Explicit path, else $CKB_OUT_DIR/<fallback>, else ./<fallback>.
inline std::filesystem::path output_path(const std::string& explicit_path, const std::string& fallback) {
    if (!explicit_path.empty())
        return explicit_path;
    if (const char* dir = std::getenv("CKB_OUT_DIR"); dir && *dir)
        return std::filesystem::path(dir) / fallback;
    return fallback;
}

/// Sibling file next to a report: report.json -> report_<suffix>.csv
inline std::filesystem::path sibling(const std::filesystem::path& report, const std::string& suffix) {
    std::filesystem::path p = report;
    p.replace_filename(report.stem().string() + "_" + suffix + ".csv");
    return p;
}

inline void ensure_parent(const std::filesystem::path& p) {
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec)
            throw InputError("cannot create directory '" + p.parent_path().string() + "'");
    }
}

inline void write_report(const std::filesystem::path& path, const RunReport& report) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path.string() + "'");
    out << to_json(report).dump(2) << '\n';
}

inline RunReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return run_report_from_json(j);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

/// Inclusive integer range parsed from "a" or "a-b".
struct IntRange {
    int lo = 0, hi = 0;

    static IntRange parse(const std::string& s, const char* what) {
        IntRange r;
        const auto dash = s.find('-', 1);
        const auto read = [&](std::string_view t, int& out) {
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            if (ec != std::errc() || ptr != t.data() + t.size())
                throw InputError(std::string(what) + ": bad range '" + s + "'");
        };
        const std::string_view sv(s);
        if (dash == std::string::npos) {
            read(sv, r.lo);
            r.hi = r.lo;
        } else {
            read(sv.substr(0, dash), r.lo);
            read(sv.substr(dash + 1), r.hi);
        }
        if (r.lo > r.hi)
            throw InputError(std::string(what) + ": empty range '" + s + "'");
        return r;
    }

    std::string to_string() const {
        return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
    }
};

/// splitmix64 finalizer; derives independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1) + 0xBF58476D1CE4E5B9ULL * (c + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Runs f(i) for i in [0, count) on up to `jobs` threads. Each index writes
/// only its own slot, so results do not depend on the thread count.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& f) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers)
                    f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---------------------------------------------------------------- metric

struct MetricOptions {
    std::string source, target;
    std::string metric = "ckb"; ///< bures | kernel-bures | ckb | mmd
    std::string kernel_x = "gaussian";
    std::string kernel_y = "gaussian";
    double epsilon = kDefaultEpsilon;
    std::optional<double> sigma2; ///< fixes the feature bandwidth
    std::string factor = "evd";
    std::string out;
};

inline DiscrepancyReport compute_metric(const LabeledDataset& Ds, const LabeledDataset& Dt, const MetricOptions& o,
                                        KernelSpec& kx, KernelSpec& ky) {
    kx = KernelSpec::parse(o.kernel_x);
    ky = KernelSpec::parse(o.kernel_y);
    if (o.sigma2) {
        if (kx.family != KernelFamily::gaussian)
            throw InputError("--sigma2 applies to a gaussian feature kernel only");
        kx = KernelSpec::gaussian_fixed(*o.sigma2);
    }
    if (Ds.dim() != Dt.dim())
        throw InputError("source and target feature dimensions differ");
    if (o.metric == "bures") {
        DiscrepancyReport r = bures_sq(sample_covariance(Ds.X), sample_covariance(Dt.X));
        r.n = Ds.size();
        r.m = Dt.size();
        return r;
    }
    if (o.metric == "kernel-bures")
        return kernel_bures_sq(Ds, Dt, kx);
    if (o.metric == "ckb") {
        if (!(o.epsilon > 0.0) || !std::isfinite(o.epsilon))
            throw InputError("--epsilon must be positive");
        return ckb_sq(Ds, Dt, kx, ky, {o.epsilon, factor_method_from_string(o.factor)});
    }
    if (o.metric == "mmd") {
        if (!Ds.has_labels() || !Dt.has_labels())
            throw InputError("mmd needs labels in both files");
        if (Ds.num_classes() != Dt.num_classes())
            throw InputError("label dimensions differ");
        return label_mmd_report(Ds.labels(), Dt.labels(), ky);
    }
    throw InputError("unknown metric '" + o.metric + "' (expected bures, kernel-bures, ckb or mmd)");
}

inline RunReport cmd_metric(const MetricOptions& o, std::ostream& log = std::cout) {
    const auto start = std::chrono::steady_clock::now();
    CsvSchema schema;
    LabeledDataset Ds = load_csv(o.source, schema);
    LabeledDataset Dt = load_csv(o.target, schema);
    // Align label widths when one file uses fewer classes than the other.
    if (Ds.has_labels() && Dt.has_labels() && Ds.num_classes() != Dt.num_classes()) {
        const int K = static_cast<int>(std::max(Ds.num_classes(), Dt.num_classes()));
        Ds.Y = one_hot(argmax_labels(*Ds.Y), K);
        Dt.Y = one_hot(argmax_labels(*Dt.Y), K);
    }
    KernelSpec kx, ky;
    const DiscrepancyReport d = compute_metric(Ds, Dt, o, kx, ky);

    RunReport r;
    r.command = "metric";
    r.config = {{"source", o.source}, {"target", o.target}, {"metric", o.metric},
                {"kernel_x", kx.to_string()}, {"kernel_y", ky.to_string()}, {"epsilon", o.epsilon},
                {"factor", o.factor}};
    r.discrepancies.push_back(d);
    r.wall_ms = elapsed_ms(start);
    const auto path = output_path(o.out, "metric_report.json");
    write_report(path, r);

    log << "metric   " << o.metric << '\n';
    if (o.metric == "ckb")
        log << "epsilon  " << format_number(o.epsilon) << '\n';
    log << "value    " << format_number(d.value) << '\n'
        << "traces   " << format_number(d.trace_source) << ' ' << format_number(d.trace_target) << '\n'
        << "cross    " << format_number(d.cross_term) << '\n'
        << "report   " << path.string() << '\n';
    return r;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    int seeds = 50;
    std::uint64_t base_seed = 0;
    std::string dims = "2-10";
    std::string classes = "2-5";
    std::string sizes = "10-100";
    std::vector<double> epsilons{1e-3, 1e-2, 1e-1};
    double tolerance = 1e-6;
    int jobs = 1;
    std::string fault; ///< "" or "flip-cross-sign"
    std::string out;
};

/// Random labeled pair for the oracle sweep. Class means differ between the
/// domains so the conditional covariances are not trivially equal.
inline std::pair<LabeledDataset, LabeledDataset> random_verify_pair(std::uint64_t seed, int d, int K, Index n,
                                                                    Index m) {
    Rng rng(seed);
    std::vector<Vector> mu_s(static_cast<std::size_t>(K)), mu_t(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        mu_s[static_cast<std::size_t>(k)] = Vector(d);
        mu_t[static_cast<std::size_t>(k)] = Vector(d);
        for (int i = 0; i < d; ++i) {
            mu_s[static_cast<std::size_t>(k)](i) = 2.0 * rng.normal();
            mu_t[static_cast<std::size_t>(k)](i) = 2.0 * rng.normal();
        }
    }
    const auto draw = [&](Index p, const std::vector<Vector>& mu, double scale, const char* name) {
        std::vector<int> labels(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j)
            labels[static_cast<std::size_t>(j)] = j < K ? static_cast<int>(j) : rng.between(0, K - 1);
        LabeledDataset D;
        D.X.resize(d, p);
        for (Index j = 0; j < p; ++j)
            for (int i = 0; i < d; ++i)
                D.X(i, j) = mu[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])](i) + scale * rng.normal();
        D.Y = one_hot(labels, K);
        D.name = name;
        return D;
    };
    LabeledDataset s = draw(n, mu_s, 1.0, "source");
    LabeledDataset t = draw(m, mu_t, 0.5 + rng.uniform(), "target");
    return {std::move(s), std::move(t)};
}

inline VerifyInstance verify_one(std::uint64_t seed, const VerifyOptions& o) {
    const IntRange dr = IntRange::parse(o.dims, "--dims");
    const IntRange kr = IntRange::parse(o.classes, "--classes");
    const IntRange sr = IntRange::parse(o.sizes, "--sizes");
    Rng pick(mix_seed(seed, 0x5eed));
    VerifyInstance v;
    v.seed = seed;
    v.d = pick.between(dr.lo, dr.hi);
    v.K = pick.between(kr.lo, kr.hi);
    v.n = pick.between(sr.lo, sr.hi);
    v.m = pick.between(sr.lo, sr.hi);
    v.epsilon = o.epsilons[pick.below(o.epsilons.size())];
    const auto [Ds, Dt] = random_verify_pair(mix_seed(seed, 0xda7a), v.d, v.K, v.n, v.m);

    DiscrepancyReport est = ckb_sq(Ds, Dt, KernelSpec::linear(), KernelSpec::linear(), {v.epsilon});
    if (o.fault == "flip-cross-sign")
        est.value = est.trace_source + est.trace_target + 2.0 * est.cross_term;
    v.estimate = est.value;
    v.primal = oracle::ckb_sq_primal(Ds, Dt, v.epsilon);
    v.deviation = std::abs(v.estimate - v.primal) / std::max(1.0, std::abs(v.primal));
    return v;
}

inline RunReport cmd_verify(const VerifyOptions& o, std::ostream& log = std::cout) {
    const auto start = std::chrono::steady_clock::now();
    if (o.seeds < 1)
        throw InputError("--seeds must be positive");
    if (o.epsilons.empty())
        throw InputError("--epsilons must not be empty");
    for (double e : o.epsilons)
        if (!(e > 0.0) || !std::isfinite(e))
            throw InputError("--epsilons must be positive");
    if (!o.fault.empty() && o.fault != "flip-cross-sign")
        throw InputError("unknown fault '" + o.fault + "'");
    const IntRange dr = IntRange::parse(o.dims, "--dims");
    const IntRange kr = IntRange::parse(o.classes, "--classes");
    const IntRange sr = IntRange::parse(o.sizes, "--sizes");
    if (dr.lo < 1 || kr.lo < 2 || sr.lo < 2)
        throw InputError("need d >= 1, K >= 2 and at least two samples");

    VerifySummary summary;
    summary.tolerance = o.tolerance;
    summary.instances.resize(static_cast<std::size_t>(o.seeds));
    parallel_for(summary.instances.size(), o.jobs, [&](std::size_t i) {
        summary.instances[i] = verify_one(o.base_seed + i, o);
    });
    for (const auto& v : summary.instances)
        if (v.deviation > summary.max_deviation || (v.seed == o.base_seed && summary.max_deviation == 0.0)) {
            summary.max_deviation = v.deviation;
            summary.worst_seed = v.seed;
        }
    summary.passed = summary.max_deviation <= o.tolerance;

    RunReport r;
    r.command = "verify";
    r.seed = o.base_seed;
    r.config = {{"seeds", o.seeds}, {"base_seed", o.base_seed}, {"dims", dr.to_string()},
                {"classes", kr.to_string()}, {"sizes", sr.to_string()}, {"epsilons", o.epsilons},
                {"tolerance", o.tolerance}, {"kernel_x", "linear"}, {"kernel_y", "linear"},
                {"fault", o.fault.empty() ? "none" : o.fault}};
    r.verification = summary;
    r.wall_ms = elapsed_ms(start);
    const auto path = output_path(o.out, "verify_report.json");
    write_report(path, r);

    log << "instances      " << o.seeds << '\n'
        << "max deviation  " << format_number(summary.max_deviation) << " (seed " << summary.worst_seed << ")\n"
        << "tolerance      " << format_number(o.tolerance) << '\n'
        << "result         " << (summary.passed ? "pass" : "FAIL") << '\n'
        << "report         " << path.string() << '\n';
    if (!summary.passed)
        throw VerificationError("ckb_sq disagrees with the primal oracle at seed " +
                                std::to_string(summary.worst_seed) + " (deviation " +
                                format_number(summary.max_deviation) + ")");
    return r;
}

// ---------------------------------------------------------------- converge

/// ε_n = c·n^a, written "n^a" or "c*n^a"; a plain number is a constant.
struct EpsilonSchedule {
    double coefficient = 1.0;
    double exponent = -0.25;

    static EpsilonSchedule parse(const std::string& s) {
        EpsilonSchedule e;
        const auto read = [&](const std::string& t) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
                throw InputError("--epsilon-schedule: cannot parse '" + s + "'");
            return v;
        };
        const auto caret = s.find("n^");
        if (caret == std::string::npos) {
            e.coefficient = read(s);
            e.exponent = 0.0;
        } else {
            std::string head = s.substr(0, caret);
            if (!head.empty()) {
                if (head.back() != '*')
                    throw InputError("--epsilon-schedule: cannot parse '" + s + "'");
                head.pop_back();
                e.coefficient = read(head);
            }
            e.exponent = read(s.substr(caret + 2));
        }
        if (!(e.coefficient > 0.0))
            throw InputError("--epsilon-schedule: coefficient must be positive");
        return e;
    }

    double at(Index n) const { return coefficient * std::pow(static_cast<double>(n), exponent); }

    std::string to_string() const {
        if (exponent == 0.0)
            return format_number(coefficient);
        return (coefficient == 1.0 ? std::string() : format_number(coefficient) + "*") + "n^" + format_number(exponent);
    }
};

struct ConvergeOptions {
    std::vector<Index> sizes{32, 64, 128, 256, 512, 1024, 2048};
    int seeds = 20;
    std::uint64_t base_seed = 0;
    std::string epsilon_schedule = "n^-0.25";
    std::string factor = "evd";
    int jobs = 1;
    std::string out;
};

/// Least-squares fit of log(y) = intercept + slope·log(x).
inline std::pair<double, double> loglog_fit(const std::vector<Index>& x, const std::vector<double>& y) {
    const std::size_t k = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lx = std::log(static_cast<double>(x[i])), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double kk = static_cast<double>(k);
    const double slope = (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
    return {slope, (sy - slope * sx) / kk};
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// One same-distribution pair of n samples per domain, CKB with Gaussian kernels.
inline double converge_instance(Index n, std::uint64_t seed, double epsilon, FactorMethod factor) {
    const ShiftConfig cfg = ShiftConfig::same_distribution(static_cast<int>(n / 2), seed);
    const DomainPair pair = synth_conditional_shift(cfg);
    return ckb_sq(pair.source, pair.target, KernelSpec::gaussian_adaptive(), KernelSpec::gaussian_adaptive(),
                  {epsilon, factor})
        .value;
}

inline RunReport cmd_converge(const ConvergeOptions& o, std::ostream& log = std::cout) {
    const auto start = std::chrono::steady_clock::now();
    if (o.sizes.size() < 2)
        throw InputError("--sizes needs at least two entries");
    for (std::size_t i = 0; i < o.sizes.size(); ++i) {
        if (o.sizes[i] < 4 || o.sizes[i] % 2)
            throw InputError("--sizes entries must be even and at least 4");
        if (i && o.sizes[i] <= o.sizes[i - 1])
            throw InputError("--sizes must be increasing");
    }
    if (o.seeds < 1)
        throw InputError("--seeds must be positive");
    const EpsilonSchedule schedule = EpsilonSchedule::parse(o.epsilon_schedule);
    const FactorMethod factor = factor_method_from_string(o.factor);

    const std::size_t S = o.sizes.size(), R = static_cast<std::size_t>(o.seeds);
    std::vector<double> values(S * R);
    // Largest sizes first so parallel workers finish together.
    parallel_for(S * R, o.jobs, [&](std::size_t k) {
        const std::size_t i = S - 1 - k / R, r = k % R;
        const Index n = o.sizes[i];
        values[i * R + r] = std::abs(converge_instance(n, mix_seed(o.base_seed, static_cast<std::uint64_t>(n), r),
                                                       schedule.at(n), factor));
    });

    ConvergeSummary c;
    c.sizes = o.sizes;
    for (std::size_t i = 0; i < S; ++i) {
        c.epsilons.push_back(schedule.at(o.sizes[i]));
        c.medians.push_back(median({values.begin() + static_cast<long>(i * R),
                                    values.begin() + static_cast<long>((i + 1) * R)}));
        if (i && c.medians[i] >= c.medians[i - 1])
            ++c.inversions;
    }
    for (double v : c.medians)
        if (!(v > 0.0))
            throw NumericalError("median estimate is not positive; slope undefined");
    std::tie(c.slope, c.intercept) = loglog_fit(c.sizes, c.medians);

    RunReport r;
    r.command = "converge";
    r.seed = o.base_seed;
    r.config = {{"sizes", o.sizes}, {"seeds", o.seeds}, {"base_seed", o.base_seed},
                {"epsilon_schedule", schedule.to_string()}, {"factor", o.factor},
                {"kernel_x", "gaussian"}, {"kernel_y", "gaussian"}, {"benchmark", "same_distribution"}};
    r.convergence = c;
    r.wall_ms = elapsed_ms(start);
    const auto path = output_path(o.out, "converge_report.json");
    write_report(path, r);
    const auto csv_path = sibling(path, "medians");
    {
        std::ofstream csv(csv_path);
        if (!csv)
            throw InputError("cannot write '" + csv_path.string() + "'");
        csv << "n,epsilon,median_abs_ckb\n";
        for (std::size_t i = 0; i < S; ++i)
            csv << c.sizes[i] << ',' << format_number(c.epsilons[i]) << ',' << format_number(c.medians[i]) << '\n';
    }

    log << "n        epsilon      median |ckb|\n";
    for (std::size_t i = 0; i < S; ++i)
        log << c.sizes[i] << std::string(9 - std::min<std::size_t>(8, std::to_string(c.sizes[i]).size()), ' ')
            << format_number(c.epsilons[i]) << "  " << format_number(c.medians[i]) << '\n';
    log << "slope    " << format_number(c.slope) << '\n'
        << "inversions " << c.inversions << '\n'
        << "report   " << path.string() << '\n';
    return r;
}

// ---------------------------------------------------------------- adapt

struct AdaptOptions {
    std::string source, target;
    AlignmentConfig config;
    std::string out;
};

inline Json config_to_json(const AlignmentConfig& c) {
    return {{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"epsilon", c.epsilon},
            {"variant", to_string(c.variant)}, {"feature_dim_out", c.feature_dim_out},
            {"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
            {"warmup_epochs", c.warmup_epochs}, {"seed", c.seed}, {"kernel_x", c.kernel_x.to_string()},
            {"kernel_y", c.kernel_y.to_string()}, {"loss_scaling", "batch_mean"},
            {"pseudo_labels", "every_step"}};
}

inline void write_curves(const std::filesystem::path& path, const std::vector<LossRecord>& history, bool with_mmd) {
    std::ofstream csv(path);
    if (!csv)
        throw InputError("cannot write '" + path.string() + "'");
    csv << "step,epoch,ce,entropy,ckb" << (with_mmd ? ",mmd" : "") << ",lambda2_effective,total\n";
    for (const auto& h : history) {
        csv << h.step << ',' << h.epoch << ',' << format_number(h.ce) << ',' << format_number(h.entropy) << ','
            << format_number(h.ckb);
        if (with_mmd)
            csv << ',' << format_number(h.mmd.value_or(0.0));
        csv << ',' << format_number(h.lambda2_effective) << ',' << format_number(h.total) << '\n';
    }
}

inline RunReport cmd_adapt(const AdaptOptions& o, std::ostream& log = std::cout) {
    const auto start = std::chrono::steady_clock::now();
    o.config.validate();
    CsvSchema src_schema;
    src_schema.labels_required = true;
    const LabeledDataset Ds = load_csv(o.source, src_schema);
    CsvSchema tgt_schema;
    tgt_schema.num_classes = static_cast<int>(Ds.num_classes());
    const LabeledDataset Dt = load_csv(o.target, tgt_schema);
    if (Dt.dim() != Ds.dim())
        throw InputError("source and target feature dimensions differ");

    // Target labels, if the file has them, only feed the accuracy columns.
    std::optional<std::vector<int>> eval_labels;
    if (Dt.has_labels())
        eval_labels = argmax_labels(*Dt.Y);
    const TrainResult res = train(Ds, Dt.X, o.config, eval_labels);

    RunReport r;
    r.command = "adapt";
    r.seed = o.config.seed;
    r.config = config_to_json(o.config);
    r.config["source"] = o.source;
    r.config["target"] = o.target;
    TrainingSummary t;
    t.history = res.report.history;
    t.source_accuracy_before = res.report.source_accuracy_before;
    t.source_accuracy_after = res.report.source_accuracy_after;
    t.target_accuracy_before = res.report.target_accuracy_before;
    t.target_accuracy_after = res.report.target_accuracy_after;
    t.steps = res.report.steps;
    r.training = t;
    r.wall_ms = elapsed_ms(start);
    const auto path = output_path(o.out, "adapt_report.json");
    write_report(path, r);
    write_curves(sibling(path, "curves"), t.history, o.config.variant == AlignVariant::ckb_plus_mmd);

    log << "variant  " << to_string(o.config.variant) << "  lambda1 " << format_number(o.config.lambda1)
        << "  lambda2 " << format_number(o.config.lambda2) << "  epsilon " << format_number(o.config.epsilon) << '\n'
        << "steps    " << t.steps << '\n'
        << "source accuracy  " << format_number(t.source_accuracy_before) << " -> "
        << format_number(t.source_accuracy_after) << '\n';
    if (t.target_accuracy_after)
        log << "target accuracy  " << format_number(*t.target_accuracy_before) << " -> "
            << format_number(*t.target_accuracy_after) << '\n';
    log << "report   " << path.string() << '\n';
    return r;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
    std::string benchmark = "default"; ///< default | swap | same
    std::uint64_t seed = 0;
    int samples_per_class = 100;
    std::string out_dir;
};

inline ShiftConfig benchmark_config(const std::string& name, std::uint64_t seed, int samples_per_class) {
    ShiftConfig cfg;
    if (name == "default")
        cfg = ShiftConfig::default_benchmark(seed);
    else if (name == "swap")
        cfg = ShiftConfig::swap_benchmark(seed);
    else if (name == "same")
        cfg = ShiftConfig::same_distribution(samples_per_class, seed);
    else
        throw InputError("unknown benchmark '" + name + "' (expected default, swap or same)");
    cfg.samples_per_class = samples_per_class;
    return cfg;
}

inline DomainPair cmd_gen(const GenOptions& o, std::ostream& log = std::cout) {
    const DomainPair pair = synth_conditional_shift(benchmark_config(o.benchmark, o.seed, o.samples_per_class));
    std::filesystem::path dir = o.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("CKB_OUT_DIR");
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw InputError("cannot create directory '" + dir.string() + "'");
    save_csv((dir / "source.csv").string(), pair.source);
    save_csv((dir / "target.csv").string(), pair.target);
    log << "wrote " << (dir / "source.csv").string() << " and " << (dir / "target.csv").string() << '\n';
    return pair;
}

} // namespace ckb::cli
