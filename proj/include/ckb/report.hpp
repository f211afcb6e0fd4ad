#pragma once

// JSON run reports. Every object is read strictly: unknown keys and
// non-finite numbers are rejected. The schema is documented in
// docs/report-schema.md.

#include <ckb/alignment.hpp>
#include <ckb/discrepancy.hpp>
#include <ckb/error.hpp>

#include <json.hpp>

#include <cmath>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ckb {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

namespace detail {

inline void require_keys(const Json& j, const char* what, std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw InputError(std::string(what) + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key()))
            throw InputError(std::string(what) + ": unknown field '" + it.key() + "'");
}

inline double finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw NumericalError(std::string("report field '") + what + "' is not finite");
    return v;
}

inline void put_opt(Json& j, const char* key, const std::optional<double>& v) {
    if (v)
        j[key] = finite(*v, key);
}

inline std::optional<double> get_opt(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

/// Recursively checks that every number in a JSON tree is finite.
inline void require_finite_tree(const Json& j, const std::string& path) {
    if (j.is_number_float() && !std::isfinite(j.get<double>()))
        throw NumericalError("report field '" + path + "' is not finite");
    if (j.is_object())
        for (auto it = j.begin(); it != j.end(); ++it)
            require_finite_tree(it.value(), path + "." + it.key());
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i)
            require_finite_tree(j[i], path + "[" + std::to_string(i) + "]");
}

} // namespace detail

inline Json to_json(const BandwidthLog& b) {
    Json j = Json::object();
    detail::put_opt(j, "x_source", b.x_source);
    detail::put_opt(j, "x_target", b.x_target);
    detail::put_opt(j, "x_cross", b.x_cross);
    detail::put_opt(j, "y_source", b.y_source);
    detail::put_opt(j, "y_target", b.y_target);
    detail::put_opt(j, "y_cross", b.y_cross);
    return j;
}

inline BandwidthLog bandwidth_log_from_json(const Json& j) {
    detail::require_keys(j, "sigma2", {"x_source", "x_target", "x_cross", "y_source", "y_target", "y_cross"});
    return {detail::get_opt(j, "x_source"), detail::get_opt(j, "x_target"), detail::get_opt(j, "x_cross"),
            detail::get_opt(j, "y_source"), detail::get_opt(j, "y_target"), detail::get_opt(j, "y_cross")};
}

inline Json to_json(const DiscrepancyReport& r) {
    Json j;
    j["kind"] = to_string(r.kind);
    j["trace_source"] = detail::finite(r.trace_source, "trace_source");
    j["trace_target"] = detail::finite(r.trace_target, "trace_target");
    j["cross_term"] = detail::finite(r.cross_term, "cross_term");
    j["value"] = detail::finite(r.value, "value");
    detail::put_opt(j, "epsilon", r.epsilon);
    j["sigma2"] = to_json(r.sigma2);
    j["n"] = r.n;
    j["m"] = r.m;
    return j;
}

inline DiscrepancyReport discrepancy_from_json(const Json& j) {
    detail::require_keys(j, "discrepancy",
                         {"kind", "trace_source", "trace_target", "cross_term", "value", "epsilon", "sigma2", "n", "m"});
    DiscrepancyReport r;
    r.kind = metric_kind_from_string(j.at("kind").get<std::string>());
    r.trace_source = j.at("trace_source").get<double>();
    r.trace_target = j.at("trace_target").get<double>();
    r.cross_term = j.at("cross_term").get<double>();
    r.value = j.at("value").get<double>();
    r.epsilon = detail::get_opt(j, "epsilon");
    r.sigma2 = bandwidth_log_from_json(j.at("sigma2"));
    r.n = j.at("n").get<Index>();
    r.m = j.at("m").get<Index>();
    return r;
}

inline Json to_json(const LossRecord& r) {
    Json j;
    j["step"] = r.step;
    j["epoch"] = r.epoch;
    j["ce"] = detail::finite(r.ce, "ce");
    j["entropy"] = detail::finite(r.entropy, "entropy");
    j["ckb"] = detail::finite(r.ckb, "ckb");
    detail::put_opt(j, "mmd", r.mmd);
    j["lambda2_effective"] = r.lambda2_effective;
    j["total"] = detail::finite(r.total, "total");
    return j;
}

inline LossRecord loss_record_from_json(const Json& j) {
    detail::require_keys(j, "loss record", {"step", "epoch", "ce", "entropy", "ckb", "mmd", "lambda2_effective", "total"});
    LossRecord r;
    r.step = j.at("step").get<long>();
    r.epoch = j.at("epoch").get<int>();
    r.ce = j.at("ce").get<double>();
    r.entropy = j.at("entropy").get<double>();
    r.ckb = j.at("ckb").get<double>();
    r.mmd = detail::get_opt(j, "mmd");
    r.lambda2_effective = j.at("lambda2_effective").get<double>();
    r.total = j.at("total").get<double>();
    return r;
}

/// One oracle comparison inside a verify run.
struct VerifyInstance {
    std::uint64_t seed = 0;
    int d = 0, K = 0;
    Index n = 0, m = 0;
    double epsilon = 0.0;
    double estimate = 0.0;
    double primal = 0.0;
    double deviation = 0.0; ///< |estimate − primal| / max(1, |primal|)
};

struct VerifySummary {
    double tolerance = 1e-6;
    double max_deviation = 0.0;
    std::uint64_t worst_seed = 0;
    bool passed = true;
    std::vector<VerifyInstance> instances;
};

struct ConvergeSummary {
    std::vector<Index> sizes;
    std::vector<double> epsilons;
    std::vector<double> medians;
    double slope = 0.0;
    double intercept = 0.0;
    int inversions = 0;
};

struct TrainingSummary {
    std::vector<LossRecord> history;
    double source_accuracy_before = 0.0, source_accuracy_after = 0.0;
    std::optional<double> target_accuracy_before, target_accuracy_after;
    long steps = 0;
    std::string loss_scaling = "batch_mean";
};

struct RunReport {
    int schema_version = kReportSchemaVersion;
    std::string artifact_version = kArtifactVersion;
    std::string command;
    Json config = Json::object(); ///< resolved configuration, every default materialized
    std::vector<DiscrepancyReport> discrepancies;
    std::optional<VerifySummary> verification;
    std::optional<ConvergeSummary> convergence;
    std::optional<TrainingSummary> training;
    std::optional<std::uint64_t> seed;
    double wall_ms = 0.0;
};

inline Json to_json(const RunReport& r) {
    Json j;
    j["schema_version"] = r.schema_version;
    j["artifact_version"] = r.artifact_version;
    j["command"] = r.command;
    detail::require_finite_tree(r.config, "config");
    j["config"] = r.config;
    j["discrepancies"] = Json::array();
    for (const auto& d : r.discrepancies)
        j["discrepancies"].push_back(to_json(d));
    if (r.verification) {
        const VerifySummary& v = *r.verification;
        Json vj;
        vj["tolerance"] = v.tolerance;
        vj["max_deviation"] = detail::finite(v.max_deviation, "max_deviation");
        vj["worst_seed"] = v.worst_seed;
        vj["passed"] = v.passed;
        vj["instances"] = Json::array();
        for (const auto& i : v.instances)
            vj["instances"].push_back({{"seed", i.seed}, {"d", i.d}, {"K", i.K}, {"n", i.n}, {"m", i.m},
                                       {"epsilon", i.epsilon},
                                       {"estimate", detail::finite(i.estimate, "estimate")},
                                       {"primal", detail::finite(i.primal, "primal")},
                                       {"deviation", detail::finite(i.deviation, "deviation")}});
        j["verification"] = vj;
    }
    if (r.convergence) {
        const ConvergeSummary& c = *r.convergence;
        for (double v : c.medians)
            detail::finite(v, "medians");
        j["convergence"] = {{"sizes", c.sizes},
                            {"epsilons", c.epsilons},
                            {"medians", c.medians},
                            {"slope", detail::finite(c.slope, "slope")},
                            {"intercept", detail::finite(c.intercept, "intercept")},
                            {"inversions", c.inversions}};
    }
    if (r.training) {
        const TrainingSummary& t = *r.training;
        Json tj;
        tj["history"] = Json::array();
        for (const auto& rec : t.history)
            tj["history"].push_back(to_json(rec));
        tj["source_accuracy_before"] = t.source_accuracy_before;
        tj["source_accuracy_after"] = t.source_accuracy_after;
        detail::put_opt(tj, "target_accuracy_before", t.target_accuracy_before);
        detail::put_opt(tj, "target_accuracy_after", t.target_accuracy_after);
        tj["steps"] = t.steps;
        tj["loss_scaling"] = t.loss_scaling;
        j["training"] = tj;
    }
    if (r.seed)
        j["seed"] = *r.seed;
    j["wall_ms"] = detail::finite(r.wall_ms, "wall_ms");
    return j;
}

inline RunReport run_report_from_json(const Json& j) {
    detail::require_keys(j, "run report",
                         {"schema_version", "artifact_version", "command", "config", "discrepancies", "verification",
                          "convergence", "training", "seed", "wall_ms"});
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
        throw InputError("unsupported report schema version " + std::to_string(r.schema_version));
    r.artifact_version = j.at("artifact_version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    if (!r.config.is_object())
        throw InputError("run report: config must be an object");
    for (const auto& d : j.at("discrepancies"))
        r.discrepancies.push_back(discrepancy_from_json(d));
    if (j.contains("verification")) {
        const Json& vj = j.at("verification");
        detail::require_keys(vj, "verification", {"tolerance", "max_deviation", "worst_seed", "passed", "instances"});
        VerifySummary v;
        v.tolerance = vj.at("tolerance").get<double>();
        v.max_deviation = vj.at("max_deviation").get<double>();
        v.worst_seed = vj.at("worst_seed").get<std::uint64_t>();
        v.passed = vj.at("passed").get<bool>();
        for (const auto& ij : vj.at("instances")) {
            detail::require_keys(ij, "verify instance",
                                 {"seed", "d", "K", "n", "m", "epsilon", "estimate", "primal", "deviation"});
            v.instances.push_back({ij.at("seed").get<std::uint64_t>(), ij.at("d").get<int>(), ij.at("K").get<int>(),
                                   ij.at("n").get<Index>(), ij.at("m").get<Index>(), ij.at("epsilon").get<double>(),
                                   ij.at("estimate").get<double>(), ij.at("primal").get<double>(),
                                   ij.at("deviation").get<double>()});
        }
        r.verification = v;
    }
    if (j.contains("convergence")) {
        const Json& cj = j.at("convergence");
        detail::require_keys(cj, "convergence", {"sizes", "epsilons", "medians", "slope", "intercept", "inversions"});
        ConvergeSummary c;
        c.sizes = cj.at("sizes").get<std::vector<Index>>();
        c.epsilons = cj.at("epsilons").get<std::vector<double>>();
        c.medians = cj.at("medians").get<std::vector<double>>();
        c.slope = cj.at("slope").get<double>();
        c.intercept = cj.at("intercept").get<double>();
        c.inversions = cj.at("inversions").get<int>();
        r.convergence = c;
    }
    if (j.contains("training")) {
        const Json& tj = j.at("training");
        detail::require_keys(tj, "training",
                             {"history", "source_accuracy_before", "source_accuracy_after", "target_accuracy_before",
                              "target_accuracy_after", "steps", "loss_scaling"});
        TrainingSummary t;
        for (const auto& rec : tj.at("history"))
            t.history.push_back(loss_record_from_json(rec));
        t.source_accuracy_before = tj.at("source_accuracy_before").get<double>();
        t.source_accuracy_after = tj.at("source_accuracy_after").get<double>();
        t.target_accuracy_before = detail::get_opt(tj, "target_accuracy_before");
        t.target_accuracy_after = detail::get_opt(tj, "target_accuracy_after");
        t.steps = tj.at("steps").get<long>();
        t.loss_scaling = tj.at("loss_scaling").get<std::string>();
        r.training = t;
    }
    if (j.contains("seed"))
        r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

} // namespace ckb
