#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "ggls/classify.hpp"
#include "ggls/dataset.hpp"
#include "ggls/errors.hpp"
#include "ggls/solver.hpp"

namespace ggls {

/// Target-domain classification report. Confusion rows are truth classes,
/// columns predicted classes, so each row sums to that class's support.
struct EvalReport {
    double accuracy = 0.0;
    Eigen::VectorXd per_class_accuracy; // length C
    Eigen::MatrixXi confusion;          // C x C
    GglsConfig config;
    std::vector<TraceRecord> trace;  // empty for the raw baseline
    Eigen::VectorXi predictions;     // the labels the report was built from
    double duration_seconds = 0.0;
};

/// Fraction of exact label matches.
inline double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth) {
    if (predicted.size() != truth.size() || predicted.size() < 1)
        throw DataFormatError("eval: prediction and truth lengths differ");
    return static_cast<double>((predicted.array() == truth.array()).count()) /
           static_cast<double>(predicted.size());
}

inline EvalReport build_report(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth,
                               int class_count, const GglsConfig& config,
                               std::vector<TraceRecord> trace = {}) {
    EvalReport report;
    report.accuracy = accuracy(predicted, truth);
    report.confusion = Eigen::MatrixXi::Zero(class_count, class_count);
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        if (truth[i] < 1 || truth[i] > class_count || predicted[i] < 1 ||
            predicted[i] > class_count)
            throw DataFormatError("eval: label out of range 1..C");
        report.confusion(truth[i] - 1, predicted[i] - 1) += 1;
    }
    report.per_class_accuracy.resize(class_count);
    for (int c = 0; c < class_count; ++c) {
        const int support = report.confusion.row(c).sum();
        report.per_class_accuracy[c] =
            support > 0 ? static_cast<double>(report.confusion(c, c)) / support : 0.0;
    }
    report.config = config;
    report.trace = std::move(trace);
    report.predictions = predicted;
    return report;
}

/// 1-NN from the normalized source features straight onto the target, the
/// no-adaptation reference point.
inline EvalReport baseline_1nn(const DomainDataset& dataset) {
    if (!dataset.target_labels)
        throw EvalError("eval: baseline requires target truth labels");
    const DomainDataset norm = normalize(dataset);
    const Eigen::VectorXi predicted =
        nn_classify(norm.source_features, norm.source_labels, norm.target_features);
    return build_report(predicted, *dataset.target_labels, dataset.class_count, GglsConfig{});
}

/// Runs the full model and its ablations on one dataset. Variant names
/// follow the convention GGLS / GGLS-noLS / GGLS-noMFL / GGLS-noLSMFL /
/// GGLS-noLSMFLKF (landmark selection, manifold feature learning, kernel
/// function removed in turn).
inline std::vector<std::pair<std::string, EvalReport>> ablation_suite(
    const DomainDataset& dataset, const GglsConfig& base_config) {
    if (!dataset.target_labels)
        throw EvalError("eval: ablation suite requires target truth labels");

    struct Variant {
        std::string name;
        bool no_landmark;
        bool no_manifold;
        bool no_kernel;
    };
    const std::vector<Variant> variants = {
        {"GGLS", false, false, false},
        {"GGLS-noLS", true, false, false},
        {"GGLS-noMFL", false, true, false},
        {"GGLS-noLSMFL", true, true, false},
        {"GGLS-noLSMFLKF", true, true, true},
    };

    std::vector<std::pair<std::string, EvalReport>> out;
    out.reserve(variants.size());
    for (const auto& v : variants) {
        GglsConfig cfg = base_config;
        cfg.no_landmark = v.no_landmark;
        cfg.no_manifold = v.no_manifold;
        cfg.no_kernel = v.no_kernel;
        const auto start = std::chrono::steady_clock::now();
        const FittedModel model = fit(dataset, cfg);
        EvalReport report = build_report(model.pseudo_labels, *dataset.target_labels,
                                         dataset.class_count, cfg, model.trace);
        report.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.emplace_back(v.name, std::move(report));
    }
    return out;
}

} // namespace ggls
