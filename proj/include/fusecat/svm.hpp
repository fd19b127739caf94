#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fusecat/ops.hpp"

namespace fusecat {

// One-vs-rest linear SVM. Row c of `weights` plus `biases[c]` scores class c.
struct SvmModel {
    Matrix weights;                  // classes x dim
    std::vector<float> biases;       // classes
    std::vector<std::string> labels; // class index -> label string
    float hyper_c = 1.0f;

    int64_t num_classes() const { return weights.rows; }
    int64_t dim() const { return weights.cols; }
    int class_index(const std::string& label) const; // throws lookup_error
};

struct TrainOptions {
    float C = 1.0f;
    double tolerance = 1e-3; // on the maximal projected gradient
    int max_sweeps = 1000;
    uint64_t seed = 1;
    int threads = 1; // per-class binary problems run in parallel
};

// Per-sweep solver telemetry for one binary problem.
struct SweepStat {
    double dual_objective; // sum(alpha) - 0.5*||w||^2, non-decreasing
    double max_projected_gradient;
};

struct TrainTrace {
    std::vector<std::vector<SweepStat>> per_class;
};

// Trains hinge-loss L2-regularized binary classifiers (one per class) by
// dual coordinate descent. Deterministic for a fixed seed.
SvmModel train(const Matrix& features, std::span<const std::string> labels,
               const TrainOptions& opts = {}, TrainTrace* trace = nullptr);

// Raw per-class scores w.x + b.
Matrix decision_scores(const SvmModel& model, const Matrix& features);

// Argmax of decision scores, ties to the lowest class index.
std::vector<int> predict(const SvmModel& model, const Matrix& features);

struct Evaluation {
    double mean_per_class_accuracy = 0.0; // percent
    double sample_accuracy = 0.0;         // percent
    std::vector<double> per_class_recall; // percent, by class index
    std::vector<std::vector<int64_t>> confusion; // [true][predicted]
};

Evaluation evaluate(const SvmModel& model, const Matrix& features,
                    std::span<const std::string> labels);

// Picks C from {0.01, 0.1, 1, 10} by stratified 3-fold cross-validation.
float grid_search_c(const Matrix& features, std::span<const std::string> labels,
                    const TrainOptions& base);

// .fsv container (same layout family as the model file).
void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(const std::string& path);
std::vector<uint8_t> serialize_svm(const SvmModel& model);
SvmModel parse_svm(const std::vector<uint8_t>& bytes);

} // namespace fusecat
