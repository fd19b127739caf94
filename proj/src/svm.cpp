#include "fusecat/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "fusecat/binio.hpp"
#include "fusecat/errors.hpp"
#include "fusecat/threading.hpp"

namespace fusecat {

using nlohmann::json;

int SvmModel::class_index(const std::string& label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label)
            return static_cast<int>(i);
    throw lookup_error("label '" + label + "' is not in the model's label map");
}

namespace {

// Dual coordinate descent for min 0.5*||w||^2 + C * sum hinge(y_i, w.x_i),
// on bias-augmented features (x_i, 1). Shrinking is off; the sweep order is
// a seeded random permutation redrawn each pass.
void train_binary(const Matrix& x, const std::vector<int8_t>& y, float C, double tol,
                  int max_sweeps, uint64_t seed, std::vector<double>& w_out,
                  std::vector<SweepStat>* sweeps) {
    const int64_t n = x.rows;
    const int64_t dim = x.cols + 1; // bias column folded in

    std::vector<double> w(static_cast<size_t>(dim), 0.0);
    std::vector<double> alpha(static_cast<size_t>(n), 0.0);

    // Q_ii = x_i.x_i + 1 (the augmented coordinate)
    std::vector<double> qdiag(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const float* xi = x.row(i);
        double s = 1.0;
        for (int64_t j = 0; j < x.cols; ++j)
            s += static_cast<double>(xi[j]) * xi[j];
        qdiag[static_cast<size_t>(i)] = s;
    }

    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        double max_pg = 0.0;
        for (int64_t idx : order) {
            const size_t i = static_cast<size_t>(idx);
            const float* xi = x.row(idx);
            double wx = w[static_cast<size_t>(dim - 1)];
            for (int64_t j = 0; j < x.cols; ++j)
                wx += w[static_cast<size_t>(j)] * xi[j];
            const double grad = y[i] * wx - 1.0;

            double pg = grad;
            if (alpha[i] <= 0.0)
                pg = std::min(grad, 0.0);
            else if (alpha[i] >= C)
                pg = std::max(grad, 0.0);
            max_pg = std::max(max_pg, std::abs(pg));
            if (pg == 0.0)
                continue;

            const double old = alpha[i];
            const double next = std::clamp(old - grad / qdiag[i], 0.0, static_cast<double>(C));
            const double delta = (next - old) * y[i];
            if (delta == 0.0)
                continue;
            alpha[i] = next;
            for (int64_t j = 0; j < x.cols; ++j)
                w[static_cast<size_t>(j)] += delta * xi[j];
            w[static_cast<size_t>(dim - 1)] += delta;
        }

        if (sweeps) {
            double wnorm2 = 0.0;
            for (double v : w)
                wnorm2 += v * v;
            double asum = 0.0;
            for (double a : alpha)
                asum += a;
            sweeps->push_back({asum - 0.5 * wnorm2, max_pg});
        }
        if (max_pg < tol)
            break;
    }
    w_out = std::move(w);
}

std::vector<std::string> unique_sorted_labels(std::span<const std::string> labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

} // namespace

SvmModel train(const Matrix& features, std::span<const std::string> labels,
               const TrainOptions& opts, TrainTrace* trace) {
    if (features.rows < 2)
        throw error("train: need at least two samples");
    if (features.cols < 1)
        throw error("train: features have zero dimension");
    if (static_cast<int64_t>(labels.size()) != features.rows)
        throw shape_error("train: label count does not match feature rows");
    if (opts.C <= 0.0f)
        throw error("train: C must be positive");

    SvmModel model;
    model.labels = unique_sorted_labels(labels);
    if (model.labels.size() < 2)
        throw error("train: need at least two distinct classes");
    model.hyper_c = opts.C;

    const int64_t classes = static_cast<int64_t>(model.labels.size());
    std::vector<int> y_index(static_cast<size_t>(features.rows));
    std::map<std::string, int> index;
    for (size_t c = 0; c < model.labels.size(); ++c)
        index[model.labels[c]] = static_cast<int>(c);
    for (int64_t i = 0; i < features.rows; ++i)
        y_index[static_cast<size_t>(i)] = index.at(labels[static_cast<size_t>(i)]);

    model.weights = Matrix(classes, features.cols);
    model.biases.assign(static_cast<size_t>(classes), 0.0f);
    if (trace)
        trace->per_class.assign(static_cast<size_t>(classes), {});

    parallel_for(classes, opts.threads, [&](int64_t c) {
        std::vector<int8_t> y(static_cast<size_t>(features.rows));
        for (int64_t i = 0; i < features.rows; ++i)
            y[static_cast<size_t>(i)] =
                y_index[static_cast<size_t>(i)] == static_cast<int>(c) ? 1 : -1;
        std::vector<double> w;
        // Distinct deterministic stream per class.
        train_binary(features, y, opts.C, opts.tolerance, opts.max_sweeps,
                     opts.seed * 1000003ull + static_cast<uint64_t>(c), w,
                     trace ? &trace->per_class[static_cast<size_t>(c)] : nullptr);
        for (int64_t j = 0; j < features.cols; ++j)
            model.weights.at(c, j) = static_cast<float>(w[static_cast<size_t>(j)]);
        model.biases[static_cast<size_t>(c)] = static_cast<float>(w[static_cast<size_t>(features.cols)]);
    });
    return model;
}

Matrix decision_scores(const SvmModel& model, const Matrix& features) {
    if (features.cols != model.dim())
        throw shape_error("decision_scores: feature dim " + std::to_string(features.cols) +
                          " != model dim " + std::to_string(model.dim()));
    Matrix scores(features.rows, model.num_classes());
    for (int64_t i = 0; i < features.rows; ++i) {
        const float* xi = features.row(i);
        float* out = scores.row(i);
        for (int64_t c = 0; c < model.num_classes(); ++c) {
            const float* wc = model.weights.row(c);
            double s = model.biases[static_cast<size_t>(c)];
            for (int64_t j = 0; j < features.cols; ++j)
                s += static_cast<double>(wc[j]) * xi[j];
            out[c] = static_cast<float>(s);
        }
    }
    return scores;
}

std::vector<int> predict(const SvmModel& model, const Matrix& features) {
    const Matrix scores = decision_scores(model, features);
    std::vector<int> out(static_cast<size_t>(features.rows));
    for (int64_t i = 0; i < scores.rows; ++i) {
        const float* row = scores.row(i);
        int best = 0;
        for (int64_t c = 1; c < scores.cols; ++c)
            if (row[c] > row[best])
                best = static_cast<int>(c);
        out[static_cast<size_t>(i)] = best;
    }
    return out;
}

Evaluation evaluate(const SvmModel& model, const Matrix& features,
                    std::span<const std::string> labels) {
    if (labels.empty())
        throw error("evaluate: no labels");
    if (static_cast<int64_t>(labels.size()) != features.rows)
        throw shape_error("evaluate: label count does not match feature rows");

    const int64_t classes = model.num_classes();
    const std::vector<int> predictions = predict(model, features);

    Evaluation ev;
    ev.confusion.assign(static_cast<size_t>(classes),
                        std::vector<int64_t>(static_cast<size_t>(classes), 0));
    int64_t correct = 0;
    for (int64_t i = 0; i < features.rows; ++i) {
        const int truth = model.class_index(labels[static_cast<size_t>(i)]);
        const int pred = predictions[static_cast<size_t>(i)];
        ++ev.confusion[static_cast<size_t>(truth)][static_cast<size_t>(pred)];
        if (truth == pred)
            ++correct;
    }
    ev.sample_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(features.rows);

    double recall_sum = 0.0;
    int64_t seen_classes = 0;
    ev.per_class_recall.assign(static_cast<size_t>(classes), 0.0);
    for (int64_t c = 0; c < classes; ++c) {
        int64_t total = 0;
        for (int64_t p = 0; p < classes; ++p)
            total += ev.confusion[static_cast<size_t>(c)][static_cast<size_t>(p)];
        if (total == 0)
            continue;
        const double recall =
            100.0 * static_cast<double>(ev.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)]) /
            static_cast<double>(total);
        ev.per_class_recall[static_cast<size_t>(c)] = recall;
        recall_sum += recall;
        ++seen_classes;
    }
    ev.mean_per_class_accuracy = seen_classes ? recall_sum / static_cast<double>(seen_classes) : 0.0;
    return ev;
}

float grid_search_c(const Matrix& features, std::span<const std::string> labels,
                    const TrainOptions& base) {
    const std::vector<float> grid = {0.01f, 0.1f, 1.0f, 10.0f};
    constexpr int kFolds = 3;

    // Stratified fold assignment: the i-th occurrence of a label goes to
    // fold i % kFolds.
    std::map<std::string, int> seen;
    std::vector<int> fold(static_cast<size_t>(features.rows));
    for (int64_t i = 0; i < features.rows; ++i)
        fold[static_cast<size_t>(i)] = seen[labels[static_cast<size_t>(i)]]++ % kFolds;

    float best_c = grid[0];
    double best_score = -1.0;
    for (float c : grid) {
        double score_sum = 0.0;
        for (int f = 0; f < kFolds; ++f) {
            Matrix train_x(0, features.cols), test_x(0, features.cols);
            std::vector<std::string> train_y, test_y;
            for (int64_t i = 0; i < features.rows; ++i) {
                const bool is_test = fold[static_cast<size_t>(i)] == f;
                Matrix& m = is_test ? test_x : train_x;
                m.data.insert(m.data.end(), features.row(i), features.row(i) + features.cols);
                ++m.rows;
                (is_test ? test_y : train_y).push_back(labels[static_cast<size_t>(i)]);
            }
            if (test_y.empty() || train_y.empty())
                continue;
            TrainOptions opts = base;
            opts.C = c;
            const SvmModel model = train(train_x, train_y, opts);
            bool all_known = true;
            for (const std::string& l : test_y)
                if (std::find(model.labels.begin(), model.labels.end(), l) == model.labels.end())
                    all_known = false;
            if (!all_known)
                continue;
            score_sum += evaluate(model, test_x, test_y).mean_per_class_accuracy;
        }
        if (score_sum > best_score) {
            best_score = score_sum;
            best_c = c;
        }
    }
    return best_c;
}

namespace {
constexpr char kMagic[4] = {'F', 'S', 'V', '1'};
}

std::vector<uint8_t> serialize_svm(const SvmModel& model) {
    BinWriter w;
    w.bytes(kMagic, 4);
    w.u32(1);
    json meta;
    meta["labels"] = model.labels;
    meta["dim"] = model.dim();
    meta["classes"] = model.num_classes();
    meta["C"] = model.hyper_c;
    w.str(meta.dump());
    w.floats(model.weights.data);
    w.floats(model.biases);
    return w.buffer();
}

SvmModel parse_svm(const std::vector<uint8_t>& bytes) {
    BinReader r(bytes);
    r.magic(kMagic, "svm file");
    const uint32_t version = r.u32();
    if (version != 1)
        throw corrupt_file_error("svm file: unsupported version " + std::to_string(version));

    SvmModel model;
    int64_t classes = 0, dim = 0;
    try {
        const json meta = json::parse(r.str());
        model.labels = meta.at("labels").get<std::vector<std::string>>();
        dim = meta.at("dim").get<int64_t>();
        classes = meta.at("classes").get<int64_t>();
        model.hyper_c = meta.value("C", 1.0f);
    } catch (const json::exception& e) {
        throw corrupt_file_error(std::string("svm file: bad meta section: ") + e.what());
    }
    if (classes < 2 || dim < 1 || static_cast<int64_t>(model.labels.size()) != classes)
        throw corrupt_file_error("svm file: inconsistent class metadata");
    if (classes > (1 << 24) || dim > (1ll << 40) / classes)
        throw corrupt_file_error("svm file: implausible matrix size");
    model.weights.rows = classes;
    model.weights.cols = dim;
    r.floats(model.weights.data, static_cast<size_t>(classes * dim));
    std::vector<float> biases;
    r.floats(biases, static_cast<size_t>(classes));
    model.biases = std::move(biases);
    if (!r.at_end())
        throw corrupt_file_error("svm file: trailing bytes");
    for (float v : model.weights.data)
        if (!std::isfinite(v))
            throw corrupt_file_error("svm file: non-finite weight");
    return model;
}

void save_svm(const std::string& path, const SvmModel& model) {
    BinWriter w;
    const std::vector<uint8_t> bytes = serialize_svm(model);
    w.bytes(bytes.data(), bytes.size());
    w.save(path);
}

SvmModel load_svm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corrupt_file_error("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_svm(bytes);
}

} // namespace fusecat
