#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fusecat/svm.hpp"
#include "test_helpers.hpp"

using namespace fusecat;
using namespace testutil;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

struct Blobs {
    Matrix x;
    std::vector<std::string> y;
};

// Gaussian blobs, `per_class` points around each center.
Blobs make_blobs(const std::vector<std::pair<float, float>>& centers, int per_class,
                 float sigma, uint64_t seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::normal_distribution<float> noise(0.0f, sigma);
    Blobs b;
    b.x = Matrix(static_cast<int64_t>(centers.size()) * per_class, 2);
    int64_t row = 0;
    for (size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            b.x.at(row, 0) = centers[c].first + noise(rng);
            b.x.at(row, 1) = centers[c].second + noise(rng);
            b.y.push_back("class" + std::to_string(c));
        }
    }
    return b;
}

// Independent reference solver: one-vs-rest Pegasos (primal stochastic
// subgradient on the same objective family). Shares nothing with the dual
// coordinate descent implementation under test.
Matrix pegasos_ovr(const Matrix& x, const std::vector<std::string>& y,
                   const std::vector<std::string>& classes, float C, int epochs,
                   uint64_t seed) {
    const int64_t n = x.rows;
    const double lambda = 1.0 / (static_cast<double>(n) * C);
    Matrix w(static_cast<int64_t>(classes.size()), x.cols + 1); // bias last
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    for (size_t c = 0; c < classes.size(); ++c) {
        std::vector<double> wc(static_cast<size_t>(x.cols) + 1, 0.0);
        int64_t t = 1;
        for (int epoch = 0; epoch < epochs; ++epoch) {
            for (int64_t step = 0; step < n; ++step, ++t) {
                const int64_t i = pick(rng);
                const double yi = y[static_cast<size_t>(i)] == classes[c] ? 1.0 : -1.0;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                double margin = wc[static_cast<size_t>(x.cols)];
                for (int64_t j = 0; j < x.cols; ++j)
                    margin += wc[static_cast<size_t>(j)] * x.at(i, j);
                margin *= yi;
                for (double& v : wc)
                    v *= 1.0 - eta * lambda;
                if (margin < 1.0) {
                    for (int64_t j = 0; j < x.cols; ++j)
                        wc[static_cast<size_t>(j)] += eta * yi * x.at(i, j);
                    wc[static_cast<size_t>(x.cols)] += eta * yi;
                }
            }
        }
        for (int64_t j = 0; j <= x.cols; ++j)
            w.at(static_cast<int64_t>(c), j) = static_cast<float>(wc[static_cast<size_t>(j)]);
    }
    return w;
}

double pegasos_accuracy(const Matrix& w, const std::vector<std::string>& classes,
                        const Matrix& x, const std::vector<std::string>& y) {
    int64_t correct = 0;
    for (int64_t i = 0; i < x.rows; ++i) {
        int best = 0;
        double best_score = -1e300;
        for (int64_t c = 0; c < w.rows; ++c) {
            double s = w.at(c, x.cols);
            for (int64_t j = 0; j < x.cols; ++j)
                s += w.at(c, j) * x.at(i, j);
            if (s > best_score) {
                best_score = s;
                best = static_cast<int>(c);
            }
        }
        correct += classes[static_cast<size_t>(best)] == y[static_cast<size_t>(i)];
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(x.rows);
}

} // namespace

TEST_CASE("separable blobs train to 100% training accuracy") {
    const Blobs b = make_blobs({{-4.0f, 0.0f}, {4.0f, 0.0f}}, 40, 0.5f, 1);
    TrainOptions opts;
    opts.C = 1.0f;
    const SvmModel model = train(b.x, b.y, opts);
    const Evaluation ev = evaluate(model, b.x, b.y);
    CHECK(ev.sample_accuracy == doctest::Approx(100.0));
    CHECK(ev.mean_per_class_accuracy == doctest::Approx(100.0));
}

TEST_CASE("four-class blobs: held-out accuracy and reference-solver agreement") {
    const std::vector<std::pair<float, float>> centers = {
        {3.0f, 0.0f}, {-3.0f, 0.0f}, {0.0f, 3.0f}, {0.0f, -3.0f}};
    const Blobs train_set = make_blobs(centers, 50, 0.9f, 2);
    const Blobs test_set = make_blobs(centers, 25, 0.9f, 3);

    TrainOptions opts;
    opts.C = 1.0f;
    const SvmModel model = train(train_set.x, train_set.y, opts);
    const Evaluation ev = evaluate(model, test_set.x, test_set.y);
    CHECK(ev.mean_per_class_accuracy >= 95.0);

    const Matrix ref = pegasos_ovr(train_set.x, train_set.y, model.labels, 1.0f, 60, 4);
    const double ref_acc = pegasos_accuracy(ref, model.labels, test_set.x, test_set.y);
    CHECK(std::abs(ref_acc - ev.mean_per_class_accuracy) <= 1.0);
}

TEST_CASE("duplicating every sample with halved C keeps the boundary") {
    const Blobs b = make_blobs({{-2.0f, 1.0f}, {2.0f, -1.0f}}, 30, 1.0f, 5);

    Matrix doubled(b.x.rows * 2, b.x.cols);
    std::vector<std::string> doubled_y;
    for (int64_t i = 0; i < b.x.rows; ++i) {
        for (int64_t j = 0; j < b.x.cols; ++j) {
            doubled.at(2 * i, j) = b.x.at(i, j);
            doubled.at(2 * i + 1, j) = b.x.at(i, j);
        }
        doubled_y.push_back(b.y[static_cast<size_t>(i)]);
        doubled_y.push_back(b.y[static_cast<size_t>(i)]);
    }

    TrainOptions opts;
    opts.C = 1.0f;
    opts.tolerance = 1e-5;
    opts.max_sweeps = 5000;
    const SvmModel base = train(b.x, b.y, opts);
    TrainOptions half = opts;
    half.C = 0.5f;
    const SvmModel dup = train(doubled, doubled_y, half);

    // Same optimum => same weight vectors up to solver tolerance.
    for (int64_t c = 0; c < base.num_classes(); ++c) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int64_t j = 0; j < base.dim(); ++j) {
            dot += static_cast<double>(base.weights.at(c, j)) * dup.weights.at(c, j);
            na += static_cast<double>(base.weights.at(c, j)) * base.weights.at(c, j);
            nb += static_cast<double>(dup.weights.at(c, j)) * dup.weights.at(c, j);
        }
        CHECK(dot / std::sqrt(na * nb) > 0.999);
        CHECK(std::abs(base.biases[static_cast<size_t>(c)] - dup.biases[static_cast<size_t>(c)]) <
              0.05);
    }
    // And identical predictions on fresh points.
    const Blobs probe = make_blobs({{-2.0f, 1.0f}, {2.0f, -1.0f}}, 20, 1.0f, 6);
    CHECK(predict(base, probe.x) == predict(dup, probe.x));
}

TEST_CASE("dual objective is monotone non-decreasing per sweep") {
    std::mt19937 rng(7);
    for (int problem = 0; problem < 20; ++problem) {
        const int64_t n = 20 + problem, dim = 3 + problem % 4;
        Matrix x(n, dim);
        x.data = random_vector(static_cast<size_t>(n * dim), rng, -2.0f, 2.0f);
        std::vector<std::string> y;
        std::uniform_int_distribution<int> coin(0, 1);
        for (int64_t i = 0; i < n; ++i)
            y.push_back(coin(rng) ? "pos" : "neg");
        bool both = false;
        for (const std::string& l : y)
            both |= l != y[0];
        if (!both)
            y[0] = y[0] == "pos" ? "neg" : "pos";

        TrainOptions opts;
        opts.C = 1.0f;
        opts.seed = static_cast<uint64_t>(problem);
        TrainTrace trace;
        train(x, y, opts, &trace);
        for (const auto& sweeps : trace.per_class) {
            REQUIRE(!sweeps.empty());
            for (size_t s = 1; s < sweeps.size(); ++s)
                REQUIRE(sweeps[s].dual_objective >= sweeps[s - 1].dual_objective - 1e-9);
            // KKT residual below tolerance at termination.
            REQUIRE(sweeps.back().max_projected_gradient < opts.tolerance);
        }
    }
}

TEST_CASE("training is deterministic for a fixed seed") {
    const Blobs b = make_blobs({{-1.0f, 0.0f}, {1.0f, 0.0f}, {0.0f, 2.0f}}, 20, 0.7f, 8);
    TrainOptions opts;
    opts.seed = 99;
    const SvmModel a = train(b.x, b.y, opts);
    const SvmModel c = train(b.x, b.y, opts);
    CHECK(a.weights.data == c.weights.data);
    CHECK(a.biases == c.biases);
}

TEST_CASE("degenerate training inputs are rejected") {
    Matrix x(4, 2, 1.0f);
    const std::vector<std::string> one_class = {"a", "a", "a", "a"};
    CHECK_THROWS_AS(train(x, one_class), error);

    const std::vector<std::string> ok = {"a", "a", "b", "b"};
    Matrix empty(4, 0);
    CHECK_THROWS_AS(train(empty, ok), error);

    TrainOptions bad;
    bad.C = -1.0f;
    CHECK_THROWS_AS(train(x, ok, bad), error);

    Matrix single(1, 2, 1.0f);
    const std::vector<std::string> one = {"a"};
    CHECK_THROWS_AS(train(single, one), error);
}

TEST_CASE("decision scores: zero weights give all-bias scores") {
    SvmModel model;
    model.weights = Matrix(3, 4, 0.0f);
    model.biases = {0.5f, -1.0f, 2.0f};
    model.labels = {"a", "b", "c"};
    Matrix x(2, 4);
    std::mt19937 rng(9);
    x.data = random_vector(8, rng);
    const Matrix s = decision_scores(model, x);
    for (int64_t i = 0; i < 2; ++i) {
        CHECK(s.at(i, 0) == doctest::Approx(0.5f));
        CHECK(s.at(i, 1) == doctest::Approx(-1.0f));
        CHECK(s.at(i, 2) == doctest::Approx(2.0f));
    }
}

TEST_CASE("decision scores match a hand dot product") {
    SvmModel model;
    model.weights = Matrix(2, 3);
    model.weights.data = {1.0f, 2.0f, -1.0f, 0.0f, -2.0f, 0.5f};
    model.biases = {0.25f, -0.5f};
    model.labels = {"x", "y"};
    Matrix x(1, 3);
    x.data = {2.0f, -1.0f, 4.0f};
    const Matrix s = decision_scores(model, x);
    CHECK(s.at(0, 0) == doctest::Approx(2.0f - 2.0f - 4.0f + 0.25f));
    CHECK(s.at(0, 1) == doctest::Approx(0.0f + 2.0f + 2.0f - 0.5f));
}

TEST_CASE("decision scores match a loop oracle on a random batch") {
    std::mt19937 rng(10);
    SvmModel model;
    model.weights = Matrix(5, 7);
    model.weights.data = random_vector(35, rng);
    model.biases = random_vector(5, rng);
    model.labels = {"a", "b", "c", "d", "e"};
    Matrix x(9, 7);
    x.data = random_vector(63, rng);
    const Matrix s = decision_scores(model, x);
    for (int64_t i = 0; i < 9; ++i)
        for (int64_t c = 0; c < 5; ++c) {
            double expect = model.biases[static_cast<size_t>(c)];
            for (int64_t j = 0; j < 7; ++j)
                expect += static_cast<double>(model.weights.at(c, j)) * x.at(i, j);
            REQUIRE(s.at(i, c) == doctest::Approx(expect).epsilon(1e-5));
        }
}

TEST_CASE("decision scores are linear in the features") {
    std::mt19937 rng(11);
    SvmModel model;
    model.weights = Matrix(3, 5);
    model.weights.data = random_vector(15, rng);
    model.biases = random_vector(3, rng);
    model.labels = {"a", "b", "c"};

    Matrix x(1, 5), y(1, 5), combo(1, 5);
    x.data = random_vector(5, rng);
    y.data = random_vector(5, rng);
    const float a = 2.0f, b = -0.5f;
    for (int64_t j = 0; j < 5; ++j)
        combo.at(0, j) = a * x.at(0, j) + b * y.at(0, j);

    const Matrix sx = decision_scores(model, x);
    const Matrix sy = decision_scores(model, y);
    const Matrix sc = decision_scores(model, combo);
    for (int64_t c = 0; c < 3; ++c) {
        const double bias = model.biases[static_cast<size_t>(c)];
        const double expect = a * (sx.at(0, c) - bias) + b * (sy.at(0, c) - bias) + bias;
        CHECK(sc.at(0, c) == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("predict is invariant under positive rescaling of scores") {
    std::mt19937 rng(12);
    SvmModel model;
    model.weights = Matrix(4, 6);
    model.weights.data = random_vector(24, rng);
    model.biases = random_vector(4, rng);
    model.labels = {"a", "b", "c", "d"};
    Matrix x(20, 6);
    x.data = random_vector(120, rng);

    SvmModel scaled = model;
    for (float& v : scaled.weights.data)
        v *= 3.5f;
    for (float& v : scaled.biases)
        v *= 3.5f;
    CHECK(predict(model, x) == predict(scaled, x));
}

TEST_CASE("predict breaks ties toward the lowest class index") {
    SvmModel model;
    model.weights = Matrix(3, 2, 0.0f);
    model.biases = {1.0f, 1.0f, 0.0f};
    model.labels = {"a", "b", "c"};
    Matrix x(1, 2, 0.0f);
    CHECK(predict(model, x)[0] == 0);
}

TEST_CASE("evaluate: perfect, constant, and random predictors") {
    const Blobs b = make_blobs({{-4.0f, 0.0f}, {4.0f, 0.0f}}, 25, 0.4f, 13);
    const SvmModel model = train(b.x, b.y);
    const Evaluation perfect = evaluate(model, b.x, b.y);
    CHECK(perfect.mean_per_class_accuracy == doctest::Approx(100.0));

    // Constant predictor: always class 0 on balanced 2-class data -> 50%.
    SvmModel constant;
    constant.weights = Matrix(2, 2, 0.0f);
    constant.biases = {1.0f, 0.0f};
    constant.labels = model.labels;
    const Evaluation half = evaluate(constant, b.x, b.y);
    CHECK(half.mean_per_class_accuracy == doctest::Approx(50.0));
    CHECK(half.sample_accuracy == doctest::Approx(50.0));

    // Random-ish model: confusion matrix entries recompute to the reported
    // accuracies.
    std::mt19937 rng(14);
    SvmModel random_model;
    random_model.weights = Matrix(2, 2);
    random_model.weights.data = random_vector(4, rng);
    random_model.biases = random_vector(2, rng);
    random_model.labels = model.labels;
    const Evaluation ev = evaluate(random_model, b.x, b.y);
    int64_t diag = 0, total = 0;
    double recall_sum = 0.0;
    for (size_t c = 0; c < 2; ++c) {
        int64_t row = 0;
        for (size_t p = 0; p < 2; ++p) {
            row += ev.confusion[c][p];
            total += ev.confusion[c][p];
        }
        diag += ev.confusion[c][c];
        recall_sum += 100.0 * static_cast<double>(ev.confusion[c][c]) / static_cast<double>(row);
    }
    CHECK(total == b.x.rows);
    CHECK(ev.sample_accuracy ==
          doctest::Approx(100.0 * static_cast<double>(diag) / static_cast<double>(total)));
    CHECK(ev.mean_per_class_accuracy == doctest::Approx(recall_sum / 2.0));
}

TEST_CASE("evaluate rejects labels outside the model's map") {
    const Blobs b = make_blobs({{-3.0f, 0.0f}, {3.0f, 0.0f}}, 10, 0.4f, 15);
    const SvmModel model = train(b.x, b.y);
    std::vector<std::string> bad = b.y;
    bad[0] = "mystery";
    CHECK_THROWS_AS(evaluate(model, b.x, bad), lookup_error);
}

TEST_CASE("svm files round-trip and reject corruption") {
    const Blobs b = make_blobs({{-2.0f, 0.0f}, {2.0f, 0.0f}}, 15, 0.5f, 16);
    const SvmModel model = train(b.x, b.y);
    const std::string path = temp_path("fusecat_t.fsv");
    save_svm(path, model);
    const SvmModel back = load_svm(path);
    CHECK(back.weights.data == model.weights.data);
    CHECK(back.biases == model.biases);
    CHECK(back.labels == model.labels);
    CHECK(serialize_svm(back) == serialize_svm(model));
    std::filesystem::remove(path);

    const std::vector<uint8_t> bytes = serialize_svm(model);
    std::mt19937 rng(17);
    std::uniform_int_distribution<size_t> cut(0, bytes.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<uint8_t> trunc(bytes.begin(), bytes.begin() + static_cast<long>(cut(rng)));
        CHECK_THROWS_AS(parse_svm(trunc), corrupt_file_error);
    }
}

TEST_CASE("grid search picks a sensible C") {
    const Blobs b = make_blobs({{-2.5f, 0.0f}, {2.5f, 0.0f}}, 30, 0.8f, 18);
    TrainOptions opts;
    const float c = grid_search_c(b.x, b.y, opts);
    CHECK((c == 0.01f || c == 0.1f || c == 1.0f || c == 10.0f));
}
