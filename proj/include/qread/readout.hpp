#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qread/common.hpp"
#include "qread/info_metrics.hpp"
#include "qread/trajectory.hpp"

namespace qread {

/// Bayes-optimal readout: posterior argmax with ties broken toward the first
/// prior element.
inline int bayes_predict(const KrausSet& model, const Prior& prior, std::span<const int> record, double eta) {
    return RecordAnalyzer(model, prior, eta).bayes_index(record);
}

/// Monte-Carlo accuracy of the Bayes-optimal classifier over M sampled
/// (initial state, record) pairs, with the same Hoeffding guarantee and
/// stream contract as estimate_mi.
inline EstimateWithBound estimate_accuracy(const KrausSet& model, const Prior& prior, int T, double eta, long long M,
                                           std::uint64_t seed, double delta = 0.01, int workers = 1) {
    if (M < 1) throw validation_error("estimate_accuracy: M must be at least 1");
    const TrajectorySampler sampler(model, eta);
    const RecordAnalyzer analyzer(model, prior, eta);
    std::vector<double> weights;
    std::vector<PauliVector> initial;
    for (const auto& [state, prob] : prior.support) {
        weights.push_back(prob);
        initial.push_back(state.pauli());
    }
    const double mean_correct = detail::parallel_chunked_mean(M, workers, [&](long long i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        const int s = rng.next_outcome(weights);
        const TrajectorySample sample = sampler.sample(initial[static_cast<std::size_t>(s)], T, rng);
        return analyzer.bayes_index(sample.record) == s ? 1.0 : 0.0;
    });
    EstimateWithBound out;
    out.value = mean_correct;
    out.delta = delta;
    out.epsilon = hoeffding_epsilon(M, delta);
    out.samples = M;
    out.seed = seed;
    return out;
}

/// One-hot featureization of a record: column t is the indicator of outcome
/// a_t. Row-major |O| x T.
inline std::vector<double> one_hot_encode(std::span<const int> record, int alphabet) {
    const int T = static_cast<int>(record.size());
    std::vector<double> x(static_cast<std::size_t>(alphabet) * static_cast<std::size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        const int a = record[static_cast<std::size_t>(t)];
        if (a < 0 || a >= alphabet) throw validation_error("one_hot_encode: outcome index out of range");
        x[static_cast<std::size_t>(a) * static_cast<std::size_t>(T) + static_cast<std::size_t>(t)] = 1.0;
    }
    return x;
}

/// Linear readout Y = sgn(Tr(W^T X) - theta) on one-hot encoded records.
struct LinearClassifier {
    int alphabet = 0;
    int T = 0;
    std::vector<double> weights; // row-major |O| x T
    double theta = 0.0;

    double score(std::span<const int> record) const {
        double acc = 0.0;
        for (int t = 0; t < T; ++t) {
            acc += weights[static_cast<std::size_t>(record[static_cast<std::size_t>(t)]) * static_cast<std::size_t>(T) +
                           static_cast<std::size_t>(t)];
        }
        return acc;
    }

    int predict(std::span<const int> record) const { return score(record) - theta >= 0.0 ? +1 : -1; }
};

/// Records with spin labels +1 (up, prior index 0) / -1 (down, prior index 1).
struct LabeledDataset {
    int alphabet = 0;
    int T = 0;
    std::vector<MeasurementRecord> records;
    std::vector<int> labels;

    std::size_t size() const { return records.size(); }
};

/// Draw a labeled dataset from trajectory indices [first_index, first_index + count).
inline LabeledDataset make_labeled_dataset(const KrausSet& model, const Prior& prior, int T, double eta,
                                           long long count, std::uint64_t seed, long long first_index = 0) {
    if (prior.size() != 2) throw validation_error("make_labeled_dataset: binary prior required");
    const TrajectorySampler sampler(model, eta);
    std::vector<double> weights;
    std::vector<PauliVector> initial;
    for (const auto& [state, prob] : prior.support) {
        weights.push_back(prob);
        initial.push_back(state.pauli());
    }
    LabeledDataset data;
    data.alphabet = model.outcomes();
    data.T = T;
    data.records.reserve(static_cast<std::size_t>(count));
    data.labels.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(first_index + i));
        const int s = rng.next_outcome(weights);
        data.records.push_back(sampler.sample(initial[static_cast<std::size_t>(s)], T, rng).record);
        data.labels.push_back(s == 0 ? +1 : -1);
    }
    return data;
}

inline double classifier_accuracy(const LinearClassifier& clf, const LabeledDataset& data) {
    long long correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (clf.predict(data.records[i]) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Full-batch gradient descent on l2-regularized logistic loss over the
/// flattened one-hot features. Deterministic: zero-initialized weights, fixed
/// iteration count and learning rate.
inline LinearClassifier logistic_fit(const LabeledDataset& data, double l2 = 0.0, int iterations = 500,
                                     double learning_rate = 0.1) {
    if (data.size() == 0) throw validation_error("logistic_fit: empty dataset");
    if (l2 < 0.0) throw validation_error("logistic_fit: negative regularization");
    LinearClassifier clf;
    clf.alphabet = data.alphabet;
    clf.T = data.T;
    clf.weights.assign(static_cast<std::size_t>(data.alphabet) * static_cast<std::size_t>(data.T), 0.0);
    clf.theta = 0.0;

    const double inv_n = 1.0 / static_cast<double>(data.size());
    std::vector<double> grad(clf.weights.size());
    for (int iter = 0; iter < iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_theta = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& record = data.records[i];
            const double y = data.labels[i];
            const double margin = y * (clf.score(record) - clf.theta);
            // d/dm softplus(-m) = -sigmoid(-m)
            const double g = -y / (1.0 + std::exp(margin));
            for (int t = 0; t < data.T; ++t) {
                grad[static_cast<std::size_t>(record[static_cast<std::size_t>(t)]) * static_cast<std::size_t>(data.T) +
                     static_cast<std::size_t>(t)] += g;
            }
            grad_theta -= g;
        }
        // proximal handling of the l2 term keeps the shrinkage stable for any
        // regularization strength
        const double shrink = 1.0 / (1.0 + learning_rate * l2);
        for (std::size_t j = 0; j < clf.weights.size(); ++j) {
            clf.weights[j] = shrink * (clf.weights[j] - learning_rate * grad[j] * inv_n);
        }
        clf.theta -= learning_rate * grad_theta * inv_n;
    }
    return clf;
}

inline double logistic_loss(const LinearClassifier& clf, const LabeledDataset& data, double l2 = 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double margin = data.labels[i] * (clf.score(data.records[i]) - clf.theta);
        acc += margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    acc /= static_cast<double>(data.size());
    double norm2 = 0.0;
    for (double w : clf.weights) norm2 += w * w;
    return acc + 0.5 * l2 * norm2;
}

struct OverfitRow {
    int T = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double bayes_acc = 0.0;
    double bayes_eps = 0.0;
};

/// Train/test the linear readout against the Bayes-optimal classifier over a
/// list of record lengths. Train and test sets come from disjoint trajectory
/// index ranges of the same seeded stream; Bayes accuracy is evaluated on the
/// same test draw.
inline std::vector<OverfitRow> overfit_experiment(const KrausSet& model, const Prior& prior, double eta,
                                                  std::span<const int> T_list, long long n_train, long long n_test,
                                                  std::uint64_t seed, double l2 = 0.0, int iterations = 500,
                                                  double learning_rate = 0.1) {
    if (n_train < 1 || n_test < 1) throw validation_error("overfit_experiment: need nonempty train and test sets");
    std::vector<OverfitRow> rows;
    for (int T : T_list) {
        const LabeledDataset train = make_labeled_dataset(model, prior, T, eta, n_train, seed, 0);
        const LabeledDataset test = make_labeled_dataset(model, prior, T, eta, n_test, seed, n_train);
        const LinearClassifier clf = logistic_fit(train, l2, iterations, learning_rate);
        const RecordAnalyzer analyzer(model, prior, eta);
        long long bayes_correct = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const int predicted = analyzer.bayes_index(test.records[i]);
            const int label = predicted == 0 ? +1 : -1;
            if (label == test.labels[i]) ++bayes_correct;
        }
        OverfitRow row;
        row.T = T;
        row.train_acc = classifier_accuracy(clf, train);
        row.test_acc = classifier_accuracy(clf, test);
        row.bayes_acc = static_cast<double>(bayes_correct) / static_cast<double>(test.size());
        row.bayes_eps = hoeffding_epsilon(n_test, 0.01);
        rows.push_back(row);
    }
    return rows;
}

} // namespace qread
