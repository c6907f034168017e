#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "qread/common.hpp"
#include "qread/measurement_models.hpp"
#include "qread/rng.hpp"
#include "qread/state_algebra.hpp"
#include "qread/transfer_matrix.hpp"

namespace qread {

using MeasurementRecord = std::vector<int>;

/// Discrete prior over candidate initial states. The default readout prior is
/// the 50/50 spin up / spin down pair.
struct Prior {
    std::vector<std::pair<DensityMatrix, double>> support;

    explicit Prior(std::vector<std::pair<DensityMatrix, double>> s) : support(std::move(s)) {
        double total = 0.0;
        for (const auto& [state, prob] : support) {
            if (prob < 0.0) throw validation_error("Prior: negative probability");
            total += prob;
        }
        if (std::abs(total - 1.0) > structural_tol) throw validation_error("Prior: probabilities must sum to 1");
    }

    static Prior spin_up_down() {
        return Prior({{DensityMatrix::up(), 0.5}, {DensityMatrix::down(), 0.5}});
    }

    /// 50/50 pair polarized along the axis that the Model II rotation feeds
    /// into the measured axis. For these initial states a strong measurement
    /// destroys the polarization before the rotation can expose it, which is
    /// where weaker measurements extract more information.
    static Prior spin_transverse() {
        return Prior({{DensityMatrix::plus_y(), 0.5}, {DensityMatrix::minus_y(), 0.5}});
    }

    int size() const { return static_cast<int>(support.size()); }

    double entropy_bits() const {
        double h = 0.0;
        for (const auto& [state, prob] : support) {
            if (prob > 0.0) h -= prob * std::log2(prob);
        }
        return h;
    }
};

struct TrajectorySample {
    MeasurementRecord record;
    PauliVector final_state;
    int initial_index = -1;
};

/// Samples shown measurement records. The state is always propagated along
/// the true outcome branch; for eta < 1 the shown outcome is drawn from the
/// error kernel column of the true outcome.
class TrajectorySampler {
  public:
    TrajectorySampler(const KrausSet& model, double eta)
        : kernel_(error_kernel(model.outcomes(), eta)), exact_(eta >= 1.0) {
        for (const auto& k : model.ops) outcome_ops_.push_back(outcome_superop(k));
    }

    int outcomes() const { return static_cast<int>(outcome_ops_.size()); }

    TrajectorySample sample(const PauliVector& rho0, int T, RandomStream& rng) const {
        if (T < 0) throw validation_error("sample_record: T must be nonnegative");
        TrajectorySample out;
        out.record.reserve(static_cast<std::size_t>(T));
        PauliVector p = rho0;
        const int n = outcomes();
        std::vector<double> probs(static_cast<std::size_t>(n));
        std::vector<double> shown(static_cast<std::size_t>(n));
        for (int t = 0; t < T; ++t) {
            for (int b = 0; b < n; ++b) probs[static_cast<std::size_t>(b)] = std::max(0.0, outcome_ops_[static_cast<std::size_t>(b)].trace_row(p));
            const int b = rng.next_outcome(probs);
            const double norm = probs[static_cast<std::size_t>(b)];
            p = outcome_ops_[static_cast<std::size_t>(b)].apply(p);
            for (int i = 0; i < 4; ++i) p[i] /= norm;
            int y = b;
            if (!exact_) {
                for (int s = 0; s < n; ++s) shown[static_cast<std::size_t>(s)] = kernel_(s, b);
                y = rng.next_outcome(shown);
            }
            out.record.push_back(y);
        }
        out.final_state = p;
        return out;
    }

  private:
    std::vector<SuperopMatrix> outcome_ops_;
    ErrorKernel kernel_;
    bool exact_;
};

inline TrajectorySample sample_record(const KrausSet& model, const DensityMatrix& rho0, int T, double eta,
                                      RandomStream& rng) {
    return TrajectorySampler(model, eta).sample(rho0.pauli(), T, rng);
}

inline TrajectorySample sample_record(const KrausSet& model, const DensityMatrix& rho0, int T, double eta,
                                      std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return sample_record(model, rho0, T, eta, rng);
}

/// Likelihood/posterior evaluation with per-step renormalization, so records
/// of any length stay in range (raw probabilities underflow near T ~ 1000).
/// For eta = 1 the chain is the 2x2 Kraus product; for eta < 1 each step
/// applies the error-kernel mixture of outcome superoperators.
class RecordAnalyzer {
  public:
    RecordAnalyzer(const KrausSet& model, const Prior& prior, double eta)
        : prior_(prior), exact_(eta >= 1.0) {
        if (!(eta >= 0.0 && eta <= 1.0)) throw validation_error("RecordAnalyzer: eta must lie in [0, 1]");
        n_ = model.outcomes();
        if (exact_) {
            kraus_ = model.ops;
        } else {
            const ErrorKernel kernel = error_kernel(n_, eta);
            std::vector<SuperopMatrix> clean;
            for (const auto& k : model.ops) clean.push_back(outcome_superop(k));
            noisy_.resize(static_cast<std::size_t>(n_));
            for (int y = 0; y < n_; ++y) {
                SuperopMatrix acc;
                for (int b = 0; b < n_; ++b) acc = acc + kernel(y, b) * clean[static_cast<std::size_t>(b)];
                noisy_[static_cast<std::size_t>(y)] = acc;
            }
        }
    }

    int outcomes() const { return n_; }
    const Prior& prior() const { return prior_; }

    /// log Pr[record | prior element s], natural log; -inf for impossible.
    std::vector<double> log_likelihoods(std::span<const int> record) const {
        std::vector<double> logs(static_cast<std::size_t>(prior_.size()), 0.0);
        for (int s = 0; s < prior_.size(); ++s) {
            logs[static_cast<std::size_t>(s)] = exact_ ? log_likelihood_kraus(record, s) : log_likelihood_superop(record, s);
        }
        return logs;
    }

    /// Posterior over the prior support; throws when every element has zero
    /// likelihood.
    std::vector<double> posterior(std::span<const int> record) const {
        const std::vector<double> logs = log_likelihoods(record);
        double best = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < prior_.size(); ++s) {
            if (prior_.support[static_cast<std::size_t>(s)].second > 0.0) best = std::max(best, logs[static_cast<std::size_t>(s)]);
        }
        if (!std::isfinite(best)) {
            throw degenerate_record_error("posterior: record impossible under every prior element");
        }
        std::vector<double> post(static_cast<std::size_t>(prior_.size()), 0.0);
        double total = 0.0;
        for (int s = 0; s < prior_.size(); ++s) {
            const double w = prior_.support[static_cast<std::size_t>(s)].second;
            const double value = w > 0.0 && std::isfinite(logs[static_cast<std::size_t>(s)])
                                     ? w * std::exp(logs[static_cast<std::size_t>(s)] - best)
                                     : 0.0;
            post[static_cast<std::size_t>(s)] = value;
            total += value;
        }
        for (double& value : post) value /= total;
        return post;
    }

    double conditional_entropy_bits(std::span<const int> record) const {
        const std::vector<double> post = posterior(record);
        double h = 0.0;
        for (double value : post) {
            if (value > 0.0) h -= value * std::log2(value);
        }
        return h;
    }

    /// Bayes-optimal prediction: posterior argmax, ties broken toward the
    /// first prior element.
    int bayes_index(std::span<const int> record) const {
        const std::vector<double> post = posterior(record);
        int best = 0;
        for (int s = 1; s < prior_.size(); ++s) {
            if (post[static_cast<std::size_t>(s)] > post[static_cast<std::size_t>(best)]) best = s;
        }
        return best;
    }

  private:
    double log_likelihood_kraus(std::span<const int> record, int s) const {
        ComplexMatrix2 rho = prior_.support[static_cast<std::size_t>(s)].first.matrix();
        double log_prob = 0.0;
        for (int a : record) {
            if (a < 0 || a >= n_) throw validation_error("record outcome index out of range");
            const ComplexMatrix2& k = kraus_[static_cast<std::size_t>(a)];
            rho = k * rho * k.adjoint();
            const double step = std::real(rho.trace());
            if (step <= 0.0) return -std::numeric_limits<double>::infinity();
            log_prob += std::log(step);
            rho = (1.0 / step) * rho;
        }
        return log_prob;
    }

    double log_likelihood_superop(std::span<const int> record, int s) const {
        PauliVector p = prior_.support[static_cast<std::size_t>(s)].first.pauli();
        double log_prob = 0.0;
        for (int y : record) {
            if (y < 0 || y >= n_) throw validation_error("record outcome index out of range");
            p = noisy_[static_cast<std::size_t>(y)].apply(p);
            const double step = p.p0;
            if (step <= 0.0) return -std::numeric_limits<double>::infinity();
            log_prob += std::log(step);
            for (int i = 0; i < 4; ++i) p[i] /= step;
        }
        return log_prob;
    }

    Prior prior_;
    bool exact_;
    int n_ = 0;
    std::vector<ComplexMatrix2> kraus_;
    std::vector<SuperopMatrix> noisy_;
};

/// Pr[record | rho0] as a direct product chain; underflows to 0 for very long
/// records, use RecordAnalyzer for posteriors at large T.
inline double record_likelihood(const KrausSet& model, const DensityMatrix& rho0, std::span<const int> record,
                                double eta) {
    const Prior point({{rho0, 1.0}});
    const RecordAnalyzer analyzer(model, point, eta);
    const double log_prob = analyzer.log_likelihoods(record)[0];
    return std::isfinite(log_prob) ? std::exp(log_prob) : 0.0;
}

inline std::vector<double> posterior(const KrausSet& model, const Prior& prior, std::span<const int> record,
                                     double eta) {
    return RecordAnalyzer(model, prior, eta).posterior(record);
}

/// Record dump: `# model=<name> x=<v> phi=<v> eta=<v> T=<n> seed=<s>` header,
/// then one comma-separated record per line.
inline void write_record_dump(std::ostream& os, const KrausSet& model, double eta, int T, std::uint64_t seed,
                              std::span<const TrajectorySample> samples) {
    os << "# model=" << model.name << " x=" << model.x << " phi=" << model.phi << " eta=" << eta << " T=" << T
       << " seed=" << seed << "\n";
    for (const auto& sample : samples) {
        for (std::size_t i = 0; i < sample.record.size(); ++i) {
            if (i) os << ",";
            os << sample.record[i];
        }
        os << "\n";
    }
}

} // namespace qread
