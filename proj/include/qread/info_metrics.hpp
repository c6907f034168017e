#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "qread/common.hpp"
#include "qread/csv.hpp"
#include "qread/measurement_models.hpp"
#include "qread/rng.hpp"
#include "qread/trajectory.hpp"
#include "qread/transfer_matrix.hpp"

namespace qread {

/// Monte-Carlo estimate with its Hoeffding guarantee: with probability at
/// least 1-delta the estimate is within epsilon of the truth.
struct EstimateWithBound {
    double value = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    long long samples = 0;
    std::uint64_t seed = 0;
};

/// Smallest M with 2 exp(-2 M eps^2) <= delta, i.e. ceil(ln(2/delta)/(2 eps^2)).
inline long long hoeffding_samples(double epsilon, double delta) {
    if (!(epsilon > 0.0)) throw validation_error("hoeffding_samples: epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw validation_error("hoeffding_samples: delta must lie in (0, 1)");
    return static_cast<long long>(std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

/// Guarantee width for a given sample count: eps(M, delta).
inline double hoeffding_epsilon(long long samples, double delta) {
    if (samples < 1) throw validation_error("hoeffding_epsilon: need at least one sample");
    if (!(delta > 0.0 && delta < 1.0)) throw validation_error("hoeffding_epsilon: delta must lie in (0, 1)");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(samples)));
}

inline double entropy_bits(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

inline double binary_entropy_bits(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

inline double record_conditional_entropy(const KrausSet& model, const Prior& prior, std::span<const int> record,
                                         double eta) {
    return RecordAnalyzer(model, prior, eta).conditional_entropy_bits(record);
}

namespace detail {

/// Mean of fn(0..count-1) with a fixed-order chunked reduction: chunk sums are
/// accumulated serially within each chunk and combined in chunk order, so the
/// result is bit-identical for any worker count.
inline double parallel_chunked_mean(long long count, int workers, const std::function<double(long long)>& fn) {
    constexpr long long chunk_size = 4096;
    const long long n_chunks = (count + chunk_size - 1) / chunk_size;
    std::vector<double> chunk_sums(static_cast<std::size_t>(n_chunks), 0.0);
    if (workers <= 1 || n_chunks == 1) {
        for (long long c = 0; c < n_chunks; ++c) {
            double acc = 0.0;
            const long long hi = std::min(count, (c + 1) * chunk_size);
            for (long long i = c * chunk_size; i < hi; ++i) acc += fn(i);
            chunk_sums[static_cast<std::size_t>(c)] = acc;
        }
    } else {
        std::atomic<long long> next{0};
        auto worker = [&]() {
            for (;;) {
                const long long c = next.fetch_add(1);
                if (c >= n_chunks) return;
                double acc = 0.0;
                const long long hi = std::min(count, (c + 1) * chunk_size);
                for (long long i = c * chunk_size; i < hi; ++i) acc += fn(i);
                chunk_sums[static_cast<std::size_t>(c)] = acc;
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = static_cast<int>(std::min<long long>(workers, n_chunks));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    double total = 0.0;
    for (double s : chunk_sums) total += s;
    return total / static_cast<double>(count);
}

} // namespace detail

/// Monte-Carlo mutual information estimate: H(P0) minus the sample mean of
/// the posterior entropy over M trajectories. Trajectory i draws from the
/// counter-based stream (seed, i), so estimates are reproducible and
/// worker-count invariant.
inline EstimateWithBound estimate_mi(const KrausSet& model, const Prior& prior, int T, double eta, long long M,
                                     std::uint64_t seed, double delta = 0.01, int workers = 1) {
    if (M < 1) throw validation_error("estimate_mi: M must be at least 1");
    const TrajectorySampler sampler(model, eta);
    const RecordAnalyzer analyzer(model, prior, eta);
    std::vector<double> weights;
    std::vector<PauliVector> initial;
    for (const auto& [state, prob] : prior.support) {
        weights.push_back(prob);
        initial.push_back(state.pauli());
    }
    const double mean_cond_entropy = detail::parallel_chunked_mean(M, workers, [&](long long i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        const int s = rng.next_outcome(weights);
        const TrajectorySample sample = sampler.sample(initial[static_cast<std::size_t>(s)], T, rng);
        return analyzer.conditional_entropy_bits(sample.record);
    });
    EstimateWithBound out;
    out.value = prior.entropy_bits() - mean_cond_entropy;
    out.delta = delta;
    out.epsilon = hoeffding_epsilon(M, delta);
    out.samples = M;
    out.seed = seed;
    return out;
}

inline constexpr double enumeration_budget = 16777216.0; // |O|^T guard, 2^24

/// Exact I(P0; A_{1:T}) for every T = 0..T_max in one depth-first pass over
/// the record tree (a depth-T node is a length-T record). Each node carries
/// one renormalization-free superoperator chain per prior element.
inline std::vector<double> exact_mi_curve(const KrausSet& model, const Prior& prior, int T_max, double eta) {
    if (T_max < 0) throw validation_error("exact_mi: T must be nonnegative");
    const int n = model.outcomes();
    if (std::pow(static_cast<double>(n), static_cast<double>(T_max)) > enumeration_budget) {
        throw capacity_error("exact_mi: |O|^T exceeds the enumeration budget");
    }
    const ErrorKernel kernel = error_kernel(n, eta);
    std::vector<SuperopMatrix> ops(static_cast<std::size_t>(n));
    {
        std::vector<SuperopMatrix> clean;
        for (const auto& k : model.ops) clean.push_back(outcome_superop(k));
        for (int y = 0; y < n; ++y) {
            SuperopMatrix acc;
            for (int b = 0; b < n; ++b) acc = acc + kernel(y, b) * clean[static_cast<std::size_t>(b)];
            ops[static_cast<std::size_t>(y)] = acc;
        }
    }
    const int d = prior.size();
    std::vector<double> probs(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) probs[static_cast<std::size_t>(s)] = prior.support[static_cast<std::size_t>(s)].second;

    // states[depth][s]: unnormalized chain for prior element s
    std::vector<std::vector<PauliVector>> states(static_cast<std::size_t>(T_max) + 1,
                                                 std::vector<PauliVector>(static_cast<std::size_t>(d)));
    for (int s = 0; s < d; ++s) states[0][static_cast<std::size_t>(s)] = prior.support[static_cast<std::size_t>(s)].first.pauli();

    std::vector<double> cond_entropy(static_cast<std::size_t>(T_max) + 1, 0.0);
    std::vector<double> post(static_cast<std::size_t>(d));

    auto visit = [&](auto&& self, int depth) -> void {
        double total = 0.0;
        for (int s = 0; s < d; ++s) {
            post[static_cast<std::size_t>(s)] = probs[static_cast<std::size_t>(s)] * std::max(0.0, states[static_cast<std::size_t>(depth)][static_cast<std::size_t>(s)].p0);
            total += post[static_cast<std::size_t>(s)];
        }
        if (total <= 0.0) return; // impossible prefix: contributes nothing at any depth below
        double h = 0.0;
        for (int s = 0; s < d; ++s) {
            const double q = post[static_cast<std::size_t>(s)] / total;
            if (q > 0.0) h -= q * std::log2(q);
        }
        cond_entropy[static_cast<std::size_t>(depth)] += total * h;
        if (depth == T_max) return;
        for (int a = 0; a < n; ++a) {
            for (int s = 0; s < d; ++s) {
                states[static_cast<std::size_t>(depth) + 1][static_cast<std::size_t>(s)] =
                    ops[static_cast<std::size_t>(a)].apply(states[static_cast<std::size_t>(depth)][static_cast<std::size_t>(s)]);
            }
            self(self, depth + 1);
        }
    };
    visit(visit, 0);

    const double h0 = prior.entropy_bits();
    std::vector<double> mi(static_cast<std::size_t>(T_max) + 1);
    for (int t = 0; t <= T_max; ++t) mi[static_cast<std::size_t>(t)] = h0 - cond_entropy[static_cast<std::size_t>(t)];
    return mi;
}

inline double exact_mi(const KrausSet& model, const Prior& prior, int T, double eta) {
    return exact_mi_curve(model, prior, T, eta).back();
}

/// MI between the initial spin and the +1 count N+ for the commuting phi = 0
/// case of Model II: (N+|up) ~ B(T, p(x)), (N+|down) ~ B(T, 1-p(x)) with
/// p(x) = (1 + tanh x)/2. Log-space binomial mass arrays.
inline double binomial_mi(double x, int T) {
    if (T < 0) throw validation_error("binomial_mi: T must be nonnegative");
    if (T == 0) return 0.0;
    const double p = 0.5 * (1.0 + std::tanh(x));
    if (p <= 0.0 || p >= 1.0) return 1.0; // projective limit: counts separate exactly
    const double log_p = std::log(p), log_q = std::log1p(-p);
    const double ln2 = std::log(2.0);
    double mi = 0.0;
    for (int k = 0; k <= T; ++k) {
        const double log_choose = std::lgamma(T + 1.0) - std::lgamma(k + 1.0) - std::lgamma(T - k + 1.0);
        const double log_up = log_choose + k * log_p + (T - k) * log_q;
        const double log_dn = log_choose + k * log_q + (T - k) * log_p;
        // log of the equal-weight mixture, stable around the larger term
        const double hi = std::max(log_up, log_dn), lo = std::min(log_up, log_dn);
        const double log_mix = hi + std::log1p(std::exp(lo - hi)) - ln2;
        mi += 0.5 * std::exp(log_up) * (log_up - log_mix) / ln2;
        mi += 0.5 * std::exp(log_dn) * (log_dn - log_mix) / ln2;
    }
    return mi;
}

/// I(P0; A_T) from the joint built with superoperator powers:
/// Pr[rho0, a_T] = Pr[rho0] * e0' E_{a_T} E^{T-1} p(rho0). Perfect efficiency
/// only; cost O(T) matrix-vector products.
inline double last_measurement_mi(const KrausSet& model, const Prior& prior, int T) {
    if (T < 1) throw validation_error("last_measurement_mi: T must be at least 1");
    const int n = model.outcomes();
    const int d = prior.size();
    std::vector<SuperopMatrix> ops;
    for (const auto& k : model.ops) ops.push_back(outcome_superop(k));
    const SuperopMatrix mean = mean_channel(model);

    std::vector<std::vector<double>> joint(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int s = 0; s < d; ++s) {
        PauliVector p = prior.support[static_cast<std::size_t>(s)].first.pauli();
        for (int t = 0; t < T - 1; ++t) p = mean.apply(p);
        for (int a = 0; a < n; ++a) {
            joint[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
                prior.support[static_cast<std::size_t>(s)].second * std::max(0.0, ops[static_cast<std::size_t>(a)].trace_row(p));
        }
    }
    std::vector<double> marg_s(static_cast<std::size_t>(d), 0.0), marg_a(static_cast<std::size_t>(n), 0.0);
    for (int s = 0; s < d; ++s)
        for (int a = 0; a < n; ++a) {
            marg_s[static_cast<std::size_t>(s)] += joint[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            marg_a[static_cast<std::size_t>(a)] += joint[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        }
    double mi = 0.0;
    for (int s = 0; s < d; ++s)
        for (int a = 0; a < n; ++a) {
            const double j = joint[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            if (j > 0.0) mi += j * std::log2(j / (marg_s[static_cast<std::size_t>(s)] * marg_a[static_cast<std::size_t>(a)]));
        }
    return mi;
}

/// Largest accuracy A in [1/cardinality, 1] compatible with Fano's
/// inequality H2(1-A) + (1-A) log2(|D|-1) >= prior_entropy - mi, located by
/// bisection to 1e-10.
inline double fano_accuracy_upper_bound(double mi, double prior_entropy, int cardinality) {
    if (cardinality < 2) throw validation_error("fano_accuracy_upper_bound: cardinality must be at least 2");
    if (mi < -structural_tol) throw validation_error("fano_accuracy_upper_bound: negative mutual information");
    if (mi > prior_entropy + structural_tol) {
        throw validation_error("fano_accuracy_upper_bound: mutual information exceeds prior entropy");
    }
    const double target = std::max(0.0, prior_entropy - std::max(0.0, mi));
    const double aux = std::log2(static_cast<double>(cardinality - 1));
    auto slack = [&](double acc) { return binary_entropy_bits(1.0 - acc) + (1.0 - acc) * aux - target; };
    double lo = 1.0 / static_cast<double>(cardinality), hi = 1.0;
    if (slack(hi) >= 0.0) return 1.0;
    if (slack(lo) < 0.0) return lo;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (slack(mid) >= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

/// One mutual-information-vs-T curve at fixed model parameters, with the
/// scaling abscissa x^2 T.
struct MiCurve {
    double x = 0.0;
    double phi = 0.0;
    double eta = 1.0;
    std::vector<std::pair<int, EstimateWithBound>> points; // strictly increasing T
};

inline void write_mi_curve_csv(std::ostream& os, const MiCurve& curve) {
    os << "T,x2T,mi,epsilon,delta,M\n";
    for (const auto& [T, est] : curve.points) {
        os << T << "," << format_real(curve.x * curve.x * T) << "," << format_real(est.value) << ","
           << format_real(est.epsilon) << "," << format_real(est.delta) << "," << est.samples << "\n";
    }
}

} // namespace qread
