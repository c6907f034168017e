#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>

#include "qread/common.hpp"
#include "qread/csv.hpp"
#include "qread/sme.hpp"

namespace qread {

enum class DampingRegime { underdamped, overdamped, critical };

/// Parameters of the low-efficiency SNR/plateau theory. alpha is only
/// meaningful for Model II.
struct SnrParams {
    SmeModel model = SmeModel::model1;
    double tau = 1.0;
    double eta = 1.0;
    double alpha = 0.0;

    DampingRegime regime() const {
        if (std::abs(alpha - 0.5) <= structural_tol) return DampingRegime::critical;
        return alpha > 0.5 ? DampingRegime::underdamped : DampingRegime::overdamped;
    }
};

/// Model I SNR: gamma(t) = (eta/2)(1 - e^{-8t/tau}); plateau eta/2.
inline double gamma_model1(double t, double tau, double eta) {
    if (!(t >= 0.0)) throw validation_error("gamma_model1: t must be nonnegative");
    return eta / 2.0 * (1.0 - std::exp(-8.0 * t / tau));
}

/// Model II SNR in the regime selected by alpha; plateau eta (1+alpha^2)/alpha^2
/// for alpha > 0. alpha = 0 is the commuting case where gamma grows linearly,
/// gamma(t) = (4 eta / tau) t, and no plateau exists.
inline double gamma_model2(double t, double tau, double alpha, double eta) {
    if (!(t >= 0.0)) throw validation_error("gamma_model2: t must be nonnegative");
    if (!(alpha >= 0.0)) throw validation_error("gamma_model2: alpha must be nonnegative");
    if (alpha == 0.0) return 4.0 * eta / tau * t;
    const double u = t / tau;
    const double a2 = alpha * alpha;
    const double plateau_part = (1.0 + a2) / a2;
    if (alpha > 0.5 + structural_tol) {
        const double mu = std::sqrt(4.0 * a2 - 1.0);
        const double c = std::cos(2.0 * mu * u), s = std::sin(2.0 * mu * u);
        return eta * (plateau_part +
                      std::exp(-2.0 * u) / (a2 * mu * mu) *
                          (-4.0 * a2 * a2 + (1.0 - 3.0 * a2) * c + (a2 - 1.0) * mu * s));
    }
    if (alpha < 0.5 - structural_tol) {
        const double mu = std::sqrt(1.0 - 4.0 * a2);
        // e^{-2u} cosh(2 mu u) and e^{-2u} sinh(2 mu u) without overflow
        const double ep = std::exp(2.0 * (mu - 1.0) * u), em = std::exp(-2.0 * (mu + 1.0) * u);
        const double dc = 0.5 * (ep + em), ds = 0.5 * (ep - em);
        return eta * (plateau_part + (4.0 * a2 * a2 * std::exp(-2.0 * u) + (3.0 * a2 - 1.0) * dc + (a2 - 1.0) * mu * ds) /
                                         (a2 * mu * mu));
    }
    return eta * (5.0 - std::exp(-2.0 * u) * (2.0 * u * u + 6.0 * u + 5.0));
}

namespace detail {

inline constexpr int gh_nodes = 128;

struct GaussHermiteTable {
    std::array<double, gh_nodes> nodes{};
    std::array<double, gh_nodes> weights{};
};

/// Nodes/weights of 128-point Gauss-Hermite quadrature (weight e^{-x^2}),
/// found by Newton iteration on the Hermite recurrence.
inline const GaussHermiteTable& gauss_hermite() {
    static const GaussHermiteTable table = [] {
        constexpr int n = gh_nodes;
        GaussHermiteTable out;
        const double pim4 = 0.75112554446494248285870300477623; // pi^{-1/4}
        double z = 0.0, z_prev = 0.0, z_prev2 = 0.0;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            if (i == 0) {
                z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
            } else if (i == 1) {
                z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            } else if (i == 2) {
                z = 1.86 * z - 0.86 * z_prev2;
            } else if (i == 3) {
                z = 1.91 * z - 0.91 * z_prev2;
            } else {
                z = 2.0 * z - z_prev2;
            }
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p1 = pim4, p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            out.nodes[static_cast<std::size_t>(i)] = z;
            out.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
            const double w = 2.0 / (pp * pp);
            out.weights[static_cast<std::size_t>(i)] = w;
            out.weights[static_cast<std::size_t>(n - 1 - i)] = w;
            z_prev2 = z_prev;
            z_prev = z;
        }
        return out;
    }();
    return table;
}

/// ln(1 + e^s) without overflow.
inline double softplus(double s) {
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

} // namespace detail

/// Mutual information of the binary-input AWGN channel Y = sqrt(gamma) X + Z,
/// X uniform on {-1, +1}, Z standard normal, in bits:
///   I = (1/ln 2) Integral phi(z) [ln 2 - ln(1 + e^{-2 gamma - 2 sqrt(gamma) z})] dz.
/// Gauss-Hermite quadrature; beyond gamma = 50 the asymptotic tail
/// 1 - sqrt(pi/(2 gamma)) e^{-gamma/2} / ln 2 is used (the integrand's log
/// term underflows there).
inline double bi_awgn_mi(double gamma_snr) {
    if (!(gamma_snr >= 0.0)) throw validation_error("bi_awgn_mi: gamma must be nonnegative");
    if (gamma_snr == 0.0) return 0.0;
    const double ln2 = std::log(2.0);
    if (gamma_snr > 50.0) {
        return 1.0 - std::sqrt(3.14159265358979323846 / (2.0 * gamma_snr)) * std::exp(-gamma_snr / 2.0) / ln2;
    }
    const auto& gh = detail::gauss_hermite();
    const double root2 = std::sqrt(2.0);
    const double root_gamma = std::sqrt(gamma_snr);
    double acc = 0.0;
    for (int i = 0; i < detail::gh_nodes; ++i) {
        const double z = root2 * gh.nodes[static_cast<std::size_t>(i)];
        acc += gh.weights[static_cast<std::size_t>(i)] * (ln2 - detail::softplus(-2.0 * gamma_snr - 2.0 * root_gamma * z));
    }
    const double nats = acc / std::sqrt(3.14159265358979323846);
    return std::min(1.0, std::max(0.0, nats / ln2));
}

/// Late-time mutual information plateau: bi_awgn_mi of gamma(infinity).
/// Model II with alpha = 0 has no plateau (gamma diverges); the result is
/// flagged and reported as the maximal 1 bit.
struct PlateauResult {
    double mi_bits = 0.0;
    double gamma_inf = 0.0;
    bool diverges = false;
};

inline PlateauResult mi_plateau(const SnrParams& params) {
    if (!(params.eta >= 0.0 && params.eta <= 1.0)) throw validation_error("mi_plateau: eta must lie in [0, 1]");
    PlateauResult out;
    if (params.model == SmeModel::model1) {
        out.gamma_inf = params.eta / 2.0;
        out.mi_bits = bi_awgn_mi(out.gamma_inf);
        return out;
    }
    if (!(params.alpha >= 0.0)) throw validation_error("mi_plateau: alpha must be nonnegative");
    if (params.alpha == 0.0) {
        out.gamma_inf = std::numeric_limits<double>::infinity();
        out.mi_bits = 1.0;
        out.diverges = true;
        return out;
    }
    out.gamma_inf = params.eta * (1.0 + params.alpha * params.alpha) / (params.alpha * params.alpha);
    out.mi_bits = bi_awgn_mi(out.gamma_inf);
    return out;
}

inline double gamma_snr(const SnrParams& params, double t) {
    return params.model == SmeModel::model1 ? gamma_model1(t, params.tau, params.eta)
                                            : gamma_model2(t, params.tau, params.alpha, params.eta);
}

inline void write_snr_curve_csv(std::ostream& os, const SnrParams& params, std::span<const double> times) {
    os << "t,gamma,mi_bits\n";
    for (double t : times) {
        const double g = gamma_snr(params, t);
        os << format_real(t) << "," << format_real(g) << "," << format_real(bi_awgn_mi(g)) << "\n";
    }
}

inline void write_plateau_table_csv(std::ostream& os, std::span<const SnrParams> rows) {
    os << "model,eta,alpha,gamma_inf,mi_plateau_bits\n";
    for (const SnrParams& params : rows) {
        const PlateauResult plateau = mi_plateau(params);
        os << (params.model == SmeModel::model1 ? "I" : "II") << "," << format_real(params.eta) << ","
           << (params.model == SmeModel::model1 ? "nan" : format_real(params.alpha)) << ","
           << format_real(plateau.gamma_inf) << "," << format_real(plateau.mi_bits) << "\n";
    }
}

} // namespace qread
