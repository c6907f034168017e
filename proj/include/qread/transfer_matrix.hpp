#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "qread/common.hpp"
#include "qread/measurement_models.hpp"
#include "qread/state_algebra.hpp"

namespace qread {

/// Real 4x4 matrix acting on PauliVector coefficients: the Pauli-basis
/// representation of a measurement/channel superoperator.
struct SuperopMatrix {
    double m[4][4] = {};

    PauliVector apply(const PauliVector& p) const {
        PauliVector out;
        for (int i = 0; i < 4; ++i) {
            out[i] = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3] * p[3];
        }
        return out;
    }

    /// Trace of the mapped operator, i.e. the p0 component of apply().
    double trace_row(const PauliVector& p) const {
        return m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2] + m[0][3] * p[3];
    }

    friend SuperopMatrix operator+(const SuperopMatrix& l, const SuperopMatrix& r) {
        SuperopMatrix out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out.m[i][j] = l.m[i][j] + r.m[i][j];
        return out;
    }
    friend SuperopMatrix operator*(double s, const SuperopMatrix& r) {
        SuperopMatrix out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out.m[i][j] = s * r.m[i][j];
        return out;
    }
    friend SuperopMatrix operator*(const SuperopMatrix& l, const SuperopMatrix& r) {
        SuperopMatrix out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += l.m[i][k] * r.m[k][j];
                out.m[i][j] = acc;
            }
        return out;
    }
};

inline double max_abs_diff(const SuperopMatrix& l, const SuperopMatrix& r) {
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) d = std::max(d, std::abs(l.m[i][j] - r.m[i][j]));
    return d;
}

/// Matrix of E_a(rho) = K_a rho K_a^dag, built column by column from the
/// images of the Pauli basis elements.
inline SuperopMatrix outcome_superop(const ComplexMatrix2& k) {
    SuperopMatrix out;
    const ComplexMatrix2 basis[4] = {pauli_i(), pauli_x(), pauli_y(), pauli_z()};
    for (int j = 0; j < 4; ++j) {
        const PauliVector col = pauli_decompose(0.5 * (k * basis[j] * k.adjoint()));
        for (int i = 0; i < 4; ++i) out.m[i][j] = col[i];
    }
    return out;
}

/// Mean channel E = sum_a E_a. Trace preservation shows up as the top row
/// being (1, 0, 0, 0).
inline SuperopMatrix mean_channel(const KrausSet& set) {
    if (completeness_defect(set) > structural_tol) {
        throw validation_error("mean_channel: Kraus set is not complete");
    }
    SuperopMatrix out;
    for (const auto& k : set.ops) out = out + outcome_superop(k);
    return out;
}

namespace detail {

/// Durand-Kerner iteration for a monic quartic; returns all four roots.
inline std::array<std::complex<double>, 4> quartic_roots(const std::array<double, 5>& coeff) {
    // coeff: c[4] lambda^4 + ... + c[0], with c[4] == 1
    auto eval = [&](std::complex<double> z) {
        std::complex<double> acc = coeff[4];
        for (int i = 3; i >= 0; --i) acc = acc * z + coeff[i];
        return acc;
    };
    std::array<std::complex<double>, 4> z;
    const std::complex<double> seed(0.4, 0.9);
    z[0] = seed;
    for (int i = 1; i < 4; ++i) z[i] = z[i - 1] * seed;
    for (int iter = 0; iter < 200; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < 4; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j) {
                if (j != i) denom *= z[i] - z[j];
            }
            const std::complex<double> delta = eval(z[i]) / denom;
            z[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-15) break;
    }
    return z;
}

/// Eigenvalues of a real 4x4 through its characteristic polynomial
/// (Faddeev-LeVerrier coefficients, then root finding).
inline std::array<std::complex<double>, 4> eig4_general(const SuperopMatrix& a) {
    auto trace = [](const SuperopMatrix& x) { return x.m[0][0] + x.m[1][1] + x.m[2][2] + x.m[3][3]; };
    auto shift = [](const SuperopMatrix& x, double c) {
        SuperopMatrix out = x;
        for (int i = 0; i < 4; ++i) out.m[i][i] += c;
        return out;
    };
    SuperopMatrix b = a;
    const double a3 = -trace(b);
    b = a * shift(b, a3);
    const double a2 = -trace(b) / 2.0;
    b = a * shift(b, a2);
    const double a1 = -trace(b) / 3.0;
    b = a * shift(b, a1);
    const double a0 = -trace(b) / 4.0;
    return quartic_roots({a0, a1, a2, a3, 1.0});
}

} // namespace detail

/// Eigenvalues of a superoperator matrix. Exploits the block structure of the
/// model channels (diagonal for Model I, a decoupled 2x2 rotation-damping
/// block for Model II) via connected components of the sparsity pattern, with
/// a general characteristic-polynomial solver as fallback.
inline std::array<std::complex<double>, 4> superop_eigenvalues(const SuperopMatrix& e) {
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) scale = std::max(scale, std::abs(e.m[i][j]));
    const double zero_tol = scale * 1e-13;

    int parent[4] = {0, 1, 2, 3};
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i != j && (std::abs(e.m[i][j]) > zero_tol || std::abs(e.m[j][i]) > zero_tol)) {
                parent[find(i)] = find(j);
            }
        }

    std::array<std::complex<double>, 4> eig;
    int filled = 0;
    bool need_general = false;
    for (int root = 0; root < 4 && !need_general; ++root) {
        std::vector<int> comp;
        for (int i = 0; i < 4; ++i) {
            if (find(i) == root) comp.push_back(i);
        }
        if (comp.empty()) continue;
        if (comp.size() == 1) {
            eig[filled++] = e.m[comp[0]][comp[0]];
        } else if (comp.size() == 2) {
            const double p = e.m[comp[0]][comp[0]], q = e.m[comp[0]][comp[1]];
            const double r = e.m[comp[1]][comp[0]], s = e.m[comp[1]][comp[1]];
            const std::complex<double> disc = std::sqrt(std::complex<double>((p - s) * (p - s) + 4.0 * q * r, 0.0));
            eig[filled++] = (std::complex<double>(p + s, 0.0) + disc) / 2.0;
            eig[filled++] = (std::complex<double>(p + s, 0.0) - disc) / 2.0;
        } else {
            need_general = true;
        }
    }
    if (need_general) eig = detail::eig4_general(e);
    std::sort(eig.begin(), eig.end(),
              [](const std::complex<double>& l, const std::complex<double>& r) { return std::abs(l) > std::abs(r); });
    return eig;
}

/// Spectral summary of a mean channel: eigenvalues in descending modulus, the
/// correlation length xi from e^{-1/xi} = max_{lambda != 1} |lambda|, and the
/// number of unit-modulus eigenvalues.
struct SpectralReport {
    std::array<std::complex<double>, 4> eigenvalues{};
    double xi = 0.0;
    int unit_multiplicity = 0;
    std::complex<double> lambda2{}; // the eigenvalue defining xi
};

inline constexpr double unit_eigenvalue_tol = 1e-9;

inline SpectralReport correlation_length(const SuperopMatrix& e) {
    if (std::abs(e.m[0][0] - 1.0) > unit_eigenvalue_tol || std::abs(e.m[0][1]) > unit_eigenvalue_tol ||
        std::abs(e.m[0][2]) > unit_eigenvalue_tol || std::abs(e.m[0][3]) > unit_eigenvalue_tol) {
        throw validation_error("correlation_length: not a trace-preserving mean channel");
    }
    SpectralReport report;
    report.eigenvalues = superop_eigenvalues(e);

    for (const auto& lambda : report.eigenvalues) {
        if (std::abs(std::abs(lambda) - 1.0) <= unit_eigenvalue_tol) ++report.unit_multiplicity;
    }

    // Drop the single eigenvalue closest to 1 (the trace-preservation one);
    // the largest remaining modulus defines xi.
    int keep_out = 0;
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < 4; ++i) {
        const double dist = std::abs(report.eigenvalues[i] - std::complex<double>(1.0, 0.0));
        if (dist < best) {
            best = dist;
            keep_out = i;
        }
    }
    double second = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (i == keep_out) continue;
        if (std::abs(report.eigenvalues[i]) > second) {
            second = std::abs(report.eigenvalues[i]);
            report.lambda2 = report.eigenvalues[i];
        }
    }
    if (report.unit_multiplicity >= 2 || second >= 1.0 - unit_eigenvalue_tol) {
        report.xi = std::numeric_limits<double>::infinity();
    } else if (second <= 0.0) {
        report.xi = 0.0;
    } else {
        report.xi = -1.0 / std::log(second);
    }
    return report;
}

/// Closed-form eigenvalue pair of the Model II mean channel's rotation-damping
/// block: lambda+- = ((1+sech x) cos phi +- sqrt(cos^2 phi (1+sech x)^2 - 4 sech x)) / 2.
inline std::pair<std::complex<double>, std::complex<double>> model2_complex_eigs(double x, double phi) {
    const double sech = 1.0 / std::cosh(x);
    const double tr = (1.0 + sech) * std::cos(phi);
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * sech, 0.0));
    return {(std::complex<double>(tr, 0.0) + disc) / 2.0, (std::complex<double>(tr, 0.0) - disc) / 2.0};
}

} // namespace qread
