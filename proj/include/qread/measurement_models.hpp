#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qread/common.hpp"
#include "qread/state_algebra.hpp"

namespace qread {

/// Model I: informationally complete weak measurement of all three Pauli
/// axes, strength x. Discrete-to-continuum mapping dt/tau = x^2/12.
struct ModelIParams {
    double x = 0.0;
    double dt_over_tau() const { return x * x / 12.0; }
};

/// Model II: weak Z measurement of strength x interleaved with an X rotation
/// by angle phi per step. dt/tau = x^2/4 and the scaled field a = phi/x^2 is
/// the quantity held fixed in the continuum limit.
struct ModelIIParams {
    double x = 0.0;
    double phi = 0.0;
    double dt_over_tau() const { return x * x / 4.0; }
    double scaled_field() const { return phi / (x * x); }
};

/// Indexed set of Kraus operators forming a resolution of identity. Outcome
/// labels are the vector indices; Model II uses {+1 -> 0, -1 -> 1} and
/// Model I enumerates (X,+),(X,-),(Y,+),(Y,-),(Z,+),(Z,-) as 0..5.
struct KrausSet {
    std::vector<ComplexMatrix2> ops;
    std::string name;
    double x = 0.0;
    double phi = 0.0;

    int outcomes() const { return static_cast<int>(ops.size()); }
};

inline double completeness_defect(const KrausSet& set) {
    ComplexMatrix2 sum{};
    for (const auto& k : set.ops) sum = sum + k.adjoint() * k;
    return max_abs_entry(sum - pauli_i());
}

/// Universal weak measurement operator
///   K^axis_y(x) = sqrt(e^{yx}/(e^x+e^{-x})) P_+ + sqrt(e^{-yx}/(e^x+e^{-x})) P_-
/// evaluated through the overflow-safe logistic form of the weights.
inline ComplexMatrix2 kraus_universal(PauliAxis axis, int y, double x) {
    const double ys = y >= 0 ? 1.0 : -1.0;
    const double w_plus = 1.0 / (1.0 + std::exp(-2.0 * ys * x));
    const double w_minus = 1.0 / (1.0 + std::exp(2.0 * ys * x));
    return std::sqrt(w_plus) * pauli_projector(axis, +1) + std::sqrt(w_minus) * pauli_projector(axis, -1);
}

/// Square root of a Hermitian PSD 2x2 matrix via the qubit identity: writing
/// M = a*I + v.sigma, sqrt(M) shares the eigenprojectors and takes the square
/// roots of the eigenvalues a +- |v|.
inline ComplexMatrix2 psd_sqrt(const ComplexMatrix2& m) {
    const PauliVector p = pauli_decompose(m);
    const double a = p.p0 / 2.0;
    const double vnorm = p.bloch_norm() / 2.0;
    const double lo = a - vnorm, hi = a + vnorm;
    if (lo < -physical_tol) throw validation_error("psd_sqrt: matrix not positive semidefinite");
    const double sq_hi = std::sqrt(std::max(0.0, hi));
    const double sq_lo = std::sqrt(std::max(0.0, lo));
    if (vnorm == 0.0) return sq_hi * pauli_i();
    const double c = (sq_hi + sq_lo) / 2.0;
    const double s = (sq_hi - sq_lo) / (2.0 * vnorm);
    const ComplexMatrix2 vs = 0.5 * (p.px * pauli_x() + p.py * pauli_y() + p.pz * pauli_z());
    return c * pauli_i() + s * vs;
}

/// Same operator as kraus_universal through the K = sqrt((I + y tanh(x) sigma)/2)
/// form; kept as an independent route for cross-checking.
inline ComplexMatrix2 sqrt_form_kraus(PauliAxis axis, int y, double x) {
    const double ys = y >= 0 ? 1.0 : -1.0;
    const ComplexMatrix2 m = 0.5 * (pauli_i() + (ys * std::tanh(x)) * pauli(axis));
    return psd_sqrt(m);
}

/// Six-operator informationally complete set: (1/sqrt(3)) K^sigma_y(x).
/// Built from the tanh form, whose weights reach exactly 0/1 in the
/// projective limit (the logistic form leaves ~1e-44 dust there).
inline KrausSet kraus_set_model1(const ModelIParams& params) {
    KrausSet set;
    set.name = "I";
    set.x = params.x;
    const double norm = 1.0 / std::sqrt(3.0);
    for (PauliAxis axis : {PauliAxis::x, PauliAxis::y, PauliAxis::z}) {
        for (int y : {+1, -1}) {
            set.ops.push_back(norm * sqrt_form_kraus(axis, y, params.x));
        }
    }
    return set;
}

/// Two-operator set K~_y = K^Z_y(x) * exp(-i(phi/2)X), the exponential in its
/// closed form cos(phi/2) I - i sin(phi/2) X.
inline KrausSet kraus_set_model2(const ModelIIParams& params) {
    KrausSet set;
    set.name = "II";
    set.x = params.x;
    set.phi = params.phi;
    const ComplexMatrix2 rot =
        std::cos(params.phi / 2.0) * pauli_i() + cplx(0.0, -std::sin(params.phi / 2.0)) * pauli_x();
    for (int y : {+1, -1}) {
        set.ops.push_back(sqrt_form_kraus(PauliAxis::z, y, params.x) * rot);
    }
    return set;
}

/// Readout error kernel beta[y][b] = Pr[shown y | true b] for an n-outcome
/// measurement at efficiency eta: (1/n)(1 - sqrt(eta)) + sqrt(eta) delta_{yb}.
/// eta = 1 is the identity, eta = 0 erases the outcome entirely. (The mixing
/// weight is sqrt(eta) rather than the p of the discrete mixing picture,
/// eta = p^2; this kernel is what reproduces the efficiency-eta SMEs.)
struct ErrorKernel {
    int n = 0;
    double eta = 1.0;
    std::vector<double> beta; // row major, beta[y*n + b]

    double operator()(int y, int b) const { return beta[static_cast<std::size_t>(y) * n + b]; }
};

inline ErrorKernel error_kernel(int n, double eta) {
    if (n < 1) throw validation_error("error_kernel: need at least one outcome");
    if (!(eta >= 0.0 && eta <= 1.0)) throw validation_error("error_kernel: eta must lie in [0, 1]");
    ErrorKernel kernel;
    kernel.n = n;
    kernel.eta = eta;
    const double root = std::sqrt(eta);
    const double off = (1.0 - root) / n;
    kernel.beta.assign(static_cast<std::size_t>(n) * n, off);
    for (int y = 0; y < n; ++y) kernel.beta[static_cast<std::size_t>(y) * n + y] += root;
    return kernel;
}

} // namespace qread
