#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "qread/common.hpp"

namespace qread {

using cplx = std::complex<double>;

/// Dense complex 2x2 matrix, row major: [[a, b], [c, d]].
struct ComplexMatrix2 {
    cplx a{}, b{}, c{}, d{};

    friend ComplexMatrix2 operator+(const ComplexMatrix2& l, const ComplexMatrix2& r) {
        return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d};
    }
    friend ComplexMatrix2 operator-(const ComplexMatrix2& l, const ComplexMatrix2& r) {
        return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d};
    }
    friend ComplexMatrix2 operator*(const ComplexMatrix2& l, const ComplexMatrix2& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
    friend ComplexMatrix2 operator*(cplx s, const ComplexMatrix2& m) {
        return {s * m.a, s * m.b, s * m.c, s * m.d};
    }
    friend ComplexMatrix2 operator*(double s, const ComplexMatrix2& m) {
        return cplx(s, 0.0) * m;
    }

    ComplexMatrix2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
    cplx trace() const { return a + d; }
};

inline ComplexMatrix2 pauli_i() { return {1.0, 0.0, 0.0, 1.0}; }
inline ComplexMatrix2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline ComplexMatrix2 pauli_y() { return {0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0}; }
inline ComplexMatrix2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

enum class PauliAxis { x, y, z };

inline ComplexMatrix2 pauli(PauliAxis axis) {
    switch (axis) {
        case PauliAxis::x: return pauli_x();
        case PauliAxis::y: return pauli_y();
        default: return pauli_z();
    }
}

/// Projector onto the +1 (sign=+1) or -1 (sign=-1) eigenspace of a Pauli axis.
inline ComplexMatrix2 pauli_projector(PauliAxis axis, int sign) {
    const double s = sign >= 0 ? 1.0 : -1.0;
    return 0.5 * (pauli_i() + s * pauli(axis));
}

inline double max_abs_entry(const ComplexMatrix2& m) {
    return std::max(std::max(std::abs(m.a), std::abs(m.b)), std::max(std::abs(m.c), std::abs(m.d)));
}

inline bool is_hermitian(const ComplexMatrix2& m, double tol = structural_tol) {
    return max_abs_entry(m - m.adjoint()) <= tol;
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const ComplexMatrix2& m) {
    const double tr = std::real(m.a + m.d);
    const double det = std::real(m.a * m.d - m.b * m.c);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

inline bool is_psd(const ComplexMatrix2& m, double tol = physical_tol) {
    return is_hermitian(m, tol) && hermitian_eigenvalues(m)[0] >= -tol;
}

/// Qubit state (or channel intermediate) in the Pauli basis:
/// rho = (p0*I + px*X + py*Y + pz*Z) / 2, so p_i = Tr[sigma_i rho].
/// Normalized states have p0 = 1.
struct PauliVector {
    double p0 = 0.0, px = 0.0, py = 0.0, pz = 0.0;

    double bloch_norm() const { return std::sqrt(px * px + py * py + pz * pz); }
    bool is_pure(double tol = physical_tol) const { return std::abs(bloch_norm() - 1.0) <= tol; }

    double& operator[](int i) { return i == 0 ? p0 : i == 1 ? px : i == 2 ? py : pz; }
    double operator[](int i) const { return i == 0 ? p0 : i == 1 ? px : i == 2 ? py : pz; }
};

/// Inverse of pauli_decompose. Unnormalized vectors are permitted; they arise
/// as superoperator intermediates.
inline ComplexMatrix2 pauli_compose(const PauliVector& p) {
    return 0.5 * (p.p0 * pauli_i() + p.px * pauli_x() + p.py * pauli_y() + p.pz * pauli_z());
}

inline PauliVector pauli_decompose(const ComplexMatrix2& m) {
    if (!is_hermitian(m, physical_tol)) {
        throw validation_error("pauli_decompose: matrix is not Hermitian within tolerance");
    }
    // p_i = Tr[sigma_i m], written out entrywise
    return {std::real(m.a + m.d),
            std::real(m.b + m.c),
            std::real(cplx(0.0, 1.0) * (m.b - m.c)),
            std::real(m.a - m.d)};
}

/// Hermitian, unit-trace, positive semidefinite 2x2 matrix.
class DensityMatrix {
  public:
    explicit DensityMatrix(const ComplexMatrix2& m) : m_(m) {
        if (!is_hermitian(m, physical_tol)) {
            throw validation_error("DensityMatrix: not Hermitian");
        }
        if (std::abs(std::real(m.trace()) - 1.0) > structural_tol || std::abs(std::imag(m.trace())) > structural_tol) {
            throw validation_error("DensityMatrix: trace differs from 1");
        }
        if (hermitian_eigenvalues(m)[0] < -physical_tol) {
            throw validation_error("DensityMatrix: negative eigenvalue");
        }
    }

    static DensityMatrix from_pauli(const PauliVector& p) {
        if (p.bloch_norm() > 1.0 + physical_tol) {
            throw validation_error("DensityMatrix: Bloch vector outside unit ball");
        }
        return DensityMatrix(pauli_compose(p));
    }

    static DensityMatrix up() { return from_pauli({1.0, 0.0, 0.0, 1.0}); }
    static DensityMatrix down() { return from_pauli({1.0, 0.0, 0.0, -1.0}); }
    static DensityMatrix plus_x() { return from_pauli({1.0, 1.0, 0.0, 0.0}); }
    static DensityMatrix minus_x() { return from_pauli({1.0, -1.0, 0.0, 0.0}); }
    static DensityMatrix plus_y() { return from_pauli({1.0, 0.0, 1.0, 0.0}); }
    static DensityMatrix minus_y() { return from_pauli({1.0, 0.0, -1.0, 0.0}); }
    static DensityMatrix maximally_mixed() { return from_pauli({1.0, 0.0, 0.0, 0.0}); }

    const ComplexMatrix2& matrix() const { return m_; }
    PauliVector pauli() const { return pauli_decompose(m_); }

  private:
    ComplexMatrix2 m_;
};

/// One conditioned measurement branch: returns (K rho K^dag / p, p) with
/// p = Tr[K rho K^dag]. Throws impossible_outcome_error when p = 0.
inline std::pair<DensityMatrix, double> apply_kraus(const ComplexMatrix2& k, const DensityMatrix& rho) {
    const ComplexMatrix2 updated = k * rho.matrix() * k.adjoint();
    double prob = std::real(updated.trace());
    if (prob <= 0.0) {
        throw impossible_outcome_error("apply_kraus: outcome has probability zero");
    }
    if (prob > 1.0 && prob <= 1.0 + structural_tol) prob = 1.0;
    return {DensityMatrix((1.0 / prob) * updated), prob};
}

} // namespace qread
