#pragma once

// Dense complex vector/matrix kernel for small qubit registers (dim <= 16
// in practice). Register convention, fixed repo-wide: qubit 0 is the
// leftmost tensor factor, i.e. the most significant bit of a basis index.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "eprsim/errors.hpp"

namespace eprsim {

using cplx = std::complex<double>;

// Structural tolerance (unitarity, hermiticity, trace, norm).
inline constexpr double kStructuralTol = 1e-12;
// Slack allowed on density-operator eigenvalues.
inline constexpr double kPositivityTol = 1e-10;
// Largest imaginary residue discarded when a trace must be real.
inline constexpr double kImagResidueTol = 1e-10;
// Hard cap on any matrix dimension produced by kron().
inline constexpr std::size_t kMaxDim = std::size_t{1} << 20;

class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {
        if (rows == 0 || cols == 0)
            throw DimMismatchError("matrix dimensions must be positive");
    }

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0)
            throw DimMismatchError("matrix dimensions must be positive");
        if (data_.size() != rows * cols)
            throw DimMismatchError("entry count does not match rows*cols");
        for (const cplx& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw Error("matrix entry is not finite");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<cplx>& data() const { return data_; }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    cplx trace() const {
        if (rows_ != cols_) throw DimMismatchError("trace of non-square matrix");
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimMismatchError("matrix product shape mismatch");
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw DimMismatchError("matrix sum shape mismatch");
        ComplexMatrix c = a;
        for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
        return c;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw DimMismatchError("matrix difference shape mismatch");
        ComplexMatrix c = a;
        for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
        return c;
    }

    friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
        ComplexMatrix c = a;
        for (cplx& z : c.data_) z *= s;
        return c;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

inline double max_abs(const ComplexMatrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            v = std::max(v, std::abs(m(i, j)));
    return v;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return max_abs(a - b);
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kStructuralTol) {
    if (u.rows() != u.cols()) return false;
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.rows())) <= tol;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kStructuralTol) {
    if (m.rows() != m.cols()) return false;
    return max_abs_diff(m, m.adjoint()) <= tol;
}

// Kronecker product; qubit 0 of the result is a's register.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t rows = a.rows() * b.rows();
    const std::size_t cols = a.cols() * b.cols();
    if (rows > kMaxDim || cols > kMaxDim)
        throw DimLimitError("kron result exceeds the supported dimension cap");
    ComplexMatrix c(rows, cols);
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const cplx f = a(ia, ja);
            if (f == cplx{}) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    c(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
        }
    return c;
}

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
    std::size_t k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

// Eigenvalues of a Hermitian matrix via cyclic Jacobi on the real symmetric
// embedding [[A, -B], [B, A]]; each eigenvalue appears twice there, so the
// even-indexed entries of the sorted list are returned.
inline std::vector<double> jacobi_symmetric_eigenvalues(std::vector<double> s, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) -> double& { return s[i * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += std::abs(at(i, j));
        if (off < 1e-15 * static_cast<double>(n)) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-18) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double w = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - w * akq;
                    at(k, q) = w * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - w * aqk;
                    at(q, k) = w * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace detail

inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    if (!is_hermitian(m)) throw NonHermitianError("eigenvalues of a non-Hermitian matrix");
    const std::size_t n = m.rows();
    std::vector<double> s(4 * n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double a = m(i, j).real(), b = m(i, j).imag();
            s[i * 2 * n + j] = a;
            s[i * 2 * n + (j + n)] = -b;
            s[(i + n) * 2 * n + j] = b;
            s[(i + n) * 2 * n + (j + n)] = a;
        }
    const std::vector<double> doubled = detail::jacobi_symmetric_eigenvalues(std::move(s), 2 * n);
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = doubled[2 * i];
    return ev;
}

class StateVector {
public:
    static StateVector from_amplitudes(std::vector<cplx> amps) {
        StateVector psi;
        psi.amps_ = std::move(amps);
        if (!detail::is_power_of_two(psi.amps_.size()))
            throw DimMismatchError("state dimension must be a power of two");
        double n2 = 0.0;
        for (const cplx& a : psi.amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw Error("state amplitude is not finite");
            n2 += std::norm(a);
        }
        if (std::abs(n2 - 1.0) > kStructuralTol)
            throw Error("state vector is not normalized");
        return psi;
    }

    static StateVector basis_state(std::size_t dim, std::size_t index) {
        std::vector<cplx> a(dim, cplx{});
        a.at(index) = 1.0;
        return from_amplitudes(std::move(a));
    }

    std::size_t dim() const { return amps_.size(); }
    std::size_t num_qubits() const { return detail::log2_exact(dim()); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    cplx amplitude(std::size_t i) const { return amps_.at(i); }

    double norm_squared() const {
        double n2 = 0.0;
        for (const cplx& a : amps_) n2 += std::norm(a);
        return n2;
    }

private:
    StateVector() = default;
    friend StateVector apply(const ComplexMatrix&, const StateVector&);
    std::vector<cplx> amps_;
};

class DensityOperator {
public:
    static DensityOperator from_matrix(ComplexMatrix m) {
        if (m.rows() != m.cols() || !detail::is_power_of_two(m.rows()))
            throw DimMismatchError("density operator must be square with power-of-two dim");
        if (!is_hermitian(m))
            throw NonHermitianError("density operator is not Hermitian");
        if (std::abs(m.trace().real() - 1.0) > kStructuralTol ||
            std::abs(m.trace().imag()) > kStructuralTol)
            throw Error("density operator trace differs from 1");
        const std::vector<double> ev = hermitian_eigenvalues(m);
        if (!ev.empty() && ev.front() < -kPositivityTol)
            throw NotPositiveError("density operator has a negative eigenvalue");
        DensityOperator rho;
        rho.m_ = std::move(m);
        return rho;
    }

    std::size_t dim() const { return m_.rows(); }
    std::size_t num_qubits() const { return detail::log2_exact(dim()); }
    const ComplexMatrix& matrix() const { return m_; }

    double purity() const { return (m_ * m_).trace().real(); }

private:
    DensityOperator() = default;
    ComplexMatrix m_;
};

inline DensityOperator projector(const StateVector& psi) {
    ComplexMatrix m(psi.dim(), psi.dim());
    for (std::size_t i = 0; i < psi.dim(); ++i)
        for (std::size_t j = 0; j < psi.dim(); ++j)
            m(i, j) = psi.amplitude(i) * std::conj(psi.amplitude(j));
    return DensityOperator::from_matrix(std::move(m));
}

namespace detail {

inline void require_unitary_for(const ComplexMatrix& u, std::size_t dim) {
    if (u.rows() != u.cols() || u.rows() != dim)
        throw DimMismatchError("operator dimension does not match state");
    if (!is_unitary(u))
        throw NonUnitaryError("operator is not unitary within tolerance");
}

} // namespace detail

inline StateVector apply(const ComplexMatrix& u, const StateVector& psi) {
    detail::require_unitary_for(u, psi.dim());
    std::vector<cplx> out(psi.dim(), cplx{});
    for (std::size_t i = 0; i < psi.dim(); ++i)
        for (std::size_t j = 0; j < psi.dim(); ++j)
            out[i] += u(i, j) * psi.amplitude(j);
    StateVector r;
    r.amps_ = std::move(out);
    if (std::abs(r.norm_squared() - 1.0) > kStructuralTol)
        throw Error("state norm drifted after applying a unitary");
    return r;
}

inline DensityOperator apply(const ComplexMatrix& u, const DensityOperator& rho) {
    detail::require_unitary_for(u, rho.dim());
    return DensityOperator::from_matrix(u * rho.matrix() * u.adjoint());
}

inline double expectation(const ComplexMatrix& obs, const DensityOperator& rho) {
    if (obs.rows() != rho.dim() || obs.cols() != rho.dim())
        throw DimMismatchError("observable dimension does not match state");
    if (!is_hermitian(obs))
        throw NonHermitianError("observable is not Hermitian within tolerance");
    const cplx t = (obs * rho.matrix()).trace();
    if (std::abs(t.imag()) > kImagResidueTol)
        throw Error("expectation value has a non-negligible imaginary part");
    return t.real();
}

// Overlap <t|rho|t> with a pure target state.
inline double fidelity(const DensityOperator& rho, const StateVector& target) {
    if (target.dim() != rho.dim())
        throw DimMismatchError("fidelity target dimension does not match state");
    cplx v{0.0, 0.0};
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = 0; j < rho.dim(); ++j)
            v += std::conj(target.amplitude(i)) * rho.matrix()(i, j) * target.amplitude(j);
    if (std::abs(v.imag()) > kImagResidueTol)
        throw Error("fidelity has a non-negligible imaginary part");
    return v.real();
}

// Reduced state over the kept qubits (ascending index order preserved).
inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::size_t>& keep) {
    const std::size_t n = rho.num_qubits();
    std::vector<bool> kept(n, false);
    for (std::size_t q : keep) {
        if (q >= n) throw BadIndexError("partial_trace: qubit index out of range");
        if (kept[q]) throw BadIndexError("partial_trace: duplicate qubit index");
        kept[q] = true;
    }
    std::vector<std::size_t> keep_sorted(keep);
    std::sort(keep_sorted.begin(), keep_sorted.end());
    std::vector<std::size_t> traced;
    for (std::size_t q = 0; q < n; ++q)
        if (!kept[q]) traced.push_back(q);

    // Bit position (from MSB) of qubit q in a dim-2^n index.
    auto bit_shift = [&](std::size_t q) { return n - 1 - q; };

    const std::size_t kd = std::size_t{1} << keep_sorted.size();
    const std::size_t td = std::size_t{1} << traced.size();
    ComplexMatrix out(kd, kd);
    for (std::size_t a = 0; a < kd; ++a)
        for (std::size_t b = 0; b < kd; ++b) {
            cplx sum{0.0, 0.0};
            for (std::size_t t = 0; t < td; ++t) {
                std::size_t i = 0, j = 0;
                for (std::size_t k = 0; k < keep_sorted.size(); ++k) {
                    const std::size_t bit = (a >> (keep_sorted.size() - 1 - k)) & 1u;
                    const std::size_t bjt = (b >> (keep_sorted.size() - 1 - k)) & 1u;
                    i |= bit << bit_shift(keep_sorted[k]);
                    j |= bjt << bit_shift(keep_sorted[k]);
                }
                for (std::size_t k = 0; k < traced.size(); ++k) {
                    const std::size_t bit = (t >> (traced.size() - 1 - k)) & 1u;
                    i |= bit << bit_shift(traced[k]);
                    j |= bit << bit_shift(traced[k]);
                }
                sum += rho.matrix()(i, j);
            }
            out(a, b) = sum;
        }
    return DensityOperator::from_matrix(std::move(out));
}

// Expand an operator on `targets` (in the given order) to the full register.
inline ComplexMatrix embed(const ComplexMatrix& u, const std::vector<std::size_t>& targets,
                           std::size_t num_qubits) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    const std::size_t tdim = std::size_t{1} << targets.size();
    if (u.rows() != tdim || u.cols() != tdim)
        throw DimMismatchError("embed: operator size does not match target count");
    std::vector<bool> seen(num_qubits, false);
    for (std::size_t q : targets) {
        if (q >= num_qubits) throw BadIndexError("embed: qubit index out of range");
        if (seen[q]) throw BadIndexError("embed: duplicate qubit index");
        seen[q] = true;
    }
    auto bit_shift = [&](std::size_t q) { return num_qubits - 1 - q; };
    std::size_t target_mask = 0;
    for (std::size_t q : targets) target_mask |= std::size_t{1} << bit_shift(q);
    ComplexMatrix full(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t sub_i = 0;
        for (std::size_t k = 0; k < targets.size(); ++k)
            sub_i = (sub_i << 1) | ((i >> bit_shift(targets[k])) & 1u);
        const std::size_t rest = i & ~target_mask;
        for (std::size_t sub_j = 0; sub_j < tdim; ++sub_j) {
            if (u(sub_i, sub_j) == cplx{}) continue;
            std::size_t j = rest;
            for (std::size_t k = 0; k < targets.size(); ++k) {
                const std::size_t bit = (sub_j >> (targets.size() - 1 - k)) & 1u;
                j |= bit << bit_shift(targets[k]);
            }
            full(i, j) = u(sub_i, sub_j);
        }
    }
    return full;
}

} // namespace eprsim
