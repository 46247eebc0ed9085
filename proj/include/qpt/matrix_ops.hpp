// Dense operator-algebra primitives: tensor products, partial trace,
// factor reordering, Hermitian matrix exponential, spectral decomposition
// and Choi matrices.
//
// Conventions, fixed once here and relied on everywhere else:
//  - basis state |i> is the i-th standard unit vector;
//  - tensor(a, b) uses a-major ordering: index (i_a * d_b + i_b);
//  - partial_trace keeps the surviving factors in their original order;
//  - choi_of_operation(kraus, d) returns sum_{ij} O(|i><j|) (x) |i><j|,
//    i.e. the output leg is the major factor.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qpt/common.hpp"

namespace qpt {

inline bool is_hermitian(const Matrix& m, double tol = default_tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = default_tol) {
    if (m.rows() != m.cols()) return false;
    Matrix gram = m.adjoint() * m;
    gram -= Matrix::Identity(m.rows(), m.cols());
    return max_abs(gram) <= tol;
}

inline bool is_psd(const Matrix& m, double tol = default_tol) {
    if (!is_hermitian(m, tol)) return false;
    return min_eigenvalue(m) >= -tol;
}

inline bool is_projector(const Matrix& m, double tol = default_tol) {
    if (!is_hermitian(m, tol)) return false;
    return max_abs(m * m - m) <= tol;
}

inline bool is_density(const Matrix& m, double tol = default_tol) {
    if (!is_psd(m, tol)) return false;
    return std::abs(m.trace() - Complex(1.0)) <= tol;
}

/// Kronecker product, a-major: (a (x) b)[(i_a d_b + i_b), (j_a d_b + j_b)]
/// = a(i_a, j_a) * b(i_b, j_b).
inline Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix tensor(const std::vector<Matrix>& factors) {
    require(!factors.empty(), "tensor: empty factor list");
    Matrix out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
    return out;
}

namespace detail {

inline void check_factorization(const Matrix& m, const std::vector<Index>& dims) {
    require(!dims.empty(), "factor dimension list is empty");
    Index total = 1;
    for (Index d : dims) {
        require(d >= 1, "factor dimensions must be positive");
        total *= d;
    }
    require(m.rows() == total && m.cols() == total,
            "matrix size does not match the product of factor dimensions");
}

/// Multi-index <-> flat index helpers for a fixed factorization.
inline std::vector<Index> strides_of(const std::vector<Index>& dims) {
    std::vector<Index> strides(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
    return strides;
}

}  // namespace detail

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original relative order regardless of the order inside `keep`.
inline Matrix partial_trace(const Matrix& m, const std::vector<Index>& dims,
                            std::vector<std::size_t> keep) {
    detail::check_factorization(m, dims);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    require(!keep.empty(), "partial_trace: keep set is empty");
    require(keep.back() < dims.size(), "partial_trace: keep index out of range");

    std::vector<std::size_t> traced;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);

    const std::vector<Index> strides = detail::strides_of(dims);
    Index keep_dim = 1, traced_dim = 1;
    for (std::size_t k : keep) keep_dim *= dims[k];
    for (std::size_t k : traced) traced_dim *= dims[k];

    // flat index of the full space from (kept multi-index, traced multi-index)
    auto flat = [&](Index kept_flat, Index traced_flat) {
        Index idx = 0;
        for (std::size_t k = keep.size(); k-- > 0;) {
            idx += (kept_flat % dims[keep[k]]) * strides[keep[k]];
            kept_flat /= dims[keep[k]];
        }
        for (std::size_t k = traced.size(); k-- > 0;) {
            idx += (traced_flat % dims[traced[k]]) * strides[traced[k]];
            traced_flat /= dims[traced[k]];
        }
        return idx;
    };

    Matrix out = Matrix::Zero(keep_dim, keep_dim);
    for (Index r = 0; r < keep_dim; ++r)
        for (Index c = 0; c < keep_dim; ++c) {
            Complex acc = 0.0;
            for (Index t = 0; t < traced_dim; ++t) acc += m(flat(r, t), flat(c, t));
            out(r, c) = acc;
        }
    return out;
}

/// Permutes tensor factors: factor `k` of the result is factor `order[k]`
/// of the input. `order` must be a permutation of 0..dims.size()-1.
inline Matrix reorder_factors(const Matrix& m, const std::vector<Index>& dims,
                              const std::vector<std::size_t>& order) {
    detail::check_factorization(m, dims);
    require(order.size() == dims.size(), "reorder_factors: order size mismatch");
    std::vector<bool> seen(dims.size(), false);
    for (std::size_t k : order) {
        require(k < dims.size() && !seen[k], "reorder_factors: order is not a permutation");
        seen[k] = true;
    }

    const std::vector<Index> strides = detail::strides_of(dims);
    std::vector<Index> new_dims(dims.size());
    for (std::size_t k = 0; k < order.size(); ++k) new_dims[k] = dims[order[k]];
    const std::vector<Index> new_strides = detail::strides_of(new_dims);

    // old flat index corresponding to a new flat index
    auto source = [&](Index flat) {
        Index idx = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            Index digit = (flat / new_strides[k]) % new_dims[k];
            idx += digit * strides[order[k]];
        }
        return idx;
    };

    Matrix out(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) out(r, c) = m(source(r), source(c));
    return out;
}

/// exp(-i h t) for Hermitian h, via eigendecomposition.
inline Matrix expm_hermitian(const Matrix& h, double t, double tol = default_tol) {
    require(is_hermitian(h, tol), "expm_hermitian: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    CVector phases(h.rows());
    for (Index k = 0; k < h.rows(); ++k)
        phases(k) = std::exp(Complex(0.0, -solver.eigenvalues()(k) * t));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// Eigenvalues (ascending, merged within merge_tol) with orthogonal
/// projectors onto the corresponding eigenspaces.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<Matrix> projectors;

    std::size_t size() const { return eigenvalues.size(); }

    Matrix reconstruct() const {
        require(!projectors.empty(), "empty spectral decomposition");
        Matrix out = Matrix::Zero(projectors[0].rows(), projectors[0].cols());
        for (std::size_t k = 0; k < size(); ++k) out += eigenvalues[k] * projectors[k];
        return out;
    }
};

inline SpectralDecomposition spectral(const Matrix& h, double tol = default_tol,
                                      double merge_tol = eigenvalue_merge_tol) {
    require(is_hermitian(h, tol), "spectral: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    SpectralDecomposition out;
    Index k = 0;
    while (k < h.rows()) {
        Index start = k;
        double value = solver.eigenvalues()(start);
        Matrix projector = Matrix::Zero(h.rows(), h.cols());
        // group eigenvalues by closeness to the group's first member
        while (k < h.rows() && std::abs(solver.eigenvalues()(k) - value) <= merge_tol) {
            projector += solver.eigenvectors().col(k) * solver.eigenvectors().col(k).adjoint();
            ++k;
        }
        out.eigenvalues.push_back(value);
        out.projectors.push_back(projector);
    }
    return out;
}

/// Choi matrix of the operation x -> sum_k K x K^dag on C^d:
/// C = sum_{ij} O(|i><j|) (x) |i><j|, size d^2.
inline Matrix choi_of_operation(const std::vector<Matrix>& kraus, Index d) {
    require(d >= 1, "choi_of_operation: dimension must be positive");
    require(!kraus.empty(), "choi_of_operation: empty Kraus list");
    for (const Matrix& k : kraus)
        require(k.rows() == d && k.cols() == d, "choi_of_operation: Kraus size mismatch");
    Matrix choi = Matrix::Zero(d * d, d * d);
    for (const Matrix& k : kraus) {
        // |v> = (K (x) I) sum_i |ii>, components v[(p, q)] = K(p, q)
        CVector v(d * d);
        for (Index p = 0; p < d; ++p)
            for (Index q = 0; q < d; ++q) v(p * d + q) = k(p, q);
        choi += v * v.adjoint();
    }
    return choi;
}

}  // namespace qpt
