// Seeded random matrices for tests, audits and the theorem checker.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/instruments.hpp"
#include "qpt/matrix_ops.hpp"

namespace qpt {

struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double gaussian() {
        std::normal_distribution<double> dist(0.0, 1.0);
        return dist(engine);
    }

    double uniform() {
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        return dist(engine);
    }

    std::size_t pick(std::size_t n) {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(engine);
    }
};

/// iid complex Gaussian entries.
inline Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return m;
}

inline Matrix random_hermitian(Rng& rng, Index d) {
    Matrix g = random_matrix(rng, d, d);
    return 0.5 * (g + g.adjoint()).eval();
}

/// Haar-distributed via QR with phase-fixed R diagonal.
inline Matrix random_unitary(Rng& rng, Index d) {
    Matrix g = random_matrix(rng, d, d);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < d; ++k) {
        Complex diag = r(k, k);
        q.col(k) *= (std::abs(diag) > 0) ? diag / std::abs(diag) : Complex(1.0);
    }
    return q;
}

inline Matrix random_density(Rng& rng, Index d) {
    Matrix g = random_matrix(rng, d, d);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace();
}

inline CVector random_state(Rng& rng, Index d) {
    CVector v(d);
    for (Index i = 0; i < d; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    return v / v.norm();
}

inline Matrix random_projector(Rng& rng, Index d, Index rank) {
    Matrix u = random_unitary(rng, d);
    Matrix p = Matrix::Zero(d, d);
    for (Index k = 0; k < rank; ++k) p += u.col(k) * u.col(k).adjoint();
    return p;
}

/// Trace-preserving Kraus family: isometric columns of a random unitary on
/// C^{n d} reshaped into n operators K_k with sum_k K_k^dag K_k = I.
inline std::vector<Matrix> random_kraus_tp(Rng& rng, Index d, Index n_ops) {
    Matrix u = random_unitary(rng, n_ops * d);
    std::vector<Matrix> kraus;
    kraus.reserve(static_cast<std::size_t>(n_ops));
    for (Index k = 0; k < n_ops; ++k) kraus.push_back(u.block(k * d, 0, d, d));
    return kraus;
}

/// Trace-nonincreasing Kraus family: a trace-preserving one scaled down.
inline std::vector<Matrix> random_kraus_contractive(Rng& rng, Index d, Index n_ops) {
    std::vector<Matrix> kraus = random_kraus_tp(rng, d, n_ops);
    double scale = std::sqrt(0.2 + 0.8 * rng.uniform());
    for (Matrix& k : kraus) k *= scale;
    return kraus;
}

inline QuantumOperation random_operation(Rng& rng, Index d, Index n_kraus,
                                         bool trace_preserving) {
    std::vector<Matrix> kraus = trace_preserving ? random_kraus_tp(rng, d, n_kraus)
                                                 : random_kraus_contractive(rng, d, n_kraus);
    return QuantumOperation{std::move(kraus), ""};
}

/// Instrument whose outcomes split a trace-preserving Kraus family.
inline QuantumInstrument random_instrument(Rng& rng, Index d, Index n_outcomes) {
    std::vector<Matrix> kraus = random_kraus_tp(rng, d, 2 * n_outcomes);
    QuantumInstrument instrument;
    for (Index o = 0; o < n_outcomes; ++o) {
        std::string label = std::to_string(o);
        instrument.outcomes[label] =
            QuantumOperation{{kraus[2 * o], kraus[2 * o + 1]}, label};
    }
    return instrument;
}

}  // namespace qpt
