// Shared aliases, tolerances and error types used across the library.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Default tolerance for structural predicates (hermiticity, unitarity, ...).
inline constexpr double default_tol = 1e-10;

/// Threshold under which two eigenvalues count as the same measurement
/// outcome. Kept separate from default_tol: outcome identity is a modeling
/// choice, not a numerics one.
inline constexpr double eigenvalue_merge_tol = 1e-8;

/// Probabilities below this floor are not trusted for conditioning.
inline constexpr double probability_floor = 1e-12;

/// Largest total Hilbert-space dimension the dense routines accept.
inline constexpr Index default_dimension_cap = 256;

/// Requested total dimension exceeds the configured cap.
struct DimensionCapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Conditioning on an outcome whose probability is below the floor.
struct ZeroProbabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Marginalizing the final measurement time: always consistent, so asking
/// for the gap there signals a misuse and is rejected distinctly.
struct FinalTimeHoleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computed value fell outside its tolerance window (e.g. a probability
/// outside [-tol, 1+tol]); indicates invalid inputs or broken invariants.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

/// Smallest eigenvalue of a Hermitian matrix.
inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

inline double max_abs(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

/// Checks imag(raw) and real(raw) against [-tol, 1+tol], then clamps the
/// real part into [0, 1]. The raw value stays available to callers that
/// want to report it.
inline double clamp_probability(Complex raw, double tol = default_tol) {
    if (std::abs(raw.imag()) > tol)
        throw ToleranceError("probability has imaginary part " + std::to_string(raw.imag()));
    double p = raw.real();
    if (p < -tol || p > 1.0 + tol)
        throw ToleranceError("probability " + std::to_string(p) + " outside [0,1] tolerance window");
    return std::min(1.0, std::max(0.0, p));
}

inline bool times_equal(double a, double b) {
    double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= 1e-12 * scale;
}

}  // namespace qpt
