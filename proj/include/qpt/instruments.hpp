// Quantum operations (Kraus form, trace-nonincreasing) and instruments
// (outcome-labelled operations that jointly preserve trace).
#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/matrix_ops.hpp"

namespace qpt {

/// x -> sum_k K_k x K_k^dag with sum_k K_k^dag K_k <= I.
struct QuantumOperation {
    std::vector<Matrix> kraus;
    std::string label;

    Index dim() const {
        require(!kraus.empty(), "operation has no Kraus operators");
        Index d = kraus.front().rows();
        for (const Matrix& k : kraus)
            require(k.rows() == d && k.cols() == d, "Kraus operator dimensions disagree");
        return d;
    }

    Matrix kraus_sum() const {
        Index d = dim();
        Matrix sum = Matrix::Zero(d, d);
        for (const Matrix& k : kraus) sum += k.adjoint() * k;
        return sum;
    }
};

inline QuantumOperation identity_operation(Index d, std::string label = "id") {
    return QuantumOperation{{Matrix::Identity(d, d)}, std::move(label)};
}

/// Smallest eigenvalue of I - sum_k K_k^dag K_k; nonnegative (within
/// tolerance) exactly when the operation is trace-nonincreasing.
inline double operation_trace_margin(const QuantumOperation& op) {
    Index d = op.dim();
    return min_eigenvalue(Matrix::Identity(d, d) - op.kraus_sum());
}

inline Matrix kraus_apply(const std::vector<Matrix>& kraus, const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const Matrix& k : kraus) out += k * rho * k.adjoint();
    return out;
}

inline Matrix apply_operation(const QuantumOperation& op, const Matrix& rho,
                              double tol = default_tol) {
    Index d = op.dim();
    require(rho.rows() == d && rho.cols() == d, "state does not match the operation");
    require(operation_trace_margin(op) >= -tol, "operation increases trace");
    return kraus_apply(op.kraus, rho);
}

/// One measurement apparatus: an operation per outcome label, summing to a
/// trace-preserving map.
struct QuantumInstrument {
    std::map<std::string, QuantumOperation> outcomes;

    Index dim() const {
        require(!outcomes.empty(), "instrument has no outcomes");
        Index d = outcomes.begin()->second.dim();
        for (const auto& [label, op] : outcomes)
            require(op.dim() == d, "instrument outcome dimensions disagree");
        return d;
    }
};

struct InstrumentValidation {
    bool has_outcomes = false;
    double normalization_deviation = 0.0;             // ||sum_o S_o - I||
    std::map<std::string, double> trace_margins;      // min eig of I - S_o per outcome

    bool ok(double tol = default_tol) const {
        if (!has_outcomes) return false;
        if (normalization_deviation > tol) return false;
        for (const auto& [label, margin] : trace_margins)
            if (margin < -tol) return false;
        return true;
    }
};

inline InstrumentValidation validate_instrument(const QuantumInstrument& instrument) {
    InstrumentValidation report;
    if (instrument.outcomes.empty()) return report;
    report.has_outcomes = true;

    Index d = instrument.dim();
    Matrix total = Matrix::Zero(d, d);
    for (const auto& [label, op] : instrument.outcomes) {
        report.trace_margins[label] = operation_trace_margin(op);
        total += op.kraus_sum();
    }
    report.normalization_deviation = operator_norm(total - Matrix::Identity(d, d));
    return report;
}

inline std::string eigenvalue_label(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

/// Projective measurement of an observable; outcomes labelled by the
/// eigenvalue rendered at 12 significant digits. Eigenvalues closer than
/// merge_tol share one outcome.
inline QuantumInstrument projective_instrument(const Matrix& observable,
                                               double tol = default_tol,
                                               double merge_tol = eigenvalue_merge_tol) {
    SpectralDecomposition dec = spectral(observable, tol, merge_tol);
    QuantumInstrument instrument;
    for (std::size_t k = 0; k < dec.size(); ++k) {
        std::string label = eigenvalue_label(dec.eigenvalues[k]);
        std::string unique = label;
        for (int suffix = 2; instrument.outcomes.count(unique); ++suffix)
            unique = label + "_" + std::to_string(suffix);
        instrument.outcomes[unique] = QuantumOperation{{dec.projectors[k]}, unique};
    }
    return instrument;
}

}  // namespace qpt
