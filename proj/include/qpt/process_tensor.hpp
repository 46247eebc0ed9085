// Process tensors for a system repeatedly interrogated while coupled to an
// environment.
//
// A ProcessTensorSpec fixes everything the experimenter does not control:
// the joint initial state, the intervention times and the joint unitaries
// across each interval. evaluate() feeds a sequence of system-side
// operations through that scaffold:
//
//   output = tr_e( O_n U_n ( ... O_1 U_1 (rho_se) U_1^dag ... ) U_n^dag )
//
// with U_j the unitary over (t_{j-1}, t_j], t_0 = 0, and each O_j acting on
// the system factor only. The trace of the output is the probability of the
// corresponding outcome sequence.
//
// choi_state() packs the same data into one many-body state by feeding half
// of a fresh maximally entangled pair into every slot. Leg layout of the
// result, as tensor factors of dimension d_s each:
//
//   [ F, I_1, O_1, I_2, O_2, ..., I_n, O_n ]
//
// F is the final system output; I_j carries the state delivered to slot j,
// O_j the state the slot hands back. Contracting with swap-transposed Choi
// matrices of the slot operations (contract_with_operations) reproduces
// tr(evaluate(...)) exactly; that identity is the contract this layout is
// tested against.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/instruments.hpp"
#include "qpt/matrix_ops.hpp"
#include "qpt/random.hpp"

namespace qpt {

struct ProcessTensorSpec {
    Index d_s = 0;
    Index d_e = 0;
    Matrix rho_se;
    std::vector<double> times;
    std::vector<Matrix> interval_unitaries;

    std::size_t n_slots() const { return times.size(); }
};

struct SpecIssues {
    std::vector<std::string> problems;

    bool ok() const { return problems.empty(); }
};

/// Shape problems: sizes and counts that make evaluation impossible.
inline SpecIssues spec_shape_issues(const ProcessTensorSpec& spec) {
    SpecIssues issues;
    auto flag = [&issues](const std::string& p) { issues.problems.push_back(p); };

    if (spec.d_s < 1 || spec.d_e < 1) flag("dimensions must be positive");
    if (spec.times.empty()) flag("at least one intervention time is required");
    if (!spec.times.empty() && spec.times.front() < 0.0) flag("times must be nonnegative");
    for (std::size_t j = 1; j < spec.times.size(); ++j)
        if (spec.times[j] <= spec.times[j - 1]) {
            flag("times must be strictly increasing");
            break;
        }
    if (spec.interval_unitaries.size() != spec.times.size())
        flag("one interval unitary per time is required");

    Index d = spec.d_s * spec.d_e;
    if (d > 0) {
        if (spec.rho_se.rows() != d || spec.rho_se.cols() != d)
            flag("initial state has the wrong dimension");
        for (const Matrix& u : spec.interval_unitaries)
            if (u.rows() != d || u.cols() != d) {
                flag("interval unitary has the wrong dimension");
                break;
            }
    }
    return issues;
}

/// Shape problems plus physics: initial state must be a density operator,
/// interval matrices unitary.
inline SpecIssues validate_spec(const ProcessTensorSpec& spec, double tol = default_tol) {
    SpecIssues issues = spec_shape_issues(spec);
    if (!issues.ok()) return issues;
    auto flag = [&issues](const std::string& p) { issues.problems.push_back(p); };

    if (!is_density(spec.rho_se, tol)) flag("initial state is not a density operator");
    for (const Matrix& u : spec.interval_unitaries)
        if (!is_unitary(u, tol)) {
            flag("interval matrix is not unitary");
            break;
        }
    return issues;
}

/// Weighted sums of product operation sequences, one operation per slot.
/// Weights must be nonnegative.
struct OperationSequence {
    struct Term {
        double weight = 1.0;
        std::vector<QuantumOperation> slots;
    };

    std::vector<Term> terms;

    static OperationSequence elementary(std::vector<QuantumOperation> slots) {
        return OperationSequence{{Term{1.0, std::move(slots)}}};
    }

    std::size_t n_slots() const {
        require(!terms.empty(), "operation sequence has no terms");
        return terms.front().slots.size();
    }

    void check(Index d_s, std::size_t slots, double tol = default_tol) const {
        require(!terms.empty(), "operation sequence has no terms");
        for (const Term& term : terms) {
            require(term.weight >= -tol, "sequence weights must be nonnegative");
            require(term.slots.size() == slots, "wrong number of slot operations");
            for (const QuantumOperation& op : term.slots)
                require(op.dim() == d_s, "slot operation dimension mismatch");
        }
    }
};

namespace detail {

inline void throw_on_issues(const SpecIssues& issues) {
    if (!issues.ok()) throw std::invalid_argument("invalid process tensor: " + issues.problems.front());
}

inline Matrix apply_on_system(const QuantumOperation& op, const Matrix& sigma, Index d_e) {
    Matrix out = Matrix::Zero(sigma.rows(), sigma.cols());
    Matrix id_e = Matrix::Identity(d_e, d_e);
    for (const Matrix& k : op.kraus) {
        Matrix k_full = tensor(k, id_e);
        out += k_full * sigma * k_full.adjoint();
    }
    return out;
}

inline Matrix evaluate_raw(const ProcessTensorSpec& spec, const OperationSequence& sequence) {
    Matrix out = Matrix::Zero(spec.d_s, spec.d_s);
    for (const OperationSequence::Term& term : sequence.terms) {
        Matrix sigma = spec.rho_se;
        for (std::size_t j = 0; j < spec.n_slots(); ++j) {
            const Matrix& u = spec.interval_unitaries[j];
            sigma = (u * sigma * u.adjoint()).eval();
            sigma = apply_on_system(term.slots[j], sigma, spec.d_e);
        }
        double weight = std::max(term.weight, 0.0);
        out += weight * partial_trace(sigma, {spec.d_s, spec.d_e}, {0});
    }
    return out;
}

}  // namespace detail

/// Unnormalized system state after threading the operation sequence through
/// the process. Its trace is the sequence's probability weight.
inline Matrix evaluate(const ProcessTensorSpec& spec, const OperationSequence& sequence,
                       double tol = default_tol) {
    detail::throw_on_issues(validate_spec(spec, tol));
    sequence.check(spec.d_s, spec.n_slots(), tol);
    return detail::evaluate_raw(spec, sequence);
}

inline double outcome_probability(const ProcessTensorSpec& spec,
                                  const std::vector<QuantumInstrument>& instruments,
                                  const std::vector<std::string>& outcome_labels,
                                  double tol = default_tol) {
    require(instruments.size() == spec.n_slots(), "one instrument per slot is required");
    require(outcome_labels.size() == spec.n_slots(), "one outcome per slot is required");
    std::vector<QuantumOperation> slots;
    for (std::size_t j = 0; j < instruments.size(); ++j) {
        auto it = instruments[j].outcomes.find(outcome_labels[j]);
        require(it != instruments[j].outcomes.end(),
                "unknown outcome label: " + outcome_labels[j]);
        slots.push_back(it->second);
    }
    Matrix state = evaluate(spec, OperationSequence::elementary(std::move(slots)), tol);
    return clamp_probability(state.trace(), tol);
}

/// Normalized system state conditioned on an outcome sequence. Rejects
/// conditioning when the outcome probability sits below the floor.
inline Matrix conditional_state(const ProcessTensorSpec& spec,
                                const std::vector<QuantumInstrument>& instruments,
                                const std::vector<std::string>& outcome_labels,
                                double tol = default_tol,
                                double floor = probability_floor) {
    require(instruments.size() == spec.n_slots(), "one instrument per slot is required");
    std::vector<QuantumOperation> slots;
    for (std::size_t j = 0; j < instruments.size(); ++j) {
        auto it = instruments[j].outcomes.find(outcome_labels.at(j));
        require(it != instruments[j].outcomes.end(),
                "unknown outcome label: " + outcome_labels[j]);
        slots.push_back(it->second);
    }
    Matrix state = evaluate(spec, OperationSequence::elementary(std::move(slots)), tol);
    double p = clamp_probability(state.trace(), tol);
    if (p < floor)
        throw ZeroProbabilityError("outcome sequence has probability " + std::to_string(p));
    return state / p;
}

struct ChoiState {
    Matrix matrix;
    Index d_s = 0;
    std::size_t n_slots = 0;

    /// All 2n+1 legs have the system dimension.
    std::vector<Index> leg_dims() const {
        return std::vector<Index>(2 * n_slots + 1, d_s);
    }
};

namespace detail {

inline ChoiState choi_raw(const ProcessTensorSpec& spec, Index dim_cap) {
    std::size_t n = spec.n_slots();

    Index final_dim = spec.d_e;
    for (std::size_t j = 0; j < 2 * n + 1; ++j) {
        final_dim *= spec.d_s;
        if (final_dim > dim_cap)
            throw DimensionCapError("choi state register exceeds the dimension cap");
    }

    // unnormalized maximally entangled pair on two d_s legs
    Matrix pair = Matrix::Zero(spec.d_s * spec.d_s, spec.d_s * spec.d_s);
    for (Index i = 0; i < spec.d_s; ++i)
        for (Index j = 0; j < spec.d_s; ++j)
            pair(i * spec.d_s + i, j * spec.d_s + j) = 1.0;

    // register layout: [s, e, I_1, O_1, ..., I_j, O_j]
    Matrix sigma = spec.rho_se;
    std::vector<Index> dims{spec.d_s, spec.d_e};
    for (std::size_t j = 0; j < n; ++j) {
        Index rest = sigma.rows() / (spec.d_s * spec.d_e);
        Matrix u_full = tensor(spec.interval_unitaries[j], Matrix::Identity(rest, rest));
        sigma = (u_full * sigma * u_full.adjoint()).eval();

        sigma = tensor(sigma, pair);
        dims.push_back(spec.d_s);
        dims.push_back(spec.d_s);

        // swap the system leg with the freshly appended input leg: the
        // outgoing system state parks on I_j, the pair half becomes the
        // system
        std::vector<std::size_t> order(dims.size());
        for (std::size_t k = 0; k < dims.size(); ++k) order[k] = k;
        std::swap(order[0], order[dims.size() - 2]);
        sigma = reorder_factors(sigma, dims, order);
    }

    std::vector<std::size_t> keep;
    keep.push_back(0);
    for (std::size_t k = 2; k < dims.size(); ++k) keep.push_back(k);
    return ChoiState{partial_trace(sigma, dims, keep), spec.d_s, n};
}

}  // namespace detail

/// Many-body representation: thread half of an unnormalized maximally
/// entangled pair through every slot. See the leg layout at the top of
/// this header.
inline ChoiState choi_state(const ProcessTensorSpec& spec,
                            Index dim_cap = default_dimension_cap,
                            double tol = default_tol) {
    detail::throw_on_issues(validate_spec(spec, tol));
    return detail::choi_raw(spec, dim_cap);
}

/// Swap-transposed Choi matrix of an operation: legs ordered (input,
/// output), ready to pair with (I_j, O_j) of a ChoiState.
inline Matrix slot_tensor(const QuantumOperation& op) {
    Index d = op.dim();
    Matrix choi = choi_of_operation(op.kraus, d);  // legs (output, input)
    return reorder_factors(choi.transpose(), {d, d}, {1, 0});
}

/// tr( Choi * (I_F (x) X_1 (x) ... (x) X_n) ) with X_j = slot_tensor(op_j).
/// Equals tr(evaluate(spec, elementary(ops))) for the matching spec.
inline Complex contract_with_operations(const ChoiState& choi,
                                        const std::vector<QuantumOperation>& ops) {
    require(ops.size() == choi.n_slots, "one operation per slot is required");
    Matrix probe = Matrix::Identity(choi.d_s, choi.d_s);
    for (const QuantumOperation& op : ops) {
        require(op.dim() == choi.d_s, "operation dimension mismatch");
        probe = tensor(probe, slot_tensor(op));
    }
    return (choi.matrix * probe).trace();
}

/// Spec with slot j removed: the unitaries around it merge into one.
inline ProcessTensorSpec drop_slot(const ProcessTensorSpec& spec, std::size_t j) {
    require(j + 1 < spec.n_slots(), "only interior slots can be dropped");
    ProcessTensorSpec reduced = spec;
    reduced.times.erase(reduced.times.begin() + j);
    reduced.interval_unitaries[j + 1] =
        reduced.interval_unitaries[j + 1] * reduced.interval_unitaries[j];
    reduced.interval_unitaries.erase(reduced.interval_unitaries.begin() + j);
    return reduced;
}

struct AuditReport {
    double trace_bound_margin = 0.0;    // worst excess of tr outside [0, 1]
    double choi_min_eigenvalue = 0.0;   // most negative Choi eigenvalue seen
    double containment_deviation = 0.0; // worst slot-drop mismatch

    bool ok(double tol = 1e-8) const {
        return trace_bound_margin <= tol && choi_min_eigenvalue >= -tol &&
               containment_deviation <= tol;
    }
};

/// Checks the three structural properties on random probe sequences:
/// probability normalization, positivity of the Choi state, and agreement
/// between dropping a slot and plugging in the identity operation.
///
/// Only the spec's shape is enforced up front. Physically corrupted data
/// (unnormalized intervals, indefinite initial states) is deliberately let
/// through so the margins expose the violation.
inline AuditReport audit_properties(const ProcessTensorSpec& spec, std::uint64_t seed,
                                    int sequence_trials = 6,
                                    Index dim_cap = default_dimension_cap) {
    detail::throw_on_issues(spec_shape_issues(spec));
    std::size_t n = spec.n_slots();
    Rng rng(seed);
    AuditReport report;

    for (int trial = 0; trial < sequence_trials; ++trial) {
        bool trace_preserving = (trial % 2 == 0);
        std::vector<QuantumOperation> slots;
        for (std::size_t j = 0; j < n; ++j)
            slots.push_back(random_operation(rng, spec.d_s, 2, trace_preserving));
        Complex tr =
            detail::evaluate_raw(spec, OperationSequence::elementary(slots)).trace();
        double excess = std::max({tr.real() - 1.0, -tr.real(), std::abs(tr.imag())});
        report.trace_bound_margin = std::max(report.trace_bound_margin, excess);
    }

    report.choi_min_eigenvalue = min_eigenvalue(detail::choi_raw(spec, dim_cap).matrix);

    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::vector<QuantumOperation> slots;
        for (std::size_t k = 0; k < n; ++k)
            slots.push_back(k == j ? identity_operation(spec.d_s)
                                   : random_operation(rng, spec.d_s, 2, true));
        Matrix full = detail::evaluate_raw(spec, OperationSequence::elementary(slots));

        std::vector<QuantumOperation> reduced_slots;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) reduced_slots.push_back(slots[k]);
        Matrix reduced = detail::evaluate_raw(drop_slot(spec, j),
                                              OperationSequence::elementary(reduced_slots));
        report.containment_deviation =
            std::max(report.containment_deviation, max_abs(full - reduced));
    }
    return report;
}

/// Spec assembled from a joint evolution family sampled at the given times.
inline ProcessTensorSpec dilated_spec(Index d_s, Index d_e, Matrix rho_se,
                                      const std::vector<Matrix>& step_unitaries,
                                      std::vector<double> times) {
    ProcessTensorSpec spec;
    spec.d_s = d_s;
    spec.d_e = d_e;
    spec.rho_se = std::move(rho_se);
    spec.times = std::move(times);
    spec.interval_unitaries = step_unitaries;
    return spec;
}

/// Random spec for audits: Haar interval unitaries, random joint state.
inline ProcessTensorSpec sample_spec(Rng& rng, Index d_s, Index d_e, std::size_t n) {
    ProcessTensorSpec spec;
    spec.d_s = d_s;
    spec.d_e = d_e;
    spec.rho_se = random_density(rng, d_s * d_e);
    for (std::size_t j = 0; j < n; ++j) {
        spec.times.push_back(static_cast<double>(j + 1));
        spec.interval_unitaries.push_back(random_unitary(rng, d_s * d_e));
    }
    return spec;
}

}  // namespace qpt
