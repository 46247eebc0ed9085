// Bridge between correlation kernels and process tensors.
//
// Two routes to the same numbers:
//  - kernels evaluated on a dilated system (multitime.hpp machinery on the
//    joint space), and
//  - process-tensor chain traces (process_tensor.hpp machinery).
//
// The diagonal case is the chain-of-equalities identity
//   w(R, R) = tr T^s(R),
// where T^s threads each slot map x -> R_j x R_j^dag through the process.
// Polarization extends it to arbitrary kernel entries (verify_theorem1),
// and ancilla constructions realize weighted sums of chain traces as one
// extended kernel (extended_kernel*).
#pragma once

#include <array>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/evolution.hpp"
#include "qpt/instruments.hpp"
#include "qpt/matrix_ops.hpp"
#include "qpt/multitime.hpp"
#include "qpt/process_tensor.hpp"

namespace qpt {

/// A system of dimension d_s coupled to an environment of dimension d_e,
/// with a joint initial state and joint evolution family.
struct Dilation {
    Index d_s = 0;
    Index d_e = 0;
    Matrix rho_se;
    EvolutionFamily family;

    void check(double tol = default_tol) const {
        require(d_s >= 1 && d_e >= 1, "dilation dimensions must be positive");
        require(family.dim() == d_s * d_e, "joint evolution has the wrong dimension");
        require(rho_se.rows() == d_s * d_e && rho_se.cols() == d_s * d_e,
                "joint state has the wrong dimension");
        require(is_density(rho_se, tol), "joint state is not a density operator");
    }
};

/// System operators acting trivially on the environment.
inline OperatorTuple extend_to_environment(const OperatorTuple& a, Index d_e) {
    OperatorTuple out;
    Matrix id_e = Matrix::Identity(d_e, d_e);
    for (const Matrix& op : a.ops) out.ops.push_back(tensor(op, id_e));
    return out;
}

/// The same dynamics on ancilla (x) original space; the ancilla idles.
inline EvolutionFamily prepend_ancilla(const EvolutionFamily& family, Index d_a) {
    Matrix id_a = Matrix::Identity(d_a, d_a);
    std::vector<Segment> segments = family.segments();
    for (Segment& seg : segments) seg.generator = tensor(id_a, seg.generator);
    return EvolutionFamily(std::move(segments));
}

inline ProcessTensorSpec process_tensor_from_dilation(const Dilation& dilation,
                                                      const TimeTuple& times) {
    dilation.check();
    return dilated_spec(dilation.d_s, dilation.d_e, dilation.rho_se,
                        interval_unitaries(dilation.family, times.values()),
                        times.values());
}

/// tr T^s(R): the process tensor of the dilation applied to the slot maps
/// x -> R_j x R_j^dag. The R_j are arbitrary system operators.
inline Complex chain_trace(const ProcessTensorSpec& spec, const std::vector<Matrix>& chain) {
    std::vector<QuantumOperation> slots;
    for (const Matrix& r : chain) slots.push_back(QuantumOperation{{r}, ""});
    return evaluate(spec, OperationSequence::elementary(std::move(slots))).trace();
}

inline Complex chain_trace(const Dilation& dilation, const TimeTuple& times,
                           const std::vector<Matrix>& chain) {
    return chain_trace(process_tensor_from_dilation(dilation, times), chain);
}

struct PolarizationTerm {
    Complex coefficient;
    Matrix combination;
};

/// x^dag Z y = sum_m c_m R_m^dag Z R_m for every Z, with the four
/// combinations R_m = x + i^m y and c_m = (-i)^m / 4.
inline std::array<PolarizationTerm, 4> polarize(const Matrix& x, const Matrix& y) {
    require(x.rows() == y.rows() && x.cols() == y.cols(),
            "polarization needs equally sized operators");
    const Complex i_unit(0.0, 1.0);
    std::array<PolarizationTerm, 4> terms;
    Complex phase(1.0, 0.0);  // i^m
    for (int m = 0; m < 4; ++m) {
        terms[m].coefficient = 0.25 * std::conj(phase);
        terms[m].combination = x + phase * y;
        phase *= i_unit;
    }
    return terms;
}

/// Slotwise polarization of a kernel entry: exactly 4^n diagonal terms with
///   w(a, b) = sum_m c_m w(R_m, R_m),  R_m,j = a_j + i^{m_j} b_j,
/// coefficients c_m = prod_j (-i)^{m_j} / 4. No simplification is applied.
struct PolarizationDecomposition {
    struct Term {
        Complex coefficient;
        OperatorTuple tuple;
    };

    std::vector<Term> terms;
};

inline PolarizationDecomposition kernel_decompose(const OperatorTuple& a,
                                                  const OperatorTuple& b) {
    require(a.size() == b.size(), "kernel arguments need the same length");
    std::size_t n = a.size();
    require(a.dim() == b.dim(), "kernel arguments need the same dimension");

    PolarizationDecomposition out;
    std::vector<int> digits(n, 0);
    while (true) {
        PolarizationDecomposition::Term term;
        term.coefficient = Complex(1.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            std::array<PolarizationTerm, 4> slot = polarize(a.ops[j], b.ops[j]);
            term.coefficient *= slot[digits[j]].coefficient;
            term.tuple.ops.push_back(slot[digits[j]].combination);
        }
        out.terms.push_back(std::move(term));

        std::size_t j = 0;
        while (j < n && ++digits[j] == 4) digits[j++] = 0;
        if (j == n) break;
    }
    return out;
}

/// Ancilla realization of a weighted family of operator chains. Slot j
/// carries branches r with ancilla factors V[j][r] and system factors
/// W[j][r]; the extended slot operator is sum_r V[j][r] (x) W[j][r] (x) I_e.
struct AncillaConstruction {
    Matrix rho_a;
    std::vector<std::vector<Matrix>> V;
    std::vector<std::vector<Matrix>> W;

    Index d_a() const { return rho_a.rows(); }
    std::size_t n_slots() const { return V.size(); }

    std::vector<std::size_t> branch_counts() const {
        std::vector<std::size_t> counts;
        for (const auto& slot : V) counts.push_back(slot.size());
        return counts;
    }

    void check(Index d_s, double tol = default_tol) const {
        require(is_density(rho_a, tol), "ancilla state is not a density operator");
        require(!V.empty() && V.size() == W.size(), "V and W need one entry per slot");
        for (std::size_t j = 0; j < V.size(); ++j) {
            require(!V[j].empty() && V[j].size() == W[j].size(),
                    "V and W branch counts disagree");
            for (const Matrix& v : V[j])
                require(v.rows() == d_a() && v.cols() == d_a(),
                        "ancilla factor has the wrong dimension");
            for (const Matrix& w : W[j])
                require(w.rows() == d_s && w.cols() == d_s,
                        "system factor has the wrong dimension");
        }
    }
};

namespace detail {

/// Calls fn for every branch multi-index (r_1, ..., r_n), r_1 slowest.
template <typename Fn>
void for_each_branch(const std::vector<std::size_t>& counts, Fn&& fn) {
    std::vector<std::size_t> index(counts.size(), 0);
    while (true) {
        fn(index);
        std::size_t j = counts.size();
        while (j > 0) {
            --j;
            if (++index[j] < counts[j]) break;
            index[j] = 0;
            if (j == 0) return;
        }
        if (counts.empty()) return;
    }
}

/// V(r) = V[n-1][r_n] * ... * V[0][r_1].
inline Matrix branch_product(const AncillaConstruction& anc,
                             const std::vector<std::size_t>& r) {
    Matrix acc = Matrix::Identity(anc.d_a(), anc.d_a());
    for (std::size_t j = 0; j < r.size(); ++j) acc = (anc.V[j][r[j]] * acc).eval();
    return acc;
}

inline std::size_t branch_total(const std::vector<std::size_t>& counts) {
    std::size_t total = 1;
    for (std::size_t c : counts) total *= c;
    return total;
}

}  // namespace detail

/// Largest number of branch combinations the numeric delta check accepts.
inline constexpr std::size_t delta_check_cap = 64;

struct DeltaReport {
    double max_off_diagonal = 0.0;  // |tr(rho_a V(r')^dag V(r))| over r != r'
    double min_diagonal = 0.0;      // smallest weight candidate
    std::size_t branch_count = 0;

    bool holds(double tol = default_tol) const {
        return max_off_diagonal <= tol && min_diagonal >= -tol;
    }
};

/// Numeric check of the orthogonality condition
///   tr(rho_a V(r')^dag V(r)) = delta_{r', r} alpha_r
/// over all branch pairs.
inline DeltaReport check_delta_condition(const AncillaConstruction& anc,
                                         std::size_t cap = delta_check_cap) {
    std::vector<std::size_t> counts = anc.branch_counts();
    std::size_t total = detail::branch_total(counts);
    if (total > cap)
        throw DimensionCapError("too many branch combinations for the delta check");

    std::vector<Matrix> products;
    products.reserve(total);
    detail::for_each_branch(counts, [&](const std::vector<std::size_t>& r) {
        products.push_back(detail::branch_product(anc, r));
    });

    DeltaReport report;
    report.branch_count = total;
    report.min_diagonal = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < total; ++p)
        for (std::size_t q = 0; q < total; ++q) {
            Complex value = (anc.rho_a * products[p].adjoint() * products[q]).trace();
            if (p == q)
                report.min_diagonal = std::min(report.min_diagonal, value.real());
            else
                report.max_off_diagonal = std::max(report.max_off_diagonal, std::abs(value));
        }
    return report;
}

/// Branch weights alpha_r = tr(rho_a V(r)^dag V(r)), in for_each_branch
/// order (last slot fastest). Small negative values are clamped to zero;
/// a failing delta condition is rejected.
inline std::vector<double> ancilla_weights(const AncillaConstruction& anc,
                                           double tol = default_tol) {
    DeltaReport delta = check_delta_condition(anc);
    require(delta.holds(tol), "ancilla construction violates the delta condition");

    std::vector<double> weights;
    detail::for_each_branch(anc.branch_counts(), [&](const std::vector<std::size_t>& r) {
        Matrix v = detail::branch_product(anc, r);
        double alpha = (anc.rho_a * v.adjoint() * v).trace().real();
        weights.push_back(std::max(alpha, 0.0));
    });
    return weights;
}

/// Diagonal kernel of the extended slot operators on ancilla (x) system (x)
/// environment, evaluated by brute force on the full space.
inline Complex extended_kernel(const AncillaConstruction& anc, const Dilation& dilation,
                               const TimeTuple& times,
                               Index dim_cap = default_dimension_cap) {
    dilation.check();
    anc.check(dilation.d_s);
    require(anc.n_slots() == times.size(), "one slot per time is required");
    Index full = anc.d_a() * dilation.d_s * dilation.d_e;
    if (full > dim_cap)
        throw DimensionCapError("extended space exceeds the dimension cap");

    EvolutionFamily ext_family = prepend_ancilla(dilation.family, anc.d_a());
    DensityOperator ext_state(tensor(anc.rho_a, dilation.rho_se));

    OperatorTuple extended;
    Matrix id_e = Matrix::Identity(dilation.d_e, dilation.d_e);
    for (std::size_t j = 0; j < anc.n_slots(); ++j) {
        Matrix slot = Matrix::Zero(full, full);
        for (std::size_t r = 0; r < anc.V[j].size(); ++r)
            slot += tensor({anc.V[j][r], anc.W[j][r], id_e});
        extended.ops.push_back(std::move(slot));
    }
    return correlation_kernel(ext_family, ext_state, times, extended, extended);
}

/// The same number assembled from the weights: sum_r alpha_r tr T^s(W(r)).
inline Complex extended_kernel_via_weights(const AncillaConstruction& anc,
                                           const Dilation& dilation, const TimeTuple& times,
                                           double tol = default_tol) {
    dilation.check();
    anc.check(dilation.d_s);
    require(anc.n_slots() == times.size(), "one slot per time is required");
    std::vector<double> weights = ancilla_weights(anc, tol);
    ProcessTensorSpec spec = process_tensor_from_dilation(dilation, times);

    Complex total(0.0, 0.0);
    std::size_t flat = 0;
    detail::for_each_branch(anc.branch_counts(), [&](const std::vector<std::size_t>& r) {
        if (weights[flat] > 0.0) {
            std::vector<Matrix> chain;
            for (std::size_t j = 0; j < r.size(); ++j) chain.push_back(anc.W[j][r[j]]);
            total += weights[flat] * chain_trace(spec, chain);
        }
        ++flat;
    });
    return total;
}

struct TheoremReport {
    Complex lhs = 0.0;        // kernel on the dilated system
    Complex rhs = 0.0;        // polarization sum of chain traces
    double abs_error = 0.0;
    std::size_t term_count = 0;
};

/// Checks that an arbitrary kernel entry is a finite combination of
/// process-tensor chain traces. The two sides go through independent code:
/// Heisenberg products on the joint space versus Schroedinger propagation
/// through the process tensor.
inline TheoremReport verify_theorem1(const Dilation& dilation, const TimeTuple& times,
                                     const OperatorTuple& a, const OperatorTuple& b) {
    dilation.check();
    require(a.size() == times.size() && b.size() == times.size(),
            "one operator per time is required");

    TheoremReport report;
    report.lhs = correlation_kernel(dilation.family, DensityOperator(dilation.rho_se), times,
                                    extend_to_environment(a, dilation.d_e),
                                    extend_to_environment(b, dilation.d_e));

    PolarizationDecomposition decomposition = kernel_decompose(a, b);
    ProcessTensorSpec spec = process_tensor_from_dilation(dilation, times);
    for (const PolarizationDecomposition::Term& term : decomposition.terms)
        report.rhs += term.coefficient * chain_trace(spec, term.tuple.ops);

    report.term_count = decomposition.terms.size();
    report.abs_error = std::abs(report.lhs - report.rhs);
    return report;
}

}  // namespace qpt
