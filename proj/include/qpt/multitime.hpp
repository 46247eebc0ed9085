// Multi-time statistics of a state evolving under an EvolutionFamily:
// time-ordered correlation kernels, sequential measurement probabilities,
// marginalization gaps and the nondemolition check.
#pragma once

#include <optional>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/evolution.hpp"
#include "qpt/matrix_ops.hpp"

namespace qpt {

/// Strictly increasing nonnegative measurement times.
class TimeTuple {
public:
    explicit TimeTuple(std::vector<double> times) : times_(std::move(times)) {
        require(!times_.empty(), "time tuple must not be empty");
        require(times_.front() >= 0.0, "times must be nonnegative");
        for (std::size_t k = 1; k < times_.size(); ++k)
            require(times_[k] > times_[k - 1] && !times_equal(times_[k], times_[k - 1]),
                    "times must be strictly increasing");
    }

    std::size_t size() const { return times_.size(); }
    double operator[](std::size_t k) const { return times_[k]; }
    const std::vector<double>& values() const { return times_; }
    double last() const { return times_.back(); }

private:
    std::vector<double> times_;
};

/// One operator per measurement time, all on the same space.
struct OperatorTuple {
    std::vector<Matrix> ops;

    std::size_t size() const { return ops.size(); }

    Index dim() const {
        require(!ops.empty(), "operator tuple must not be empty");
        Index d = ops.front().rows();
        for (const Matrix& op : ops)
            require(op.rows() == d && op.cols() == d, "operator tuple dimensions disagree");
        return d;
    }
};

/// A validated density operator (PSD, unit trace).
class DensityOperator {
public:
    explicit DensityOperator(Matrix rho, double tol = default_tol) : rho_(std::move(rho)) {
        require(is_psd(rho_, tol), "density operator must be positive semidefinite");
        require(std::abs(rho_.trace() - Complex(1.0)) <= tol,
                "density operator must have unit trace");
    }

    const Matrix& matrix() const { return rho_; }
    Index dim() const { return rho_.rows(); }

private:
    Matrix rho_;
};

namespace detail {

/// j(a) = j_{t_n}(a_n) * ... * j_{t_1}(a_1), leftmost factor latest.
inline Matrix ordered_product(const EvolutionFamily& fam, const TimeTuple& times,
                              const OperatorTuple& a) {
    Index d = a.dim();
    require(d == fam.dim(), "operators do not match the evolution dimension");
    require(a.size() == times.size(), "one operator per time is required");
    Matrix acc = Matrix::Identity(d, d);
    for (std::size_t k = 0; k < times.size(); ++k)
        acc = (heisenberg(fam, times[k], a.ops[k]) * acc).eval();
    return acc;
}

inline void check_projectors(const std::vector<Matrix>& projectors, Index d, double tol) {
    for (const Matrix& p : projectors) {
        require(p.rows() == d && p.cols() == d, "projector dimension mismatch");
        require(is_projector(p, tol), "measurement operator is not a projector");
    }
}

}  // namespace detail

/// Time-ordered correlation kernel
///   w(a, b) = tr(rho j(a)^dag j(b)),  j(a) = j_{t_n}(a_n)...j_{t_1}(a_1).
/// Gram matrices of this kernel over tuples are positive semidefinite.
inline Complex correlation_kernel(const EvolutionFamily& fam, const DensityOperator& state,
                                  const TimeTuple& times, const OperatorTuple& a,
                                  const OperatorTuple& b) {
    Matrix ja = detail::ordered_product(fam, times, a);
    Matrix jb = detail::ordered_product(fam, times, b);
    return (state.matrix() * ja.adjoint() * jb).trace();
}

/// Probability of observing the projector chain, computed in the
/// Heisenberg picture as the kernel diagonal w(P, P).
inline double pyramidal_probability(const EvolutionFamily& fam, const DensityOperator& state,
                                    const TimeTuple& times,
                                    const std::vector<Matrix>& projectors,
                                    double tol = default_tol) {
    require(projectors.size() == times.size(), "one projector per time is required");
    detail::check_projectors(projectors, fam.dim(), tol);
    OperatorTuple tuple{projectors};
    return clamp_probability(correlation_kernel(fam, state, times, tuple, tuple), tol);
}

/// The same probability computed in the Schroedinger picture: propagate the
/// state forward through each interval, project, repeat, then take the trace.
inline double sequential_probability(const EvolutionFamily& fam, const DensityOperator& state,
                                     const TimeTuple& times,
                                     const std::vector<Matrix>& projectors,
                                     double tol = default_tol) {
    require(projectors.size() == times.size(), "one projector per time is required");
    detail::check_projectors(projectors, fam.dim(), tol);
    require(state.dim() == fam.dim(), "state does not match the evolution dimension");

    Matrix sigma = state.matrix();
    double prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        sigma = propagate_state(fam, prev, times[k], sigma);
        sigma = (projectors[k] * sigma * projectors[k]).eval();
        prev = times[k];
    }
    return clamp_probability(sigma.trace(), tol);
}

/// A complete projective measurement: projectors summing to the identity.
struct ProjectorSet {
    std::vector<Matrix> projectors;

    void validate(Index d, double tol = default_tol) const {
        require(!projectors.empty(), "projector set must not be empty");
        detail::check_projectors(projectors, d, tol);
        Matrix sum = Matrix::Zero(d, d);
        for (const Matrix& p : projectors) sum += p;
        require(max_abs(sum - Matrix::Identity(d, d)) <= tol,
                "projector set does not resolve the identity");
    }
};

struct MarginalizationReport {
    double summed = 0.0;   // sum over all outcomes at the hole
    double reduced = 0.0;  // probability with the hole's time removed
    double gap = 0.0;      // summed - reduced
};

/// Compares summing over every outcome of one intermediate measurement
/// against simply not measuring at that time. The two agree only in
/// special (nondemolition) situations; the gap quantifies the failure.
/// The hole must not sit at the final time: dropping the last measurement
/// is always consistent, so asking for that gap is rejected.
inline MarginalizationReport marginalization_gap(
    const EvolutionFamily& fam, const DensityOperator& state, const TimeTuple& times,
    const std::vector<ProjectorSet>& measurements,
    const std::vector<std::optional<std::size_t>>& outcomes, double tol = default_tol) {
    require(measurements.size() == times.size(), "one measurement per time is required");
    require(outcomes.size() == times.size(), "one outcome entry per time is required");

    std::size_t hole = times.size();
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (outcomes[k].has_value()) {
            require(*outcomes[k] < measurements[k].projectors.size(),
                    "outcome index out of range");
        } else {
            require(hole == times.size(), "exactly one hole is required");
            hole = k;
        }
    }
    require(hole < times.size(), "exactly one hole is required");
    if (hole + 1 == times.size())
        throw FinalTimeHoleError("marginalizing the final time is always consistent");
    for (const ProjectorSet& m : measurements) m.validate(fam.dim(), tol);

    std::vector<Matrix> chain(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        if (k != hole) chain[k] = measurements[k].projectors[*outcomes[k]];

    MarginalizationReport report;
    for (const Matrix& p : measurements[hole].projectors) {
        chain[hole] = p;
        report.summed += sequential_probability(fam, state, times, chain, tol);
    }

    std::vector<double> reduced_times;
    std::vector<Matrix> reduced_chain;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k == hole) continue;
        reduced_times.push_back(times[k]);
        reduced_chain.push_back(chain[k]);
    }
    report.reduced =
        sequential_probability(fam, state, TimeTuple(reduced_times), reduced_chain, tol);
    report.gap = report.summed - report.reduced;
    return report;
}

struct QndReport {
    double max_commutator_norm = 0.0;
    std::size_t pairs_checked = 0;
};

/// Nondemolition check for repeated measurement of one observable: the
/// observable's eigenprojectors, moved to each measurement time, must all
/// commute. Reports the worst pairwise commutator in operator norm.
inline QndReport qnd_check(const EvolutionFamily& fam, const TimeTuple& times,
                           const Matrix& observable, double tol = default_tol,
                           double merge_tol = eigenvalue_merge_tol) {
    require(observable.rows() == fam.dim() && observable.cols() == fam.dim(),
            "observable does not match the evolution dimension");
    SpectralDecomposition dec = spectral(observable, tol, merge_tol);

    std::vector<std::vector<Matrix>> moved(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        for (const Matrix& p : dec.projectors)
            moved[k].push_back(heisenberg(fam, times[k], p));

    QndReport report;
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t l = k + 1; l < times.size(); ++l)
            for (const Matrix& pa : moved[k])
                for (const Matrix& pb : moved[l]) {
                    report.max_commutator_norm = std::max(
                        report.max_commutator_norm, operator_norm(pa * pb - pb * pa));
                    ++report.pairs_checked;
                }
    return report;
}

}  // namespace qpt
