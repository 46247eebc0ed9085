// Piecewise evolution families U(t) and the observable/state maps built
// from them.
//
// A family is a list of contiguous segments starting at t = 0. A segment
// either evolves continuously under a Hermitian Hamiltonian or applies a
// fixed gate. Gates fire at the segment's end time, so U(t) is constant
// inside a gate segment and picks up the gate exactly at t_end. U(0) is
// the identity. Later segments multiply on the left:
//   U(t) = S_k(t) * S_{k-1} * ... * S_1    for t inside segment k.
// The final segment may extend to t = +infinity, Hamiltonian kind only.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qpt/common.hpp"
#include "qpt/matrix_ops.hpp"

namespace qpt {

struct Segment {
    enum class Kind { hamiltonian, gate };

    double t_start = 0.0;
    double t_end = 0.0;
    Kind kind = Kind::hamiltonian;
    Matrix generator;  // Hamiltonian, or the gate unitary
};

class EvolutionFamily {
public:
    explicit EvolutionFamily(std::vector<Segment> segments, double tol = default_tol)
        : segments_(std::move(segments)) {
        require(!segments_.empty(), "evolution family needs at least one segment");
        require(times_equal(segments_.front().t_start, 0.0),
                "first segment must start at t = 0");
        dim_ = segments_.front().generator.rows();
        require(dim_ >= 1, "evolution family dimension must be positive");

        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const Segment& seg = segments_[k];
            require(seg.generator.rows() == dim_ && seg.generator.cols() == dim_,
                    "all segments must act on the same space");
            bool unbounded = std::isinf(seg.t_end);
            if (unbounded) {
                require(k + 1 == segments_.size(), "only the last segment may be unbounded");
                require(seg.kind == Segment::Kind::hamiltonian,
                        "an unbounded segment cannot be a gate");
            } else {
                require(seg.t_end > seg.t_start && !times_equal(seg.t_end, seg.t_start),
                        "segment end must exceed its start");
            }
            if (k > 0)
                require(times_equal(seg.t_start, segments_[k - 1].t_end),
                        "segments must be contiguous");
            if (seg.kind == Segment::Kind::hamiltonian)
                require(is_hermitian(seg.generator, tol), "segment Hamiltonian is not Hermitian");
            else
                require(is_unitary(seg.generator, tol), "segment gate is not unitary");
        }

        // cumulative_[k] = U(t_start of segment k)
        cumulative_.reserve(segments_.size());
        cumulative_.push_back(Matrix::Identity(dim_, dim_));
        for (std::size_t k = 0; k + 1 < segments_.size(); ++k)
            cumulative_.push_back(segment_full(k) * cumulative_[k]);
    }

    static EvolutionFamily constant_hamiltonian(
        Matrix h, double t_end = std::numeric_limits<double>::infinity(),
        double tol = default_tol) {
        Segment seg;
        seg.t_end = t_end;
        seg.generator = std::move(h);
        return EvolutionFamily({seg}, tol);
    }

    /// No evolution at all: U(t) = I for every t.
    static EvolutionFamily frozen(Index dim) {
        return constant_hamiltonian(Matrix::Zero(dim, dim));
    }

    Index dim() const { return dim_; }
    double t_max() const { return segments_.back().t_end; }
    const std::vector<Segment>& segments() const { return segments_; }

    Matrix unitary_at(double t) const {
        require(t >= 0.0 || times_equal(t, 0.0), "time must be nonnegative");
        t = std::max(t, 0.0);
        require(t <= t_max() || times_equal(t, t_max()),
                "time lies beyond the last segment");

        std::size_t k = segments_.size() - 1;
        while (k > 0 && segments_[k].t_start > t && !times_equal(segments_[k].t_start, t)) --k;
        const Segment& seg = segments_[k];

        if (seg.kind == Segment::Kind::hamiltonian)
            return expm_hermitian(seg.generator, t - seg.t_start) * cumulative_[k];
        if (times_equal(t, seg.t_end)) return seg.generator * cumulative_[k];
        return cumulative_[k];
    }

private:
    Matrix segment_full(std::size_t k) const {
        const Segment& seg = segments_[k];
        if (seg.kind == Segment::Kind::gate) return seg.generator;
        return expm_hermitian(seg.generator, seg.t_end - seg.t_start);
    }

    std::vector<Segment> segments_;
    std::vector<Matrix> cumulative_;
    Index dim_;
};

/// Observable at time t: x -> U(t)^dag x U(t).
inline Matrix heisenberg(const EvolutionFamily& fam, double t, const Matrix& x) {
    Matrix u = fam.unitary_at(t);
    return u.adjoint() * x * u;
}

/// Inverse of heisenberg: x -> U(t) x U(t)^dag.
inline Matrix heisenberg_inv(const EvolutionFamily& fam, double t, const Matrix& x) {
    Matrix u = fam.unitary_at(t);
    return u * x * u.adjoint();
}

/// Two-time observable map, x -> U(t2)^dag U(t1) x U(t1)^dag U(t2).
/// Composes as interval_map(t2,t3) o interval_map(t1,t2) = interval_map(t1,t3)
/// and reduces to heisenberg at t1 = 0.
inline Matrix interval_map(const EvolutionFamily& fam, double t1, double t2, const Matrix& x) {
    Matrix u1 = fam.unitary_at(t1);
    Matrix u2 = fam.unitary_at(t2);
    Matrix g = u2.adjoint() * u1;
    return g * x * g.adjoint();
}

/// Inverse (and trace dual) of interval_map: x -> U(t1)^dag U(t2) x U(t2)^dag U(t1).
inline Matrix interval_map_inv(const EvolutionFamily& fam, double t1, double t2,
                               const Matrix& x) {
    Matrix u1 = fam.unitary_at(t1);
    Matrix u2 = fam.unitary_at(t2);
    Matrix g = u1.adjoint() * u2;
    return g * x * g.adjoint();
}

/// Forward state propagator from t1 to t2:
/// rho -> G rho G^dag with G = U(t2) U(t1)^dag.
inline Matrix propagate_state(const EvolutionFamily& fam, double t1, double t2,
                              const Matrix& rho) {
    Matrix g = fam.unitary_at(t2) * fam.unitary_at(t1).adjoint();
    return g * rho * g.adjoint();
}

/// Step unitaries U(t_j) U(t_{j-1})^dag for a time grid, with t_0 = 0.
/// Their left-to-right product in reverse order reproduces U(t_n).
inline std::vector<Matrix> interval_unitaries(const EvolutionFamily& fam,
                                              const std::vector<double>& times) {
    std::vector<Matrix> steps;
    steps.reserve(times.size());
    double prev = 0.0;
    for (double t : times) {
        require(t > prev || times_equal(t, 0.0), "times must be increasing and nonnegative");
        steps.push_back(fam.unitary_at(t) * fam.unitary_at(prev).adjoint());
        prev = t;
    }
    return steps;
}

}  // namespace qpt
