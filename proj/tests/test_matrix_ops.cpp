#include <catch2/catch_amalgamated.hpp>

#include "qpt/matrix_ops.hpp"
#include "qpt/random.hpp"

using namespace qpt;

namespace {

// Reference Kronecker product written as the raw four-index formula.
Matrix kron_oracle(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index ia = 0; ia < a.rows(); ++ia)
        for (Index ja = 0; ja < a.cols(); ++ja)
            for (Index ib = 0; ib < b.rows(); ++ib)
                for (Index jb = 0; jb < b.cols(); ++jb)
                    out(ia * b.rows() + ib, ja * b.cols() + jb) = a(ia, ja) * b(ib, jb);
    return out;
}

// Reference partial trace for exactly three factors, keeping one of them.
Matrix ptrace3_keep1(const Matrix& m, Index d0, Index d1, Index d2, int keep) {
    Index dims[3] = {d0, d1, d2};
    Matrix out = Matrix::Zero(dims[keep], dims[keep]);
    for (Index i0 = 0; i0 < d0; ++i0)
        for (Index i1 = 0; i1 < d1; ++i1)
            for (Index i2 = 0; i2 < d2; ++i2)
                for (Index j0 = 0; j0 < d0; ++j0)
                    for (Index j1 = 0; j1 < d1; ++j1)
                        for (Index j2 = 0; j2 < d2; ++j2) {
                            Index i[3] = {i0, i1, i2}, j[3] = {j0, j1, j2};
                            bool diagonal = true;
                            for (int k = 0; k < 3; ++k)
                                if (k != keep && i[k] != j[k]) diagonal = false;
                            if (!diagonal) continue;
                            Index row = (i0 * d1 + i1) * d2 + i2;
                            Index col = (j0 * d1 + j1) * d2 + j2;
                            out(i[keep], j[keep]) += m(row, col);
                        }
    return out;
}

Matrix expm_series(const Matrix& h, double t, int order = 40) {
    Matrix a = Complex(0.0, -t) * h;
    Matrix term = Matrix::Identity(h.rows(), h.cols());
    Matrix sum = term;
    for (int n = 1; n <= order; ++n) {
        term = (term * a / static_cast<double>(n)).eval();
        sum += term;
    }
    return sum;
}

Matrix pauli_x() {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

}  // namespace

TEST_CASE("structural predicates on known matrices") {
    Matrix x = pauli_x();
    CHECK(is_hermitian(x));
    CHECK(is_unitary(x));
    CHECK_FALSE(is_psd(x));
    CHECK_FALSE(is_projector(x));

    Matrix p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    CHECK(is_projector(p));
    CHECK(is_psd(p));
    CHECK_FALSE(is_unitary(p));

    Matrix nonsquare(2, 3);
    nonsquare.setZero();
    CHECK_FALSE(is_hermitian(nonsquare));
}

TEST_CASE("predicate tolerance windows") {
    Matrix h = pauli_z();
    h(0, 1) = Complex(0.0, 1e-9);  // breaks hermiticity at the 1e-9 level
    CHECK_FALSE(is_hermitian(h));
    CHECK_FALSE(is_hermitian(h, 1e-10));
    CHECK(is_hermitian(h, 1e-8));

    Matrix almost_id = Matrix::Identity(3, 3) * (1.0 + 1e-9);
    CHECK_FALSE(is_unitary(almost_id, 1e-10));
    CHECK(is_unitary(almost_id, 1e-7));
}

TEST_CASE("operator norm is the largest singular value") {
    Matrix n(2, 2);
    n << 0, 2, 0, 0;
    CHECK(operator_norm(n) == Catch::Approx(2.0).margin(1e-12));
    Rng rng(11);
    Matrix u = random_unitary(rng, 5);
    CHECK(operator_norm(u) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("tensor product matches the four-index formula") {
    Matrix a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 5, 6, 7;

    Matrix expected(4, 4);
    expected << 0, 5, 0, 10,
                6, 7, 12, 14,
                0, 15, 0, 20,
                18, 21, 24, 28;
    CHECK(max_abs(tensor(a, b) - expected) == 0.0);

    Rng rng(21);
    Matrix g1 = random_matrix(rng, 3, 2);
    Matrix g2 = random_matrix(rng, 2, 4);
    CHECK(max_abs(tensor(g1, g2) - kron_oracle(g1, g2)) < 1e-14);

    Matrix g3 = random_matrix(rng, 2, 2);
    CHECK(max_abs(tensor({g1, g2, g3}) - kron_oracle(kron_oracle(g1, g2), g3)) < 1e-13);
}

TEST_CASE("partial trace agrees with explicit contraction") {
    Rng rng(31);
    Matrix m = random_matrix(rng, 2 * 3 * 2, 2 * 3 * 2);
    std::vector<Index> dims{2, 3, 2};

    for (int keep = 0; keep < 3; ++keep) {
        Matrix got = partial_trace(m, dims, {static_cast<std::size_t>(keep)});
        Matrix want = ptrace3_keep1(m, 2, 3, 2, keep);
        CHECK(max_abs(got - want) < 1e-13);
    }

    // keeping two factors: check via trace-out-one equivalence
    Matrix keep02 = partial_trace(m, dims, {0, 2});
    Matrix direct = Matrix::Zero(4, 4);
    for (Index t = 0; t < 3; ++t)
        for (Index r = 0; r < 4; ++r)
            for (Index c = 0; c < 4; ++c) {
                Index i0 = r / 2, i2 = r % 2, j0 = c / 2, j2 = c % 2;
                direct(r, c) += m((i0 * 3 + t) * 2 + i2, (j0 * 3 + t) * 2 + j2);
            }
    CHECK(max_abs(keep02 - direct) < 1e-13);

    // keep order is canonical regardless of the order passed in
    CHECK(max_abs(partial_trace(m, dims, {2, 0}) - keep02) == 0.0);

    // trace preservation
    Complex full = m.trace();
    Complex reduced = partial_trace(m, dims, {1}).trace();
    CHECK(std::abs(full - reduced) < 1e-12);
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
    CVector bell(4);
    bell << 1, 0, 0, 1;
    bell /= std::sqrt(2.0);
    Matrix rho = bell * bell.adjoint();
    Matrix reduced = partial_trace(rho, {2, 2}, {0});
    CHECK(max_abs(reduced - 0.5 * Matrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("partial trace input validation") {
    Matrix m = Matrix::Identity(4, 4);
    CHECK_THROWS_AS(partial_trace(m, {2, 3}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(m, {2, 2}, {}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(m, {2, 2}, {2}), std::invalid_argument);
}

TEST_CASE("reorder_factors permutes tensor factors") {
    Rng rng(41);
    Matrix a = random_matrix(rng, 2, 2);
    Matrix b = random_matrix(rng, 3, 3);
    Matrix c = random_matrix(rng, 2, 2);

    Matrix ab = tensor(a, b);
    CHECK(max_abs(reorder_factors(ab, {2, 3}, {1, 0}) - tensor(b, a)) < 1e-13);

    Matrix abc = tensor({a, b, c});
    Matrix cab = tensor({c, a, b});
    CHECK(max_abs(reorder_factors(abc, {2, 3, 2}, {2, 0, 1}) - cab) < 1e-13);

    CHECK_THROWS_AS(reorder_factors(abc, {2, 3, 2}, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("expm_hermitian matches closed forms and the power series") {
    Matrix x = pauli_x();
    // exp(-i (pi/2) X) = -i X
    Matrix want(2, 2);
    want << 0, Complex(0, -1), Complex(0, -1), 0;
    CHECK(max_abs(expm_hermitian(x, M_PI / 2) - want) < 1e-12);

    CHECK(max_abs(expm_hermitian(x, 0.0) - Matrix::Identity(2, 2)) < 1e-14);

    Rng rng(51);
    Matrix h = random_hermitian(rng, 4);
    Matrix u = expm_hermitian(h, 0.7);
    CHECK(is_unitary(u, 1e-12));
    CHECK(max_abs(u - expm_series(h, 0.7)) < 1e-10);

    Matrix bad = random_matrix(rng, 3, 3);
    bad(0, 1) += Complex(0.5, 0.5);
    if (is_hermitian(bad)) bad(0, 1) += 1.0;
    CHECK_THROWS_AS(expm_hermitian(bad, 1.0), std::invalid_argument);
}

TEST_CASE("spectral decomposition splits and merges eigenspaces") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 1.0;
    SpectralDecomposition dec = spectral(d);
    REQUIRE(dec.size() == 2);
    CHECK(dec.eigenvalues[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(dec.eigenvalues[1] == Catch::Approx(3.0).margin(1e-12));
    CHECK(dec.projectors[0](1, 1) == Complex(1.0));
    CHECK(dec.projectors[0](2, 2) == Complex(1.0));
    CHECK(std::abs(dec.projectors[0].trace() - Complex(2.0)) < 1e-12);
    CHECK(std::abs(dec.projectors[1].trace() - Complex(1.0)) < 1e-12);

    Rng rng(61);
    Matrix h = random_hermitian(rng, 5);
    SpectralDecomposition full = spectral(h);
    CHECK(max_abs(full.reconstruct() - h) < 1e-12);
    Matrix psum = Matrix::Zero(5, 5);
    for (std::size_t k = 0; k < full.size(); ++k) {
        CHECK(is_projector(full.projectors[k], 1e-10));
        psum += full.projectors[k];
        for (std::size_t l = 0; l < k; ++l)
            CHECK(max_abs(full.projectors[k] * full.projectors[l]) < 1e-11);
    }
    CHECK(max_abs(psum - Matrix::Identity(5, 5)) < 1e-12);
}

TEST_CASE("spectral merge tolerance is independent of the structural one") {
    Matrix near = Matrix::Zero(2, 2);
    near(0, 0) = 1.0;
    near(1, 1) = 1.0 + 1e-9;  // within merge tol 1e-8, far above structural 1e-10
    SpectralDecomposition merged = spectral(near);
    CHECK(merged.size() == 1);
    SpectralDecomposition split = spectral(near, default_tol, 1e-12);
    CHECK(split.size() == 2);
}

TEST_CASE("Choi matrix of the identity channel") {
    std::vector<Matrix> kraus{Matrix::Identity(2, 2)};
    Matrix choi = choi_of_operation(kraus, 2);
    Matrix want = Matrix::Zero(4, 4);
    want(0, 0) = want(0, 3) = want(3, 0) = want(3, 3) = 1.0;
    CHECK(max_abs(choi - want) < 1e-14);
}

TEST_CASE("Choi matrix matches matrix-unit assembly and is PSD") {
    Rng rng(71);
    Index d = 3;
    std::vector<Matrix> kraus = random_kraus_tp(rng, d, 2);

    // oracle: C = sum_{ij} O(E_ij) (x) E_ij built term by term
    Matrix want = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            Matrix eij = Matrix::Zero(d, d);
            eij(i, j) = 1.0;
            Matrix image = Matrix::Zero(d, d);
            for (const Matrix& k : kraus) image += k * eij * k.adjoint();
            want += kron_oracle(image, eij);
        }
    Matrix choi = choi_of_operation(kraus, d);
    CHECK(max_abs(choi - want) < 1e-12);
    CHECK(is_psd(choi, 1e-10));
    // trace-preserving family: tr C = d
    CHECK(std::abs(choi.trace() - Complex(static_cast<double>(d))) < 1e-10);

    std::vector<Matrix> contractive = random_kraus_contractive(rng, d, 2);
    Matrix choi2 = choi_of_operation(contractive, d);
    CHECK(is_psd(choi2, 1e-10));
    CHECK(choi2.trace().real() < static_cast<double>(d) + 1e-12);
}

TEST_CASE("random generator sanity") {
    Rng rng(81);
    Matrix u = random_unitary(rng, 4);
    CHECK(is_unitary(u, 1e-12));
    Matrix rho = random_density(rng, 4);
    CHECK(is_psd(rho, 1e-12));
    CHECK(std::abs(rho.trace() - Complex(1.0)) < 1e-12);
    Matrix p = random_projector(rng, 4, 2);
    CHECK(is_projector(p, 1e-12));
    CHECK(std::abs(p.trace() - Complex(2.0)) < 1e-10);

    std::vector<Matrix> kraus = random_kraus_tp(rng, 3, 4);
    Matrix sum = Matrix::Zero(3, 3);
    for (const Matrix& k : kraus) sum += k.adjoint() * k;
    CHECK(max_abs(sum - Matrix::Identity(3, 3)) < 1e-12);

    // determinism under a fixed seed
    Rng r1(123), r2(123);
    CHECK(max_abs(random_matrix(r1, 3, 3) - random_matrix(r2, 3, 3)) == 0.0);
}
