#include <catch2/catch_amalgamated.hpp>

#include "qpt/evolution.hpp"
#include "qpt/multitime.hpp"
#include "qpt/process_tensor.hpp"

using namespace qpt;

namespace {

Matrix hadamard() {
    Matrix h(2, 2);
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

Matrix matrix_unit(Index d, Index i, Index j) {
    Matrix e = Matrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

ProcessTensorSpec no_env_spec(const std::vector<Matrix>& unitaries, const Matrix& rho_s) {
    ProcessTensorSpec spec;
    spec.d_s = rho_s.rows();
    spec.d_e = 1;
    spec.rho_se = rho_s;
    for (std::size_t j = 0; j < unitaries.size(); ++j) {
        spec.times.push_back(static_cast<double>(j + 1));
        spec.interval_unitaries.push_back(unitaries[j]);
    }
    return spec;
}

}  // namespace

TEST_CASE("no-environment evaluation reduces to Kraus chains") {
    Rng rng(401);
    Matrix rho = random_density(rng, 2);
    Matrix u1 = random_unitary(rng, 2);
    Matrix u2 = random_unitary(rng, 2);
    QuantumOperation op1 = random_operation(rng, 2, 2, false);
    QuantumOperation op2 = random_operation(rng, 2, 2, true);

    ProcessTensorSpec spec = no_env_spec({u1, u2}, rho);
    Matrix got = evaluate(spec, OperationSequence::elementary({op1, op2}));

    Matrix want = kraus_apply(op2.kraus, u2 * kraus_apply(op1.kraus, u1 * rho * u1.adjoint()) *
                                             u2.adjoint());
    CHECK(max_abs(got - want) < 1e-13);
}

TEST_CASE("environment evaluation matches a hand-built joint computation") {
    Rng rng(411);
    Index d_s = 2, d_e = 2;
    ProcessTensorSpec spec = sample_spec(rng, d_s, d_e, 2);
    QuantumOperation op1 = random_operation(rng, d_s, 2, false);
    QuantumOperation op2 = random_operation(rng, d_s, 2, true);

    Matrix sigma = spec.rho_se;
    Matrix id_e = Matrix::Identity(d_e, d_e);
    for (std::size_t j = 0; j < 2; ++j) {
        sigma = (spec.interval_unitaries[j] * sigma * spec.interval_unitaries[j].adjoint()).eval();
        Matrix next = Matrix::Zero(sigma.rows(), sigma.cols());
        const QuantumOperation& op = (j == 0) ? op1 : op2;
        for (const Matrix& k : op.kraus) {
            Matrix kf = tensor(k, id_e);
            next += kf * sigma * kf.adjoint();
        }
        sigma = next;
    }
    Matrix want = partial_trace(sigma, {d_s, d_e}, {0});

    Matrix got = evaluate(spec, OperationSequence::elementary({op1, op2}));
    CHECK(max_abs(got - want) < 1e-13);
}

TEST_CASE("evaluation is linear in the sequence weights") {
    Rng rng(421);
    ProcessTensorSpec spec = sample_spec(rng, 2, 2, 2);
    std::vector<QuantumOperation> a{random_operation(rng, 2, 2, true),
                                    random_operation(rng, 2, 2, true)};
    std::vector<QuantumOperation> b{random_operation(rng, 2, 2, false),
                                    random_operation(rng, 2, 2, false)};

    OperationSequence combined{{{0.3, a}, {1.7, b}}};
    Matrix got = evaluate(spec, combined);
    Matrix want = 0.3 * evaluate(spec, OperationSequence::elementary(a)) +
                  1.7 * evaluate(spec, OperationSequence::elementary(b));
    CHECK(max_abs(got - want) < 1e-13);

    OperationSequence negative{{{-0.5, a}}};
    CHECK_THROWS_AS(evaluate(spec, negative), std::invalid_argument);
}

TEST_CASE("projective slot probabilities agree with the dilated two-picture route") {
    Rng rng(431);
    Index d_s = 2, d_e = 2;
    for (int trial = 0; trial < 5; ++trial) {
        ProcessTensorSpec spec = sample_spec(rng, d_s, d_e, 3);

        // same physics as a gate-segment evolution family on the joint space
        std::vector<Segment> segments;
        for (std::size_t j = 0; j < 3; ++j)
            segments.push_back(Segment{static_cast<double>(j), static_cast<double>(j + 1),
                                       Segment::Kind::gate, spec.interval_unitaries[j]});
        EvolutionFamily joint(segments);

        Matrix h = random_hermitian(rng, d_s);
        QuantumInstrument instrument = projective_instrument(h);
        std::vector<std::string> labels;
        for (const auto& [label, op] : instrument.outcomes) labels.push_back(label);

        std::vector<std::string> chosen;
        std::vector<Matrix> joint_projectors;
        for (std::size_t j = 0; j < 3; ++j) {
            const std::string& pick = labels[rng.pick(labels.size())];
            chosen.push_back(pick);
            joint_projectors.push_back(
                tensor(instrument.outcomes[pick].kraus[0], Matrix::Identity(d_e, d_e)));
        }

        double via_pt = outcome_probability(spec, {instrument, instrument, instrument}, chosen);
        double via_seq = sequential_probability(joint, DensityOperator(spec.rho_se),
                                                TimeTuple(spec.times), joint_projectors);
        CHECK(std::abs(via_pt - via_seq) < 1e-12);
    }
}

TEST_CASE("conditional states renormalize and reject impossible outcomes") {
    Matrix rho_plus(2, 2);
    rho_plus << 0.5, 0.5, 0.5, 0.5;
    ProcessTensorSpec spec = no_env_spec({Matrix::Identity(2, 2)}, rho_plus);

    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    QuantumInstrument inst = projective_instrument(z);

    CHECK(outcome_probability(spec, {inst}, {"1"}) == Catch::Approx(0.5).margin(1e-12));
    Matrix cond = conditional_state(spec, {inst}, {"1"});
    CHECK(max_abs(cond - matrix_unit(2, 0, 0)) < 1e-12);

    ProcessTensorSpec basis_spec = no_env_spec({Matrix::Identity(2, 2)}, matrix_unit(2, 0, 0));
    CHECK_THROWS_AS(conditional_state(basis_spec, {inst}, {"-1"}), ZeroProbabilityError);
    CHECK_THROWS_AS(conditional_state(basis_spec, {inst}, {"nope"}), std::invalid_argument);
}

TEST_CASE("single-slot Choi state has the pinned closed form") {
    Rng rng(441);
    Matrix rho = random_density(rng, 2);
    Matrix u = hadamard();
    ProcessTensorSpec spec = no_env_spec({u}, rho);

    ChoiState choi = choi_state(spec);
    REQUIRE(choi.matrix.rows() == 8);
    REQUIRE(choi.n_slots == 1);

    // legs [F, I, O]: sum_ij |i><j| (x) (U rho U^dag) (x) |i><j|
    Matrix evolved = u * rho * u.adjoint();
    Matrix want = Matrix::Zero(8, 8);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            want += tensor({matrix_unit(2, i, j), evolved, matrix_unit(2, i, j)});
    CHECK(max_abs(choi.matrix - want) < 1e-13);
}

TEST_CASE("Choi states are positive with trace d_s^n") {
    Rng rng(451);
    for (std::size_t n = 1; n <= 3; ++n) {
        ProcessTensorSpec spec = sample_spec(rng, 2, 2, n);
        ChoiState choi = choi_state(spec);
        CHECK(choi.matrix.rows() == static_cast<Index>(1) << (2 * n + 1));
        CHECK(is_hermitian(choi.matrix, 1e-10));
        CHECK(min_eigenvalue(choi.matrix) >= -1e-10);
        CHECK(std::abs(choi.matrix.trace() - Complex(std::pow(2.0, n))) < 1e-9);
    }
}

TEST_CASE("contraction against the Choi state reproduces evaluation") {
    Rng rng(461);
    for (Index d_e : {1, 2}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            ProcessTensorSpec spec = sample_spec(rng, 2, d_e, n);
            ChoiState choi = choi_state(spec);
            for (int probe = 0; probe < 3; ++probe) {
                std::vector<QuantumOperation> ops;
                for (std::size_t j = 0; j < n; ++j) {
                    int kind = static_cast<int>(rng.pick(3));
                    if (kind == 0)
                        ops.push_back(random_operation(rng, 2, 2, true));
                    else if (kind == 1)
                        ops.push_back(random_operation(rng, 2, 2, false));
                    else
                        ops.push_back(QuantumOperation{{random_projector(rng, 2, 1)}, ""});
                }
                Complex via_choi = contract_with_operations(choi, ops);
                Complex via_eval =
                    evaluate(spec, OperationSequence::elementary(ops)).trace();
                CHECK(std::abs(via_choi - via_eval) < 1e-8);
            }
        }
    }
}

TEST_CASE("dropping a slot equals plugging in the identity") {
    Rng rng(471);
    ProcessTensorSpec spec = sample_spec(rng, 2, 2, 3);
    for (std::size_t j = 0; j < 2; ++j) {
        std::vector<QuantumOperation> ops{random_operation(rng, 2, 2, true),
                                          random_operation(rng, 2, 2, true),
                                          random_operation(rng, 2, 2, true)};
        ops[j] = identity_operation(2);
        Matrix full = evaluate(spec, OperationSequence::elementary(ops));

        std::vector<QuantumOperation> rest;
        for (std::size_t k = 0; k < 3; ++k)
            if (k != j) rest.push_back(ops[k]);
        Matrix reduced = evaluate(drop_slot(spec, j), OperationSequence::elementary(rest));
        CHECK(max_abs(full - reduced) < 1e-12);
    }
    CHECK_THROWS_AS(drop_slot(spec, 2), std::invalid_argument);
}

TEST_CASE("audit passes on honest processes") {
    Rng rng(481);
    for (Index d_e : {1, 2}) {
        ProcessTensorSpec spec = sample_spec(rng, 2, d_e, 3);
        AuditReport report = audit_properties(spec, 999);
        CHECK(report.ok(1e-8));
        CHECK(report.trace_bound_margin <= 1e-10);
        CHECK(report.choi_min_eigenvalue >= -1e-10);
        CHECK(report.containment_deviation <= 1e-10);
    }
}

TEST_CASE("audit flags a trace-inflating interval") {
    Rng rng(491);
    ProcessTensorSpec spec = sample_spec(rng, 2, 2, 2);
    spec.interval_unitaries[0] *= 1.2;

    CHECK_FALSE(validate_spec(spec).ok());
    CHECK(spec_shape_issues(spec).ok());

    AuditReport report = audit_properties(spec, 999);
    CHECK_FALSE(report.ok(1e-8));
    CHECK(report.trace_bound_margin > 0.4);  // 1.2^2 - 1 for trace-preserving probes
}

TEST_CASE("audit flags an indefinite initial state") {
    ProcessTensorSpec spec;
    spec.d_s = 2;
    spec.d_e = 1;
    spec.rho_se = Matrix::Zero(2, 2);
    spec.rho_se(0, 0) = 1.3;
    spec.rho_se(1, 1) = -0.3;
    spec.times = {1.0};
    spec.interval_unitaries = {Matrix::Identity(2, 2)};

    CHECK_FALSE(validate_spec(spec).ok());
    CHECK(spec_shape_issues(spec).ok());

    AuditReport report = audit_properties(spec, 999);
    CHECK(report.choi_min_eigenvalue < -0.1);
    CHECK_FALSE(report.ok(1e-8));
}

TEST_CASE("spec validation enumerates defects") {
    Rng rng(501);
    ProcessTensorSpec good = sample_spec(rng, 2, 2, 2);
    CHECK(validate_spec(good).ok());

    ProcessTensorSpec bad = good;
    bad.times = {2.0, 1.0};
    CHECK_FALSE(spec_shape_issues(bad).ok());

    bad = good;
    bad.interval_unitaries.pop_back();
    CHECK_FALSE(spec_shape_issues(bad).ok());

    bad = good;
    bad.rho_se = Matrix::Identity(3, 3);
    CHECK_FALSE(spec_shape_issues(bad).ok());

    bad = good;
    bad.rho_se = 2.0 * bad.rho_se;
    CHECK(spec_shape_issues(bad).ok());
    CHECK_FALSE(validate_spec(bad).ok());
    CHECK_THROWS_AS(evaluate(bad, OperationSequence::elementary(
                                      {identity_operation(2), identity_operation(2)})),
                    std::invalid_argument);
}

TEST_CASE("oversized Choi requests hit the dimension cap") {
    Rng rng(511);
    ProcessTensorSpec spec = sample_spec(rng, 2, 2, 4);  // register would be 2 * 2^9
    CHECK_THROWS_AS(choi_state(spec), DimensionCapError);
    CHECK_NOTHROW(choi_state(spec, 2048));
}
