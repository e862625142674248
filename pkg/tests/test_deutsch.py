import numpy as np
import pytest

from deutschctc.deutsch import (
    DensityMatrix,
    DimensionError,
    InteractionUnitary,
    InvalidStateError,
    Superoperator,
    apply_ctc_channel,
    build_superoperator_mixed,
    build_superoperator_pure,
    consistency_residual,
    cr_output,
    extract_blocks,
    gauge_reduce,
    householder_completion,
)
from deutschctc.linalg import eigenvalues, kron, unvec_rowmajor, vec_rowmajor
from deutschctc.randomized import random_density_matrix, random_pure_state, random_unitary
from deutschctc.scenarios import build_epr_interaction, dejonghe_M, dejonghe_unitary, gate, ket

from helpers import random_instance, random_instances
from oracles import channel_loops, explicit_m_single_qubit

SWAP = InteractionUnitary(gate("exchange"), 2, 2)
KET0 = DensityMatrix.basis(2, 0)


# -- types -------------------------------------------------------------------


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(InvalidStateError, match="Hermitian"):
        DensityMatrix([[0.5, 1], [0, 0.5]])
    with pytest.raises(InvalidStateError, match="positive"):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError, match="norm"):
        DensityMatrix.pure([1, 1])


def test_density_matrix_is_immutable():
    rho = DensityMatrix.maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1


def test_interaction_unitary_validation():
    with pytest.raises(InvalidStateError, match="unitary"):
        InteractionUnitary(2 * np.eye(4), 2)
    with pytest.raises(DimensionError):
        InteractionUnitary(np.eye(4), 4)


# -- blocks ------------------------------------------------------------------


def test_blocks_of_identity():
    u = InteractionUnitary(np.eye(4), 2)
    assert np.array_equal(u.block(1, 1), np.eye(2))
    assert np.array_equal(u.block(2, 2), np.eye(2))
    assert not u.block(1, 2).any() and not u.block(2, 1).any()


def test_blocks_of_swap():
    # <i| SWAP |j> on the first factor is |j><i| on the second
    for i in (1, 2):
        for j in (1, 2):
            expected = np.outer(np.eye(2)[j - 1], np.eye(2)[i - 1])
            assert np.array_equal(SWAP.block(i, j), expected)


def test_blocks_of_dejonghe_unitary():
    u = dejonghe_unitary()
    assert np.array_equal(u.block(1, 1), np.diag([0, 1]))
    assert np.array_equal(u.block(3, 1), np.diag([1, 0]))
    assert not u.block(2, 1).any() and not u.block(4, 1).any()


def test_blocks_reassemble(rng):
    u, _, _ = random_instance(rng, 4)
    b = extract_blocks(u)
    assert np.array_equal(np.block([[b[i, j] for j in range(4)] for i in range(4)]), u.u)
    with pytest.raises(IndexError):
        u.block(0, 1)


# -- gauge reduction ---------------------------------------------------------


def test_gauge_reduce_ket0_is_identity_gauge(rng):
    u, _, _ = random_instance(rng)
    assert np.array_equal(gauge_reduce(u, [1, 0]).u, u.u)


def test_householder_completion_of_plus_is_hadamard():
    v = householder_completion(np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(v, gate("hadamard"), atol=1e-15)


def test_gauge_reduce_plus_state_channel(rng):
    u, _, sigma = random_instance(rng)
    plus = np.array([1, 1]) / np.sqrt(2)
    ut = gauge_reduce(u, plus)
    lhs = apply_ctc_channel(ut, KET0, sigma).mat
    rhs = channel_loops(u.u, np.outer(plus, plus), sigma, 2, 2)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_gauge_reduce_rejects_unnormalized(rng):
    u, _, _ = random_instance(rng)
    with pytest.raises(InvalidStateError):
        gauge_reduce(u, [1, 1])


def test_gauge_reduce_channel_equality_property():
    for u, psi, sigma in random_instances(100, seed=77):
        ut = gauge_reduce(u, psi)
        zero = DensityMatrix.basis(u.dim_cr, 0)
        lhs = apply_ctc_channel(ut, zero, sigma).mat
        rhs = apply_ctc_channel(u, DensityMatrix.pure(psi), sigma).mat
        assert np.abs(lhs - rhs).max() <= 1e-12
        lhs = cr_output(ut, zero, sigma).mat
        # CR outputs differ by the local V on the input side only, not on the output side
        rhs = cr_output(u, DensityMatrix.pure(psi), sigma).mat
        assert np.abs(lhs - rhs).max() <= 1e-12


# -- superoperator builders --------------------------------------------------


def test_pure_builder_identity():
    m = build_superoperator_pure(InteractionUnitary(np.eye(4), 2))
    assert np.array_equal(m.m, np.eye(4))


def test_pure_builder_swap():
    m = build_superoperator_pure(SWAP).m
    e = np.eye(4)
    assert np.array_equal(m @ e[0], e[0])
    assert np.array_equal(m @ e[3], e[0])
    assert not (m @ e[1]).any() and not (m @ e[2]).any()
    assert np.allclose(eigenvalues(m).values, [1, 0, 0, 0])


def test_pure_builder_dejonghe_is_mb():
    m = build_superoperator_pure(dejonghe_unitary())
    assert np.abs(m.m - dejonghe_M("B").m).max() <= 1e-12


def test_pure_builder_matches_explicit_formula(rng):
    for _ in range(100):
        u = random_unitary(4, rng)
        m = build_superoperator_pure(InteractionUnitary(u, 2)).m
        assert np.abs(m - explicit_m_single_qubit(u)).max() <= 1e-12


def test_mixed_builder_reduces_to_pure(rng):
    for dcr in (2, 4):
        u, _, _ = random_instance(rng, dcr)
        pure = build_superoperator_pure(u).m
        mixed = build_superoperator_mixed(u, DensityMatrix.basis(dcr, 0)).m
        assert np.abs(pure - mixed).max() <= 1e-14


def test_mixed_builder_identity_unitary(rng):
    rho = random_density_matrix(2, rng)
    m = build_superoperator_mixed(InteractionUnitary(np.eye(4), 2), rho)
    assert np.allclose(m.m, np.eye(4), atol=1e-15)


def test_mixed_builder_against_direct_channel(rng):
    for _ in range(50):
        for dcr in (2, 4):
            u = InteractionUnitary(random_unitary(2 * dcr, rng), dcr)
            rho = random_density_matrix(dcr, rng)
            sigma = random_density_matrix(2, rng)
            m = build_superoperator_mixed(u, rho)
            direct = channel_loops(u.u, rho, sigma, dcr, 2)
            assert np.abs(unvec_rowmajor(m.m @ vec_rowmajor(sigma)) - direct).max() <= 1e-12


def test_mixed_builder_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_superoperator_mixed(SWAP, np.eye(4) / 4)


def test_larger_ctc_register(rng):
    u = InteractionUnitary(random_unitary(6, rng), 2, 3)
    rho = random_density_matrix(2, rng)
    sigma = random_density_matrix(3, rng)
    m = build_superoperator_mixed(u, rho)
    assert m.m.shape == (9, 9)
    assert np.allclose(m.apply(sigma), channel_loops(u.u, rho, sigma, 2, 3), atol=1e-13)


def test_structural_invariants_random(rng):
    for _ in range(100):
        dcr = int(rng.choice([2, 4]))
        u = InteractionUnitary(random_unitary(2 * dcr, rng), dcr)
        for m in (build_superoperator_pure(u), build_superoperator_mixed(u, random_density_matrix(dcr, rng))):
            assert m.trace_preservation_error() <= 1e-10
            assert m.hermiticity_preservation_error() <= 1e-10


def test_lambda_one_always_present():
    for u, psi, _ in random_instances(100, seed=5):
        m = build_superoperator_pure(gauge_reduce(u, psi))
        vals = eigenvalues(m.m).values
        assert np.min(np.abs(vals - 1)) <= 1e-8


# -- channel application -----------------------------------------------------


def test_channel_identity_unitary(rng):
    sigma = random_density_matrix(2, rng)
    u = InteractionUnitary(np.eye(4), 2)
    assert np.allclose(apply_ctc_channel(u, KET0, sigma).mat, sigma)
    assert np.allclose(cr_output(u, KET0, sigma).mat, KET0.mat)
    assert consistency_residual(u, KET0, sigma) <= 1e-15


def test_channel_epr_is_constant(rng):
    u = build_epr_interaction()
    rho00 = DensityMatrix.pure(ket("00"))
    for _ in range(5):
        sigma = random_density_matrix(2, rng)
        assert np.allclose(apply_ctc_channel(u, rho00, sigma).mat, np.eye(2) / 2, atol=1e-15)


def test_channel_swap():
    sigma = DensityMatrix(np.diag([0.3, 0.7]))
    assert np.allclose(apply_ctc_channel(SWAP, KET0, sigma).mat, np.diag([1, 0]))
    assert np.allclose(cr_output(SWAP, KET0, sigma).mat, np.diag([0.3, 0.7]))


def test_cr_output_epr():
    out = cr_output(build_epr_interaction(), DensityMatrix.pure(ket("00")), np.eye(2) / 2)
    assert np.abs(out.mat - np.eye(4) / 4).max() <= 1e-15


def test_consistency_residual_epr():
    u, rho00 = build_epr_interaction(), DensityMatrix.pure(ket("00"))
    assert consistency_residual(u, rho00, np.eye(2) / 2) <= 1e-12
    assert consistency_residual(u, rho00, np.diag([1.0, 0])) == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_channel_output_is_density_matrix(rng):
    for _ in range(50):
        dcr = int(rng.choice([2, 4]))
        u = InteractionUnitary(random_unitary(2 * dcr, rng), dcr)
        out = apply_ctc_channel(u, random_density_matrix(dcr, rng, rank=1), random_density_matrix(2, rng))
        assert isinstance(out, DensityMatrix)


def test_channel_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_ctc_channel(SWAP, np.eye(4) / 4, np.eye(2) / 2)
    with pytest.raises(DimensionError):
        cr_output(SWAP, KET0, np.eye(3) / 3)


def test_oracle_equivalence_pure_builder():
    for u, psi, sigma in random_instances(100, seed=9):
        m = build_superoperator_pure(gauge_reduce(u, psi))
        direct = channel_loops(u.u, np.outer(psi, psi.conj()), sigma, u.dim_cr, 2)
        assert np.abs(m.apply(sigma) - direct).max() <= 1e-12


def test_superoperator_shape_check():
    with pytest.raises(DimensionError):
        Superoperator(np.eye(3), 2)


def test_kron_convention_in_superoperator(rng):
    # M acts as sigma -> sum_i A_i1 sigma A_i1^dagger
    u, _, sigma = random_instance(rng)
    a = [u.block(i, 1) for i in (1, 2)]
    expected = sum(x @ sigma @ x.conj().T for x in a)
    assert np.allclose(build_superoperator_pure(u).apply(sigma), expected)
    assert np.allclose(kron(a[0], a[0].conj()) @ vec_rowmajor(sigma), vec_rowmajor(a[0] @ sigma @ a[0].conj().T))
