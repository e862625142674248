import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deutschctc.deutsch import (
    DensityMatrix,
    InteractionUnitary,
    Superoperator,
    build_superoperator_pure,
    gauge_reduce,
)
from deutschctc.fixed_point import SelectionRule
from deutschctc.linalg import eigenvalues, kron
from deutschctc.scenarios import (
    build_epr_interaction,
    dejonghe_M,
    dejonghe_unitary,
    epr_preparation,
    gate,
    ket,
    population_eigenvalue,
    run_dejonghe,
    run_epr_scenario,
    solve,
    sweep_epsilon,
)

GRID = (1.0, 0.75, 0.5, 0.25, 0.1, 0.01, 0.001)


# -- gates ----------------------------------------------------------------------


def test_gate_involutions():
    for name, d in (("exchange", 4), ("hadamard", 2), ("cnot", 4)):
        g = gate(name)
        assert np.allclose(g @ g, np.eye(d), atol=1e-15)


def test_cnot_truth_table():
    assert np.array_equal(gate("cnot") @ ket("10"), ket("11"))
    assert np.array_equal(gate("cnot") @ ket("01"), ket("01"))


def test_identity_and_unknown_gate():
    assert np.array_equal(gate("identity", 3), np.eye(3))
    with pytest.raises(ValueError):
        gate("toffoli")


# -- EPR --------------------------------------------------------------------------


def test_epr_preparation_makes_bell_pair():
    out = epr_preparation() @ ket("000")
    assert np.allclose(out, (ket("000") + ket("110")) / np.sqrt(2), atol=1e-15)


def test_epr_interaction_is_unitary():
    u = build_epr_interaction().u
    assert np.abs(u @ u.conj().T - np.eye(8)).max() <= 1e-12


def test_run_epr_scenario():
    rep = run_epr_scenario()
    assert np.allclose(rep.spectrum.values, [1, 0, 0, 0], atol=1e-9)
    assert rep.fixed_subspace_dim == 1
    assert not rep.fixed_set.degenerate
    assert np.abs(rep.selected_ctc.mat - np.eye(2) / 2).max() <= 1e-10
    assert np.abs(rep.cr_output.mat - np.eye(4) / 4).max() <= 1e-10
    assert rep.entanglement.concurrence <= 1e-10
    assert rep.entanglement.is_product
    assert rep.entanglement.entropy_nats == pytest.approx(2 * np.log(2), abs=1e-12)
    assert rep.residual <= 1e-9


def test_epr_gauge_invariance():
    # the Bell pair as CR input with only the exchange acting is the same problem in another gauge
    bell = (ket("00") + ket("11")) / np.sqrt(2)
    swap_only = InteractionUnitary(kron(gate("identity", 2), gate("exchange")), 4, 2)
    ref = run_epr_scenario()
    direct = solve(swap_only, DensityMatrix.pure(bell), scenario_id="epr")
    reduced = build_superoperator_pure(gauge_reduce(swap_only, bell))
    assert np.abs(reduced.m - ref.superoperator.m).max() <= 1e-12
    assert np.abs(direct.selected_ctc.mat - ref.selected_ctc.mat).max() <= 1e-12
    assert np.abs(direct.cr_output.mat - ref.cr_output.mat).max() <= 1e-12


# -- DeJonghe constructions ---------------------------------------------------------


def test_dejonghe_unitary_is_involution():
    u = dejonghe_unitary().u
    assert np.array_equal(u @ u, np.eye(8))
    assert np.abs(u @ u.conj().T - np.eye(8)).max() <= 1e-15


def test_dejonghe_unitary_action():
    u = dejonghe_unitary().u
    assert np.array_equal(u @ ket("010"), ket("011"))
    assert np.array_equal(u @ ket("000"), ket("100"))
    assert np.array_equal(u @ ket("101"), ket("110"))
    assert np.array_equal(u @ ket("001"), ket("001"))
    assert np.array_equal(u @ ket("111"), ket("111"))


def test_dejonghe_unitary_with_ket00_gives_mb():
    m = build_superoperator_pure(dejonghe_unitary()).m
    assert np.abs(m - dejonghe_M("B").m).max() <= 1e-12


def test_dejonghe_m_literals():
    assert np.array_equal(dejonghe_M("B", 0.3).m, np.diag([1, 0, 0, 1]))
    assert np.array_equal(dejonghe_M("A", 0.0).m, dejonghe_M("B").m)
    vals = sorted(eigenvalues(dejonghe_M("C", 0.25).m).values.real, reverse=True)
    assert np.allclose(vals, [1, 0.75, 0.4330127018922193, 0.4330127018922193], atol=1e-12)


def test_dejonghe_m_rejects_bad_input():
    with pytest.raises(ValueError):
        dejonghe_M("A", 1.5)
    with pytest.raises(ValueError):
        dejonghe_M("D", 0.1)


@pytest.mark.parametrize("eps", GRID)
def test_dejonghe_spectra_closed_forms(eps):
    a = np.sort(eigenvalues(dejonghe_M("A", eps).m).values.real)
    assert np.allclose(a, np.sort([1, 1 - 2 * eps, -eps, eps]), atol=1e-9)
    s = np.sqrt(eps * (1 - eps))
    c = np.sort(eigenvalues(dejonghe_M("C", eps).m).values.real)
    assert np.allclose(c, np.sort([1, 1 - eps, s, s]), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1))
def test_dejonghe_m_invariants(eps):
    for v in "ABC":
        m = dejonghe_M(v, eps)
        assert m.trace_preservation_error() <= 1e-10
        assert m.hermiticity_preservation_error() <= 1e-10


def test_population_eigenvalue():
    assert population_eigenvalue(dejonghe_M("A", 0.1)) == pytest.approx(0.8, abs=1e-15)
    assert population_eigenvalue(dejonghe_M("C", 0.1)) == pytest.approx(0.9, abs=1e-15)
    with pytest.raises(ValueError):
        population_eigenvalue(Superoperator(np.eye(4)[[1, 0, 2, 3]], 2))


# -- DeJonghe solutions ----------------------------------------------------------------


@pytest.mark.parametrize("eps", GRID)
def test_run_dejonghe_solutions(eps):
    a = run_dejonghe("A", eps)
    c = run_dejonghe("C", eps)
    assert np.abs(a.selected_ctc.mat - np.eye(2) / 2).max() <= 1e-10
    assert np.abs(c.selected_ctc.mat - np.diag([1, 0])).max() <= 1e-10
    assert a.cr_output is None and c.cr_output is None
    assert a.residual <= 1e-9 and c.residual <= 1e-9


def test_run_dejonghe_b_family():
    rep = run_dejonghe("B", 0.1)
    assert rep.fixed_subspace_dim == 2 and rep.fixed_set.subspace_dim == 1
    assert np.abs(rep.selected_ctc.mat - np.eye(2) / 2).max() <= 1e-10
    top = run_dejonghe("B", 0.1, SelectionRule.given(1.0))
    assert np.abs(top.selected_ctc.mat - np.diag([1, 0])).max() <= 1e-8
    # CR output for |00> with sigma = diag(beta, 1-beta) keeps the CR in |00><00| for beta = 1
    assert top.cr_output is not None and top.residual <= 1e-9


def test_run_dejonghe_rejects_zero_and_range():
    with pytest.raises(ValueError, match="sweep"):
        run_dejonghe("A", 0.0)
    with pytest.raises(ValueError):
        run_dejonghe("C", 1.5)


# -- sweep ------------------------------------------------------------------------------


def test_sweep_discontinuity_and_limits():
    res = sweep_epsilon([0.1, 0.01, 0.001])
    assert res.discontinuity_metric == pytest.approx((0.5, 0.5, 0.5), abs=1e-10)
    dists = [r.m_distance_ab for r in res.rows]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    for r in res.rows:
        assert r.m_distance_ab == pytest.approx(np.sqrt(6) * r.epsilon, abs=1e-12)
        assert r.lambda2_a == pytest.approx(1 - 2 * r.epsilon, abs=1e-12)
        assert r.lambda2_c == pytest.approx(1 - r.epsilon, abs=1e-12)


def test_sweep_rejects_bad_lists():
    with pytest.raises(ValueError):
        sweep_epsilon([])
    with pytest.raises(ValueError):
        sweep_epsilon([0.01, 0.1])
    with pytest.raises(ValueError):
        sweep_epsilon([0.1, 0.1])
    with pytest.raises(ValueError):
        sweep_epsilon([0.1, 0.0])


def test_sweep_parallel_matches_sequential():
    eps = [0.5, 0.25, 0.1, 0.05, 0.01, 0.001]
    seq = sweep_epsilon(eps)
    par = sweep_epsilon(eps, workers=4)
    assert par.epsilons == seq.epsilons
    for a, b in zip(seq.rows, par.rows):
        assert a.epsilon == b.epsilon
        for v in "ABC":
            assert np.array_equal(a.reports[v].selected_ctc.mat, b.reports[v].selected_ctc.mat)
        assert a.trace_distance_ac == b.trace_distance_ac
