"""Gates, named interactions and end-to-end Deutsch solutions.

Scenario ids: ``epr``, ``dejonghe-a``, ``dejonghe-b``, ``dejonghe-c``.
Three-qubit basis labels ``|q1 q2 q3>`` put ``q1`` in the most significant bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .deutsch import (
    DensityMatrix,
    InteractionUnitary,
    StateLike,
    Superoperator,
    _mat,
    build_superoperator_mixed,
    build_superoperator_pure,
    consistency_residual,
    cr_output,
    gauge_reduce,
    superoperator_residual,
)
from .entanglement import EntanglementReport, entanglement_report, trace_distance
from .fixed_point import (
    FixedPointSet,
    SelectionRule,
    feasible_intervals,
    select,
    solution_set,
)
from .linalg import CArray, Spectrum, Tolerances, eigenvalues, kron

SCENARIO_IDS = ("epr", "dejonghe-a", "dejonghe-b", "dejonghe-c")


def gate(name: str, d: int = 2) -> CArray:
    """``hadamard``, ``cnot`` (control = first qubit), ``exchange`` (two-qubit swap) or ``identity``."""
    if name == "hadamard":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    if name == "cnot":
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
        )
    if name == "exchange":
        return np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
        )
    if name == "identity":
        return np.eye(d, dtype=np.complex128)
    raise ValueError(f"unknown gate {name!r}")


def ket(bits: str) -> np.ndarray:
    """Computational basis vector, e.g. ``ket("010")``."""
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def epr_preparation() -> CArray:
    """``(CNOT (x) I2)(H (x) I4)`` on three qubits."""
    i2, i4 = gate("identity", 2), gate("identity", 4)
    return kron(gate("cnot"), i2) @ kron(gate("hadamard"), i4)


def build_epr_interaction() -> InteractionUnitary:
    """Prepare a Bell pair on the two CR qubits, then swap its second half into the CTC."""
    u = kron(gate("identity", 2), gate("exchange")) @ epr_preparation()
    return InteractionUnitary(u, dim_cr=4, dim_ctc=2)


_DEJONGHE_TERMS = (
    ("000", "100"), ("100", "000"), ("010", "011"), ("011", "010"),
    ("101", "110"), ("110", "101"), ("001", "001"), ("111", "111"),
)


def dejonghe_unitary() -> InteractionUnitary:
    """Sum of the eight ket-bras ``|out><in|``; CR = (q1, q2), CTC = q3."""
    u = np.zeros((8, 8), dtype=np.complex128)
    for out, inp in _DEJONGHE_TERMS:
        u += np.outer(ket(out), ket(inp))
    return InteractionUnitary(u, dim_cr=4, dim_ctc=2)


def dejonghe_M(variant: str, epsilon: float = 0.0) -> Superoperator:
    """Superoperators of the three nearby CR inputs (``B`` does not depend on ``epsilon``)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    e = float(epsilon)
    v = variant.upper()
    if v == "A":
        m = [[1 - e, 0, 0, e], [0, 0, e, 0], [0, e, 0, 0], [e, 0, 0, 1 - e]]
    elif v == "B":
        m = np.diag([1.0, 0.0, 0.0, 1.0])
    elif v == "C":
        s = np.sqrt(e * (1 - e))
        m = [[1, 0, 0, e], [0, s, 0, 0], [0, 0, s, 0], [0, 0, 0, 1 - e]]
    else:
        raise ValueError(f"unknown variant {variant!r}; expected A, B or C")
    return Superoperator(np.array(m, dtype=np.complex128), 2, f"dejonghe-{v.lower()}")


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    scenario_id: str
    rule: SelectionRule
    superoperator: Superoperator
    spectrum: Spectrum
    fixed_set: FixedPointSet
    intervals: tuple[tuple[float, float], ...]
    selected_ctc: DensityMatrix
    residual: float
    cr_output: Optional[DensityMatrix] = None
    entanglement: Optional[EntanglementReport] = None

    @property
    def fixed_subspace_dim(self) -> int:
        """Real dimension of ``ker(M - I)``: one more than the number of free directions."""
        return self.fixed_set.subspace_dim + 1


def _pure_vector(rho: CArray, tol: float = 1e-12) -> Optional[np.ndarray]:
    w, v = np.linalg.eigh(rho)
    if abs(w[-1] - 1.0) <= tol:
        return v[:, -1]
    return None


def superoperator_for(u: InteractionUnitary, rho_cr: StateLike) -> Superoperator:
    """Gauge-reduced first-column builder for pure inputs, general builder otherwise."""
    r = _mat(rho_cr)
    psi = _pure_vector(r)
    if psi is not None:
        return build_superoperator_pure(gauge_reduce(u, psi))
    return build_superoperator_mixed(u, r)


def solve(u: InteractionUnitary, rho_cr: StateLike, rule: SelectionRule = SelectionRule(),
          tol: Tolerances = Tolerances(), scenario_id: str = "custom",
          sop: Optional[Superoperator] = None) -> ScenarioReport:
    """Full pipeline: superoperator, spectrum, solution set, selection, CR output.

    Pure CR inputs go through the gauge reduction and the first-column
    builder; mixed inputs use the general builder. A precomputed ``sop`` may
    be passed in when it is known independently.
    """
    r = _mat(rho_cr)
    if sop is None:
        sop = superoperator_for(u, r)
    spectrum = eigenvalues(sop.m)
    fset = solution_set(sop, tol.null, tol.psd)
    selected = select(fset, rule)
    out = cr_output(u, r, selected)
    return ScenarioReport(
        scenario_id=scenario_id,
        rule=rule,
        superoperator=sop,
        spectrum=spectrum,
        fixed_set=fset,
        intervals=tuple(feasible_intervals(fset)),
        selected_ctc=selected,
        residual=consistency_residual(u, r, selected),
        cr_output=out,
        entanglement=entanglement_report(out, tol.product),
    )


def solve_superoperator(sop: Superoperator, rule: SelectionRule = SelectionRule(),
                        tol: Tolerances = Tolerances(), scenario_id: str = "custom") -> ScenarioReport:
    """Pipeline for a bare superoperator; no CR-side quantities are available."""
    fset = solution_set(sop, tol.null, tol.psd)
    selected = select(fset, rule)
    return ScenarioReport(
        scenario_id=scenario_id,
        rule=rule,
        superoperator=sop,
        spectrum=eigenvalues(sop.m),
        fixed_set=fset,
        intervals=tuple(feasible_intervals(fset)),
        selected_ctc=selected,
        residual=superoperator_residual(sop, selected),
    )


def run_epr_scenario(rule: SelectionRule = SelectionRule(), tol: Tolerances = Tolerances()) -> ScenarioReport:
    u = build_epr_interaction()
    return solve(u, DensityMatrix.pure(ket("00")), rule, tol, scenario_id="epr")


def run_dejonghe(variant: str, epsilon: float, rule: SelectionRule = SelectionRule(),
                 tol: Tolerances = Tolerances()) -> ScenarioReport:
    """Solve one of the three nearby DeJonghe inputs at a finite ``epsilon``.

    Only variant B has a known generating input (``|00>`` under
    :func:`dejonghe_unitary`), so only its report carries CR output.
    """
    if not 0.0 < epsilon <= 1.0:
        if epsilon == 0.0:
            raise ValueError("epsilon = 0 is the degenerate limit; use sweep_epsilon with decreasing epsilons")
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    v = variant.upper()
    sid = f"dejonghe-{v.lower()}"
    sop = dejonghe_M(v, epsilon)
    if v == "B":
        return solve(dejonghe_unitary(), DensityMatrix.pure(ket("00")), rule, tol, sid, sop=sop)
    return solve_superoperator(sop, rule, tol, sid)


def population_eigenvalue(sop: Superoperator) -> complex:
    """Eigenvalue of the traceless population direction ``diag(-1, 1)``.

    Raises ``ValueError`` if that direction is not an eigenvector.
    """
    v2 = np.array([-1, 0, 0, 1], dtype=np.complex128)
    mv = sop.m @ v2
    lam = np.vdot(v2, mv) / np.vdot(v2, v2)
    if np.linalg.norm(mv - lam * v2) > 1e-10:
        raise ValueError("diag(-1, 1) is not an eigenvector of this superoperator")
    return complex(lam)


@dataclass(frozen=True, eq=False)
class SweepRow:
    epsilon: float
    reports: dict
    lambda2_a: float
    lambda2_c: float
    m_distance_ab: float
    trace_distance_ac: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    epsilons: tuple[float, ...]
    rows: tuple[SweepRow, ...] = field(default=())

    @property
    def discontinuity_metric(self) -> tuple[float, ...]:
        return tuple(r.trace_distance_ac for r in self.rows)


def _sweep_point(eps: float, rule: SelectionRule, tol: Tolerances) -> SweepRow:
    reports = {v: run_dejonghe(v, eps, rule, tol) for v in "ABC"}
    return SweepRow(
        epsilon=eps,
        reports=reports,
        lambda2_a=population_eigenvalue(reports["A"].superoperator).real,
        lambda2_c=population_eigenvalue(reports["C"].superoperator).real,
        m_distance_ab=float(np.linalg.norm(dejonghe_M("A", eps).m - dejonghe_M("B").m)),
        trace_distance_ac=trace_distance(reports["A"].selected_ctc, reports["C"].selected_ctc),
    )


def sweep_epsilon(epsilons: Sequence[float], rule: SelectionRule = SelectionRule(),
                  tol: Tolerances = Tolerances(), workers: int = 1) -> SweepResult:
    """Solve variants A, B and C along a strictly decreasing sequence of epsilons in (0, 1]."""
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ValueError("need at least one epsilon")
    for e in eps:
        if not 0.0 < e <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {e}")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda e: _sweep_point(e, rule, tol), eps))
    else:
        rows = [_sweep_point(e, rule, tol) for e in eps]
    return SweepResult(tuple(eps), tuple(rows))
