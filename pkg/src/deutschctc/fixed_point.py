"""Fixed points of the CTC channel and the convex set of Deutsch solutions.

The solutions of ``M v = v`` that are density matrices form a convex set.
It is stored affinely as a particular solution plus an orthonormal
(Hilbert-Schmidt) basis of traceless Hermitian directions; positivity is
checked per query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .deutsch import (
    DensityMatrix,
    InteractionUnitary,
    StateLike,
    Superoperator,
    _mat,
)
from .linalg import TOL_NULL, CArray, nullspace, unvec_rowmajor


class EmptyFixedSubspaceError(ArithmeticError):
    """``M - I`` has a trivial kernel, so ``M`` is not a trace-preserving map."""


class NotDaggerClosedError(ArithmeticError):
    pass


class NoDensitySolutionError(ArithmeticError):
    pass


class InfeasibleSelectionError(ValueError):
    pass


def fixed_subspace(sop: Superoperator, tol: float = TOL_NULL) -> list[CArray]:
    """Orthonormal basis of ``ker(M - I)``."""
    n = sop.m.shape[0]
    # M - I can be pure round-off (M = I); the identity sets the reference scale
    basis = nullspace(sop.m - np.eye(n), tol, scale=1.0)
    if not basis:
        raise EmptyFixedSubspaceError(
            "M has no eigenvalue 1 at tolerance %.1e; it cannot be a trace-preserving map" % tol
        )
    return basis


def _herm_to_real(h: CArray) -> np.ndarray:
    # isometry from (Hermitian, Hilbert-Schmidt) to (R^{2 d^2}, Euclidean)
    return np.concatenate([h.real.ravel(), h.imag.ravel()])


def _real_to_herm(x: np.ndarray, d: int) -> CArray:
    n = d * d
    h = (x[:n] + 1j * x[n:]).reshape(d, d)
    return (h + h.conj().T) / 2


def _canonical_basis(rows: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``span(rows)`` that depends only on the subspace.

    Projects the coordinate axes onto the subspace and Gram-Schmidts them in
    order, so the result is reproducible and sign-stable.
    """
    if rows.size == 0:
        return rows.reshape(0, rows.shape[-1] if rows.ndim == 2 else 0)
    q, _ = np.linalg.qr(rows.T)
    proj = q @ q.T
    out: list[np.ndarray] = []
    for axis in range(proj.shape[0]):
        v = proj[:, axis].copy()
        for b in out:
            v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > tol:
            out.append(v / nv)
        if len(out) == rows.shape[0]:
            break
    return np.array(out)


def hermitian_fixed_basis(raw: Sequence[CArray], d: int, tol: float = 1e-8) -> list[CArray]:
    """Real basis of Hermitian matrices spanning the same space as ``raw``.

    Each ``unvec(v)`` is split into its Hermitian and anti-Hermitian parts;
    the returned matrices are Hilbert-Schmidt orthonormal.

    Raises
    ------
    NotDaggerClosedError
        If the span of ``raw`` is not closed under the adjoint.
    """
    if not raw:
        return []
    cands = []
    for v in raw:
        h = unvec_rowmajor(v, d)
        cands.append(_herm_to_real((h + h.conj().T) / 2))
        cands.append(_herm_to_real((h - h.conj().T) / 2j))
    a = np.array(cands)
    s = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    if rank != len(raw):
        raise NotDaggerClosedError(
            f"fixed subspace of dimension {len(raw)} yields {rank} independent Hermitian "
            "elements; M does not preserve Hermiticity"
        )
    _, _, vt = np.linalg.svd(a)
    basis = _canonical_basis(vt[:rank], tol)
    return [_real_to_herm(x, d) for x in basis]


def nearest_density_matrix(h: CArray) -> CArray:
    """Frobenius-nearest density matrix to a matrix (Hermitian part, eigenvalues projected onto the simplex)."""
    h = np.asarray(h, dtype=np.complex128)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    mu = np.sort(w)[::-1]
    css = np.cumsum(mu) - 1
    k = np.arange(1, len(mu) + 1)
    r = k[mu - css / k > 0][-1]
    p = np.maximum(w - css[r - 1] / r, 0.0)
    return (v * p) @ v.conj().T


@dataclass(frozen=True, eq=False)
class FixedPointSet:
    """All density matrices ``particular + sum_k t_k directions[k]`` that are PSD."""

    d: int
    particular: DensityMatrix
    directions: tuple[CArray, ...] = field(default=())

    @property
    def subspace_dim(self) -> int:
        return len(self.directions)

    @property
    def degenerate(self) -> bool:
        return self.subspace_dim >= 1

    def point(self, coeffs: Sequence[float]) -> CArray:
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        if coeffs.size != self.subspace_dim:
            raise ValueError(f"expected {self.subspace_dim} coefficients, got {coeffs.size}")
        out = self.particular.mat.copy()
        for c, dmat in zip(coeffs, self.directions):
            out = out + c * dmat
        return out


def _min_eig(h: CArray) -> float:
    return float(np.linalg.eigvalsh(h)[0])


def _project_affine(x: CArray, anchor: CArray, directions: Sequence[CArray]) -> CArray:
    out = anchor.copy()
    delta = x - anchor
    for dmat in directions:
        out = out + np.vdot(dmat, delta).real * dmat
    return out


def _dykstra(target: CArray, anchor: CArray, directions: Sequence[CArray],
             max_iter: int = 20000, tol: float = 1e-13) -> CArray:
    # projection of target onto (affine set) n (density matrices)
    x = target.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        y = _project_affine(x + p, anchor, directions)
        p = x + p - y
        x_new = nearest_density_matrix(y + q)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) < tol and np.linalg.norm(x_new - y) < tol:
            x = x_new
            break
        x = x_new
    return _project_affine(x, anchor, directions)


def density_solutions(basis: Sequence[CArray], tol: float = 1e-9,
                      psd_tol: float = 1e-10) -> FixedPointSet:
    """Decompose a Hermitian fixed basis into a particular solution plus traceless directions.

    The particular solution is the element of the solution set closest (in
    Frobenius norm) to the maximally mixed state. For a qubit this is the
    minimum Bloch-radius, and hence maximum-entropy, solution.
    """
    if not basis:
        raise ValueError("basis must be non-empty")
    d = basis[0].shape[0]
    traces = np.array([np.trace(h).real for h in basis])
    tnorm = np.linalg.norm(traces)
    if tnorm < tol:
        raise NoDensitySolutionError("fixed subspace contains no element with non-zero trace")
    anchor = sum(t * h for t, h in zip(traces, basis)) / tnorm**2

    k = len(basis)
    if k > 1:
        # coefficient vectors orthogonal to the trace functional
        _, _, vt = np.linalg.svd(traces.reshape(1, -1))
        coeffs = vt[1:]
        raw_dirs = np.array([_herm_to_real(sum(c * h for c, h in zip(row, basis))) for row in coeffs])
        directions = [_real_to_herm(x, d) for x in _canonical_basis(raw_dirs)]
    else:
        directions = []

    centre = np.eye(d) / d
    p0 = _project_affine(centre, anchor, directions)
    if _min_eig(p0) < -psd_tol:
        if d == 2:
            raise NoDensitySolutionError(
                "the fixed affine set does not meet the Bloch ball: no density-matrix solution"
            )
        p0 = _dykstra(centre, anchor, directions)
        if _min_eig(p0) < -max(psd_tol, 1e-9):
            raise NoDensitySolutionError("no positive semidefinite element in the fixed affine set")
    p0 = (p0 + p0.conj().T) / 2
    return FixedPointSet(d, DensityMatrix(p0, tol_psd=max(psd_tol, 1e-9)), tuple(directions))


def feasible_interval(fset: FixedPointSet, direction_index: int, iterations: int = 80,
                      psd_tol: float = 1e-15) -> tuple[float, float]:
    """Largest ``[t_min, t_max]`` such that ``particular + t * D`` stays PSD.

    Endpoints come from bisection on the sign of the minimum eigenvalue and
    always lie on the feasible side. When the particular solution sits on the
    PSD boundary, its own round-off level is used as the threshold.
    """
    if not 0 <= direction_index < fset.subspace_dim:
        raise IndexError(f"direction index {direction_index} out of range 0..{fset.subspace_dim - 1}")
    p = fset.particular.mat
    dmat = fset.directions[direction_index]
    w = np.linalg.eigvalsh(dmat)
    if np.abs(w).max() < 1e-14:
        raise ValueError("zero direction matrix: numerical rank of the fixed subspace is wrong")
    floor = min(0.0, _min_eig(p)) - psd_tol

    def ok(t: float) -> bool:
        return _min_eig(p + t * dmat) >= floor

    def edge(far: float) -> float:
        lo, hi = 0.0, far
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    # a traceless non-zero D has eigenvalues of both signs; PSD fails past 1/|lambda|
    return edge(-2.0 / w[-1]), edge(2.0 / -w[0])


def feasible_intervals(fset: FixedPointSet) -> list[tuple[float, float]]:
    return [feasible_interval(fset, k) for k in range(fset.subspace_dim)]


# -- selection ---------------------------------------------------------------


@dataclass(frozen=True)
class SelectionRule:
    """How to pick one solution out of a degenerate solution set.

    ``given_parameter`` carries one number per direction, each a relative
    position in ``[0, 1]`` along that direction's feasible interval
    (0 is ``t_min``, 1 is ``t_max``).
    """

    kind: str = "max_entropy"
    params: tuple[float, ...] = ()

    KINDS = ("max_entropy", "min_bloch_norm", "given_parameter")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown selection rule {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @classmethod
    def given(cls, *params: float) -> "SelectionRule":
        return cls("given_parameter", tuple(params))

    @classmethod
    def parse(cls, text: str) -> "SelectionRule":
        """Parse ``max-entropy``, ``min-bloch-norm`` or ``param=<p1,p2,...>``."""
        text = text.strip()
        if text.startswith("param="):
            body = text[len("param="):]
            try:
                vals = tuple(float(x) for x in body.split(",") if x.strip())
            except ValueError as exc:
                raise ValueError(f"bad parameter list {body!r}") from exc
            if not vals:
                raise ValueError("param= needs at least one value")
            return cls.given(*vals)
        kind = text.replace("-", "_")
        return cls(kind)

    def __str__(self) -> str:
        if self.kind == "given_parameter":
            return "param=" + ",".join(repr(p) for p in self.params)
        return self.kind.replace("_", "-")


def _entropy_ascent(fset: FixedPointSet, max_iter: int = 5000, gtol: float = 1e-10) -> CArray:
    dirs = fset.directions
    x = np.zeros(len(dirs))

    def entropy(rho):
        w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        w = w[w > 1e-14]
        return float(-(w * np.log(w)).sum())

    rho = fset.point(x)
    s = entropy(rho)
    step = 1.0
    for _ in range(max_iter):
        w, v = np.linalg.eigh(rho)
        logr = (v * np.log(np.clip(w, 1e-14, None))) @ v.conj().T
        g = np.array([-np.vdot(dm, logr).real for dm in dirs])
        if np.linalg.norm(g) < gtol:
            break
        step = min(step * 2.0, 1.0)
        while step > 1e-16:
            cand = fset.point(x + step * g)
            if _min_eig(cand) >= 0.0:
                sc = entropy(cand)
                if sc >= s + 1e-4 * step * (g @ g):
                    x, rho, s = x + step * g, cand, sc
                    break
            step *= 0.5
        else:
            break
    return rho


def select(fset: FixedPointSet, rule: SelectionRule = SelectionRule()) -> DensityMatrix:
    """Pick one solution from ``fset`` according to ``rule``."""
    if not fset.degenerate:
        return fset.particular
    if rule.kind == "min_bloch_norm" or (rule.kind == "max_entropy" and fset.d == 2):
        # particular is the point nearest to I/d; for a qubit entropy decreases with Bloch radius
        return fset.particular
    if rule.kind == "max_entropy":
        return DensityMatrix(_entropy_ascent(fset), tol_psd=1e-9)
    params = np.asarray(rule.params, dtype=float)
    if params.size != fset.subspace_dim:
        raise InfeasibleSelectionError(
            f"solution set has {fset.subspace_dim} free directions but {params.size} parameters were given"
        )
    if np.any(params < 0) or np.any(params > 1):
        raise InfeasibleSelectionError(f"parameters {rule.params} lie outside [0, 1]")
    ivals = feasible_intervals(fset)
    t = np.array([lo + p * (hi - lo) for p, (lo, hi) in zip(params, ivals)])
    rho = fset.point(t)
    if _min_eig(rho) < -1e-10:
        raise InfeasibleSelectionError(
            f"parameters {rule.params} select a matrix that is not positive semidefinite"
        )
    return DensityMatrix(rho)


def solution_set(sop: Superoperator, tol: float = TOL_NULL, psd_tol: float = 1e-10) -> FixedPointSet:
    """``fixed_subspace`` -> ``hermitian_fixed_basis`` -> ``density_solutions``."""
    raw = fixed_subspace(sop, tol)
    return density_solutions(hermitian_fixed_basis(raw, sop.d_ctc), psd_tol=psd_tol)


# -- iteration oracle -------------------------------------------------------


def kraus_operators(u: InteractionUnitary, rho_cr: StateLike) -> CArray:
    """Kraus operators of the CTC channel, shape ``(r, d_ctc, d_ctc)``."""
    r = _mat(rho_cr)
    p, vecs = np.linalg.eigh((r + r.conj().T) / 2)
    d, dcr = u.dim_ctc, u.dim_cr
    ops = []
    for pk, psi in zip(p, vecs.T):
        if pk <= 1e-15:
            continue
        # U (|psi> (x) I) as a (dcr*d) x d matrix, split along the CR index
        col = u.u @ np.kron(psi.reshape(-1, 1), np.eye(d))
        ops.extend(np.sqrt(pk) * col.reshape(dcr, d, d))
    return np.array(ops)


def iterate_channel_fixed_point(u: InteractionUnitary, rho_cr: StateLike, sigma0: StateLike,
                                n_steps: int) -> DensityMatrix:
    """Cesaro average of ``Phi^k(sigma0)`` over ``n/2 < k <= n``, projected to the nearest density matrix.

    Averaging only the second half of the trajectory discards the transient,
    whose contribution to a full average decays like ``1/n`` rather than
    geometrically. Periodic components are still averaged out.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    kraus = kraus_operators(u, rho_cr)
    kh = kraus.conj().transpose(0, 2, 1)
    sigma = _mat(sigma0).copy()
    acc = np.zeros_like(sigma)
    burn = n_steps // 2
    for k in range(n_steps):
        sigma = np.einsum("kab,bc,kcd->ad", kraus, sigma, kh)
        if k >= burn:
            acc += sigma
    return DensityMatrix(nearest_density_matrix(acc / (n_steps - burn)))
