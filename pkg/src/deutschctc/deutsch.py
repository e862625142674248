"""The Deutsch self-consistency map for a CR register coupled to a CTC register.

Tensor ordering is always CR first, CTC second. Given an interaction ``U``
on ``CR (x) CTC`` and a CR input state, the CTC register sees the channel

    sigma -> Tr_CR[ U (rho_cr (x) sigma) U^dagger ]

and a Deutsch solution is any density matrix fixed by it. In row-major
vectorized form the channel is a ``d_ctc**2 x d_ctc**2`` matrix ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .linalg import (
    CArray,
    TOL_HERM,
    as_cmatrix,
    kron,
    partial_trace,
    unvec_rowmajor,
    vec_rowmajor,
)

TOL_TRACE = 1e-10
TOL_PSD = 1e-10
TOL_UNITARY = 1e-10


class InvalidStateError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False, init=False)
class DensityMatrix:
    """A validated density matrix: Hermitian, unit trace, positive semidefinite."""

    mat: CArray

    def __init__(self, mat, tol_herm: float = TOL_HERM, tol_trace: float = TOL_TRACE,
                 tol_psd: float = TOL_PSD):
        m = as_cmatrix(mat, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {m.shape}")
        asym = np.linalg.norm(m - m.conj().T)
        if asym > tol_herm * max(1.0, np.linalg.norm(m)):
            raise InvalidStateError(f"density matrix is not Hermitian (||rho - rho^dagger|| = {asym:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > tol_trace:
            raise InvalidStateError(f"density matrix trace is {tr.real:.12g}, expected 1")
        m = (m + m.conj().T) / 2
        lmin = np.linalg.eigvalsh(m)[0]
        if lmin < -tol_psd:
            raise InvalidStateError(f"density matrix is not positive semidefinite (min eigenvalue {lmin:.3e})")
        object.__setattr__(self, "mat", _frozen(m))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def pure(cls, psi, tol: float = 1e-10) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if abs(norm - 1) > tol:
            raise InvalidStateError(f"state vector has norm {norm:.12g}, expected 1")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, d: int, index: int = 0) -> "DensityMatrix":
        m = np.zeros((d, d), dtype=np.complex128)
        m[index, index] = 1.0
        return cls(m)

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d) / d)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix({np.array2string(self.mat, precision=6, suppress_small=True)})"


StateLike = Union[DensityMatrix, np.ndarray]


def _mat(x) -> CArray:
    if isinstance(x, DensityMatrix):
        return x.mat
    return as_cmatrix(x)


@dataclass(frozen=True, eq=False, init=False)
class InteractionUnitary:
    """Unitary acting on ``CR (x) CTC`` with the CR factor first."""

    u: CArray
    dim_cr: int
    dim_ctc: int = 2

    def __init__(self, u, dim_cr: int, dim_ctc: int = 2, tol: float = TOL_UNITARY):
        m = as_cmatrix(u, "interaction unitary")
        n = dim_cr * dim_ctc
        if m.shape != (n, n):
            raise DimensionError(
                f"unitary has shape {m.shape}, expected {n}x{n} for dim_cr={dim_cr}, dim_ctc={dim_ctc}"
            )
        resid = np.linalg.norm(m @ m.conj().T - np.eye(n))
        if resid > tol:
            raise InvalidStateError(f"matrix is not unitary: ||U U^dagger - I|| = {resid:.3e}")
        object.__setattr__(self, "u", _frozen(m.copy()))
        object.__setattr__(self, "dim_cr", int(dim_cr))
        object.__setattr__(self, "dim_ctc", int(dim_ctc))

    @property
    def blocks(self) -> CArray:
        """``blocks[i, j]`` is the CTC-sized block at CR row ``i``, CR column ``j`` (0-based)."""
        d = self.dim_ctc
        return self.u.reshape(self.dim_cr, d, self.dim_cr, d).transpose(0, 2, 1, 3)

    def block(self, i: int, j: int) -> CArray:
        """Block ``A_ij`` with 1-based indices, as in the block form of the unitary."""
        if not (1 <= i <= self.dim_cr and 1 <= j <= self.dim_cr):
            raise IndexError(f"block index ({i}, {j}) out of range 1..{self.dim_cr}")
        return self.blocks[i - 1, j - 1].copy()


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Matrix of the CTC channel on row-major vectorized ``d_ctc x d_ctc`` matrices."""

    m: CArray
    d_ctc: int
    provenance: str = "direct"

    def __post_init__(self):
        m = as_cmatrix(self.m, "superoperator")
        d2 = self.d_ctc * self.d_ctc
        if m.shape != (d2, d2):
            raise DimensionError(f"superoperator has shape {m.shape}, expected {d2}x{d2}")
        object.__setattr__(self, "m", _frozen(m))

    def apply(self, sigma) -> CArray:
        return unvec_rowmajor(self.m @ vec_rowmajor(_mat(sigma)), self.d_ctc)

    def trace_preservation_error(self) -> float:
        """``||vec(I)^T M - vec(I)^T||``."""
        vid = vec_rowmajor(np.eye(self.d_ctc))
        return float(np.linalg.norm(vid @ self.m - vid))

    def hermiticity_preservation_error(self) -> float:
        """Max violation of ``M[(i,j),(k,l)] = conj(M[(j,i),(l,k)])``."""
        d = self.d_ctc
        t = self.m.reshape(d, d, d, d)
        return float(np.abs(t - t.transpose(1, 0, 3, 2).conj()).max())


def extract_blocks(u: InteractionUnitary) -> CArray:
    """Return the ``dim_cr x dim_cr`` grid of CTC blocks of ``u`` (0-based)."""
    return u.blocks.copy()


def householder_completion(psi) -> CArray:
    """A unitary ``V`` with ``V[:, 0] = psi``; the identity when ``psi`` is ``|0>``."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    n = psi.size
    e0 = np.zeros(n, dtype=np.complex128)
    e0[0] = 1.0
    if np.array_equal(psi, e0):
        return np.eye(n, dtype=np.complex128)
    phase = psi[0] / abs(psi[0]) if psi[0] != 0 else 1.0
    w = e0 - np.conj(phase) * psi
    nw = np.vdot(w, w).real
    if nw == 0.0:
        return phase * np.eye(n, dtype=np.complex128)
    h = np.eye(n, dtype=np.complex128) - 2.0 * np.outer(w, w.conj()) / nw
    return phase * h


def gauge_reduce(u: InteractionUnitary, psi, tol: float = 1e-10) -> InteractionUnitary:
    """Fold a pure CR input ``psi`` into the interaction: ``U (V (x) I)`` with ``V|0> = psi``.

    The returned unitary with CR input ``|0...0>`` induces the same CTC and CR
    channels as ``u`` with CR input ``|psi>``.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.size != u.dim_cr:
        raise DimensionError(f"state has dimension {psi.size}, expected {u.dim_cr}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > tol:
        raise InvalidStateError(f"state vector has norm {norm:.12g}, expected 1")
    v = householder_completion(psi)
    return InteractionUnitary(u.u @ kron(v, np.eye(u.dim_ctc)), u.dim_cr, u.dim_ctc)


def build_superoperator_pure(u_tilde: InteractionUnitary) -> Superoperator:
    """``M = sum_i A_i1 (x) conj(A_i1)`` for CR input ``|0...0>``."""
    first_col = u_tilde.blocks[:, 0]
    m = sum(kron(a, a.conj()) for a in first_col)
    return Superoperator(m, u_tilde.dim_ctc, "pure")


def build_superoperator_mixed(u: InteractionUnitary, rho_cr: StateLike) -> Superoperator:
    """``M = sum_{i,j,k} rho_cr[j, k] A_ij (x) conj(A_ik)`` for an arbitrary CR input."""
    r = _mat(rho_cr)
    if r.shape != (u.dim_cr, u.dim_cr):
        raise DimensionError(f"CR state has shape {r.shape}, expected {u.dim_cr}x{u.dim_cr}")
    b = u.blocks
    d = u.dim_ctc
    m = np.einsum("jk,ijab,ikcd->acbd", r, b, b.conj()).reshape(d * d, d * d)
    return Superoperator(m, d, "mixed")


def _joint_output(u: InteractionUnitary, rho_cr, sigma) -> CArray:
    r, s = _mat(rho_cr), _mat(sigma)
    if r.shape != (u.dim_cr, u.dim_cr):
        raise DimensionError(f"CR state has shape {r.shape}, expected {u.dim_cr}x{u.dim_cr}")
    if s.shape != (u.dim_ctc, u.dim_ctc):
        raise DimensionError(f"CTC state has shape {s.shape}, expected {u.dim_ctc}x{u.dim_ctc}")
    return u.u @ kron(r, s) @ u.u.conj().T


def ctc_channel_matrix(u: InteractionUnitary, rho_cr, sigma) -> CArray:
    """``Tr_CR[U (rho_cr (x) sigma) U^dagger]`` for any matrix ``sigma`` (linear extension)."""
    return partial_trace(_joint_output(u, rho_cr, sigma), u.dim_cr, u.dim_ctc, keep="second")


def apply_ctc_channel(u: InteractionUnitary, rho_cr: StateLike, sigma: StateLike) -> DensityMatrix:
    return DensityMatrix(ctc_channel_matrix(u, rho_cr, sigma))


def cr_output(u: InteractionUnitary, rho_cr: StateLike, sigma: StateLike) -> DensityMatrix:
    """Post-interaction CR state ``Tr_CTC[U (rho_cr (x) sigma) U^dagger]``."""
    joint = _joint_output(u, rho_cr, sigma)
    return DensityMatrix(partial_trace(joint, u.dim_cr, u.dim_ctc, keep="first"))


def consistency_residual(u: InteractionUnitary, rho_cr: StateLike, sigma: StateLike) -> float:
    """Frobenius distance between ``sigma`` and its image under the CTC channel."""
    s = _mat(sigma)
    return float(np.linalg.norm(ctc_channel_matrix(u, rho_cr, s) - s))


def superoperator_residual(sop: Superoperator, sigma: StateLike) -> float:
    """Same as :func:`consistency_residual` but through the superoperator matrix."""
    s = _mat(sigma)
    return float(np.linalg.norm(sop.apply(s) - s))
