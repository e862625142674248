"""Dense complex linear algebra for small matrices.

Matrices are plain ``numpy`` complex128 arrays. Superoperators act on
row-major vectorized density matrices, so that ``A @ rho @ B.conj().T``
corresponds to ``kron(A, B.conj()) @ vec_rowmajor(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

CArray = npt.NDArray[np.complex128]

TOL_EIG = 1e-10
TOL_HERM = 1e-10
TOL_NULL = 1e-9
MAX_DIM = 64


class NonConvergenceError(ArithmeticError):
    """The QR iteration did not deflate within its iteration budget."""

    def __init__(self, iterations: int, remaining: int):
        super().__init__(
            f"QR iteration failed to converge after {iterations} iterations "
            f"({remaining} eigenvalues unresolved)"
        )
        self.iterations = iterations
        self.remaining = remaining


class NotHermitianError(ValueError):
    pass


def as_cmatrix(a, name: str = "matrix") -> CArray:
    """Coerce ``a`` to a finite 2-d complex128 array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str = "matrix") -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


def kron(a, b) -> CArray:
    """Kronecker product; entry ``(i*b.rows + k, j*b.cols + l) = a[i, j] * b[k, l]``."""
    a = as_cmatrix(a, "a")
    b = as_cmatrix(b, "b")
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def partial_trace(rho, dim_first: int, dim_second: int, keep: str = "first") -> CArray:
    """Reduce a bipartite operator on ``first (x) second`` to one factor.

    Parameters
    ----------
    rho : array_like
        Square operator of dimension ``dim_first * dim_second``.
    keep : {"first", "second"}
        Subsystem to keep; the other one is traced out.
    """
    rho = as_cmatrix(rho, "rho")
    n = _require_square(rho, "rho")
    if dim_first < 1 or dim_second < 1 or n != dim_first * dim_second:
        raise ValueError(
            f"invalid bipartition: {dim_first} x {dim_second} does not match dimension {n}"
        )
    t = rho.reshape(dim_first, dim_second, dim_first, dim_second)
    if keep == "first":
        return np.einsum("ikjk->ij", t)
    if keep == "second":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def vec_rowmajor(rho) -> CArray:
    """Stack the rows of a square matrix: ``[[a, b], [c, d]] -> (a, b, c, d)``."""
    rho = as_cmatrix(rho, "rho")
    _require_square(rho, "rho")
    return rho.reshape(-1).copy()


def unvec_rowmajor(v, d: int | None = None) -> CArray:
    """Inverse of :func:`vec_rowmajor`."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d < 1 or d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {d}x{d} matrix")
    return v.reshape(d, d).copy()


# -- eigenvalues ------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending modulus, then real part, then imaginary part.

    ``multiplicities`` groups numerically coincident eigenvalues as
    ``(representative, count)`` pairs in the same order.
    """

    values: CArray
    multiplicities: tuple[tuple[complex, int], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.values)

    def closest(self, target: complex) -> complex:
        return complex(self.values[np.argmin(np.abs(self.values - target))])


def sort_eigenvalues(values, decimals: int = 9) -> CArray:
    values = np.asarray(values, dtype=np.complex128)
    # keys are rounded so that round-off does not decide ties; lexsort uses the last key first
    keys = [np.round(k, decimals) for k in (-values.imag, -values.real, -np.abs(values))]
    order = np.lexsort(keys)
    return values[order]


def _group(values: CArray, tol: float) -> tuple[tuple[complex, int], ...]:
    groups: list[list] = []
    for v in values:
        for g in groups:
            if abs(v - g[0]) <= tol:
                g[1] += 1
                break
        else:
            groups.append([complex(v), 1])
    return tuple((g[0], g[1]) for g in groups)


def hessenberg(a) -> CArray:
    """Upper Hessenberg form of ``a`` via Householder reflections (similarity)."""
    h = as_cmatrix(a).copy()
    n = _require_square(h)
    for k in range(n - 2):
        x = h[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0.0
    return h


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    # returns (c, s) with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s


def _wilkinson_shift(h: CArray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    tr = a + d
    disc = np.sqrt((a - d) ** 2 / 4 + b * c)
    mu1, mu2 = tr / 2 + disc, tr / 2 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def _qr_step(h: CArray, lo: int, hi: int, shift: complex) -> None:
    """One explicit shifted QR sweep on the active block ``h[lo:hi+1, lo:hi+1]``, in place."""
    blk = h[lo : hi + 1, lo : hi + 1]
    n = blk.shape[0]
    blk[np.diag_indices(n)] -= shift
    rots = []
    for k in range(n - 1):
        c, s = _givens(blk[k, k], blk[k + 1, k])
        g = np.array([[c, s], [-np.conj(s), c]])
        blk[k : k + 2, k:] = g @ blk[k : k + 2, k:]
        blk[k + 1, k] = 0.0
        rots.append(g)
    for k, g in enumerate(rots):
        blk[: k + 2, k : k + 2] = blk[: k + 2, k : k + 2] @ g.conj().T
    blk[np.diag_indices(n)] += shift


def eigenvalues(m, max_dim: int = MAX_DIM, max_iter: int | None = None,
                cluster_tol: float = 1e-8) -> Spectrum:
    """All eigenvalues of a general complex square matrix.

    Hessenberg reduction followed by single-shift QR with Wilkinson shifts
    and exceptional shifts every tenth stalled sweep. The iteration budget
    defaults to ``100 * n`` sweeps.

    Raises
    ------
    NonConvergenceError
        If some eigenvalue does not deflate within ``max_iter`` sweeps.
    """
    m = as_cmatrix(m)
    n = _require_square(m)
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds the cap of {max_dim}")
    if max_iter is None:
        max_iter = 100 * n
    h = hessenberg(m)
    eps = np.finfo(float).eps
    scale = max(np.abs(h).max(), np.finfo(float).tiny)
    out = np.empty(n, dtype=np.complex128)
    hi = n - 1
    total = 0
    stall = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            ref = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if abs(h[lo, lo - 1]) <= eps * (ref if ref > 0 else scale):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            out[hi] = h[hi, hi]
            hi -= 1
            stall = 0
            continue
        if total >= max_iter:
            raise NonConvergenceError(total, hi + 1)
        total += 1
        stall += 1
        if stall % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            shift = _wilkinson_shift(h, hi)
        _qr_step(h, lo, hi, shift)
    values = sort_eigenvalues(out)
    return Spectrum(values, _group(values, cluster_tol * max(1.0, scale)))


# -- subspaces ---------------------------------------------------------------


def nullspace(m, tol: float = TOL_NULL, scale: float = 0.0) -> list[CArray]:
    """Orthonormal basis of the numerical kernel of ``m``.

    Right singular vectors whose singular value is at most
    ``tol * max(sigma_max, scale)``. A zero matrix has the whole space as its
    kernel. Pass ``scale`` when ``m`` is a difference such as ``M - I`` that
    can be pure round-off, so that the threshold does not shrink with it.
    """
    m = as_cmatrix(m)
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    n = m.shape[1]
    full = np.zeros(n)
    full[: s.size] = s
    keep = full <= tol * max(smax, scale)
    return [vh[i].conj().copy() for i in np.flatnonzero(keep)]


def hermitian_eigensystem(h, tol: float = TOL_HERM) -> tuple[np.ndarray, CArray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and the matching orthonormal
    eigenvectors as columns.

    Raises
    ------
    NotHermitianError
        If ``||h - h^dagger||_F > tol * ||h||_F``.
    """
    h = as_cmatrix(h)
    _require_square(h)
    asym = np.linalg.norm(h - h.conj().T)
    bound = tol * np.linalg.norm(h)
    if asym > bound:
        raise NotHermitianError(
            f"matrix is not Hermitian: ||h - h^dagger|| = {asym:.3e} > {bound:.3e}"
        )
    return np.linalg.eigh((h + h.conj().T) / 2)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = as_cmatrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])) <= tol


@dataclass(frozen=True)
class Tolerances:
    """Tolerances threaded through the solver pipeline.

    ``null`` is relative to the largest singular value of ``M - I``; ``unitary``
    and ``state`` apply to matrices read from files.
    """

    null: float = TOL_NULL
    herm: float = TOL_HERM
    psd: float = 1e-10
    product: float = 1e-10
    unitary: float = 1e-8
    state: float = 1e-8

    def replace(self, **kw) -> "Tolerances":
        from dataclasses import replace

        return replace(self, **kw)
