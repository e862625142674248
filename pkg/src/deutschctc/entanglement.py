"""Entropy, purity and two-qubit entanglement diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .deutsch import StateLike, _mat
from .linalg import kron, partial_trace

EIG_CLAMP = 1e-14
PRODUCT_TOL = 1e-10

_SIGMA_YY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128
)


def von_neumann_entropy(rho: StateLike) -> float:
    """``-Tr(rho ln rho)`` in nats; eigenvalues below 1e-14 count as zero."""
    w = np.linalg.eigvalsh(_mat(rho))
    w = w[w > EIG_CLAMP]
    return float(max(0.0, -(w * np.log(w)).sum()))


def purity(rho: StateLike) -> float:
    m = _mat(rho)
    return float(np.trace(m @ m).real)


def concurrence(rho: StateLike) -> float:
    """Wootters concurrence of a two-qubit state."""
    m = _mat(rho)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a two-qubit (4x4) state, got shape {m.shape}")
    r = m @ _SIGMA_YY @ m.conj() @ _SIGMA_YY
    lam = np.sqrt(np.clip(np.linalg.eigvals(r).real, 0.0, None))
    lam = np.sort(lam)[::-1]
    return float(np.clip(lam[0] - lam[1:].sum(), 0.0, 1.0))


def is_product(rho: StateLike, tol: float = PRODUCT_TOL) -> bool:
    """True if a two-qubit state equals the tensor product of its marginals within ``tol``."""
    m = _mat(rho)
    if m.shape != (4, 4):
        raise ValueError(f"is_product needs a two-qubit (4x4) state, got shape {m.shape}")
    a = partial_trace(m, 2, 2, keep="first")
    b = partial_trace(m, 2, 2, keep="second")
    return bool(np.linalg.norm(m - kron(a, b)) <= tol)


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    """``(1/2) Tr|rho - sigma|``."""
    diff = _mat(rho) - _mat(sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


@dataclass(frozen=True)
class EntanglementReport:
    entropy_nats: float
    purity: float
    concurrence: Optional[float]
    is_product: Optional[bool]
    product_tol: float = PRODUCT_TOL

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / np.log(2)


def entanglement_report(rho: StateLike, tol: float = PRODUCT_TOL) -> EntanglementReport:
    m = _mat(rho)
    two_qubit = m.shape == (4, 4)
    return EntanglementReport(
        entropy_nats=von_neumann_entropy(m),
        purity=purity(m),
        concurrence=concurrence(m) if two_qubit else None,
        is_product=is_product(m, tol) if two_qubit else None,
        product_tol=tol,
    )
