"""Two-qubit entanglement measures: concurrence, entanglement of formation
and the partial-transpose separability test.

The batched helpers (``*_batch``) take stacks of shape ``(n, 4, 4)`` and skip
input validation; they are what the scan engines call in their inner loops.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmat import SY, TOL_OP, check_density, dagger, partial_transpose, tensor_product

SYSY = tensor_product(SY, SY).real  # real symmetric, squares to identity
TOL_SEP = 1e-9
_ZERO_EIG = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    eof: float
    min_pt_eigenvalue: float
    separable: bool


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """Wootters' spin-flipped state ``(sy (x) sy) rho^* (sy (x) sy)``."""
    return SYSY @ np.conj(rho) @ SYSY


def wootters_lambdas_batch(rhos: np.ndarray) -> np.ndarray:
    """Descending square roots of the spectrum of ``rho rho~``.

    They are obtained as singular values of ``W^T (sy (x) sy) W`` with
    ``rho = W W^dagger``; this avoids taking square roots of tiny noisy
    eigenvalues of the non-hermitian product.
    """
    lam, vecs = np.linalg.eigh(rhos)
    # eigenvalues at rounding level are zeros; their square roots (~1e-8) would not be
    floor = _ZERO_EIG * lam[..., -1:]
    lam = np.where(lam > floor, lam, 0.0)
    w = vecs * np.sqrt(lam)[..., None, :]
    tau = np.swapaxes(w, -1, -2) @ SYSY @ w
    return np.linalg.svd(tau, compute_uv=False)


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    lam = wootters_lambdas_batch(rhos)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.clip(c, 0.0, 1.0)


def concurrence(rho: np.ndarray) -> float:
    rho = check_density(rho, TOL_OP)
    return float(concurrence_batch(rho))


def binary_entropy(x):
    """``h(x) = -x log2 x - (1-x) log2(1-x)`` with ``h(0) = h(1) = 0``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, -x * np.log2(x), 0.0)
        b = np.where(x < 1, -(1 - x) * np.log2(1 - x), 0.0)
    out = a + b
    return float(out) if out.ndim == 0 else out


def eof_from_concurrence(c):
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    return binary_entropy(0.5 * (1 + np.sqrt(1 - c * c)))


def eof_batch(rhos: np.ndarray) -> np.ndarray:
    return eof_from_concurrence(concurrence_batch(rhos))


def eof(rho: np.ndarray) -> float:
    """Entanglement of formation in bits."""
    return float(eof_from_concurrence(concurrence(rho)))


def min_pt_eigenvalue_batch(rhos: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(partial_transpose(rhos, "B"))[..., 0]


def is_separable(rho: np.ndarray, tol_sep: float = TOL_SEP) -> tuple[bool, float]:
    """PPT test, exact for two qubits. Returns ``(separable, min PT eigenvalue)``."""
    rho = check_density(rho, TOL_OP)
    lam_min = float(min_pt_eigenvalue_batch(rho))
    return lam_min >= -tol_sep, lam_min


def report(rho: np.ndarray, tol_sep: float = TOL_SEP) -> EntanglementReport:
    c = concurrence(rho)
    sep, lam_min = is_separable(rho, tol_sep)
    return EntanglementReport(
        concurrence=c,
        eof=float(eof_from_concurrence(c)),
        min_pt_eigenvalue=lam_min,
        separable=sep,
    )


def conjugate_batch(u: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """``U rho U^dagger`` over a stack (``u`` may be a single matrix or a stack)."""
    return u @ rhos @ dagger(u)
