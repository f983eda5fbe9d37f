"""Dense 2x2 / 4x4 complex matrix helpers and two-qubit state utilities.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit A is the
left Kronecker factor, so the computational basis order is
``|00>, |01>, |10>, |11>`` with the first label belonging to A.

Most functions also accept stacks of matrices with shape ``(..., d, d)``;
the validating entry points (``check_density``, ``conjugate`` ...) work on a
single matrix.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidDensityMatrix, NonHermitianInput, NonUnitary

TOL_BUILD = 1e-10  # construction-time hermiticity / trace / PSD tolerance
TOL_OP = 1e-9  # operation precondition tolerance

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}

# Bell state |Phi+> = (|00> + |11>)/sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b`` with ``a`` acting on qubit A."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_error(m: np.ndarray) -> float:
    """Largest elementwise ``|m - m^dagger|``."""
    return float(np.max(np.abs(m - dagger(m))))


def unitarity_error(u: np.ndarray) -> float:
    d = u.shape[-1]
    return float(np.max(np.abs(u @ dagger(u) - np.eye(d))))


def check_unitary(u: np.ndarray, tol: float = TOL_BUILD) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitary(f"expected a square matrix, got shape {u.shape}")
    err = unitarity_error(u)
    if not err <= tol:
        raise NonUnitary(f"||U U^dagger - I||_max = {err:.3e} exceeds {tol:.1e}")
    return u


def hermitian_eigenvalues(m: np.ndarray, tol: float = TOL_OP) -> np.ndarray:
    """Real eigenvalues of a hermitian matrix, in descending order.

    Raises ``NonHermitianInput`` if ``max|m - m^dagger| > tol``.
    """
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise NonHermitianInput("matrix has non-finite entries")
    err = hermiticity_error(m)
    if not err <= tol:
        raise NonHermitianInput(f"hermiticity error {err:.3e} exceeds {tol:.1e}")
    return np.linalg.eigvalsh(m)[..., ::-1]


def check_density(rho: np.ndarray, tol: float = TOL_BUILD) -> np.ndarray:
    """Validate a single density matrix and return it as a complex array.

    Checks finiteness, hermiticity, unit trace and eigenvalues >= -tol.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        raise InvalidDensityMatrix(f"expected a 2x2 or 4x4 matrix, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidDensityMatrix("density matrix has non-finite entries")
    herm = hermiticity_error(rho)
    if herm > tol:
        raise InvalidDensityMatrix(f"not hermitian (error {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvalidDensityMatrix(f"trace {tr.real:.12g} differs from 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -tol:
        raise InvalidDensityMatrix(f"negative eigenvalue {lam_min:.3e}")
    return rho


def is_density(rho: np.ndarray, tol: float = TOL_BUILD) -> bool:
    try:
        check_density(rho, tol)
    except InvalidDensityMatrix:
        return False
    return True


def purity(rho: np.ndarray) -> float | np.ndarray:
    """``Tr(rho^2)``, computed as the squared Frobenius norm."""
    p = np.sum(np.abs(rho) ** 2, axis=(-2, -1))
    return float(p) if np.ndim(p) == 0 else p


def partial_transpose(rho: np.ndarray, subsystem: str = "B") -> np.ndarray:
    """Transpose the indices of one qubit of a (stack of) 4x4 matrices."""
    rho = np.asarray(rho)
    t = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))  # (..., a, b, a', b')
    if subsystem == "B":
        t = np.swapaxes(t, -3, -1)
    elif subsystem == "A":
        t = np.swapaxes(t, -4, -2)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(rho.shape)


def clamped_spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density matrix with tiny negatives set to zero."""
    lam = np.linalg.eigvalsh(rho)
    return np.where(lam < 0, 0.0, lam)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits, ``-sum lam log2 lam`` with ``0 log 0 = 0``."""
    rho = check_density(rho, TOL_OP)
    lam = clamped_spectrum(rho)
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def reduced_state(rho: np.ndarray, keep: str = "A") -> np.ndarray:
    """Partial trace of a 4x4 state down to qubit ``keep``."""
    t = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ajbj->ab", t)
    if keep == "B":
        return np.einsum("iaib->ab", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def conjugate(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``U rho U^dagger`` for a unitary ``U`` and a density matrix ``rho``."""
    u = check_unitary(u)
    rho = check_density(rho, TOL_OP)
    out = u @ rho @ dagger(u)
    # restore exact hermiticity lost to rounding
    return 0.5 * (out + dagger(out))


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
