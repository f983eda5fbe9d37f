"""Two-qubit states: maximally entangled mixed states (MEMS), the analytic
separable source states, and samplers for separable families.

All constructors return 4x4 ``complex128`` arrays. Samplers take an explicit
``numpy.random.Generator``; nothing here touches global random state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GammaOutOfRange, PurityOutOfRange, UnreachablePurity
from .qmat import I2, PAULI, SX, dagger, tensor_product

TWO_THIRDS = 2.0 / 3.0
INV_SQRT3 = 1.0 / math.sqrt(3.0)
RANK_BOUNDARY_MU = 5.0 / 9.0
_EDGE = 1e-12  # slack on closed range checks

# Relabels qubit B (|0> <-> |1>). The analytic source states map onto MEMS
# under the kernel only after this relabeling of both sides; see
# ``theorem.py``.
FLIP_B = tensor_product(I2, SX)


def flip_b(rho: np.ndarray) -> np.ndarray:
    return FLIP_B @ rho @ FLIP_B


def _check_gamma(gamma: float, lo: float, hi: float, what: str) -> float:
    gamma = float(gamma)
    if not (lo - _EDGE <= gamma <= hi + _EDGE):
        raise GammaOutOfRange(f"{what}: gamma={gamma!r} outside [{lo:.6g}, {hi:.6g}]")
    return min(max(gamma, lo), hi)


@dataclass(frozen=True)
class MemsParams:
    gamma: float
    phi: float = 0.0

    def __post_init__(self):
        _check_gamma(self.gamma, 0.0, 1.0, "MEMS")

    @property
    def rank(self) -> int:
        return mems_rank(self.gamma)

    def matrix(self) -> np.ndarray:
        return mems(self.gamma, self.phi)


def mems_g(gamma: float) -> float:
    return gamma / 2 if gamma >= TWO_THIRDS else 1.0 / 3.0


def mems_rank(gamma: float) -> int:
    """2 on the ``gamma >= 2/3`` branch, 3 below."""
    return 2 if gamma >= TWO_THIRDS else 3


def mems(gamma: float, phi: float = 0.0) -> np.ndarray:
    """X-shaped MEMS with coherence ``gamma/2 e^{-i phi}`` between |00> and |11>."""
    gamma = _check_gamma(gamma, 0.0, 1.0, "MEMS")
    g = mems_g(gamma)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = g
    rho[1, 1] = 1 - 2 * g
    rho[0, 3] = 0.5 * gamma * np.exp(-1j * phi)
    rho[3, 0] = np.conj(rho[0, 3])
    return rho


def mems_affine(rank: int, phi: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``(r0, r1)`` with ``mems(gamma, phi) == r0 + gamma * r1`` on one rank branch."""
    coh = np.zeros((4, 4), dtype=complex)
    coh[0, 3] = 0.5 * np.exp(-1j * phi)
    coh[3, 0] = np.conj(coh[0, 3])
    if rank == 3:
        return np.diag([1 / 3, 1 / 3, 0, 1 / 3]).astype(complex), coh
    if rank == 2:
        return np.diag([0, 1, 0, 0]).astype(complex), np.diag([0.5, -1, 0, 0.5]) + coh
    raise ValueError(f"rank must be 2 or 3, got {rank!r}")


def mems_purity(gamma: float) -> float:
    gamma = _check_gamma(gamma, 0.0, 1.0, "MEMS")
    if gamma >= TWO_THIRDS:
        return gamma**2 + (1 - gamma) ** 2
    return 1.0 / 3.0 + gamma**2 / 2


def gamma_from_purity(mu: float, rank: int) -> float:
    """Invert ``mems_purity`` on the given rank branch."""
    mu = float(mu)
    if rank == 2:
        if not (RANK_BOUNDARY_MU - _EDGE <= mu <= 1 + _EDGE):
            raise PurityOutOfRange(f"rank-2 MEMS need purity in [5/9, 1], got {mu}")
        return 0.5 * (1 + math.sqrt(max(2 * mu - 1, 0.0)))
    if rank == 3:
        if not (1.0 / 3.0 - _EDGE <= mu <= RANK_BOUNDARY_MU + _EDGE):
            raise PurityOutOfRange(f"rank-3 MEMS need purity in [1/3, 5/9], got {mu}")
        return math.sqrt(max(2 * mu - TWO_THIRDS, 0.0))
    raise ValueError(f"rank must be 2 or 3, got {rank!r}")


def rank_for_purity(mu: float) -> int:
    return 2 if mu >= RANK_BOUNDARY_MU else 3


def mems_for_purity(mu: float, phi: float = 0.0) -> np.ndarray:
    return mems(gamma_from_purity(mu, rank_for_purity(mu)), phi)


def source_r2(gamma: float) -> np.ndarray:
    """Product source ``diag(1-gamma, gamma) (x) diag(0, 1)`` for the rank-2 branch."""
    gamma = _check_gamma(gamma, TWO_THIRDS, 1.0, "rank-2 source")
    return np.diag([0.0, 1 - gamma, 0.0, gamma]).astype(complex)


def source_r3(gamma: float) -> np.ndarray:
    gamma = _check_gamma(gamma, 0.0, TWO_THIRDS, "rank-3 source")
    third = 1.0 / 3.0
    return np.diag([third - gamma / 2, third, 0.0, third + gamma / 2]).astype(complex)


def source_c(gamma: float) -> np.ndarray:
    """Separable source with a coherent |01>,|10> block; valid for gamma <= 1/sqrt(3)."""
    gamma = _check_gamma(gamma, 0.0, INV_SQRT3, "rho_c source")
    third = 1.0 / 3.0
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = third + gamma / 2
    rho[3, 3] = third - gamma / 2
    rho[1, 1] = rho[2, 2] = 1.0 / 6.0
    rho[1, 2] = 1j / 6.0
    rho[2, 1] = -1j / 6.0
    return rho


# --- separable families ------------------------------------------------------

def bloch_projectors(theta, phi) -> np.ndarray:
    """Projectors onto ``+n`` and ``-n``; shape ``(..., 2, 2, 2)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
        axis=-1,
    )
    return np.stack([bloch_state(n), bloch_state(-n)], axis=-3)


def bloch_state(r) -> np.ndarray:
    """``(I + r . sigma)/2`` for Bloch vectors ``r`` of shape ``(..., 3)``."""
    r = np.asarray(r, dtype=float)
    sig = np.stack([PAULI["x"], PAULI["y"], PAULI["z"]])
    return 0.5 * (I2 + np.einsum("...k,kab->...ab", r, sig))


def cc_density_batch(theta_a, phi_a, theta_b, phi_b, p) -> np.ndarray:
    """``sum_ij p_ij |a_i><a_i| (x) |b_j><b_j|`` for stacks of parameters.

    ``p`` has shape ``(n, 4)`` in the order ``(p11, p12, p21, p22)``.
    """
    pa = bloch_projectors(theta_a, phi_a)
    pb = bloch_projectors(theta_b, phi_b)
    p = np.asarray(p, dtype=float).reshape(-1, 2, 2)
    rho = np.einsum("nij,niab,njcd->nacbd", p, pa, pb)
    return rho.reshape(-1, 4, 4)


@dataclass(frozen=True)
class CcState:
    """Classical-classical state; ``|a_1>``, ``|b_1>`` given by Bloch angles."""

    theta_a: float
    phi_a: float
    theta_b: float
    phi_b: float
    p: tuple[float, float, float, float]

    @property
    def purity(self) -> float:
        return float(np.sum(np.square(self.p)))

    def density(self) -> np.ndarray:
        return cc_density_batch(
            [self.theta_a], [self.phi_a], [self.theta_b], [self.phi_b], [self.p]
        )[0]


@dataclass(frozen=True)
class ProductState:
    bloch_a: tuple[float, float, float]
    bloch_b: tuple[float, float, float]

    def __post_init__(self):
        for name in ("bloch_a", "bloch_b"):
            if np.linalg.norm(getattr(self, name)) > 1 + 1e-12:
                raise PurityOutOfRange(f"{name} has norm > 1")

    @property
    def purity_a(self) -> float:
        return 0.5 * (1 + float(np.dot(self.bloch_a, self.bloch_a)))

    @property
    def purity_b(self) -> float:
        return 0.5 * (1 + float(np.dot(self.bloch_b, self.bloch_b)))

    def density(self) -> np.ndarray:
        return tensor_product(bloch_state(self.bloch_a), bloch_state(self.bloch_b))


def simplex_at_purity(target_mu: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` probability 4-vectors with ``sum p^2 == target_mu``.

    Draw ``p0`` uniformly on the simplex. If its purity is at least the target,
    contract it toward the uniform point ``u``:
    ``p = u + t (p0 - u)`` with ``t = sqrt((mu - 1/4) / (mu0 - 1/4))``.
    Otherwise move it toward its dominant vertex ``v`` along ``v + t (p0 - v)``,
    solving the quadratic for the target purity.
    """
    target_mu = float(target_mu)
    if not (0.25 - _EDGE <= target_mu <= 1 + _EDGE):
        raise UnreachablePurity(f"purity {target_mu} outside [1/4, 1]")
    target_mu = min(max(target_mu, 0.25), 1.0)
    p0 = rng.dirichlet(np.ones(4), size=n)
    mu0 = np.sum(p0 * p0, axis=1)
    out = np.empty_like(p0)

    down = mu0 >= target_mu
    if np.any(down):
        excess = mu0[down] - 0.25
        t = np.sqrt(np.divide(target_mu - 0.25, excess, out=np.zeros_like(excess), where=excess > 0))
        out[down] = 0.25 + t[:, None] * (p0[down] - 0.25)

    up = ~down
    if np.any(up):
        q = p0[up]
        k = np.argmax(q, axis=1)
        v = np.zeros_like(q)
        v[np.arange(len(q)), k] = 1.0
        d = q - v
        a = np.sum(d * d, axis=1)
        b = 1.0 - q[np.arange(len(q)), k]
        disc = np.maximum(b * b - a * (1.0 - target_mu), 0.0)
        t = (b - np.sqrt(disc)) / a
        out[up] = v + t[:, None] * d

    return np.clip(out, 0.0, None)


def _basis_angles(n: int, rng: np.random.Generator, basis_step: float | None):
    if basis_step is None:
        # uniform on the sphere
        theta = np.arccos(rng.uniform(-1.0, 1.0, size=n))
        phi = rng.uniform(0.0, 2 * math.pi, size=n)
        return theta, phi
    n_theta = int(round(math.pi / basis_step)) + 1
    n_phi = max(1, int(round(2 * math.pi / basis_step)))
    theta = rng.integers(0, n_theta, size=n) * basis_step
    phi = rng.integers(0, n_phi, size=n) * basis_step
    return np.minimum(theta, math.pi), phi


def random_cc_batch(
    target_mu: float,
    n: int,
    rng: np.random.Generator,
    basis_step: float | None = 0.1 * math.pi,
) -> np.ndarray:
    """Densities of ``n`` random classical-classical states at exact purity.

    ``basis_step`` discretizes the polar angle on ``[0, pi]`` and the azimuth
    on ``[0, 2 pi)``; ``None`` draws local bases uniformly on the sphere.
    """
    p = simplex_at_purity(target_mu, n, rng)
    ta, pa = _basis_angles(n, rng, basis_step)
    tb, pb = _basis_angles(n, rng, basis_step)
    return cc_density_batch(ta, pa, tb, pb, p)


def random_cc(
    target_mu: float,
    rng: np.random.Generator,
    basis_step: float | None = 0.1 * math.pi,
) -> CcState:
    p = simplex_at_purity(target_mu, 1, rng)[0]
    ta, pa = _basis_angles(1, rng, basis_step)
    tb, pb = _basis_angles(1, rng, basis_step)
    return CcState(float(ta[0]), float(pa[0]), float(tb[0]), float(pb[0]), tuple(map(float, p)))


def random_cc_raw_batch(
    n: int, rng: np.random.Generator, basis_step: float | None = 0.1 * math.pi
) -> np.ndarray:
    """Classical-classical states with flat-Dirichlet weights (uncontrolled purity)."""
    p = rng.dirichlet(np.ones(4), size=n)
    ta, pa = _basis_angles(n, rng, basis_step)
    tb, pb = _basis_angles(n, rng, basis_step)
    return cc_density_batch(ta, pa, tb, pb, p)


def _check_local_purity(mu: float, name: str) -> float:
    mu = float(mu)
    if not (0.5 - _EDGE <= mu <= 1 + _EDGE):
        raise PurityOutOfRange(f"{name}={mu} outside [1/2, 1]")
    return min(max(mu, 0.5), 1.0)


def _unit_vectors(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_product(mu_a: float, mu_b: float, rng: np.random.Generator) -> ProductState:
    mu_a = _check_local_purity(mu_a, "mu_a")
    mu_b = _check_local_purity(mu_b, "mu_b")
    dirs = _unit_vectors(2, rng)
    ra = math.sqrt(max(2 * mu_a - 1, 0.0))
    rb = math.sqrt(max(2 * mu_b - 1, 0.0))
    return ProductState(tuple(ra * dirs[0]), tuple(rb * dirs[1]))


def random_product_batch(target_mu: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Product states with total purity ``target_mu = mu_a * mu_b``.

    ``mu_a`` is uniform over the range that keeps both factors physical.
    """
    target_mu = float(target_mu)
    if not (0.25 - _EDGE <= target_mu <= 1 + _EDGE):
        raise UnreachablePurity(f"purity {target_mu} outside [1/4, 1]")
    lo = max(0.5, target_mu)
    hi = min(1.0, 2 * target_mu)
    mu_a = rng.uniform(lo, hi, size=n) if hi > lo else np.full(n, lo)
    mu_b = np.clip(target_mu / mu_a, 0.5, 1.0)
    ra = np.sqrt(np.clip(2 * mu_a - 1, 0.0, None))[:, None] * _unit_vectors(n, rng)
    rb = np.sqrt(np.clip(2 * mu_b - 1, 0.0, None))[:, None] * _unit_vectors(n, rng)
    rho_a = bloch_state(ra)
    rho_b = bloch_state(rb)
    return np.einsum("nab,ncd->nacbd", rho_a, rho_b).reshape(n, 4, 4)


def random_density(rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt random state ``G G^dagger / Tr(G G^dagger)``."""
    return random_density_batch(1, rng)[0]


def random_density_batch(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, 4, 4)) + 1j * rng.normal(size=(n, 4, 4))
    rho = g @ dagger(g)
    rho /= np.trace(rho, axis1=1, axis2=2).real[:, None, None]
    return 0.5 * (rho + dagger(rho))


def random_unitary(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
