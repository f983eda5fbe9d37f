"""Scan engines: entangling power over random separable inputs, and the
inverse MEMS-reachability sweep over kernel grids.

Work is split into independent items (purity bins, grid cells). Each item
derives its random stream from ``(seed, item index)`` so results do not
depend on how many workers run them.
"""
from __future__ import annotations

import math
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .entanglement import TOL_SEP, eof_batch, eof_from_concurrence
from .errors import ConfigInvalid
from .gates import CartanLike, CartanVector, as_cartan, cartan_kernel, rotation_stack
from .qmat import I2, PAULI, dagger, partial_transpose
from .states import (
    INV_SQRT3,
    TWO_THIRDS,
    flip_b,
    gamma_from_purity,
    mems,
    mems_affine,
    random_cc_batch,
    random_cc_raw_batch,
    random_product_batch,
    rank_for_purity,
    source_c,
    source_r2,
    source_r3,
)

SOURCE_FAMILIES = ("cc", "product")
SAMPLING_MODES = ("exact", "binned")
GAMMA_GRIDS = ("midpoint", "endpoint")


# --- configs and results -------------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    """Entangling-power scan over one separable source family.

    ``sampling="exact"`` draws every sample at the bin's center purity;
    ``"binned"`` draws unconstrained states and bins them by purity.
    ``basis_step=None`` samples classical-classical bases uniformly.
    """

    gate: CartanVector = CartanVector(math.pi / 8, math.pi / 8, 0.0)
    source_family: str = "cc"
    mu_start: float = 1.0 / 3.0
    mu_stop: float = 1.0
    mu_step: float = 0.01
    samples_per_bin: int = 1000
    basis_step: float | None = 0.1 * math.pi
    seed: int = 0
    oracle_seeding: bool = False
    sampling: str = "exact"

    def validate(self) -> "ScanConfig":
        if not isinstance(self.gate, CartanVector):
            raise ConfigInvalid("gate must be a CartanVector")
        if self.source_family not in SOURCE_FAMILIES:
            raise ConfigInvalid(f"source_family must be one of {SOURCE_FAMILIES}")
        if self.sampling not in SAMPLING_MODES:
            raise ConfigInvalid(f"sampling must be one of {SAMPLING_MODES}")
        if not (self.mu_step > 0 and math.isfinite(self.mu_step)):
            raise ConfigInvalid("mu_step must be > 0")
        if not (0.25 <= self.mu_start < self.mu_stop <= 1.0):
            raise ConfigInvalid("need 1/4 <= mu_start < mu_stop <= 1")
        if int(self.samples_per_bin) != self.samples_per_bin or self.samples_per_bin < 1:
            raise ConfigInvalid("samples_per_bin must be a positive integer")
        if self.basis_step is not None and not self.basis_step > 0:
            raise ConfigInvalid("basis_step must be > 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigInvalid("seed must fit in 64 bits")
        return self


@dataclass(frozen=True)
class InverseScanConfig:
    """Inverse reachability: can local rotations plus ``U_c^dagger`` make a MEMS separable?

    ``gamma_grid="midpoint"`` samples the cell centers of a ``gamma_step``
    partition of [0, 1], so each point carries equal length of the gamma
    range; ``"endpoint"`` uses ``0, step, ..., 1``. ``flip_b`` expresses the
    MEMS with qubit B relabeled, the basis in which the analytic sources map
    onto it.
    """

    alpha_z: float = 0.0
    alpha_grid_step: float = math.pi / 40
    rot_axes: tuple[str, str] = ("z", "z")
    rot_step: float = math.pi / 100
    gamma_step: float = 0.02
    tol_sep: float = TOL_SEP
    mems_phi: float = 0.0
    gamma_grid: str = "midpoint"
    flip_b: bool = True

    def validate(self) -> "InverseScanConfig":
        for name in ("alpha_grid_step", "rot_step", "gamma_step"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ConfigInvalid(f"{name} must be > 0")
        if self.gamma_step > 1:
            raise ConfigInvalid("gamma_step must be <= 1")
        if len(self.rot_axes) != 2 or any(a not in PAULI for a in self.rot_axes):
            raise ConfigInvalid(f"rot_axes must be two of x, y, z; got {self.rot_axes!r}")
        if not self.tol_sep >= 0:
            raise ConfigInvalid("tol_sep must be >= 0")
        if self.gamma_grid not in GAMMA_GRIDS:
            raise ConfigInvalid(f"gamma_grid must be one of {GAMMA_GRIDS}")
        if not (math.isfinite(self.alpha_z) and math.isfinite(self.mems_phi)):
            raise ConfigInvalid("alpha_z and mems_phi must be finite")
        return self


@dataclass
class EpCurve:
    mu: np.ndarray
    ep: np.ndarray
    n_samples: np.ndarray

    def rows(self):
        for m, e, n in zip(self.mu, self.ep, self.n_samples):
            yield float(m), float(e), int(n)


@dataclass
class ReachMap:
    alpha_x: np.ndarray
    alpha_y: np.ndarray
    fraction_all: np.ndarray
    fraction_rank2: np.ndarray
    fraction_rank3: np.ndarray
    counts: np.ndarray = field(repr=False)  # (n_cells, 4): succ2, n2, succ3, n3

    def rows(self):
        for row in zip(
            self.alpha_x, self.alpha_y, self.fraction_all, self.fraction_rank2, self.fraction_rank3
        ):
            yield tuple(float(v) for v in row)


# --- shared helpers -----------------------------------------------------------------

def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def item_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def mu_bins(start: float, stop: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Bin edges ``start + k step`` (last edge clipped to ``stop``) and centers."""
    n = int(math.ceil((stop - start) / step - 1e-9))
    edges = start + np.arange(n + 1) * step
    edges[-1] = stop
    return edges, 0.5 * (edges[:-1] + edges[1:])


def mems_eof(mu: float) -> float:
    gamma = gamma_from_purity(mu, rank_for_purity(mu))
    # concurrence of a MEMS equals gamma
    return float(eof_from_concurrence(gamma))


def mems_eof_curve(mu_grid: Iterable[float]) -> EpCurve:
    mu = np.asarray(list(mu_grid), dtype=float)
    ep = np.array([mems_eof(m) for m in mu])
    return EpCurve(mu, ep, np.zeros(mu.size, dtype=int))


# Pauli frames and transposition preserve separability and purity.
_PAULI_FRAMES = [np.kron(a, b) for a in (I2, *PAULI.values()) for b in (I2, *PAULI.values())]


def analytic_sources(mu: float) -> list[np.ndarray]:
    """Separable candidates at purity ``mu`` built from the analytic sources.

    Each valid source is added in all local Pauli frames and transposed.
    """
    base = []
    rank = rank_for_purity(mu)
    gamma = gamma_from_purity(mu, rank)
    if rank == 2:
        base.append(source_r2(gamma))
    if mu <= 5.0 / 9.0 + 1e-12:
        g3 = gamma_from_purity(mu, 3)
        base.append(source_r3(min(g3, TWO_THIRDS)))
        if g3 <= INV_SQRT3 + 1e-12:
            base.append(source_c(min(g3, INV_SQRT3)))
    out = []
    for rho in base:
        for r in (rho, rho.T):
            out.extend(f @ r @ f for f in _PAULI_FRAMES)
    return out


# --- entangling-power scan --------------------------------------------------------

def _sample_exact(cfg: ScanConfig, mu: float, rng: np.random.Generator) -> np.ndarray:
    if cfg.source_family == "cc":
        return random_cc_batch(mu, cfg.samples_per_bin, rng, cfg.basis_step)
    return random_product_batch(mu, cfg.samples_per_bin, rng)


def _ep_bin(args) -> tuple[float, int]:
    cfg, index, mu = args
    u = cartan_kernel(cfg.gate)
    rng = item_rng(cfg.seed, index)
    rhos = _sample_exact(cfg, mu, rng)
    n = len(rhos)
    if cfg.oracle_seeding:
        seeds = analytic_sources(mu)
        rhos = np.concatenate([rhos, np.array(seeds)])
    out = u @ rhos @ dagger(u)
    return float(np.max(eof_batch(out))), n


def _ep_chunk_binned(args) -> tuple[np.ndarray, np.ndarray]:
    cfg, index, n, edges = args
    u = cartan_kernel(cfg.gate)
    rng = item_rng(cfg.seed, index)
    if cfg.source_family == "cc":
        rhos = random_cc_raw_batch(n, rng, cfg.basis_step)
    else:
        # local purities on the 0.01 grid of [1/2, 1]
        grid = np.round(np.arange(50, 101) / 100.0, 2)
        mu_a = rng.choice(grid, size=n)
        mu_b = rng.choice(grid, size=n)
        rhos = np.concatenate(
            [random_product_batch(a * b, 1, rng) for a, b in zip(mu_a, mu_b)]
        )
    mu = np.sum(np.abs(rhos) ** 2, axis=(1, 2))
    vals = eof_batch(u @ rhos @ dagger(u))
    # an edge value goes to the lower bin
    idx = np.searchsorted(edges, mu, side="left") - 1
    nb = len(edges) - 1
    best = np.zeros(nb)
    count = np.zeros(nb, dtype=int)
    ok = (idx >= 0) & (idx < nb)
    np.maximum.at(best, idx[ok], vals[ok])
    np.add.at(count, idx[ok], 1)
    return best, count


BINNED_CHUNK = 2000


def ep_scan(cfg: ScanConfig, threads: int = 1) -> EpCurve:
    """Maximum EOF reached by the gate from sampled separable inputs, per purity bin."""
    cfg.validate()
    edges, centers = mu_bins(cfg.mu_start, cfg.mu_stop, cfg.mu_step)
    if cfg.sampling == "exact":
        results = _map(_ep_bin, [(cfg, i, float(m)) for i, m in enumerate(centers)], threads)
        ep = np.array([r[0] for r in results])
        n = np.array([r[1] for r in results], dtype=int)
    else:
        total = cfg.samples_per_bin * len(centers)
        sizes = [BINNED_CHUNK] * (total // BINNED_CHUNK)
        if total % BINNED_CHUNK:
            sizes.append(total % BINNED_CHUNK)
        items = [(cfg, i, s, edges) for i, s in enumerate(sizes)]
        results = _map(_ep_chunk_binned, items, threads)
        ep = np.max([r[0] for r in results], axis=0)
        n = np.sum([r[1] for r in results], axis=0)
        if cfg.oracle_seeding:
            u = cartan_kernel(cfg.gate)
            for k, m in enumerate(centers):
                seeds = np.array(analytic_sources(float(m)))
                ep[k] = max(ep[k], float(np.max(eof_batch(u @ seeds @ dagger(u)))))
    return EpCurve(centers, np.clip(ep, 0.0, 1.0), n)


# --- inverse reachability ---------------------------------------------------------

def gamma_points(cfg: InverseScanConfig) -> np.ndarray:
    n = int(round(1.0 / cfg.gamma_step))
    if cfg.gamma_grid == "midpoint":
        n = max(n, 1)
        return (np.arange(n) + 0.5) / n
    return np.linspace(0.0, 1.0, n + 1)


def rotation_angles(step: float) -> np.ndarray:
    n = max(1, int(math.ceil(2 * math.pi / step - 1e-9)))
    return np.arange(n) * step


@lru_cache(maxsize=4)
def local_pairs(cfg: InverseScanConfig) -> np.ndarray:
    """All ``L_A (x) L_B`` on the rotation grid, shape ``(n^2, 4, 4)``."""
    angles = rotation_angles(cfg.rot_step)
    ra = rotation_stack(cfg.rot_axes[0], angles)
    rb = rotation_stack(cfg.rot_axes[1], angles)
    n = len(angles)
    return np.einsum("iab,jcd->ijacbd", ra, rb).reshape(n * n, 4, 4)


def _target_state(cfg: InverseScanConfig, gamma: float) -> np.ndarray:
    rho = mems(gamma, cfg.mems_phi)
    return flip_b(rho) if cfg.flip_b else rho


@lru_cache(maxsize=4)
def rotated_mems_branches(cfg: InverseScanConfig) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Per rank: ``vec(L r0 L^dag)`` and ``vec(L r1 L^dag)`` over all rotation pairs.

    The MEMS is affine in gamma on each rank branch, so the rotated state is
    ``R0 + gamma R1`` with these two ``(n_pairs, 16)`` arrays.
    """
    pairs = local_pairs(cfg)
    pd = dagger(pairs)
    out = {}
    for rank in (2, 3):
        parts = mems_affine(rank, cfg.mems_phi)
        if cfg.flip_b:
            parts = tuple(flip_b(p) for p in parts)
        out[rank] = tuple(np.ascontiguousarray((pairs @ p @ pd).reshape(-1, 16)) for p in parts)
    return out


def pt_superoperator(u: np.ndarray) -> np.ndarray:
    """16x16 ``S`` with ``vec(PT_B(U^dag R U)) = vec(R) @ S`` (row-major vec)."""
    basis = np.eye(16, dtype=complex).reshape(16, 4, 4)
    return partial_transpose(dagger(u) @ basis @ u, "B").reshape(16, 16)


def det4(a) -> np.ndarray:
    """Determinant of 4x4 matrices by 2x2 minors (Laplace expansion).

    ``a`` is indexable as ``a[4*i + j]`` for entry ``(i, j)``, each entry an
    array over the stack.
    """
    s0 = a[0] * a[5] - a[4] * a[1]
    s1 = a[0] * a[6] - a[4] * a[2]
    s2 = a[0] * a[7] - a[4] * a[3]
    s3 = a[1] * a[6] - a[5] * a[2]
    s4 = a[1] * a[7] - a[5] * a[3]
    s5 = a[2] * a[7] - a[6] * a[3]
    c5 = a[10] * a[15] - a[14] * a[11]
    c4 = a[9] * a[15] - a[13] * a[11]
    c3 = a[9] * a[14] - a[13] * a[10]
    c2 = a[8] * a[15] - a[12] * a[11]
    c1 = a[8] * a[14] - a[12] * a[10]
    c0 = a[8] * a[13] - a[12] * a[9]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


_DIAG = (0, 5, 10, 15)
DET_SLACK = 1e-13


def any_ppt(cols: np.ndarray, tol: float) -> bool:
    """True if some matrix has min eigenvalue >= -tol.

    ``cols`` holds a stack of hermitian 4x4 partial transposes as a
    ``(16, n)`` array of row-major entries. Such a matrix has at most one
    negative eigenvalue, so ``det(pt + tol I)`` is negative exactly when the
    minimum eigenvalue is below ``-tol``. The determinant screens;
    ``eigvalsh`` makes the final call, best determinant first.
    """
    shifted = cols.copy()
    shifted[list(_DIAG)] += tol
    det = det4(shifted).real
    cand = np.flatnonzero(det >= -DET_SLACK)
    if cand.size == 0:
        return False
    cand = cand[np.argsort(-det[cand], kind="stable")]
    for s in range(0, cand.size, 64):
        block = shifted[:, cand[s : s + 64]].T.reshape(-1, 4, 4)
        if np.any(np.linalg.eigvalsh(block)[:, 0] >= 0.0):
            return True
    return False


def _reach_counts(args) -> tuple[int, int, int, int]:
    cfg, gate = args
    branches = rotated_mems_branches(cfg)
    sup_t = pt_superoperator(cartan_kernel(gate)).T
    mapped = {
        rank: (np.ascontiguousarray(sup_t @ r0.T), np.ascontiguousarray(sup_t @ r1.T))
        for rank, (r0, r1) in branches.items()
    }
    succ2 = n2 = succ3 = n3 = 0
    for g in gamma_points(cfg):
        rank = 2 if g >= TWO_THIRDS else 3
        p0, p1 = mapped[rank]
        ok = any_ppt(p0 + g * p1, cfg.tol_sep)
        if rank == 2:
            n2 += 1
            succ2 += ok
        else:
            n3 += 1
            succ3 += ok
    return succ2, n2, succ3, n3


def _fractions(succ2: int, n2: int, succ3: int, n3: int) -> tuple[float, float, float]:
    f_all = (succ2 + succ3) / (n2 + n3)
    f2 = succ2 / n2 if n2 else 0.0
    f3 = succ3 / n3 if n3 else 0.0
    return f_all, f2, f3


def inverse_reach_fraction(gate: CartanLike, cfg: InverseScanConfig) -> tuple[float, float, float]:
    """Share of the gamma grid on which the gate reaches a separable state.

    Returns ``(all, rank 2, rank 3)``; rank 2 means ``gamma >= 2/3``.
    """
    cfg.validate()
    return _fractions(*_reach_counts((cfg, as_cartan(gate))))


def alpha_grid(step: float, hi: float = math.pi / 4) -> np.ndarray:
    n = int(math.floor(hi / step + 1e-9))
    return np.arange(n + 1) * step


def weyl_sweep(alpha_z: float, cfg: InverseScanConfig, threads: int = 1) -> ReachMap:
    """``inverse_reach_fraction`` on every ``(alpha_x, alpha_y)`` of ``[0, pi/4]^2``."""
    cfg.validate()
    grid = alpha_grid(cfg.alpha_grid_step)
    cells = [(ax, ay) for ax in grid for ay in grid]
    items = [(cfg, CartanVector(ax, ay, alpha_z)) for ax, ay in cells]
    counts = np.array(_map(_reach_counts, items, threads), dtype=int)
    fr = np.array([_fractions(*c) for c in counts])
    return ReachMap(
        alpha_x=np.array([c[0] for c in cells]),
        alpha_y=np.array([c[1] for c in cells]),
        fraction_all=fr[:, 0],
        fraction_rank2=fr[:, 1],
        fraction_rank3=fr[:, 2],
        counts=counts,
    )
