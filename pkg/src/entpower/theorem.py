"""Direct-evaluation check that specific kernels map separable sources onto MEMS.

Three identities are verified elementwise over grids of the free kernel
component ``chi`` and the MEMS parameter ``gamma``:

``rank2``
    ``U_c(pi/8, pi/8, chi)`` takes the product source ``source_r2(gamma)`` to
    ``mems(gamma, pi/2)`` for ``2/3 <= gamma <= 1``.
``rank3``
    the same kernel takes the diagonal source ``source_r3(gamma)`` to
    ``mems(gamma, pi/2)`` for ``0 <= gamma <= 2/3``.
``coherent``
    ``U_c(pi/4, 0, chi)`` relates ``source_c(gamma)`` and ``mems(gamma, pi/2)``
    for ``0 <= gamma <= 1/sqrt(3)``.

The source and MEMS matrices are written with qubit B's computational labels
exchanged relative to the kernel's Pauli basis, so both sides are relabeled
by ``flip_b`` before comparing. The ``coherent`` identity holds with the
kernel applied as ``U^dagger rho U``; ``U_c^dagger(pi/4, 0, chi)`` equals
``U_c(-pi/4, 0, -chi)``, which lies in the same local class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gates import CartanLike, as_cartan, cartan_kernel
from .qmat import dagger
from .states import INV_SQRT3, TWO_THIRDS, flip_b, mems, source_c, source_r2, source_r3

IDENTITIES = ("rank2", "rank3", "coherent")
TARGET_PHI = math.pi / 2


@dataclass
class TheoremReport:
    deviations: dict[str, float] = field(default_factory=dict)
    n_points: dict[str, int] = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values()) if self.deviations else 0.0


def default_chi_grid(step: float = math.pi / 40) -> np.ndarray:
    n = int(round(math.pi / step))
    return np.arange(n) * step


def default_gamma_grid(step: float = 0.01) -> np.ndarray:
    """``0, step, 2 step, ... <= 1`` plus the branch endpoints 2/3, 1/sqrt(3), 1."""
    n = int(math.floor(1.0 / step + 1e-9))
    pts = np.concatenate([np.arange(n + 1) * step, [TWO_THIRDS, INV_SQRT3, 1.0]])
    return np.unique(np.clip(pts, 0.0, 1.0))


def _deviation(u: np.ndarray, rho: np.ndarray, target: np.ndarray, inverse: bool) -> float:
    out = dagger(u) @ rho @ u if inverse else u @ rho @ dagger(u)
    return float(np.max(np.abs(out - target)))


def theorem_deviations(
    chi_grid,
    gamma_grid,
    r_gate: CartanLike = (math.pi / 8, math.pi / 8, 0.0),
    c_gate: CartanLike = (math.pi / 4, 0.0, 0.0),
) -> TheoremReport:
    """Max elementwise deviation for each identity.

    ``r_gate`` and ``c_gate`` give ``(alpha_x, alpha_y)`` of the kernels under
    test (their third component is ignored and replaced by each ``chi``); they
    exist so the check can be run against perturbed kernels.
    """
    chi_grid = np.atleast_1d(np.asarray(chi_grid, dtype=float))
    gamma_grid = np.atleast_1d(np.asarray(gamma_grid, dtype=float))
    if chi_grid.size == 0 or gamma_grid.size == 0:
        raise ValueError("chi_grid and gamma_grid must be nonempty")
    rx, ry, _ = as_cartan(r_gate)
    cx, cy, _ = as_cartan(c_gate)

    plan = [
        ("rank2", (rx, ry), source_r2, TWO_THIRDS, 1.0, False),
        ("rank3", (rx, ry), source_r3, 0.0, TWO_THIRDS, False),
        ("coherent", (cx, cy), source_c, 0.0, INV_SQRT3, True),
    ]
    report = TheoremReport()
    eps = 1e-12
    for name, (ax, ay), source, lo, hi, inverse in plan:
        gammas = gamma_grid[(gamma_grid >= lo - eps) & (gamma_grid <= hi + eps)]
        worst = 0.0
        for chi in chi_grid:
            u = cartan_kernel((ax, ay, chi))
            for g in gammas:
                rho = flip_b(source(g))
                target = flip_b(mems(g, TARGET_PHI))
                worst = max(worst, _deviation(u, rho, target, inverse))
        report.deviations[name] = worst
        report.n_points[name] = int(chi_grid.size * gammas.size)
    return report


def theorem_check(chi_grid=None, gamma_grid=None, **kwargs) -> float:
    """Largest deviation over all three identities (0 up to rounding)."""
    chi_grid = default_chi_grid() if chi_grid is None else chi_grid
    gamma_grid = default_gamma_grid() if gamma_grid is None else gamma_grid
    return theorem_deviations(chi_grid, gamma_grid, **kwargs).max_deviation
