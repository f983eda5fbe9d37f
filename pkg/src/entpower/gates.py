"""Cartan kernels, local rotations and local-equivalence invariants.

A two-qubit unitary is ``(L1 (x) L2) U_c(ax, ay, az) (L3 (x) L4)`` with the
nonlocal kernel ``U_c = exp(-i sum_k a_k sigma_k (x) sigma_k)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from .errors import EntPowerError
from .qmat import I2, I4, PAULI, check_unitary, tensor_product

HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4

SXSX = tensor_product(PAULI["x"], PAULI["x"])
SYSY = tensor_product(PAULI["y"], PAULI["y"])
SZSZ = tensor_product(PAULI["z"], PAULI["z"])

# Magic (Bell) basis, one state per column:
# (|00>+|11>, -i|00>+i|11>, |01>-|10>, -i|01>-i|10>) / sqrt(2)
MAGIC = np.array(
    [
        [1, -1j, 0, 0],
        [0, 0, 1, -1j],
        [0, 0, -1, -1j],
        [1, 1j, 0, 0],
    ],
    dtype=complex,
) / math.sqrt(2)


@dataclass(frozen=True)
class CartanVector:
    """Kernel parameters ``(alpha_x, alpha_y, alpha_z)`` in radians."""

    alpha_x: float
    alpha_y: float
    alpha_z: float

    def __post_init__(self):
        for name in ("alpha_x", "alpha_y", "alpha_z"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise EntPowerError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)

    def __iter__(self) -> Iterator[float]:
        return iter((self.alpha_x, self.alpha_y, self.alpha_z))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha_x, self.alpha_y, self.alpha_z)

    def in_pi_units(self) -> tuple[float, float, float]:
        return tuple(a / math.pi for a in self)  # type: ignore[return-value]


CartanLike = Union[CartanVector, Iterable[float]]


def as_cartan(v: CartanLike) -> CartanVector:
    if isinstance(v, CartanVector):
        return v
    vals = tuple(v)
    if len(vals) != 3:
        raise EntPowerError(f"a Cartan vector has 3 components, got {len(vals)}")
    return CartanVector(*vals)


@dataclass(frozen=True)
class LocalRotation:
    """Single-qubit rotation ``exp(-i angle/2 sigma_axis)``."""

    axis: str
    angle: float

    def __post_init__(self):
        if self.axis not in PAULI:
            raise EntPowerError(f"axis must be one of x, y, z; got {self.axis!r}")
        if not math.isfinite(self.angle):
            raise EntPowerError("rotation angle must be finite")


def pauli_exponential(alpha: float, pp: np.ndarray) -> np.ndarray:
    """``exp(-i alpha P)`` for an involution ``P`` (``P^2 = I``)."""
    return math.cos(alpha) * I4 - 1j * math.sin(alpha) * pp


def cartan_kernel(v: CartanLike) -> np.ndarray:
    """The 4x4 kernel ``U_c(v)``; the three factors commute."""
    ax, ay, az = as_cartan(v)
    return (
        pauli_exponential(ax, SXSX)
        @ pauli_exponential(ay, SYSY)
        @ pauli_exponential(az, SZSZ)
    )


def _fold(a: float) -> float:
    a = math.fmod(a, HALF_PI)
    if a < 0:
        a += HALF_PI
    if a >= HALF_PI:  # fmod round-off on the upper edge
        a -= HALF_PI
    if a > QUARTER_PI:
        a = HALF_PI - a
    return a


def canonicalize(v: CartanLike) -> CartanVector:
    """Reduce ``v`` into ``pi/4 >= ax >= ay >= az >= 0``.

    Each component is taken mod pi/2, reflected about pi/4 and the result is
    sorted. The reflection sends a kernel to its mirror image (complex
    conjugate class) when applied an odd number of times, so the output
    matches the input's local invariants up to ``G1 -> conj(G1)``; both have
    the same entangling power.
    """
    folded = sorted((_fold(a) for a in as_cartan(v)), reverse=True)
    return CartanVector(*folded)


def local_rotation_matrix(r: LocalRotation) -> np.ndarray:
    half = 0.5 * r.angle
    return math.cos(half) * I2 - 1j * math.sin(half) * PAULI[r.axis]


def rotation_stack(axis: str, angles: np.ndarray) -> np.ndarray:
    """Rotation matrices for many angles about one axis, shape ``(n, 2, 2)``."""
    half = 0.5 * np.asarray(angles, dtype=float)
    return (
        np.cos(half)[:, None, None] * I2
        - 1j * np.sin(half)[:, None, None] * PAULI[axis]
    )


def local_pair(ra: LocalRotation, rb: LocalRotation) -> np.ndarray:
    return tensor_product(local_rotation_matrix(ra), local_rotation_matrix(rb))


def local_invariants(u: np.ndarray) -> tuple[complex, float]:
    """Makhlin invariants ``(G1, G2)`` computed in the magic basis."""
    u = check_unitary(u)
    ub = MAGIC.conj().T @ u @ MAGIC
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(g2.real)


def invariants_close(
    u: np.ndarray, w: np.ndarray, atol: float = 1e-9, allow_mirror: bool = False
) -> bool:
    """True if ``u`` and ``w`` share local invariants within ``atol``.

    With ``allow_mirror`` the comparison also accepts ``G1(w) = conj(G1(u))``.
    """
    g1u, g2u = local_invariants(u)
    g1w, g2w = local_invariants(w)
    if abs(g2u - g2w) > atol:
        return False
    if abs(g1u - g1w) <= atol:
        return True
    return allow_mirror and abs(g1u.conjugate() - g1w) <= atol


_PI_FORM = re.compile(
    r"^(?P<sign>[+-]?)(?P<num>\d*\.?\d*(?:[eE][+-]?\d+)?)\*?pi(?:/(?P<den>\d*\.?\d+))?$"
)


def parse_angle(text: str) -> float:
    """Parse ``'0.125pi'``, ``'pi/6'``, ``'-0.25pi'`` or plain radians."""
    s = text.strip().lower().replace("π", "pi").replace(" ", "")
    if not s:
        raise ValueError("empty angle")
    m = _PI_FORM.match(s)
    if m:
        num = float(m["num"]) if m["num"] not in ("", ".") else 1.0
        den = float(m["den"]) if m["den"] else 1.0
        if den == 0:
            raise ValueError(f"zero denominator in angle {text!r}")
        val = num * math.pi / den
        return -val if m["sign"] == "-" else val
    if "pi" in s:
        raise ValueError(f"cannot parse angle {text!r}")
    val = float(s)
    if not math.isfinite(val):
        raise ValueError(f"angle must be finite: {text!r}")
    return val


def parse_cartan(text: str) -> CartanVector:
    parts = [p for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated angles, got {text!r}")
    return CartanVector(*(parse_angle(p) for p in parts))


def format_angle(a: float) -> str:
    return f"{a / math.pi:.12g}pi"
