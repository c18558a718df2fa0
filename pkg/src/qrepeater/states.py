"""Constructors for the two-qubit states used throughout the package.

Every constructor returns a 4x4 complex density matrix. Schmidt-type
parameters live in ``[1/2, 1]`` by convention; a value in ``(0, 1/2)``
describes the same state with its Schmidt branches swapped, so it is
accepted, reported through :class:`SchmidtBranchWarning`, and the state is
built literally.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .qcore import ket, proj

_SQ = 1.0 / np.sqrt(2.0)

BELL_LABELS = ("Phi+", "Psi+", "Phi-", "Psi-")
BELL_VECTORS = (
    _SQ * (ket("00") + ket("11")),
    _SQ * (ket("01") + ket("10")),
    _SQ * (ket("00") - ket("11")),
    _SQ * (ket("01") - ket("10")),
)

_PRODUCTS = ("00", "01", "10", "11")


class SchmidtBranchWarning(UserWarning):
    """A Schmidt-type parameter below 1/2 was normalized by a branch swap."""


def _check_unit(name: str, x: float, lo: float = 0.0, hi: float = 1.0) -> float:
    x = float(x)
    if not np.isfinite(x) or x < lo or x > hi:
        raise ValueError(f"{name}={x} outside [{lo}, {hi}]")
    return x


def normalize_schmidt(name: str, x: float, allow_one: bool = True) -> Tuple[float, bool]:
    """Map a Schmidt weight onto ``[1/2, 1]``.

    Returns
    -------
    value : float
        ``max(x, 1 - x)``.
    swapped : bool
        True when the branches had to be swapped.
    """
    x = _check_unit(name, x)
    swapped = x < 0.5
    value = 1.0 - x if swapped else x
    if value >= 1.0 and not allow_one:
        raise ValueError(f"{name}={x} gives a product state, outside [1/2, 1)")
    if swapped:
        warnings.warn(
            f"{name}={x} < 1/2 normalized to {value} by swapping Schmidt branches",
            SchmidtBranchWarning,
            stacklevel=3,
        )
    return value, swapped


def schmidt_vector(alpha: float, support: Tuple[str, str] = ("00", "11"), sign: int = 1) -> np.ndarray:
    """``sqrt(alpha)|s0> + sign * sqrt(1 - alpha)|s1>`` without range checks."""
    return np.sqrt(alpha) * ket(support[0]) + sign * np.sqrt(1.0 - alpha) * ket(support[1])


def nmes(alpha: float) -> np.ndarray:
    """Pure state ``sqrt(alpha)|00> + sqrt(1-alpha)|11>``."""
    normalize_schmidt("alpha", alpha)
    return proj(schmidt_vector(float(alpha)))


@dataclass(frozen=True)
class FamilyState:
    """Rank-two mixture of a product state and an orthogonal entangled state.

    Attributes
    ----------
    p : float
        Weight of the product component.
    delta : float
        Larger Schmidt weight of the entangled component.
    product_vector : str
        Computational product state carrying weight ``p``.
    entangled_support : tuple of str
        Product states spanning the entangled component, larger branch first.
    """

    p: float
    delta: float
    product_vector: str = "01"
    entangled_support: Tuple[str, str] = ("00", "11")

    def __post_init__(self):
        _check_unit("p", self.p)
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta={self.delta} outside (0, 1)")
        sup = tuple(self.entangled_support)
        if len(sup) != 2 or any(s not in _PRODUCTS for s in sup) or sup[0] == sup[1]:
            raise ValueError(f"invalid entangled support {sup}")
        if self.product_vector not in _PRODUCTS or self.product_vector in sup:
            raise ValueError(
                f"product vector {self.product_vector} must be orthogonal to support {sup}"
            )

    @property
    def concurrence(self) -> float:
        return 2.0 * np.sqrt(self.delta * (1.0 - self.delta)) * (1.0 - self.p)

    def matrix(self) -> np.ndarray:
        zeta = schmidt_vector(self.delta, self.entangled_support)
        return self.p * proj(ket(self.product_vector)) + (1.0 - self.p) * proj(zeta)


def family_state(
    p: float,
    delta: float,
    product_vector: str = "01",
    entangled_support: Tuple[str, str] = ("00", "11"),
) -> np.ndarray:
    """Noisy-segment state ``p|01><01| + (1-p)|zeta><zeta|``.

    ``zeta = sqrt(delta)|00> + sqrt(1-delta)|11>`` in the default frame.
    """
    _check_unit("p", p)
    normalize_schmidt("delta", delta, allow_one=False)
    return FamilyState(float(p), float(delta), product_vector, tuple(entangled_support)).matrix()


def bell(index: int) -> np.ndarray:
    """Bell projector in the order Phi+, Psi+, Phi-, Psi-."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Bell index {index} not in 0..3")
    return proj(BELL_VECTORS[index])


def werner(F: float) -> np.ndarray:
    """``F|Psi-><Psi-| + (1-F)/3`` times the remaining Bell projectors."""
    F = _check_unit("F", F)
    rest = (1.0 - F) / 3.0
    return F * bell(3) + rest * (bell(0) + bell(1) + bell(2))


def adc_kraus(p: float) -> Tuple[np.ndarray, np.ndarray]:
    """Kraus pair of the amplitude-damping channel with decay probability ``p``."""
    p = _check_unit("p", p)
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return k0, k1


def adc_apply(rho: np.ndarray, p: float, which: int = 1) -> np.ndarray:
    """Apply amplitude damping to qubit ``which`` (0 or 1) of a two-qubit state."""
    if which not in (0, 1):
        raise ValueError(f"subsystem index {which} not in (0, 1)")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("adc_apply expects a two-qubit state")
    out = np.zeros((4, 4), dtype=complex)
    eye = np.eye(2)
    for k in adc_kraus(p):
        big = np.kron(eye, k) if which == 1 else np.kron(k, eye)
        out += big @ rho @ big.conj().T
    return out


def photon_loss_state(p: float, omega: float, which: int = 1) -> np.ndarray:
    """Closed form of amplitude damping on ``sqrt(w)|01> + sqrt(1-w)|10>``.

    Damping qubit ``which`` leaves a pure part with weight ``1 - p*w``
    (second qubit) or ``1 - p*(1-w)`` (first qubit) and puts the remainder
    on ``|00>``.
    """
    p = _check_unit("p", p)
    w = _check_unit("omega", omega)
    if which == 1:
        a01, a10, lost = np.sqrt(w * (1.0 - p)), np.sqrt(1.0 - w), p * w
    elif which == 0:
        a01, a10, lost = np.sqrt(w), np.sqrt((1.0 - w) * (1.0 - p)), p * (1.0 - w)
    else:
        raise ValueError(f"subsystem index {which} not in (0, 1)")
    kept = 1.0 - lost
    if kept <= 0.0:
        return proj(ket("00"))
    omega_vec = (a01 * ket("01") + a10 * ket("10")) / np.sqrt(kept)
    return kept * proj(omega_vec) + lost * proj(ket("00"))


def white_noise_mix(rho: np.ndarray, q: float) -> np.ndarray:
    """``(1-q) rho + q I/4``."""
    q = _check_unit("q", q)
    return (1.0 - q) * np.asarray(rho, dtype=complex) + q * np.eye(4) / 4.0


def photon_loss_mix(psi: np.ndarray, q: float) -> np.ndarray:
    """``(1-q) psi + q |00><00|``."""
    q = _check_unit("q", q)
    return (1.0 - q) * np.asarray(psi, dtype=complex) + q * proj(ket("00"))


def psi_odd(alpha: float) -> np.ndarray:
    """Pure state ``sqrt(alpha)|01> + sqrt(1-alpha)|10>``."""
    normalize_schmidt("alpha", alpha)
    return proj(schmidt_vector(float(alpha), ("01", "10")))
