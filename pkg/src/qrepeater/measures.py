"""Two-qubit entanglement quantifiers and fidelity conversions."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .qcore import eigh_desc, magic_basis_transform, partial_transpose, MAGIC

_SY2 = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)
_SQ = 1.0 / np.sqrt(2.0)

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _as_two_qubit(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got shape {rho.shape}")
    return rho


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence.

    With ``rho = X X^dagger`` the lambda_i are the singular values of
    ``X^T (sy x sy) X``, which avoids square roots of tiny eigenvalues.
    Eigenvalues of ``rho`` at rounding level are dropped.
    """
    rho = _as_two_qubit(rho)
    w, v = eigh_desc(rho)
    w = np.where(w > 1e-14 * max(1.0, w[0]), w, 0.0)
    x = v * np.sqrt(w)
    lam = np.linalg.svd(x.T @ _SY2 @ x, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def negativity(rho: np.ndarray) -> float:
    """``-2 min(0, lambda_min(rho^T_B))``."""
    w, _ = eigh_desc(partial_transpose(_as_two_qubit(rho), 1))
    return float(-2.0 * min(0.0, w[-1]))


def fef_with_frame(rho: np.ndarray) -> Tuple[float, np.ndarray]:
    """Fully entangled fraction and a local unitary that attains it.

    Returns
    -------
    F : float
        Largest overlap with a maximally entangled state.
    U : ndarray
        2x2 unitary such that ``(I x U)|Phi+>`` is an optimal state.
    """
    m = magic_basis_transform(_as_two_qubit(rho)).real
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    x = v[:, -1]
    c = (MAGIC @ x).reshape(2, 2)
    u = np.sqrt(2.0) * c.T
    return float(w[-1]), u


def fef(rho: np.ndarray) -> float:
    """Fully entangled fraction via the real part of the magic-basis matrix."""
    return fef_with_frame(rho)[0]


def _mes_vectors(us: np.ndarray) -> np.ndarray:
    # (I x U)|Phi+> has coefficient matrix U^T / sqrt(2).
    return np.swapaxes(us, -1, -2).reshape(us.shape[:-2] + (4,)) * _SQ


def haar_unitaries(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random 2x2 unitaries from phase-corrected QR."""
    z = (rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))) * _SQ
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _su2(theta: np.ndarray) -> np.ndarray:
    h = theta[0] * PAULI[1] + theta[1] * PAULI[2] + theta[2] * PAULI[3]
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def sampled_fef(rho: np.ndarray, samples: int = 10_000, seed: int = 0, polish: bool = True) -> float:
    """Bell-overlap maximum over random one-sided local unitaries.

    Parameters
    ----------
    rho : ndarray
        Two-qubit density matrix.
    samples : int
        Number of Haar-random unitaries ``U`` tried in ``(I x U)|Phi+>``.
    seed : int
        Seed for ``numpy.random.default_rng``.
    polish : bool
        Refine the best sample with a local optimizer over SU(2). The result
        is still an attained overlap, so it never exceeds the true optimum.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rho = _as_two_qubit(rho)
    rng = np.random.default_rng(seed)
    us = haar_unitaries(int(samples), rng)
    vecs = _mes_vectors(us)
    vals = np.einsum("si,ij,sj->s", vecs.conj(), rho, vecs).real
    k = int(np.argmax(vals))
    best = float(vals[k])
    if not polish:
        return best
    u0 = us[k]

    def neg(theta):
        v = _mes_vectors(u0 @ _su2(theta))
        return -float((v.conj() @ rho @ v).real)

    res = minimize(neg, np.zeros(3), method="BFGS", options={"gtol": 1e-12})
    return max(best, -float(res.fun))


def ofef_family(p: float, delta: float) -> float:
    """Optimal fully entangled fraction of the noisy family.

    ``(1 + C - p)/2`` when ``C > 2p`` and ``(1 + C^2/(4p))/2`` otherwise,
    with ``C = 2 sqrt(delta(1-delta)) (1-p)``.
    """
    c = 2.0 * np.sqrt(delta * (1.0 - delta)) * (1.0 - p)
    if p == 0.0:
        return 0.5 * (1.0 + c)
    if c > 2.0 * p:
        return 0.5 * (1.0 + c - p)
    return 0.5 * (1.0 + c * c / (4.0 * p))


def ofef_upper(rho: np.ndarray) -> float:
    """Concurrence ceiling ``(1 + C)/2`` on the optimal fully entangled fraction."""
    return 0.5 * (1.0 + concurrence(rho))


def otf_from_fef(F: float) -> float:
    """Optimal teleportation fidelity ``(2F + 1)/3`` for qubits."""
    if not 0.0 <= F <= 1.0 + 1e-12:
        raise ValueError(f"F={F} outside [0, 1]")
    return (2.0 * F + 1.0) / 3.0


def von_neumann_entropy_marginal(alpha: float) -> float:
    """Binary entropy in bits of the Schmidt weights ``{alpha, 1-alpha}``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if alpha in (0.0, 1.0):
        return 0.0
    return float(-alpha * np.log2(alpha) - (1.0 - alpha) * np.log2(1.0 - alpha))


def _bell_projectors() -> np.ndarray:
    from .states import BELL_VECTORS

    return np.array([np.outer(b, b.conj()) for b in BELL_VECTORS])


# Corrections for outcomes Phi+, Psi+, Phi-, Psi- when the channel is Phi+.
_CORRECTIONS = (PAULI[0], PAULI[1], PAULI[3], PAULI[3] @ PAULI[1])


def teleport_channel(resource: np.ndarray) -> np.ndarray:
    """Superoperator of standard teleportation through ``resource``.

    Returns ``L`` with ``L[i, j, k, l] = <i| Lambda(|k><l|) |j>``.
    """
    resource = _as_two_qubit(resource)
    bells = _bell_projectors()
    out = np.zeros((2, 2, 2, 2), dtype=complex)
    for k in range(2):
        for l in range(2):
            sigma = np.zeros((2, 2), dtype=complex)
            sigma[k, l] = 1.0
            joint = np.kron(sigma, resource).reshape(2, 2, 2, 2, 2, 2)
            acc = np.zeros((2, 2), dtype=complex)
            for b, c in zip(bells, _CORRECTIONS):
                bb = b.reshape(2, 2, 2, 2)
                # Tr_{01}[(B x I) joint]
                bob = np.einsum("abcd,cdeabf->ef", bb, joint)
                acc += c @ bob @ c.conj().T
            out[:, :, k, l] = acc
    return out


def teleport_avg_fidelity_mc(rho: np.ndarray, samples: int = 100_000, seed: int = 0) -> float:
    """Monte-Carlo average teleportation fidelity over Haar-random inputs.

    The resource is first rotated on Bob's side into the local frame that
    maximizes its overlap with ``|Phi+>``; the standard Pauli corrections are
    then applied.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rho = _as_two_qubit(rho)
    _, u = fef_with_frame(rho)
    rot = np.kron(np.eye(2), u.conj().T)
    aligned = rot @ rho @ rot.conj().T
    lam = teleport_channel(aligned)
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((samples, 2)) + 1j * rng.standard_normal((samples, 2))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    outs = np.einsum("ijkl,sk,sl->sij", lam, psi, psi.conj())
    fid = np.einsum("si,sij,sj->s", psi.conj(), outs, psi).real
    return float(fid.mean())


@dataclass(frozen=True)
class MeasureReport:
    """Summary of the entanglement quantifiers of one two-qubit state.

    ``otf`` is computed from ``ofef`` when the family closed form applies and
    from ``fef`` otherwise; ``otf_source`` names which.
    """

    concurrence: float
    negativity: float
    fef: float
    ofef_upper: float
    otf: float
    ofef: Optional[float] = None
    otf_source: str = "fef"

    def to_dict(self) -> dict:
        return asdict(self)


def measure_report(rho: np.ndarray, family: Optional[Tuple[float, float]] = None) -> MeasureReport:
    """Evaluate every quantifier; ``family=(p, delta)`` adds the closed-form OFEF."""
    c = concurrence(rho)
    f = fef(rho)
    ofef = None
    source = "fef"
    used = f
    if family is not None:
        ofef = ofef_family(*family)
        used = ofef
        source = "ofef_family"
    return MeasureReport(
        concurrence=c,
        negativity=negativity(rho),
        fef=f,
        ofef_upper=0.5 * (1.0 + c),
        otf=otf_from_fef(min(used, 1.0)),
        ofef=ofef,
        otf_source=source,
    )
