"""Node measurements, the Born-rule engine and transcribed outcome states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..qcore import ket, kron, proj
from ..states import BELL_LABELS, BELL_VECTORS, family_state, nmes, normalize_schmidt

ZERO_PROB = 1e-14


@dataclass(frozen=True)
class PvmBasis:
    """Tilted Bell-like projective measurement with Schmidt weight ``beta``."""

    beta: float
    vectors: Tuple[np.ndarray, ...]

    @property
    def elements(self) -> List[np.ndarray]:
        return [proj(v) for v in self.vectors]

    @property
    def labels(self) -> Tuple[str, ...]:
        return ("phi0", "phi1", "phi2", "phi3")


@dataclass(frozen=True)
class NoisyBellPovm:
    """Bell measurement whose two classical readout bits flip with probability ``eta``."""

    eta: float
    elements: Tuple[np.ndarray, ...]

    @property
    def labels(self) -> Tuple[str, ...]:
        return BELL_LABELS


Measurement = Union[PvmBasis, NoisyBellPovm]


def pvm_basis(beta: float) -> PvmBasis:
    """The four vectors ``phi_0..phi_3`` of the tilted measurement."""
    normalize_schmidt("beta", beta)
    b = float(beta)
    sb, sc = np.sqrt(b), np.sqrt(1.0 - b)
    vecs = (
        sb * ket("00") + sc * ket("11"),
        sc * ket("00") - sb * ket("11"),
        sb * ket("01") + sc * ket("10"),
        sc * ket("01") - sb * ket("10"),
    )
    return PvmBasis(b, vecs)


def noisy_bell_povm(eta: float) -> NoisyBellPovm:
    """Bell POVM with independent bit flips on the readout.

    Outcome ``k`` (ordered Phi+, Psi+, Phi-, Psi-, i.e. bit strings 00, 01,
    10, 11) collects Bell projector ``j`` with weight
    ``eta**h (1-eta)**(2-h)``, ``h`` the Hamming distance of ``k`` and ``j``.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 0.5:
        raise ValueError(f"eta={eta} outside [0, 1/2]")
    projs = [proj(v) for v in BELL_VECTORS]
    elements = []
    for k in range(4):
        e = np.zeros((4, 4), dtype=complex)
        for j in range(4):
            h = bin(k ^ j).count("1")
            e += eta**h * (1.0 - eta) ** (2 - h) * projs[j]
        elements.append(e)
    return NoisyBellPovm(eta, tuple(elements))


@dataclass
class Outcome:
    label: object
    probability: float
    state: Optional[np.ndarray]


@dataclass
class OutcomeEnsemble:
    """Measurement outcomes with normalized conditional states on the survivors."""

    outcomes: List[Outcome] = field(default_factory=list)

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self):
        return len(self.outcomes)

    def __getitem__(self, i):
        return self.outcomes[i]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])

    def by_label(self, label) -> Outcome:
        for o in self.outcomes:
            if o.label == label:
                return o
        raise KeyError(label)

    def average(self, fn: Callable[[np.ndarray], float]) -> float:
        """``sum_i p_i fn(state_i)`` over outcomes that occur."""
        return float(sum(o.probability * fn(o.state) for o in self.outcomes if o.state is not None))


def _node_contract(rho: np.ndarray, nq: int, first: int, element: np.ndarray) -> np.ndarray:
    """``Tr_node[(E x I) rho]`` for a node on qubits ``first, first+1``."""
    t = rho.reshape([2] * (2 * nq))
    e = element.reshape(2, 2, 2, 2)
    a, b = first, first + 1
    rows = list(range(nq))
    cols = list(range(nq, 2 * nq))
    # E's column indices contract with rho's row indices on the node.
    e_idx = [2 * nq, 2 * nq + 1, a, b]
    cols = cols.copy()
    cols[a] = 2 * nq
    cols[b] = 2 * nq + 1
    keep = [k for k in range(nq) if k not in (a, b)]
    out = keep + [k + nq for k in keep]
    red = np.einsum(e, e_idx, t, rows + cols, out)
    d = 2 ** len(keep)
    return red.reshape(d, d)


def measure_node(
    chain_state: np.ndarray, node_qubits: Sequence[int], measurement: Measurement
) -> OutcomeEnsemble:
    """Born-rule measurement of two adjacent qubits, traced out afterwards.

    Parameters
    ----------
    chain_state : ndarray
        State of ``nq`` qubits, leftmost most significant.
    node_qubits : pair of int
        Adjacent qubits ``(i, i+1)`` held by the node.
    measurement : PvmBasis or NoisyBellPovm
        Measurement performed at the node.

    Returns
    -------
    OutcomeEnsemble
        One outcome per measurement element, in element order. Outcomes
        with probability below ``1e-14`` carry no state.
    """
    rho = np.asarray(chain_state, dtype=complex)
    dim = rho.shape[0]
    nq = int(round(np.log2(dim)))
    if rho.shape != (dim, dim) or 2**nq != dim or nq < 3:
        raise ValueError(f"chain state of shape {rho.shape} is not a 3+ qubit operator")
    i, j = (int(x) for x in node_qubits)
    if j != i + 1 or i < 0 or j >= nq:
        raise ValueError(f"node qubits {node_qubits} are not an adjacent pair in 0..{nq - 1}")
    ens = OutcomeEnsemble()
    for label, el in zip(measurement.labels, measurement.elements):
        r = _node_contract(rho, nq, i, el)
        r = 0.5 * (r + r.conj().T)
        pr = float(np.trace(r).real)
        if pr <= ZERO_PROB:
            ens.outcomes.append(Outcome(label, max(pr, 0.0), None))
        else:
            ens.outcomes.append(Outcome(label, pr, r / pr))
    return ens


def single_node_ensemble(
    left: np.ndarray, right: np.ndarray, measurement: Measurement
) -> OutcomeEnsemble:
    """Swap two segments ``A-N`` and ``N-B`` through one node measurement."""
    return measure_node(kron(left, right), (1, 2), measurement)


def post_states_closed_form(p: float, delta: float, alpha: float, beta: float) -> OutcomeEnsemble:
    """Transcribed outcome states of the tilted measurement on ``rho(p,delta) x psi(alpha)``.

    Each outcome is a weighted pure state ``kappa_i`` plus a product
    projector; the weights share the outcome probability as denominator.
    """
    for name, v in (("p", p), ("delta", delta), ("alpha", alpha), ("beta", beta)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v} outside [0, 1]")
    a, b, d = alpha, beta, delta
    q = 1.0 - p
    rows = (
        (a * b * d, (1 - a) * (1 - b) * (1 - d), 1, "00", "11", (1 - a) * (1 - b), "01",
         (1 - a) * (1 - b) - (1 - a - b) * d * q),
        (a * (1 - b) * d, (1 - a) * b * (1 - d), -1, "00", "11", (1 - a) * b, "01",
         (1 - a) * b + (a - b) * d * q),
        ((1 - a) * b * d, a * (1 - b) * (1 - d), 1, "01", "10", a * (1 - b), "00",
         a * (1 - b) - (a - b) * d * q),
        ((1 - a) * (1 - b) * d, a * b * (1 - d), -1, "01", "10", a * b, "00",
         a * b + (1 - a - b) * d * q),
    )
    ens = OutcomeEnsemble()
    for label, (x, y, sign, s0, s1, pw, prod, den) in zip(("phi0", "phi1", "phi2", "phi3"), rows):
        if den <= ZERO_PROB:
            ens.outcomes.append(Outcome(label, max(den, 0.0), None))
            continue
        norm = x + y
        state = (pw * p / den) * proj(ket(prod))
        if norm > 0:
            kappa = (np.sqrt(x) * ket(s0) + sign * np.sqrt(y) * ket(s1)) / np.sqrt(norm)
            state = state + (norm * q / den) * proj(kappa)
        ens.outcomes.append(Outcome(label, den, state))
    return ens


def two_node_engine(p: float, delta: float, alpha_l: float, alpha_r: float) -> OutcomeEnsemble:
    """Sixteen outcomes of Bell swapping on ``psi(alpha_l) - rho(p,delta) - psi(alpha_r)``.

    The node between the noisy segment and the right segment measures
    first; labels are ``(i, j)`` with ``i`` that first outcome.
    """
    bell = pvm_basis(0.5)
    first = measure_node(kron(family_state(p, delta), nmes(alpha_r)), (1, 2), bell)
    ens = OutcomeEnsemble()
    for i, o1 in enumerate(first):
        if o1.state is None:
            for j in range(4):
                ens.outcomes.append(Outcome((i, j), 0.0, None))
            continue
        second = measure_node(kron(nmes(alpha_l), o1.state), (1, 2), bell)
        for j, o2 in enumerate(second):
            ens.outcomes.append(Outcome((i, j), o1.probability * o2.probability, o2.state))
    return ens


TWO_NODE_SPOT_LABELS = {"c3": (0, 0), "c13": (1, 0), "c21": (2, 0), "c31": (3, 0)}


def two_node_closed_form(
    which: str, p: float, delta: float, alpha_l: float, alpha_r: float
) -> Tuple[float, np.ndarray]:
    """Transcribed two-node outcome for labels ``c3``, ``c13``, ``c21``, ``c31``.

    Returns
    -------
    probability : float
        Joint outcome probability, a quarter of the shared denominator.
    state : ndarray
        Normalized conditional state of ``A`` and ``B``.
    """
    al, ar, d, q = alpha_l, alpha_r, delta, 1.0 - p
    if which in ("c3", "c13"):
        den = (1 - ar) * (1 - al) - (1 - ar) * (1 - 2 * al) * p - (1 - ar - al) * d * q
        x, y = ar * al * d, (1 - ar) * (1 - al) * (1 - d)
        s0, s1, prod, pw = "00", "11", "01", (1 - ar) * al * p
        sign = 1 if which == "c3" else -1
    elif which in ("c21", "c31"):
        den = ar * (1 - al) - ar * (1 - 2 * al) * p - (ar - al) * d * q
        x, y = (1 - ar) * al * d, ar * (1 - al) * (1 - d)
        s0, s1, prod, pw = "01", "10", "00", ar * al * p
        sign = 1 if which == "c21" else -1
    else:
        raise ValueError(f"unknown two-node outcome {which!r}")
    zeta = (np.sqrt(x) * ket(s0) + sign * np.sqrt(y) * ket(s1)) / np.sqrt(x + y)
    state = ((x + y) * q / den) * proj(zeta) + (pw / den) * proj(ket(prod))
    return den / 4.0, state
