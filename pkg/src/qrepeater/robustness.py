"""Single-shot noise robustness: closed-form fidelities, validity guards and engine checks.

Every case swaps a noisy family segment with one free segment through one
node. ``s = 1 - q`` is the free-segment purity and ``e = 1 - eta`` the
readout reliability.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .measures import fef
from .protocols.measurement import Measurement, measure_node, noisy_bell_povm, pvm_basis
from .qcore import ket, kron
from .states import family_state, nmes, photon_loss_mix, psi_odd, white_noise_mix

CASES = ("white", "photon_loss", "povm_white", "povm_loss", "me_vs_nme_white", "me_vs_nme_loss")
POVM_P = 0.8
R3, R2, R6 = math.sqrt(3.0), math.sqrt(2.0), math.sqrt(6.0)


def _check(name: str, x: float, hi: float = 1.0) -> float:
    x = float(x)
    if not 0.0 <= x <= hi:
        raise ValueError(f"{name}={x} outside [0, {hi}]")
    return x


def f_opt_family_half(p: float) -> float:
    """``(p+1)^2/(8p)``, the optimum for ``rho(p, 1/2)``."""
    return (p + 1.0) ** 2 / (8.0 * p)


def f_opt_three_fifths(p: float) -> float:
    """``(2p+3)(3p+2)/(50p)``, the optimum for ``rho(p, 3/5)``."""
    return (2.0 * p + 3.0) * (3.0 * p + 2.0) / (50.0 * p)


# Case 1: white noise on a nmes(3/4) free segment, noisy rho(p, 1/2).

def white_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = (
        2 * (p - 1) ** 2 * (2 * p - 1) * s**3
        + 2 * (p - 1) * (p * (p + 5) - 2) * s**2
        + (p + 1) * (p * (5 * p + 16) - 5) * s
        + (p + 1) ** 2 * (p + 3)
    )
    den = 8 * ((p - 1) * s + p + 1) * (5 * p * s + p + q)
    return num / den


def white_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    if not 0.5 <= s <= 1.0:
        return False
    lo = (R3 * s - q) / (R3 * s - q + 2)
    hi = (-2 * s * s - 2 * s + 1) / (2 * s * s - 4 * s - 1)
    return lo < p < hi


# Noisy rho(p, 3/5): Phi+ (ME) or nmes(3/4) (NME) free segments with white noise.

def me_white_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = 2 * p**2 * (2 - q) * (2 * s + 1) + p * ((28 - 13 * s) * s + 11) - 9 * q * s + 12
    return num / (10 * (p * (8 * s + 2) - 3 * s + 3))


def nme_white_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = (
        3 * (p - 1) ** 2 * (11 * p - 6) * s**3
        + 5 * (p - 1) * (p * (5 * p + 24) - 9) * s**2
        + (2 * p + 3) * (p * (14 * p + 57) - 21) * s
        + (p + 4) * (2 * p + 3) ** 2
    )
    den = 10 * (3 * (p - 1) * s + 2 * p + 3) * (p * (13 * s + 2) - 3 * s + 3)
    return num / den


def me_white_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    return 0.5 <= s <= 1.0 and (
        (2 * R6 * s + 3 * s - 3) / (2 * R6 * s + 8 * s + 2) < p < (9 * s * s + 6 * s - 3) / (4 * s * s + 6 * s + 2)
    )


def nme_white_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    return 0.5 <= s <= 1.0 and (
        (3 * R2 * s + 3 * s - 3) / (3 * R2 * s + 3 * s + 2) < p < (-6 * s * s - 6 * s + 3) / (4 * s * s - 11 * s - 2)
    )


def joint_white_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    hi = (-6 * s * s - 6 * s + 3) / (4 * s * s - 11 * s - 2)
    split = (3 - 3 * R2 + 2 * R6) / (3 + 3 * R2)
    if 0.5 <= s <= split:
        return (2 * R6 * s + 3 * s - 3) / (2 * R6 * s + 8 * s + 2) < p < hi
    if split < s <= 1.0:
        return (3 * R2 * s + 3 * s - 3) / (3 * R2 * s + 3 * s + 2) < p < hi
    return False


# Case 2: photon loss on psi_odd(3/4), noisy rho(p, 1/2).

def loss_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = p**3 * ((19 - 9 * s) * s - 8) + p**2 * s * (13 * s - 9) + p * (8 - 3 * s * (1 + s)) - s * s + s
    return num / (16 * p * (p * (3 * s - 2) - 2 * s + 2))


def loss_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    if 4 / (4 + R3) < s <= 6 / (6 + R3) and R3 / (6 + R3) < p < -s / (7 * s - 8):
        return True
    if 6 / (6 + R3) < s < 1 and (R3 * s + 4 * s - 4) / (R3 * s + 6 * s - 4) < p < -s / (7 * s - 8):
        return True
    return q == 0.0 and R3 / (2 + R3) <= p < 1


# Noisy rho(p, 3/5): Psi+ (ME) or psi_odd(3/4) (NME) free segments with photon loss.

def me_loss_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = (
        -2 * (p - 1) * (p * (31 * p + 3) - 9) * s**2
        + (8 * p - 3) * (p * (19 * p + 12) - 6) * s
        - 30 * (p - 1) * p * (2 * p + 3)
    )
    return num / (50 * p * (p * (11 * s - 6) - 6 * s + 6))


def nme_loss_closed(p: float, q: float) -> float:
    s = 1.0 - q
    num = (
        -2 * (p - 1) * (p * (61 * p - 27) - 9) * s**2
        + (p * (17 * p * (16 * p - 3) - 114) + 18) * s
        - 60 * (p - 1) * p * (2 * p + 3)
    )
    return num / (50 * p * (17 * p * s - 12 * p - 12 * s + 12))


def me_loss_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    return 4 / (4 + R6) < s <= 1 and R6 / (5 + R6) < p < -3 * s / (7 * s - 10)


def nme_loss_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    pk = 3 * R2 / (5 + 3 * R2)
    if R2 / (5 + R2) < p < pk and 20 * p / (17 * p + 3) < s < (12 * p - 12) / (3 * R2 * p + 17 * p - 3 * R2 - 12):
        return True
    if p == pk and 60 * R2 / (15 + 60 * R2) < s <= 1:
        return True
    return pk < p < 1 and 20 * p / (17 * p + 3) < s <= 1


def joint_loss_valid(p: float, q: float) -> bool:
    s = 1.0 - q
    split = -12 / (-12 - 3 * R2 + R6)
    hi = -3 * s / (17 * s - 20)
    if 4 * R6 / (3 + 4 * R6) < s <= split and R6 / (5 + R6) < p < hi:
        return True
    if split < s < 1 and (3 * R2 * s + 12 * s - 12) / (3 * R2 * s + 17 * s - 12) < p < hi:
        return True
    return q == 0.0 and 3 * R2 / (5 + 3 * R2) <= p < 1


# Case 3: noisy Bell readout, p = 0.8, free Schmidt weight 3/5.

def povm_white_closed(q: float, eta: float) -> float:
    s, e = 1.0 - q, 1.0 - eta
    num = (
        1792 * e**5 * s**3 - 2688 * e**4 * s**3 + 1152 * e**4 * s**2 + 4480 * e**3 * s**3
        - 1152 * e**3 * s**2 - 5096 * e**2 * s**3 + 34280 * e**2 * s**2 + 2466 * e * s**3
        - 35588 * e * s**2 + 41250 * e * s - 407 * s**3 + 8783 * s**2 - 20625 * s + 12825
    )
    return num / (40 * (28 * e * s - 11 * s + 15) * (56 * e * s - 37 * s + 45))


def povm_white_valid(q: float, eta: float) -> bool:
    s, e = 1.0 - q, 1.0 - eta
    if not 0.919 < e <= 1.0:
        return False
    rad = e * (e * (-96 * eta * e + 193) - 130) + 25
    if rad < 0:
        return False
    return 15 / (-2 * e + 2 * math.sqrt(rad) + 1) < s <= 1.0


def povm_loss_closed(q: float, eta: float) -> float:
    s, e = 1.0 - q, 1.0 - eta
    num = (
        112 * e**5 * s**2 - 56 * e**5 * s - 168 * e**4 * s**2 + 120 * e**4 * s + 770 * e**3 * s**2
        - 911 * e**3 * s + 245 * e**3 - 791 * e**2 * s**2 + 4398 * e**2 * s - 2695 * e**2
        + 141 * e * s**2 - 2297 * e * s + 2410 * e + 38 * s**2 - 420 * s + 400
    )
    return num / (20 * (7 * e + 1) * (49 * e * s - 35 * e - 38 * s + 40))


def povm_loss_valid(q: float, eta: float) -> bool:
    s, e = 1.0 - q, 1.0 - eta
    if not 0.919 < e <= 1.0:
        return False
    den = e * (e * (-8 * eta * e + 51) - 7) - 2
    return den > 0 and 5 * e * (7 * e + 1) / den < s <= 1.0


@dataclass(frozen=True)
class RobustnessPoint:
    """One evaluated noise point; ``pct_change = (f_opt - f_noisy)/f_opt * 100``.

    For the ME/NME comparisons ``f_opt`` holds the ME fidelity and
    ``f_noisy`` the NME fidelity, and ``baseline`` the shared noiseless optimum.
    """

    case: str
    p: float
    q: float
    eta: Optional[float]
    f_opt: float
    f_noisy: float
    pct_change: float
    in_validity_range: bool
    baseline: float

    def to_dict(self) -> dict:
        return asdict(self)


def _pct(ref: float, val: float) -> float:
    return (ref - val) / ref * 100.0 if ref > 0 else math.nan


def white_noise_fidelity(p: float, q: float) -> Tuple[float, bool]:
    _check("p", p), _check("q", q)
    return white_closed(p, q), white_valid(p, q)


def me_vs_nme_white(p: float, q: float) -> Tuple[float, float, float, bool]:
    _check("p", p), _check("q", q)
    f_me, f_nme = me_white_closed(p, q), nme_white_closed(p, q)
    return f_me, f_nme, _pct(f_me, f_nme), joint_white_valid(p, q)


def photon_loss_fidelity(p: float, q: float) -> Tuple[float, bool]:
    _check("p", p), _check("q", q)
    return loss_closed(p, q), loss_valid(p, q)


def me_vs_nme_photonloss(p: float, q: float) -> Tuple[float, float, float, bool]:
    _check("p", p), _check("q", q)
    f_me, f_nme = me_loss_closed(p, q), nme_loss_closed(p, q)
    return f_me, f_nme, _pct(f_me, f_nme), joint_loss_valid(p, q)


def povm_fidelity_white(q: float, eta: float) -> Tuple[float, bool]:
    _check("q", q), _check("eta", eta, 0.5)
    return povm_white_closed(q, eta), povm_white_valid(q, eta)


def povm_fidelity_loss(q: float, eta: float) -> Tuple[float, bool]:
    _check("q", q), _check("eta", eta, 0.5)
    return povm_loss_closed(q, eta), povm_loss_valid(q, eta)


def robustness_point(case: str, p: Optional[float] = None, q: float = 0.0, eta: Optional[float] = None) -> RobustnessPoint:
    """Evaluate ``case`` at one point. POVM cases fix ``p = 0.8``."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; choose from {', '.join(CASES)}")
    if case.startswith("povm"):
        if p is not None and p != POVM_P:
            raise ValueError(f"case {case} fixes p = {POVM_P}")
        p, eta = POVM_P, 0.0 if eta is None else eta
        fn = povm_fidelity_white if case == "povm_white" else povm_fidelity_loss
        f, ok = fn(q, eta)
        base = f_opt_family_half(p)
        return RobustnessPoint(case, p, q, eta, base, f, _pct(base, f), ok, base)
    if p is None:
        raise ValueError(f"case {case} needs p")
    if eta not in (None, 0.0):
        raise ValueError(f"case {case} has ideal measurements; eta applies to POVM cases")
    if case in ("white", "photon_loss"):
        fn = white_noise_fidelity if case == "white" else photon_loss_fidelity
        f, ok = fn(p, q)
        base = f_opt_family_half(p)
        return RobustnessPoint(case, p, q, None, base, f, _pct(base, f), ok, base)
    fn = me_vs_nme_white if case == "me_vs_nme_white" else me_vs_nme_photonloss
    f_me, f_nme, pct, ok = fn(p, q)
    return RobustnessPoint(case, p, q, None, f_me, f_nme, pct, ok, f_opt_three_fifths(p))


TABLE1_P = (0.70, 0.75, 0.80, 0.85)
TABLE1_Q = (0.02, 0.04, 0.06, 0.08)


def table1(p_values: Sequence[float] = TABLE1_P, q_values: Sequence[float] = TABLE1_Q) -> np.ndarray:
    """Percentage fidelity change under white noise; rows ``p``, columns ``q``."""
    out = np.empty((len(p_values), len(q_values)))
    for i, p in enumerate(p_values):
        for j, q in enumerate(q_values):
            f, _ = white_noise_fidelity(p, q)
            out[i, j] = _pct(f_opt_family_half(p), f)
    return out


# Engine cross-check.

_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _frame(ideal: np.ndarray) -> Optional[Tuple[np.ndarray, complex]]:
    """Local X flips taking the outcome's product part to ``|01>``, plus the coherence phase."""
    w, v = np.linalg.eigh(ideal)
    for k in range(4):
        if w[k] <= 1e-12:
            continue
        c = v[:, k].reshape(2, 2)
        if 2.0 * abs(np.linalg.det(c)) < 1e-8:
            a, b = np.unravel_index(np.argmax(np.abs(c)), (2, 2))
            wmat = np.kron(np.linalg.matrix_power(_X, a), np.linalg.matrix_power(_X, 1 - b))
            rc = wmat @ ideal @ wmat.conj().T
            if abs(rc[0, 3]) < 1e-14:
                return None
            return wmat, rc[0, 3] / abs(rc[0, 3])
    return None


def _filtered_value(state: np.ndarray, wmat: np.ndarray, phase: complex) -> float:
    """Best ``t`` in ``[0, 1]`` for the filter ``diag(t, 1)`` on the first qubit, failures scoring 1/2."""
    rc = wmat @ state @ wmat.conj().T
    target = (ket("00") + phase * ket("11")) / math.sqrt(2.0)

    def val(t: float) -> float:
        k = np.kron(np.diag([t, 1.0]), np.eye(2))
        sig = k @ rc @ k.conj().T
        return float((target.conj() @ sig @ target).real + (1.0 - np.trace(sig).real) / 2.0)

    v0, vh, v1 = val(0.0), val(0.5), val(1.0)
    a = 2.0 * (v1 - 2.0 * vh + v0)
    b = v1 - v0 - a
    cands = [v0, v1]
    if a < 0:
        t = -b / (2.0 * a)
        if 0.0 < t < 1.0:
            cands.append(val(t))
    return max(cands)


@dataclass(frozen=True)
class EngineCheck:
    """Born-rule evaluation of one robustness point.

    ``filtered`` applies the local filtering that reproduces the closed forms;
    ``avg_fef`` is the unfiltered ``sum p_i fef(rho_i)`` lower bound.
    """

    filtered: float
    avg_fef: float


def engine_fidelity(
    noisy: np.ndarray,
    free_ideal: np.ndarray,
    free_noisy: np.ndarray,
    meas_ideal: Measurement,
    meas_noisy: Measurement,
) -> EngineCheck:
    """Swap ``noisy`` with a free segment, framing each outcome by its noiseless counterpart.

    ``meas_ideal`` and ``meas_noisy`` must list their outcomes in the same order.
    """
    ideal = measure_node(kron(noisy, free_ideal), (1, 2), meas_ideal)
    real = measure_node(kron(noisy, free_noisy), (1, 2), meas_noisy)
    filt = avg = 0.0
    for o0, o in zip(ideal, real):
        if o.state is None:
            continue
        f = fef(o.state)
        avg += o.probability * f
        fr = _frame(o0.state) if o0.state is not None else None
        filt += o.probability * (max(f, _filtered_value(o.state, *fr)) if fr else f)
    return EngineCheck(filt, avg)


def _case_setup(case: str, p: float, q: float, eta: float):
    bell = pvm_basis(0.5)
    # Outcomes pair up by position, so the reference uses the same ordering as the noisy POVM.
    ideal = noisy_bell_povm(0.0)
    if case == "white":
        return family_state(p, 0.5), nmes(0.75), white_noise_mix(nmes(0.75), q), bell, bell
    if case == "photon_loss":
        return family_state(p, 0.5), psi_odd(0.75), photon_loss_mix(psi_odd(0.75), q), bell, bell
    if case == "povm_white":
        return family_state(POVM_P, 0.5), nmes(0.6), white_noise_mix(nmes(0.6), q), ideal, noisy_bell_povm(eta)
    if case == "povm_loss":
        return family_state(POVM_P, 0.5), psi_odd(0.6), photon_loss_mix(psi_odd(0.6), q), ideal, noisy_bell_povm(eta)
    raise ValueError(f"no single engine setup for case {case!r}")


def engine_check(case: str, p: Optional[float] = None, q: float = 0.0, eta: float = 0.0) -> Dict[str, EngineCheck]:
    """Engine values keyed by fidelity name (``f_noisy``, or ``f_me``/``f_nme``)."""
    if case in ("me_vs_nme_white", "me_vs_nme_loss"):
        bell = pvm_basis(0.5)
        noisy = family_state(p, 0.6)
        if case == "me_vs_nme_white":
            mk: Callable = lambda a: (nmes(a), white_noise_mix(nmes(a), q))
        else:
            mk = lambda a: (psi_odd(a), photon_loss_mix(psi_odd(a), q))
        return {
            "f_me": engine_fidelity(noisy, *mk(0.5), bell, bell),
            "f_nme": engine_fidelity(noisy, *mk(0.75), bell, bell),
        }
    return {"f_noisy": engine_fidelity(*_case_setup(case, p if p is not None else POVM_P, q, eta))}
