"""Multi-segment chains: scenario model, pure-segment folding and reductions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..measures import ofef_family
from ..states import (
    family_state,
    nmes,
    normalize_schmidt,
    photon_loss_mix,
    psi_odd,
    werner,
    white_noise_mix,
)
from .measurement import Measurement, NoisyBellPovm, PvmBasis, noisy_bell_povm, pvm_basis, two_node_engine
from .single_node import (
    alpha_from_concurrence,
    concurrence_nmes,
    ensemble_average_ofef,
    feasibility_single_node,
)

SEGMENT_FIELDS = {
    "family": ("p", "delta"),
    "nmes": ("alpha",),
    "werner": ("F",),
    "white_mix": ("alpha", "q"),
    "loss_mix": ("alpha", "q"),
}
NODE_FIELDS = {"pvm": ("beta",), "noisy_bell": ("eta",)}


class ScenarioError(ValueError):
    """The chain description is inconsistent or unsupported by a routine."""


@dataclass(frozen=True)
class SegmentSpec:
    """One link of the chain, tagged by ``kind`` with its parameters."""

    kind: str
    params: Tuple[Tuple[str, float], ...]

    @classmethod
    def make(cls, kind: str, **params) -> "SegmentSpec":
        if kind not in SEGMENT_FIELDS:
            raise ScenarioError(f"unknown segment kind {kind!r}")
        need = SEGMENT_FIELDS[kind]
        if set(params) != set(need):
            raise ScenarioError(f"segment {kind!r} needs fields {need}, got {sorted(params)}")
        vals = tuple((k, float(params[k])) for k in need)
        spec = cls(kind, vals)
        spec.state()
        return spec

    def get(self, name: str) -> float:
        return dict(self.params)[name]

    def state(self) -> np.ndarray:
        v = dict(self.params)
        try:
            if self.kind == "family":
                return family_state(v["p"], v["delta"])
            if self.kind == "nmes":
                return nmes(v["alpha"])
            if self.kind == "werner":
                return werner(v["F"])
            if self.kind == "white_mix":
                return white_noise_mix(nmes(v["alpha"]), v["q"])
            # Loss acts on the |01>/|10> supported pure state, as in its noise model.
            return photon_loss_mix(psi_odd(v["alpha"]), v["q"])
        except ValueError as exc:
            raise ScenarioError(f"segment {self.kind}: {exc}") from exc

    @property
    def is_pure_nmes(self) -> bool:
        return self.kind == "nmes"

    def to_dict(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}


def node_from_dict(d: dict) -> Measurement:
    kind = d.get("kind")
    if kind not in NODE_FIELDS:
        raise ScenarioError(f"unknown node kind {kind!r}")
    need = NODE_FIELDS[kind]
    extra = set(d) - set(need) - {"kind"}
    if extra or any(k not in d for k in need):
        raise ScenarioError(f"node {kind!r} needs fields {need}")
    try:
        if kind == "pvm":
            return pvm_basis(float(d["beta"]))
        return noisy_bell_povm(float(d["eta"]))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"node {kind}: {exc}") from exc


def segment_from_dict(d: dict) -> SegmentSpec:
    if not isinstance(d, dict):
        raise ScenarioError("segment must be an object")
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        return SegmentSpec.make(kind, **{k: float(v) for k, v in d.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc


@dataclass
class ChainScenario:
    """Ordered segments, the measurements at the nodes between them, and the noisy link.

    ``noisy_index`` counts segments from 1, matching the node layout
    ``A - N1 - ... - Nn - B`` with ``n + 1`` segments.
    """

    segments: List[SegmentSpec]
    node_measurements: List[Measurement]
    noisy_index: int

    def __post_init__(self):
        if len(self.segments) < 2:
            raise ScenarioError("a chain needs at least two segments")
        if len(self.node_measurements) != len(self.segments) - 1:
            raise ScenarioError(
                f"{len(self.segments)} segments need {len(self.segments) - 1} nodes, "
                f"got {len(self.node_measurements)}"
            )
        if not 1 <= self.noisy_index <= len(self.segments):
            raise ScenarioError(f"noisy_index {self.noisy_index} outside 1..{len(self.segments)}")

    @property
    def n_nodes(self) -> int:
        return len(self.node_measurements)

    @property
    def noisy(self) -> SegmentSpec:
        return self.segments[self.noisy_index - 1]

    def free_segments(self) -> List[SegmentSpec]:
        return [s for i, s in enumerate(self.segments, 1) if i != self.noisy_index]

    def free_alphas(self) -> List[float]:
        out = []
        for s in self.free_segments():
            if not s.is_pure_nmes:
                raise ScenarioError("reductions need every free segment to be a pure nmes")
            a, _ = normalize_schmidt("alpha", s.get("alpha"))
            out.append(a)
        return out

    def noisy_family(self) -> Tuple[float, float]:
        s = self.noisy
        if s.kind != "family":
            raise ScenarioError("reductions need the noisy segment to be a family state")
        d, _ = normalize_schmidt("delta", s.get("delta"), allow_one=False)
        return s.get("p"), d

    @classmethod
    def from_dict(cls, cfg: dict) -> "ChainScenario":
        if not isinstance(cfg, dict):
            raise ScenarioError("scenario must be a JSON object")
        missing = {"segments", "nodes", "noisy_index"} - set(cfg)
        if missing:
            raise ScenarioError(f"scenario missing fields {sorted(missing)}")
        segs = [segment_from_dict(s) for s in cfg["segments"]]
        nodes = [node_from_dict(n) for n in cfg["nodes"]]
        try:
            idx = int(cfg["noisy_index"])
        except (TypeError, ValueError) as exc:
            raise ScenarioError("noisy_index must be an integer") from exc
        return cls(segs, nodes, idx)


def saved_resource_of(alphas: Sequence[float]) -> float:
    """``sum (1 - C_i)`` over pure free segments."""
    return float(sum(1.0 - concurrence_nmes(a) for a in alphas))


@dataclass
class FoldStep:
    alpha_in: float
    alpha_acc: float
    concurrence_acc: float


@dataclass
class EndNoiseReduction:
    """Chain with the noisy link at one end, folded to a single node."""

    alpha_prime: float
    concurrence_product: float
    p: float
    delta: float
    beta: float
    alpha_threshold: float
    b4_satisfied: bool
    steps: List[FoldStep] = field(default_factory=list)

    @property
    def single_node_inputs(self) -> Tuple[float, float, float, float]:
        return (self.p, self.delta, self.alpha_prime, self.beta)


def _fold_trace(alphas: Sequence[float]) -> Tuple[float, float, List[FoldStep]]:
    c = 1.0
    steps = []
    for a in alphas:
        c *= concurrence_nmes(a)
        steps.append(FoldStep(a, alpha_from_concurrence(c), c))
    return float(alpha_from_concurrence(c)), float(c), steps


def _measurement_beta(m: Measurement) -> float:
    if isinstance(m, PvmBasis):
        return m.beta
    if isinstance(m, NoisyBellPovm) and m.eta == 0.0:
        return 0.5
    raise ScenarioError("reductions need a projective measurement at the noisy node")


def reduce_chain_end_noise(scenario: ChainScenario) -> EndNoiseReduction:
    """Fold every free pure segment into one effective ``alpha'``.

    The node next to the noisy segment keeps its measurement; the folded
    threshold is ``(1 + sqrt(1 - prod C_i^2))/2 <= p^2/(p^2 + delta(1-delta)(1-p)^2)``.
    """
    last = len(scenario.segments)
    if scenario.noisy_index not in (1, last):
        raise ScenarioError("noisy segment is not at an end; use the two-node reduction")
    p, delta = scenario.noisy_family()
    alphas = scenario.free_alphas()
    if scenario.noisy_index == last:
        alphas = alphas[::-1]
        node = scenario.node_measurements[-1]
    else:
        node = scenario.node_measurements[0]
    beta = _measurement_beta(node)
    alpha_prime, c, steps = _fold_trace(alphas)
    rep = feasibility_single_node(p, delta, alpha_prime, beta)
    return EndNoiseReduction(
        alpha_prime=alpha_prime,
        concurrence_product=c,
        p=p,
        delta=delta,
        beta=beta,
        alpha_threshold=rep.alpha_bound,
        b4_satisfied=bool(alpha_prime <= rep.alpha_bound + 1e-15),
        steps=steps,
    )


def two_node_feasibility(p: float, delta: float, alpha_l: float, alpha_r: float) -> bool:
    """``alpha_l alpha_r delta(1-delta)(1-p)^2 <= (1-alpha_l)(1-alpha_r) p^2``."""
    x = delta * (1.0 - delta) * (1.0 - p) ** 2
    lhs = alpha_l * alpha_r * x
    rhs = (1.0 - alpha_l) * (1.0 - alpha_r) * p * p
    return bool(lhs <= rhs + 1e-15 * max(1.0, rhs))


@dataclass
class MidNoiseReduction:
    alpha_l: float
    alpha_r: float
    c_left: float
    c_right: float
    feasible: bool
    m: int


def reduce_chain_mid_noise(scenario: ChainScenario, m: Optional[int] = None) -> MidNoiseReduction:
    """Fold the pure segments on each side of the noisy link at position ``m``."""
    m = scenario.noisy_index if m is None else int(m)
    total = len(scenario.segments)
    if not 1 <= m <= total:
        raise ScenarioError(f"noisy position {m} outside 1..{total}")
    if m != scenario.noisy_index:
        raise ScenarioError("m must match the scenario's noisy_index")
    p, delta = scenario.noisy_family()
    for node in (scenario.node_measurements[max(m - 2, 0)], scenario.node_measurements[min(m - 1, total - 2)]):
        if _measurement_beta(node) != 0.5:
            raise ScenarioError("the two-node reduction uses Bell measurements next to the noisy link")
    alphas = scenario.free_alphas()
    left, right = alphas[: m - 1], alphas[m - 1 :]
    al, cl, _ = _fold_trace(left)
    ar, cr, _ = _fold_trace(right)
    return MidNoiseReduction(al, ar, cl, cr, two_node_feasibility(p, delta, al, ar), m)


def average_ofef_two_node(p: float, delta: float, alpha_l: float, alpha_r: float) -> float:
    """Engine average of the family fidelity over all sixteen two-node outcomes."""
    return ensemble_average_ofef(two_node_engine(p, delta, alpha_l, alpha_r))


def _log_side(k: int, log_c: float) -> float:
    # log of (1 + s)/(1 - s) with s = sqrt(1 - C^(2k)), written without cancellation.
    if k == 0:
        return 0.0
    y = math.exp(2.0 * k * log_c)
    s = math.sqrt(max(0.0, 1.0 - y))
    return 2.0 * math.log1p(s) - 2.0 * k * log_c


def position_feasible(n: int, m: int, c: float, p: float, delta: float) -> bool:
    """Identical-segment two-node condition with ``m - 1`` segments left of the noisy link."""
    if not 1 <= m <= n + 1:
        raise ValueError(f"m={m} outside 1..{n + 1}")
    x = delta * (1.0 - delta) * (1.0 - p) ** 2
    if c >= 1.0:
        return p * p >= x
    if c <= 0.0:
        return False
    lc = math.log(c)
    lhs = _log_side(m - 1, lc) + _log_side(n - m + 1, lc)
    return lhs <= math.log(p * p / x) + 1e-12


def min_concurrence_at(n: int, m: int, p: float, delta: float) -> float:
    """Smallest identical per-segment concurrence keeping the chain feasible.

    Returns ``1.0`` when even maximally entangled segments fail the condition.
    """
    if not position_feasible(n, m, 1.0, p, delta):
        return 1.0
    if position_feasible(n, m, 1e-300, p, delta):
        return 0.0
    # Bisection in log C; the condition is monotone in C.
    a, b = math.log(1e-300), 0.0
    while b - a > 1e-15:
        mid = 0.5 * (a + b)
        if position_feasible(n, m, math.exp(mid), p, delta):
            b = mid
        else:
            a = mid
    return math.exp(b)


def saved_resource_at_position(n: int, m: int, p: float, delta: float) -> float:
    """``n (1 - C_min)`` for the noisy link at position ``m`` of ``n + 1`` segments."""
    return n * (1.0 - min_concurrence_at(n, m, p, delta))


@dataclass(frozen=True)
class Window:
    p_low: float
    p_high: float

    @property
    def empty(self) -> bool:
        return not self.p_low < self.p_high


def fidelity_gap_two_noisy(p: float, delta: float) -> float:
    """``F*(rho) - (1 + C(rho)^2)/2`` for two identical noisy segments."""
    c = 2.0 * math.sqrt(delta * (1.0 - delta)) * (1.0 - p)
    return ofef_family(p, delta) - 0.5 * (1.0 + c * c)


def two_noisy_window(delta: float, alpha: float) -> Window:
    """Noise levels where two noisy segments fail but one noisy segment succeeds.

    Lower end: Bell-measurement feasibility with ``psi(alpha)``,
    ``alpha delta(1-delta)(1-p)^2 <= (1-alpha) p^2``. Upper end: supremum of
    ``p`` with ``(1 + C^2)/2 < F*(rho(p, delta))``. An empty window comes back
    with ``p_low == p_high``.
    """
    if not 0.5 <= delta < 1.0 or not 0.5 <= alpha < 1.0:
        raise ValueError("delta and alpha must lie in [1/2, 1)")
    r = math.sqrt(alpha * delta * (1.0 - delta) / (1.0 - alpha))
    p_low = r / (1.0 + r)
    k = 2.0 * math.sqrt(delta * (1.0 - delta))
    p_c = k / (2.0 + k)
    # Branch C > 2p: gap > 0 iff k^2 u^2 - (k+1) u + 1 < 0 with u = 1 - p.
    disc = (1.0 - k) * (1.0 + 3.0 * k)
    b1 = None
    if disc > 0.0:
        sq = math.sqrt(disc)
        u1 = ((k + 1.0) - sq) / (2.0 * k * k)
        u2 = ((k + 1.0) + sq) / (2.0 * k * k)
        lo, hi = max(0.0, 1.0 - u2), min(p_c, 1.0 - u1)
        if lo < hi:
            b1 = (lo, hi)
    g_lo = g_hi = None
    if b1 is not None:
        g_lo, g_hi = b1
    if p_c < 0.25:
        g_hi = 0.25
        g_lo = p_c if g_lo is None else g_lo
    if g_lo is None:
        return Window(p_low, p_low)
    lo = max(p_low, g_lo)
    if lo >= g_hi:
        return Window(lo, lo)
    return Window(lo, g_hi)
