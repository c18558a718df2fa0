"""Single-node swapping with a noisy segment: extraction, feasibility, averages."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from ..measures import ofef_family
from ..qcore import eigh_desc, ket, kron, proj
from ..states import family_state, nmes
from .measurement import OutcomeEnsemble, measure_node, post_states_closed_form, pvm_basis

_X = np.array([[0, 1], [1, 0]], dtype=complex)


class NotFamilyError(ValueError):
    """The state is not a product/entangled rank-two mixture of the required shape."""


@dataclass(frozen=True)
class FamilyParams:
    """Family coordinates of a rank-two state and the local frame reaching them.

    ``(u_a x u_b) rho (u_a x u_b)^dagger`` equals
    ``p |prod><prod| + (1-p)|zeta(delta)><zeta(delta)|`` with ``prod`` the
    ``product_vector`` (``'01'`` canonically, ``'10'`` when the parties
    play swapped roles) and ``zeta`` supported on ``|00>, |11>``.
    """

    p: float
    delta: float
    u_a: np.ndarray
    u_b: np.ndarray
    product_vector: str = "01"

    @property
    def party_swap(self) -> bool:
        return self.product_vector == "10"

    def canonical(self) -> np.ndarray:
        delta = min(self.delta, 1.0 - 1e-300)
        zeta = np.sqrt(delta) * ket("00") + np.sqrt(1.0 - delta) * ket("11")
        return self.p * proj(ket(self.product_vector)) + (1.0 - self.p) * proj(zeta)

    def reconstruct(self) -> np.ndarray:
        w = np.kron(self.u_a, self.u_b)
        return w.conj().T @ self.canonical() @ w

    def ofef(self) -> float:
        return ofef_family(self.p, min(self.delta, 1.0))


def _unitary_to(a: np.ndarray, target: int) -> np.ndarray:
    """Unitary sending unit vector ``a`` to ``|target>`` and ``a_perp`` to the other."""
    a = a / np.linalg.norm(a)
    perp = np.array([-np.conj(a[1]), np.conj(a[0])])
    rows = [a.conj(), perp.conj()] if target == 0 else [perp.conj(), a.conj()]
    return np.array(rows)


def _try_split(u: np.ndarray, e: np.ndarray, wu: float, we: float, tol: float):
    """Fit ``wu|u><u| + we|e><e|`` with ``u`` product to the canonical pattern."""
    cu = u.reshape(2, 2)
    if 2.0 * abs(np.linalg.det(cu)) > tol:
        return None
    uu, s, vh = np.linalg.svd(cu)
    a, b = uu[:, 0], vh[0, :]
    ua = _unitary_to(a, 0)
    ub = _unitary_to(b, 1)
    w = np.kron(ua, ub)
    ec = w @ e
    # Pattern: no weight on |01> (the product slot) or |10>.
    if abs(ec[1]) > tol or abs(ec[2]) > tol:
        return None
    x, y = ec[0], ec[3]
    # Local phases making both amplitudes real and non-negative.
    px = np.exp(-1j * np.angle(x)) if abs(x) > 0 else 1.0
    py = np.exp(-1j * np.angle(y)) if abs(y) > 0 else 1.0
    ua = np.diag([px, py]) @ ua
    ax, ay = abs(x) ** 2, abs(y) ** 2
    norm = ax + ay
    if ax >= ay:
        return FamilyParams(float(wu), float(ax / norm), ua, ub, "01")
    return FamilyParams(float(wu), float(ay / norm), _X @ ua, _X @ ub, "10")


def _product_in_span(v1: np.ndarray, v2: np.ndarray, tol: float) -> List[np.ndarray]:
    c1, c2 = v1.reshape(2, 2), v2.reshape(2, 2)
    a2 = np.linalg.det(c2)
    a1 = c1[0, 0] * c2[1, 1] + c2[0, 0] * c1[1, 1] - c1[0, 1] * c2[1, 0] - c2[0, 1] * c1[1, 0]
    a0 = np.linalg.det(c1)
    out = []
    if abs(a2) <= tol:
        out.append(v2)
        roots = [-a0 / a1] if abs(a1) > tol else []
    else:
        disc = a1 * a1 - 4.0 * a2 * a0
        # The family pattern always produces a double root.
        if abs(disc) <= 1e-8 * max(1.0, abs(a1) ** 2):
            roots = [-a1 / (2.0 * a2)]
        else:
            sq = np.sqrt(disc)
            roots = [(-a1 + sq) / (2.0 * a2), (-a1 - sq) / (2.0 * a2)]
    for t in roots:
        v = v1 + t * v2
        out.append(v / np.linalg.norm(v))
    return out


def family_params_extract(rho: np.ndarray, tol: float = 1e-9) -> FamilyParams:
    """Recover ``(p, delta)`` and the local frame of a rank-two family state.

    Raises
    ------
    NotFamilyError
        If the state has rank above two or its support does not split into
        a product vector plus an orthogonal entangled vector of the right
        local pattern.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotFamilyError("expected a two-qubit state")
    w, v = eigh_desc(rho)
    if w[2] > tol:
        raise NotFamilyError(f"rank above two (third eigenvalue {w[2]:.3e})")
    if w[1] <= tol:
        u = v[:, 0]
        c = u.reshape(2, 2)
        if 2.0 * abs(np.linalg.det(c)) > tol:
            uu, s, vh = np.linalg.svd(c)
            ua = uu.conj().T
            ub = vh.conj()
            w2 = np.kron(ua, ub)
            ec = w2 @ u
            ph = np.exp(-1j * np.angle(ec[0]))
            ua = np.diag([ph, np.exp(-1j * np.angle(ec[3]))]) @ ua
            return FamilyParams(0.0, float(s[0] ** 2), ua, ub, "01")
        uu, s, vh = np.linalg.svd(c)
        return FamilyParams(1.0, 1.0, _unitary_to(uu[:, 0], 0), _unitary_to(vh[0, :], 1), "01")
    candidates = []
    for k in (0, 1):
        candidates.append((v[:, k], v[:, 1 - k], w[k], w[1 - k]))
    for cand in candidates:
        got = _try_split(*cand, tol)
        if got is not None:
            return got
    # Degenerate or nearly degenerate support: search the span directly.
    for u in _product_in_span(v[:, 0], v[:, 1], tol):
        e = v[:, 0] - (u.conj() @ v[:, 0]) * u
        if np.linalg.norm(e) < 1e-6:
            e = v[:, 1] - (u.conj() @ v[:, 1]) * u
        e = e / np.linalg.norm(e)
        if abs(u.conj() @ rho @ e) > tol:
            continue
        got = _try_split(u, e, float((u.conj() @ rho @ u).real), float((e.conj() @ rho @ e).real), tol)
        if got is not None:
            return got
    raise NotFamilyError("support does not split into the product/entangled family pattern")


@dataclass(frozen=True)
class FeasibilityReport:
    """Truth values of the four single-node inequalities and their thresholds."""

    ineq_a18: bool
    ineq_a19: bool
    ineq_a20: bool
    ineq_a21: bool
    region_a25: bool
    branch: str
    alpha_bound: float
    beta_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def _leq(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + 1e-15 * max(1.0, abs(rhs))


def feasibility_single_node(p: float, delta: float, alpha: float, beta: float) -> FeasibilityReport:
    """Evaluate where the swapped state keeps the optimal fidelity of the noisy segment.

    The inequalities are non-strict. ``branch`` is ``'p<=1/3'`` or
    ``'p>1/3'``; in the former, the inequalities force
    ``delta`` above ``(1 + sqrt(1 - 4p^2/(1-p)^2))/2``, and a point exactly
    on that floor is reported infeasible.
    """
    x = delta * (1.0 - delta) * (1.0 - p) ** 2
    p2 = p * p
    a, b = alpha, beta
    i18 = _leq(a * b * x, (1 - a) * (1 - b) * p2)
    i19 = _leq(a * (1 - b) * x, (1 - a) * b * p2)
    i20 = _leq((1 - a) * b * x, a * (1 - b) * p2)
    i21 = _leq((1 - a) * (1 - b) * x, a * b * p2)
    in_domain = 0.0 < p < 1.0 and 0.5 <= delta < 1.0 and 0.5 <= a <= 1.0 and 0.5 <= b <= 1.0
    # For p <= 1/3 the delta floor (where x == p^2) is itself excluded.
    on_floor = p <= 1.0 / 3.0 and abs(x - p2) <= 1e-15 * max(p2, 1e-300)
    alpha_bound = p2 / (p2 + x) if p2 + x > 0 else 1.0
    den = (1 - a) * p2 + a * x
    beta_bound = (1 - a) * p2 / den if den > 0 else 1.0
    return FeasibilityReport(
        ineq_a18=i18,
        ineq_a19=i19,
        ineq_a20=i20,
        ineq_a21=i21,
        region_a25=bool(in_domain and not on_floor and i18 and i19 and i20 and i21),
        branch="p<=1/3" if p <= 1.0 / 3.0 else "p>1/3",
        alpha_bound=float(alpha_bound),
        beta_bound=float(beta_bound),
    )


def theorem_fidelity(p: float, delta: float) -> float:
    """``(1 + delta(1-delta)(1-p)^2/p)/2``, the protocol's target inside the region."""
    return 0.5 * (1.0 + delta * (1.0 - delta) * (1.0 - p) ** 2 / p)


def ensemble_average_ofef(ens: OutcomeEnsemble, tol: float = 1e-9) -> float:
    """``sum_i p_i F*(outcome_i)`` with each outcome mapped onto the family."""
    return ens.average(lambda s: family_params_extract(s, tol).ofef())


def average_ofef_single_node(
    p: float, delta: float, alpha: float, beta: float, source: str = "closed_form"
) -> float:
    """Average optimal fidelity after swapping ``rho(p,delta)`` with ``psi(alpha)``.

    Parameters
    ----------
    source : {'closed_form', 'engine'}
        Outcome states from the transcribed expressions or from the Born rule.
    """
    if source == "closed_form":
        ens = post_states_closed_form(p, delta, alpha, beta)
    elif source == "engine":
        ens = measure_node(kron(family_state(p, delta), nmes(alpha)), (1, 2), pvm_basis(beta))
    else:
        raise ValueError(f"unknown source {source!r}")
    return ensemble_average_ofef(ens)


def concurrence_nmes(alpha: float) -> float:
    return float(2.0 * np.sqrt(alpha * (1.0 - alpha)))


def rpbes_combine(alpha1: float, alpha2: float) -> float:
    """Schmidt weight of the pure state whose concurrence is ``C(alpha1) C(alpha2)``."""
    for a in (alpha1, alpha2):
        if not 0.5 <= a <= 1.0:
            raise ValueError(f"alpha={a} outside [1/2, 1]")
    c = concurrence_nmes(alpha1) * concurrence_nmes(alpha2)
    return 0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c * c)))


def alpha_from_concurrence(c: float) -> float:
    return 0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c * c)))


def rpbes_fold(alphas) -> float:
    """Fold any number of pure segments into one effective Schmidt weight."""
    c = 1.0
    for a in alphas:
        if not 0.5 <= a <= 1.0:
            raise ValueError(f"alpha={a} outside [1/2, 1]")
        c *= concurrence_nmes(a)
    return alpha_from_concurrence(c)


def lemma1_bound_check(c1: float, c2: float) -> float:
    """Ceiling ``(1 + C1 C2)/2`` on the end-to-end optimal fidelity."""
    for c in (c1, c2):
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"concurrence {c} outside [0, 1]")
    return 0.5 * (1.0 + c1 * c2)
