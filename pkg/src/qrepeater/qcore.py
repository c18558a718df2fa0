"""Dense complex linear algebra for systems of up to four qubits.

Matrices are plain ``numpy.ndarray`` objects. Composite systems follow the
convention that the leftmost tensor factor carries the most significant
index, so a chain ``A, N1, ..., B`` is laid out in that order.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

STRUCT_TOL = 1e-10
EIG_TOL = 1e-9

_VALID_DIMS = (2, 4, 8, 16)
_SQ = 1.0 / np.sqrt(2.0)

# Columns are the magic basis vectors expressed in the computational basis.
MAGIC = np.array(
    [
        [_SQ, -1j * _SQ, 0, 0],
        [0, 0, _SQ, -1j * _SQ],
        [0, 0, -_SQ, -1j * _SQ],
        [_SQ, 1j * _SQ, 0, 0],
    ],
    dtype=complex,
)


class DimensionError(ValueError):
    """Raised when matrix dimensions are inconsistent with the request."""


class NotHermitianError(ValueError):
    """Raised when a Hermitian input is required but not supplied."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def _two_qubit(m: np.ndarray) -> np.ndarray:
    m = _square(m)
    if m.shape != (4, 4):
        raise DimensionError(f"expected a two-qubit (4x4) matrix, got {m.shape}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square matrices with power-of-two size."""
    a = _square(a)
    b = _square(b)
    if not (_is_pow2(a.shape[0]) and _is_pow2(b.shape[0])):
        raise DimensionError("kron operands must have power-of-two dimension")
    return np.kron(a, b)


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    """Left-to-right Kronecker product of a sequence of matrices."""
    out = None
    for m in mats:
        out = np.asarray(m) if out is None else kron(out, m)
    if out is None:
        raise ValueError("kron_all needs at least one operand")
    return out


def partial_trace(
    rho: np.ndarray, subsystem_dims: Sequence[int], keep: Iterable[int]
) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Operator on the composite space.
    subsystem_dims : sequence of int
        Local dimensions, most significant first.
    keep : iterable of int
        Indices of subsystems that survive. Their relative order is preserved.

    Returns
    -------
    ndarray
        Reduced operator on the kept subsystems.
    """
    rho = _square(rho)
    dims = [int(d) for d in subsystem_dims]
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise DimensionError("keep must be non-empty")
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError(
            f"subsystem dims {dims} do not match matrix dimension {rho.shape[0]}"
        )
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"keep indices {keep} out of range")
    n = len(dims)
    t = rho.reshape(dims + dims)
    row = list(range(n))
    col = [k + n if k in keep else k for k in range(n)]
    out_idx = keep + [k + n for k in keep]
    red = np.einsum(t, row + col, out_idx)
    dk = int(np.prod([dims[k] for k in keep]))
    return red.reshape(dk, dk)


def partial_transpose(rho: np.ndarray, subsystem: int = 1) -> np.ndarray:
    """Partial transpose of a two-qubit operator on one subsystem."""
    rho = _two_qubit(rho)
    if subsystem not in (0, 1):
        raise DimensionError(f"subsystem must be 0 or 1, got {subsystem}")
    t = rho.reshape(2, 2, 2, 2)
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def is_hermitian(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(
        np.all(np.abs(m - m.conj().T) <= tol)
    )


def herm_eigs(m: np.ndarray, tol: float = STRUCT_TOL, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.

    Parameters
    ----------
    m : ndarray
        Hermitian matrix, at most 16x16 in practice.
    tol : float
        Hermiticity tolerance on the input.
    max_sweeps : int
        Cap on full cyclic sweeps.

    Returns
    -------
    w : ndarray
        Real eigenvalues sorted in descending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = np.array(_square(m), dtype=complex)
    if not is_hermitian(a, tol):
        raise NotHermitianError("herm_eigs requires a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off <= 1e-16 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-18 * scale:
                    continue
                # Phase-strip the pivot, then do a real symmetric rotation.
                ph = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    sign = 1.0 if theta >= 0 else -1.0
                    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # Rotation J acting on columns p, q with A <- J^H A J.
                jpp, jpq = c, s * ph
                jqp, jqq = -s * np.conj(ph), c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = colp * jpp + colq * jqp
                a[:, q] = colp * jpq + colq * jqq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = np.conj(jpp) * rowp + np.conj(jqp) * rowq
                a[q, :] = np.conj(jpq) * rowp + np.conj(jqq) * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * jpp + vq * jqp
                v[:, q] = vp * jpq + vq * jqq
    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigh_desc(m: np.ndarray):
    """LAPACK Hermitian eigensolver with the same descending convention."""
    w, v = np.linalg.eigh(0.5 * (m + np.conj(np.transpose(m))))
    return w[::-1], v[:, ::-1]


def magic_basis_transform(rho: np.ndarray) -> np.ndarray:
    """Express a two-qubit operator in the magic basis."""
    rho = _two_qubit(rho)
    return MAGIC.conj().T @ rho @ MAGIC


def is_density(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """True iff ``m`` is Hermitian, positive semidefinite and unit trace."""
    try:
        m = _square(m)
    except DimensionError:
        return False
    if m.shape[0] not in _VALID_DIMS:
        return False
    if not np.all(np.isfinite(m)):
        return False
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m) - 1.0) > tol:
        return False
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return bool(w.min() >= -tol)


def check_density(m: np.ndarray, tol: float = STRUCT_TOL, name: str = "rho") -> np.ndarray:
    """Return ``m`` as a complex array or raise ``ValueError`` if it is not a state."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in _VALID_DIMS:
        raise DimensionError(f"{name} must be a 2, 4, 8 or 16 dimensional square matrix")
    if not is_density(m, tol):
        raise ValueError(f"{name} is not a density matrix within tolerance {tol}")
    return m


def ket(bits: str) -> np.ndarray:
    """Computational basis vector for a bit string such as ``'01'``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    """Projector onto a (not necessarily normalized) vector."""
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b`` for Hermitian operands."""
    w = np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))
    return 0.5 * float(np.abs(w).sum())
