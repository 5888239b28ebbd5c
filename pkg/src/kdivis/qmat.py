"""Dense complex-matrix and superoperator algebra for 2-level systems.

Vectorization is column-stacking throughout the package: ``vec(A)`` stacks
the columns of ``A`` (Fortran order), so that

    vec(A X B) = (B^T o A) vec(X)

with ``o`` the Kronecker product, and the superoperator of the conjugation
``X -> U X U^dag`` is ``kron(conj(U), U)``.

Choi matrices are normalized to trace one for trace-preserving maps:
``choi_of(E) = (I o E)(|Psi><Psi|)`` with ``|Psi> = (|00> + |11>)/sqrt(2)``.
"""

from __future__ import annotations

import numpy as np

from . import config
from .errors import NotHermitian, SingularMap

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

#: Lowering operator |0><1| in the convention that |1> is the excited state.
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T

# Columns are vec(I), vec(sigma_x), vec(sigma_y), vec(sigma_z).
_PAULI_COLS = np.column_stack(
    [np.asarray(p).reshape(-1, order="F") for p in PAULIS]
)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvec(vector: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`; the output dimension is inferred."""
    v = np.asarray(vector, dtype=complex).reshape(-1)
    dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def sandwich_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of X -> A X B."""
    return np.kron(np.asarray(b, dtype=complex).T, np.asarray(a, dtype=complex))


def conjugation_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of X -> U X U^dag."""
    u = np.asarray(u, dtype=complex)
    return np.kron(u.conj(), u)


def superop_from_kraus(kraus_ops) -> np.ndarray:
    """Superoperator of X -> sum_k K_k X K_k^dag."""
    out = None
    for k in kraus_ops:
        term = np.kron(np.asarray(k, dtype=complex).conj(), k)
        out = term if out is None else out + term
    return out


def identity_superop() -> np.ndarray:
    return np.eye(4, dtype=complex)


def depolarizing_superop() -> np.ndarray:
    """The completely depolarizing channel rho -> I/2."""
    v = vec(IDENTITY)
    return 0.5 * np.outer(v, v.conj())


def pauli_diagonal_superop(mu) -> np.ndarray:
    """Unital qubit map scaling the Bloch components by ``mu = (m1, m2, m3)``."""
    weights = (1.0, *mu)
    out = np.zeros((4, 4), dtype=complex)
    for w, p in zip(weights, PAULIS):
        v = vec(p)
        out += 0.5 * w * np.outer(v, v.conj())
    return out


def apply_superop(e: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply a superoperator in matrix form to an operator."""
    return unvec(np.asarray(e, dtype=complex) @ vec(x))


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Map composition ``(a . b)(X) = a(b(X))``, i.e. the matrix product."""
    return np.asarray(a, dtype=complex) @ np.asarray(b, dtype=complex)


def invert(
    e: np.ndarray,
    cond_threshold: float | None = None,
    tolerances: config.Tolerances = config.DEFAULT,
) -> np.ndarray:
    """Inverse superoperator.

    Raises :class:`SingularMap` when the condition number exceeds the
    threshold; callers decide how to handle singular propagator timepoints.
    """
    if cond_threshold is None:
        cond_threshold = tolerances.cond_threshold
    e = np.asarray(e, dtype=complex)
    s = np.linalg.svd(e, compute_uv=False)
    if s[-1] == 0.0 or not np.isfinite(s).all():
        raise SingularMap("superoperator is exactly singular", cond=np.inf)
    cond = s[0] / s[-1]
    if cond > cond_threshold:
        raise SingularMap(
            f"condition number {cond:.3e} exceeds threshold {cond_threshold:.1e}",
            cond=cond,
        )
    return np.linalg.inv(e)


def reshuffle(m: np.ndarray) -> np.ndarray:
    """Row/column reshuffle exchanging superoperator and (unnormalized) Choi
    forms; an involution. Supports stacked ``(..., 4, 4)`` input.
    """
    m = np.asarray(m, dtype=complex)
    lead = m.shape[:-2]
    t = m.reshape(*lead, 2, 2, 2, 2)
    n = t.ndim
    perm = list(range(n - 4)) + [n - 1, n - 3, n - 2, n - 4]
    return t.transpose(perm).reshape(*lead, 4, 4)


def choi_of(e: np.ndarray) -> np.ndarray:
    """Trace-1 Choi matrix ``(I o E)(|Psi><Psi|)`` of a superoperator.

    Supports stacked ``(..., 4, 4)`` input.
    """
    return reshuffle(e) / 2.0


def superop_of_choi(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`choi_of`."""
    return reshuffle(c) * 2.0


def trace_norm(a: np.ndarray) -> float:
    """Trace norm ``Tr sqrt(A^dag A)``, the sum of singular values."""
    return float(np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False).sum())


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Trace distance ``0.5 * ||rho1 - rho2||_1`` between two states."""
    diff = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def min_eigenvalue(
    h: np.ndarray, tolerances: config.Tolerances = config.DEFAULT
) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Raises :class:`NotHermitian` when the symmetry check fails.
    """
    h = np.asarray(h, dtype=complex)
    dev = np.abs(h - h.conj().T).max()
    if dev > tolerances.check:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    return float(np.linalg.eigvalsh(h)[0])


def partial_trace(x: np.ndarray, traced_factor: int) -> np.ndarray:
    """Trace a 4x4 two-qubit operator over one tensor factor (0 or 1)."""
    t = np.asarray(x, dtype=complex).reshape(2, 2, 2, 2)
    if traced_factor == 0:
        return np.einsum("ijil->jl", t)
    if traced_factor == 1:
        return np.einsum("ijkj->ik", t)
    raise ValueError("traced_factor must be 0 or 1")


def pauli_transfer_matrix(e: np.ndarray) -> np.ndarray:
    """Real Pauli transfer matrix ``F_mn = Tr(sigma_m E(sigma_n)) / 2``.

    Row/column 0 corresponds to the identity; for a trace-preserving map the
    first row is ``(1, 0, 0, 0)``. Supports stacked ``(..., 4, 4)`` input.
    """
    e = np.asarray(e, dtype=complex)
    return 0.5 * (_PAULI_COLS.conj().T @ e @ _PAULI_COLS).real


def bloch_affine(e: np.ndarray):
    """Affine Bloch form ``r -> M r + c`` of a qubit map.

    Returns ``(M, c)`` with shapes ``(..., 3, 3)`` and ``(..., 3)``.
    """
    f = pauli_transfer_matrix(e)
    return f[..., 1:, 1:], f[..., 1:, 0]


def density_from_bloch(r) -> np.ndarray:
    """State ``(I + r . sigma) / 2`` from a Bloch vector with ``|r| <= 1``."""
    r = np.asarray(r, dtype=float)
    return 0.5 * (IDENTITY + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def bloch_from_density(rho: np.ndarray) -> np.ndarray:
    """Bloch vector ``(Tr(sigma_j rho))_j`` of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(s @ rho).real for s in PAULIS[1:]])


def validate_density_matrix(
    rho: np.ndarray, tolerances: config.Tolerances = config.DEFAULT
) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; returns the input array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 state, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tolerances.hermiticity:
        raise NotHermitian(f"state deviates from Hermitian by {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tolerances.hermiticity:
        raise ValueError(f"state trace {tr} is not 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -tolerances.check:
        raise ValueError(f"state has negative eigenvalue {lo:.3e}")
    return rho


def is_trace_preserving(
    e: np.ndarray, tol: float | None = None,
    tolerances: config.Tolerances = config.DEFAULT,
) -> bool:
    """Whether ``vec(I)^dag E = vec(I)^dag`` within tolerance."""
    if tol is None:
        tol = tolerances.check
    vid = vec(IDENTITY)
    return bool(np.abs(vid.conj() @ np.asarray(e, dtype=complex) - vid.conj()).max() <= tol)


def is_hermiticity_preserving(
    e: np.ndarray, tol: float | None = None,
    tolerances: config.Tolerances = config.DEFAULT,
) -> bool:
    """Whether the map sends Hermitian inputs to Hermitian outputs.

    Equivalent to Hermiticity of the Choi matrix.
    """
    if tol is None:
        tol = tolerances.check
    c = choi_of(e)
    return bool(np.abs(c - c.conj().T).max() <= tol)


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` deterministic, roughly equidistributed unit vectors, shape (n, 3)."""
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = i * (np.pi * (3.0 - np.sqrt(5.0)))
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
