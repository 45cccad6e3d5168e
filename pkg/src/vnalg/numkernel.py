"""Dense complex-matrix primitives.

Everything downstream (spectral measures, commutants, the generation
criterion) reduces to four kernels implemented here: Hermitian
eigendecomposition, nullspace extraction, Hilbert-Schmidt
orthonormalization, and joint diagonalization of commuting Hermitian
families.  All kernels are pure functions of their inputs and the
supplied :class:`ToleranceConfig`, so results are deterministic and safe
to compute concurrently.

Matrices are plain ``numpy.ndarray`` values of dtype complex128; the
Hilbert-Schmidt inner product is ``trace(A* B)``, which coincides with
the ordinary inner product of the flattened arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvariantViolation,
    NoConvergence,
    NotCommuting,
    NotHermitian,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "as_matrix",
    "hs_inner",
    "hs_norm",
    "herm_eig",
    "nullspace",
    "orthonormalize_hs",
    "operator_norm",
    "joint_diagonalize",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Cutoffs used by every numerical decision in the package.

    rank_tol
        Relative singular-value cutoff: directions with residual below
        ``rank_tol * (1 + scale)`` count as belonging to a kernel.
    residual_tol
        Relative matrix-residual cutoff for equality of operators.
    value_tol
        Cutoff for equality of complex scalars (function values, labels).
    """

    rank_tol: float = 1e-9
    residual_tol: float = 1e-8
    value_tol: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("rank_tol", "residual_tol", "value_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvariantViolation(
                    f"tolerance invariant violated: {name}={v!r} must lie in (0, 1)"
                )


DEFAULT_TOL = ToleranceConfig()


def as_matrix(A, *, dim: int | None = None) -> np.ndarray:
    """Validate and return ``A`` as a square complex128 array.

    Raises :class:`InvariantViolation` if ``A`` is not square 2-D with
    finite entries, or if ``dim`` is given and does not match.
    """
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InvariantViolation(
            f"matrix invariant violated: expected a square matrix, got shape {M.shape}"
        )
    if not np.all(np.isfinite(M.view(float))):
        raise InvariantViolation("matrix invariant violated: entries must be finite")
    if dim is not None and M.shape[0] != dim:
        raise InvariantViolation(
            f"matrix invariant violated: expected dimension {dim}, got {M.shape[0]}"
        )
    return M


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``trace(A* B)``."""
    return complex(np.vdot(A, B))


def hs_norm(A: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(A))


def _check_hermitian(A: np.ndarray, tol: ToleranceConfig) -> None:
    defect = hs_norm(A - A.conj().T)
    if defect > tol.residual_tol * (1.0 + hs_norm(A)):
        raise NotHermitian(f"matrix is not Hermitian: symmetry defect {defect:.3e}")


def herm_eig(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, V)`` with real eigenvalues ascending and the
    columns of the unitary ``V`` the matching eigenvectors, so that
    ``A = V @ diag(eigenvalues) @ V*``.

    Raises :class:`NotHermitian` when the symmetry defect exceeds
    ``residual_tol * (1 + ||A||)`` and :class:`NoConvergence` when the
    underlying iteration fails.
    """
    M = as_matrix(A)
    _check_hermitian(M, tol)
    H = 0.5 * (M + M.conj().T)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hardware dependent
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    return w, V


def nullspace(L, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the kernel of a rectangular complex matrix.

    Works on the Gram matrix ``L* L``: its eigenvectors are candidate
    kernel directions, classified by the actual residual ``||L v||``
    against ``rank_tol * (1 + sigma_max)``.  Classifying by residual
    rather than by Gram eigenvalue keeps exact kernels from being lost
    to the float64 noise floor of forming ``L* L``.

    Returns a (possibly empty) list of orthonormal kernel vectors.
    """
    M = np.asarray(L, dtype=complex)
    if M.ndim != 2:
        raise InvariantViolation(
            f"matrix invariant violated: expected a 2-D array, got shape {M.shape}"
        )
    if not np.all(np.isfinite(M.view(float))):
        raise InvariantViolation("matrix invariant violated: entries must be finite")
    n = M.shape[1]
    if n == 0:
        return []
    G = M.conj().T @ M
    G = 0.5 * (G + G.conj().T)
    try:
        w, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    sigma_max = float(np.sqrt(max(w[-1], 0.0)))
    cutoff = tol.rank_tol * (1.0 + sigma_max)
    residuals = np.linalg.norm(M @ V, axis=0)
    return [V[:, i].copy() for i in range(n) if residuals[i] <= cutoff]


def orthonormalize_hs(mats, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormalization of a list of same-size matrices.

    Modified Gram-Schmidt with one reorthogonalization pass; inputs that
    are linearly dependent on their predecessors (residual below
    ``rank_tol * (1 + ||input||)``) are dropped.  The output spans the
    same subspace of matrix space and is processed in input order, so
    the result is deterministic.
    """
    basis: list[np.ndarray] = []
    dim = None
    for A in mats:
        M = as_matrix(A, dim=dim)
        dim = M.shape[0]
        scale = 1.0 + hs_norm(M)
        R = M
        for _ in range(2):  # second pass restores orthogonality lost to cancellation
            for B in basis:
                R = R - hs_inner(B, R) * B
        r = hs_norm(R)
        if r > tol.rank_tol * scale:
            basis.append(R / r)
    return basis


def operator_norm(A, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest singular value, computed as ``sqrt(lambda_max(A* A))``."""
    M = as_matrix(A)
    try:
        w = np.linalg.eigvalsh(M.conj().T @ M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    return float(np.sqrt(max(w[-1], 0.0)))


def _commutation_defect(A: np.ndarray, B: np.ndarray) -> float:
    return hs_norm(A @ B - B @ A)


def _cluster_indices(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Split sorted real values into clusters separated by more than ``gap``."""
    order = np.argsort(values, kind="stable")
    clusters: list[list[int]] = [[int(order[0])]]
    for prev, curr in zip(order[:-1], order[1:]):
        if values[curr] - values[prev] <= gap:
            clusters[-1].append(int(curr))
        else:
            clusters.append([int(curr)])
    return [np.array(c) for c in clusters]


def _refine(cols: np.ndarray, ops: list[np.ndarray], tol: ToleranceConfig) -> np.ndarray:
    """Rotate the columns of ``cols`` so every operator in ``ops`` becomes diagonal."""
    if not ops or cols.shape[1] == 1:
        return cols
    sub = cols.conj().T @ ops[0] @ cols
    sub = 0.5 * (sub + sub.conj().T)
    w, U = np.linalg.eigh(sub)
    cols = cols @ U
    scale = 1.0 + float(np.max(np.abs(w)))
    for idx in _cluster_indices(w, tol.residual_tol * scale):
        if len(idx) > 1:
            cols[:, idx] = _refine(cols[:, idx], ops[1:], tol)
    return cols


def joint_diagonalize(
    mats, dim: int | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Common eigenbasis of a pairwise-commuting Hermitian family.

    Returns a unitary ``V`` with ``V* A V`` diagonal for every ``A`` in
    ``mats``.  Works by eigenspace splitting: diagonalize the first
    operator, then recurse with the remaining operators inside each
    eigenvalue cluster (clusters merged when gaps fall below
    ``residual_tol`` at the family's scale).

    ``dim`` is only consulted for an empty family, where the identity of
    that size is returned.

    Raises :class:`NotHermitian` or :class:`NotCommuting` on invalid input.
    """
    ops = [as_matrix(A) for A in mats]
    if not ops:
        if dim is None:
            raise InvariantViolation(
                "joint_diagonalize of an empty family needs an explicit dim"
            )
        return np.eye(dim, dtype=complex)
    n = ops[0].shape[0]
    for A in ops:
        as_matrix(A, dim=n)
        _check_hermitian(A, tol)
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            defect = _commutation_defect(ops[i], ops[j])
            if defect > tol.residual_tol * (1.0 + hs_norm(ops[i]) * hs_norm(ops[j])):
                raise NotCommuting(
                    f"family is not commuting: defect {defect:.3e} "
                    f"between members {i} and {j}"
                )
    hermitized = [0.5 * (A + A.conj().T) for A in ops]
    return _refine(np.eye(n, dtype=complex), hermitized, tol)
