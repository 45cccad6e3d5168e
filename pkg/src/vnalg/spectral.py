"""Spectral measures on finite sample spaces and their integrals.

A measure here is a finite list of mutually orthogonal projections, one
per atom of the sample space, summing to the identity.  The measurable
sets are all subsets of the atoms, so integration is a finite sum:
``integral(E, f) = sum_i f(i) * P_i`` over the atoms where ``f`` is
defined and the projection is nonzero.

Functions may be undefined on atoms carrying a (numerically) zero
projection; every equality and separation check in the package
quantifies over the remaining atoms only, which is the finite form of
"defined almost everywhere".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotNormal,
    OutOfDisc,
    UndefinedOnSupport,
    UnknownAtom,
)
from .numkernel import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    hs_norm,
    joint_diagonalize,
    operator_norm,
)

__all__ = [
    "Label",
    "SampleSpace",
    "SpectralMeasure",
    "MeasurableFunction",
    "ScalarMeasure",
    "measure_of_set",
    "scalar_measure",
    "spectral_integral",
    "push_forward",
    "pullback",
    "spectral_measure_of_normal",
    "function_calculus",
    "chi",
    "chi_inv",
    "null_atoms",
    "support_atoms",
]

Label = Hashable


@dataclass(frozen=True)
class SampleSpace:
    """Ordered finite collection of distinct atom labels."""

    atoms: tuple[Label, ...]

    def __post_init__(self) -> None:
        if len(self.atoms) < 1:
            raise InvariantViolation(
                "sample space invariant violated: need at least one atom"
            )
        if len(set(self.atoms)) != len(self.atoms):
            raise InvariantViolation(
                "sample space invariant violated: atom labels must be pairwise distinct"
            )

    @property
    def size(self) -> int:
        return len(self.atoms)

    @cached_property
    def _index(self) -> dict:
        return {a: i for i, a in enumerate(self.atoms)}

    def index(self, atom: Label) -> int:
        try:
            return self._index[atom]
        except (KeyError, TypeError):
            raise UnknownAtom(f"atom {atom!r} is not part of the sample space") from None


def _readonly(M: np.ndarray) -> np.ndarray:
    out = np.array(M, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Projection-valued measure: one orthogonal projection per atom.

    Construction validates Hermiticity and idempotence of each atom
    projection, mutual orthogonality, and completeness (the projections
    sum to the identity); violations raise :class:`InvariantViolation`
    naming the failed invariant.
    """

    space: SampleSpace
    projections: tuple[np.ndarray, ...]
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.projections) != self.space.size:
            raise InvariantViolation(
                "spectral measure invariant violated: one projection per atom required"
            )
        projs = tuple(_readonly(as_matrix(P)) for P in self.projections)
        n = projs[0].shape[0]
        rtol = self.tol.residual_tol
        for a, P in zip(self.space.atoms, projs):
            as_matrix(P, dim=n)
            if operator_norm(P - P.conj().T, self.tol) > rtol:
                raise InvariantViolation(
                    f"spectral measure invariant violated: projection at atom {a!r} "
                    "is not Hermitian"
                )
            if operator_norm(P @ P - P, self.tol) > rtol:
                raise InvariantViolation(
                    f"spectral measure invariant violated: projection at atom {a!r} "
                    "is not idempotent"
                )
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if operator_norm(projs[i] @ projs[j], self.tol) > rtol:
                    raise InvariantViolation(
                        "spectral measure invariant violated: projections at atoms "
                        f"{self.space.atoms[i]!r} and {self.space.atoms[j]!r} "
                        "are not orthogonal"
                    )
        total = sum(projs) - np.eye(n)
        if operator_norm(total, self.tol) > rtol:
            raise InvariantViolation(
                "spectral measure invariant violated: projections do not sum "
                "to the identity"
            )
        object.__setattr__(self, "projections", projs)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def projection_at(self, atom: Label) -> np.ndarray:
        return self.projections[self.space.index(atom)]


@dataclass(frozen=True, eq=False)
class MeasurableFunction:
    """Complex function on a finite sample space, one value per atom.

    ``defined[i] == False`` marks an atom where the function has no
    value; such atoms are only acceptable where the paired measure is
    null, and every consumer checks that at its use site.
    """

    space: SampleSpace
    values: np.ndarray
    defined: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        mask = np.asarray(self.defined, dtype=bool).reshape(-1)
        if vals.shape[0] != self.space.size or mask.shape[0] != self.space.size:
            raise InvariantViolation(
                "function invariant violated: need one value and one flag per atom"
            )
        if not np.all(np.isfinite(vals[mask].view(float))):
            raise InvariantViolation(
                "function invariant violated: values must be finite where defined"
            )
        vals = np.where(mask, vals, 0.0 + 0.0j)
        vals.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "defined", mask)

    @classmethod
    def from_values(cls, space: SampleSpace, values, defined=None) -> "MeasurableFunction":
        if defined is None:
            defined = np.ones(space.size, dtype=bool)
        return cls(space, np.asarray(values, dtype=complex), np.asarray(defined, bool))

    @classmethod
    def from_callable(cls, space: SampleSpace, fn: Callable) -> "MeasurableFunction":
        return cls.from_values(space, [fn(a) for a in space.atoms])

    @classmethod
    def constant(cls, space: SampleSpace, value: complex) -> "MeasurableFunction":
        return cls.from_values(space, np.full(space.size, value, dtype=complex))

    def value_at(self, atom: Label) -> complex:
        i = self.space.index(atom)
        if not self.defined[i]:
            raise UndefinedOnSupport(f"function is undefined at atom {atom!r}")
        return complex(self.values[i])

    def map_values(self, fn: Callable) -> "MeasurableFunction":
        """Apply ``fn`` pointwise (the composition ``fn . self``)."""
        vals = [fn(v) if d else 0.0 for v, d in zip(self.values, self.defined)]
        return MeasurableFunction(self.space, np.asarray(vals, complex), self.defined)

    def conj(self) -> "MeasurableFunction":
        return MeasurableFunction(self.space, np.conj(self.values), self.defined)

    def _binary(self, other: "MeasurableFunction", op) -> "MeasurableFunction":
        if self.space != other.space:
            raise DimensionMismatch("functions live on different sample spaces")
        return MeasurableFunction(
            self.space, op(self.values, other.values), self.defined & other.defined
        )

    def __add__(self, other: "MeasurableFunction") -> "MeasurableFunction":
        return self._binary(other, np.add)

    def __mul__(self, other: "MeasurableFunction") -> "MeasurableFunction":
        return self._binary(other, np.multiply)


@dataclass(frozen=True, eq=False)
class ScalarMeasure:
    """Nonnegative mass per atom, e.g. the diagonal matrix elements of a PVM."""

    space: SampleSpace
    masses: np.ndarray
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if m.shape[0] != self.space.size:
            raise InvariantViolation(
                "scalar measure invariant violated: one mass per atom required"
            )
        if np.any(m < -self.tol.value_tol):
            raise InvariantViolation(
                "scalar measure invariant violated: masses must be nonnegative"
            )
        m = np.maximum(m, 0.0)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def total(self) -> float:
        return float(self.masses.sum())


def null_atoms(E: SpectralMeasure, tol: ToleranceConfig = DEFAULT_TOL) -> tuple:
    """Atoms whose projection is numerically zero (operator norm <= rank_tol)."""
    return tuple(
        a
        for a, P in zip(E.space.atoms, E.projections)
        if operator_norm(P, tol) <= tol.rank_tol
    )


def support_atoms(E: SpectralMeasure, tol: ToleranceConfig = DEFAULT_TOL) -> tuple:
    """Atoms carrying a nonzero projection (complement of :func:`null_atoms`)."""
    return tuple(
        a
        for a, P in zip(E.space.atoms, E.projections)
        if operator_norm(P, tol) > tol.rank_tol
    )


def measure_of_set(
    E: SpectralMeasure, atoms: Iterable[Label], tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Projection assigned to a subset of atoms: the sum of its atom projections."""
    total = np.zeros((E.dim, E.dim), dtype=complex)
    seen = set()
    for a in atoms:
        i = E.space.index(a)
        if i in seen:
            continue
        seen.add(i)
        total = total + E.projections[i]
    return total


def scalar_measure(
    E: SpectralMeasure, psi, tol: ToleranceConfig = DEFAULT_TOL
) -> ScalarMeasure:
    """Per-atom masses ``<P_i psi, psi>`` of a vector against the measure."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.shape[0] != E.dim:
        raise DimensionMismatch(
            f"vector of length {v.shape[0]} against a measure on dimension {E.dim}"
        )
    masses = np.array([float(np.real(np.vdot(v, P @ v))) for P in E.projections])
    return ScalarMeasure(E.space, masses, tol)


def spectral_integral(
    E: SpectralMeasure, f: MeasurableFunction, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """The operator ``sum_i f(i) P_i`` over the non-null atoms of ``E``.

    Raises :class:`UndefinedOnSupport` if ``f`` has no value at an atom
    whose projection is nonzero.
    """
    if f.space != E.space:
        raise DimensionMismatch("function and measure live on different sample spaces")
    out = np.zeros((E.dim, E.dim), dtype=complex)
    for i, (a, P) in enumerate(zip(E.space.atoms, E.projections)):
        if operator_norm(P, tol) <= tol.rank_tol:
            continue
        if not f.defined[i]:
            raise UndefinedOnSupport(
                f"function is undefined at non-null atom {a!r}"
            )
        out = out + f.values[i] * P
    return out


def push_forward(
    E: SpectralMeasure,
    phi: Mapping[Label, Label],
    target_space: SampleSpace | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> SpectralMeasure:
    """Transport ``E`` along an atom map: the image atom collects the
    projections of its preimages.

    ``phi`` must assign a target to every source atom.  When
    ``target_space`` is omitted the output atoms appear in order of
    first use; atoms of an explicit target space missed by ``phi``
    receive the zero projection.
    """
    images = []
    for a in E.space.atoms:
        if a not in phi:
            raise UnknownAtom(f"map is not defined at atom {a!r}")
        images.append(phi[a])
    if target_space is None:
        seen: list[Label] = []
        for b in images:
            if b not in seen:
                seen.append(b)
        target_space = SampleSpace(tuple(seen))
    sums = [np.zeros((E.dim, E.dim), dtype=complex) for _ in target_space.atoms]
    for P, b in zip(E.projections, images):
        sums[target_space.index(b)] += P
    return SpectralMeasure(target_space, tuple(sums), tol)


def pullback(
    f: MeasurableFunction, phi: Mapping[Label, Label], source_space: SampleSpace
) -> MeasurableFunction:
    """The composition ``f . phi`` as a function on the source space."""
    values = np.zeros(source_space.size, dtype=complex)
    defined = np.zeros(source_space.size, dtype=bool)
    for i, a in enumerate(source_space.atoms):
        if a not in phi:
            raise UnknownAtom(f"map is not defined at atom {a!r}")
        j = f.space.index(phi[a])
        defined[i] = f.defined[j]
        values[i] = f.values[j]
    return MeasurableFunction(source_space, values, defined)


def _union_find_clusters(values: np.ndarray, gap: float) -> list[list[int]]:
    """Greedy union of indices whose values lie within ``gap`` of each other."""
    parent = list(range(len(values)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= gap:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups)]


def spectral_measure_of_normal(
    T,
    tol: ToleranceConfig = DEFAULT_TOL,
    cluster_tol: float | None = None,
) -> SpectralMeasure:
    """Spectral measure of a normal matrix, atoms labeled by its eigenvalues.

    The Hermitian pair ``(T + T*)/2`` and ``(T - T*)/(2i)`` is jointly
    diagonalized; the joint eigenvalues are clustered by greedy union at
    ``cluster_tol`` (default ``1e-7 * (1 + ||T||)``), each cluster
    labeled by the mean of its eigenvalues and sorted by (real, imag).

    Raises :class:`NotNormal` when ``T`` does not commute with its adjoint.
    """
    M = as_matrix(T)
    nrm = operator_norm(M, tol)
    defect = operator_norm(M @ M.conj().T - M.conj().T @ M, tol)
    if defect > tol.residual_tol * (1.0 + nrm**2):
        raise NotNormal(f"matrix is not normal: commutation defect {defect:.3e}")
    if cluster_tol is None:
        cluster_tol = 1e-7 * (1.0 + nrm)
    re = 0.5 * (M + M.conj().T)
    im = (M - M.conj().T) / 2j
    V = joint_diagonalize([re, im], tol=tol)
    lam = np.diagonal(V.conj().T @ re @ V).real + 1j * np.diagonal(
        V.conj().T @ im @ V
    ).real
    clusters = _union_find_clusters(lam, cluster_tol)
    labeled = []
    for idx in clusters:
        label = complex(np.mean(lam[idx]))
        cols = V[:, idx]
        labeled.append((label, cols @ cols.conj().T))
    labeled.sort(key=lambda t: (t[0].real, t[0].imag))
    space = SampleSpace(tuple(label for label, _ in labeled))
    projs = tuple(0.5 * (P + P.conj().T) for _, P in labeled)
    return SpectralMeasure(space, projs, tol)


def function_calculus(
    T,
    f: Callable | MeasurableFunction,
    tol: ToleranceConfig = DEFAULT_TOL,
    cluster_tol: float | None = None,
) -> np.ndarray:
    """Apply a function to a normal matrix through its spectral measure.

    ``f`` is either a callable evaluated on the eigenvalue labels or a
    :class:`MeasurableFunction` already living on the spectrum's sample
    space.
    """
    E = spectral_measure_of_normal(T, tol, cluster_tol)
    if callable(f) and not isinstance(f, MeasurableFunction):
        fn = MeasurableFunction.from_callable(E.space, f)
    else:
        if f.space != E.space:
            raise DimensionMismatch(
                "function does not live on the spectrum's sample space"
            )
        fn = f
    return spectral_integral(E, fn, tol)


def chi(z: complex) -> complex:
    """Bijection from the complex plane onto the open unit disc: ``z / (|z| + 1)``."""
    z = complex(z)
    return z / (abs(z) + 1.0)


def chi_inv(z: complex, tol: ToleranceConfig = DEFAULT_TOL) -> complex:
    """Inverse of :func:`chi`: ``z / (1 - |z|)`` for ``|z| < 1``."""
    z = complex(z)
    if abs(z) >= 1.0 - tol.value_tol:
        raise OutOfDisc(f"argument with |z| = {abs(z):.6f} lies outside the open disc")
    return z / (1.0 - abs(z))
