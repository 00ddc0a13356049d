"""Finite-dimensional Hilbert-space primitives.

States, Hermitian operators, projectors, exhaustive projector sets, and
Heisenberg-picture time evolution. Everything is a dense complex matrix;
the engine targets desk-scale dimensions (d <= ~64). hbar = 1 throughout
and model time is a dimensionless ordered label.

Values are immutable after construction (frozen dataclasses over
read-only arrays) and all operations are pure, so concurrent use needs
no synchronization. Invalid inputs are rejected at construction, never
silently repaired.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvariantViolation

TOL_NORM = 1e-12   # vector norms
TOL_HERM = 1e-12   # Hermiticity, entrywise
TOL_OP = 1e-10     # operator identities (idempotency, completeness, unitarity)


def _frozen_array(values, shape_kind: str) -> np.ndarray:
    a = np.array(values, dtype=np.complex128)
    if shape_kind == "vector" and a.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {a.shape}")
    if shape_kind == "matrix" and (a.ndim != 2 or a.shape[0] != a.shape[1]):
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateVector:
    """Unit complex vector; the initial state of the closed system."""

    amplitudes: np.ndarray
    tol: float = TOL_NORM

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen_array(self.amplitudes, "vector"))
        defect = abs(np.linalg.norm(self.amplitudes) - 1.0)
        if defect > self.tol:
            raise InvariantViolation("state-norm", defect)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray
    tol: float = TOL_HERM

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries, "matrix"))
        defect = np.abs(self.entries - self.entries.conj().T).max(initial=0.0)
        if defect > self.tol:
            raise InvariantViolation("hermiticity", defect)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zero(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent matrix representing one alternative."""

    entries: np.ndarray
    label: str = ""
    tol: float = TOL_OP

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries, "matrix"))
        herm = np.abs(self.entries - self.entries.conj().T).max(initial=0.0)
        if herm > TOL_HERM:
            raise InvariantViolation("projector-hermiticity", herm, self.label)
        idem = np.abs(self.entries @ self.entries - self.entries).max(initial=0.0)
        if idem > self.tol:
            raise InvariantViolation("projector-idempotency", idem, self.label)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def rank(self) -> int:
        return int(round(self.entries.trace().real))


def rank_one_projector(vec, label: str = "") -> Projector:
    """|v><v| / <v|v> for a nonzero vector v."""
    v = np.asarray(vec, dtype=np.complex128)
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise InvariantViolation("nonzero-vector", n, "cannot project onto a zero vector")
    v = v / n
    return Projector(np.outer(v, v.conj()), label=label)


@dataclass(frozen=True)
class ProjectorSetReport:
    completeness_defect: float
    exclusivity_defect: float
    idempotency_defect: float
    tol: float

    @property
    def passes(self) -> bool:
        worst = max(self.completeness_defect, self.exclusivity_defect, self.idempotency_defect)
        return worst <= self.tol


def validate_projector_set(
    members: Union["ProjectorSet", Sequence[Projector], Sequence[np.ndarray]],
    tol: float = TOL_OP,
) -> ProjectorSetReport:
    """Check that the members form an exhaustive set of exclusive alternatives.

    Accepts a ProjectorSet, a sequence of Projector, or raw matrices, so
    deliberately broken sets (which ProjectorSet construction rejects)
    can still be reported on.
    """
    if isinstance(members, ProjectorSet):
        members = members.members
    mats = [m.entries if isinstance(m, Projector) else np.asarray(m, dtype=np.complex128) for m in members]
    if not mats:
        raise InvariantViolation("nonempty-projector-set", 1.0, "no members given")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionMismatch("projector set members have mixed dimensions")
    completeness = np.abs(sum(mats) - np.eye(d)).max()
    idempotency = max(np.abs(m @ m - m).max(initial=0.0) for m in mats)
    exclusivity = 0.0
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            exclusivity = max(exclusivity, np.abs(a @ b).max(initial=0.0))
    return ProjectorSetReport(float(completeness), float(exclusivity), float(idempotency), tol)


@dataclass(frozen=True)
class ProjectorSet:
    """Exhaustive, mutually exclusive projectors at one time label."""

    members: tuple[Projector, ...]
    time: float
    tol: float = TOL_OP

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        report = validate_projector_set(self.members, self.tol)
        if not report.passes:
            worst = max(report.completeness_defect, report.exclusivity_defect,
                        report.idempotency_defect)
            raise InvariantViolation("projector-set", worst,
                                     f"completeness {report.completeness_defect:.3e}, "
                                     f"exclusivity {report.exclusivity_defect:.3e}")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.members)


def projector_set_from_basis(vectors, time: float, labels: Sequence[str] | None = None) -> ProjectorSet:
    """Rank-1 projector set from the rows of an orthonormal basis array."""
    vecs = np.asarray(vectors, dtype=np.complex128)
    labels = labels or [str(i) for i in range(len(vecs))]
    return ProjectorSet(tuple(rank_one_projector(v, l) for v, l in zip(vecs, labels)), time)


@dataclass(frozen=True)
class EvolutionSpec:
    """Dynamics: a Hamiltonian, or explicit unitaries per time label."""

    hamiltonian: HermitianOperator | None = None
    unitaries: Mapping[float, np.ndarray] | None = field(default=None)

    def __post_init__(self):
        if (self.hamiltonian is None) == (self.unitaries is None):
            raise InvariantViolation("evolution-form", 1.0,
                                     "exactly one of hamiltonian / unitaries must be given")
        if self.unitaries is not None:
            frozen = {}
            for t, u in self.unitaries.items():
                u = _frozen_array(u, "matrix")
                defect = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
                if defect > TOL_OP:
                    raise InvariantViolation("unitarity", defect, f"unitary at time {t}")
                frozen[float(t)] = u
            object.__setattr__(self, "unitaries", frozen)

    @classmethod
    def from_hamiltonian(cls, h: HermitianOperator) -> "EvolutionSpec":
        return cls(hamiltonian=h)

    @classmethod
    def from_unitaries(cls, unitaries: Mapping[float, np.ndarray]) -> "EvolutionSpec":
        return cls(unitaries=unitaries)

    @classmethod
    def zero(cls, dim: int) -> "EvolutionSpec":
        return cls(hamiltonian=HermitianOperator.zero(dim))


def hermitian_exponential(h: HermitianOperator, t: float) -> np.ndarray:
    """exp(-i H t) via eigendecomposition; raises if the result is not unitary."""
    w, v = np.linalg.eigh(h.entries)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    defect = np.abs(u.conj().T @ u - np.eye(h.dim)).max()
    if defect > TOL_OP:
        raise InvariantViolation("unitarity", defect, "eigendecomposition produced a non-unitary")
    return u


def heisenberg_projector(p: Projector, t: float, evo: EvolutionSpec) -> Projector:
    """exp(+iHt) P exp(-iHt), or U(t)^dag P U(t) for explicit unitaries."""
    if evo.hamiltonian is not None:
        if evo.hamiltonian.dim != p.dim:
            raise DimensionMismatch(
                f"projector dim {p.dim} vs Hamiltonian dim {evo.hamiltonian.dim}")
        if not np.isfinite(t):
            raise InvariantViolation("finite-time", abs(t))
        u = hermitian_exponential(evo.hamiltonian, t)
    else:
        if float(t) not in evo.unitaries:
            raise InvariantViolation("known-time", float(t),
                                     f"no explicit unitary at time {t}")
        u = evo.unitaries[float(t)]
        if u.shape[0] != p.dim:
            raise DimensionMismatch(f"projector dim {p.dim} vs unitary dim {u.shape[0]}")
    return Projector(u.conj().T @ p.entries @ u, label=p.label, tol=p.tol)
