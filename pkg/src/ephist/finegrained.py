"""The fundamental distribution over a designated fine-grained history set.

A fine-grained spec fixes one complete orthonormal basis (d rank-1
projectors) per time, in the Heisenberg picture, plus the state. The
distribution assigns w(h) = Re<psi|P_{b_n}(t_n)...P_{b_1}(t_1)|psi> to
every outcome string h = (b_1, ..., b_n); every coarse-grained value is
a class sum of these. The preferred basis is a per-model designation,
not something the engine derives.

h-space enumeration is little-endian in time (b_1 varies fastest),
matching the history-set flattening.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapExceeded, DimensionMismatch, InvariantViolation
from .hilbert import Projector, ProjectorSet, StateVector
from .histories import (
    HistorySet,
    all_extended_probabilities,
    flatten_index,
    unflatten_index,
)
from .coarsegrain import Partition, class_sums

FINE_CAP = 4096


@dataclass(frozen=True)
class FineGrainedSpec:
    """State plus one rank-1 basis slot per time."""

    psi: StateVector
    slots: tuple[ProjectorSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        hs = HistorySet(self.slots)   # validates slot structure and times
        if self.psi.dim != hs.dim:
            raise DimensionMismatch(f"state dim {self.psi.dim} vs slot dim {hs.dim}")
        for slot in self.slots:
            if slot.size != slot.dim or any(p.rank != 1 for p in slot.members):
                raise InvariantViolation(
                    "rank-one-basis", slot.size,
                    f"slot at time {slot.time} is not a complete rank-1 basis")

    @property
    def dim(self) -> int:
        return self.slots[0].dim

    @property
    def n_times(self) -> int:
        return len(self.slots)

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(s.time for s in self.slots)

    def history_set(self) -> HistorySet:
        return HistorySet(self.slots)


@dataclass(frozen=True)
class FineGrainedDistribution:
    """w(h) for every h, flat order (earliest-time outcome fastest)."""

    values: np.ndarray
    shape: tuple[int, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if v.shape != (int(np.prod(self.shape)),):
            raise DimensionMismatch(f"{v.shape[0]} values for shape {self.shape}")
        defect = abs(v.sum() - 1.0)
        if defect > 1e-10:
            raise InvariantViolation("distribution-normalization", defect)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def value(self, h: Sequence[int]) -> float:
        return float(self.values[flatten_index(h, self.shape)])

    def outcomes(self):
        for flat in range(self.size):
            yield unflatten_index(flat, self.shape)


def fundamental_distribution(spec: FineGrainedSpec, cap: int = FINE_CAP) -> FineGrainedDistribution:
    size = spec.dim ** spec.n_times
    if size > cap:
        raise CapExceeded("fine-grained history count", size, cap)
    values = all_extended_probabilities(spec.history_set(), spec.psi, m_cap=cap)
    return FineGrainedDistribution(values, (spec.dim,) * spec.n_times)


def class_sum(dist: FineGrainedDistribution, part: Partition) -> np.ndarray:
    """Per-class sums of w; the extended probabilities of the coarse classes."""
    if part.fine_count != dist.size:
        raise DimensionMismatch(f"partition over {part.fine_count} vs {dist.size} outcomes")
    return class_sums(dist.values, part)


def _slot_groupings(spec: FineGrainedSpec, groupings: Sequence[Sequence[Sequence[int]]]):
    if len(groupings) != spec.n_times:
        raise DimensionMismatch(f"{len(groupings)} groupings for {spec.n_times} times")
    return [Partition(spec.dim, tuple(tuple(g) for g in groups)) for groups in groupings]


def cylinder_history_set(
    spec: FineGrainedSpec, groupings: Sequence[Sequence[Sequence[int]]],
    labels: Sequence[Sequence[str]] | None = None,
) -> HistorySet:
    """Coarse history set whose slot projectors are sums of basis projectors."""
    parts = _slot_groupings(spec, groupings)
    slots = []
    for t, (slot, part) in enumerate(zip(spec.slots, parts)):
        members = []
        for k, g in enumerate(part.classes):
            entries = sum(slot.members[i].entries for i in g)
            label = labels[t][k] if labels else "+".join(slot.members[i].label for i in g)
            members.append(Projector(entries, label=label))
        slots.append(ProjectorSet(tuple(members), time=slot.time))
    return HistorySet(tuple(slots))


def cylinder_partition(
    spec: FineGrainedSpec, groupings: Sequence[Sequence[Sequence[int]]],
) -> Partition:
    """h-space partition whose classes mirror the cylinder set's flat order.

    class_sum over this partition equals the chain extended probabilities
    of cylinder_history_set on the same groupings (multilinearity).
    """
    parts = _slot_groupings(spec, groupings)
    group_of = [p.class_of() for p in parts]
    coarse_shape = [p.size for p in parts]
    fine_shape = (spec.dim,) * spec.n_times
    size = spec.dim ** spec.n_times
    classes: list[list[int]] = [[] for _ in range(int(np.prod(coarse_shape)))]
    for flat in range(size):
        comps = unflatten_index(flat, fine_shape)
        coarse = [int(group_of[t][c]) for t, c in enumerate(comps)]
        classes[flatten_index(coarse, coarse_shape)].append(flat)
    return Partition(size, tuple(tuple(c) for c in classes))
