"""Tensor products of unentangled, non-interacting subsystems.

The joint extended probability is Re of the PRODUCT of per-factor
amplitudes <psi_k|C_k|psi_k>, which is generally not the product of the
per-factor extended probabilities (Re of a product is not the product
of Re's). For recorded factor histories the amplitudes are real and the
product rule comes back.

Kronecker ordering: leftmost factor is the slowest-varying index, both
for the joint state and for joint (per-factor index tuple) flattening.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .errors import CapExceeded, DimensionMismatch
from .hilbert import Projector, StateVector
from .histories import (
    M_CAP,
    HistoryIndex,
    HistorySet,
    branch_matrix,
    chain_amplitude,
    class_operator,
    unflatten_index,
)
from .records import RecordSet

JOINT_DIM_CAP = 4096


@dataclass(frozen=True)
class CompositeSystem:
    """Ordered (state, history set) pairs, one per non-interacting factor."""

    factors: tuple[tuple[StateVector, HistorySet], ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        if not self.factors:
            raise DimensionMismatch("composite needs at least one factor")
        for psi, hs in self.factors:
            if psi.dim != hs.dim:
                raise DimensionMismatch(f"factor state dim {psi.dim} vs history-set dim {hs.dim}")
        if self.joint_dim > JOINT_DIM_CAP:
            raise CapExceeded("joint dimension", self.joint_dim, JOINT_DIM_CAP)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(psi.dim for psi, _ in self.factors)

    @property
    def joint_dim(self) -> int:
        return prod(self.dims)

    @property
    def counts(self) -> tuple[int, ...]:
        """Histories per factor."""
        return tuple(hs.size for _, hs in self.factors)

    @property
    def joint_count(self) -> int:
        return prod(self.counts)

    def joint_state(self) -> StateVector:
        amps = self.factors[0][0].amplitudes
        for psi, _ in self.factors[1:]:
            amps = np.kron(amps, psi.amplitudes)
        return StateVector(amps)

    def joint_flat(self, indices: Sequence[HistoryIndex]) -> int:
        flat = 0
        for (_, hs), idx in zip(self.factors, indices):
            flat = flat * hs.size + hs.flat(idx)
        return flat

    def unflatten_joint(self, joint_flat: int) -> tuple[HistoryIndex, ...]:
        out = []
        for _, hs in reversed(self.factors):
            out.append(HistoryIndex(unflatten_index(joint_flat % hs.size, hs.shape)))
            joint_flat //= hs.size
        return tuple(reversed(out))


def _check_indices(cs: CompositeSystem, indices: Sequence[HistoryIndex]) -> None:
    if len(indices) != len(cs.factors):
        raise DimensionMismatch(f"{len(indices)} indices for {len(cs.factors)} factors")


def factor_amplitudes(cs: CompositeSystem, indices: Sequence[HistoryIndex]) -> tuple[complex, ...]:
    _check_indices(cs, indices)
    return tuple(chain_amplitude(hs, idx, psi) for (psi, hs), idx in zip(cs.factors, indices))


def joint_extended_probability(cs: CompositeSystem, indices: Sequence[HistoryIndex]) -> float:
    """Re of the product of per-factor amplitudes."""
    z = 1.0 + 0.0j
    for zk in factor_amplitudes(cs, indices):
        z *= zk
    return float(z.real)


def joint_class_operator(cs: CompositeSystem, indices: Sequence[HistoryIndex]) -> np.ndarray:
    """Dense C1 x ... x CN on the joint space (the independent slow path)."""
    _check_indices(cs, indices)
    c = class_operator(cs.factors[0][1], indices[0])
    for (_, hs), idx in zip(cs.factors[1:], indices[1:]):
        c = np.kron(c, class_operator(hs, idx))
    return c


def joint_functional(cs: CompositeSystem, m_cap: int = M_CAP) -> np.ndarray:
    """Joint decoherence functional over joint flat indices.

    Computed from per-factor branch inner products; equals the Kronecker
    product of the factor functionals.
    """
    if cs.joint_count > m_cap:
        raise CapExceeded("joint history count", cs.joint_count, m_cap)
    d = np.ones((1, 1), dtype=np.complex128)
    for psi, hs in cs.factors:
        b = branch_matrix(hs, psi)
        d = np.kron(d, b.conj().T @ b)
    return d


def product_records(cs: CompositeSystem, record_sets: Sequence[RecordSet]) -> RecordSet:
    """Joint records as Kronecker products of the per-factor records.

    Callers obtain the per-factor sets from construct_records, which
    raises NotDecoherent for any unrecorded factor before this runs.
    """
    if len(record_sets) != len(cs.factors):
        raise DimensionMismatch(f"{len(record_sets)} record sets for {len(cs.factors)} factors")
    for (psi, hs), rs in zip(cs.factors, record_sets):
        if rs.dim != hs.dim:
            raise DimensionMismatch(f"record dim {rs.dim} vs factor dim {hs.dim}")
        if rs.size != hs.size:
            raise DimensionMismatch(f"{rs.size} records for {hs.size} factor histories")
    if cs.joint_count > M_CAP:
        raise CapExceeded("joint history count", cs.joint_count, M_CAP)

    members = []
    for joint in np.ndindex(*cs.counts):   # leftmost factor slowest, matching kron
        entries = record_sets[0].members[joint[0]].entries
        label = record_sets[0].members[joint[0]].label
        for rs, k in zip(record_sets[1:], joint[1:]):
            entries = np.kron(entries, rs.members[k].entries)
            label = f"{label}|{rs.members[k].label}"
        members.append(Projector(entries, label=label))
    completion = 0
    for rs, count in zip(record_sets, cs.counts):
        completion = completion * count + rs.completion_index
    return RecordSet(tuple(members),
                     t_rec=max(rs.t_rec for rs in record_sets),
                     completion_index=completion)


@dataclass(frozen=True)
class ProductRuleReport:
    """Joint EP values against the product of per-factor EP values."""

    joint_ep: np.ndarray
    factor_ep_product: np.ndarray
    max_violation: float

    def __post_init__(self):
        for name in ("joint_ep", "factor_ep_product"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def product_rule_report(cs: CompositeSystem, m_cap: int = M_CAP) -> ProductRuleReport:
    if cs.joint_count > m_cap:
        raise CapExceeded("joint history count", cs.joint_count, m_cap)
    joint = np.empty(cs.joint_count)
    product = np.empty(cs.joint_count)
    for flat in range(cs.joint_count):
        indices = cs.unflatten_joint(flat)
        amps = factor_amplitudes(cs, indices)
        joint[flat] = float(np.prod(amps).real)
        product[flat] = float(np.prod([z.real for z in amps]))
    return ProductRuleReport(joint, product, float(np.abs(joint - product).max()))
