"""Record projectors: the engine's criterion for a settleable bet.

A strong record set {R_a} satisfies R_a C_b |psi> = delta_ab C_b |psi>;
it exists exactly when the history set is medium decoherent, and then
the records are projectors onto the branch directions. A weak record
only reproduces the probabilities, Re<psi|R_b C_a|psi> = delta_ba p(a).

Construction is deterministic: branches are orthonormalized by modified
Gram-Schmidt (with one re-orthogonalization pass) in flat index order,
zero branches (norm <= 1e-12) get rank-0 records, and the orthogonal
complement of the branch span is absorbed into the record of the lowest
flat index with a nonzero branch. Any completion choice preserves the
strong-record property since the complement annihilates every branch;
this one is fixed for reproducibility.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllBranchesZero, DimensionMismatch, InvariantViolation, NotDecoherent
from .hilbert import Projector, StateVector, validate_projector_set
from .histories import (
    DEFAULT_DEC_TOL,
    HistorySet,
    all_extended_probabilities,
    branch_matrix,
    decoherence_functional,
    offdiagonal_offenders,
)

ZERO_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class RecordSet:
    """One projector per flattened history index, at a time after the last slot."""

    members: tuple[Projector, ...]
    t_rec: float
    completion_index: int   # flat index whose record absorbed the complement subspace

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        report = validate_projector_set(self.members)
        if not report.passes:
            worst = max(report.completeness_defect, report.exclusivity_defect,
                        report.idempotency_defect)
            raise InvariantViolation("record-set", worst)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def size(self) -> int:
        return len(self.members)


def _check_record_set(hs: HistorySet, rs: RecordSet) -> None:
    if rs.dim != hs.dim:
        raise DimensionMismatch(f"record dim {rs.dim} vs history-set dim {hs.dim}")
    if rs.size != hs.size:
        raise DimensionMismatch(f"{rs.size} records for {hs.size} histories")


def construct_records(hs: HistorySet, psi: StateVector, tol: float = DEFAULT_DEC_TOL) -> RecordSet:
    """Build the branch-projection record set of a medium-decoherent history set."""
    report = decoherence_functional(hs, psi, tol)
    if not report.medium_decoherent:
        raise NotDecoherent(offdiagonal_offenders(report.functional, tol), tol)

    b = branch_matrix(hs, psi)
    norms = np.linalg.norm(b, axis=0)
    nonzero = [i for i in range(hs.size) if norms[i] > ZERO_BRANCH_TOL]
    if not nonzero:
        raise AllBranchesZero()

    d = hs.dim
    frames: dict[int, np.ndarray] = {}
    for i in nonzero:
        v = b[:, i].copy()
        for _ in range(2):   # MGS with one re-orthogonalization pass
            for q in frames.values():
                v -= q * np.vdot(q, v)
        n = np.linalg.norm(v)
        if n < ZERO_BRANCH_TOL:
            raise InvariantViolation(
                "independent-branches", n,
                f"branch {i} is numerically dependent on earlier branches")
        frames[i] = v / n

    q = np.column_stack([frames[i] for i in nonzero])
    complement = np.eye(d) - q @ q.conj().T
    members = []
    for i in range(hs.size):
        if i in frames:
            r = np.outer(frames[i], frames[i].conj())
            if i == nonzero[0]:
                r = r + complement
            members.append(Projector(r, label=hs.history_label(_idx_of(hs, i))))
        else:
            members.append(Projector(np.zeros((d, d)), label=hs.history_label(_idx_of(hs, i))))
    return RecordSet(tuple(members), t_rec=max(hs.times) + 1.0, completion_index=nonzero[0])


def _idx_of(hs: HistorySet, flat: int):
    from .histories import HistoryIndex, unflatten_index
    return HistoryIndex(unflatten_index(flat, hs.shape))


@dataclass(frozen=True)
class RecordCheckReport:
    max_defect: float
    tolerance: float

    @property
    def passes(self) -> bool:
        return self.max_defect <= self.tolerance


def verify_strong_records(
    hs: HistorySet, psi: StateVector, rs: RecordSet, tol: float = DEFAULT_DEC_TOL
) -> RecordCheckReport:
    """max over (a, b) of || R_a C_b psi - delta_ab C_b psi ||."""
    _check_record_set(hs, rs)
    b = branch_matrix(hs, psi)
    worst = 0.0
    for a, r in enumerate(rs.members):
        resid = r.entries @ b
        resid[:, a] -= b[:, a]
        worst = max(worst, float(np.linalg.norm(resid, axis=0).max()))
    return RecordCheckReport(worst, tol)


def verify_weak_records(
    hs: HistorySet, psi: StateVector, rs: RecordSet, tol: float = DEFAULT_DEC_TOL
) -> RecordCheckReport:
    """max over (b, a) of | Re<psi|R_b C_a|psi> - delta_ba p(a) |."""
    _check_record_set(hs, rs)
    b = branch_matrix(hs, psi)
    ep = np.real(psi.amplitudes.conj() @ b)
    worst = 0.0
    for beta, r in enumerate(rs.members):
        row = np.real((r.entries @ psi.amplitudes).conj() @ b)
        row[beta] -= ep[beta]
        worst = max(worst, float(np.abs(row).max()))
    return RecordCheckReport(worst, tol)


@dataclass(frozen=True)
class CorrelationReport:
    """Per-history record/history correlation defects.

    ``defects[a]`` is |<psi|R_a|psi> - Re<psi|C_a|psi>|. For histories
    with negative extended probability, ``negative_bound_ok[a]`` states
    whether both |<psi|R_a|psi>| and |EP| are below epsilon -- the only
    regime in which a negative value can be epsilon-recorded at all.
    """

    defects: np.ndarray
    record_probs: np.ndarray
    ep_probs: np.ndarray
    epsilon: float
    negative_bound_ok: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        for name in ("defects", "record_probs", "ep_probs"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def max_defect(self) -> float:
        return float(self.defects.max(initial=0.0))

    @property
    def passes(self) -> bool:
        return self.max_defect < self.epsilon


def record_correlation_report(
    hs: HistorySet, psi: StateVector, rs: RecordSet, epsilon: float = DEFAULT_DEC_TOL
) -> CorrelationReport:
    _check_record_set(hs, rs)
    ep = all_extended_probabilities(hs, psi)
    rec = np.array([
        float(np.vdot(psi.amplitudes, r.entries @ psi.amplitudes).real) for r in rs.members
    ])
    defects = np.abs(rec - ep)
    flags = tuple(
        (i, bool(abs(rec[i]) < epsilon and abs(ep[i]) < epsilon))
        for i in range(hs.size) if ep[i] < 0
    )
    return CorrelationReport(defects, rec, ep, epsilon, flags)
