"""Shared random-model builders. Every test seeds its own Generator so
the suite stays reproducible run to run."""
import numpy as np
import pytest

from ephist import (
    HistorySet,
    Projector,
    ProjectorSet,
    StateVector,
    branch_matrix,
    decoherence_functional,
)


def haar_basis(rng, d):
    """Rows are an orthonormal basis, Haar-distributed."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return (q * (np.diag(r) / np.abs(np.diag(r)))).T


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector(v / np.linalg.norm(v))


def random_slot(rng, d, time, k=None):
    """Random exhaustive projector set: a Haar basis split into k groups."""
    basis = haar_basis(rng, d)
    k = int(k or rng.integers(2, d + 1))
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False))
    members = []
    for gi, g in enumerate(np.split(np.arange(d), cuts)):
        p = sum(np.outer(basis[i], basis[i].conj()) for i in g)
        members.append(Projector(p, label=f"g{gi}"))
    return ProjectorSet(tuple(members), time=float(time))


def random_model(rng, d_max=6, n_max=3):
    d = int(rng.integers(2, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    psi = random_state(rng, d)
    hs = HistorySet(tuple(random_slot(rng, d, t + 1.0) for t in range(n)))
    return psi, hs


def random_partition_classes(rng, m):
    k = int(rng.integers(1, m + 1))
    assign = rng.integers(0, k, size=m)
    return tuple(tuple(int(i) for i in np.flatnonzero(assign == c))
                 for c in range(k) if (assign == c).any())


def decoherent_fixture(rng, d=None, k=None):
    """Exactly medium-decoherent two-slot model.

    Slot 1 is a random projector set; its branches are orthogonal
    (single-slot chains always are), so a second slot built from the
    normalized branch directions plus their complement records slot 1
    and every cross term vanishes identically.
    """
    d = int(d or rng.integers(3, 7))
    psi = random_state(rng, d)
    slot1 = random_slot(rng, d, 1.0, k=k or rng.integers(2, d))
    b = branch_matrix(HistorySet((slot1,)), psi)
    norms = np.linalg.norm(b, axis=0)
    members = [
        Projector(np.outer(b[:, i] / n, (b[:, i] / n).conj()), label=f"r{i}")
        for i, n in enumerate(norms)
    ]
    comp = np.eye(d) - sum(m.entries for m in members)
    members.append(Projector(comp, label="rest"))
    hs = HistorySet((slot1, ProjectorSet(tuple(members), time=2.0)))
    return psi, hs


def diagonal_fixture(rng, d=4, n=3):
    """Slots sharing one eigenbasis: chains are exclusive projectors, so
    the functional is exactly diagonal for every state."""
    basis = haar_basis(rng, d)
    psi = random_state(rng, d)
    slots = []
    for t in range(n):
        k = int(rng.integers(2, d + 1))
        cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False))
        members = []
        for gi, g in enumerate(np.split(rng.permutation(d), cuts)):
            p = sum(np.outer(basis[i], basis[i].conj()) for i in g)
            members.append(Projector(p, label=f"t{t}g{gi}"))
        slots.append(ProjectorSet(tuple(members), time=float(t + 1)))
    return psi, HistorySet(tuple(slots))


def non_decoherent_fixture(rng, threshold=1e-3, d_max=6, n_max=3):
    """Rejection-sample a model whose worst cross term is >= threshold."""
    while True:
        psi, hs = random_model(rng, d_max=d_max, n_max=n_max)
        if hs.size < 2:
            continue
        report = decoherence_functional(hs, psi)
        if report.max_offdiagonal >= threshold:
            return psi, hs


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
