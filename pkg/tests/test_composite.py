"""Tensor-product composites: joint EPs, functionals, records, product rule."""
from pathlib import Path

import numpy as np
import pytest

from conftest import decoherent_fixture, random_model, random_state
from ephist import (
    JOINT_DIM_CAP,
    CapExceeded,
    CompositeSystem,
    DimensionMismatch,
    HistorySet,
    Projector,
    ProjectorSet,
    StateVector,
    construct_records,
    decoherence_functional,
    factor_amplitudes,
    joint_class_operator,
    joint_extended_probability,
    joint_functional,
    load_model,
    product_records,
    product_rule_report,
)

MODELS = Path(__file__).resolve().parent.parent / "models"


def _trivial_factor(d=2):
    hs = HistorySet((ProjectorSet((Projector(np.eye(d)),), time=1.0),))
    return StateVector(np.eye(d)[0]), hs


def _two_factor(rng):
    psi1, hs1 = random_model(rng, d_max=3, n_max=2)
    psi2, hs2 = random_model(rng, d_max=3, n_max=2)
    return CompositeSystem(((psi1, hs1), (psi2, hs2)))


# ------------------------------------------------------------------ structure

def test_composite_validation():
    _, hs = _trivial_factor(2)
    other = StateVector(np.eye(3)[0])
    with pytest.raises(DimensionMismatch):
        CompositeSystem(((other, hs),))
    with pytest.raises(DimensionMismatch):
        CompositeSystem(())


def test_joint_dimension_cap():
    factor = _trivial_factor(2)
    with pytest.raises(CapExceeded) as exc:
        CompositeSystem(tuple(factor for _ in range(13)))   # 2**13 > 4096
    assert exc.value.exit_status == 5
    assert 2 ** 12 <= JOINT_DIM_CAP


def test_joint_state_kron_order(rng):
    psi1 = random_state(rng, 2)
    psi2 = random_state(rng, 3)
    _, hs1 = _trivial_factor(2)
    _, hs2 = _trivial_factor(3)
    cs = CompositeSystem(((psi1, hs1), (psi2, hs2)))
    joint = cs.joint_state().amplitudes
    for i in range(2):
        for j in range(3):
            # leftmost factor is the slow index
            assert abs(joint[i * 3 + j] - psi1.amplitudes[i] * psi2.amplitudes[j]) < 1e-15


def test_joint_flat_round_trip(rng):
    cs = _two_factor(rng)
    for flat in range(cs.joint_count):
        indices = cs.unflatten_joint(flat)
        assert cs.joint_flat(indices) == flat
    # leftmost factor is the slow digit
    first = cs.unflatten_joint(0)
    stepped = cs.unflatten_joint(cs.counts[1])
    assert stepped[1] == first[1]
    assert stepped[0] != first[0]


def test_factor_amplitude_count_checked(rng):
    cs = _two_factor(rng)
    with pytest.raises(DimensionMismatch):
        factor_amplitudes(cs, cs.unflatten_joint(0)[:1])


# ------------------------------------------------------------------ joint EPs

def test_joint_ep_routes_agree(rng):
    """Product-of-amplitudes route == dense joint-class-operator route."""
    cs = _two_factor(rng)
    joint_amps = cs.joint_state().amplitudes
    for flat in range(cs.joint_count):
        indices = cs.unflatten_joint(flat)
        fast = joint_extended_probability(cs, indices)
        op = joint_class_operator(cs, indices)
        slow = float(np.real(np.vdot(joint_amps, op @ joint_amps)))
        assert abs(fast - slow) < 1e-12


def test_joint_functional_matches_branches(rng):
    cs = _two_factor(rng)
    f = joint_functional(cs)
    assert f.shape == (cs.joint_count, cs.joint_count)
    joint_amps = cs.joint_state().amplitudes
    branches = [joint_class_operator(cs, cs.unflatten_joint(a)) @ joint_amps
                for a in range(cs.joint_count)]
    for a in range(cs.joint_count):
        for b in range(cs.joint_count):
            assert abs(f[a, b] - np.vdot(branches[a], branches[b])) < 1e-12


def test_joint_functional_is_kron_of_factor_functionals(rng):
    cs = _two_factor(rng)
    parts = [decoherence_functional(hs, psi).functional for psi, hs in cs.factors]
    assert np.allclose(joint_functional(cs), np.kron(parts[0], parts[1]), atol=1e-12)


def test_joint_functional_cap(rng):
    cs = _two_factor(rng)
    with pytest.raises(CapExceeded):
        joint_functional(cs, m_cap=cs.joint_count - 1)
    with pytest.raises(CapExceeded):
        product_rule_report(cs, m_cap=cs.joint_count - 1)


# --------------------------------------------------------------- product rule

def test_product_rule_report_consistent(rng):
    cs = _two_factor(rng)
    rep = product_rule_report(cs)
    worst = 0.0
    for flat in range(cs.joint_count):
        amps = factor_amplitudes(cs, cs.unflatten_joint(flat))
        assert abs(rep.joint_ep[flat] - np.prod(amps).real) < 1e-14
        assert abs(rep.factor_ep_product[flat] - np.prod([z.real for z in amps])) < 1e-14
        worst = max(worst, abs(rep.joint_ep[flat] - rep.factor_ep_product[flat]))
    assert abs(rep.max_violation - worst) < 1e-14


def test_product_rule_holds_for_recorded_factors(rng):
    """Decoherent factors have real chain amplitudes, so Re distributes."""
    for _ in range(5):
        f1 = decoherent_fixture(rng, d=3, k=2)
        f2 = decoherent_fixture(rng, d=3, k=2)
        cs = CompositeSystem((f1, f2))
        assert product_rule_report(cs).max_violation < 1e-12


def test_qubit_pair_breaks_product_rule():
    """Pinned instance: both factor amplitudes are (1 - i)/4, so every joint
    history misses the product rule by exactly 1/16."""
    a = load_model(MODELS / "qubit_a.model")
    b = load_model(MODELS / "qubit_b.model")
    cs = CompositeSystem(((a.psi, a.history_set), (b.psi, b.history_set)))
    rep = product_rule_report(cs)
    assert abs(rep.max_violation - 1.0 / 16.0) < 1e-15
    assert rep.max_violation >= 0.01


# -------------------------------------------------------------------- records

def test_product_records(rng):
    f1 = decoherent_fixture(rng, d=3, k=2)
    f2 = decoherent_fixture(rng, d=3, k=2)
    cs = CompositeSystem((f1, f2))
    sets = [construct_records(hs, psi) for psi, hs in cs.factors]
    joint_records = product_records(cs, sets)

    assert joint_records.size == cs.joint_count
    assert joint_records.dim == cs.joint_dim
    assert joint_records.t_rec == max(rs.t_rec for rs in sets)
    expected_completion = sets[0].completion_index * cs.counts[1] + sets[1].completion_index
    assert joint_records.completion_index == expected_completion

    # labels pair up factor record labels, slow factor first
    for flat in range(cs.joint_count):
        i, j = divmod(flat, cs.counts[1])
        assert joint_records.members[flat].label == (
            f"{sets[0].members[i].label}|{sets[1].members[j].label}")

    # strong record property on the joint space
    joint_amps = cs.joint_state().amplitudes
    branches = [joint_class_operator(cs, cs.unflatten_joint(b)) @ joint_amps
                for b in range(cs.joint_count)]
    total = np.zeros((cs.joint_dim, cs.joint_dim), dtype=complex)
    for a, rec in enumerate(joint_records.members):
        total += rec.entries
        for b in range(cs.joint_count):
            want = branches[b] if a == b else np.zeros(cs.joint_dim)
            assert np.linalg.norm(rec.entries @ branches[b] - want) < 1e-9
    assert np.allclose(total, np.eye(cs.joint_dim), atol=1e-12)

    # the records read the joint extended probabilities back out
    for a in range(cs.joint_count):
        prob = float(np.real(np.vdot(joint_amps, joint_records.members[a].entries @ joint_amps)))
        assert abs(prob - joint_extended_probability(cs, cs.unflatten_joint(a))) < 1e-12


def test_product_records_validation(rng):
    f1 = decoherent_fixture(rng, d=3, k=2)
    f2 = decoherent_fixture(rng, d=3, k=2)
    cs = CompositeSystem((f1, f2))
    rs1 = construct_records(f1[1], f1[0])
    with pytest.raises(DimensionMismatch):
        product_records(cs, [rs1])
