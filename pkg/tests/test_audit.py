import itertools

import numpy as np
import pytest

from blindqc.audit import (
    AuditError,
    bob_quantum_view,
    leakage_of,
    qotp_mixture,
    transcript_independence,
    transcript_tv,
)
from blindqc.compiler import Circuit, compile_blind, compile_weak_blind
from blindqc.simcore import gate

from conftest import random_product


def test_mixture_oracle_two_qubits(rng):
    # independent oracle: explicit sum over the 16 key pairs with np.kron
    states = random_product(2, rng)
    x, z = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
    rho = np.zeros((4, 4), dtype=complex)
    for a0, b0, a1, b1 in itertools.product((0, 1), repeat=4):
        p0 = np.linalg.matrix_power(x, a0) @ np.linalg.matrix_power(z, b0)
        p1 = np.linalg.matrix_power(x, a1) @ np.linalg.matrix_power(z, b1)
        v = np.kron(p0 @ states[0], p1 @ states[1])
        rho += np.outer(v, v.conj()) / 16
    assert np.allclose(qotp_mixture(states), rho, atol=1e-14)
    assert np.allclose(rho, np.eye(4) / 4, atol=1e-12)


def test_one_wire_view_is_maximally_mixed():
    view = bob_quantum_view(Circuit(1, [gate("H", 0)]), 1)
    assert view.num_qubits == 1 and view.maximally_mixed


def test_two_inputs_two_ancillas_view():
    view = bob_quantum_view(Circuit(2, [gate("T", 0)]), 1)
    assert view.num_qubits == 4
    assert view.deviation <= 1e-12
    assert np.allclose(np.trace(view.density), 1)
    assert np.allclose(view.density, view.density.conj().T)


def test_blind_view_window():
    view = bob_quantum_view(Circuit(2, [gate("CNOT", 0, 1)]), 2, window=4)
    assert view.num_qubits == 4 and view.maximally_mixed


def test_negative_control_without_encryption():
    view = bob_quantum_view(Circuit(1, [gate("H", 0)]), 1, encrypt=False)
    assert not view.maximally_mixed
    assert np.allclose(view.density, np.diag([1, 0]))


def test_budget_enforced():
    with pytest.raises(AuditError):
        bob_quantum_view(Circuit(1, [gate("T", 0)]), 2)


def test_leakage_descriptors(rng):
    c = Circuit(2, [gate("CNOT", 0, 1), gate("T", 1)])
    weak = leakage_of(compile_weak_blind(c, rng))
    blind = leakage_of(compile_blind(c, rng))
    assert weak.cnot_positions == ((0, 0, 1),) and weak.size == 2
    assert blind.cnot_positions is None and blind.size == 2
    empty = leakage_of(compile_weak_blind(Circuit(1), rng))
    assert empty.size == 0 and empty.cnot_positions == ()


def test_independence_protocol1_pair():
    a = Circuit(2, [gate("T", 0), gate("CNOT", 0, 1)])
    b = Circuit(2, [gate("A", 0, angle=3), gate("CNOT", 0, 1)])
    report = transcript_independence(a, b, 1, exact_sessions=16)
    assert report.passed and report.shapes_identical and report.max_law_deviation <= 1e-12


def test_independence_protocol2_pair():
    a = Circuit(2, [gate("CNOT", 0, 1)])
    report = transcript_independence(a, Circuit(2), 2, exact_sessions=4, compile_options={"min_columns": 2})
    assert report.passed


def test_identical_circuits():
    c = Circuit(1, [gate("S", 0)])
    assert transcript_independence(c, c, 1, exact_sessions=8, mc_sessions=2000).passed


def test_leakage_mismatch_is_a_precondition():
    report = transcript_independence(Circuit(2, [gate("CNOT", 0, 1)]), Circuit(2, [gate("T", 0)]), 1)
    assert report.status == "PRECONDITION" and not report.passed


def test_tv_statistic():
    same = [(0, 1, 0)] * 10
    assert transcript_tv(same, same) == 0
    assert transcript_tv([(0, 0, 0)] * 10, [(1, 1, 1)] * 10) == 1
