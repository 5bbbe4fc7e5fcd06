import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blindqc.frame import (
    FrameError,
    KeyFrame,
    decrypt,
    encrypt,
    exhaustive_rule_check,
    pauli_word,
    update_for_gate,
)
from blindqc.simcore import PureState, apply, gate, gate_matrix, same_up_to_phase

from conftest import random_qubit


@pytest.mark.parametrize("g", [gate("X", 0), gate("Z", 0), gate("H", 0), gate("S", 0), gate("T", 0)]
                         + [gate("A", 0, angle=n) for n in range(8)])
def test_single_qubit_rules_exhaustive(g):
    report = exhaustive_rule_check(g)
    assert (report.passed, report.total) == (4, 4)


@pytest.mark.parametrize("kind", ["CNOT", "CZ"])
@pytest.mark.parametrize("wires", [(0, 1), (1, 0)])
def test_two_qubit_rules_exhaustive(kind, wires):
    report = exhaustive_rule_check(gate(kind, *wires))
    assert (report.passed, report.total) == (16, 16)


def test_documented_rules():
    f = KeyFrame([1, 0], [0, 1])
    assert update_for_gate(f, gate("H", 0))[0].pair(0) == (0, 1)
    assert update_for_gate(f, gate("S", 0))[0].pair(0) == (1, 1)
    f2, corr = update_for_gate(KeyFrame([1], [1]), gate("T", 0))
    assert (f2.x, f2.z, f2.s) == ([1], [0], [1]) and corr == [("S", 0)]
    g, _ = update_for_gate(KeyFrame([1, 1], [0, 1]), gate("CNOT", 0, 1))
    assert g.pair(0) == (1, 1) and g.pair(1) == (0, 1)


def test_pending_s_blocks_noncommuting_gates():
    f = KeyFrame([1], [0], [1])
    for g in (gate("H", 0),):
        with pytest.raises(FrameError):
            update_for_gate(f, g)
    with pytest.raises(FrameError):
        update_for_gate(KeyFrame([1, 0], [0, 0], [1, 0]), gate("CZ", 0, 1))
    with pytest.raises(FrameError):
        decrypt(PureState(1, np.array([1, 0])), f)


def test_clear_s_folds_into_z():
    f = KeyFrame([1], [0], [1])
    f.clear_s(0)
    assert (f.z, f.s) == ([1], [0])


def test_pauli_word_order():
    assert np.allclose(pauli_word(1, 1), gate_matrix("X") @ gate_matrix("Z"))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_encrypt_decrypt_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    psi = PureState(n, np.ones(2**n) / np.sqrt(2**n) * np.exp(1j * rng.normal(size=2**n)))
    f = KeyFrame.random(n, rng)
    assert np.allclose(decrypt(encrypt(psi, f), f).amplitudes, psi.amplitudes)


def test_frame_tracks_clifford_circuit(rng):
    # keys pushed through a Clifford circuit decrypt the physical result
    gates = [gate("H", 0), gate("CNOT", 0, 1), gate("S", 1), gate("CZ", 1, 0), gate("X", 0), gate("Z", 1)]
    psi = PureState(2, np.kron(random_qubit(rng), random_qubit(rng)))
    for x0, z0, x1, z1 in itertools.product((0, 1), repeat=4):
        f = KeyFrame([x0, x1], [z0, z1])
        phys = encrypt(psi, f)
        logical = psi
        for g in gates:
            phys, logical = apply(phys, g), apply(logical, g)
            f, _ = update_for_gate(f, g)
        assert same_up_to_phase(decrypt(phys, f), logical)
