import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blindqc.simcore import (
    Angle8,
    GateId,
    PureState,
    Register,
    SimulationError,
    apply,
    apply_matrix,
    circuit_unitary,
    equal_up_to_phase,
    fidelity_up_to_phase,
    gate,
    gate_matrix,
    kron_all,
    measure,
    measure_prob,
    new_state,
    prepare_a_state,
    project_out,
    reduced_density,
)

from conftest import random_qubit


def test_angle8_wraps_and_negates():
    assert Angle8(9) == 1
    assert -Angle8(3) == 5
    assert Angle8(5) + 4 == 1
    assert Angle8(3).doubled() == 6
    assert Angle8(2).radians == pytest.approx(np.pi / 2)


def test_a_matrices_match_named_gates():
    assert np.allclose(gate_matrix("A", 2), gate_matrix("S"))
    assert np.allclose(gate_matrix("A", 4), gate_matrix("Z"))
    assert np.allclose(gate_matrix("A", 1), np.diag([1, np.exp(1j * np.pi / 4)]))
    assert np.array_equal(gate_matrix("A", 0), np.eye(2))


def test_gate_validation():
    with pytest.raises(SimulationError):
        GateId("CNOT", (0, 0))
    with pytest.raises(SimulationError):
        GateId("H", (0, 1))
    with pytest.raises(SimulationError):
        GateId("Y", (0,))
    assert gate("T", 3) == GateId("A", (3,), 1)


def test_wire_zero_is_most_significant():
    psi = apply(new_state(2), gate("X", 0))
    assert psi.amplitudes[2] == 1


def test_apply_matches_kron_oracle(rng):
    n = 3
    psi = PureState(n, kron_all([random_qubit(rng).reshape(2, 1) for _ in range(n)]).reshape(-1))
    for wires in ([0, 2], [2, 0], [1, 2]):
        u = gate_matrix("CNOT")
        out = apply_matrix(psi, u, wires)
        # oracle: build the full matrix by permuting basis states
        full = np.zeros((8, 8), dtype=complex)
        for j in range(8):
            bits = [(j >> (2 - w)) & 1 for w in range(3)]
            sub = bits[wires[0]] * 2 + bits[wires[1]]
            for r in range(4):
                nb = list(bits)
                nb[wires[0]], nb[wires[1]] = r >> 1, r & 1
                full[sum(b << (2 - w) for w, b in enumerate(nb)), j] += u[r, sub]
        assert np.allclose(out.amplitudes, full @ psi.amplitudes)


def test_circuit_unitary_is_product():
    u = circuit_unitary(2, [gate("H", 0), gate("CNOT", 0, 1)])
    expected = gate_matrix("CNOT") @ np.kron(gate_matrix("H"), np.eye(2))
    assert np.allclose(u, expected)


def test_measure_and_project(rng):
    bell = apply_matrix(apply(new_state(2), gate("H", 0)), gate_matrix("CNOT"), [0, 1])
    assert measure_prob(bell, 0) == pytest.approx(0.5)
    bit, rest, index_map = measure(bell, 0, rng)
    assert rest.num_wires == 1 and index_map == {1: 0}
    assert rest.amplitudes[bit] == pytest.approx(1)
    with pytest.raises(SimulationError):
        project_out(new_state(1), 0, 1)


def test_a_state_and_reduced_density():
    a = prepare_a_state(2)
    assert np.allclose(a.amplitudes, np.array([1, 1j]) / np.sqrt(2))
    rho = reduced_density(a.tensor(new_state(1)), [0])
    assert np.allclose(rho, np.outer(a.amplitudes, a.amplitudes.conj()))


def test_equal_up_to_phase():
    assert equal_up_to_phase(gate_matrix("X"), -gate_matrix("X"))
    assert not equal_up_to_phase(gate_matrix("X"), gate_matrix("Z"))


def test_register_keeps_blocks_small(rng):
    reg = Register()
    for label in "abc":
        reg.add(label, new_state(1))
    reg.apply(gate_matrix("H"), ["a"])
    reg.apply(gate_matrix("CNOT"), ["a", "b"])
    assert reg.joint_state(["a", "b"]).num_wires == 2
    with pytest.raises(SimulationError):
        reg.joint_state(["a"])
    bit = reg.measure("a", rng)
    assert reg.prob_one("b") == pytest.approx(bit)
    reg.rename("b", "d")
    assert "d" in reg and "b" not in reg
    reg.discard("c")
    assert sorted(reg.labels) == ["d"]


def test_register_joint_state_orders_labels(rng):
    reg = Register()
    reg.add("x", PureState(1, np.array([0, 1])))
    reg.add("y", new_state(1))
    assert reg.joint_state(["x", "y"]).amplitudes[2] == 1
    assert reg.joint_state(["y", "x"]).amplitudes[1] == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 7), st.integers(0, 2**31))
def test_gates_preserve_norm(n, seed):
    rng = np.random.default_rng(seed)
    psi = PureState(2, np.kron(random_qubit(rng), random_qubit(rng)))
    for g in (gate("A", 0, angle=n), gate("H", 1), gate("CZ", 0, 1), gate("CNOT", 1, 0)):
        psi = apply(psi, g)
    assert psi.norm == pytest.approx(1.0, abs=1e-12)
    assert fidelity_up_to_phase(psi, psi) == pytest.approx(1.0)
