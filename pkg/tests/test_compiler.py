import numpy as np
import pytest

from blindqc.compiler import (
    APPROX_ALPHABET,
    REFERENCE_AXES,
    BobGate,
    Circuit,
    CompileError,
    FrameToggle,
    TeleportSlot,
    approximate_single_qubit,
    axis_alignment,
    axis_table,
    brick_fills,
    brick_unitary,
    compile_blind,
    compile_weak_blind,
    compiled_reference_unitary,
    make_brick,
    padded_columns,
    phase_distance,
    random_circuit,
    representations,
    route_adjacent,
    table1_axis,
    tlike_word_matrix,
    word_matrix,
)
from blindqc.simcore import circuit_unitary, equal_up_to_phase, gate, gate_matrix


def logical_unitary(compiled):
    """Reference unitary with the routing permutation undone."""
    n = compiled.num_wires
    perm = compiled.output_perm
    p = np.zeros((2**n, 2**n))
    for j in range(2**n):
        bits = [(j >> (n - 1 - w)) & 1 for w in range(n)]
        k = sum(bits[perm[l]] << (n - 1 - l) for l in range(n))
        p[k, j] = 1
    return p @ compiled_reference_unitary(compiled)


def test_table_axes_match_printed_directions():
    for row in axis_table():
        assert row["match"] == pytest.approx(1.0, abs=1e-9)


def test_first_row_axis_direction():
    axis, _ = table1_axis(("T", "H", "T", "H"))
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    expected = np.array([c, s, c]) / np.linalg.norm([c, s, c])
    assert np.allclose(abs(axis @ expected), 1, atol=1e-9)


def test_parallel_axis_remark():
    # the fourth word's axis lines up (antiparallel) with HTHT, not with THTH
    assert axis_alignment(("Tdg", "H", "Tdg", "H"), ("H", "T", "H", "T")) == pytest.approx(-1, abs=1e-9)
    assert abs(axis_alignment(("Tdg", "H", "Tdg", "H"), ("T", "H", "T", "H"))) < 0.9


def test_word_matrix_oracle():
    h, t = gate_matrix("H"), gate_matrix("A", 1)
    assert np.allclose(tlike_word_matrix(("T", "H", "T", "H")), t @ h @ t @ h)
    # units act left to right in time
    assert np.allclose(word_matrix((1, 3)), h @ gate_matrix("A", 3) @ h @ t)


def test_representations_are_exact():
    for template, size in (("block", 4), ("host", 3)):
        for g in ("H", "S", "X", "Z"):
            target = gate_matrix(g)
            reps = representations(target, template)
            assert reps, (template, g)
            for angles, (px, pz) in reps:
                assert len(angles) == size
                pauli = np.linalg.matrix_power(gate_matrix("X"), px) @ np.linalg.matrix_power(gate_matrix("Z"), pz)
                if template == "block":
                    built = word_matrix(angles)
                else:
                    built = gate_matrix("A", angles[2]) @ word_matrix(angles[:2])
                assert equal_up_to_phase(built, pauli @ target, 1e-10)


def test_brick_fills_give_cnot():
    for control in (0, 1):
        fills = brick_fills(control)
        assert len(fills) >= 1
        target = gate_matrix("CNOT") if control == 0 else circuit_unitary(2, [gate("CNOT", 1, 0)])
        for first, second in fills:
            assert equal_up_to_phase(brick_unitary(first, second), target, 1e-10)
            assert first[control] in ((2, 0), (6, 0)) and second[control] == (0, 0)


def test_identity_and_cnot_bricks_share_shape(rng):
    ident, cnot = make_brick("identity"), make_brick("cnot", rng)
    assert ident.shape() == cnot.shape()
    assert equal_up_to_phase(ident.unitary(), np.eye(4), 1e-10)
    assert equal_up_to_phase(cnot.unitary(), gate_matrix("CNOT"), 1e-10)
    with pytest.raises(CompileError):
        make_brick("swap")


def test_weak_blind_plain_layout(rng):
    c = Circuit(2, [gate("T", 0), gate("H", 1), gate("CNOT", 0, 1), gate("X", 1)])
    comp = compile_weak_blind(c, rng)
    kinds = [type(s).__name__ for s in comp.slots if not isinstance(s, FrameToggle)]
    assert kinds == ["TeleportSlot", "BobGate", "BobGate", "TeleportSlot"]
    assert comp.leakage.cnot_positions == ((2, 0, 1),)
    assert all(s.kind in ("H", "CNOT") for s in comp.slots if isinstance(s, BobGate))


@pytest.mark.parametrize("protocol,options", [(1, {}), (1, {"uniform": True}), (2, {})])
def test_compilers_preserve_unitary(protocol, options, rng):
    for _ in range(15):
        n = int(rng.integers(1, 5))
        c = random_circuit(n, int(rng.integers(0, 15)), rng)
        comp = (compile_weak_blind if protocol == 1 else compile_blind)(c, rng, **options)
        assert equal_up_to_phase(logical_unitary(comp), circuit_unitary(n, c.instructions), 1e-9)


def test_uniform_mode_hides_single_qubit_gates(rng):
    a = Circuit(2, [gate("T", 0), gate("CNOT", 0, 1), gate("H", 1)])
    b = Circuit(2, [gate("S", 1), gate("CNOT", 0, 1), gate("X", 0)])
    assert compile_weak_blind(a, rng, uniform=True).shape() == compile_weak_blind(b, rng, uniform=True).shape()
    # the plain form shows where the H sits
    assert compile_weak_blind(a, rng).shape() != compile_weak_blind(b, rng).shape()


def test_blind_shape_depends_on_size_only(rng):
    a = Circuit(3, [gate("CNOT", 0, 2), gate("T", 1)])
    b = Circuit(3, [gate("H", 2)])
    ca, cb = compile_blind(a, rng, min_columns=8), compile_blind(b, rng, min_columns=8)
    assert ca.shape() == cb.shape()
    assert ca.leakage.cnot_positions is None
    assert {s.kind for s in ca.slots if isinstance(s, BobGate)} == {"H", "CZ"}


def test_idle_slots_use_angle_zero(rng):
    comp = compile_blind(Circuit(2), rng, min_columns=2)
    assert all(t.angle == 0 for t in comp.teleports)


def test_routing_uses_adjacent_cnots():
    ops, perm = route_adjacent(Circuit(4, [gate("CNOT", 0, 3)]))
    assert all(abs(op[1] - op[2]) == 1 for op in ops if op[0] == "CNOT")
    assert sorted(perm) == [0, 1, 2, 3]


def test_column_padding():
    assert padded_columns(3) == 4
    assert padded_columns(0) == 0
    assert padded_columns(1, min_columns=6) == 6


def test_caps(rng):
    with pytest.raises(CompileError):
        compile_blind(Circuit(13), rng)
    with pytest.raises(CompileError):
        compile_blind(Circuit(2, [gate("CNOT", 0, 1)] * 80), rng)
    with pytest.raises(CompileError):
        Circuit(2, [gate("CZ", 0, 1)])


def test_teleport_ids_are_sequential(rng):
    comp = compile_blind(random_circuit(3, 10, rng), rng)
    assert [t.slot_id for t in comp.teleports] == list(range(len(comp.teleports)))
    assert all(isinstance(t, TeleportSlot) for t in comp.teleports)


def test_approximation_exact_for_reachable_word():
    target = tlike_word_matrix(("T", "H", "Tdg", "H"))
    result = approximate_single_qubit(target, 4)
    assert result.distance < 1e-9
    assert phase_distance(result.matrix, target) < 1e-9
    assert set(result.word) <= set(APPROX_ALPHABET)


def test_approximation_monotone_in_budget():
    theta = 0.3
    target = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    dists = [approximate_single_qubit(target, d, beam_width=20000).distance for d in range(0, 9)]
    assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    assert dists[-1] < dists[0]
    with pytest.raises(CompileError):
        approximate_single_qubit(target, 13)
    with pytest.raises(CompileError):
        approximate_single_qubit(np.ones((2, 2)), 2)


def test_table_words_are_rotations():
    for word, _ in REFERENCE_AXES:
        u = tlike_word_matrix(word)
        assert np.allclose(u @ u.conj().T, np.eye(2))
        _, angle = table1_axis(word)
        assert 0 < angle < 2 * np.pi
