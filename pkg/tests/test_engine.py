import numpy as np
import pytest

from blindqc.compiler import Circuit, random_circuit
from blindqc.engine import (
    EXECUTED_ALPHABET,
    Alice,
    Bob,
    ProtocolError,
    Transcript,
    alice_decide,
    bob_step,
    run_session,
    session_rngs,
)
from blindqc.simcore import PureState, fidelity_up_to_phase, gate
from blindqc.wire import Message, qubit_transfer

from conftest import direct_output, random_product

PLUS = np.array([1, 1]) / np.sqrt(2)


def test_hadamard_on_zero_gives_plus():
    r = run_session(Circuit(1, [gate("H", 0)]), 1, alice_seed=4)
    assert fidelity_up_to_phase(r.output, PureState(1, PLUS)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("cascade", ["default", "faithful"])
def test_t_on_plus_every_seed(cascade):
    expected = PureState(1, np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2))
    seen = set()
    for seed in range(64):
        r = run_session(Circuit(1, [gate("T", 0)]), 1, alice_seed=seed, inputs=[PLUS], cascade=cascade)
        assert fidelity_up_to_phase(r.output, expected) >= 1 - 1e-10
        bits = r.transcript.bits()
        seen.add(bits[1])
    assert seen == {0, 1}


@pytest.mark.parametrize("protocol,options", [(1, {}), (1, {"uniform": True}), (2, {})])
@pytest.mark.parametrize("cascade", ["default", "faithful"])
def test_random_sessions_match_direct_simulation(protocol, options, cascade, rng):
    for i in range(12):
        n = int(rng.integers(1, 4))
        c = random_circuit(n, int(rng.integers(1, 12)), rng)
        inputs = random_product(n, rng)
        r = run_session(c, protocol, alice_seed=i, inputs=inputs, cascade=cascade, compile_options=options)
        assert fidelity_up_to_phase(r.output, direct_output(c, inputs)) >= 1 - 1e-9
        assert set(r.bob.executed) <= EXECUTED_ALPHABET


def test_message_order_invariants(rng):
    c = random_circuit(2, 8, rng)
    t = run_session(c, 2, alice_seed=1).transcript
    types = [m.type for _, m in t.entries]
    announce = types.index("CircuitAnnounce")
    assert set(types[:announce]) == {"QubitTransfer"}
    assert "QubitTransfer" not in types[announce:]
    slots = [m.slot for _, m in t.entries if m.type == "MeasuredBit"]
    assert slots == sorted(slots)
    assert types[-2:] == ["ResultTransfer", "Done"]


def test_determinism(rng):
    c = random_circuit(3, 10, rng)
    a = run_session(c, 2, alice_seed=11, bob_seed=5)
    b = run_session(c, 2, alice_seed=11, bob_seed=5)
    assert a.transcript.lines() == b.transcript.lines()
    assert np.array_equal(a.output.amplitudes, b.output.amplitudes)
    assert run_session(c, 2, alice_seed=12).transcript.lines() != a.transcript.lines()


def test_socket_transport_matches_in_process(rng):
    c = random_circuit(2, 6, rng)
    a = run_session(c, 1, alice_seed=3, cascade="faithful")
    b = run_session(c, 1, alice_seed=3, cascade="faithful", transport="socket")
    assert a.transcript.lines() == b.transcript.lines()
    assert np.array_equal(a.output.amplitudes, b.output.amplitudes)


def test_alice_decide_examples(rng):
    assert alice_decide(1, a=1, x=0, c=1) == 0
    assert alice_decide(1, a=0, x=1, c=0) == 1
    draws = {alice_decide(0, 0, 0, 0, rng) for _ in range(50)}
    assert draws == {0, 1}
    with pytest.raises(ValueError):
        alice_decide(0, 0, 0, 0)


def test_every_report_bit_is_fair(rng):
    for seed in range(10):
        r = run_session(random_circuit(2, 10, rng), 2, alice_seed=seed, cascade="faithful")
        assert all(abs(p - 0.5) <= 1e-12 for p in r.bob.report_laws)
        assert all(abs(p - 0.5) <= 1e-12 for _, _, p in r.alice.laws)


def test_bob_step_gate_then_teleport():
    rngs = session_rngs(0)
    bob = Bob(rngs[1])
    for label in ("q0", "p0", "c0"):
        assert bob_step(bob, qubit_transfer(label, [1, 0])) == []
    circuit = {"protocol": 1, "num_wires": 1, "slots": [["H", 0], ["TP", 0, 0]]}
    out = bob_step(bob, Message("CircuitAnnounce", circuit=circuit))
    assert bob.executed == ["H", "CNOT", "measure"]
    assert [m.type for m in out] == ["MeasuredBit"] and out[0].slot == 0


def test_bob_refuses_foreign_instructions():
    bob = Bob(np.random.default_rng(0))
    bob_step(bob, qubit_transfer("q0", [1, 0]))
    with pytest.raises(ProtocolError):
        bob_step(bob, Message("CircuitAnnounce", circuit={"protocol": 1, "num_wires": 1, "slots": [["T", 0]]}))


def test_bob_rejects_out_of_phase_messages():
    bob = Bob(np.random.default_rng(0))
    with pytest.raises(ProtocolError):
        bob_step(bob, Message("CorrectionDecision", slot=0, bit=1))
    bob_step(bob, qubit_transfer("q0", [1, 0]))
    bob_step(bob, Message("CircuitAnnounce", circuit={"protocol": 1, "num_wires": 1, "slots": []}))
    with pytest.raises(ProtocolError):
        bob_step(bob, qubit_transfer("q1", [1, 0]))


def test_alice_rejects_wrong_slot(rng):
    alice = Alice(Circuit(1, [gate("T", 0)]), 1, rng)
    alice.start()
    with pytest.raises(ProtocolError):
        alice.receive(Message("MeasuredBit", slot=5, bit=0))
    with pytest.raises(ProtocolError):
        alice.receive(Message("Done"))


def test_transcript_helpers():
    t = Transcript()
    t.append("bob", Message("MeasuredBit", slot=0, bit=1))
    t.append("alice", Message("ApplyZ", wire=0))
    assert t.bits() == (1, 1)
    assert t.shape() == (("bob", "MeasuredBit"), ("alice", "ApplyZ"))
