"""Client (Alice) and server (Bob) state machines and the session referee.

Each party is event driven: ``start()`` / ``receive(msg)`` return the list of
messages it sends next. The referee only moves messages between them, so
the same parties run unchanged over an in-process queue or a socket.

Qubits cross the channel as single-qubit amplitude pairs; everything Alice
sends is a product state, so nothing is lost by doing that. Alice labels the
qubits she sends ``q<w>`` (data wire ``w``), ``p<k>`` and ``c<k>`` (primary
and correction ancilla of teleport slot ``k``).
"""
from __future__ import annotations

import socket
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compiler import (
    BobGate,
    Circuit,
    CompiledCircuit,
    FrameToggle,
    TeleportSlot,
    compile_circuit,
)
from .frame import KeyFrame, decrypt, pauli_word, update_for_gate
from .gadget import AncillaSpec, ancilla_pair, desired_bit, needs_final_z
from .simcore import GateId, PureState, Register, gate_matrix
from .wire import Message, WireError, decode, encode, qubit_transfer, result_transfer

BOB_GATES = ("H", "CNOT", "CZ")
EXECUTED_ALPHABET = frozenset({"H", "CNOT", "CZ", "Z", "measure"})
CASCADE_MODES = ("default", "faithful")
_ZERO = np.array([1, 0], dtype=complex)


class ProtocolError(RuntimeError):
    """A message arrived out of phase or an instruction is not allowed."""


class TransportError(RuntimeError):
    pass


def alice_decide(angle: int, a: int, x: int, c: int, rng: Optional[np.random.Generator] = None) -> int:
    """Whether the correction round is needed after measuring ``c``.

    For angle 0 both signs are the identity, so the answer is drawn
    uniformly to look like every other slot.
    """
    if int(angle) % 8 == 0:
        if rng is None:
            raise ValueError("angle-0 decisions need Alice's rng")
        return int(rng.integers(2))
    return 1 - desired_bit(a, c, x)


# --- transcript --------------------------------------------------------------

@dataclass
class Transcript:
    entries: list = field(default_factory=list)

    def append(self, sender: str, msg: Message) -> None:
        self.entries.append((sender, msg))

    def __len__(self):
        return len(self.entries)

    def lines(self) -> list:
        return [f"{sender} {encode(msg)}" for sender, msg in self.entries]

    def classical(self) -> list:
        """(sender, type, slot, bit) for every message, amplitudes dropped."""
        out = []
        for sender, msg in self.entries:
            bit = msg.bit
            if msg.type == "ApplyZ":
                bit = 1
            out.append((sender, msg.type, msg.slot, bit))
        return out

    def bits(self) -> tuple:
        """Every classical bit Bob sees, in order; an ApplyZ counts as a 1
        where a CorrectionDecision(k, 0) would have stood."""
        return tuple(b for _, t, _, b in self.classical() if t in ("MeasuredBit", "CorrectionDecision", "ApplyZ"))

    def shape(self) -> tuple:
        return tuple((s, t) for s, t, _, _ in self.classical())


# --- Alice -------------------------------------------------------------------

class Alice:
    def __init__(self, circuit: Circuit, protocol: int, rng: np.random.Generator,
                 inputs=None, cascade: str = "default", compile_options: Optional[dict] = None,
                 encrypt: bool = True, compiled: Optional[CompiledCircuit] = None):
        if cascade not in CASCADE_MODES:
            raise ValueError(f"cascade must be one of {CASCADE_MODES}")
        self.circuit = circuit
        self.rng = rng
        self.cascade = cascade
        self.encrypt = encrypt
        self.compiled = compiled or compile_circuit(circuit, protocol, rng, **(compile_options or {}))
        bad = {s.kind for s in self.compiled.slots if isinstance(s, BobGate)} - set(BOB_GATES)
        if bad:
            raise ProtocolError(f"compiled circuit asks Bob for {sorted(bad)}")
        n = self.compiled.num_wires
        self.inputs = [np.asarray(v, dtype=complex) for v in (inputs or [_ZERO] * n)]
        if len(self.inputs) != n:
            raise ValueError(f"{len(self.inputs)} inputs for {n} wires")
        self.frame = KeyFrame.random(n, rng) if encrypt else KeyFrame.zeros(n)
        self.ancillas = {}
        for t in self.compiled.teleports:
            if encrypt:
                self.ancillas[t.slot_id] = ancilla_pair(t.angle, rng)
            else:
                self.ancillas[t.slot_id] = (AncillaSpec(t.angle), AncillaSpec(t.angle.doubled(), purpose="correction"))
        self.labels = [f"q{w}" for w in range(n)]
        self.laws = []
        self.output: Optional[PureState] = None
        self.finished = False
        self._cursor = 0
        self._current: Optional[TeleportSlot] = None
        self._stage = None
        self._x_round2 = 0
        self._started = False

    def start(self) -> list:
        if self._started:
            raise ProtocolError("Alice already started")
        self._started = True
        out = []
        for w, amp in enumerate(self.inputs):
            out.append(qubit_transfer(self.labels[w], pauli_word(*self.frame.pair(w)) @ amp))
        for k, (primary, correction) in self.ancillas.items():
            out.append(qubit_transfer(f"p{k}", primary.state().amplitudes))
            out.append(qubit_transfer(f"c{k}", correction.state().amplitudes))
        public = self.compiled.public()
        public["cascade"] = self.cascade
        out.append(Message("CircuitAnnounce", circuit=public))
        self._advance()
        return out

    def _advance(self) -> None:
        """Track Bob through public gates and secret toggles up to the next teleport."""
        slots = self.compiled.slots
        self._current = None
        while self._cursor < len(slots):
            s = slots[self._cursor]
            self._cursor += 1
            if isinstance(s, BobGate):
                self.frame, _ = update_for_gate(self.frame, GateId(s.kind, s.wires))
            elif isinstance(s, FrameToggle):
                self.frame.toggle(s.wire, s.x, s.z)
            else:
                self._current = s
                self._stage = "c1"
                return
        self._stage = "result"

    def receive(self, msg: Message) -> list:
        if not self._started or self.finished:
            raise ProtocolError(f"Alice got {msg.type} outside a session")
        if msg.type == "MeasuredBit":
            return self._on_bit(msg)
        if msg.type == "ResultTransfer":
            return self._on_result(msg)
        raise ProtocolError(f"Alice does not accept {msg.type}")

    def _on_bit(self, msg: Message) -> list:
        t = self._current
        if t is None or msg.slot != t.slot_id:
            raise ProtocolError(f"bit for slot {msg.slot}, expected {None if t is None else t.slot_id}")
        k, w, c = t.slot_id, t.wire, msg.bit
        primary, correction = self.ancillas[k]
        if self._stage == "c1":
            x = self.frame.x[w]
            needed = alice_decide(t.angle, primary.a, x, c, self.rng)
            self.laws.append((k, "needed", 0.5 if t.angle == 0 else _marginal_needed(c, x)))
            self.frame.toggle(w, c, primary.b)
            self.labels[w] = f"p{k}"
            self._x_round2 = x ^ c
            self._stage = "c2" if needed else "discard"
            if not needed and self.cascade == "faithful":
                self._advance()
            return [Message("CorrectionDecision", slot=k, bit=needed)]
        if self._stage == "c2":
            owed = needs_final_z(t.angle) and not desired_bit(correction.a, c, self._x_round2)
            self.frame.toggle(w, c, correction.b)
            self.labels[w] = f"c{k}"
            reply = []
            if self.cascade == "default":
                self.frame.toggle(w, 0, int(owed))
            else:
                # odd angles owe Z half the time; even ones send a compensated dummy Z as often
                send_z = owed if t.angle & 1 else int(self.rng.integers(2))
                if send_z and not owed:
                    self.frame.toggle(w, 0, 1)
                self.laws.append((k, "apply_z", 0.5))
                reply = [Message("ApplyZ", wire=w) if send_z else Message("CorrectionDecision", slot=k, bit=0)]
            self._advance()
            return reply
        if self._stage == "discard":
            self._advance()
            return []
        raise ProtocolError(f"unexpected bit for slot {k} in stage {self._stage}")

    def _on_result(self, msg: Message) -> list:
        if self._stage != "result":
            raise ProtocolError("result arrived before every slot was reported")
        if list(msg.wire) != self.labels:
            raise ProtocolError(f"result labels {msg.wire} do not match {self.labels}")
        amps = np.array(msg.amp[0::2]) + 1j * np.array(msg.amp[1::2])
        physical = decrypt(PureState(len(self.labels), amps), self.frame)
        n = physical.num_wires
        perm = self.compiled.output_perm
        psi = physical.amplitudes.reshape((2,) * n).transpose(perm).reshape(-1)
        self.output = PureState(n, psi)
        self.finished = True
        return [Message("Done")]


def _marginal_needed(c: int, x: int) -> float:
    """P(needed = 1) over the fresh, never-revealed ancilla key a."""
    return sum(1 - desired_bit(a, c, x) for a in (0, 1)) / 2


# --- Bob -----------------------------------------------------------------------

class AdversaryPolicy:
    """Honest behaviour; subclasses override hooks to deviate.

    Hooks see only what Bob sees: the slot list, his register, and the
    adversary's own rng.
    """

    name = "none"

    def bind(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def before_slot(self, bob: "Bob", index: int, slot) -> bool:
        """Return True to skip executing ``slot``."""
        return False

    def report(self, slot_id: int, bit: int) -> int:
        return bit

    def before_result(self, bob: "Bob") -> None:
        pass


class Bob:
    def __init__(self, rng: np.random.Generator, policy: Optional[AdversaryPolicy] = None,
                 adversary_rng: Optional[np.random.Generator] = None):
        self.rng = rng
        self.policy = policy or AdversaryPolicy()
        self.policy.bind(adversary_rng if adversary_rng is not None else np.random.default_rng(0))
        self.register = Register()
        self.executed = []
        self.deviations = []
        self.report_laws = []
        self.circuit = None
        self.labels = []
        self.finished = False
        self._phase = "receiving"
        self._cursor = 0
        self._wait = None

    # gate helpers record exactly what Bob's hardware did
    def _gate(self, kind: str, labels) -> None:
        self.register.apply(gate_matrix(kind), labels)
        self.executed.append(kind)

    def _measure(self, label: str) -> int:
        p = self.register.prob_one(label)
        bit = self.register.measure(label, self.rng)
        self.executed.append("measure")
        self.report_laws.append(p)
        return bit

    def deviate(self, matrix: np.ndarray, wires) -> None:
        self.register.apply(matrix, [self.labels[w] for w in wires])
        self.deviations.append((tuple(wires), np.asarray(matrix)))

    @property
    def num_wires(self) -> int:
        return len(self.labels)

    def receive(self, msg: Message) -> list:
        if self.finished:
            raise ProtocolError(f"Bob got {msg.type} after Done")
        if msg.type == "QubitTransfer":
            if self._phase != "receiving":
                raise ProtocolError("qubits must arrive before the circuit")
            amps = np.array(msg.amp[0::2]) + 1j * np.array(msg.amp[1::2])
            self.register.add(msg.wire, PureState(1, amps))
            return []
        if msg.type == "CircuitAnnounce":
            if self._phase != "receiving":
                raise ProtocolError("circuit announced twice")
            self._load(msg.circuit)
            self._phase = "running"
            return self._run()
        if msg.type == "CorrectionDecision":
            return self._on_decision(msg)
        if msg.type == "ApplyZ":
            if not self._wait or self._wait[0] != "final" or msg.wire != self._wait_wire:
                raise ProtocolError("ApplyZ out of phase")
            self._gate("Z", [self.labels[msg.wire]])
            self._wait = None
            return self._run()
        if msg.type == "Done":
            if self._phase != "result_sent":
                raise ProtocolError("Done before the result")
            self.finished = True
            return []
        raise ProtocolError(f"Bob does not accept {msg.type}")

    def _load(self, public: dict) -> None:
        try:
            n = int(public["num_wires"])
            self.cascade = public.get("cascade", "default")
            slots = []
            expect = 0
            for s in public["slots"]:
                kind, args = s[0], tuple(int(v) for v in s[1:])
                if kind == "TP":
                    if args[0] != expect or not 0 <= args[1] < n:
                        raise ProtocolError(f"bad teleport slot {s}")
                    expect += 1
                elif kind in BOB_GATES:
                    if len(args) != (1 if kind == "H" else 2) or not all(0 <= w < n for w in args):
                        raise ProtocolError(f"bad gate slot {s}")
                else:
                    raise ProtocolError(f"instruction {kind!r} is outside Bob's alphabet")
                slots.append((kind, args))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ProtocolError(f"malformed circuit: {exc}") from None
        if self.cascade not in CASCADE_MODES:
            raise ProtocolError(f"unknown cascade mode {self.cascade!r}")
        needed = [f"q{w}" for w in range(n)] + [f"{p}{k}" for k in range(expect) for p in "pc"]
        missing = [label for label in needed if label not in self.register]
        if missing:
            raise ProtocolError(f"announced circuit needs qubits never sent: {missing[:4]}")
        self.circuit = public
        self.slots = slots
        self.labels = [f"q{w}" for w in range(n)]

    def _run(self) -> list:
        out = []
        while self._cursor < len(self.slots):
            index = self._cursor
            kind, args = self.slots[index]
            self._cursor += 1
            if self.policy.before_slot(self, index, (kind, args)):
                continue
            if kind != "TP":
                self._gate(kind, [self.labels[w] for w in args])
                continue
            k, w = args
            anc = f"p{k}"
            self._gate("CNOT", [anc, self.labels[w]])
            bit = self._measure(self.labels[w])
            self.labels[w] = anc
            self._wait = ("decision", k)
            self._wait_wire = w
            out.append(Message("MeasuredBit", slot=k, bit=self.policy.report(k, bit)))
            return out
        self.policy.before_result(self)
        psi = self.register.joint_state(self.labels)
        out.append(result_transfer(self.labels, psi.amplitudes))
        self._phase = "result_sent"
        return out

    def _on_decision(self, msg: Message) -> list:
        if self._wait == ("final", msg.slot) and msg.bit == 0:
            self._wait = None
            return self._run()
        if self._wait != ("decision", msg.slot):
            raise ProtocolError(f"decision for slot {msg.slot} out of phase")
        k, w = msg.slot, self._wait_wire
        corr = f"c{k}"
        self._wait = None
        if msg.bit:
            self._gate("CNOT", [corr, self.labels[w]])
            bit = self._measure(self.labels[w])
            self.labels[w] = corr
            out = [Message("MeasuredBit", slot=k, bit=self.policy.report(k, bit))]
            if self.cascade == "faithful":
                self._wait = ("final", k)
                return out
            return out + self._run()
        if self.cascade == "faithful":
            self.register.discard(corr)
            return self._run()
        bit = self._measure(corr)
        return [Message("MeasuredBit", slot=k, bit=self.policy.report(k, bit))] + self._run()


# --- referees ------------------------------------------------------------------

def referee_in_process(alice: Alice, bob: Bob, transcript: Transcript) -> None:
    queue = deque()
    for m in alice.start():
        transcript.append("alice", m)
        queue.append(("alice", m))
    while queue:
        sender, msg = queue.popleft()
        if sender == "alice":
            replies, replier = bob.receive(msg), "bob"
        else:
            replies, replier = alice.receive(msg), "alice"
        for m in replies:
            transcript.append(replier, m)
            queue.append((replier, m))
    if not alice.finished or not bob.finished:
        raise ProtocolError("session stalled before completion")


def _send(stream, msg: Message) -> None:
    try:
        stream.write(encode(msg) + "\n")
        stream.flush()
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from None


def _recv(stream) -> Message:
    try:
        line = stream.readline()
    except OSError as exc:
        raise TransportError(f"receive failed: {exc}") from None
    if not line:
        raise TransportError("peer closed the connection")
    try:
        return decode(line)
    except WireError as exc:
        raise ProtocolError(f"bad frame: {exc}") from None


def alice_over_stream(alice: Alice, stream, transcript: Transcript) -> None:
    """Drive Alice's side over a text stream of JSON lines."""
    for m in alice.start():
        transcript.append("alice", m)
        _send(stream, m)
    while not alice.finished:
        msg = _recv(stream)
        transcript.append("bob", msg)
        for m in alice.receive(msg):
            transcript.append("alice", m)
            _send(stream, m)


def bob_over_stream(bob: Bob, stream) -> None:
    while not bob.finished:
        for m in bob.receive(_recv(stream)):
            _send(stream, m)


def serve_bob(bob: Bob, host: str, port: int, on_ready=None, timeout: float = 30.0) -> None:
    """Accept one client on ``host:port`` and run Bob until Done.

    ``on_ready(bound_port)`` is called once the socket listens.
    """
    try:
        server = socket.create_server((host, port))
    except OSError as exc:
        raise TransportError(f"cannot listen on {host}:{port}: {exc}") from None
    with server:
        server.settimeout(timeout)
        if on_ready is not None:
            on_ready(server.getsockname()[1])
        try:
            conn, _ = server.accept()
        except OSError as exc:
            raise TransportError(f"no client connected: {exc}") from None
        with conn, conn.makefile("rw", encoding="utf-8", newline="\n") as stream:
            conn.settimeout(timeout)
            bob_over_stream(bob, stream)


def connect_alice(alice: Alice, host: str, port: int, transcript: Transcript, timeout: float = 30.0) -> None:
    try:
        conn = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot reach {host}:{port}: {exc}") from None
    with conn, conn.makefile("rw", encoding="utf-8", newline="\n") as stream:
        alice_over_stream(alice, stream, transcript)


def referee_socket(alice: Alice, bob: Bob, transcript: Transcript, timeout: float = 30.0) -> None:
    """Run Bob on a socket pair in a worker thread, Alice in the caller."""
    left, right = socket.socketpair()
    left.settimeout(timeout)
    right.settimeout(timeout)
    failure = []

    def bob_side():
        try:
            with right, right.makefile("rw", encoding="utf-8", newline="\n") as stream:
                bob_over_stream(bob, stream)
        except Exception as exc:  # reported to the caller below
            failure.append(exc)

    worker = threading.Thread(target=bob_side, daemon=True)
    worker.start()
    try:
        with left, left.makefile("rw", encoding="utf-8", newline="\n") as stream:
            alice_over_stream(alice, stream, transcript)
    finally:
        worker.join(timeout)
    if failure:
        raise failure[0]


# --- sessions ------------------------------------------------------------------

@dataclass
class SessionResult:
    output: PureState
    transcript: Transcript
    alice: Alice
    bob: Bob

    def sample_bits(self, rng: np.random.Generator) -> tuple:
        """Alice's final computational-basis measurement of every wire."""
        probs = np.abs(self.output.amplitudes) ** 2
        index = int(rng.choice(len(probs), p=probs / probs.sum()))
        n = self.output.num_wires
        return tuple((index >> (n - 1 - w)) & 1 for w in range(n))


def session_rngs(alice_seed: int, bob_seed: Optional[int] = None, adversary_seed: Optional[int] = None):
    """Independent generators for the two parties and the adversary."""
    base = alice_seed if isinstance(alice_seed, np.random.SeedSequence) else np.random.SeedSequence(alice_seed)
    children = base.spawn(3)
    pick = lambda seed, child: np.random.default_rng(child if seed is None else seed)  # noqa: E731
    return np.random.default_rng(children[0]), pick(bob_seed, children[1]), pick(adversary_seed, children[2])


def run_session(circuit: Circuit, protocol: int = 1, alice_seed: int = 0, bob_impl=None,
                transport: str = "in_process", *, bob_seed: Optional[int] = None,
                adversary_seed: Optional[int] = None, inputs=None, cascade: str = "default",
                compile_options: Optional[dict] = None, encrypt: bool = True,
                compiled: Optional[CompiledCircuit] = None) -> SessionResult:
    """Run one delegated computation and return Alice's decrypted output.

    ``bob_impl`` is None for an honest server or an ``AdversaryPolicy``.
    The output is in logical wire order, already undone from any routing
    permutation.
    """
    rng_a, rng_b, rng_adv = session_rngs(alice_seed, bob_seed, adversary_seed)
    alice = Alice(circuit, protocol, rng_a, inputs=inputs, cascade=cascade,
                  compile_options=compile_options, encrypt=encrypt, compiled=compiled)
    bob = Bob(rng_b, policy=bob_impl, adversary_rng=rng_adv)
    transcript = Transcript()
    if transport == "in_process":
        referee_in_process(alice, bob, transcript)
    elif transport == "socket":
        referee_socket(alice, bob, transcript)
    else:
        raise ValueError(f"unknown transport {transport!r}")
    return SessionResult(alice.output, transcript, alice, bob)


def bob_step(bob: Bob, msg: Message) -> list:
    """One server step: feed a message, get the replies."""
    return bob.receive(msg)
