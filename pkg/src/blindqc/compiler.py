"""Circuits, T-like words, bricks, and the two blind compilers.

Every hidden single-qubit operation the server runs is built from *units*:
a teleported ``A(n)`` followed by the server's own ``H``. Two units make a
*layer*, ``H A(n2) H A(n1)``, the shape of the T-like words (T-like gate,
H, T-like gate, H). The server sees the units but never the angles.

Weak-blind compilation keeps the user's CNOTs in the clear. Blind
compilation lays the circuit on a staggered brickwork whose two-CZ bricks
act as either the identity or a CNOT, which the server cannot tell apart.
"""
from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .simcore import (
    Angle8,
    GateId,
    SimulationError,
    equal_up_to_phase,
    gate,
    gate_matrix,
)

USER_KINDS = ("X", "Z", "H", "S", "A", "CNOT")
DEFAULT_DEPTH_CAP = 12
DEFAULT_MAX_WIRES = 12
DEFAULT_MAX_COLUMNS = 64


class CompileError(ValueError):
    pass


@dataclass
class Circuit:
    num_wires: int
    instructions: list = field(default_factory=list)

    def __post_init__(self):
        if self.num_wires < 1:
            raise CompileError("a circuit needs at least one wire")
        self.instructions = list(self.instructions)
        for g in self.instructions:
            self._check(g)

    def _check(self, g: GateId) -> None:
        if g.kind not in USER_KINDS:
            raise CompileError(f"{g.kind} is outside the circuit alphabet {USER_KINDS}")
        if max(g.wires) >= self.num_wires:
            raise CompileError(f"{g} addresses a wire beyond {self.num_wires - 1}")

    def append(self, g: GateId) -> "Circuit":
        self._check(g)
        self.instructions.append(g)
        return self

    def __len__(self):
        return len(self.instructions)


def random_circuit(num_wires: int, num_gates: int, rng: np.random.Generator,
                   cnot_weight: float = 0.25) -> Circuit:
    """Random circuit over the user alphabet; used by tests and demos."""
    kinds = ["X", "Z", "H", "S", "A"]
    c = Circuit(num_wires)
    for _ in range(num_gates):
        if num_wires > 1 and rng.random() < cnot_weight:
            a, b = rng.choice(num_wires, size=2, replace=False)
            c.append(gate("CNOT", int(a), int(b)))
        else:
            kind = kinds[rng.integers(len(kinds))]
            w = int(rng.integers(num_wires))
            c.append(gate(kind, w, angle=int(rng.integers(8)) if kind == "A" else 0))
    return c


# --- compiled form ---------------------------------------------------------

@dataclass(frozen=True)
class BobGate:
    kind: str
    wires: tuple


@dataclass(frozen=True)
class TeleportSlot:
    slot_id: int
    wire: int
    angle: Angle8


@dataclass(frozen=True)
class FrameToggle:
    """Client-side Pauli bookkeeping; never announced."""
    wire: int
    x: int
    z: int


@dataclass(frozen=True)
class LeakageDescriptor:
    protocol: int
    num_wires: int
    size: int
    cnot_positions: Optional[tuple] = None


@dataclass
class CompiledCircuit:
    protocol: int
    num_wires: int
    slots: list
    output_perm: tuple
    columns: int = 0

    @property
    def teleports(self) -> list:
        return [s for s in self.slots if isinstance(s, TeleportSlot)]

    @property
    def ancilla_manifest(self) -> list:
        """(slot id, primary angle, correction angle) per teleport slot."""
        return [(t.slot_id, t.angle, t.angle.doubled()) for t in self.teleports]

    @property
    def num_ancillas(self) -> int:
        return 2 * len(self.teleports)

    def public(self) -> dict:
        """Everything the server is told: slot kinds and wires, no angles."""
        out = []
        for s in self.slots:
            if isinstance(s, BobGate):
                out.append([s.kind, *s.wires])
            elif isinstance(s, TeleportSlot):
                out.append(["TP", s.slot_id, s.wire])
        public = {"protocol": self.protocol, "num_wires": self.num_wires, "slots": out}
        if self.protocol == 2:
            public["columns"] = self.columns
        return public

    def shape(self) -> bytes:
        return json.dumps(self.public(), separators=(",", ":")).encode()

    @property
    def leakage(self) -> LeakageDescriptor:
        return leakage_from_public(self.public())


def leakage_from_public(public: dict) -> LeakageDescriptor:
    protocol = public["protocol"]
    slots = public["slots"]
    if protocol == 1:
        cnots = tuple((i, s[1], s[2]) for i, s in enumerate(slots) if s[0] == "CNOT")
        return LeakageDescriptor(1, public["num_wires"], len(slots), cnots)
    return LeakageDescriptor(2, public["num_wires"], public["columns"], None)


# --- gate algebra ------------------------------------------------------------

_H = gate_matrix("H")
_I2 = np.eye(2, dtype=complex)
_PAULIS = {(px, pz): (gate_matrix("X") if px else _I2) @ (gate_matrix("Z") if pz else _I2)
           for px in (0, 1) for pz in (0, 1)}


def unit_matrix(n: int) -> np.ndarray:
    """Teleported A(n), then the server's H."""
    return _H @ gate_matrix("A", n)


def word_matrix(angles: Sequence[int]) -> np.ndarray:
    """Units applied in order: ``angles[0]`` first."""
    m = np.eye(2, dtype=complex)
    for n in angles:
        m = unit_matrix(n) @ m
    return m


def _canon(m: np.ndarray) -> tuple:
    flat = np.asarray(m).reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-6))
    v = flat * (abs(flat[k]) / flat[k])
    v = np.round(v, 7) + (0.0 + 0.0j)
    return tuple(np.concatenate([v.real, v.imag]) + 0.0)


def _host_matrix(angles) -> np.ndarray:
    n1, n2, m = angles
    return gate_matrix("A", m) @ word_matrix((n1, n2))


_TEMPLATES = {
    # one Table-1-shaped layer
    "layer": (2, lambda a: word_matrix(a)),
    # two layers; a weak-blind block or an unbricked wire in a brickwork column
    "block": (4, lambda a: word_matrix(a)),
    # wire inside an identity brick: free layer, then a diagonal layer between the CZs
    "host": (3, _host_matrix),
}


@functools.lru_cache(maxsize=None)
def _representation_table(template: str) -> dict:
    count, build = _TEMPLATES[template]
    table: dict = {}
    for angles in itertools.product(range(8), repeat=count):
        w = build(angles)
        for p, pm in _PAULIS.items():
            table.setdefault(_canon(pm @ w), []).append((angles, p))
    return table


def representations(target: np.ndarray, template: str) -> list:
    """All ``(angles, pauli)`` with ``template(angles) = pauli . target`` up to phase."""
    return list(_representation_table(template).get(_canon(target), []))


IDLE_ANGLES = {"layer": (0, 0), "block": (0, 0, 0, 0), "host": (0, 0, 0)}


def choose_representation(target: Optional[np.ndarray], template: str, rng: np.random.Generator):
    """Random exact representation; ``None`` (an idle slot) always gets angle 0."""
    if target is None:
        return IDLE_ANGLES[template], (0, 0)
    reps = representations(target, template)
    if not reps:
        raise CompileError(f"gate not reachable with the {template!r} template")
    return reps[int(rng.integers(len(reps)))]


def user_gate_matrix(g: GateId) -> np.ndarray:
    return gate_matrix(g.kind, g.angle)


# --- T-like words and the axis table ---------------------------------------

TLIKE_ANGLES = {"T": 1, "T3": 3, "T3dg": 5, "Tdg": 7}
TOKEN_NAMES = {"T": "T", "T3": "T³", "T3dg": "(T³)†", "Tdg": "T†", "H": "H"}

_C1, _S1 = np.cos(np.pi / 8), np.sin(np.pi / 8)
_C3, _S3 = np.cos(3 * np.pi / 8), np.sin(3 * np.pi / 8)

# Words in operator-product order (rightmost acts first) with the axis as printed.
REFERENCE_AXES = (
    (("T", "H", "T", "H"), (_C1, _S1, _C1)),
    (("T", "H", "Tdg", "H"), (-_C1, -_S1, _C1)),
    (("Tdg", "H", "T", "H"), (_C1, -_S1, -_C1)),
    (("Tdg", "H", "Tdg", "H"), (-_C1, _S1, -_C1)),
    (("T3", "H", "T3", "H"), (_C3, _S3, _C3)),
    (("T3", "H", "T3dg", "H"), (-_C3, -_S3, _C3)),
    (("T3dg", "H", "T3", "H"), (_C3, -_S3, -_C3)),
    (("T3dg", "H", "T3dg", "H"), (-_C3, _S3, -_C3)),
)


def token_matrix(token: str) -> np.ndarray:
    if token == "H":
        return _H
    try:
        return gate_matrix("A", TLIKE_ANGLES[token])
    except KeyError:
        raise CompileError(f"unknown word token {token!r}") from None


def tlike_word_matrix(word: Sequence[str]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for token in word:
        m = m @ token_matrix(token)
    return m


def rotation_axis(u: np.ndarray):
    """(unit axis, angle) of a 2x2 unitary seen as a Bloch-sphere rotation."""
    su = u / np.sqrt(np.linalg.det(u))
    # su = cos(a/2) I - i sin(a/2) n.sigma; the sign of su is irrelevant
    v = np.array([
        -(su[0, 1] + su[1, 0]).imag,
        (su[1, 0] - su[0, 1]).real,
        -(su[0, 0] - su[1, 1]).imag,
    ]) / 2
    w = (su[0, 0] + su[1, 1]).real / 2
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise CompileError("identity has no rotation axis")
    if w < 0:
        v, w = -v, -w
    return v / norm, 2 * float(np.arctan2(norm, w))


def table1_axis(word: Sequence[str]):
    if len(word) != 4:
        raise CompileError("T-like words in the axis table have four letters")
    return rotation_axis(tlike_word_matrix(word))


def axis_match(computed: Sequence[float], printed: Sequence[float]) -> float:
    """|cos| of the angle between two directions; 1 means parallel or antiparallel."""
    a = np.asarray(computed, dtype=float)
    b = np.asarray(printed, dtype=float)
    return float(abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def axis_table() -> list:
    rows = []
    for word, printed in REFERENCE_AXES:
        axis, angle = table1_axis(word)
        rows.append({
            "word": word,
            "printed": printed,
            "axis": axis,
            "angle": angle,
            "match": axis_match(axis, printed),
            "sign": int(np.sign(axis @ np.asarray(printed))),
        })
    return rows


# --- bounded single-qubit approximation -----------------------------------

APPROX_ALPHABET = ("H", "T", "T3", "T3dg", "Tdg")


def _quat(m: np.ndarray) -> np.ndarray:
    su = m / np.sqrt(np.linalg.det(m))
    return np.array([
        (su[0, 0] + su[1, 1]).real / 2,
        -(su[0, 1] + su[1, 0]).imag / 2,
        (su[1, 0] - su[0, 1]).real / 2,
        -(su[0, 0] - su[1, 1]).imag / 2,
    ])


def _qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    w1, v1 = p[..., :1], p[..., 1:]
    w2, v2 = q[..., :1], q[..., 1:]
    w = w1 * w2 - np.sum(v1 * v2, axis=-1, keepdims=True)
    v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    return np.concatenate([w, v], axis=-1)


def _qcanon(q: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(q) > 1e-9, axis=-1)
    sign = np.sign(np.take_along_axis(q, lead[:, None], axis=-1))
    return np.round(q * sign, 9) + 0.0


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over global phase of the operator-norm distance ||u - e^{i phi} v||."""
    d = abs(float(_quat(u) @ _quat(v)))
    return 2 * float(np.sin(np.arccos(min(1.0, d)) / 2))


@dataclass
class Approximation:
    word: tuple
    distance: float

    @property
    def matrix(self) -> np.ndarray:
        return tlike_word_matrix(self.word)


def approximate_single_qubit(target: np.ndarray, depth_budget: int,
                             depth_cap: int = DEFAULT_DEPTH_CAP,
                             beam_width: int = 200_000) -> Approximation:
    """Closest word over {H, T, T³, (T³)†, T†} with at most ``depth_budget`` letters.

    Breadth-first over distinct unitaries (up to phase). Levels wider than
    ``beam_width`` keep only their closest members, which keeps the result
    non-increasing in the budget because deeper searches extend the same
    levels.
    """
    target = np.asarray(target, dtype=complex)
    if not np.allclose(target @ target.conj().T, np.eye(2), atol=1e-9):
        raise CompileError("target is not unitary")
    if depth_budget > depth_cap:
        raise CompileError(f"depth budget {depth_budget} exceeds the cap {depth_cap}")
    tq = _quat(target)
    letters = np.array([_quat(token_matrix(t)) for t in APPROX_ALPHABET])

    frontier = np.array([[1.0, 0.0, 0.0, 0.0]])
    words = [()]
    seen = {tuple(_qcanon(frontier)[0])}
    best = Approximation((), phase_distance(np.eye(2), target))
    for _ in range(depth_budget):
        cand = _qmul(frontier[:, None, :], letters[None, :, :]).reshape(-1, 4)
        keys = _qcanon(cand)
        new_idx, new_words = [], []
        for i, key in enumerate(map(tuple, keys)):
            if key not in seen:
                seen.add(key)
                new_idx.append(i)
                new_words.append(words[i // len(letters)] + (APPROX_ALPHABET[i % len(letters)],))
        if not new_idx:
            break
        frontier = cand[new_idx]
        words = new_words
        closeness = np.abs(frontier @ tq)
        if len(words) > beam_width:
            keep = np.argsort(-closeness, kind="stable")[:beam_width]
            frontier = frontier[keep]
            words = [words[i] for i in keep]
            closeness = closeness[keep]
        i = int(np.argmax(closeness))
        d = 2 * float(np.sin(np.arccos(min(1.0, closeness[i])) / 2))
        if d < best.distance - 1e-15:
            best = Approximation(words[i], d)
    return best


# --- bricks ------------------------------------------------------------------

_CZ = gate_matrix("CZ")
_CNOT = gate_matrix("CNOT")
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
BRICK_LAYOUT = ("1q", "CZ", "1q", "CZ")


def brick_unitary(first: Sequence[Sequence[int]], second: Sequence[Sequence[int]]) -> np.ndarray:
    """CZ . (L_b x L_b') . CZ . (L_a x L_a') for per-wire layer angles."""
    la = np.kron(word_matrix(first[0]), word_matrix(first[1]))
    lb = np.kron(word_matrix(second[0]), word_matrix(second[1]))
    return _CZ @ lb @ _CZ @ la


def _split_product(m: np.ndarray):
    """Factor a 4x4 matrix as A (x) B, or return None."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    if s[1] > 1e-9:
        return None
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    return a, b


def _exact_layers(m: np.ndarray) -> list:
    return [angles for angles, p in representations(m, "layer") if p == (0, 0)]


@functools.lru_cache(maxsize=None)
def brick_fills(control: int = 0) -> tuple:
    """Every brick filling with one idle slot in the middle layer that equals CNOT.

    Searches the middle layer ``(I, V)`` / ``(V, I)`` over all layer angles
    and solves the first layer from ``CNOT = CZ . L_b . CZ . L_a``.
    """
    target = _CNOT if control == 0 else _SWAP @ _CNOT @ _SWAP
    fills = []
    for v in itertools.product(range(8), repeat=2):
        for second in (((0, 0), v), (v, (0, 0))):
            mid = _CZ @ np.kron(word_matrix(second[0]), word_matrix(second[1])) @ _CZ
            parts = _split_product(mid.conj().T @ target)
            if parts is None:
                continue
            for a in _exact_layers(parts[0]):
                for b in _exact_layers(parts[1]):
                    if equal_up_to_phase(brick_unitary((a, b), second), target, 1e-10):
                        fills.append(((a, b), second))
    return tuple(sorted(set(fills)))


@dataclass(frozen=True)
class BrickSpec:
    wires: tuple
    role: str
    first: tuple
    second: tuple
    control: int = 0
    layout: tuple = BRICK_LAYOUT

    def unitary(self) -> np.ndarray:
        return brick_unitary(self.first, self.second)

    def shape(self) -> bytes:
        """What the server sees: units per wire per layer and the CZ rhythm."""
        units = [[len(self.first[0]), len(self.first[1])], [len(self.second[0]), len(self.second[1])]]
        return json.dumps({"layout": list(self.layout), "units": units, "cz": 2}).encode()


def make_brick(role: str, rng: Optional[np.random.Generator] = None, control: int = 0,
               wires: tuple = (0, 1)) -> BrickSpec:
    if role == "identity":
        idle = ((0, 0), (0, 0))
        return BrickSpec(tuple(wires), role, idle, idle, control)
    if role != "cnot":
        raise CompileError(f"brick role must be 'identity' or 'cnot', got {role!r}")
    fills = brick_fills(control)
    first, second = fills[0] if rng is None else fills[int(rng.integers(len(fills)))]
    return BrickSpec(tuple(wires), role, first, second, control)


# --- compilers -----------------------------------------------------------------

class _Emitter:
    def __init__(self):
        self.slots = []
        self.next_id = 0

    def teleport(self, wire: int, angle: int) -> None:
        self.slots.append(TeleportSlot(self.next_id, wire, Angle8(angle)))
        self.next_id += 1

    def bob(self, kind: str, *wires: int) -> None:
        self.slots.append(BobGate(kind, tuple(wires)))

    def units(self, wire: int, angles: Sequence[int]) -> None:
        for n in angles:
            self.teleport(wire, n)
            self.bob("H", wire)

    def toggle(self, wire: int, pauli: tuple) -> None:
        if pauli != (0, 0):
            self.slots.append(FrameToggle(wire, *pauli))


def _check_caps(circuit: Circuit, max_wires: int) -> None:
    if not isinstance(circuit, Circuit):
        raise CompileError("expected a Circuit")
    for g in circuit.instructions:
        circuit._check(g)
    if circuit.num_wires > max_wires:
        raise CompileError(f"{circuit.num_wires} wires exceed the cap of {max_wires}")


def _plain_teleport(em: _Emitter, g: GateId, rng: np.random.Generator) -> None:
    w = g.wires[0]
    flip = int(rng.integers(2))
    if g.kind == "X":
        em.teleport(w, 4 * flip)
        em.toggle(w, (1, flip))
        return
    n = {"Z": 4, "S": 2, "A": int(g.angle)}[g.kind]
    # A(n) = Z . A(n+4): teleport the shifted angle and owe a Z
    em.teleport(w, n + 4 * flip)
    em.toggle(w, (0, flip))


def compile_weak_blind(circuit: Circuit, rng: np.random.Generator, uniform: bool = False,
                       max_wires: int = DEFAULT_MAX_WIRES) -> CompiledCircuit:
    """Weak-blind form: CNOTs stay visible, single-qubit gates are hidden.

    Default: every non-H single-qubit gate becomes one teleport slot and
    H/CNOT are sent as they are, so the server also sees where the H gates
    sit. ``uniform=True`` instead pads each stretch between CNOTs to whole
    layers of two-layer blocks on every wire, hiding H gates and which wire
    a gate acts on.
    """
    _check_caps(circuit, max_wires)
    em = _Emitter()
    n = circuit.num_wires
    if not uniform:
        for g in circuit.instructions:
            if g.kind in ("H", "CNOT"):
                em.bob(g.kind, *g.wires)
            else:
                _plain_teleport(em, g, rng)
        return CompiledCircuit(1, n, em.slots, tuple(range(n)))

    queues = [[] for _ in range(n)]

    def flush():
        depth = max(len(q) for q in queues)
        for layer in range(depth):
            for w in range(n):
                target = user_gate_matrix(queues[w][layer]) if layer < len(queues[w]) else None
                angles, pauli = choose_representation(target, "block", rng)
                em.units(w, angles)
                em.toggle(w, pauli)
        for q in queues:
            q.clear()

    for g in circuit.instructions:
        if g.kind == "CNOT":
            flush()
            em.bob("CNOT", *g.wires)
        else:
            queues[g.wires[0]].append(g)
    flush()
    return CompiledCircuit(1, n, em.slots, tuple(range(n)))


def route_adjacent(circuit: Circuit):
    """Rewrite CNOTs onto neighbouring wires with CNOT-built swaps.

    Returns ``(ops, perm)``: ops are ``("1q", GateId)`` or ``("CNOT", c, t)``
    on physical wires, and ``perm[logical] = physical`` at the end.
    """
    pos = list(range(circuit.num_wires))
    at = list(range(circuit.num_wires))
    ops = []
    for g in circuit.instructions:
        if g.kind != "CNOT":
            ops.append(("1q", GateId(g.kind, (pos[g.wires[0]],), g.angle)))
            continue
        c, t = pos[g.wires[0]], pos[g.wires[1]]
        while abs(c - t) > 1:
            d = c + (1 if t > c else -1)
            ops += [("CNOT", c, d), ("CNOT", d, c), ("CNOT", c, d)]
            lc, ld = at[c], at[d]
            at[c], at[d] = ld, lc
            pos[lc], pos[ld] = d, c
            c = d
        ops.append(("CNOT", c, t))
    return ops, tuple(pos)


def schedule_bricks(num_wires: int, ops: list) -> list:
    """Pack routed ops into brickwork columns, as early as possible.

    Column ``k`` pairs wires ``(w, w+1)`` with ``w = k mod 2, k mod 2 + 2, ...``.
    Each column entry maps a pair to ``("cnot", control_offset)`` or to
    ``("identity", {wire: GateId})`` and each unpaired wire to its hosted
    gate (or None).
    """
    queues = [[] for _ in range(num_wires)]
    for i, op in enumerate(ops):
        wires = op[1].wires if op[0] == "1q" else op[1:]
        for w in wires:
            queues[w].append(i)
    heads = [0] * num_wires
    remaining = len(ops)
    columns = []

    def head(w):
        return queues[w][heads[w]] if heads[w] < len(queues[w]) else None

    def host(w):
        i = head(w)
        if i is not None and ops[i][0] == "1q":
            heads[w] += 1
            return ops[i][1]
        return None

    guard = 4 * len(ops) + 4
    while remaining:
        parity = len(columns) % 2
        pairs = list(range(parity, num_wires - 1, 2))
        paired = {w for p in pairs for w in (p, p + 1)}
        column = {"pairs": {}, "edges": {}}
        done = 0
        for p in pairs:
            i, j = head(p), head(p + 1)
            if i is not None and i == j and ops[i][0] == "CNOT":
                column["pairs"][p] = ("cnot", 0 if ops[i][1] == p else 1)
                heads[p] += 1
                heads[p + 1] += 1
                done += 1
            else:
                hosted = {w: host(w) for w in (p, p + 1)}
                done += sum(g is not None for g in hosted.values())
                column["pairs"][p] = ("identity", hosted)
        for w in range(num_wires):
            if w not in paired:
                column["edges"][w] = host(w)
                done += column["edges"][w] is not None
        remaining -= done
        columns.append(column)
        if len(columns) > guard:
            raise CompileError("brick scheduling made no progress")
    return columns


def _idle_column(num_wires: int, parity: int) -> dict:
    pairs = list(range(parity, num_wires - 1, 2))
    paired = {w for p in pairs for w in (p, p + 1)}
    return {
        "pairs": {p: ("identity", {p: None, p + 1: None}) for p in pairs},
        "edges": {w: None for w in range(num_wires) if w not in paired},
    }


def padded_columns(needed: int, min_columns: int = 0, column_quantum: int = 2) -> int:
    total = max(needed, min_columns)
    return -(-total // column_quantum) * column_quantum


def compile_blind(circuit: Circuit, rng: np.random.Generator, min_columns: int = 0,
                  column_quantum: int = 2, max_wires: int = DEFAULT_MAX_WIRES,
                  max_columns: int = DEFAULT_MAX_COLUMNS) -> CompiledCircuit:
    """Blind form on a staggered two-CZ brickwork.

    Each column is ``[layer, CZ on its pairs, layer, CZ on its pairs]`` where
    every layer gives each wire two units. The column count is padded to a
    multiple of ``column_quantum`` (and at least ``min_columns``), so the
    announced structure depends on the wire and column counts only.
    """
    _check_caps(circuit, max_wires)
    n = circuit.num_wires
    ops, perm = route_adjacent(circuit)
    columns = schedule_bricks(n, ops)
    total = padded_columns(len(columns), min_columns, column_quantum)
    if total > max_columns:
        raise CompileError(f"circuit needs {total} brick columns, cap is {max_columns}")
    while len(columns) < total:
        columns.append(_idle_column(n, len(columns) % 2))

    em = _Emitter()
    for k, column in enumerate(columns):
        first, second, toggles = {}, {}, {}
        for p, (role, detail) in column["pairs"].items():
            if role == "cnot":
                brick = make_brick("cnot", rng, control=detail, wires=(p, p + 1))
                for i, w in enumerate((p, p + 1)):
                    first[w], second[w] = brick.first[i], brick.second[i]
            else:
                for w, g in detail.items():
                    target = None if g is None else user_gate_matrix(g)
                    (n1, n2, m), pauli = choose_representation(target, "host", rng)
                    first[w], second[w], toggles[w] = (n1, n2), (m, 0), pauli
        for w, g in column["edges"].items():
            target = None if g is None else user_gate_matrix(g)
            angles, pauli = choose_representation(target, "block", rng)
            first[w], second[w], toggles[w] = angles[:2], angles[2:], pauli
        pairs = sorted(column["pairs"])
        for w in range(n):
            em.units(w, first[w])
        for p in pairs:
            em.bob("CZ", p, p + 1)
        for w in range(n):
            em.units(w, second[w])
        for p in pairs:
            em.bob("CZ", p, p + 1)
        for w, pauli in sorted(toggles.items()):
            em.toggle(w, pauli)
    return CompiledCircuit(2, n, em.slots, perm, columns=total)


def compile_circuit(circuit: Circuit, protocol: int, rng: np.random.Generator, **options) -> CompiledCircuit:
    if protocol == 1:
        return compile_weak_blind(circuit, rng, **options)
    if protocol == 2:
        return compile_blind(circuit, rng, **options)
    raise CompileError(f"protocol must be 1 or 2, got {protocol}")


def compiled_bob_gates(compiled: CompiledCircuit) -> set:
    return {s.kind for s in compiled.slots if isinstance(s, BobGate)}


def compiled_reference_unitary(compiled: CompiledCircuit) -> np.ndarray:
    """Unitary the compiled slots implement on the data wires, every teleport taken as
    exact and every frame toggle applied as its Pauli. Used as a compile-time oracle."""
    from .simcore import apply_matrix, circuit_unitary, PureState  # noqa: F401

    n = compiled.num_wires
    dim = 2**n
    cols = []
    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1
        psi = PureState(n, e)
        for s in compiled.slots:
            if isinstance(s, BobGate):
                psi = apply_matrix(psi, gate_matrix(s.kind), s.wires)
            elif isinstance(s, TeleportSlot):
                psi = apply_matrix(psi, gate_matrix("A", s.angle), [s.wire])
            else:
                psi = apply_matrix(psi, _PAULIS[(s.x, s.z)], [s.wire])
        cols.append(psi.amplitudes)
    return np.stack(cols, axis=1)


def axis_alignment(word_a: Sequence[str], word_b: Sequence[str]) -> float:
    """Signed cosine between the rotation axes of two words (+1 parallel, -1 antiparallel)."""
    a, _ = rotation_axis(tlike_word_matrix(word_a))
    b, _ = rotation_axis(tlike_word_matrix(word_b))
    return float(a @ b)
