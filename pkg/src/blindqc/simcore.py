"""Dense state-vector simulation for small registers.

Wire 0 is the most significant bit of the amplitude index, so the basis
state ``|b0 b1 ... b_{n-1}>`` lives at index ``int("b0b1...", 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_WIRES = 14
ALGEBRA_TOL = 1e-12
FIDELITY_TOL = 1e-10

SQRT2_INV = 1 / np.sqrt(2)


class SimulationError(ValueError):
    """Invalid wire index, dimension mismatch or other misuse of the simulator."""


class Angle8(int):
    """An angle n*pi/4 stored as the integer n modulo 8."""

    def __new__(cls, n: int = 0):
        return super().__new__(cls, int(n) % 8)

    def __neg__(self):
        return Angle8(-int(self))

    def __add__(self, other):
        return Angle8(int(self) + int(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Angle8(int(self) - int(other))

    def doubled(self) -> "Angle8":
        return Angle8(2 * int(self))

    @property
    def radians(self) -> float:
        return int(self) * np.pi / 4

    def __repr__(self):
        return f"Angle8({int(self)})"


ONE_QUBIT_KINDS = ("X", "Z", "H", "S", "A")
TWO_QUBIT_KINDS = ("CNOT", "CZ")

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT2_INV
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def a_matrix(n: int) -> np.ndarray:
    """diag(1, e^{i n pi/4})."""
    return np.array([[1, 0], [0, np.exp(1j * np.pi * (int(n) % 8) / 4)]], dtype=complex)


_A = tuple(a_matrix(n) for n in range(8))
_A[0][...] = np.eye(2)
_A[2][...] = _S
_A[4][...] = _Z
_A[6][...] = _S.conj()
for _m in _A:
    _m.setflags(write=False)


@dataclass(frozen=True)
class GateId:
    kind: str
    wires: tuple
    angle: int = 0

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if self.kind in ONE_QUBIT_KINDS:
            if len(self.wires) != 1:
                raise SimulationError(f"{self.kind} acts on one wire, got {self.wires}")
        elif self.kind in TWO_QUBIT_KINDS:
            if len(self.wires) != 2:
                raise SimulationError(f"{self.kind} acts on two wires, got {self.wires}")
            if self.wires[0] == self.wires[1]:
                raise SimulationError(f"{self.kind} needs two distinct wires, got {self.wires}")
        else:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        if any(w < 0 for w in self.wires):
            raise SimulationError(f"negative wire index in {self.wires}")
        object.__setattr__(self, "angle", Angle8(self.angle) if self.kind == "A" else Angle8(0))

    @property
    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.angle)

    def __str__(self):
        if self.kind == "A":
            return f"A({int(self.angle)}) {self.wires[0]}"
        return f"{self.kind} " + " ".join(map(str, self.wires))


def gate(kind: str, *wires: int, angle: int = 0) -> GateId:
    """Shorthand constructor, ``gate("CNOT", 0, 1)`` or ``gate("A", 2, angle=1)``."""
    if kind == "T":
        kind, angle = "A", 1
    return GateId(kind, wires, angle)


def gate_matrix(kind: str, angle: int = 0) -> np.ndarray:
    if kind == "X":
        return _X
    if kind == "Z":
        return _Z
    if kind == "H":
        return _H
    if kind == "S":
        return _S
    if kind == "A":
        return _A[int(angle) % 8]
    if kind == "T":
        return _A[1]
    if kind == "CNOT":
        return _CNOT
    if kind == "CZ":
        return _CZ
    raise SimulationError(f"unknown gate kind {kind!r}")


@dataclass
class PureState:
    num_wires: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.num_wires < 0 or self.num_wires > MAX_WIRES:
            raise SimulationError(f"wire count {self.num_wires} outside [0, {MAX_WIRES}]")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.num_wires,):
            raise SimulationError(
                f"expected {2**self.num_wires} amplitudes, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex]) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(np.log2(len(amps))) if len(amps) else -1
        if n < 0 or 2**n != len(amps):
            raise SimulationError(f"amplitude count {len(amps)} is not a power of two")
        return cls(n, amps)

    def copy(self) -> "PureState":
        return PureState(self.num_wires, self.amplitudes.copy())

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self, other: "PureState") -> "PureState":
        """``self`` on the leading wires, ``other`` appended after them."""
        return PureState(self.num_wires + other.num_wires, np.outer(self.amplitudes, other.amplitudes).reshape(-1))


def _check_wire(state: PureState, wire: int) -> None:
    if not 0 <= wire < state.num_wires:
        raise SimulationError(f"wire {wire} out of range for {state.num_wires}-wire state")


def new_state(num_wires: int, basis_bits: Sequence[int] | None = None) -> PureState:
    if num_wires < 1:
        raise SimulationError("a state needs at least one wire")
    if num_wires > MAX_WIRES:
        raise SimulationError(f"at most {MAX_WIRES} wires are supported")
    bits = [0] * num_wires if basis_bits is None else [int(b) for b in basis_bits]
    if len(bits) != num_wires:
        raise SimulationError(f"{len(bits)} basis bits for {num_wires} wires")
    if any(b not in (0, 1) for b in bits):
        raise SimulationError(f"basis bits must be 0/1, got {bits}")
    amps = np.zeros(2**num_wires, dtype=complex)
    amps[int("".join(map(str, bits)), 2)] = 1.0
    return PureState(num_wires, amps)


def prepare_a_state(n: int) -> PureState:
    """(|0> + e^{i n pi/4}|1>)/sqrt(2)."""
    return PureState(1, np.array([1.0, np.exp(1j * np.pi * (int(n) % 8) / 4)]) * SQRT2_INV)


def apply_matrix(state: PureState, matrix: np.ndarray, wires: Sequence[int]) -> PureState:
    """Apply a 2^k x 2^k unitary to the listed wires (first wire = most significant)."""
    wires = list(wires)
    for w in wires:
        _check_wire(state, w)
    if len(set(wires)) != len(wires):
        raise SimulationError(f"coincident wires {wires}")
    n, k = state.num_wires, len(wires)
    if k == 1:
        # (left, 2, right) view: one broadcast 2x2 matmul
        w = wires[0]
        psi = state.amplitudes.reshape(2**w, 2, 2 ** (n - w - 1))
        return PureState(n, np.matmul(matrix, psi).reshape(-1))
    if wires == list(range(n)):
        return PureState(n, np.asarray(matrix) @ state.amplitudes)
    psi = state.amplitudes.reshape((2,) * n)
    op = np.asarray(matrix).reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), wires))
    out = np.moveaxis(out, list(range(k)), wires)
    return PureState(n, out.reshape(-1))


def apply(state: PureState, g: GateId) -> PureState:
    return apply_matrix(state, g.matrix, g.wires)


def apply_all(state: PureState, gates: Iterable[GateId]) -> PureState:
    for g in gates:
        state = apply(state, g)
    return state


def measure_prob(state: PureState, wire: int) -> float:
    """Exact probability of reading 1 on ``wire``."""
    _check_wire(state, wire)
    psi = state.amplitudes.reshape((2,) * state.num_wires)
    ones = np.take(psi, 1, axis=wire)
    return float(np.vdot(ones, ones).real)


def measure(state: PureState, wire: int, rng: np.random.Generator):
    """Sample ``wire`` in the computational basis and delete it.

    Returns ``(bit, collapsed_state, index_map)`` where ``index_map[old] = new``
    for every surviving wire. Survivors keep their relative order.
    """
    p1 = measure_prob(state, wire)
    bit = int(rng.random() < p1)
    return (bit,) + project_out(state, wire, bit)


def project_out(state: PureState, wire: int, bit: int):
    """Postselect ``wire`` on ``bit``, renormalize and remove the wire."""
    _check_wire(state, wire)
    psi = state.amplitudes.reshape((2,) * state.num_wires)
    rest = np.take(psi, bit, axis=wire).reshape(-1)
    norm = np.sqrt(np.vdot(rest, rest).real)
    if norm < 1e-15:
        raise SimulationError(f"outcome {bit} on wire {wire} has zero probability")
    index_map = {old: (old if old < wire else old - 1) for old in range(state.num_wires) if old != wire}
    return PureState(state.num_wires - 1, rest / norm), index_map


def fidelity_up_to_phase(a: PureState, b: PureState) -> float:
    if a.num_wires != b.num_wires:
        raise SimulationError(f"cannot compare {a.num_wires}- and {b.num_wires}-wire states")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def same_up_to_phase(a: PureState, b: PureState, tol: float = FIDELITY_TOL) -> bool:
    return fidelity_up_to_phase(a, b) >= 1 - tol


def density_from_ensemble(members: Iterable[tuple]) -> np.ndarray:
    """Mixture sum_i w_i |psi_i><psi_i| of (weight, PureState) pairs."""
    members = list(members)
    if not members:
        raise SimulationError("empty ensemble")
    dim = len(members[0][1].amplitudes)
    total = 0.0
    rho = np.zeros((dim, dim), dtype=complex)
    for w, psi in members:
        if w < 0:
            raise SimulationError(f"negative weight {w}")
        if len(psi.amplitudes) != dim:
            raise SimulationError("ensemble members have different dimensions")
        total += w
        rho += w * np.outer(psi.amplitudes, psi.amplitudes.conj())
    if abs(total - 1) > ALGEBRA_TOL:
        raise SimulationError(f"weights sum to {total}, not 1")
    return rho


def reduced_density(state: PureState, keep: Sequence[int]) -> np.ndarray:
    """Partial trace down to the wires in ``keep`` (in the given order)."""
    keep = list(keep)
    for w in keep:
        _check_wire(state, w)
    n = state.num_wires
    rest = [w for w in range(n) if w not in keep]
    psi = state.amplitudes.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = ALGEBRA_TOL) -> bool:
    """Matrix equality modulo a global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        return False
    inner = np.vdot(v.reshape(-1), u.reshape(-1))
    if abs(inner) < 1e-15:
        return False
    phase = inner / abs(inner)
    return bool(np.max(np.abs(u - phase * v)) <= tol)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def circuit_unitary(num_wires: int, gates: Iterable[GateId]) -> np.ndarray:
    """Full 2^n x 2^n unitary of a gate list (gates applied in list order)."""
    dim = 2**num_wires
    cols = []
    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1
        cols.append(apply_all(PureState(num_wires, e), gates).amplitudes)
    return np.stack(cols, axis=1)


class Register:
    """Labelled qubits kept as a product of independent PureState blocks.

    Qubits start in their own block and are merged only when a two-wire gate
    couples two blocks, so a long protocol run over product-state ancillas
    never holds more than the entangled core in one dense vector.
    """

    def __init__(self):
        self._blocks: dict[int, PureState] = {}
        self._members: dict[int, list] = {}
        self._where: dict[str, int] = {}
        self._next_block = 0

    def __contains__(self, label: str) -> bool:
        return label in self._where

    @property
    def labels(self) -> list:
        return list(self._where)

    def add(self, label: str, state: PureState) -> None:
        if state.num_wires != 1:
            raise SimulationError("register qubits are added one at a time")
        if label in self._where:
            raise SimulationError(f"duplicate qubit label {label!r}")
        bid = self._next_block
        self._next_block += 1
        self._blocks[bid] = state
        self._members[bid] = [label]
        self._where[label] = bid

    def _locate(self, label: str):
        try:
            bid = self._where[label]
        except KeyError:
            raise SimulationError(f"no qubit labelled {label!r}") from None
        return bid, self._members[bid].index(label)

    def _merge(self, a: int, b: int) -> int:
        if a == b:
            return a
        self._blocks[a] = self._blocks[a].tensor(self._blocks.pop(b))
        for label in self._members[b]:
            self._where[label] = a
        self._members[a].extend(self._members.pop(b))
        if self._blocks[a].num_wires > MAX_WIRES:
            raise SimulationError(f"entangled block exceeds {MAX_WIRES} wires")
        return a

    def apply(self, matrix: np.ndarray, labels: Sequence[str]) -> None:
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise SimulationError(f"coincident wires {labels}")
        bid = self._locate(labels[0])[0]
        for label in labels[1:]:
            bid = self._merge(bid, self._locate(label)[0])
        positions = [self._members[bid].index(label) for label in labels]
        self._blocks[bid] = apply_matrix(self._blocks[bid], matrix, positions)

    def prob_one(self, label: str) -> float:
        bid, pos = self._locate(label)
        return measure_prob(self._blocks[bid], pos)

    def measure(self, label: str, rng: np.random.Generator) -> int:
        bid, pos = self._locate(label)
        p1 = measure_prob(self._blocks[bid], pos)
        bit = int(rng.random() < p1)
        self._drop(bid, pos, bit)
        return bit

    def _drop(self, bid: int, pos: int, bit: int) -> None:
        label = self._members[bid].pop(pos)
        del self._where[label]
        if not self._members[bid]:
            del self._blocks[bid], self._members[bid]
            return
        self._blocks[bid] = project_out(self._blocks[bid], pos, bit)[0]

    def discard(self, label: str) -> None:
        """Throw away a qubit that is not entangled with anything."""
        bid, _ = self._locate(label)
        if len(self._members[bid]) != 1:
            raise SimulationError(f"qubit {label!r} is entangled and cannot be discarded")
        del self._blocks[bid], self._members[bid], self._where[label]

    def rename(self, old: str, new: str) -> None:
        bid, pos = self._locate(old)
        if new in self._where:
            raise SimulationError(f"duplicate qubit label {new!r}")
        self._members[bid][pos] = new
        del self._where[old]
        self._where[new] = bid

    def joint_state(self, labels: Sequence[str]) -> PureState:
        """Dense state of exactly ``labels``, which must not be entangled with anything else."""
        labels = list(labels)
        bids = []
        for label in labels:
            bid = self._locate(label)[0]
            if bid not in bids:
                bids.append(bid)
        order = []
        state = None
        for bid in bids:
            state = self._blocks[bid] if state is None else state.tensor(self._blocks[bid])
            order.extend(self._members[bid])
        missing = [label for label in order if label not in labels]
        if missing:
            raise SimulationError(f"requested qubits are entangled with {missing}")
        perm = [order.index(label) for label in labels]
        psi = state.amplitudes.reshape((2,) * state.num_wires).transpose(perm)
        return PureState(len(labels), psi.reshape(-1))
