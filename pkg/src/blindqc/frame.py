"""Quantum one-time pad and Pauli key-frame propagation.

A wire carrying logical state ``|phi>`` physically holds ``X^x Z^z S^s |phi>``,
where the word is read as a matrix product (``S`` acts first, then ``Z``,
then ``X``). ``s`` is a pending phase correction left behind by diagonal
non-Clifford gates; it has to be discharged before any gate that does not
commute with ``S``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .simcore import (
    ALGEBRA_TOL,
    GateId,
    PureState,
    apply_matrix,
    equal_up_to_phase,
    gate_matrix,
    kron_all,
)


class FrameError(ValueError):
    pass


@dataclass
class KeyFrame:
    x: list
    z: list
    s: list = field(default=None)

    def __post_init__(self):
        if self.s is None:
            self.s = [0] * len(self.x)
        if not len(self.x) == len(self.z) == len(self.s):
            raise FrameError("x, z and s keys must cover the same wires")
        self.x = [int(b) & 1 for b in self.x]
        self.z = [int(b) & 1 for b in self.z]
        self.s = [int(b) & 1 for b in self.s]

    @classmethod
    def zeros(cls, num_wires: int) -> "KeyFrame":
        return cls([0] * num_wires, [0] * num_wires)

    @classmethod
    def random(cls, num_wires: int, rng: np.random.Generator) -> "KeyFrame":
        bits = rng.integers(0, 2, size=(2, num_wires))
        return cls(list(bits[0]), list(bits[1]))

    def __len__(self):
        return len(self.x)

    def copy(self) -> "KeyFrame":
        return KeyFrame(list(self.x), list(self.z), list(self.s))

    def pair(self, wire: int) -> tuple:
        return self.x[wire], self.z[wire]

    def toggle(self, wire: int, dx: int = 0, dz: int = 0) -> None:
        self.x[wire] ^= dx & 1
        self.z[wire] ^= dz & 1

    def clear_s(self, wire: int) -> None:
        """Mark the pending S as discharged by a physical S (S.S = Z)."""
        self.z[wire] ^= self.s[wire]
        self.s[wire] = 0


def _word(x: int, z: int) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    if z:
        m = gate_matrix("Z") @ m
    if x:
        m = gate_matrix("X") @ m
    m.setflags(write=False)
    return m


_WORDS = {(x, z): _word(x, z) for x in (0, 1) for z in (0, 1)}
_WORDS_DAG = {k: m.conj().T for k, m in _WORDS.items()}


def pauli_word(x: int, z: int) -> np.ndarray:
    """Matrix of X^x Z^z."""
    return _WORDS[int(x) & 1, int(z) & 1]


def _check_cover(state: PureState, frame: KeyFrame) -> None:
    if len(frame) != state.num_wires:
        raise FrameError(f"frame covers {len(frame)} wires, state has {state.num_wires}")


def encrypt(state: PureState, frame: KeyFrame) -> PureState:
    _check_cover(state, frame)
    return _pauli_pad(state, frame, inverse=False)


def decrypt(state: PureState, frame: KeyFrame) -> PureState:
    _check_cover(state, frame)
    pending = [w for w, s in enumerate(frame.s) if s]
    if pending:
        raise FrameError(f"undischarged S correction on wires {pending}")
    return _pauli_pad(state, frame, inverse=True)


def _pauli_pad(state: PureState, frame: KeyFrame, inverse: bool) -> PureState:
    """Apply X^x Z^z to every wire at once as an index flip and a sign."""
    n = state.num_wires
    xmask = sum(b << (n - 1 - w) for w, b in enumerate(frame.x))
    zmask = sum(b << (n - 1 - w) for w, b in enumerate(frame.z))
    idx = np.arange(2**n)
    signs = 1 - 2 * (np.bitwise_count(idx & zmask).astype(np.int64) & 1)
    psi = state.amplitudes
    if inverse:
        # (X^x Z^z)^dagger = Z^z X^x
        out = psi[idx ^ xmask] * signs
    else:
        out = (psi * signs)[idx ^ xmask]
    return PureState(n, out)


# A(-2n) expressed as Z^u S^v, indexed by (-2n) mod 8.
_DIAG_AS_ZS = {0: (0, 0), 2: (0, 1), 4: (1, 0), 6: (1, 1)}


def update_for_gate(frame: KeyFrame, g: GateId):
    """Propagate the keys through ``g`` acting on the encrypted state.

    Returns ``(new_frame, corrections)``; ``corrections`` lists the
    ``("S", wire)`` phase corrections newly owed on top of the Paulis.
    """
    out = frame.copy()
    corrections = []
    wires = g.wires
    if max(wires) >= len(frame):
        raise FrameError(f"gate {g} outside the {len(frame)}-wire frame")
    if g.kind in ("H", "CNOT", "CZ"):
        pending = [w for w in wires if out.s[w]]
        if pending:
            raise FrameError(f"pending S correction on wires {pending} blocks {g.kind}")
    w = wires[0]
    if g.kind == "X":
        out.z[w] ^= out.s[w]
    elif g.kind == "Z":
        pass
    elif g.kind == "H":
        out.x[w], out.z[w] = out.z[w], out.x[w]
    elif g.kind == "S":
        out.z[w] ^= out.x[w]
    elif g.kind == "A":
        if out.x[w]:
            u, v = _DIAG_AS_ZS[(-2 * int(g.angle)) % 8]
            out.z[w] ^= u
            if v:
                # two pending S gates fuse into a Z
                out.z[w] ^= out.s[w]
                out.s[w] ^= 1
                if out.s[w]:
                    corrections.append(("S", w))
    elif g.kind == "CNOT":
        c, t = wires
        out.z[c] ^= out.z[t]
        out.x[t] ^= out.x[c]
    elif g.kind == "CZ":
        c, t = wires
        out.z[c] ^= out.x[t]
        out.z[t] ^= out.x[c]
    else:
        raise FrameError(f"no key-update rule for {g.kind}")
    return out, corrections


def update_for_gates(frame: KeyFrame, gates) -> KeyFrame:
    for g in gates:
        frame, _ = update_for_gate(frame, g)
    return frame


@dataclass
class RuleReport:
    gate: GateId
    results: dict

    @property
    def passed(self) -> int:
        return sum(self.results.values())

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _frame_operator(xs, zs, ss) -> np.ndarray:
    mats = []
    for x, z, s in zip(xs, zs, ss):
        m = pauli_word(x, z)
        if s:
            m = m @ gate_matrix("S")
        mats.append(m)
    return kron_all(mats)


def exhaustive_rule_check(g: GateId, tol: float = ALGEBRA_TOL) -> RuleReport:
    """Check ``U X^a Z^b = X^a' Z^b' C U`` (up to phase) for every key pattern.

    The gate is relabelled onto wires ``0..k-1`` and its matrix is compared
    against the frame rule's prediction by direct matrix multiplication.
    """
    k = len(g.wires)
    local = GateId(g.kind, tuple(range(k)), g.angle)
    u = local.matrix
    results = {}
    for bits in itertools.product((0, 1), repeat=2 * k):
        xs, zs = list(bits[0::2]), list(bits[1::2])
        before = KeyFrame(xs, zs)
        after, _ = update_for_gate(before, local)
        lhs = u @ _frame_operator(xs, zs, [0] * k)
        rhs = _frame_operator(after.x, after.z, after.s) @ u
        results[bits] = equal_up_to_phase(lhs, rhs, tol)
    return RuleReport(g, results)
