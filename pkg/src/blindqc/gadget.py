"""A-gate teleportation on one-time-padded wires and its correction cascade.

Teleporting an encrypted ancilla ``X^a Z^b |A_n>`` into a data wire whose
X key is ``x`` leaves the logical qubit on the ancilla wire with
``A((-1)^(a^c^x) n)`` applied, where ``c`` is the measured data bit, and
with its keys updated to ``(x ^ c, z ^ b)``. When the sign comes out wrong a
second ancilla at angle ``2n`` repairs it; if that one also fails the
leftover is ``A(4n)``, which is ``Z`` for odd ``n`` and the identity
otherwise.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .frame import pauli_word
from .simcore import (
    Angle8,
    PureState,
    apply,
    apply_matrix,
    gate,
    gate_matrix,
    measure_prob,
    prepare_a_state,
    project_out,
)

PURPOSES = ("primary", "correction")


@dataclass(frozen=True)
class AncillaSpec:
    angle: Angle8
    a: int = 0
    b: int = 0
    purpose: str = "primary"

    def __post_init__(self):
        object.__setattr__(self, "angle", Angle8(self.angle))
        if self.purpose not in PURPOSES:
            raise ValueError(f"purpose must be one of {PURPOSES}")
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError("ancilla keys are bits")

    def state(self) -> PureState:
        """X^a Z^b |A_angle>."""
        return PureState(1, _keyed_a_state(int(self.angle), self.a, self.b))


@functools.lru_cache(maxsize=None)
def _keyed_a_state(n: int, a: int, b: int) -> np.ndarray:
    amps = pauli_word(a, b) @ prepare_a_state(n).amplitudes
    amps.setflags(write=False)
    return amps


def ancilla_pair(n: int, rng: np.random.Generator) -> tuple:
    """Freshly keyed primary (angle n) and correction (angle 2n) ancillas."""
    a1, b1, a2, b2 = (int(v) for v in rng.integers(0, 2, size=4))
    n = Angle8(n)
    return AncillaSpec(n, a1, b1, "primary"), AncillaSpec(n.doubled(), a2, b2, "correction")


def desired_bit(a: int, c: int, x: int) -> int:
    """1 when the teleported angle has the intended sign."""
    return int((a ^ c ^ x) == 0)


def needs_final_z(n: int) -> int:
    """A(4n) is Z exactly when n is odd."""
    return int(Angle8(n)) & 1


class TeleportResult(NamedTuple):
    bit: int
    state: PureState
    desired: int
    wire: int
    p_one: float


def teleport_a(state: PureState, data_wire: int, ancilla: AncillaSpec, data_x_key: int,
               rng: np.random.Generator) -> TeleportResult:
    """Append ``ancilla``, CNOT it onto ``data_wire`` and measure the data wire.

    The logical qubit ends up on the last wire of the returned state.
    ``p_one`` is the exact probability of the reported bit being 1.
    """
    joined = state.tensor(ancilla.state())
    anc = joined.num_wires - 1
    joined = apply(joined, gate("CNOT", anc, data_wire))
    p1 = measure_prob(joined, data_wire)
    c = int(rng.random() < p1)
    out, _ = project_out(joined, data_wire, c)
    return TeleportResult(c, out, desired_bit(ancilla.a, c, data_x_key), out.num_wires - 1, p1)


@dataclass
class CascadeOutcome:
    angle: Angle8
    round1_bit: int
    round1_desired: int
    round2_bit: Optional[int] = None
    round2_desired: Optional[int] = None
    discard_bit: Optional[int] = None
    final_z_needed: int = 0
    frame_delta: tuple = (0, 0)
    report_probs: tuple = ()

    def __post_init__(self):
        if (self.round2_bit is None) != bool(self.round1_desired):
            raise ValueError("round 2 happens exactly when round 1 misses")
        if self.final_z_needed and (self.round2_bit is None or not self.angle & 1):
            raise ValueError("a final Z is only owed after two misses at an odd angle")

    @property
    def reported_bits(self) -> tuple:
        """Bits Bob sends back for this slot, in order."""
        second = self.round2_bit if self.round2_bit is not None else self.discard_bit
        return (self.round1_bit,) if second is None else (self.round1_bit, second)


def run_cascade(state: PureState, data_wire: int, n: int, primary: AncillaSpec,
                correction: AncillaSpec, data_x_key: int, rng: np.random.Generator,
                consume: str = "always", z_mode: str = "frame"):
    """Apply ``A(n)`` to the logical qubit on ``data_wire`` up to a Pauli frame change.

    ``consume="always"`` measures the correction ancilla out even when it is
    not needed, so every branch reports two bits; ``"skip"`` leaves it alone.
    ``z_mode="frame"`` records the final Z in ``frame_delta``; ``"apply"``
    applies it to the state as the server would. The logical qubit ends on
    the last wire.
    """
    n = Angle8(n)
    if primary.angle != n or correction.angle != n.doubled():
        raise ValueError(f"ancillas {primary.angle}/{correction.angle} do not fit angle {n}")
    if consume not in ("always", "skip") or z_mode not in ("frame", "apply"):
        raise ValueError(f"unknown cascade mode {consume!r}/{z_mode!r}")

    r1 = teleport_a(state, data_wire, primary, data_x_key, rng)
    x = data_x_key ^ r1.bit
    dz = primary.b
    state, wire = r1.state, r1.wire
    probs = [r1.p_one]
    fields = dict(angle=n, round1_bit=r1.bit, round1_desired=r1.desired)

    if r1.desired:
        if consume == "always":
            joined = state.tensor(correction.state())
            p1 = measure_prob(joined, joined.num_wires - 1)
            bit = int(rng.random() < p1)
            state, _ = project_out(joined, joined.num_wires - 1, bit)
            fields["discard_bit"] = bit
            probs.append(p1)
    else:
        r2 = teleport_a(state, wire, correction, x, rng)
        x ^= r2.bit
        dz ^= correction.b
        state, wire = r2.state, r2.wire
        probs.append(r2.p_one)
        fields.update(round2_bit=r2.bit, round2_desired=r2.desired)
        if not r2.desired and needs_final_z(n):
            fields["final_z_needed"] = 1
            if z_mode == "frame":
                dz ^= 1
            else:
                state = apply(state, gate("Z", wire))

    outcome = CascadeOutcome(frame_delta=(x ^ data_x_key, dz), report_probs=tuple(probs), **fields)
    return outcome, state


def discharge_s_correction(state: PureState, wire: int, s_bit: int, primary: AncillaSpec,
                           correction: AncillaSpec, data_x_key: int, rng: np.random.Generator,
                           consume: str = "always"):
    """Apply S^s_bit to the logical qubit through the teleportation cascade.

    With ``s_bit=0`` the same two ancillas are consumed at angle 0 so the
    server sees the same pattern. Combine with ``KeyFrame.clear_s``: a
    pending S followed by this S is a Z, which the frame absorbs.
    """
    n = 2 * int(s_bit)
    if primary is None or correction is None:
        raise ValueError("discharging needs both ancillas")
    return run_cascade(state, wire, n, primary, correction, data_x_key, rng, consume=consume)


def gadget_operator(n: int, outcome: CascadeOutcome) -> np.ndarray:
    """The 2x2 operator a cascade branch applied beneath the frame, for checks."""
    sign1 = 1 if outcome.round1_desired else -1
    op = gate_matrix("A", sign1 * int(n))
    if outcome.round2_bit is not None:
        sign2 = 1 if outcome.round2_desired else -1
        op = gate_matrix("A", sign2 * 2 * int(n)) @ op
    if outcome.final_z_needed:
        op = gate_matrix("Z") @ op
    return op
