"""Trap wires and detection-rate experiments against deviating servers.

A trap is an extra wire prepared in |0> or |+>, one-time padded like every
other wire, and carrying only identity (angle-0) work. After decryption
Alice measures it in its own basis; any outcome other than the prepared
one means the server touched it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compiler import Circuit
from .engine import AdversaryPolicy, ProtocolError, run_session
from .simcore import GateId, PureState, gate_matrix

TRAP_TYPES = ("0", "+")
_TRAP_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
}
_Y = np.array([[0, -1j], [1j, 0]])
_PAULI = {"X": gate_matrix("X"), "Y": _Y, "Z": gate_matrix("Z")}


@dataclass(frozen=True)
class TrapPlan:
    N: int
    N_d: int
    positions: tuple
    types: tuple
    s: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("a trap plan needs at least one wire")
        if not 0 <= self.N_d <= self.N:
            raise ValueError(f"N_d={self.N_d} outside [0, {self.N}]")
        if len(self.positions) != self.N_d or len(self.types) != self.N_d:
            raise ValueError("one position and one type per trap")
        if len(set(self.positions)) != self.N_d or not all(0 <= p < self.N for p in self.positions):
            raise ValueError(f"trap positions {self.positions} invalid for {self.N} wires")
        if not set(self.types) <= set(TRAP_TYPES):
            raise ValueError(f"trap types must be in {TRAP_TYPES}")
        if self.s < 1:
            raise ValueError("repetition count must be positive")

    @property
    def data_wires(self) -> list:
        traps = set(self.positions)
        return [w for w in range(self.N) if w not in traps]


def make_trap_plan(N: int, N_d: int, rng: np.random.Generator, s: int = 1) -> TrapPlan:
    positions = tuple(sorted(int(p) for p in rng.choice(N, size=N_d, replace=False))) if N_d else ()
    types = tuple(TRAP_TYPES[int(b)] for b in rng.integers(0, 2, size=N_d))
    return TrapPlan(N, N_d, positions, types, s)


@dataclass(frozen=True)
class TrapLedger:
    plan: TrapPlan

    @property
    def expected(self) -> dict:
        """Trap wire -> the basis state Alice expects back."""
        return dict(zip(self.plan.positions, self.plan.types))

    def inputs(self, data_inputs=None) -> list:
        data = list(data_inputs) if data_inputs is not None else [_TRAP_STATES["0"]] * len(self.plan.data_wires)
        if len(data) != len(self.plan.data_wires):
            raise ValueError("one input per data wire")
        out = [None] * self.plan.N
        for w, v in zip(self.plan.data_wires, data):
            out[w] = np.asarray(v, dtype=complex)
        for w, t in self.expected.items():
            out[w] = _TRAP_STATES[t]
        return out


def insert_traps(circuit: Circuit, plan: TrapPlan):
    """Spread the circuit over the plan's data wires and leave the traps idle.

    Idle wires compile to angle-0 teleports only, so a trap wire looks like
    any padding wire of a circuit with ``plan.N`` wires.
    """
    if circuit.num_wires != plan.N - plan.N_d:
        raise ValueError(f"circuit has {circuit.num_wires} wires, plan leaves {plan.N - plan.N_d}")
    where = plan.data_wires
    out = Circuit(plan.N)
    for g in circuit.instructions:
        out.append(GateId(g.kind, tuple(where[w] for w in g.wires), g.angle))
    return out, TrapLedger(plan)


def padded_circuit(circuit: Circuit, plan: TrapPlan) -> Circuit:
    """The same circuit with plain idle wires where the traps would go."""
    return insert_traps(circuit, plan)[0]


def trap_outcome(output: PureState, wire: int, trap_type: str, rng: np.random.Generator) -> int:
    """Measure a decrypted trap in its preparation basis; 1 means it was disturbed."""
    psi = output.amplitudes.reshape((2,) * output.num_wires)
    psi = np.moveaxis(psi, wire, 0).reshape(2, -1)
    if trap_type == "+":
        psi = gate_matrix("H") @ psi
    p1 = float(np.sum(np.abs(psi[1]) ** 2))
    return int(rng.random() < p1)


def check_traps(output: PureState, ledger: TrapLedger, rng: np.random.Generator) -> str:
    if output.num_wires != ledger.plan.N:
        raise ValueError(f"output has {output.num_wires} wires, ledger expects {ledger.plan.N}")
    hit = any(trap_outcome(output, w, t, rng) for w, t in ledger.expected.items())
    return "Detected" if hit else "Clean"


# --- adversaries ---------------------------------------------------------------

class ExtraGate(AdversaryPolicy):
    name = "extra_gate"

    def __init__(self, gate: GateId, slot: int = 0):
        self.gate, self.slot = gate, slot

    def before_slot(self, bob, index, slot):
        if index == self.slot:
            bob.deviate(self.gate.matrix, self.gate.wires)
        return False


class WrongMeasureReport(AdversaryPolicy):
    name = "wrong_measure_report"

    def __init__(self, slot: int = 0):
        self.slot = slot

    def report(self, slot_id, bit):
        return bit ^ 1 if slot_id == self.slot else bit


class SkipSlot(AdversaryPolicy):
    name = "skip_slot"

    def __init__(self, slot: int = 0):
        self.slot = slot

    def before_slot(self, bob, index, slot):
        return index == self.slot


class RandomPauli(AdversaryPolicy):
    name = "random_pauli"

    def __init__(self, rate: float = 0.05):
        self.rate = rate

    def before_slot(self, bob, index, slot):
        if self.rng.random() < self.rate:
            w = int(self.rng.integers(bob.num_wires))
            bob.deviate(_PAULI["XYZ"[int(self.rng.integers(3))]], [w])
        return False


class SingleRandomWire(AdversaryPolicy):
    """Hit one uniformly chosen wire with a Pauli just before returning the result."""

    name = "single_random_wire"

    def __init__(self, pauli: str = "Y"):
        self.pauli = pauli

    def before_result(self, bob):
        bob.deviate(_PAULI[self.pauli], [int(self.rng.integers(bob.num_wires))])


POLICIES = {
    "none": AdversaryPolicy,
    "extra_gate": ExtraGate,
    "wrong_measure_report": WrongMeasureReport,
    "skip_slot": SkipSlot,
    "random_pauli": RandomPauli,
    "single_random_wire": SingleRandomWire,
}


def make_policy(name: str, **kwargs) -> AdversaryPolicy:
    try:
        return POLICIES[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None


# --- experiments ---------------------------------------------------------------

def formula_rate(N: int, N_d: int, s: int = 1) -> float:
    """Chance that s independent runs, each hitting one random wire, ever hit a trap."""
    if N <= 0:
        raise ValueError("N must be positive")
    return 1 - ((N - N_d) / N) ** s


def trapped_session(circuit: Circuit, plan: TrapPlan, policy: Optional[AdversaryPolicy],
                    seed, protocol: int = 1, compile_options: Optional[dict] = None,
                    cascade: str = "default") -> str:
    """One session with traps; a protocol violation counts as detected."""
    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    session_seed, check_seed = ss.spawn(2)
    instrumented, ledger = insert_traps(circuit, plan)
    try:
        result = run_session(instrumented, protocol, alice_seed=session_seed,
                             bob_impl=policy, inputs=ledger.inputs(), compile_options=compile_options,
                             cascade=cascade)
    except ProtocolError:
        return "Detected"
    return check_traps(result.output, ledger, np.random.default_rng(check_seed))


@dataclass(frozen=True)
class DetectionEstimate:
    N: int
    N_d: int
    s: int
    policy: str
    trials: int
    detections: int
    formula: Optional[float]

    @property
    def rate(self) -> float:
        return self.detections / self.trials

    @property
    def stderr(self) -> float:
        """Standard error of the estimate, taken at the formula value when one applies."""
        p = self.formula if self.formula is not None else self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def z(self) -> Optional[float]:
        if self.formula is None:
            return None
        if self.stderr == 0:
            return 0.0 if self.rate == self.formula else math.inf
        return (self.rate - self.formula) / self.stderr


def detection_rate(circuit: Circuit, N: int, N_d: int, s: int = 1, policy="single_random_wire",
                   trials: int = 1000, seed: int = 0, protocol: int = 1,
                   compile_options: Optional[dict] = None, cascade: str = "default") -> DetectionEstimate:
    """Fraction of trials in which any of ``s`` trapped runs raises an alarm.

    Every run draws fresh trap positions and types. Each trial has its own
    seed stream, so trials are independent and can be split across workers.
    """
    if N <= 0:
        raise ValueError("N must be positive")
    if isinstance(policy, str):
        name, policy = policy, make_policy(policy)
    else:
        name = policy.name
    detections = 0
    for trial_seed in np.random.SeedSequence(seed).spawn(trials):
        plan_seed, *run_seeds = trial_seed.spawn(1 + s)
        plan_rng = np.random.default_rng(plan_seed)
        for run_seed in run_seeds:
            plan = make_trap_plan(N, N_d, plan_rng, s)
            if trapped_session(circuit, plan, policy, run_seed, protocol, compile_options, cascade) == "Detected":
                detections += 1
                break
    formula = formula_rate(N, N_d, s) if name in ("single_random_wire", "none") else None
    if name == "none":
        formula = 0.0
    return DetectionEstimate(N, N_d, s, name, trials, detections, formula)
