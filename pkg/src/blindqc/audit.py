"""What the server learns: its quantum view and the law of its transcript.

The quantum view is the density matrix of every qubit Bob receives,
averaged exhaustively over Alice's one-time-pad keys. The classical view
is the transcript; each bit in it is audited through the exact probability
the simulator assigned to it, with a Monte-Carlo comparison on top.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .compiler import Circuit, CompiledCircuit, LeakageDescriptor, compile_circuit
from .engine import run_session
from .frame import pauli_word
from .simcore import ALGEBRA_TOL, prepare_a_state

SECRET_BIT_BUDGET = 20
LAW_TOL = 1e-12
TV_THRESHOLD = 0.05
_ZERO = np.array([1, 0], dtype=complex)


class AuditError(ValueError):
    pass


def leakage_of(compiled: CompiledCircuit) -> LeakageDescriptor:
    return compiled.leakage


# --- quantum view ------------------------------------------------------------

def qotp_mixture(states, encrypt: bool = True, chunk: int = 4096) -> np.ndarray:
    """Average of |psi_k><psi_k| over every joint key assignment ``k``.

    ``states`` are single-qubit amplitude pairs; each gets an independent
    X^a Z^b. With ``encrypt=False`` only the all-zero key is used.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    q = len(states)
    if 2 * q > SECRET_BIT_BUDGET:
        raise AuditError(f"{2 * q} secret bits exceed the enumeration budget of {SECRET_BIT_BUDGET}")
    keys = [(0, 0)] if not encrypt else [(a, b) for a in (0, 1) for b in (0, 1)]
    per_qubit = [np.stack([pauli_word(a, b) @ s for a, b in keys], axis=1) for s in states]
    dim = 2**q
    rho = np.zeros((dim, dim), dtype=complex)
    combos = itertools.product(range(len(keys)), repeat=q)
    count = 0
    while True:
        batch = list(itertools.islice(combos, chunk))
        if not batch:
            break
        cols = np.ones((len(batch), 1), dtype=complex)
        idx = np.array(batch)
        for i, m in enumerate(per_qubit):
            cols = (cols[:, :, None] * m.T[idx[:, i]][:, None, :]).reshape(len(batch), -1)
        rho += cols.T @ cols.conj()
        count += len(batch)
    return rho / count


def maximally_mixed_deviation(rho: np.ndarray) -> float:
    return float(np.max(np.abs(rho - np.eye(len(rho)) / len(rho))))


@dataclass
class BobView:
    density: np.ndarray
    num_qubits: int
    deviation: float

    @property
    def maximally_mixed(self) -> bool:
        return self.deviation <= ALGEBRA_TOL


def received_states(circuit: Circuit, protocol: int, seed: int = 0, inputs=None,
                    compile_options: Optional[dict] = None):
    """Unencrypted states of everything Alice sends: data wires, then ancilla pairs."""
    compiled = compile_circuit(circuit, protocol, np.random.default_rng(seed), **(compile_options or {}))
    states = [np.asarray(v, dtype=complex) for v in (inputs or [_ZERO] * compiled.num_wires)]
    for t in compiled.teleports:
        states.append(prepare_a_state(t.angle).amplitudes)
        states.append(prepare_a_state(t.angle.doubled()).amplitudes)
    return states


def bob_quantum_view(circuit: Circuit, protocol: int, seed: int = 0, inputs=None,
                     encrypt: bool = True, compile_options: Optional[dict] = None,
                     window: Optional[int] = None) -> BobView:
    """Bob's joint state at receipt, averaged over all of Alice's pad keys.

    ``window`` keeps only the first that many received qubits, for circuits
    whose full key space is beyond the enumeration budget.
    """
    states = received_states(circuit, protocol, seed, inputs, compile_options)
    if window is not None:
        states = states[:window]
    rho = qotp_mixture(states, encrypt)
    return BobView(rho, len(states), maximally_mixed_deviation(rho))


# --- classical view ------------------------------------------------------------

def session_laws(result) -> list:
    """Exact P(bit = 1 | everything before it) for every bit in the transcript."""
    return [p for p in result.bob.report_laws] + [p for _, _, p in result.alice.laws]


def _tv(p: dict, q: dict) -> float:
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


def transcript_tv(bits_a: list, bits_b: list, joint: int = 3) -> float:
    """Largest total-variation distance over single positions and the first ``joint`` bits."""
    worst = 0.0
    length = min(min(map(len, bits_a)), min(map(len, bits_b)))
    for pos in range(length):
        pa = np.mean([b[pos] for b in bits_a])
        pb = np.mean([b[pos] for b in bits_b])
        worst = max(worst, abs(pa - pb))
    k = min(joint, length)
    if k:
        ca = Counter(tuple(b[:k]) for b in bits_a)
        cb = Counter(tuple(b[:k]) for b in bits_b)
        worst = max(worst, _tv({v: c / len(bits_a) for v, c in ca.items()},
                               {v: c / len(bits_b) for v, c in cb.items()}))
    return float(worst)


@dataclass
class IndependenceReport:
    protocol: int
    status: str
    leakage_a: LeakageDescriptor
    leakage_b: LeakageDescriptor
    shapes_identical: bool = False
    max_law_deviation: float = 0.0
    exact_identical: bool = False
    tv: Optional[float] = None
    sessions: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["leakage_a"] = asdict(self.leakage_a)
        out["leakage_b"] = asdict(self.leakage_b)
        return out


def _collect(circuit, protocol, seeds, compile_options, cascade):
    laws, bits = [], []
    for seed in seeds:
        r = run_session(circuit, protocol, alice_seed=seed, compile_options=compile_options, cascade=cascade)
        laws.extend(session_laws(r))
        bits.append(r.transcript.bits())
    return laws, bits


def transcript_independence(circuit_a: Circuit, circuit_b: Circuit, protocol: int,
                            exact_sessions: int = 32, mc_sessions: int = 0, seed: int = 0,
                            compile_options: Optional[dict] = None,
                            cascade: str = "default") -> IndependenceReport:
    """Compare what Bob sees when Alice runs ``circuit_a`` versus ``circuit_b``.

    The exact part checks that both announced structures are byte-identical
    and that every transcript bit in ``exact_sessions`` sessions of each had
    conditional probability exactly 1/2; together these fix the transcript
    law. ``mc_sessions`` adds an empirical total-variation comparison.
    """
    opts = compile_options or {}
    comp_a = compile_circuit(circuit_a, protocol, np.random.default_rng(seed), **opts)
    comp_b = compile_circuit(circuit_b, protocol, np.random.default_rng(seed + 1), **opts)
    report = IndependenceReport(protocol, "PASS", comp_a.leakage, comp_b.leakage)
    if comp_a.leakage != comp_b.leakage:
        report.status = "PRECONDITION"
        report.notes.append("leakage descriptors differ; Bob may tell these circuits apart by design")
        return report
    report.shapes_identical = comp_a.shape() == comp_b.shape()
    seeds = np.random.SeedSequence(seed).generate_state(2 * exact_sessions + 2 * mc_sessions).tolist()
    laws_a, _ = _collect(circuit_a, protocol, seeds[:exact_sessions], opts, cascade)
    laws_b, _ = _collect(circuit_b, protocol, seeds[exact_sessions:2 * exact_sessions], opts, cascade)
    deviation = max((abs(p - 0.5) for p in laws_a + laws_b), default=0.0)
    report.max_law_deviation = float(deviation)
    report.exact_identical = report.shapes_identical and deviation <= LAW_TOL
    if mc_sessions:
        rest = seeds[2 * exact_sessions:]
        _, bits_a = _collect(circuit_a, protocol, rest[:mc_sessions], opts, cascade)
        _, bits_b = _collect(circuit_b, protocol, rest[mc_sessions:], opts, cascade)
        report.tv = transcript_tv(bits_a, bits_b)
        report.sessions = mc_sessions
    ok = report.exact_identical and (report.tv is None or report.tv < TV_THRESHOLD)
    report.status = "PASS" if ok else "FAIL"
    return report
