"""Command-line front end: ``blindqc run | serve | audit | verify | axes``.

Circuit files are line oriented::

    # comments start with '#'
    wires 3          # optional; otherwise the highest wire index + 1
    H 0
    T 1
    A 3 2            # A(3 pi/4) on wire 2: angle first, then the wire
    CNOT 0 1         # control, target

Exit codes: 0 success, 1 a check failed, 2 bad input (parse or compile),
3 protocol violation, 4 transport failure. ``BQC_SEED`` sets the default
seed for every party.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audit import bob_quantum_view, transcript_independence
from .compiler import Circuit, CompileError, axis_alignment, axis_table
from .engine import (
    Alice,
    Bob,
    ProtocolError,
    Transcript,
    TransportError,
    connect_alice,
    run_session,
    serve_bob,
    session_rngs,
)
from .simcore import GateId, PureState, SimulationError, apply_all, fidelity_up_to_phase, new_state
from .verify import POLICIES, detection_rate, make_policy

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_PROTOCOL, EXIT_TRANSPORT = 0, 1, 2, 3, 4
_ARITY = {"X": 1, "Z": 1, "H": 1, "S": 1, "T": 1, "A": 2, "CNOT": 2}


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_circuit(text: str) -> Circuit:
    declared = None
    gates = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        try:
            values = [int(a) for a in args]
        except ValueError:
            raise ParseError(number, f"non-integer argument in {line!r}") from None
        if any(v < 0 for v in values):
            raise ParseError(number, f"negative argument in {line!r}")
        if head.lower() == "wires":
            if len(values) != 1 or values[0] < 1 or declared is not None or gates:
                raise ParseError(number, "'wires N' must come once, first, with N >= 1")
            declared = values[0]
            continue
        kind = head.upper()
        if kind not in _ARITY:
            raise ParseError(number, f"unknown gate {head!r}")
        if len(values) != _ARITY[kind]:
            raise ParseError(number, f"{kind} takes {_ARITY[kind]} arguments, got {len(values)}")
        try:
            if kind == "T":
                g = GateId("A", (values[0],), 1)
            elif kind == "A":
                g = GateId("A", (values[1],), values[0])
            else:
                g = GateId(kind, tuple(values))
        except SimulationError as exc:
            raise ParseError(number, str(exc)) from None
        if declared is not None and max(g.wires) >= declared:
            raise ParseError(number, f"wire {max(g.wires)} beyond the declared {declared}")
        gates.append(g)
    width = declared or (max(max(g.wires) for g in gates) + 1 if gates else 1)
    return Circuit(width, gates)


def format_circuit(circuit: Circuit) -> str:
    lines = [f"wires {circuit.num_wires}"]
    for g in circuit.instructions:
        if g.kind == "A":
            lines.append(f"A {int(g.angle)} {g.wires[0]}")
        else:
            lines.append(" ".join([g.kind, *map(str, g.wires)]))
    return "\n".join(lines) + "\n"


def load_circuit(path: str) -> Circuit:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_circuit(fh.read())
    except OSError as exc:
        raise ParseError(0, f"cannot read {path}: {exc}") from None


@dataclass
class Config:
    protocol: int = 1
    seed_alice: int = 0
    seed_bob: Optional[int] = None
    seed_adversary: Optional[int] = None
    mode: str = "in_process"
    host: str = "127.0.0.1"
    port: Optional[int] = None
    max_wires: int = 12
    max_columns: int = 64
    cascade: str = "default"
    uniform: bool = False
    min_columns: int = 0

    def compile_options(self) -> dict:
        if self.protocol == 1:
            return {"uniform": self.uniform, "max_wires": self.max_wires}
        return {"min_columns": self.min_columns, "max_wires": self.max_wires, "max_columns": self.max_columns}


def _default_seed() -> int:
    try:
        return int(os.environ.get("BQC_SEED", "0"))
    except ValueError:
        return 0


def _config(args) -> Config:
    seed = _default_seed()
    return Config(
        protocol=args.protocol,
        seed_alice=seed if args.seed_alice is None else args.seed_alice,
        seed_bob=getattr(args, "seed_bob", None),
        mode=getattr(args, "mode", "in_process"),
        host=getattr(args, "host", "127.0.0.1"),
        port=getattr(args, "port", None),
        max_wires=args.max_wires,
        cascade=getattr(args, "cascade", "default"),
        uniform=getattr(args, "uniform", False),
        min_columns=getattr(args, "min_columns", 0),
    )


# --- commands ------------------------------------------------------------------

def _direct(circuit: Circuit) -> PureState:
    return apply_all(new_state(circuit.num_wires), circuit.instructions)


def _remote_session(circuit: Circuit, cfg: Config):
    rng_a, _, _ = session_rngs(cfg.seed_alice)
    alice = Alice(circuit, cfg.protocol, rng_a, cascade=cfg.cascade, compile_options=cfg.compile_options())
    transcript = Transcript()
    connect_alice(alice, cfg.host, cfg.port, transcript)
    return alice.output, transcript, alice


def cmd_run(cfg: Config, circuit: Circuit, out=sys.stdout) -> int:
    if cfg.mode == "socket" and cfg.port is not None:
        output, transcript, alice = _remote_session(circuit, cfg)
    else:
        result = run_session(circuit, cfg.protocol, cfg.seed_alice, bob_seed=cfg.seed_bob,
                             transport="socket" if cfg.mode == "socket" else "in_process",
                             cascade=cfg.cascade, compile_options=cfg.compile_options())
        output, transcript, alice = result.output, result.transcript, result.alice
    fidelity = fidelity_up_to_phase(output, _direct(circuit))
    probs = np.abs(output.amplitudes) ** 2
    n = output.num_wires
    digest = hashlib.sha256("\n".join(transcript.lines()).encode()).hexdigest()
    bits = transcript.bits()
    print(f"protocol: {cfg.protocol}", file=out)
    print(f"wires: {n}", file=out)
    print(f"gates: {len(circuit)}", file=out)
    print(f"teleport slots: {len(alice.compiled.teleports)}", file=out)
    print(f"transcript messages: {len(transcript)}", file=out)
    print(f"transcript bits: {len(bits)} (ones: {sum(bits)})", file=out)
    print(f"transcript sha256: {digest}", file=out)
    print(f"fidelity vs direct simulation: {fidelity:.12f}", file=out)
    print("outcome probabilities:", file=out)
    for index in np.flatnonzero(probs > 1e-12):
        print(f"  {index:0{n}b} {probs[index]:.9f}", file=out)
    return EXIT_OK if fidelity >= 1 - 1e-9 else EXIT_FAIL


def cmd_serve(cfg: Config, out=sys.stdout) -> int:
    seed = cfg.seed_bob if cfg.seed_bob is not None else _default_seed()
    bob = Bob(np.random.default_rng(seed))
    port = cfg.port if cfg.port is not None else 0
    serve_bob(bob, cfg.host, port,
              on_ready=lambda bound: print(f"serving one session on {cfg.host}:{bound}", file=out, flush=True))
    print(f"session done: {len(bob.executed)} operations", file=out)
    return EXIT_OK


def cmd_audit(cfg: Config, circuits: list, encrypt: bool = True, mc_sessions: int = 0,
              window: Optional[int] = None, out=sys.stdout) -> int:
    report = {"protocol": cfg.protocol}
    view = bob_quantum_view(circuits[0], cfg.protocol, seed=cfg.seed_alice, encrypt=encrypt,
                            compile_options=cfg.compile_options(), window=window)
    report["mixedness"] = {
        "status": "PASS" if view.maximally_mixed else "FAIL",
        "qubits": view.num_qubits,
        "max_deviation_from_I": view.deviation,
        "encrypted": encrypt,
    }
    ok = view.maximally_mixed
    if len(circuits) == 2:
        ind = transcript_independence(circuits[0], circuits[1], cfg.protocol, mc_sessions=mc_sessions,
                                      seed=cfg.seed_alice, compile_options=cfg.compile_options(),
                                      cascade=cfg.cascade)
        report["independence"] = ind.to_dict()
        ok = ok and ind.status != "FAIL"
    print(json.dumps(report, indent=2, sort_keys=True, default=str), file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(cfg: Config, circuit: Circuit, N: int, N_d: int, s: int, policy: str,
               trials: int, out=sys.stdout) -> int:
    if policy not in POLICIES:
        raise ParseError(0, f"unknown policy {policy!r}; choose from {sorted(POLICIES)}")
    est = detection_rate(circuit, N, N_d, s, make_policy(policy), trials, seed=cfg.seed_alice,
                         protocol=cfg.protocol, compile_options=cfg.compile_options(), cascade=cfg.cascade)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "N_d", "s", "policy", "trials", "detections", "rate", "formula", "stderr", "z"])
    z = est.z
    writer.writerow([N, N_d, s, policy, trials, est.detections, f"{est.rate:.6f}",
                     "" if est.formula is None else f"{est.formula:.6f}", f"{est.stderr:.6f}",
                     "" if z is None else f"{z:.3f}"])
    out.write(buf.getvalue())
    return EXIT_OK if z is None or abs(z) <= 3 else EXIT_FAIL


def cmd_axes(out=sys.stdout) -> int:
    names = {"T": "T", "T3": "T3", "T3dg": "T3dg", "Tdg": "Tdg", "H": "H"}
    ok = True
    print(f"{'word':<18} {'computed axis':<34} {'printed direction':<34} |cos|    sign", file=out)
    for row in axis_table():
        word = "".join(names[t] for t in row["word"])
        axis = "(" + ", ".join(f"{v:+.6f}" for v in row["axis"]) + ")"
        printed = np.asarray(row["printed"]) / np.linalg.norm(row["printed"])
        shown = "(" + ", ".join(f"{v:+.6f}" for v in printed) + ")"
        match = abs(row["match"] - 1) <= 1e-9
        ok = ok and match
        print(f"{word:<18} {axis:<34} {shown:<34} {row['match']:.9f} {row['sign']:+d} "
              f"{'match' if match else 'MISMATCH'}", file=out)
    a = axis_alignment(("Tdg", "H", "Tdg", "H"), ("H", "T", "H", "T"))
    b = axis_alignment(("Tdg", "H", "Tdg", "H"), ("T", "H", "T", "H"))
    print(f"TdgHTdgH vs HTHT: cos = {a:+.12f} ({'antiparallel' if a < 0 else 'parallel'})", file=out)
    print(f"TdgHTdgH vs THTH: cos = {b:+.12f}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


# --- argument parsing ------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", type=int, choices=(1, 2), default=1)
    p.add_argument("--seed-alice", type=int, default=None)
    p.add_argument("--max-wires", type=int, default=12)
    p.add_argument("--cascade", choices=("default", "faithful"), default="default")
    p.add_argument("--uniform", action="store_true", help="protocol 1: hide H positions too")
    p.add_argument("--min-columns", type=int, default=0, help="protocol 2: pad to at least this many columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindqc", description="Blind delegated quantum computation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one session and report the decrypted output")
    _common(run)
    run.add_argument("circuit")
    run.add_argument("--seed-bob", type=int, default=None)
    run.add_argument("--mode", choices=("in_process", "socket"), default="in_process")
    run.add_argument("--host", default="127.0.0.1")
    run.add_argument("--port", type=int, default=None, help="connect to a running 'serve'")

    serve = sub.add_parser("serve", help="act as the server for one socket session")
    _common(serve)
    serve.add_argument("--seed-bob", type=int, default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)

    audit = sub.add_parser("audit", help="blindness audits for one circuit or a pair")
    _common(audit)
    audit.add_argument("circuits", nargs="+")
    audit.add_argument("--no-encrypt", action="store_true", help="diagnostic: switch the one-time pad off")
    audit.add_argument("--mc-sessions", type=int, default=0)
    audit.add_argument("--window", type=int, default=None, help="audit only the first K received qubits")

    verify = sub.add_parser("verify", help="trap detection-rate experiment (CSV)")
    _common(verify)
    verify.add_argument("circuit")
    verify.add_argument("--N", type=int, required=True, dest="N")
    verify.add_argument("--N-d", "--Nd", type=int, required=True, dest="N_d")
    verify.add_argument("-s", type=int, default=1)
    verify.add_argument("--policy", default="single_random_wire")
    verify.add_argument("--trials", type=int, default=1000)

    sub.add_parser("axes", help="print the T-like word rotation axes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "axes":
            return cmd_axes()
        cfg = _config(args)
        if args.command == "run":
            return cmd_run(cfg, load_circuit(args.circuit))
        if args.command == "serve":
            return cmd_serve(cfg)
        if args.command == "audit":
            if len(args.circuits) > 2:
                raise ParseError(0, "audit takes one circuit or a pair")
            return cmd_audit(cfg, [load_circuit(p) for p in args.circuits], encrypt=not args.no_encrypt,
                             mc_sessions=args.mc_sessions, window=args.window)
        if args.command == "verify":
            return cmd_verify(cfg, load_circuit(args.circuit), args.N, args.N_d, args.s, args.policy, args.trials)
    except (ParseError, CompileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ProtocolError as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except TransportError as exc:
        print(f"transport failure: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    parser.error(f"unknown command {args.command}")
    return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
