"""Protocol messages and their JSON-lines encoding."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

MESSAGE_TYPES = (
    "QubitTransfer",
    "CircuitAnnounce",
    "MeasuredBit",
    "CorrectionDecision",
    "ApplyZ",
    "ResultTransfer",
    "Done",
)

# fields each message type must carry; nothing else is accepted
REQUIRED = {
    "QubitTransfer": ("wire", "amp"),
    "CircuitAnnounce": ("circuit",),
    "MeasuredBit": ("slot", "bit"),
    "CorrectionDecision": ("slot", "bit"),
    "ApplyZ": ("wire",),
    "ResultTransfer": ("wire", "amp"),
    "Done": (),
}
FIELDS = ("slot", "bit", "wire", "amp", "circuit")
NORM_TOL = 1e-9


class WireError(ValueError):
    """A frame that does not decode to a valid message."""


@dataclass(frozen=True)
class Message:
    type: str
    slot: Optional[int] = None
    bit: Optional[int] = None
    wire: Any = None
    amp: Optional[tuple] = None
    circuit: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"type": self.type}
        for name in FIELDS:
            value = getattr(self, name)
            if value is not None:
                out[name] = list(value) if name == "amp" else value
        return out


def qubit_transfer(label: str, amplitudes) -> Message:
    return Message("QubitTransfer", wire=label, amp=complex_to_floats(amplitudes))


def result_transfer(labels, amplitudes) -> Message:
    return Message("ResultTransfer", wire=list(labels), amp=complex_to_floats(amplitudes))


def complex_to_floats(amplitudes) -> tuple:
    return tuple(np.asarray(amplitudes, dtype=complex).view(float).tolist())


def floats_to_complex(values) -> list:
    return [complex(values[i], values[i + 1]) for i in range(0, len(values), 2)]


def _bit(value, name):
    if type(value) is not int or value not in (0, 1):
        raise WireError(f"{name} must be 0 or 1, got {value!r}")
    return value


def _amplitudes(values, count):
    if not isinstance(values, (list, tuple)) or len(values) != 2 * count:
        raise WireError(f"expected {2 * count} amplitude doubles")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in values):
        raise WireError("amplitudes must be finite numbers")
    norm = sum(float(v) * float(v) for v in values)
    if abs(norm - 1.0) > NORM_TOL:
        raise WireError(f"amplitudes not normalized (|amp|^2 = {norm!r})")
    return tuple(float(v) for v in values)


def validate(msg: Message) -> Message:
    if msg.type not in MESSAGE_TYPES:
        raise WireError(f"unknown message type {msg.type!r}")
    required = REQUIRED[msg.type]
    for name in FIELDS:
        present = getattr(msg, name) is not None
        if present != (name in required):
            raise WireError(f"{msg.type} {'lacks' if not present else 'must not carry'} field {name!r}")
    if msg.slot is not None and (type(msg.slot) is not int or msg.slot < 0):
        raise WireError(f"slot must be a non-negative integer, got {msg.slot!r}")
    if msg.bit is not None:
        _bit(msg.bit, "bit")
    if msg.type == "QubitTransfer":
        if not isinstance(msg.wire, str) or not msg.wire:
            raise WireError("QubitTransfer wire must be a label")
        _amplitudes(msg.amp, 2)
    elif msg.type == "ApplyZ":
        if type(msg.wire) is not int or msg.wire < 0:
            raise WireError("ApplyZ wire must be a wire index")
    elif msg.type == "ResultTransfer":
        if not isinstance(msg.wire, list) or not all(isinstance(w, str) for w in msg.wire):
            raise WireError("ResultTransfer wire must be a list of labels")
        _amplitudes(msg.amp, 2 ** len(msg.wire))
    elif msg.type == "CircuitAnnounce" and not isinstance(msg.circuit, dict):
        raise WireError("CircuitAnnounce circuit must be an object")
    return msg


def encode(msg: Message) -> str:
    validate(msg)
    return json.dumps(msg.to_dict(), separators=(",", ":"), allow_nan=False)


def decode(line: str) -> Message:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(f"not JSON: {exc}") from None
    if not isinstance(obj, dict) or "type" not in obj:
        raise WireError("frame must be an object with a type")
    unknown = set(obj) - {"type", *FIELDS}
    if unknown:
        raise WireError(f"unknown fields {sorted(unknown)}")
    amp = obj.get("amp")
    msg = Message(
        obj["type"],
        slot=obj.get("slot"),
        bit=obj.get("bit"),
        wire=obj.get("wire"),
        amp=tuple(amp) if isinstance(amp, list) else amp,
        circuit=obj.get("circuit"),
    )
    return validate(msg)
