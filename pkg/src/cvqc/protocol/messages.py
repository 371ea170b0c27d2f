"""Wire protocol: newline-delimited JSON messages and transcript files.

One session is the exchange

    V->P  CIRCUIT   {"type":"CIRCUIT","alpha":f,"variant":"P0"|"P1"}
    P->V  ANSWER    {"type":"ANSWER","claim":"yes"|"no"}
    V->P  KEYS      {"type":"KEYS","k1":0|1,"k2":0|1}
    P->V  COMMIT    {"type":"COMMIT","y1":[b,b],"y2":[b,b]}
    V->P  ROUND     {"type":"ROUND","round":"test"|"measure"}
    P->V  OUTCOMES  {"type":"OUTCOMES","q13":[b,b],"q26":[b,b]}
    V->P  VERDICT   {"type":"VERDICT","verdict":...,"reason":str|null}

(an invalid commitment short-circuits to VERDICT directly after COMMIT).
Field order is irrelevant; unknown fields are rejected. Encoding is canonical
(sorted keys, no spaces) so equal message sequences are byte-identical.

Key material never crosses the wire: `encode` only accepts plain JSON types
and additionally refuses any object carrying key/trapdoor attributes.
"""
from __future__ import annotations

import json
from typing import Any

_BIT = (0, 1)


class ProtocolError(Exception):
    """Malformed or out-of-order wire traffic."""


def _is_bit(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v in _BIT


def _is_bitpair(v) -> bool:
    return isinstance(v, list) and len(v) == 2 and all(_is_bit(b) for b in v)


_SCHEMAS: dict[str, dict[str, Any]] = {
    "CIRCUIT": {
        "alpha": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "variant": lambda v: v in ("P0", "P1"),
    },
    "ANSWER": {"claim": lambda v: v in ("yes", "no")},
    "KEYS": {"k1": _is_bit, "k2": _is_bit},
    "COMMIT": {"y1": _is_bitpair, "y2": _is_bitpair},
    "ROUND": {"round": lambda v: v in ("test", "measure")},
    "OUTCOMES": {"q13": _is_bitpair, "q26": _is_bitpair},
    "VERDICT": {
        "verdict": lambda v: v in ("accept", "reject", "continue"),
        "reason": lambda v: v is None or isinstance(v, str),
    },
}

_PLAIN = (str, int, float, bool, type(None))


def _assert_plain(obj) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            if not isinstance(k, str):
                raise ProtocolError("non-string key in message")
            _assert_plain(v)
    elif isinstance(obj, list):
        for v in obj:
            _assert_plain(v)
    elif not isinstance(obj, _PLAIN):
        raise ProtocolError(
            f"refusing to serialize {type(obj).__name__}; wire messages carry "
            "plain JSON only (key material stays local)")


def validate(msg: dict) -> dict:
    if not isinstance(msg, dict):
        raise ProtocolError("message is not an object")
    mtype = msg.get("type")
    if mtype not in _SCHEMAS:
        raise ProtocolError(f"unknown message type {mtype!r}")
    schema = _SCHEMAS[mtype]
    fields = set(msg) - {"type"}
    if fields != set(schema):
        raise ProtocolError(
            f"{mtype}: expected fields {sorted(schema)}, got {sorted(fields)}")
    for name, check in schema.items():
        if not check(msg[name]):
            raise ProtocolError(f"{mtype}: bad value for {name!r}: {msg[name]!r}")
    return msg


def encode(msg: dict) -> str:
    _assert_plain(msg)
    validate(msg)
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


def decode(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"bad JSON on the wire: {exc}") from exc
    return validate(obj)


def circuit_msg(alpha: float, variant: str) -> dict:
    return {"type": "CIRCUIT", "alpha": float(alpha), "variant": variant}


def answer_msg(claim: str) -> dict:
    return {"type": "ANSWER", "claim": claim}


def keys_msg(k1: int, k2: int) -> dict:
    return {"type": "KEYS", "k1": k1, "k2": k2}


def commit_msg(y1, y2) -> dict:
    return {"type": "COMMIT", "y1": [int(b) for b in y1], "y2": [int(b) for b in y2]}


def round_msg(round_type: str) -> dict:
    return {"type": "ROUND", "round": round_type}


def outcomes_msg(q13, q26) -> dict:
    return {"type": "OUTCOMES", "q13": [int(b) for b in q13],
            "q26": [int(b) for b in q26]}


def verdict_msg(verdict: str, reason: str | None = None) -> dict:
    return {"type": "VERDICT", "verdict": verdict, "reason": reason}


class Transcript:
    """Ordered record of every message of one or more sessions."""

    def __init__(self):
        self.lines: list[str] = []

    def record(self, line: str) -> None:
        self.lines.append(line)

    def messages(self) -> list[dict]:
        return [decode(line) for line in self.lines]

    def to_json(self) -> str:
        return json.dumps([json.loads(line) for line in self.lines],
                          sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path) as fh:
            data = json.load(fh)
        t = cls()
        for msg in data:
            t.record(encode(msg))
        return t
