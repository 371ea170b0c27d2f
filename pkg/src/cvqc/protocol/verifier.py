"""Verifier state machine, session runner, and prover transports.

The verifier drives one session over a channel that moves canonical JSON
lines. Three transports are provided: in-process (the prover object is called
directly, but every message still passes through encode/decode so transcripts
are byte-identical to the split-process case), a spawned subprocess speaking
the protocol on stdio, and a TCP client.

The verifier's private material (trapdoor tables, the decoded outcomes, the
effective instance) goes into a sidecar record that is never written to the
channel.
"""
from __future__ import annotations

import math
import socket
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .. import hamiltonian, trapdoor
from . import messages
from .messages import ProtocolError


class TransportError(Exception):
    """The byte stream to the prover failed."""


class InProcessChannel:
    """Drives a prover object through the same encode/decode path as the wire."""

    def __init__(self, prover):
        self.prover = prover
        self._outbox: list[str] = []

    def send(self, line: str) -> None:
        reply = self.prover.handle(messages.decode(line))
        if reply is not None:
            self._outbox.append(messages.encode(reply))

    def recv(self) -> str:
        if not self._outbox:
            raise ProtocolError("prover produced no reply")
        return self._outbox.pop(0)

    def close(self) -> None:
        pass


class SubprocessChannel:
    """Talks newline-delimited JSON to a prover subprocess on stdio."""

    def __init__(self, argv: list[str]):
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        except OSError as exc:
            raise TransportError(f"cannot spawn prover: {exc}") from exc

    def send(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"prover pipe failed: {exc}") from exc

    def recv(self) -> str:
        line = self.proc.stdout.readline()
        if not line:
            raise TransportError("prover closed the stream")
        return line.rstrip("\n")

    def close(self) -> None:
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        self.proc.wait(timeout=10)


class TcpChannel:
    """Client side of the loopback/TCP transport."""

    def __init__(self, host: str, port: int):
        try:
            self.sock = socket.create_connection((host, port), timeout=30)
        except OSError as exc:
            raise TransportError(f"cannot connect to prover: {exc}") from exc
        self.reader = self.sock.makefile("r")

    def send(self, line: str) -> None:
        try:
            self.sock.sendall((line + "\n").encode())
        except OSError as exc:
            raise TransportError(f"socket send failed: {exc}") from exc

    def recv(self) -> str:
        line = self.reader.readline()
        if not line:
            raise TransportError("prover closed the connection")
        return line.rstrip("\n")

    def close(self) -> None:
        try:
            self.reader.close()
            self.sock.close()
        except OSError:
            pass


@dataclass
class ProtocolTranscript:
    """Verifier-side record of one session."""

    keys: tuple[int, int]
    claim: str = ""
    commitment: tuple | None = None
    round: str | None = None
    raw_outcomes: dict = field(default_factory=dict)
    decoded: tuple[int, int] | None = None
    verdict: str = "continue"
    reject_reason: str | None = None

    def check_invariants(self) -> None:
        has_decoded = self.decoded is not None
        should = self.round == "measure" and self.verdict != "reject"
        if has_decoded != should:
            raise AssertionError("decoded present iff measure round and not rejected")


def choose_round(policy: str, rng: np.random.Generator) -> str:
    if policy == "force_test":
        return "test"
    if policy == "force_measure":
        return "measure"
    if policy == "auto":
        return "test" if rng.integers(2) == 0 else "measure"
    raise ValueError(f"unknown round policy {policy!r}")


def run_session(problem: hamiltonian.DecisionProblem, keys: tuple[int, int],
                channel, rng: np.random.Generator, round_policy: str = "auto",
                transcript: messages.Transcript | None = None,
                ) -> tuple[ProtocolTranscript, dict]:
    """Run one interactive session as the verifier.

    Returns the verifier-side transcript record plus the private sidecar
    (trapdoor material and decoded data; never sent).
    """
    wire = transcript if transcript is not None else messages.Transcript()

    def send(msg: dict) -> None:
        line = messages.encode(msg)
        wire.record(line)
        channel.send(line)

    def recv(expected: str) -> dict:
        line = channel.recv()
        wire.record(line)
        msg = messages.decode(line)
        if msg["type"] != expected:
            raise ProtocolError(f"expected {expected}, got {msg['type']}")
        return msg

    k1, k2 = keys
    key1 = trapdoor.TrapdoorKeyPair.generate(k1)
    key2 = trapdoor.TrapdoorKeyPair.generate(k2)
    rec = ProtocolTranscript(keys=keys)
    sidecar = {"keys": [{"k": key1.k, "trapdoor_preimages":
                         {f"{y[0]}{y[1]}": list(map(list, key1.invert(y)))
                          for y in [(0, 0), (0, 1), (1, 0), (1, 1)]}},
                        {"k": key2.k, "trapdoor_preimages":
                         {f"{y[0]}{y[1]}": list(map(list, key2.invert(y)))
                          for y in [(0, 0), (0, 1), (1, 0), (1, 1)]}}],
               "problem": {"alpha": problem.alpha, "variant": problem.variant}}

    send(messages.circuit_msg(problem.alpha, problem.variant))
    rec.claim = recv("ANSWER")["claim"]
    effective = problem if rec.claim == "yes" else hamiltonian.reduce_no_claim(problem)
    sidecar["alpha_effective"] = effective.alpha

    send(messages.keys_msg(k1, k2))
    commit = recv("COMMIT")
    y1, y2 = tuple(commit["y1"]), tuple(commit["y2"])
    rec.commitment = (y1, y2)

    if not (key1.commitment_valid(y1) and key2.commitment_valid(y2)):
        rec.verdict, rec.reject_reason = "reject", "invalid_commitment"
        send(messages.verdict_msg("reject", "invalid_commitment"))
        rec.check_invariants()
        return rec, sidecar

    rec.round = choose_round(round_policy, rng)
    send(messages.round_msg(rec.round))
    outcomes = recv("OUTCOMES")
    q13, q26 = outcomes["q13"], outcomes["q26"]
    rec.raw_outcomes = {"q13": tuple(q13), "q26": tuple(q26)}

    if rec.round == "test":
        ok1 = trapdoor.eval_fn(k1, q13[0], q13[1]) == y1
        ok2 = trapdoor.eval_fn(k2, q26[0], q26[1]) == y2
        if ok1 and ok2:
            rec.verdict = "accept"
            send(messages.verdict_msg("accept"))
        else:
            rec.verdict, rec.reject_reason = "reject", "test_mismatch"
            send(messages.verdict_msg("reject", "test_mismatch"))
    else:
        m1 = key1.decode(y1, q13[0], q13[1])
        m2 = key2.decode(y2, q26[0], q26[1])
        rec.decoded = (m1, m2)
        sidecar["decoded"] = [m1, m2]
        rec.verdict = "continue"
        send(messages.verdict_msg("continue"))

    rec.check_invariants()
    return rec, sidecar


def serve_prover(prover, reader, writer) -> None:
    """Run the prover side of the wire protocol over text streams.

    Handles any number of sequential sessions until the stream closes.
    """
    for line in reader:
        line = line.strip()
        if not line:
            continue
        reply = prover.handle(messages.decode(line))
        if reply is not None:
            writer.write(messages.encode(reply) + "\n")
            writer.flush()


def honest_test_accepts(problem: hamiltonian.DecisionProblem,
                        keys: tuple[int, int]) -> float:
    """Analytic probability that an ideal honest prover passes a test round.

    The committed state is supported exactly on strings with
    y_k(b_i, x_i) = ybar_i, so this is 1 for every key pair and angle.
    """
    from . import estimation

    probs = estimation.round_distribution(problem.alpha, keys, 0.0, "test")
    reject = estimation.test_reject_probability(probs, keys)
    return 1.0 - reject
