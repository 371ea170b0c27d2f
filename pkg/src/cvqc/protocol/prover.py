"""Prover state machines: the honest quantum prover and cheating strategies.

A prover is driven message-by-message: `handle(msg)` consumes a decoded
verifier message and returns the reply dict (or None for VERDICT). The honest
prover simulates the eight-qubit device: it prepares the committed state for
the received labels, optionally applies single-qubit depolarizing noise to
every qubit (trajectory unraveling, so states stay pure), and answers rounds
by measuring its own memory.

Qubit labels 1..8 of the protocol map to tensor positions 0..7:
position 0/1 hold the two clock-state qubits, 2..4 the auxiliaries of qubit 1
and 5..7 the auxiliaries of qubit 2.
"""
from __future__ import annotations

import math

import numpy as np

from .. import compile as ioncompile
from .. import qsim, trapdoor
from . import messages
from .messages import ProtocolError

POS_ETA = (0, 1)
POS_COMMIT_1 = (3, 4)   # protocol qubits (4, 5)
POS_COMMIT_2 = (6, 7)   # protocol qubits (7, 8)
POS_ROUND_1 = (0, 2)    # protocol qubits (1, 3)
POS_ROUND_2 = (1, 5)    # protocol qubits (2, 6)


def preparation_gates(alpha: float, keys: tuple[int, int]):
    """Gate list preparing the committed 8-qubit state for the given labels."""
    return ioncompile.delegation_circuit(alpha, keys,
                                         measurement_round=False).gates


def prepare_state(alpha: float, keys: tuple[int, int], lam: float = 0.0,
                  rng: np.random.Generator | None = None,
                  density: bool = False) -> qsim.QuantumState:
    """The honest prover's quantum memory right before the commitment.

    With lam > 0 a depolarizing channel acts on every qubit, either exactly
    (density=True) or as one sampled trajectory (density=False, needs rng).
    """
    state = qsim.QuantumState.zero(8)
    state = qsim.apply_circuit(state, preparation_gates(alpha, keys))
    if lam > 0.0:
        if density:
            return qsim.depolarize_density(state, lam)
        for q in range(8):
            state = qsim.apply_channel(state, qsim.depolarizing(lam, q),
                                       rng=rng, trajectory=True)
    return state


def honest_claim(alpha: float, variant: str) -> str:
    """The claim a prover that ran the computation would make."""
    p = math.cos(alpha) ** 2 if variant == "P0" else math.sin(alpha) ** 2
    return "yes" if p >= 0.5 else "no"


class HonestProver:
    """Simulated quantum prover following the protocol faithfully."""

    def __init__(self, rng: np.random.Generator, lam: float = 0.0,
                 claim: str | None = None, alpha_override: float | None = None):
        self.rng = rng
        self.lam = lam
        self.claim = claim
        self.alpha_override = alpha_override
        self._reset()

    def _reset(self):
        self.alpha = None
        self.variant = None
        self.alpha_eff = None
        self.state = None

    def handle(self, msg: dict) -> dict | None:
        mtype = msg["type"]
        if mtype == "CIRCUIT":
            self._reset()
            self.alpha = msg["alpha"]
            self.variant = msg["variant"]
            claim = self.claim or honest_claim(self.alpha, self.variant)
            # a "no" claim is proven as "yes" for the modified computation
            self.alpha_eff = (self.alpha if claim == "yes"
                              else math.pi / 2 - self.alpha)
            if self.alpha_override is not None:
                self.alpha_eff = self.alpha_override
            return messages.answer_msg(claim)
        if mtype == "KEYS":
            keys = (msg["k1"], msg["k2"])
            self.state = prepare_state(self.alpha_eff, keys, self.lam, self.rng)
            y1, self.state = qsim.measure(self.state, POS_COMMIT_1, "Z", self.rng)
            y2, self.state = qsim.measure(self.state, POS_COMMIT_2, "Z", self.rng)
            return messages.commit_msg(y1, y2)
        if mtype == "ROUND":
            basis = "Z" if msg["round"] == "test" else "X"
            q13, self.state = qsim.measure(self.state, POS_ROUND_1, basis, self.rng)
            q26, self.state = qsim.measure(self.state, POS_ROUND_2, basis, self.rng)
            return messages.outcomes_msg(q13, q26)
        if mtype == "VERDICT":
            return None
        raise ProtocolError(f"prover got unexpected message {mtype!r}")


class ClassicalGuessProver:
    """No quantum state: commits random in-range strings, answers random bits.

    Keeps commitments inside the two-to-one range so it is never rejected for
    an invalid commitment; a test round catches it with probability 3/4 per
    one-to-one qubit pair.
    """

    def __init__(self, rng: np.random.Generator, claim: str | None = None):
        self.rng = rng
        self.claim = claim
        self.keys = None

    def handle(self, msg: dict) -> dict | None:
        mtype = msg["type"]
        if mtype == "CIRCUIT":
            return messages.answer_msg(
                self.claim or honest_claim(msg["alpha"], msg["variant"]))
        if mtype == "KEYS":
            self.keys = (msg["k1"], msg["k2"])
            ys = []
            for k in self.keys:
                if k == 1:
                    ys.append(list(trapdoor.VALID_RANGE_K1[int(self.rng.integers(2))]))
                else:
                    ys.append([int(self.rng.integers(2)), int(self.rng.integers(2))])
            return messages.commit_msg(*ys)
        if mtype == "ROUND":
            bits = [int(b) for b in self.rng.integers(0, 2, size=4)]
            return messages.outcomes_msg(bits[:2], bits[2:])
        if mtype == "VERDICT":
            return None
        raise ProtocolError(f"prover got unexpected message {mtype!r}")


class InconsistentProver(HonestProver):
    """Discards its memory after committing.

    Test rounds are answered with a fresh preimage of the commitment (which
    passes the consistency check by construction); measurement rounds are
    answered with uniform bits, so the decoded statistics carry no energy
    information and verification fails at the threshold.
    """

    def handle(self, msg: dict) -> dict | None:
        if msg["type"] == "KEYS":
            self.keys = (msg["k1"], msg["k2"])
            reply = super().handle(msg)
            self.commitment = (tuple(reply["y1"]), tuple(reply["y2"]))
            self.state = None
            return reply
        if msg["type"] == "ROUND":
            if msg["round"] == "test":
                outs = []
                for k, y in zip(self.keys, self.commitment):
                    pre = trapdoor.TrapdoorKeyPair.generate(k).invert(y)
                    outs.append(list(pre[int(self.rng.integers(len(pre)))]))
                return messages.outcomes_msg(*outs)
            bits = [int(b) for b in self.rng.integers(0, 2, size=4)]
            return messages.outcomes_msg(bits[:2], bits[2:])
        return super().handle(msg)


def wrong_alpha_prover(rng: np.random.Generator, alpha_wrong: float,
                       lam: float = 0.0, claim: str | None = None) -> HonestProver:
    """Honest mechanics, wrong computation: prepares the state at alpha_wrong."""
    return HonestProver(rng, lam=lam, claim=claim, alpha_override=alpha_wrong)


def build_prover(kind: str, rng: np.random.Generator, lam: float = 0.0,
                 claim: str | None = None,
                 alpha_wrong: float | None = None):
    """Factory used by the CLI: kind in {none, guess, wrong-alpha, inconsistent}."""
    if kind in ("none", "honest"):
        return HonestProver(rng, lam=lam, claim=claim)
    if kind == "guess":
        return ClassicalGuessProver(rng, claim=claim)
    if kind == "wrong-alpha":
        if alpha_wrong is None:
            raise ValueError("wrong-alpha prover needs alpha_wrong")
        return wrong_alpha_prover(rng, alpha_wrong, lam=lam, claim=claim)
    if kind == "inconsistent":
        return InconsistentProver(rng, lam=lam, claim=claim)
    raise ValueError(f"unknown prover kind {kind!r}")
