"""Quantumness interaction with a random two-to-one function on m bits.

The verifier samples a claw-free-style function F: {0,1}^m -> {0,1}^m with
claws x, x XOR s for a secret nonzero shift s. An honest quantum prover holds
sum_x |x>|F(x)> / sqrt(2^m), commits to ybar by measuring the output register,
and answers either the Z branch (a preimage of ybar; success probability p_A)
or the X branch (a string d with d . (x0 XOR x1) = 0 mod 2; success
probability p_B). A classical baseline that memorizes one preimage and
answers d = 0 achieves p_A = p_B = 1 as well: at this toy scale the
interaction does not separate classical from quantum, which the result flags.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import qsim


@dataclass(frozen=True)
class TwoToOneFunction:
    """F(x) = outputs[coset(x)] with claws {x, x XOR shift}."""

    m: int
    shift: int
    outputs: tuple[int, ...]

    def coset_index(self, x: int) -> int:
        rep = min(x, x ^ self.shift)
        return self._rep_order().index(rep)

    def _rep_order(self) -> tuple[int, ...]:
        reps = sorted({min(x, x ^ self.shift) for x in range(2 ** self.m)})
        return tuple(reps)

    def __call__(self, x: int) -> int:
        return self.outputs[self.coset_index(x)]

    def preimages(self, y: int) -> tuple[int, int]:
        try:
            idx = self.outputs.index(y)
        except ValueError:
            return ()
        rep = self._rep_order()[idx]
        return tuple(sorted((rep, rep ^ self.shift)))

    def check_two_to_one(self) -> None:
        if not 0 < self.shift < 2 ** self.m:
            raise ValueError("claw shift must be a nonzero m-bit value")
        if len(self.outputs) != 2 ** (self.m - 1):
            raise ValueError("need one output per claw pair")
        seen: dict[int, int] = {}
        for x in range(2 ** self.m):
            seen[self(x)] = seen.get(self(x), 0) + 1
        if sorted(seen.values()) != [2] * (2 ** (self.m - 1)):
            raise ValueError("function is not two-to-one")


def random_two_to_one(m: int, rng: np.random.Generator) -> TwoToOneFunction:
    if m < 1:
        raise ValueError("m must be >= 1")
    shift = int(rng.integers(1, 2 ** m))
    outputs = tuple(int(v) for v in
                    rng.permutation(2 ** m)[: 2 ** (m - 1)])
    fn = TwoToOneFunction(m, shift, outputs)
    fn.check_two_to_one()
    return fn


def _committed_distributions(fn: TwoToOneFunction, lam: float):
    """Readout distributions of the 2m-qubit state, per branch basis.

    Returns (p_z, p_x): distributions over (input register, output register)
    joint indices with the input register measured in Z or X respectively.
    """
    m = fn.m
    n = 2 * m
    vec = np.zeros(2 ** n, dtype=complex)
    for xv in range(2 ** m):
        vec[(xv << m) | fn(xv)] = 1.0
    vec /= np.linalg.norm(vec)
    state = qsim.QuantumState(n, vec=vec, check=False)
    if lam > 0:
        state = qsim.depolarize_density(state, lam)
    p_z = state.probabilities()
    for q in range(m):
        state = qsim.apply_gate(state, qsim.h(q))
    p_x = state.probabilities()
    return p_z, p_x


def quantumness_demo(m: int, trials: int, rng: np.random.Generator,
                     lam: float = 0.0) -> dict:
    """Empirical p_A and p_B for the honest quantum prover plus the baseline.

    Each branch is run `trials` times. Needs 2m <= 10 qubits.
    """
    if 2 * m > 10:
        raise ValueError("2m qubits must fit the dense simulator (m <= 5)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fn = random_two_to_one(m, rng)
    p_z, p_x = _committed_distributions(fn, lam)
    mask_out = 2 ** m - 1

    # Z branch: input readout must be a preimage of the committed ybar
    zs = rng.choice(p_z.size, size=trials, p=p_z)
    ok_a = 0
    for z in zs:
        x_hat, ybar = int(z) >> m, int(z) & mask_out
        ok_a += int(x_hat in fn.preimages(ybar))
    p_a = ok_a / trials

    # X branch: d . (x0 XOR x1) = 0 mod 2, claw known to the verifier
    xs = rng.choice(p_x.size, size=trials, p=p_x)
    ok_b = 0
    for z in xs:
        d, ybar = int(z) >> m, int(z) & mask_out
        pre = fn.preimages(ybar)
        if pre:
            claw = pre[0] ^ pre[1]
            ok_b += int(bin(d & claw).count("1") % 2 == 0)
    p_b = ok_b / trials

    err = lambda p: float(np.sqrt(max(p * (1 - p), 1e-12) / trials))
    return {
        "m_bits": m,
        "trials": trials,
        "lambda": lam,
        "honest": {"p_A": p_a, "p_A_err": err(p_a),
                   "p_B": p_b, "p_B_err": err(p_b)},
        "classical_baseline": classical_baseline(fn),
        "note": ("the toy scale does not separate classical from quantum: "
                 "a classical prover that memorizes one preimage and answers "
                 "d = 0 satisfies both branches"),
    }


def classical_baseline(fn: TwoToOneFunction) -> dict:
    """Memorize-one-preimage strategy: p_A = 1 and (with d = 0) p_B = 1."""
    x0 = 0
    ybar = fn(x0)
    p_a = 1.0 if x0 in fn.preimages(ybar) else 0.0
    claw = fn.preimages(ybar)[0] ^ fn.preimages(ybar)[1]
    p_b = 1.0 if bin(0 & claw).count("1") % 2 == 0 else 0.0
    return {"p_A": p_a, "p_B": p_b, "strategy": "memorized preimage, d=0"}
