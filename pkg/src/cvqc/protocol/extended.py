"""Extended verification run: term sampling, the r estimator, and thresholds.

The Hamiltonian H = sum_l c_l P(l) is rescaled to H' = (1 + H/c)/2 with
c = sum |c_l| over the canonical merged term list. The verifier samples terms
with probability |c_l|/c, delegates a session in the induced basis (fair coin
between test and measurement round), and converts each measurement round into
a bit r(l): with s(l) = sign(c_l) and m(l) the measured eigenvalue of P(l)
(+1 for identity factors), r(l) = 1 iff m(l) = s(l). Then E[r] = <H'> and the
run accepts iff r_est <= T0 = (1 + 0.4/c)/2; a correct "no" instance forces
r_est >= T1 = (1 + 0.5/c)/2.

Per-term repetition is odd by default (1) so majority votes cannot tie; an
even count resolves ties pessimistically to r(l) = 0.

The accept-probability diagnostic assembles
    P_accept = 1/2 sum_h v_h (1 - p_t_h) + 1/2 sum_h v_h (1 - p_m_h) Pr_h(r_est < T0)
from the per-basis weights v_h, the single-copy rejection rates, and a
bootstrap estimate of Pr_h(r_est < T0) over that basis's r samples. The
binding accept/reject decision is the overall r_est <= T0 comparison.

Two execution paths share the decode arithmetic: a fast vectorized path
sampling the per-basis readout distributions (default), and a wire path
driving a prover channel session by session (used with external provers).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import hamiltonian, trapdoor
from . import estimation, messages, verifier
from .estimation import SessionConfig

BOOTSTRAP = 1000


@dataclass
class ExtendedRunStats:
    """Everything measured by one extended verification run."""

    c: float
    t0: float
    t1: float
    r_est: float
    accept: bool
    n_terms: int
    n_measure: int
    n_test: int
    term_weights: dict = field(default_factory=dict)
    basis_weights: dict = field(default_factory=dict)
    p_test_reject: dict = field(default_factory=dict)
    p_measure_reject: dict = field(default_factory=dict)
    prob_below_t0: dict = field(default_factory=dict)
    p_accept: float = 0.0
    transcript: messages.Transcript | None = None

    def as_dict(self) -> dict:
        return {
            "c": self.c, "T0": self.t0, "T1": self.t1,
            "r_est": self.r_est,
            "verdict": "accept" if self.accept else "reject",
            "n_terms": self.n_terms,
            "n_measure_rounds": self.n_measure,
            "n_test_rounds": self.n_test,
            "basis_weights": dict(self.basis_weights),
            "p_test_reject": dict(self.p_test_reject),
            "p_measure_reject": dict(self.p_measure_reject),
            "prob_below_T0": dict(self.prob_below_t0),
            "p_accept": self.p_accept,
        }


def term_basis(pauli: str) -> tuple[int, int]:
    return (trapdoor.label_for_pauli(pauli[0]),
            trapdoor.label_for_pauli(pauli[1]))


def term_m_value(pauli: str, m1: int, m2: int) -> int:
    """Measured eigenvalue of a term: identity factors contribute +1."""
    val = 1
    if pauli[0] != "I":
        val *= (-1) ** m1
    if pauli[1] != "I":
        val *= (-1) ** m2
    return val


def thresholds(c: float) -> tuple[float, float]:
    t0 = (1.0 + hamiltonian.ENERGY_YES / c) / 2.0
    t1 = (1.0 + hamiltonian.ENERGY_NO / c) / 2.0
    return t0, t1


def theoretical_r(problem: hamiltonian.DecisionProblem) -> float:
    """Noiseless expectation of r for an honest prover: (1 + <H>/c)/2."""
    ham = hamiltonian.build_fixed_h(problem)
    return (1.0 + hamiltonian.eta_energy(problem) / ham.c_value()) / 2.0


def _finalize(stats: ExtendedRunStats, r_by_basis: dict,
              test_counts: dict, measure_counts: dict,
              rng: np.random.Generator) -> ExtendedRunStats:
    all_r = np.concatenate([np.asarray(v) for v in r_by_basis.values()
                            if len(v)]) if any(len(v) for v in r_by_basis.values()) \
        else np.array([])
    stats.n_measure = int(all_r.size)
    stats.r_est = float(all_r.mean()) if all_r.size else float("nan")
    stats.accept = bool(all_r.size and stats.r_est <= stats.t0)

    for name in estimation.SETTINGS:
        t_total, t_fail = test_counts.get(name, (0, 0))
        m_total, m_fail = measure_counts.get(name, (0, 0))
        stats.p_test_reject[name] = t_fail / t_total if t_total else 0.0
        stats.p_measure_reject[name] = m_fail / m_total if m_total else 0.0
        r = np.asarray(r_by_basis.get(name, []))
        if r.size:
            boots = rng.choice(r, size=(BOOTSTRAP, r.size)).mean(axis=1)
            stats.prob_below_t0[name] = float((boots < stats.t0).mean())
        else:
            stats.prob_below_t0[name] = 1.0 if stats.accept else 0.0

    acc = 0.0
    for name, v in stats.basis_weights.items():
        acc += 0.5 * v * (1.0 - stats.p_test_reject[name])
        acc += (0.5 * v * (1.0 - stats.p_measure_reject[name])
                * stats.prob_below_t0[name])
    stats.p_accept = acc
    return stats


def _prepare(problem: hamiltonian.DecisionProblem):
    ham = hamiltonian.build_fixed_h(problem)
    c = ham.c_value()
    coeffs = np.array([t[0] for t in ham.terms])
    paulis = [t[1] for t in ham.terms]
    weights = np.abs(coeffs) / c
    signs = np.sign(coeffs).astype(int)
    setting_of = {v: k for k, v in estimation.SETTING_KEYS.items()}
    bases = [setting_of[term_basis(p)] for p in paulis]
    basis_weights: dict[str, float] = {}
    for w, b in zip(weights, bases):
        basis_weights[b] = basis_weights.get(b, 0.0) + float(w)
    return ham, c, paulis, weights, signs, bases, basis_weights


def extended_protocol(config: SessionConfig, n_terms: int,
                      repetitions: int = 1,
                      rng: np.random.Generator | None = None) -> ExtendedRunStats:
    """Fast path: vectorized sessions against the analytic distributions.

    The effective instance already reflects the claim (map a "no" claim with
    `hamiltonian.reduce_no_claim` before calling).
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    problem = config.problem
    ham, c, paulis, weights, signs, bases, basis_weights = _prepare(problem)
    t0, t1 = thresholds(c)
    stats = ExtendedRunStats(c=c, t0=t0, t1=t1, r_est=0.0, accept=False,
                             n_terms=n_terms, n_measure=0, n_test=0,
                             term_weights={p: float(w) for p, w in
                                           zip(paulis, weights)},
                             basis_weights=basis_weights)

    dists = {name: estimation.round_distribution(problem.alpha,
                                                 estimation.SETTING_KEYS[name],
                                                 config.lam, "measure")
             for name in estimation.SETTINGS}
    test_dists = {name: estimation.round_distribution(problem.alpha,
                                                      estimation.SETTING_KEYS[name],
                                                      config.lam, "test")
                  for name in estimation.SETTINGS}

    term_idx = rng.choice(len(paulis), size=n_terms, p=weights)
    coins = rng.integers(0, 2, size=n_terms)  # 0 = test, 1 = measure
    r_by_basis: dict[str, list] = {name: [] for name in estimation.SETTINGS}
    test_counts = {name: [0, 0] for name in estimation.SETTINGS}
    measure_counts = {name: [0, 0] for name in estimation.SETTINGS}

    for li, (pauli, s) in enumerate(zip(paulis, signs)):
        name = bases[li]
        keys = estimation.SETTING_KEYS[name]
        mine = term_idx == li
        n_test = int(np.count_nonzero(mine & (coins == 0)))
        n_meas = int(np.count_nonzero(mine & (coins == 1)))
        stats.n_test += n_test
        if n_test:
            zs = rng.choice(estimation.DIM, size=n_test, p=test_dists[name])
            fails = estimation.test_mismatch(zs, keys)
            test_counts[name][0] += n_test
            test_counts[name][1] += int(fails.sum())
        if n_meas:
            zs = rng.choice(estimation.DIM, size=(n_meas, repetitions),
                            p=dists[name])
            valid, m1, m2 = estimation.decode_bits(zs, keys)
            measure_counts[name][0] += n_meas * repetitions
            measure_counts[name][1] += int((~valid).sum())
            row_ok = valid.all(axis=1)
            votes = np.ones_like(m1)
            if pauli[0] != "I":
                votes = votes * (-1) ** m1
            if pauli[1] != "I":
                votes = votes * (-1) ** m2
            agree = (votes == s).sum(axis=1)
            r = (2 * agree > repetitions).astype(int)  # ties resolve to 0
            r_by_basis[name].extend(r[row_ok].tolist())

    test_counts = {k: tuple(v) for k, v in test_counts.items()}
    measure_counts = {k: tuple(v) for k, v in measure_counts.items()}
    return _finalize(stats, r_by_basis, test_counts, measure_counts, rng)


def extended_protocol_wire(config: SessionConfig, n_terms: int, channel,
                           rng: np.random.Generator | None = None,
                           transcript: messages.Transcript | None = None,
                           wire_problem: hamiltonian.DecisionProblem | None = None,
                           expected_claim: str = "yes",
                           repetitions: int = 1,
                           sidecars: list | None = None) -> ExtendedRunStats:
    """Wire path: interactive sessions over `channel`, one block per term.

    `config.problem` is the effective ("yes"-claim) instance that defines the
    Hamiltonian, term weights and thresholds; `wire_problem` (default: the
    same) is what goes into the CIRCUIT message, so a "no" claim sends the
    original instance while the verification runs on the reduced one. A claim
    that differs from `expected_claim` is a protocol violation.

    Per sampled term, one fair coin picks a test round or a block of
    `repetitions` measurement rounds whose majority vote yields r(l).
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    problem = config.problem
    wire_problem = wire_problem if wire_problem is not None else problem
    ham, c, paulis, weights, signs, bases, basis_weights = _prepare(problem)
    t0, t1 = thresholds(c)
    stats = ExtendedRunStats(c=c, t0=t0, t1=t1, r_est=0.0, accept=False,
                             n_terms=n_terms, n_measure=0, n_test=0,
                             term_weights={p: float(w) for p, w in
                                           zip(paulis, weights)},
                             basis_weights=basis_weights,
                             transcript=transcript)

    term_idx = rng.choice(len(paulis), size=n_terms, p=weights)
    r_by_basis: dict[str, list] = {name: [] for name in estimation.SETTINGS}
    test_counts = {name: [0, 0] for name in estimation.SETTINGS}
    measure_counts = {name: [0, 0] for name in estimation.SETTINGS}

    def one_session(keys, policy):
        rec, sidecar = verifier.run_session(wire_problem, keys, channel, rng,
                                            round_policy=policy,
                                            transcript=transcript)
        if sidecars is not None:
            sidecars.append(sidecar)
        if rec.claim != expected_claim:
            raise messages.ProtocolError(
                f"prover claimed {rec.claim!r}, expected {expected_claim!r}")
        return rec

    for li in term_idx:
        pauli, s = paulis[li], signs[li]
        name = bases[li]
        keys = estimation.SETTING_KEYS[name]
        if rng.integers(2) == 0:
            stats.n_test += 1
            rec = one_session(keys, "force_test")
            test_counts[name][0] += 1
            test_counts[name][1] += int(rec.verdict == "reject")
            continue
        votes = []
        rejected = False
        for _ in range(repetitions):
            rec = one_session(keys, "force_measure")
            measure_counts[name][0] += 1
            if rec.verdict == "reject":
                measure_counts[name][1] += 1
                rejected = True
                break
            votes.append(term_m_value(pauli, *rec.decoded))
        if rejected:
            continue
        agree = sum(1 for v in votes if v == s)
        r_by_basis[name].append(1 if 2 * agree > len(votes) else 0)

    test_counts = {k: tuple(v) for k, v in test_counts.items()}
    measure_counts = {k: tuple(v) for k, v in measure_counts.items()}
    return _finalize(stats, r_by_basis, test_counts, measure_counts, rng)
