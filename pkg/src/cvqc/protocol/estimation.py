"""Expectation-value and energy estimation from delegated measurement rounds.

For each basis choice (k1, k2) the full round is equivalent to a single
Z-basis readout of all eight qubits after the appropriate basis changes, so
the statistics of a whole session are one 256-outcome distribution. Bulk
estimation samples that distribution directly (identical semantics to running
sessions one by one, established by test); the exact pipeline evaluates the
same decode arithmetic against the analytic distribution, which for lam > 0 is
computed from the density operator.

Commitments outside the two-to-one range cannot be decoded; such shots are
rejected and reported, and expectations are over the decodable shots.

Outcome-bit layout of an 8-bit readout index (big-endian tensor positions):
positions (0,2) are the round outcomes (c1,d1)/(b1,x1) of qubits (1,3),
positions (1,5) those of qubits (2,6), positions (3,4) the commitment ybar1,
positions (6,7) ybar2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import hamiltonian, qsim, trapdoor
from . import prover as prover_mod

N_QUBITS = 8
DIM = 2 ** N_QUBITS

RESAMPLES = 1000

SETTINGS = ("Z1Z2", "Z1X2", "X1Z2", "X1X2")
SETTING_KEYS = {"Z1Z2": (0, 0), "Z1X2": (0, 1), "X1Z2": (1, 0), "X1X2": (1, 1)}
#: Hamiltonian term -> (estimation setting, which decoded bits enter the sign)
TERM_SOURCES = {
    "ZI": ("Z1", None), "IZ": ("Z2", None), "ZZ": ("Z1Z2", None),
    "ZX": ("Z1X2", None), "XZ": ("X1Z2", None), "XX": ("X1X2", None),
}

_BITPOS = {name: pos for name, pos in
           [("c1", 0), ("c2", 1), ("d1", 2), ("y1a", 3), ("y1b", 4),
            ("d2", 5), ("y2a", 6), ("y2b", 7)]}


def _bit(indices: np.ndarray, pos: int) -> np.ndarray:
    return (indices >> (N_QUBITS - 1 - pos)) & 1


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of an estimation run."""

    problem: hamiltonian.DecisionProblem
    shots: int = 2000
    lam: float = 0.0
    seed: int = 0
    round_policy: str = "auto"

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be in [0, 1]")


def round_distribution(alpha: float, keys: tuple[int, int], lam: float,
                       round_type: str) -> np.ndarray:
    """Analytic 256-outcome readout distribution of one session round."""
    state = prover_mod.prepare_state(alpha, keys, lam, density=True) \
        if lam > 0 else prover_mod.prepare_state(alpha, keys)
    if round_type == "measure":
        for q in (*prover_mod.POS_ROUND_1, *prover_mod.POS_ROUND_2):
            state = qsim.apply_gate(state, qsim.h(q))
    elif round_type != "test":
        raise ValueError(f"round_type must be test|measure, got {round_type!r}")
    return state.probabilities()


def decode_bits(indices: np.ndarray, keys: tuple[int, int]):
    """Vectorized measurement-round decode for readout indices.

    Returns (valid mask, m1, m2); m bits are meaningful only where valid.
    """
    k1, k2 = keys
    y1a, y1b = _bit(indices, 3), _bit(indices, 4)
    y2a, y2b = _bit(indices, 6), _bit(indices, 7)
    valid = np.ones(indices.shape, dtype=bool)
    if k1 == 1:
        valid &= y1b == 0
    if k2 == 1:
        valid &= y2b == 0
    # two-to-one preimages (0,x0),(1,x1) always have x0 XOR x1 = 1 here
    m1 = (_bit(indices, 0) ^ _bit(indices, 2)) if k1 else y1a
    m2 = (_bit(indices, 1) ^ _bit(indices, 5)) if k2 else y2a
    return valid, m1, m2


def test_mismatch(indices: np.ndarray, keys: tuple[int, int]) -> np.ndarray:
    """Vectorized test-round consistency check; True where the verifier rejects."""
    k1, k2 = keys
    b1, x1 = _bit(indices, 0), _bit(indices, 2)
    b2, x2 = _bit(indices, 1), _bit(indices, 5)
    y1 = (_bit(indices, 3), _bit(indices, 4))
    y2 = (_bit(indices, 6), _bit(indices, 7))
    if k1 == 0:
        ok1 = (b1 == y1[0]) & (x1 == y1[1])
    else:
        ok1 = ((b1 ^ x1) == y1[0]) & (y1[1] == 0)
    if k2 == 0:
        ok2 = (b2 == y2[0]) & (x2 == y2[1])
    else:
        ok2 = ((b2 ^ x2) == y2[0]) & (y2[1] == 0)
    return ~(ok1 & ok2)


def test_reject_probability(probs: np.ndarray, keys: tuple[int, int]) -> float:
    idx = np.arange(DIM)
    return float(probs[test_mismatch(idx, keys)].sum())


def measure_reject_probability(probs: np.ndarray, keys: tuple[int, int]) -> float:
    idx = np.arange(DIM)
    valid, _, _ = decode_bits(idx, keys)
    return float(probs[~valid].sum())


@dataclass
class EnergyEstimate:
    """Per-basis expectations, assembled energy, and resampled errors."""

    expectations: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    e_est: float = 0.0
    e_err: float = 0.0
    shots_per_basis: int = 0
    rejected: dict = field(default_factory=dict)
    verdict: str = "inconclusive"

    def as_dict(self) -> dict:
        return {
            "expectations": dict(self.expectations),
            "errors": dict(self.errors),
            "e_est": self.e_est,
            "e_err": self.e_err,
            "shots_per_basis": self.shots_per_basis,
            "rejected": dict(self.rejected),
            "verdict": self.verdict,
        }


def _expectations_from_counts(counts_by_setting: dict) -> dict:
    """Decoded expectation values from 256-bin readout counts per setting."""
    idx = np.arange(DIM)
    out = {}
    for name, counts in counts_by_setting.items():
        keys = SETTING_KEYS[name]
        valid, m1, m2 = decode_bits(idx, keys)
        nvalid = counts[valid].sum()
        if nvalid == 0:
            raise ValueError(f"no decodable shots in setting {name}")
        sign = (-1.0) ** (m1 + m2)
        out[name] = float((counts[valid] * sign[valid]).sum() / nvalid)
        if name == "Z1Z2":
            out["Z1"] = float((counts[valid] * (-1.0) ** m1[valid]).sum() / nvalid)
            out["Z2"] = float((counts[valid] * (-1.0) ** m2[valid]).sum() / nvalid)
    return out


def _energy_from_expectations(ham: hamiltonian.PauliHamiltonian,
                              expectations: dict) -> float:
    e = 0.0
    for coeff, pauli in ham.terms:
        if pauli == "II":
            e += coeff
        else:
            setting, _ = TERM_SOURCES[pauli]
            e += coeff * expectations[setting]
    return e


def _verdict_for(e_est: float) -> str:
    if e_est < hamiltonian.ENERGY_YES:
        return "verified-yes"
    if e_est > hamiltonian.ENERGY_NO:
        return "verified-no"
    return "inconclusive"


def _sample_counts(config: SessionConfig, rng: np.random.Generator) -> dict:
    """Draw `shots` measurement rounds per basis as 256-bin readout counts."""
    counts_by_setting = {}
    for name in SETTINGS:
        keys = SETTING_KEYS[name]
        probs = round_distribution(config.problem.alpha, keys, config.lam,
                                   "measure")
        counts_by_setting[name] = rng.multinomial(config.shots, probs).astype(float)
    return counts_by_setting


def _estimate_from_counts(counts_by_setting: dict, shots: int,
                          rng: np.random.Generator) -> EnergyEstimate:
    idx = np.arange(DIM)
    rejected = {name: int(counts[~decode_bits(idx, SETTING_KEYS[name])[0]].sum())
                for name, counts in counts_by_setting.items()}
    est = EnergyEstimate(shots_per_basis=shots, rejected=rejected)
    est.expectations = _expectations_from_counts(counts_by_setting)
    resampled = _resample_runs(counts_by_setting, shots, rng, None)
    est.errors = {k: float(np.std([r[k] for r in resampled], ddof=1))
                  for k in est.expectations}
    return est


def estimate_expectations(config: SessionConfig,
                          rng: np.random.Generator | None = None) -> EnergyEstimate:
    """Sampled estimation: `shots` measurement rounds per basis setting.

    Two-qubit expectations are means of (-1)^(m1+m2) over decodable shots;
    E[Z1], E[Z2] come from the marginals of the (0,0) setting. One-sigma
    errors by multinomial resampling of the readout counts (1000 resamples).
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    counts = _sample_counts(config, rng)
    return _estimate_from_counts(counts, config.shots, rng)


def _resample_runs(counts_by_setting: dict, shots: int,
                   rng: np.random.Generator,
                   ham: hamiltonian.PauliHamiltonian | None) -> list:
    """Multinomial bootstrap of the per-setting readout counts."""
    out = []
    phat = {name: counts / counts.sum()
            for name, counts in counts_by_setting.items()}
    for _ in range(RESAMPLES):
        counts = {name: rng.multinomial(shots, p).astype(float)
                  for name, p in phat.items()}
        exp = _expectations_from_counts(counts)
        if ham is not None:
            exp["__energy__"] = _energy_from_expectations(ham, exp)
        out.append(exp)
    return out


def estimate_energy(config: SessionConfig,
                    rng: np.random.Generator | None = None) -> EnergyEstimate:
    """Sampled energy estimate with threshold verdict.

    E_est contracts the merged Hamiltonian terms with the measured
    expectations (constant term exact); the error is the resampled spread of
    the full assembly.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    counts_by_setting = _sample_counts(config, rng)
    est = _estimate_from_counts(counts_by_setting, config.shots, rng)
    ham_ = hamiltonian.build_fixed_h(config.problem)
    est.e_est = _energy_from_expectations(ham_, est.expectations)
    resampled = _resample_runs(counts_by_setting, config.shots, rng, ham_)
    est.e_err = float(np.std([r["__energy__"] for r in resampled], ddof=1))
    est.verdict = _verdict_for(est.e_est)
    return est


def exact_expectations(alpha: float, lam: float) -> dict:
    """Exact decoded expectations of the delegated pipeline (no sampling)."""
    counts = {}
    for name in SETTINGS:
        keys = SETTING_KEYS[name]
        counts[name] = round_distribution(alpha, keys, lam, "measure")
    return _expectations_from_counts(counts)


def exact_energy(problem: hamiltonian.DecisionProblem, lam: float) -> EnergyEstimate:
    """Exact delegated energy with threshold verdict; errors are zero."""
    dists = {name: round_distribution(problem.alpha, SETTING_KEYS[name], lam,
                                      "measure")
             for name in SETTINGS}
    exp = _expectations_from_counts(dists)
    ham_ = hamiltonian.build_fixed_h(problem)
    est = EnergyEstimate(expectations=exp,
                         errors={k: 0.0 for k in exp},
                         shots_per_basis=0)
    est.e_est = _energy_from_expectations(ham_, exp)
    est.verdict = _verdict_for(est.e_est)
    est.rejected = {name: measure_reject_probability(dists[name],
                                                     SETTING_KEYS[name])
                    for name in SETTINGS}
    return est


def decoded_joint_distribution(alpha: float, keys: tuple[int, int],
                               lam: float = 0.0) -> np.ndarray:
    """Distribution of the decoded pair (m1, m2) given a decodable commitment."""
    probs = round_distribution(alpha, keys, lam, "measure")
    idx = np.arange(DIM)
    valid, m1, m2 = decode_bits(idx, keys)
    joint = np.zeros(4)
    for a in (0, 1):
        for b in (0, 1):
            mask = valid & (m1 == a) & (m2 == b)
            joint[2 * a + b] = probs[mask].sum()
    return joint / joint.sum()


def born_joint_distribution(alpha: float, keys: tuple[int, int]) -> np.ndarray:
    """Born distribution of measuring the bare clock state in basis (k1,k2)."""
    eta = hamiltonian.eta_state(alpha)
    for q, k in enumerate(keys):
        if k == 1:
            eta = qsim.apply_gate(eta, qsim.h(q))
    return eta.probabilities()


def rejection_rates(alpha: float, lam: float, round_type: str,
                    shots: int = 0, rng: np.random.Generator | None = None) -> dict:
    """Per-basis rejection probabilities, exact or sampled with resampled errors."""
    out = {}
    for name in SETTINGS:
        keys = SETTING_KEYS[name]
        probs = round_distribution(alpha, keys, lam, round_type)
        if round_type == "test":
            reject_mask = test_mismatch(np.arange(DIM), keys)
        else:
            valid, _, _ = decode_bits(np.arange(DIM), keys)
            reject_mask = ~valid
        exactp = float(probs[reject_mask].sum())
        if shots <= 0:
            out[name] = {"rate": exactp, "err": 0.0, "mode": "exact"}
        else:
            draws = rng.multinomial(shots, probs)
            rate = draws[reject_mask].sum() / shots
            boot = rng.multinomial(shots, draws / shots,
                                   size=RESAMPLES)[:, reject_mask].sum(axis=1) / shots
            out[name] = {"rate": float(rate),
                         "err": float(np.std(boot, ddof=1)),
                         "mode": "sampled"}
    return out
