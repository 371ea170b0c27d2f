"""Depolarizing noise model: global channel, energy curves, and rate fitting.

The device model is one single-qubit depolarizing channel per qubit, applied
once to the fully prepared state before any measurement. Energy curves come in
an exact flavor (analytic density-operator pipeline; deterministic oracle for
every stochastic test) and a sampled flavor (finite shots). The fit recovers
the rate by golden-section search of the squared distance between an observed
curve and the exact model curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import directest, hamiltonian, qsim
from .protocol import estimation


@dataclass(frozen=True)
class NoiseModel:
    """Single-qubit depolarizing rate applied to every qubit."""

    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0,1], got {self.lam}")


def apply_global(state: qsim.QuantumState, model: NoiseModel,
                 rng: np.random.Generator | None = None,
                 trajectory: bool = False) -> qsim.QuantumState:
    """Depolarize every qubit of the 8-qubit register.

    Density path by default; trajectory=True samples one Kraus operator per
    qubit and keeps pure states pure.
    """
    if state.num_qubits != 8:
        raise ValueError("the protocol register has 8 qubits")
    if model.lam == 0.0:
        return state.copy()
    if not trajectory and state.is_pure:
        state = state.to_mixed()
    for q in range(state.num_qubits):
        state = qsim.apply_channel(state, qsim.depolarizing(model.lam, q),
                                   rng=rng, trajectory=trajectory)
    return state


def compose_rates(lam: float, mu: float) -> float:
    """Rate of the composition of two depolarizing channels.

    1 - nu = (1 - lam)(1 - mu): the Pauli transfer factors multiply.
    """
    return 1.0 - (1.0 - lam) * (1.0 - mu)


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    e_est: float
    e_err: float


def energy_curve(problem: hamiltonian.DecisionProblem, lam: float,
                 alphas, mode: str = "exact", shots: int = 2000,
                 rng: np.random.Generator | None = None) -> list[CurvePoint]:
    """E_est(alpha) over a grid.

    mode: 'exact' (analytic delegated pipeline), 'delegated' (sampled
    delegated rounds), or 'direct' (sampled two-qubit estimation).
    """
    points = []
    for alpha in alphas:
        inst = hamiltonian.DecisionProblem(float(alpha), problem.variant,
                                           problem.a, problem.b)
        if mode == "exact":
            est = estimation.exact_energy(inst, lam)
        elif mode == "delegated":
            cfg = estimation.SessionConfig(inst, shots=shots, lam=lam)
            est = estimation.estimate_energy(cfg, rng)
        elif mode == "direct":
            est = directest.direct_energy(inst, lam, shots, rng)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        points.append(CurvePoint(float(alpha), est.e_est, est.e_err))
    return points


def verified_yes_region(problem: hamiltonian.DecisionProblem, lam: float,
                        alphas) -> list[float]:
    """Grid points whose exact energy is below the verification threshold."""
    pts = energy_curve(problem, lam, alphas, mode="exact")
    return [p.alpha for p in pts if p.e_est < hamiltonian.ENERGY_YES]


def threshold_crossing(problem: hamiltonian.DecisionProblem, lam: float,
                       lo: float = 0.0, hi: float = math.pi / 2,
                       tol: float = 1e-6) -> float | None:
    """Continuous alpha where the exact curve crosses the yes threshold.

    Bisection on E(alpha) - 0.4 for the P0 orientation (increasing energy);
    None when the curve does not cross inside [lo, hi].
    """
    def f(a: float) -> float:
        inst = hamiltonian.DecisionProblem(a, problem.variant, problem.a,
                                           problem.b)
        return estimation.exact_energy(inst, lam).e_est - hamiltonian.ENERGY_YES

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        return None
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) * flo <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def golden_section(fn, lo: float, hi: float, tol: float = 1e-4) -> float:
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (a + b) / 2


def fit_lambda(observed, problem: hamiltonian.DecisionProblem,
               lo: float = 0.0, hi: float = 0.2, tol: float = 1e-4) -> float:
    """Least-squares depolarizing-rate fit of an observed (alpha, E) curve.

    Golden-section search of sum_i (E_model(alpha_i; lam) - E_i)^2 over
    lam in [lo, hi].
    """
    observed = [(float(a), float(e)) for a, e in observed]
    if not observed:
        raise ValueError("fit needs at least one observed point")

    def sse(lam: float) -> float:
        acc = 0.0
        for a, e in observed:
            inst = hamiltonian.DecisionProblem(a, problem.variant, problem.a,
                                               problem.b)
            acc += (estimation.exact_energy(inst, lam).e_est - e) ** 2
        return acc

    return golden_section(sse, lo, hi, tol)
