"""Compilation to the ion-native gate set and fidelity budgets.

Native gate set: single-qubit rotations RX/RY (physical, laser-driven), RZ
(virtual, applied as a software frame update), and the two-qubit entangler
MS(-pi/2) = exp(i pi X.X / 4).

Lowering uses fixed templates, each verified unitarily against the dense
simulator (up to global phase):

  H        -> RY(pi/2), RX(pi)
  X        -> RX(pi);  Z -> RZ(pi)
  CNOT c,t -> RY(-pi/2)_c | MS(-pi/2) | RX(pi/2)_c, RY(pi/2)_c, RX(-pi/2)_t
  CU(a) c,t-> RY(pi/2-a)_t, RY(pi/2)_c, RZ(pi)_c | MS(-pi/2) |
              RX(-pi/2)_c, RY(pi/2)_c, RX(-pi/2)_t, RY(a-pi/2)_t
  CPHASE   -> CU(0)

The CU template conjugates the entangler by Z on the control, which lets the
state-preparation Hadamard on the clock qubit merge into a single physical
RY(pi); the template set reproduces the gate accounting of the targeted
trapped-ion system: each of the four delegation circuits compiles to 5 MS plus
19 single-qubit gates of which 17 are physical, and the bare two-qubit
preparation block costs 1 MS plus 8 physical rotations.

Merging collapses each maximal run of same-qubit rotations (never commuting
through an entangler) into a canonical minimal form: nothing for identity, one
axis rotation when the product is axis-aligned, two rotations when an ordered
axis pair fits, else a ZYZ triple. Greedy left-to-right, deterministic.

The fidelity budget multiplies one factor per physically applied gate:
single_gate_fidelity per RX/RY (virtual RZ is free) and the per-pair
entangler fidelities in circuit order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim

TWO_PI = 2 * math.pi

NATIVE_SINGLE = ("RX", "RY", "RZ")
PHYSICAL_SINGLE = ("RX", "RY")

MS_THETA = -math.pi / 2

#: Benchmarked entangler fidelities of the five qubit pairs used by the
#: delegation circuits, and the composite single-qubit gate fidelity.
DEFAULT_SINGLE_FIDELITY = 0.998
DEFAULT_MS_FIDELITIES = (0.982, 0.976, 0.977, 0.976, 0.984)


@dataclass(frozen=True)
class CircuitIR:
    """An ordered gate list at abstract or native level."""

    num_qubits: int
    gates: tuple[qsim.Gate, ...]
    level: str = "abstract"

    def __post_init__(self):
        if self.level not in ("abstract", "native"):
            raise ValueError(f"bad level {self.level!r}")
        if self.level == "native":
            for g in self.gates:
                ok = (g.kind in NATIVE_SINGLE
                      or (g.kind == "MS" and abs(g.theta - MS_THETA) < 1e-12))
                if not ok:
                    raise ValueError(f"not ion-native: {g}")

    def counts(self) -> dict[str, int]:
        ms = sum(1 for g in self.gates if g.kind == "MS")
        singles = sum(1 for g in self.gates if g.kind in NATIVE_SINGLE)
        phys = sum(1 for g in self.gates if g.kind in PHYSICAL_SINGLE)
        return {"ms": ms, "singles": singles, "singles_physical": phys,
                "singles_virtual_rz": singles - phys}

    def ms_pairs(self) -> list[tuple[int, int]]:
        return [g.targets for g in self.gates if g.kind == "MS"]

    def to_json(self) -> str:
        out = []
        for g in self.gates:
            rec = {"gate": g.kind, "targets": list(g.targets)}
            if g.theta is not None:
                rec["theta"] = round(g.theta, 7)
            out.append(rec)
        return json.dumps(out)

    def unitary(self) -> np.ndarray:
        dim = 2 ** self.num_qubits
        u = np.eye(dim, dtype=complex)
        for g in self.gates:
            u = np.array([qsim._apply_matrix_vec(u[:, i], g.matrix(), g.targets,
                                                 self.num_qubits)
                          for i in range(dim)]).T
        return u


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------


def _lower_one(gate: qsim.Gate) -> list[qsim.Gate]:
    k = gate.kind
    if k == "H":
        (q,) = gate.targets
        return [qsim.ry(q, math.pi / 2), qsim.rx(q, math.pi)]
    if k == "X":
        (q,) = gate.targets
        return [qsim.rx(q, math.pi)]
    if k == "Z":
        (q,) = gate.targets
        return [qsim.rz(q, math.pi)]
    if k in NATIVE_SINGLE:
        return [gate]
    if k == "MS":
        if abs(gate.theta - MS_THETA) > 1e-12:
            raise ValueError(f"native entangler is MS({MS_THETA}); got {gate}")
        return [gate]
    if k == "CNOT":
        c, t = gate.targets
        return [
            qsim.ry(c, -math.pi / 2),
            qsim.ms(c, t, MS_THETA),
            qsim.rx(c, math.pi / 2), qsim.ry(c, math.pi / 2),
            qsim.rx(t, -math.pi / 2),
        ]
    if k in ("CU", "CPHASE"):
        c, t = gate.targets
        alpha = 0.0 if k == "CPHASE" else gate.theta
        return [
            qsim.ry(t, math.pi / 2 - alpha),
            qsim.ry(c, math.pi / 2), qsim.rz(c, math.pi),
            qsim.ms(c, t, MS_THETA),
            qsim.rx(c, -math.pi / 2), qsim.ry(c, math.pi / 2),
            qsim.rx(t, -math.pi / 2),
            qsim.ry(t, alpha - math.pi / 2),
        ]
    raise ValueError(f"unsupported abstract gate {gate.kind!r}")


# ---------------------------------------------------------------------------
# Run canonicalization (quaternion form)
# ---------------------------------------------------------------------------

_AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}
_AXIS_KIND = {0: "RX", 1: "RY", 2: "RZ"}
# Ordered axis pairs tried for two-rotation forms; (second, first) in time.
_PAIR_PREFERENCE = ((1, 0), (0, 1), (2, 0), (0, 2), (2, 1), (1, 2))


def _quat_of(kind: str, theta: float) -> np.ndarray:
    q = np.zeros(4)
    q[0] = math.cos(theta / 2)
    q[1 + _AXIS_INDEX[kind[1]]] = math.sin(theta / 2)
    return q


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w = a[0] * b[0] - a[1:] @ b[1:]
    v = a[0] * b[1:] + b[0] * a[1:] + np.cross(a[1:], b[1:])
    return np.concatenate(([w], v))


def _norm_angle(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t <= -math.pi:
        t += TWO_PI
    elif t > math.pi:
        t -= TWO_PI
    return t


def _quats_close(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    # quaternions double-cover rotations: q and -q are the same gate
    return bool(np.allclose(a, b, rtol=0.0, atol=atol)
                or np.allclose(a, -b, rtol=0.0, atol=atol))


def canonicalize_run(rotations: list[qsim.Gate]) -> list[qsim.Gate]:
    """Collapse adjacent same-qubit rotations into a minimal canonical form."""
    if not rotations:
        return []
    q = rotations[0].targets[0]
    acc = np.array([1.0, 0.0, 0.0, 0.0])
    for g in rotations:
        if g.kind not in NATIVE_SINGLE or g.targets != (q,):
            raise ValueError("run must be rotations on a single qubit")
        acc = _quat_mul(_quat_of(g.kind, g.theta), acc)

    w, v = acc[0], acc[1:]
    if np.linalg.norm(v) < 1e-10:
        return []
    for ax in range(3):
        rest = [v[i] for i in range(3) if i != ax]
        if all(abs(r) < 1e-10 for r in rest):
            theta = _norm_angle(2 * math.atan2(v[ax], w))
            return [qsim.Gate(_AXIS_KIND[ax], (q,), theta)]

    for b_ax, a_ax in _PAIR_PREFERENCE:
        sol = _solve_pair(acc, a_ax, b_ax)
        if sol is not None:
            alpha, beta = sol
            return [qsim.Gate(_AXIS_KIND[a_ax], (q,), _norm_angle(alpha)),
                    qsim.Gate(_AXIS_KIND[b_ax], (q,), _norm_angle(beta))]

    return _zyz(acc, q)


def _solve_pair(target: np.ndarray, a_ax: int, b_ax: int):
    """Solve target = R_b(beta) R_a(alpha) (a applied first) if possible."""
    w = target[0]
    va = target[1 + a_ax]
    vb = target[1 + b_ax]
    n_ax = 3 - a_ax - b_ax
    vn = target[1 + n_ax]
    candidates_a = [2 * math.atan2(va, w), 2 * math.atan2(-vn, vb),
                    2 * math.atan2(va, w) + TWO_PI]
    candidates_b = [2 * math.atan2(vb, w), 2 * math.atan2(-vn, va),
                    2 * math.atan2(vb, w) + TWO_PI]
    for alpha in candidates_a:
        for beta in candidates_b:
            rec = _quat_mul(_quat_of(_AXIS_KIND[b_ax], beta),
                            _quat_of(_AXIS_KIND[a_ax], alpha))
            if _quats_close(rec, target):
                return alpha, beta
    return None


def _zyz(target: np.ndarray, q: int) -> list[qsim.Gate]:
    """Generic three-rotation fallback: RZ(a) then RY(b) then RZ(c)."""
    w, x, y, z = target
    # U = Rz(c) Ry(b) Rz(a): quaternion components
    #   w = cos(b/2) cos((a+c)/2), z = -cos(b/2) sin((a+c)/2)  (sign per defs)
    #   y = sin(b/2) cos((c-a)/2), x = sin(b/2) sin((c-a)/2)
    b = 2 * math.atan2(math.hypot(x, y), math.hypot(w, z))
    apc = 2 * math.atan2(z, w)   # a + c
    amc = 2 * math.atan2(x, y)   # a - c
    for s_apc in (apc, apc + TWO_PI):
        for s_amc in (amc, amc + TWO_PI):
            a = (s_apc + s_amc) / 2
            c = (s_apc - s_amc) / 2
            rec = _quat_mul(_quat_of("RZ", c),
                            _quat_mul(_quat_of("RY", b), _quat_of("RZ", a)))
            if _quats_close(rec, target):
                gates = [qsim.rz(q, _norm_angle(a)), qsim.ry(q, _norm_angle(b)),
                         qsim.rz(q, _norm_angle(c))]
                return [g for g in gates if abs(g.theta) > 1e-12]
    raise RuntimeError("ZYZ decomposition failed to reconstruct the rotation")


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


def lower(circuit: CircuitIR, merge: bool = True) -> CircuitIR:
    """Lower an abstract circuit to the native gate set.

    With merge=True (default), maximal single-qubit runs are collapsed to
    canonical minimal form; rotations are never commuted through entanglers,
    so gate counts are stable and the pass is left-to-right deterministic.
    """
    native: list[qsim.Gate] = []
    for g in circuit.gates:
        native.extend(_lower_one(g))
    if not merge:
        return CircuitIR(circuit.num_qubits, tuple(native), "native")

    pending: dict[int, list[qsim.Gate]] = {}
    out: list[qsim.Gate] = []
    for g in native:
        if g.kind == "MS":
            for q in g.targets:
                out.extend(canonicalize_run(pending.pop(q, [])))
            out.append(g)
        else:
            pending.setdefault(g.targets[0], []).append(g)
    for q in sorted(pending):
        out.extend(canonicalize_run(pending[q]))
    return CircuitIR(circuit.num_qubits, tuple(out), "native")


# ---------------------------------------------------------------------------
# Protocol circuits (protocol qubit labels 1..8 map to positions 0..7)
# ---------------------------------------------------------------------------


def delegation_circuit(alpha: float, keys: tuple[int, int],
                       measurement_round: bool = True) -> CircuitIR:
    """The full 8-qubit delegation circuit for one basis choice.

    Prepares the clock state on qubits (1,2), entangles each with its three
    auxiliaries according to the labels, and (in the measurement-round form)
    appends the X-basis changes on qubits (1,3,2,6). Readout is Z on all
    qubits and is not part of the gate list.
    """
    k1, k2 = keys
    g = [
        qsim.h(1),
        qsim.cu(1, 0, alpha),
        qsim.h(2),
        qsim.cnot(0, 3),
        qsim.cnot(2, 3 if k1 else 4),
        qsim.h(5),
        qsim.cnot(1, 6),
        qsim.cnot(5, 6 if k2 else 7),
    ]
    if measurement_round:
        g += [qsim.h(0), qsim.h(2), qsim.h(1), qsim.h(5)]
    return CircuitIR(8, tuple(g), "abstract")


def eta_circuit(alpha: float, basis: tuple[int, int] | None = None) -> CircuitIR:
    """The bare 2-qubit clock-state preparation, optionally with basis changes."""
    g = [qsim.h(1), qsim.cu(1, 0, alpha)]
    if basis is not None:
        k1, k2 = basis
        if k1:
            g.append(qsim.h(0))
        if k2:
            g.append(qsim.h(1))
    return CircuitIR(2, tuple(g), "abstract")


# ---------------------------------------------------------------------------
# Fidelity budgets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorBudget:
    """Multiplicative per-gate fidelity model.

    Virtual RZ gates are software frame updates and carry no error; only
    physical RX/RY rotations consume `single_gate_fidelity`. Entangler
    fidelities are consumed in circuit order, one per MS gate.
    """

    single_gate_fidelity: float = DEFAULT_SINGLE_FIDELITY
    ms_fidelities: tuple[float, ...] = DEFAULT_MS_FIDELITIES

    def __post_init__(self):
        vals = (self.single_gate_fidelity,) + tuple(self.ms_fidelities)
        if not all(0.0 <= v <= 1.0 for v in vals):
            raise ValueError("fidelities must lie in [0, 1]")


def fidelity_product(budget: ErrorBudget, circuit: CircuitIR) -> float:
    """Product of per-gate fidelities for a native circuit."""
    if circuit.level != "native":
        raise ValueError("fidelity_product expects a native circuit")
    counts = circuit.counts()
    n_ms = counts["ms"]
    if n_ms > len(budget.ms_fidelities):
        raise ValueError(
            f"{n_ms} entanglers but only {len(budget.ms_fidelities)} pair fidelities")
    out = budget.single_gate_fidelity ** counts["singles_physical"]
    for f in budget.ms_fidelities[:n_ms]:
        out *= f
    return out


def bell_fidelity_estimate(e_zz: float, e_xx: float) -> float:
    """Bell-state fidelity proxy at alpha = pi/2: (E[Z1Z2] + E[X1X2]) / 2."""
    return (e_zz + e_xx) / 2.0


def compile_report(alpha: float, budget: ErrorBudget | None = None) -> dict:
    """Gate accounting and fidelity budgets for all four delegation circuits."""
    budget = budget or ErrorBudget()
    per_keys = {}
    for k1 in (0, 1):
        for k2 in (0, 1):
            circ = lower(delegation_circuit(alpha, (k1, k2)))
            counts = circ.counts()
            per_keys[f"{k1}{k2}"] = {
                "ms_count": counts["ms"],
                "single_count": counts["singles"],
                "single_count_physical": counts["singles_physical"],
                "single_count_virtual_rz": counts["singles_virtual_rz"],
                "ms_pairs": [[a + 1, b + 1] for a, b in circ.ms_pairs()],
                "fidelity_product": fidelity_product(budget, circ),
            }
    eta_raw = lower(eta_circuit(alpha), merge=False)
    eta_counts = eta_raw.counts()
    eta_budget = ErrorBudget(budget.single_gate_fidelity,
                             budget.ms_fidelities[:1])
    return {
        "alpha": alpha,
        "delegation": per_keys,
        "eta_preparation": {
            "ms_count": eta_counts["ms"],
            "single_count_physical": eta_counts["singles_physical"],
            "single_count_virtual_rz": eta_counts["singles_virtual_rz"],
            "fidelity_product": fidelity_product(eta_budget, eta_raw),
        },
        "budget": {
            "single_gate_fidelity": budget.single_gate_fidelity,
            "ms_fidelities": list(budget.ms_fidelities),
        },
    }
