"""Clock Hamiltonians, clock states, spectra, and the decision-problem bounds.

Two construction paths are provided:

  - `build_fixed_h`: the 2-qubit Hamiltonian H = H_out + 6 H_in + 3 H_prop for
    the single-gate computation U(alpha) = cos(a) Z + sin(a) X, in both
    decision-problem variants (P0: "yes" iff p0 > 3/5; P1: "yes" iff p1 > 3/5).
  - `build_general_h`: the Gray-coded XZ-type builder for an arbitrary circuit
    over the self-adjoint gate set {U(alpha), CNOT}, producing a Hamiltonian on
    n + ceil(log2(T+1)) qubits whose terms are products of I/X/Z only.

Term lists are canonical: Pauli strings merged, near-zero coefficients
dropped, entries sorted by string. The weight normalizer c = sum_l |c_l| is
always computed from this canonical merged list (identity term included); the
enumeration convention matters, so it is fixed here and used consistently by
the extended protocol thresholds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim

COEFF_EPS = 1e-12

# Promise thresholds: "yes" iff the relevant outcome probability exceeds B,
# "no" iff it is below A. They put the ground energy below ENERGY_YES for a
# correct "yes" claim and above ENERGY_NO for a correct "no".
PROMISE_A = 1.0 / 10.0
PROMISE_B = 3.0 / 5.0
ENERGY_YES = 1.0 - PROMISE_B   # 0.4
ENERGY_NO = 3.0 / 5.0 - PROMISE_A  # 0.5


@dataclass(frozen=True)
class DecisionProblem:
    """A promise problem instance for the circuit U(alpha).

    Variant P0 asks whether |<0|U|0>|^2 = cos^2(a) exceeds b; variant P1 asks
    the same of |<1|U|0>|^2 = sin^2(a).
    """

    alpha: float
    variant: str = "P0"
    a: float = PROMISE_A
    b: float = PROMISE_B

    def __post_init__(self):
        if self.variant not in ("P0", "P1"):
            raise ValueError(f"variant must be 'P0' or 'P1', got {self.variant!r}")
        if not 0.0 <= self.a < self.b <= 1.0:
            raise ValueError(f"need 0 <= a < b <= 1, got a={self.a}, b={self.b}")
        # tolerate rounded grid endpoints such as 1.5708
        if not -1e-3 <= self.alpha <= math.pi / 2 + 1e-3:
            raise ValueError(f"alpha must be in [0, pi/2], got {self.alpha}")

    def outcome_probability(self) -> float:
        """p0 (variant P0) or p1 (variant P1) of the honest computation."""
        if self.variant == "P0":
            return math.cos(self.alpha) ** 2
        return math.sin(self.alpha) ** 2

    def true_answer(self) -> str:
        """'yes', 'no', or 'outside-promise' for this instance."""
        p = self.outcome_probability()
        if p > self.b:
            return "yes"
        if p < self.a:
            return "no"
        return "outside-promise"


def reduce_no_claim(problem: DecisionProblem) -> DecisionProblem:
    """Map a 'no' claim to the equivalent 'yes'-claim instance.

    Claiming "no" for U(alpha) is equivalent to claiming "yes" for the
    modified computation X U(alpha) Z = U(pi/2 - alpha).
    """
    return DecisionProblem(math.pi / 2 - problem.alpha, problem.variant,
                           problem.a, problem.b)


def _merge_terms(terms) -> tuple[tuple[float, str], ...]:
    acc: dict[str, float] = {}
    width = None
    for coeff, pauli in terms:
        if width is None:
            width = len(pauli)
        elif len(pauli) != width:
            raise ValueError("inconsistent pauli string lengths")
        if any(ch not in "IXZ" for ch in pauli):
            raise ValueError(f"pauli strings may contain only I, X, Z: {pauli!r}")
        if not math.isfinite(coeff):
            raise ValueError(f"non-finite coefficient for {pauli}")
        acc[pauli] = acc.get(pauli, 0.0) + float(coeff)
    merged = [(c, p) for p, c in acc.items() if abs(c) > COEFF_EPS]
    return tuple(sorted(merged, key=lambda t: t[1]))


@dataclass(frozen=True)
class PauliHamiltonian:
    """Weighted sum of I/X/Z tensor products, canonically merged."""

    num_qubits: int
    terms: tuple[tuple[float, str], ...] = field(default_factory=tuple)

    @classmethod
    def from_terms(cls, num_qubits: int, terms) -> "PauliHamiltonian":
        merged = _merge_terms(terms)
        for _, p in merged:
            if len(p) != num_qubits:
                raise ValueError(f"term {p!r} does not act on {num_qubits} qubits")
        return cls(num_qubits, merged)

    def coefficient(self, pauli: str) -> float:
        for c, p in self.terms:
            if p == pauli:
                return c
        return 0.0

    def c_value(self) -> float:
        """Normalizer c = sum |c_l| over the canonical merged term list."""
        return sum(abs(c) for c, _ in self.terms)

    def scaled(self, factor: float) -> "PauliHamiltonian":
        return PauliHamiltonian.from_terms(
            self.num_qubits, [(factor * c, p) for c, p in self.terms])

    def __add__(self, other: "PauliHamiltonian") -> "PauliHamiltonian":
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit-count mismatch")
        return PauliHamiltonian.from_terms(self.num_qubits,
                                           list(self.terms) + list(other.terms))

    def to_matrix(self) -> np.ndarray:
        """Dense real symmetric matrix (I/X/Z have real entries)."""
        dim = 2 ** self.num_qubits
        out = np.zeros((dim, dim))
        for coeff, pauli in self.terms:
            m = np.array([[1.0]])
            for ch in pauli:
                m = np.kron(m, np.real(qsim.PAULI[ch]))
            out += coeff * m
        return out

    def expectation(self, state: qsim.QuantumState) -> float:
        return sum(c * qsim.expectation(state, p) for c, p in self.terms)

    def to_json(self) -> str:
        return json.dumps([{"coeff": c, "pauli": p} for c, p in self.terms],
                          sort_keys=True)

    @classmethod
    def from_json(cls, num_qubits: int, text: str) -> "PauliHamiltonian":
        data = json.loads(text)
        return cls.from_terms(num_qubits, [(d["coeff"], d["pauli"]) for d in data])


def ground_energy(ham: PauliHamiltonian) -> float:
    """Minimum eigenvalue via dense symmetric diagonalization."""
    if ham.num_qubits > 10:
        raise ValueError("dense diagonalization capped at 10 qubits")
    return float(np.linalg.eigvalsh(ham.to_matrix())[0])


# ---------------------------------------------------------------------------
# Fixed 2-qubit instance
# ---------------------------------------------------------------------------

J_IN_DEFAULT = 6.0
J_PROP_DEFAULT = 3.0


def fixed_h_parts(problem: DecisionProblem):
    """The output, input and propagation pieces of the 2-qubit Hamiltonian.

    P0: H_out = (1 - Z1 - Z2 + Z1Z2)/2 penalizes output 1 at the final time;
    P1: H_out = (1 + Z1 - Z2 - Z1Z2)/2 penalizes output 0 instead. H_in and
    H_prop are shared:
      H_in   = (1 - Z1 + Z2 - Z1Z2)/4
      H_prop = (1 - cos(a) Z1X2 - sin(a) X1X2)/2
    """
    a = problem.alpha
    if problem.variant == "P0":
        h_out = PauliHamiltonian.from_terms(2, [
            (0.5, "II"), (-0.5, "ZI"), (-0.5, "IZ"), (0.5, "ZZ")])
    else:
        h_out = PauliHamiltonian.from_terms(2, [
            (0.5, "II"), (0.5, "ZI"), (-0.5, "IZ"), (-0.5, "ZZ")])
    h_in = PauliHamiltonian.from_terms(2, [
        (0.25, "II"), (-0.25, "ZI"), (0.25, "IZ"), (-0.25, "ZZ")])
    h_prop = PauliHamiltonian.from_terms(2, [
        (0.5, "II"), (-0.5 * math.cos(a), "ZX"), (-0.5 * math.sin(a), "XX")])
    return h_out, h_in, h_prop


def build_fixed_h(problem: DecisionProblem,
                  j_in: float = J_IN_DEFAULT,
                  j_prop: float = J_PROP_DEFAULT) -> PauliHamiltonian:
    """H = H_out + j_in H_in + j_prop H_prop for the fixed 2-qubit instance."""
    h_out, h_in, h_prop = fixed_h_parts(problem)
    return h_out + h_in.scaled(j_in) + h_prop.scaled(j_prop)


# ---------------------------------------------------------------------------
# General Gray-coded builder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClockCircuit:
    """A circuit over the self-adjoint gate set {U(alpha), CNOT}.

    Gates are ('u', target, alpha) or ('cnot', control, target), with qubit
    indices in 0..n-1.
    """

    num_qubits: int
    gates: tuple[tuple, ...]

    def __post_init__(self):
        for g in self.gates:
            if g[0] == "u":
                _, q, _ = g
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"gate target out of range: {g}")
            elif g[0] == "cnot":
                _, c, t = g
                if c == t or not all(0 <= q < self.num_qubits for q in (c, t)):
                    raise ValueError(f"bad cnot spec: {g}")
            else:
                raise ValueError(f"unsupported gate kind {g[0]!r}; "
                                 "the clock construction needs self-adjoint gates")

    @property
    def depth(self) -> int:
        return len(self.gates)

    @property
    def clock_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.depth + 1)))

    def gate_unitary(self, spec) -> np.ndarray:
        if spec[0] == "u":
            return qsim.u_alpha_matrix(spec[2])
        return np.array(qsim.Gate("CNOT", (spec[1], spec[2])).matrix())


def single_gate_circuit(alpha: float) -> ClockCircuit:
    return ClockCircuit(1, (("u", 0, alpha),))


def gray(t: int) -> int:
    """Reflected binary Gray code: consecutive values differ in one bit."""
    return t ^ (t >> 1)


def _projector_terms(bits: dict[int, int], width: int):
    """Expand prod_i (1 + s_i Z_i)/2 over the given bit assignments."""
    terms = [(1.0, ["I"] * width)]
    for pos, bit in bits.items():
        sign = 1.0 if bit == 0 else -1.0
        new = []
        for coeff, paulis in terms:
            new.append((0.5 * coeff, paulis))
            pz = paulis.copy()
            pz[pos] = "Z"
            new.append((0.5 * coeff * sign, pz))
        terms = new
    return [(c, "".join(p)) for c, p in terms]


def _gate_pauli_terms(spec, n: int):
    """I/X/Z decomposition of a self-adjoint gate on the n system qubits."""
    if spec[0] == "u":
        _, q, alpha = spec
        zq = ["I"] * n
        zq[q] = "Z"
        xq = ["I"] * n
        xq[q] = "X"
        return [(math.cos(alpha), "".join(zq)), (math.sin(alpha), "".join(xq))]
    _, c, t = spec
    # CNOT = (II + Z_c + X_t - Z_c X_t)/2
    zc = ["I"] * n
    zc[c] = "Z"
    xt = ["I"] * n
    xt[t] = "X"
    zx = ["I"] * n
    zx[c] = "Z"
    zx[t] = "X"
    return [(0.5, "I" * n), (0.5, "".join(zc)), (0.5, "".join(xt)),
            (-0.5, "".join(zx))]


def _clock_projector(t: int, clock_bits: int):
    """C(t) = |t><t| on the Gray-coded clock register."""
    g = gray(t)
    bits = {i: (g >> (clock_bits - 1 - i)) & 1 for i in range(clock_bits)}
    return _projector_terms(bits, clock_bits)


def _clock_hop(t: int, clock_bits: int):
    """C(t, t-1) = (|t><t-1| + |t-1><t|)/2 expanded over I/X/Z.

    Gray coding makes consecutive codes differ in exactly one bit, so the hop
    is X on that bit times the projector onto the shared bits, halved.
    """
    ga, gb = gray(t), gray(t - 1)
    diff = ga ^ gb
    if bin(diff).count("1") != 1:
        raise ValueError("clock codes of consecutive times differ in != 1 bit")
    flip_pos = clock_bits - 1 - diff.bit_length() + 1
    shared = {i: (ga >> (clock_bits - 1 - i)) & 1
              for i in range(clock_bits)
              if i != flip_pos}
    terms = []
    for coeff, pauli in _projector_terms(shared, clock_bits):
        p = list(pauli)
        p[flip_pos] = "X"
        terms.append((0.5 * coeff, "".join(p)))
    return terms


def _tensor_terms(sys_terms, clock_terms):
    return [(cs * cc, ps + pc) for cs, ps in sys_terms for cc, pc in clock_terms]


def build_general_h(circuit: ClockCircuit,
                    j_in: float = J_IN_DEFAULT,
                    j_prop: float = J_PROP_DEFAULT) -> PauliHamiltonian:
    """Clock Hamiltonian H = H_out + j_in H_in + j_prop H_prop for a circuit.

    Acts on num_qubits + clock_bits qubits (system register first). Every term
    is a product of I/X/Z operators.
    """
    parts = general_h_parts(circuit)
    return (parts["out"] + parts["in"].scaled(j_in)
            + parts["prop"].scaled(j_prop))


def general_h_parts(circuit: ClockCircuit) -> dict[str, PauliHamiltonian]:
    """The individually positive-semidefinite pieces of the clock Hamiltonian."""
    n, cb = circuit.num_qubits, circuit.clock_bits
    big_t = circuit.depth
    total = n + cb
    if big_t + 1 > 2 ** cb:
        raise ValueError("clock register too small for the gate count")

    def one_minus_z(q: int, sign: float = -1.0):
        zq = ["I"] * n
        zq[q] = "Z"
        return [(0.5, "I" * n), (0.5 * sign, "".join(zq))]

    in_terms = []
    c0 = _clock_projector(0, cb)
    for i in range(n):
        in_terms.extend(_tensor_terms(one_minus_z(i), c0))

    out_terms = []
    ct = _clock_projector(big_t, cb)
    out_terms.extend(
        (coeff * (big_t + 1), pauli)
        for coeff, pauli in _tensor_terms(one_minus_z(0), ct))

    prop_terms = []
    identity_sys = [(1.0, "I" * n)]
    for t in range(1, big_t + 1):
        prop_terms.extend(
            (0.5 * c, p) for c, p in
            _tensor_terms(identity_sys, _clock_projector(t, cb)))
        prop_terms.extend(
            (0.5 * c, p) for c, p in
            _tensor_terms(identity_sys, _clock_projector(t - 1, cb)))
        gate_terms = _gate_pauli_terms(circuit.gates[t - 1], n)
        prop_terms.extend(
            (-c, p) for c, p in _tensor_terms(gate_terms, _clock_hop(t, cb)))

    return {
        "in": PauliHamiltonian.from_terms(total, in_terms),
        "out": PauliHamiltonian.from_terms(total, out_terms),
        "prop": PauliHamiltonian.from_terms(total, prop_terms),
    }


# ---------------------------------------------------------------------------
# Clock states
# ---------------------------------------------------------------------------


def clock_state(circuit: ClockCircuit) -> qsim.QuantumState:
    """The history state sum_t U_t..U_1 |0^n> |t> / sqrt(T+1), Gray-coded."""
    n, cb = circuit.num_qubits, circuit.clock_bits
    big_t = circuit.depth
    sys = np.zeros(2 ** n, dtype=complex)
    sys[0] = 1.0
    vec = np.zeros(2 ** (n + cb), dtype=complex)
    for t in range(big_t + 1):
        if t > 0:
            spec = circuit.gates[t - 1]
            if spec[0] == "u":
                targets: tuple[int, ...] = (spec[1],)
                mat = qsim.u_alpha_matrix(spec[2])
            else:
                targets = (spec[1], spec[2])
                mat = np.array(qsim.Gate("CNOT", targets).matrix())
            sys = qsim._apply_matrix_vec(sys, mat, targets, n)
        g = gray(t)
        vec[np.arange(2 ** n) * 2 ** cb + g] += sys
    vec /= np.sqrt(big_t + 1)
    return qsim.QuantumState(n + cb, vec=vec, check=False)


def eta_state(alpha: float) -> qsim.QuantumState:
    """The 2-qubit clock state (|00> + cos(a)|01> + sin(a)|11>)/sqrt(2)."""
    return clock_state(single_gate_circuit(alpha))


def eta_energy(problem: DecisionProblem) -> float:
    """Ideal clock-state energy: sin^2(a) for P0, cos^2(a) for P1."""
    if problem.variant == "P0":
        return math.sin(problem.alpha) ** 2
    return math.cos(problem.alpha) ** 2
