"""Minimal dense quantum simulator for up to 10 qubits.

Supports pure statevectors and density operators, the gate set needed by the
verification protocol (rotations, H, X, Z, CNOT, CPHASE, CU(alpha), MS),
single-qubit Kraus channels, and projective measurements in the Z or X basis
with state collapse.

Conventions (used everywhere in this package):
  - Qubits are indexed 0..n-1.
  - Big-endian bit order: qubit 0 is the most significant bit of the basis
    state index, i.e. index = sum_q bit_q << (n-1-q).
  - Measurement outcome bit 0 corresponds to the +1 eigenvalue.
  - Global phase is never significant; comparisons are made on probabilities,
    expectations and phase-aligned matrices.
  - Every stochastic operation takes an explicit numpy Generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-10

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULI = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]])


def u_alpha_matrix(alpha: float) -> np.ndarray:
    """The self-adjoint single-qubit computation cos(a) Z + sin(a) X."""
    return np.cos(alpha) * _Z + np.sin(alpha) * _X


def ms_matrix(theta: float) -> np.ndarray:
    """Molmer-Sorensen entangler exp(-i theta X.X / 2) on two qubits."""
    xx = np.kron(_X, _X)
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * xx


def cu_matrix(alpha: float) -> np.ndarray:
    """Controlled-U(alpha); control is the first (more significant) qubit.

    Interpolates between CPHASE (alpha=0) and CNOT (alpha=pi/2).
    """
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u_alpha_matrix(alpha)
    return out


_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_CPHASE = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class Gate:
    """A gate instance: kind, target qubit indices, optional angle."""

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.kind}: {self.targets}")
        want = 2 if self.kind in _TWO_QUBIT_KINDS else 1
        if len(self.targets) != want:
            raise ValueError(f"{self.kind} takes {want} target(s), got {self.targets}")

    def matrix(self) -> np.ndarray:
        if self.kind in ("RX", "RY", "RZ", "MS"):
            return _PARAM_MATRIX[self.kind](self.theta)
        if self.kind == "CU":
            return cu_matrix(self.theta)
        return _FIXED_MATRIX[self.kind]


_TWO_QUBIT_KINDS = frozenset({"CNOT", "CPHASE", "CU", "MS"})
_FIXED_MATRIX = {"H": _H, "X": _X, "Z": _Z, "CNOT": _CNOT, "CPHASE": _CPHASE}
_PARAM_MATRIX = {"RX": rx_matrix, "RY": ry_matrix, "RZ": rz_matrix, "MS": ms_matrix}


def rx(q: int, theta: float) -> Gate:
    return Gate("RX", (q,), theta)


def ry(q: int, theta: float) -> Gate:
    return Gate("RY", (q,), theta)


def rz(q: int, theta: float) -> Gate:
    return Gate("RZ", (q,), theta)


def h(q: int) -> Gate:
    return Gate("H", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def z(q: int) -> Gate:
    return Gate("Z", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def cphase(control: int, target: int) -> Gate:
    return Gate("CPHASE", (control, target))


def cu(control: int, target: int, alpha: float) -> Gate:
    return Gate("CU", (control, target), alpha)


def ms(q1: int, q2: int, theta: float) -> Gate:
    return Gate("MS", (q1, q2), theta)


@dataclass(frozen=True)
class KrausChannel:
    """Single-qubit channel given by Kraus operators acting on `target`."""

    operators: tuple[np.ndarray, ...]
    target: int

    def check_complete(self, atol: float = ATOL) -> None:
        acc = sum(K.conj().T @ K for K in self.operators)
        if not np.allclose(acc, _I, atol=atol):
            raise ValueError("Kraus operators do not sum to identity")


def depolarizing(lam: float, target: int) -> KrausChannel:
    """Depolarizing channel with K0 = sqrt(1-3l/4) 1, K_i = sqrt(l/4) {X,Y,Z}."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing rate must be in [0,1], got {lam}")
    k0 = np.sqrt(1 - 3 * lam / 4) * _I
    k1 = np.sqrt(lam / 4) * _X
    k2 = np.sqrt(lam / 4) * _Y
    k3 = np.sqrt(lam / 4) * _Z
    return KrausChannel((k0, k1, k2, k3), target)


class QuantumState:
    """Pure statevector or density operator over n qubits (1..10).

    Exactly one of `vec`/`rho` is set. Operations return new states; nothing
    is shared between the input and output arrays.
    """

    def __init__(self, num_qubits: int, vec: np.ndarray | None = None,
                 rho: np.ndarray | None = None, check: bool = True):
        if not 1 <= num_qubits <= 10:
            raise ValueError(f"num_qubits must be in 1..10, got {num_qubits}")
        if (vec is None) == (rho is None):
            raise ValueError("exactly one of vec/rho must be given")
        self.num_qubits = num_qubits
        dim = 2 ** num_qubits
        if vec is not None:
            vec = np.asarray(vec, dtype=complex).reshape(dim)
            if check and abs(np.linalg.norm(vec) - 1.0) > 1e-8:
                raise ValueError("statevector is not normalized")
            self.vec, self.rho = vec, None
        else:
            rho = np.asarray(rho, dtype=complex).reshape(dim, dim)
            if check:
                if abs(np.trace(rho).real - 1.0) > 1e-8:
                    raise ValueError("density operator trace is not 1")
                if not np.allclose(rho, rho.conj().T, atol=1e-8):
                    raise ValueError("density operator is not Hermitian")
            self.vec, self.rho = None, rho

    @property
    def is_pure(self) -> bool:
        return self.vec is not None

    @classmethod
    def zero(cls, num_qubits: int) -> "QuantumState":
        vec = np.zeros(2 ** num_qubits, dtype=complex)
        vec[0] = 1.0
        return cls(num_qubits, vec=vec, check=False)

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho.copy()
        return np.outer(self.vec, self.vec.conj())

    def to_mixed(self) -> "QuantumState":
        return QuantumState(self.num_qubits, rho=self.density(), check=False)

    def purity(self) -> float:
        if self.is_pure:
            return 1.0
        return float(np.real(np.trace(self.rho @ self.rho)))

    def probabilities(self) -> np.ndarray:
        """Z-basis outcome distribution over all 2^n basis states."""
        if self.is_pure:
            p = np.abs(self.vec) ** 2
        else:
            p = np.real(np.diag(self.rho)).copy()
        p = np.clip(p, 0.0, None)
        return p / p.sum()

    def copy(self) -> "QuantumState":
        if self.is_pure:
            return QuantumState(self.num_qubits, vec=self.vec.copy(), check=False)
        return QuantumState(self.num_qubits, rho=self.rho.copy(), check=False)


def _check_targets(state: QuantumState, targets: tuple[int, ...]) -> None:
    for q in targets:
        if not 0 <= q < state.num_qubits:
            raise ValueError(f"target {q} out of range for {state.num_qubits} qubits")


def _apply_matrix_vec(vec: np.ndarray, mat: np.ndarray, targets: tuple[int, ...],
                      n: int) -> np.ndarray:
    k = len(targets)
    g = mat.reshape(2 ** k, 2 ** k)
    v = np.moveaxis(vec.reshape((2,) * n), targets, range(k)).reshape(2 ** k, -1)
    v = (g @ v).reshape((2,) * n)
    return np.moveaxis(v, range(k), targets).reshape(-1)


def _apply_matrix_rho(rho: np.ndarray, mat: np.ndarray, targets: tuple[int, ...],
                      n: int) -> np.ndarray:
    # rho -> (G rho G+): apply G to the row axes and G* to the column axes
    k = len(targets)
    g = mat.reshape(2 ** k, 2 ** k)
    t = rho.reshape((2,) * (2 * n))
    t = np.moveaxis(t, targets, range(k))
    t = (g @ t.reshape(2 ** k, -1)).reshape((2,) * (2 * n))
    t = np.moveaxis(t, range(k), targets)
    col_targets = tuple(q + n for q in targets)
    t = np.moveaxis(t, col_targets, range(k))
    t = (g.conj() @ t.reshape(2 ** k, -1)).reshape((2,) * (2 * n))
    t = np.moveaxis(t, range(k), col_targets)
    return t.reshape(2 ** n, 2 ** n)


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """Evolve the state by the gate's unitary; purity is preserved."""
    _check_targets(state, gate.targets)
    mat = gate.matrix()
    n = state.num_qubits
    if state.is_pure:
        return QuantumState(n, vec=_apply_matrix_vec(state.vec, mat, gate.targets, n),
                            check=False)
    rho = _apply_matrix_rho(state.rho, mat, gate.targets, n)
    return QuantumState(n, rho=rho, check=False)


def apply_circuit(state: QuantumState, gates) -> QuantumState:
    for g in gates:
        state = apply_gate(state, g)
    return state


def apply_channel(state: QuantumState, channel: KrausChannel,
                  rng: np.random.Generator | None = None,
                  trajectory: bool = False) -> QuantumState:
    """Apply a single-qubit Kraus channel.

    Density path (default): rho -> sum_l K_l rho K_l+; a pure input is promoted
    to a density operator unless the channel has a single (unitary) Kraus term.
    Trajectory path: samples one Kraus operator with Born weights and
    renormalizes, keeping pure states pure. Requires an rng.
    """
    _check_targets(state, (channel.target,))
    channel.check_complete()
    n = state.num_qubits
    tgt = (channel.target,)
    if trajectory:
        if rng is None:
            raise ValueError("trajectory mode requires an rng")
        if not state.is_pure:
            raise ValueError("trajectory mode requires a pure state")
        branches = [_apply_matrix_vec(state.vec, K, tgt, n) for K in channel.operators]
        weights = np.array([np.linalg.norm(b) ** 2 for b in branches])
        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum()
        idx = int(rng.choice(len(branches), p=weights))
        vec = branches[idx] / np.linalg.norm(branches[idx])
        return QuantumState(n, vec=vec, check=False)
    if len(channel.operators) == 1 and state.is_pure:
        vec = _apply_matrix_vec(state.vec, channel.operators[0], tgt, n)
        return QuantumState(n, vec=vec / np.linalg.norm(vec), check=False)
    rho = state.density()
    acc = np.zeros_like(rho)
    for K in channel.operators:
        acc += _apply_matrix_rho(rho, K, tgt, n)
    return QuantumState(n, rho=acc, check=False)


def depolarize_density(state: QuantumState, lam: float,
                       qubits=None) -> QuantumState:
    """Exact depolarizing of the given qubits (default all) on the density path.

    Uses the channel identity D(rho) = (1-lam) rho + lam/2 . 1_q x Tr_q rho,
    which is algebraically identical to the four-Kraus form but one pass per
    qubit.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing rate must be in [0,1], got {lam}")
    n = state.num_qubits
    qubits = range(n) if qubits is None else qubits
    if lam == 0.0:
        return state.copy()
    rho = state.density()
    for q in qubits:
        t = np.moveaxis(rho.reshape((2,) * (2 * n)), (q, q + n), (0, 1))
        traced = t[0, 0] + t[1, 1]
        t *= (1 - lam)
        t[0, 0] += (lam / 2) * traced
        t[1, 1] += (lam / 2) * traced
        rho = np.moveaxis(t, (0, 1), (q, q + n)).reshape(rho.shape)
    return QuantumState(n, rho=rho, check=False)


def _marginal_probs(state: QuantumState, targets: tuple[int, ...]) -> np.ndarray:
    """Joint Z-outcome distribution over `targets` (in the given order)."""
    n = state.num_qubits
    p = state.probabilities().reshape((2,) * n)
    other = tuple(q for q in range(n) if q not in targets)
    marg = p.sum(axis=other) if other else p
    # axes of marg are in increasing qubit order; reorder to `targets`
    order = tuple(sorted(targets).index(q) for q in targets)
    marg = np.transpose(marg, order)
    flat = np.clip(marg.reshape(-1), 0.0, None)
    # clamp tiny negative rounding (within -1e-12) already handled by clip
    return flat / flat.sum()


def measure(state: QuantumState, targets: tuple[int, ...], basis: str,
            rng: np.random.Generator) -> tuple[tuple[int, ...], QuantumState]:
    """Projectively measure `targets` in the Z or X basis.

    Returns the outcome bits (0 = +1 eigenvalue) and the renormalized
    post-measurement state on all qubits. An X measurement conjugates the
    targets by H, measures in Z, and rotates back.
    """
    if basis not in ("Z", "X"):
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise ValueError("measurement targets must be disjoint")
    _check_targets(state, targets)
    work = state
    if basis == "X":
        for q in targets:
            work = apply_gate(work, h(q))
    probs = _marginal_probs(work, targets)
    idx = int(rng.choice(len(probs), p=probs))
    k = len(targets)
    bits = tuple((idx >> (k - 1 - i)) & 1 for i in range(k))
    collapsed = _project(work, targets, bits)
    if basis == "X":
        for q in targets:
            collapsed = apply_gate(collapsed, h(q))
    return bits, collapsed


def _project(state: QuantumState, targets: tuple[int, ...],
             bits: tuple[int, ...]) -> QuantumState:
    n = state.num_qubits
    mask = np.ones((2,) * n, dtype=bool)
    for q, b in zip(targets, bits):
        sl = [slice(None)] * n
        sl[q] = 1 - b
        mask[tuple(sl)] = False
    flat = mask.reshape(-1)
    if state.is_pure:
        vec = np.where(flat, state.vec, 0.0)
        nrm = np.linalg.norm(vec)
        if nrm < 1e-12:
            raise ValueError("projection onto zero-probability branch")
        return QuantumState(n, vec=vec / nrm, check=False)
    rho = state.rho * np.outer(flat, flat)
    tr = np.trace(rho).real
    if tr < 1e-12:
        raise ValueError("projection onto zero-probability branch")
    return QuantumState(n, rho=rho / tr, check=False)


def expectation(state: QuantumState, pauli: str) -> float:
    """Exact <P> for a Pauli string over {I, X, Z} (one char per qubit)."""
    if len(pauli) != state.num_qubits:
        raise ValueError(f"pauli length {len(pauli)} != {state.num_qubits} qubits")
    if any(ch not in "IXZ" for ch in pauli):
        raise ValueError(f"pauli string may contain only I, X, Z: {pauli!r}")
    n = state.num_qubits
    if state.is_pure:
        w = state.vec
        for q, ch in enumerate(pauli):
            if ch != "I":
                w = _apply_matrix_vec(w, PAULI[ch], (q,), n)
        return float(np.real(np.vdot(state.vec, w)))
    r = state.rho
    for q, ch in enumerate(pauli):
        if ch != "I":
            # left-multiply only; trace gives Tr[P rho]
            dim = 2 ** n
            t = np.moveaxis(r.reshape((2,) * n + (dim,)), (q,), (0,))
            t = (PAULI[ch] @ t.reshape(2, -1)).reshape((2,) + t.shape[1:])
            r = np.moveaxis(t, (0,), (q,)).reshape(dim, dim)
    return float(np.real(np.trace(r)))


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """Phase-insensitive comparison of two statevectors or matrices."""
    a, b = np.asarray(a), np.asarray(b)
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < 1e-12:
        return bool(np.allclose(a, b, atol=atol))
    phase = b[idx] / a[idx]
    if abs(abs(phase) - 1.0) > 1e-9:
        return False
    return bool(np.allclose(a * phase, b, atol=atol))
