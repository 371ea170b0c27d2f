"""Ion-native lowering, merging, gate accounting, fidelity budgets."""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqc import compile as ioncompile
from cvqc import qsim

GENERIC_ALPHA = 0.12 * math.pi / 2


def assert_equivalent(circuit: ioncompile.CircuitIR, reference: np.ndarray,
                      atol=1e-9):
    assert qsim.states_equal_up_to_phase(circuit.unitary(), reference, atol)


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("gate,n", [
    (qsim.h(0), 1), (qsim.x(0), 1), (qsim.z(0), 1),
    (qsim.cnot(0, 1), 2), (qsim.cnot(1, 0), 2),
    (qsim.cphase(0, 1), 2),
    (qsim.cu(0, 1, 0.0), 2), (qsim.cu(0, 1, 0.9), 2),
    (qsim.cu(1, 0, math.pi / 2), 2),
])
def test_template_unitaries(gate, n):
    abstract = ioncompile.CircuitIR(n, (gate,), "abstract")
    for merge in (False, True):
        lowered = ioncompile.lower(abstract, merge=merge)
        assert lowered.level == "native"
        assert_equivalent(lowered, abstract.unitary())


def test_cnot_costs_one_ms_and_four_singles():
    low = ioncompile.lower(ioncompile.CircuitIR(2, (qsim.cnot(0, 1),)),
                           merge=False)
    counts = low.counts()
    assert counts["ms"] == 1 and counts["singles"] == 4


def test_cu_adds_two_target_rotations():
    low = ioncompile.lower(ioncompile.CircuitIR(2, (qsim.cu(0, 1, 0.4),)),
                           merge=False)
    assert low.counts()["ms"] == 1
    assert low.counts()["singles"] == 7  # 5-rotation core + 2 basis changes


def test_cu_at_endpoint_matches_cnot_lowering():
    # the two basis-change rotations vanish at alpha = pi/2
    cu = ioncompile.lower(ioncompile.CircuitIR(2, (qsim.cu(0, 1, math.pi / 2),)))
    cnot = ioncompile.lower(ioncompile.CircuitIR(2, (qsim.cnot(0, 1),)))
    assert qsim.states_equal_up_to_phase(cu.unitary(), cnot.unitary())


def test_unsupported_abstract_gate():
    with pytest.raises(ValueError):
        ioncompile.lower(ioncompile.CircuitIR(2, (qsim.ms(0, 1, 0.3),)))


# ---------------------------------------------------------------------------
# run canonicalization
# ---------------------------------------------------------------------------


@settings(max_examples=120, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["RX", "RY", "RZ"]),
                          st.floats(-math.pi, math.pi)),
                min_size=1, max_size=5))
def test_canonicalize_run_preserves_unitary(spec):
    run = [qsim.Gate(kind, (0,), theta) for kind, theta in spec]
    out = ioncompile.canonicalize_run(run)
    assert len(out) <= 3
    ref = ioncompile.CircuitIR(1, tuple(run), "native").unitary()
    got = ioncompile.CircuitIR(1, tuple(out), "native").unitary()
    assert qsim.states_equal_up_to_phase(got, ref, atol=1e-8)


def test_canonicalize_cancels_inverse_pair():
    run = [qsim.ry(0, 0.7), qsim.ry(0, -0.7)]
    assert ioncompile.canonicalize_run(run) == []


def test_merge_is_deterministic():
    circ = ioncompile.delegation_circuit(GENERIC_ALPHA, (1, 0))
    a = ioncompile.lower(circ)
    b = ioncompile.lower(circ)
    assert a.gates == b.gates


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_random_circuit_lowering_soundness(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    gates = []
    for _ in range(int(rng.integers(1, 7))):
        kind = rng.choice(["H", "X", "Z", "CNOT", "CU"])
        if kind in ("H", "X", "Z"):
            gates.append(qsim.Gate(kind, (int(rng.integers(n)),)))
        else:
            c, t = rng.choice(n, size=2, replace=False)
            theta = float(rng.uniform(0, math.pi / 2)) if kind == "CU" else None
            gates.append(qsim.Gate(kind, (int(c), int(t)), theta))
    abstract = ioncompile.CircuitIR(n, tuple(gates), "abstract")
    lowered = ioncompile.lower(abstract)
    assert_equivalent(lowered, abstract.unitary())


# ---------------------------------------------------------------------------
# protocol circuit accounting
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("keys", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_delegation_circuit_counts(keys):
    low = ioncompile.lower(ioncompile.delegation_circuit(GENERIC_ALPHA, keys))
    counts = low.counts()
    assert counts["ms"] == 5
    assert counts["singles"] == 19
    assert counts["singles_physical"] == 17
    assert counts["singles_virtual_rz"] == 2


@pytest.mark.parametrize("keys", [(0, 0), (1, 1)])
def test_delegation_lowering_equivalence_eight_qubits(keys):
    abstract = ioncompile.delegation_circuit(0.4, keys)
    lowered = ioncompile.lower(abstract)
    assert_equivalent(lowered, abstract.unitary())


def test_eta_preparation_accounting():
    raw = ioncompile.lower(ioncompile.eta_circuit(GENERIC_ALPHA), merge=False)
    counts = raw.counts()
    assert counts["ms"] == 1
    assert counts["singles_physical"] == 8
    assert counts["singles_virtual_rz"] == 1


# ---------------------------------------------------------------------------
# fidelity budgets
# ---------------------------------------------------------------------------


def test_full_circuit_fidelity_product():
    budget = ioncompile.ErrorBudget()
    low = ioncompile.lower(ioncompile.delegation_circuit(GENERIC_ALPHA, (1, 1)))
    assert ioncompile.fidelity_product(budget, low) == pytest.approx(0.869,
                                                                     abs=1e-3)


def test_eta_circuit_fidelity_product():
    raw = ioncompile.lower(ioncompile.eta_circuit(GENERIC_ALPHA), merge=False)
    budget = ioncompile.ErrorBudget(ms_fidelities=(0.982,))
    assert ioncompile.fidelity_product(budget, raw) == pytest.approx(0.966,
                                                                     abs=1e-3)


def test_empty_circuit_fidelity_is_one():
    empty = ioncompile.CircuitIR(2, (), "native")
    assert ioncompile.fidelity_product(ioncompile.ErrorBudget(), empty) == 1.0


def test_too_many_entanglers_rejected():
    budget = ioncompile.ErrorBudget(ms_fidelities=(0.98,))
    two = ioncompile.CircuitIR(
        2, (qsim.ms(0, 1, ioncompile.MS_THETA),
            qsim.ms(0, 1, ioncompile.MS_THETA)), "native")
    with pytest.raises(ValueError):
        ioncompile.fidelity_product(budget, two)


def test_bell_fidelity_estimates():
    assert ioncompile.bell_fidelity_estimate(0.891, 0.812) == pytest.approx(0.8515)
    assert ioncompile.bell_fidelity_estimate(1.0, 1.0) == 1.0
    assert ioncompile.bell_fidelity_estimate(0.955, 0.935) == pytest.approx(0.945)


def test_budget_validation():
    with pytest.raises(ValueError):
        ioncompile.ErrorBudget(single_gate_fidelity=1.2)


# ---------------------------------------------------------------------------
# report and export
# ---------------------------------------------------------------------------


def test_compile_report_shape():
    rep = ioncompile.compile_report(GENERIC_ALPHA)
    assert set(rep["delegation"]) == {"00", "01", "10", "11"}
    for entry in rep["delegation"].values():
        assert entry["ms_count"] == 5
        assert entry["single_count"] == 19
        assert len(entry["ms_pairs"]) == 5
    assert rep["eta_preparation"]["fidelity_product"] == pytest.approx(0.966,
                                                                       abs=1e-3)


def test_native_json_export():
    low = ioncompile.lower(ioncompile.CircuitIR(2, (qsim.cnot(0, 1),)))
    data = json.loads(low.to_json())
    ms = [g for g in data if g["gate"] == "MS"]
    assert ms == [{"gate": "MS", "targets": [0, 1], "theta": -1.5707963}]


def test_native_level_enforced():
    with pytest.raises(ValueError):
        ioncompile.CircuitIR(2, (qsim.h(0),), "native")
