"""Protocol mechanics: committed states, sessions, decoding, estimation."""
import math

import numpy as np
import pytest

from cvqc import hamiltonian as hm
from cvqc import qsim, rand, trapdoor
from cvqc.protocol import (estimation, extended, messages, prover, verifier)


def committed_amplitudes(alpha, keys):
    """Independent oracle: amplitudes of the committed 8-qubit state."""
    k1, k2 = keys
    eta = {(0, 0): 1 / math.sqrt(2), (0, 1): math.cos(alpha) / math.sqrt(2),
           (1, 0): 0.0, (1, 1): math.sin(alpha) / math.sqrt(2)}
    vec = np.zeros(2 ** 8)
    for (b1, b2), amp in eta.items():
        for w1 in (0, 1):
            for w2 in (0, 1):
                y1 = trapdoor.eval_fn(k1, b1, w1)
                y2 = trapdoor.eval_fn(k2, b2, w2)
                bits = (b1, b2, w1, y1[0], y1[1], w2, y2[0], y2[1])
                idx = 0
                for b in bits:
                    idx = (idx << 1) | b
                vec[idx] += amp / 2.0
    return vec


@pytest.mark.parametrize("keys", [(0, 0), (0, 1), (1, 0), (1, 1)])
@pytest.mark.parametrize("alpha", [0.0, 0.6, math.pi / 2])
def test_prepared_state_matches_formula(alpha, keys):
    state = prover.prepare_state(alpha, keys)
    assert qsim.states_equal_up_to_phase(state.vec, committed_amplitudes(alpha, keys))


def test_honest_support_consistent_at_alpha_zero():
    # every basis string in the support satisfies y_k(b, x) = ybar per block
    state = prover.prepare_state(0.0, (0, 0))
    support = np.flatnonzero(np.abs(state.vec) > 1e-12)
    for idx in support:
        bits = [(idx >> (7 - q)) & 1 for q in range(8)]
        b1, b2, w1, y1a, y1b, w2, y2a, y2b = bits
        assert trapdoor.eval_fn(0, b1, w1) == (y1a, y1b)
        assert trapdoor.eval_fn(0, b2, w2) == (y2a, y2b)


def test_two_to_one_commitments_stay_in_range():
    # keys (1,1): the second commitment bit of each block is always 0
    state = prover.prepare_state(0.9, (1, 1))
    support = np.flatnonzero(np.abs(state.vec) > 1e-12)
    for idx in support:
        assert (idx >> (7 - 4)) & 1 == 0   # qubit 5
        assert (idx >> (7 - 7)) & 1 == 0   # qubit 8
    probs = estimation.round_distribution(0.9, (1, 1), 0.0, "measure")
    assert estimation.measure_reject_probability(probs, (1, 1)) == pytest.approx(0.0)


@pytest.mark.parametrize("keys", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_entangling_block_is_undone_by_its_inverse(keys):
    # unitarity of the key-dependent block: undoing it recovers the bare
    # clock state on qubits (1,2) with the auxiliaries back in |0...0>
    alpha = 0.7
    state = prover.prepare_state(alpha, keys)
    k1, k2 = keys
    block = [qsim.h(2), qsim.cnot(0, 3), qsim.cnot(2, 3 if k1 else 4),
             qsim.h(5), qsim.cnot(1, 6), qsim.cnot(5, 6 if k2 else 7)]
    for g in reversed(block):   # every block gate is self-inverse
        state = qsim.apply_gate(state, g)
    expected = np.zeros(2 ** 8, dtype=complex)
    eta = hm.eta_state(alpha).vec
    for (b1, b2), amp in np.ndenumerate(eta.reshape(2, 2)):
        expected[(b1 << 7) | (b2 << 6)] = amp
    assert qsim.states_equal_up_to_phase(state.vec, expected)


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------


def run_one(problem, keys, seed, policy, lam=0.0, cheat="none", claim="yes",
            alpha_wrong=None):
    prv = prover.build_prover(cheat, rand.prover_rng(seed), lam=lam,
                              claim=claim, alpha_wrong=alpha_wrong)
    chan = verifier.InProcessChannel(prv)
    rec, sidecar = verifier.run_session(problem, keys, chan,
                                        rand.verifier_rng(seed),
                                        round_policy=policy)
    return rec, sidecar


def test_honest_test_rounds_always_accept():
    # analytic: zero rejection probability for every key pair and angle
    for keys in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        for alpha in np.linspace(0, math.pi / 2, 20):
            probs = estimation.round_distribution(float(alpha), keys, 0.0, "test")
            assert estimation.test_reject_probability(probs, keys) < 1e-12
    # empirical sessions
    for seed in range(30):
        rec, _ = run_one(hm.DecisionProblem(0.61), (seed % 2, (seed // 2) % 2),
                         seed, "force_test")
        assert rec.verdict == "accept"


def test_empirical_binding_2000_shots():
    rng = np.random.default_rng(2)
    for keys in [(0, 0), (1, 1)]:
        probs = estimation.round_distribution(0.43, keys, 0.0, "test")
        draws = rng.multinomial(2000, probs)
        idx = np.arange(probs.size)
        assert draws[estimation.test_mismatch(idx, keys)].sum() == 0


def test_measure_round_produces_decoded_bits():
    rec, sidecar = run_one(hm.DecisionProblem(0.8), (0, 1), 7, "force_measure")
    assert rec.verdict == "continue"
    assert rec.decoded is not None and len(rec.decoded) == 2
    assert sidecar["decoded"] == list(rec.decoded)
    rec.check_invariants()


def test_invalid_commitment_rejected():
    class BadProver(prover.HonestProver):
        def handle(self, msg):
            reply = super().handle(msg)
            if msg["type"] == "KEYS":
                reply = messages.commit_msg([0, 1], [1, 1])
            return reply

    prv = BadProver(rand.prover_rng(1))
    chan = verifier.InProcessChannel(prv)
    rec, _ = verifier.run_session(hm.DecisionProblem(0.3), (1, 1), chan,
                                  rand.verifier_rng(1))
    assert rec.verdict == "reject"
    assert rec.reject_reason == "invalid_commitment"
    assert rec.round is None and rec.decoded is None


def test_session_machine_matches_bulk_distribution():
    # the per-message session path and the vectorized path draw from the
    # same decoded distribution
    problem, keys = hm.DecisionProblem(0.9), (1, 1)
    counts = np.zeros(4)
    n = 400
    for seed in range(n):
        rec, _ = run_one(problem, keys, 1000 + seed, "force_measure")
        m1, m2 = rec.decoded
        counts[2 * m1 + m2] += 1
    expected = estimation.decoded_joint_distribution(problem.alpha, keys)
    tv = 0.5 * np.abs(counts / n - expected).sum()
    assert tv < 0.12  # 400 samples over 4 bins


# ---------------------------------------------------------------------------
# decode correctness
# ---------------------------------------------------------------------------


def test_decoded_equals_born_exactly():
    for keys in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        for alpha in np.linspace(0, math.pi / 2, 20):
            dec = estimation.decoded_joint_distribution(float(alpha), keys)
            born = estimation.born_joint_distribution(float(alpha), keys)
            assert 0.5 * np.abs(dec - born).sum() < 1e-10


def test_decoded_tv_sampled_below_threshold():
    rng = np.random.default_rng(5)
    for keys in [(0, 1), (1, 1)]:
        probs = estimation.round_distribution(0.77, keys, 0.0, "measure")
        draws = rng.multinomial(10000, probs).astype(float)
        idx = np.arange(probs.size)
        valid, m1, m2 = estimation.decode_bits(idx, keys)
        joint = np.zeros(4)
        for a in (0, 1):
            for b in (0, 1):
                joint[2 * a + b] = draws[valid & (m1 == a) & (m2 == b)].sum()
        joint /= joint.sum()
        born = estimation.born_joint_distribution(0.77, keys)
        assert 0.5 * np.abs(joint - born).sum() < 0.05


# ---------------------------------------------------------------------------
# cheating strategies
# ---------------------------------------------------------------------------


def test_classical_guess_rejection_three_quarters_per_pair():
    # a uniform (b, x) matches a fixed one-to-one commitment w.p. 1/4
    matches = sum(trapdoor.eval_fn(0, b, x) == (1, 0)
                  for b in (0, 1) for x in (0, 1))
    assert matches / 4 == 0.25
    rejections = 0
    n = 600
    for seed in range(n):
        rec, _ = run_one(hm.DecisionProblem(0.2), (0, 0), seed, "force_test",
                         cheat="guess")
        rejections += rec.verdict == "reject"
    # session rejects unless both pairs match: 1 - (1/4)^2 = 0.9375
    assert abs(rejections / n - 0.9375) < 0.05


def test_wrong_alpha_prover_passes_tests_but_fails_energy():
    for seed in range(25):
        rec, _ = run_one(hm.DecisionProblem(0.1), (1, 0), seed, "force_test",
                         cheat="wrong-alpha", alpha_wrong=1.4)
        assert rec.verdict == "accept"
    cfg = estimation.SessionConfig(hm.DecisionProblem(0.1), lam=0.0, seed=4)
    stats = extended.extended_protocol(cfg, 4000,
                                       rng=np.random.default_rng(4))
    honest_r = extended.theoretical_r(hm.DecisionProblem(0.1))
    # the wrong-angle state at 1.4 rad has much higher energy
    wrong_r = (1 + math.sin(1.4) ** 2 / stats.c) / 2
    assert wrong_r > stats.t1 > stats.t0 > honest_r


def test_inconsistent_prover_rejected_at_threshold():
    prv = prover.build_prover("inconsistent", rand.prover_rng(9))
    chan = verifier.InProcessChannel(prv)
    cfg = estimation.SessionConfig(hm.DecisionProblem(0.05), lam=0.0, seed=9)
    stats = extended.extended_protocol_wire(cfg, 400, chan,
                                            rng=rand.verifier_rng(9))
    assert stats.p_test_reject == {k: 0.0 for k in stats.p_test_reject}
    assert not stats.accept          # r_est stuck near 1/2 + 1.75/c
    assert stats.r_est > stats.t1


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------


def test_sampled_expectations_three_sigma():
    cfg = estimation.SessionConfig(hm.DecisionProblem(math.pi / 2), shots=2000,
                                   seed=21)
    est = estimation.estimate_expectations(cfg)
    assert abs(est.expectations["Z1Z2"] - 1.0) <= 3 * max(est.errors["Z1Z2"], 1e-3)
    cfg0 = estimation.SessionConfig(hm.DecisionProblem(0.0), shots=2000, seed=22)
    est0 = estimation.estimate_expectations(cfg0)
    assert abs(est0.expectations["X1X2"]) <= 3 * max(est0.errors["X1X2"], 1e-3)
    for alpha, seed in [(0.3, 1), (1.0, 2), (1.4, 3)]:
        cfg = estimation.SessionConfig(hm.DecisionProblem(alpha), shots=2000,
                                       seed=seed)
        est = estimation.estimate_expectations(cfg)
        assert abs(est.expectations["Z1"] - math.cos(alpha) ** 2) <= \
            3 * max(est.errors["Z1"], 2e-3)


def test_energy_estimates_ideal_and_noisy():
    e0 = estimation.estimate_energy(
        estimation.SessionConfig(hm.DecisionProblem(0.0), shots=2000, seed=31))
    assert abs(e0.e_est) <= 3 * max(e0.e_err, 1e-3)
    assert e0.verdict == "verified-yes"
    e1 = estimation.estimate_energy(
        estimation.SessionConfig(hm.DecisionProblem(math.pi / 2), shots=2000,
                                 seed=32))
    assert abs(e1.e_est - 1.0) <= 3 * e1.e_err
    noisy = estimation.estimate_energy(
        estimation.SessionConfig(hm.DecisionProblem(0.0), shots=2000,
                                 lam=0.05, seed=33))
    exact = estimation.exact_energy(hm.DecisionProblem(0.0), 0.05).e_est
    assert abs(noisy.e_est - exact) <= 3 * noisy.e_err


def test_exact_energy_closed_form():
    # derived oracle: E = 3.5 - 2 mu c^2 - mu^2 s^2 - 1.5 mu^3 c^2 - 1.5 mu^4 s^2
    for lam in (0.0, 0.03, 0.05):
        mu = 1 - lam
        for a in (0.0, 0.5, 1.0, math.pi / 2):
            got = estimation.exact_energy(hm.DecisionProblem(a), lam).e_est
            c2, s2 = math.cos(a) ** 2, math.sin(a) ** 2
            want = 3.5 - 2 * mu * c2 - mu ** 2 * s2 \
                - 1.5 * mu ** 3 * c2 - 1.5 * mu ** 4 * s2
            assert got == pytest.approx(want, abs=1e-10)


def test_monotone_noise():
    for alpha in (0.0, 0.7, 1.4):
        curve = [estimation.exact_energy(hm.DecisionProblem(alpha), lam).e_est
                 for lam in np.arange(0.0, 0.101, 0.01)]
        assert all(b >= a - 1e-12 for a, b in zip(curve, curve[1:]))


def test_rejection_rate_structure():
    rates0 = estimation.rejection_rates(0.5, 0.0, "test")
    assert all(v["rate"] == pytest.approx(0.0, abs=1e-12) for v in rates0.values())
    rates = estimation.rejection_rates(0.5, 0.05, "measure")
    assert rates["Z1Z2"]["rate"] == 0.0
    assert rates["X1X2"]["rate"] >= rates["Z1X2"]["rate"] > 0
    assert rates["X1X2"]["rate"] >= rates["X1Z2"]["rate"] > 0
    ratest = estimation.rejection_rates(0.5, 0.05, "test")
    assert all(v["rate"] > 0 for v in ratest.values())


# ---------------------------------------------------------------------------
# extended protocol
# ---------------------------------------------------------------------------


def test_term_m_value_branches():
    assert extended.term_m_value("II", 1, 1) == 1
    assert extended.term_m_value("ZI", 1, 0) == -1
    assert extended.term_m_value("IZ", 0, 1) == -1
    assert extended.term_m_value("ZX", 1, 1) == 1


def test_r_rule():
    # r(l) = 1 iff the measured eigenvalue matches the coefficient sign
    assert (1 if extended.term_m_value("ZI", 1, 0) == -1 else 0) == 1
    assert (1 if extended.term_m_value("ZI", 0, 0) == -1 else 0) == 0


def test_thresholds():
    c = hm.build_fixed_h(hm.DecisionProblem(0.0)).c_value()
    t0, t1 = extended.thresholds(c)
    assert t0 == pytest.approx((1 + 0.4 / c) / 2)
    assert t1 == pytest.approx((1 + 0.5 / c) / 2)
    assert t0 < t1


def test_r_est_converges_to_theory():
    for alpha, seed in [(0.0, 1), (0.8, 2)]:
        cfg = estimation.SessionConfig(hm.DecisionProblem(alpha), seed=seed)
        stats = extended.extended_protocol(cfg, 30000,
                                           rng=np.random.default_rng(seed))
        theory = extended.theoretical_r(cfg.problem)
        sigma = 0.5 / math.sqrt(stats.n_measure)
        assert abs(stats.r_est - theory) < 3 * sigma


def test_extended_accepts_and_rejects():
    ok = extended.extended_protocol(
        estimation.SessionConfig(hm.DecisionProblem(0.0), seed=3), 10000,
        rng=np.random.default_rng(3))
    assert ok.accept
    bad = extended.extended_protocol(
        estimation.SessionConfig(hm.DecisionProblem(math.pi / 2), seed=4),
        10000, rng=np.random.default_rng(4))
    assert not bad.accept and bad.r_est >= bad.t1 - 3 * 0.5 / math.sqrt(bad.n_measure)


def test_wire_and_fast_paths_agree_statistically():
    cfg = estimation.SessionConfig(hm.DecisionProblem(0.4), seed=6)
    prv = prover.HonestProver(rand.prover_rng(6))
    chan = verifier.InProcessChannel(prv)
    wire = extended.extended_protocol_wire(cfg, 600, chan,
                                           rng=rand.verifier_rng(6))
    fast = extended.extended_protocol(cfg, 20000, rng=np.random.default_rng(6))
    sigma = 0.5 * math.sqrt(1 / wire.n_measure + 1 / fast.n_measure)
    assert abs(wire.r_est - fast.r_est) < 4 * sigma


def test_majority_vote_tie_resolves_pessimistically():
    cfg = estimation.SessionConfig(hm.DecisionProblem(0.0), seed=8)
    stats = extended.extended_protocol(cfg, 2000, repetitions=2,
                                       rng=np.random.default_rng(8))
    # IZ and ZZ terms have <P> = 0 at alpha = 0: votes split, ties -> 0,
    # so r_est drops strictly below the odd-repetition value 1/2
    assert stats.r_est < 0.5


# ---------------------------------------------------------------------------
# transcripts and messages
# ---------------------------------------------------------------------------


def test_transcript_round_trip(tmp_path):
    prv = prover.HonestProver(rand.prover_rng(3))
    chan = verifier.InProcessChannel(prv)
    t = messages.Transcript()
    verifier.run_session(hm.DecisionProblem(0.5), (1, 0), chan,
                         rand.verifier_rng(3), transcript=t)
    path = tmp_path / "t.json"
    t.save(path)
    back = messages.Transcript.load(path)
    assert back.lines == t.lines
    types = [m["type"] for m in back.messages()]
    assert types[:3] == ["CIRCUIT", "ANSWER", "KEYS"]
    assert types[-1] == "VERDICT"


def test_unknown_fields_rejected():
    with pytest.raises(messages.ProtocolError):
        messages.decode('{"type":"KEYS","k1":0,"k2":1,"extra":5}')
    with pytest.raises(messages.ProtocolError):
        messages.decode('{"type":"KEYS","k1":0}')
    with pytest.raises(messages.ProtocolError):
        messages.decode('{"type":"NOPE"}')
    with pytest.raises(messages.ProtocolError):
        messages.decode('{"type":"COMMIT","y1":[0,2],"y2":[0,0]}')
    with pytest.raises(messages.ProtocolError):
        messages.decode("not json")


def test_field_order_is_irrelevant():
    a = messages.decode('{"k1":1,"k2":0,"type":"KEYS"}')
    b = messages.decode('{"type":"KEYS","k2":0,"k1":1}')
    assert a == b


def test_sidecar_never_on_wire():
    prv = prover.HonestProver(rand.prover_rng(12))
    chan = verifier.InProcessChannel(prv)
    t = messages.Transcript()
    _, sidecar = verifier.run_session(hm.DecisionProblem(0.2), (1, 1), chan,
                                      rand.verifier_rng(12), transcript=t)
    wire_bytes = "\n".join(t.lines)
    assert "trapdoor" not in wire_bytes
    assert "preimages" not in wire_bytes
    assert "alpha_effective" not in wire_bytes
    assert sidecar["keys"][0]["trapdoor_preimages"]  # sidecar does hold it


# ---------------------------------------------------------------------------
# quantumness
# ---------------------------------------------------------------------------


def test_quantumness_honest_perfect_at_m2():
    rng = rand.generator(1, 9)
    res = __import__("cvqc.protocol.quantumness",
                     fromlist=["quantumness_demo"]).quantumness_demo(2, 300, rng)
    assert res["honest"]["p_A"] == 1.0
    assert res["honest"]["p_B"] == 1.0
    assert res["classical_baseline"]["p_A"] == 1.0
    assert res["classical_baseline"]["p_B"] == 1.0


def test_quantumness_noise_degrades_p_b():
    from cvqc.protocol import quantumness
    rng = rand.generator(2, 9)
    res = quantumness.quantumness_demo(2, 1500, rng, lam=0.3)
    assert res["honest"]["p_B"] < 1.0


def test_quantumness_rejects_bad_function():
    from cvqc.protocol import quantumness
    fn = quantumness.TwoToOneFunction(2, 0, (0, 1))
    with pytest.raises(ValueError):
        fn.check_two_to_one()
