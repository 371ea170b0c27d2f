"""Process-boundary conformance: stdio and TCP transports, leak scanning."""
import json
import socket
import subprocess
import sys
import threading
import time

import pytest

from cvqc import hamiltonian as hm
from cvqc import rand
from cvqc.protocol import estimation, extended, messages, prover, verifier

PROVER_CMD = [sys.executable, "-m", "cvqc", "prover"]


def run_verify(channel, seed, n_terms=25, alpha=0.3, lam=0.05):
    transcript = messages.Transcript()
    cfg = estimation.SessionConfig(hm.DecisionProblem(alpha), lam=lam,
                                   seed=seed)
    stats = extended.extended_protocol_wire(cfg, n_terms, channel,
                                            rng=rand.verifier_rng(seed),
                                            transcript=transcript)
    return stats, transcript


def test_subprocess_transcript_matches_inprocess():
    seed, lam = 11, 0.05
    inproc = verifier.InProcessChannel(
        prover.HonestProver(rand.prover_rng(seed), lam=lam))
    s_in, t_in = run_verify(inproc, seed, lam=lam)

    chan = verifier.SubprocessChannel(
        PROVER_CMD + ["--seed", str(seed), "--lambda", str(lam)])
    try:
        s_ex, t_ex = run_verify(chan, seed, lam=lam)
    finally:
        chan.close()

    assert t_in.lines == t_ex.lines          # byte-identical wire traffic
    assert s_in.r_est == s_ex.r_est
    assert s_in.accept == s_ex.accept


def test_tcp_loopback_transcript_matches_inprocess():
    seed = 4
    proc = subprocess.Popen(PROVER_CMD + ["--seed", str(seed), "--listen", "0"],
                            stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stderr.readline()
        port = int(line.rsplit(":", 1)[1])
        chan = verifier.TcpChannel("127.0.0.1", port)
        s_tcp, t_tcp = run_verify(chan, seed, n_terms=12, lam=0.0)
        chan.close()
    finally:
        proc.wait(timeout=10)

    inproc = verifier.InProcessChannel(
        prover.HonestProver(rand.prover_rng(seed)))
    s_in, t_in = run_verify(inproc, seed, n_terms=12, lam=0.0)
    assert t_tcp.lines == t_in.lines
    assert s_tcp.r_est == s_in.r_est


def test_prover_bound_traffic_never_contains_key_material():
    seed = 6
    inproc = verifier.InProcessChannel(
        prover.HonestProver(rand.prover_rng(seed)))
    _, transcript = run_verify(inproc, seed, n_terms=30, lam=0.0)
    verifier_to_prover = [m for m in transcript.messages()
                          if m["type"] in ("CIRCUIT", "KEYS", "ROUND",
                                           "VERDICT")]
    assert verifier_to_prover
    blob = json.dumps(verifier_to_prover)
    for marker in ("trapdoor", "preimage", "_table", "invert"):
        assert marker not in blob
    # KEYS messages carry the labels and nothing else
    for m in verifier_to_prover:
        if m["type"] == "KEYS":
            assert set(m) == {"type", "k1", "k2"}


def test_transport_error_exit_path():
    with pytest.raises(verifier.TransportError):
        verifier.SubprocessChannel(["/nonexistent-prover-binary"])
    # connecting to a dead port
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    dead_port = sock.getsockname()[1]
    sock.close()
    with pytest.raises(verifier.TransportError):
        verifier.TcpChannel("127.0.0.1", dead_port)


def test_protocol_violation_detected():
    class RudeProver(prover.HonestProver):
        def handle(self, msg):
            reply = super().handle(msg)
            if msg["type"] == "KEYS":
                return {"type": "ANSWER", "claim": "yes"}  # out of order
            return reply

    chan = verifier.InProcessChannel(RudeProver(rand.prover_rng(1)))
    with pytest.raises(messages.ProtocolError):
        verifier.run_session(hm.DecisionProblem(0.2), (0, 0), chan,
                             rand.verifier_rng(1))


def test_claim_mismatch_is_protocol_error():
    chan = verifier.InProcessChannel(
        prover.HonestProver(rand.prover_rng(2), claim="no"))
    cfg = estimation.SessionConfig(hm.DecisionProblem(0.1), seed=2)
    with pytest.raises(messages.ProtocolError):
        extended.extended_protocol_wire(cfg, 5, chan,
                                        rng=rand.verifier_rng(2),
                                        expected_claim="yes")


def test_no_claim_flows_through_reduction():
    # claim "no" at alpha: the prover proves the reduced instance
    seed = 13
    alpha = 1.45  # cos^2 = 0.015 < 1/10 -> true answer "no"
    original = hm.DecisionProblem(alpha)
    effective = hm.reduce_no_claim(original)
    cfg = estimation.SessionConfig(effective, seed=seed)
    chan = verifier.InProcessChannel(
        prover.HonestProver(rand.prover_rng(seed), claim="no"))
    stats = extended.extended_protocol_wire(cfg, 300, chan,
                                            rng=rand.verifier_rng(seed),
                                            wire_problem=original,
                                            expected_claim="no")
    assert stats.accept  # the reduced instance has low energy


def test_cli_transcript_sidecar_separation(tmp_path):
    from cvqc import cli

    t_path = tmp_path / "t.json"
    rc = cli.main(["verify", "--alpha", "0.2", "--n-terms", "12",
                   "--seed", "3", "--transcript", str(t_path)])
    assert rc == 0
    wire = t_path.read_text()
    sidecar = (tmp_path / "t.json.sidecar.json").read_text()
    assert "trapdoor_preimages" in sidecar
    assert "alpha_effective" in sidecar
    for marker in ("trapdoor", "preimage", "alpha_effective"):
        assert marker not in wire
