"""Experiment runner CLI.

Subcommands reproduce every figure's data and run the interactive proof,
in-process or across a process/TCP boundary:

  sweep           energy-vs-alpha curves (CSV, optional PNG)
  verify          extended verification run -> verdict JSON
  rounds          per-basis rejection rates (CSV, optional PNG)
  compile-report  native gate counts and fidelity budgets (JSON)
  quantumness     claw-based quantumness interaction (JSON)
  prover          serve the prover side of the wire protocol (stdio or TCP)
  report          standard bundle of CSVs and figures into a directory

Exit codes: 0 success, 2 flag errors, 3 I/O errors, 4 transport failures.
The seed falls back to the CVQC_SEED environment variable, then 0.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import socket
import sys

import numpy as np

from . import compile as ioncompile
from . import hamiltonian, noise, rand, runio
from .protocol import (estimation, extended, messages, prover as prover_mod,
                       quantumness, verifier)

EXIT_OK = 0
EXIT_IO = 3
EXIT_TRANSPORT = 4


def _seed_default() -> int:
    env = os.environ.get("CVQC_SEED")
    return int(env) if env else 0


def _parse_alphas(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        return np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"--alphas wants start:stop:count, got {spec!r}") from exc


def _problem(alpha: float, variant: str) -> hamiltonian.DecisionProblem:
    return hamiltonian.DecisionProblem(alpha, variant.upper())


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def cmd_sweep(args) -> int:
    manifest = runio.RunManifest("sweep", _config_echo(args), args.seed)
    problem = _problem(0.0, args.variant)
    rng = rand.generator(args.seed, 2)
    if args.shots is None:
        # mirror the run counts of the two estimation modes
        args.shots = 400 if args.mode == "direct" else 2000
    points = noise.energy_curve(problem, args.lam, args.alphas,
                                mode=args.mode, shots=args.shots, rng=rng)
    rows = [(p.alpha, p.e_est, p.e_err, args.lam, args.variant.upper(),
             0 if args.mode == "exact" else args.shots, args.seed, args.mode)
            for p in points]
    outputs = [args.out]
    runio.write_csv(args.out, runio.CURVE_COLUMNS, rows)
    if args.plot:
        from . import plotting
        png = os.path.splitext(args.out)[0] + ".png"
        plotting.render_sweep(points, png, args.variant.upper(), args.lam)
        outputs.append(png)
    manifest.finish(outputs)
    manifest.save(args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _make_channel(args, claim: str):
    spec = args.prover
    if spec == "inproc":
        prv = prover_mod.build_prover(args.cheat, rand.prover_rng(args.seed),
                                      lam=args.lam, claim=claim,
                                      alpha_wrong=args.alpha_wrong)
        return verifier.InProcessChannel(prv)
    if spec.startswith("exec:"):
        return verifier.SubprocessChannel(spec[len("exec:"):].split())
    if spec.startswith("tcp:"):
        host, port = spec[len("tcp:"):].rsplit(":", 1)
        return verifier.TcpChannel(host, int(port))
    raise argparse.ArgumentTypeError(f"bad --prover {spec!r}")


def cmd_verify(args) -> int:
    manifest = runio.RunManifest("verify", _config_echo(args), args.seed)
    original = _problem(args.alpha, args.variant)
    effective = (original if args.claim == "yes"
                 else hamiltonian.reduce_no_claim(original))
    cfg = estimation.SessionConfig(effective, shots=max(args.shots, 1),
                                   lam=args.lam, seed=args.seed)
    transcript = messages.Transcript()
    # the honest in-process run uses the vectorized sessions (identical
    # statistics, established by test); anything needing real message flow
    # goes through the wire
    use_wire = (args.prover != "inproc" or args.cheat != "none"
                or args.transcript is not None)
    sidecars: list = []
    try:
        if use_wire:
            channel = _make_channel(args, args.claim)
            try:
                stats = extended.extended_protocol_wire(
                    cfg, args.n_terms, channel,
                    rng=rand.verifier_rng(args.seed), transcript=transcript,
                    wire_problem=original, expected_claim=args.claim,
                    repetitions=args.shots, sidecars=sidecars)
            finally:
                channel.close()
        else:
            stats = extended.extended_protocol(
                cfg, args.n_terms, repetitions=args.shots,
                rng=rand.verifier_rng(args.seed))
        verdict = "accept" if stats.accept else "reject"
        reason = None
    except messages.ProtocolError as exc:
        verdict, reason = "reject", f"protocol_error: {exc}"
        stats = None

    out = {"verdict": verdict, "claim": args.claim, "alpha": args.alpha,
           "variant": args.variant.upper(), "lambda": args.lam,
           "seed": args.seed, "reason": reason}
    if stats is not None:
        out.update({"r_est": stats.r_est, "T0": stats.t0, "T1": stats.t1,
                    "c": stats.c, "n_terms": stats.n_terms,
                    "p_t": stats.p_test_reject, "p_m": stats.p_measure_reject,
                    "p_accept": stats.p_accept})
    outputs = []
    if args.transcript:
        transcript.save(args.transcript)
        out["transcript_path"] = args.transcript
        outputs.append(args.transcript)
        # verifier-private annotations live beside the transcript, never on it
        sidecar_path = args.transcript + ".sidecar.json"
        runio.write_json(sidecar_path, sidecars)
        out["sidecar_path"] = sidecar_path
        outputs.append(sidecar_path)
    text = runio.dump_json(out)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        outputs.append(args.out)
    sys.stdout.write(text)
    manifest.finish(outputs)
    if args.out:
        manifest.save(args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# rounds
# ---------------------------------------------------------------------------


def cmd_rounds(args) -> int:
    manifest = runio.RunManifest("rounds", _config_echo(args), args.seed)
    rng = rand.generator(args.seed, 3)
    rates = estimation.rejection_rates(args.alpha, args.lam, args.round,
                                       shots=args.shots, rng=rng)
    rows = [(name, args.round, r["rate"], r["err"], args.alpha, args.lam,
             args.shots, args.seed)
            for name, r in rates.items()]
    runio.write_csv(args.out, runio.ROUNDS_COLUMNS, rows)
    outputs = [args.out]
    if args.plot:
        from . import plotting
        png = os.path.splitext(args.out)[0] + ".png"
        plotting.render_rounds(rates, png, args.round, args.lam, args.alpha)
        outputs.append(png)
    manifest.finish(outputs)
    manifest.save(args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compile-report / quantumness
# ---------------------------------------------------------------------------


def cmd_compile_report(args) -> int:
    report = ioncompile.compile_report(args.alpha)
    if args.keys != "all":
        report["delegation"] = {args.keys: report["delegation"][args.keys]}
    exp = estimation.exact_expectations(math.pi / 2, 0.0)
    report["bell_fidelity_ideal"] = ioncompile.bell_fidelity_estimate(
        exp["Z1Z2"], exp["X1X2"])
    text = runio.dump_json(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_quantumness(args) -> int:
    rng = rand.generator(args.seed, 4)
    res = quantumness.quantumness_demo(args.m_bits, args.trials, rng,
                                       lam=args.lam)
    if args.prover == "classical-baseline":
        res["selected"] = "classical_baseline"
        sys.stderr.write("note: " + res["note"] + "\n")
    text = runio.dump_json(res)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# prover (the external side of the wire)
# ---------------------------------------------------------------------------


def cmd_prover(args) -> int:
    prv = prover_mod.build_prover(args.cheat, rand.prover_rng(args.seed),
                                  lam=args.lam, claim=args.claim,
                                  alpha_wrong=args.alpha_wrong)
    if args.listen is None:
        verifier.serve_prover(prv, sys.stdin, sys.stdout)
        return EXIT_OK
    srv = socket.create_server(("127.0.0.1", args.listen))
    port = srv.getsockname()[1]
    sys.stderr.write(f"prover listening on 127.0.0.1:{port}\n")
    sys.stderr.flush()
    conn, _ = srv.accept()
    with conn:
        reader = conn.makefile("r")
        writer = conn.makefile("w")
        verifier.serve_prover(prv, reader, writer)
    srv.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# report bundle
# ---------------------------------------------------------------------------


def cmd_report(args) -> int:
    from . import plotting

    os.makedirs(args.outdir, exist_ok=True)
    manifest = runio.RunManifest("report", _config_echo(args), args.seed)
    outputs = []
    grid = np.linspace(0.0, math.pi / 2, 9)
    rng = rand.generator(args.seed, 2)
    jobs = [("p0_exact", "P0", args.lam, "exact"),
            ("p0_delegated", "P0", args.lam, "delegated"),
            ("p0_ideal", "P0", 0.0, "exact"),
            ("p1_exact", "P1", args.lam, "exact"),
            ("p0_direct", "P0", args.lam, "direct")]
    for name, variant, lam, mode in jobs:
        problem = hamiltonian.DecisionProblem(0.0, variant)
        pts = noise.energy_curve(problem, lam, grid, mode=mode,
                                 shots=args.shots, rng=rng)
        csv = os.path.join(args.outdir, f"sweep_{name}.csv")
        rows = [(p.alpha, p.e_est, p.e_err, lam, variant,
                 0 if mode == "exact" else args.shots, args.seed, mode)
                for p in pts]
        runio.write_csv(csv, runio.CURVE_COLUMNS, rows)
        png = os.path.join(args.outdir, f"sweep_{name}.png")
        plotting.render_sweep(pts, png, variant, lam)
        outputs += [csv, png]

    for round_type in ("test", "measure"):
        rates = estimation.rejection_rates(args.alpha, args.lam, round_type)
        csv = os.path.join(args.outdir, f"rounds_{round_type}.csv")
        rows = [(name, round_type, r["rate"], r["err"], args.alpha, args.lam,
                 0, args.seed) for name, r in rates.items()]
        runio.write_csv(csv, runio.ROUNDS_COLUMNS, rows)
        png = os.path.join(args.outdir, f"rounds_{round_type}.png")
        plotting.render_rounds(rates, png, round_type, args.lam, args.alpha)
        outputs += [csv, png]

    creport = ioncompile.compile_report(args.alpha)
    cpath = os.path.join(args.outdir, "compile_report.json")
    runio.write_json(cpath, creport)
    outputs.append(cpath)

    manifest.finish(outputs)
    manifest.save(os.path.join(args.outdir, "report"))
    sys.stdout.write(runio.dump_json({"outdir": args.outdir,
                                      "files": sorted(outputs)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and not isinstance(v, np.ndarray)} | (
        {"alphas": [float(a) for a in args.alphas]}
        if hasattr(args, "alphas") else {})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cvqc",
        description="Simulate classical verification of a quantum computation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_seed_default(),
                       help="RNG seed (or CVQC_SEED env var; default 0)")
        p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                       help="single-qubit depolarizing rate")

    p = sub.add_parser("sweep", help="energy curve over an alpha grid")
    common(p)
    p.add_argument("--variant", choices=("p0", "p1"), default="p0")
    p.add_argument("--alphas", type=_parse_alphas,
                   default=_parse_alphas("0:1.5708:9"),
                   help="grid as start:stop:count (radians)")
    p.add_argument("--shots", type=int, default=None,
                   help="runs per setting (default 2000 delegated, 400 direct)")
    p.add_argument("--mode", choices=("delegated", "direct", "exact"),
                   default="delegated")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--plot", action="store_true",
                   help="render a PNG next to the CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the extended verification protocol")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--claim", choices=("yes", "no"), default="yes")
    p.add_argument("--variant", choices=("p0", "p1"), default="p0")
    p.add_argument("--n-terms", type=int, default=1000)
    p.add_argument("--shots", type=int, default=1,
                   help="measurement repetitions per sampled term (odd "
                        "avoids majority ties)")
    p.add_argument("--prover", default="inproc",
                   help="inproc | exec:CMD | tcp:HOST:PORT")
    p.add_argument("--cheat", default="none",
                   choices=("none", "guess", "wrong-alpha", "inconsistent"),
                   help="cheating strategy of the in-process prover")
    p.add_argument("--alpha-wrong", type=float, default=None,
                   help="prepared angle for --cheat wrong-alpha")
    p.add_argument("--transcript", default=None,
                   help="write the wire transcript JSON here")
    p.add_argument("--out", default=None, help="write the verdict JSON here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rounds", help="per-basis rejection rates")
    common(p)
    p.add_argument("--round", choices=("test", "measure"), required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--shots", type=int, default=0,
                   help="0 = exact probabilities")
    p.add_argument("--out", default="rounds.csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_rounds)

    p = sub.add_parser("compile-report",
                       help="gate counts and fidelity budgets")
    p.add_argument("--keys", default="all",
                   choices=("all", "00", "01", "10", "11"))
    p.add_argument("--alpha", type=float, default=0.12 * math.pi / 2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compile_report)

    p = sub.add_parser("quantumness", help="claw-based quantumness interaction")
    common(p)
    p.add_argument("--m-bits", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--prover", choices=("honest", "classical-baseline"),
                   default="honest")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_quantumness)

    p = sub.add_parser("prover", help="serve the prover over stdio or TCP")
    common(p)
    p.add_argument("--listen", type=int, default=None,
                   help="TCP port (omit for stdio)")
    p.add_argument("--cheat", default="none",
                   choices=("none", "guess", "wrong-alpha", "inconsistent"))
    p.add_argument("--claim", choices=("yes", "no"), default=None)
    p.add_argument("--alpha-wrong", type=float, default=None)
    p.set_defaults(func=cmd_prover)

    p = sub.add_parser("report", help="standard CSV+PNG bundle")
    common(p)
    p.add_argument("--alpha", type=float, default=0.12 * math.pi / 2)
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--outdir", default="report")
    p.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except verifier.TransportError as exc:
        sys.stderr.write(f"transport failure: {exc}\n")
        return EXIT_TRANSPORT
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
