"""Deterministic CSV/JSON output and run manifests.

Identical flags and seed must produce byte-identical files: floats are
serialized with repr (shortest round-trip), JSON keys are sorted, and CSV
columns are fixed and versioned by a `# schema=1` comment line. Every output
file is accompanied by a `<name>.manifest.json` recording the subcommand, the
full configuration echo, the seed, the source revision, the wall time, and the
output paths (wall time varies between runs; the data files do not).
"""
from __future__ import annotations

import json
import os
import subprocess
import time
from dataclasses import dataclass, field

CSV_SCHEMA = 1

CURVE_COLUMNS = ("alpha", "e_est", "e_err", "lambda", "variant", "shots",
                 "seed", "mode")
ROUNDS_COLUMNS = ("basis", "round", "reject_rate", "reject_err", "alpha",
                  "lambda", "shots", "seed")


def fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, columns, rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            if len(row) != len(columns):
                raise ValueError("row width does not match columns")
            fh.write(",".join(fmt(v) for v in row) + "\n")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dump_json(obj))


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int
    outputs: list = field(default_factory=list)
    git: str = field(default_factory=git_describe)
    wall_time_s: float = 0.0
    _t0: float = field(default_factory=time.monotonic, repr=False)

    def finish(self, outputs) -> None:
        self.outputs = [str(p) for p in outputs]
        self.wall_time_s = round(time.monotonic() - self._t0, 3)

    def save(self, base_path: str) -> str:
        path = str(base_path) + ".manifest.json"
        write_json(path, {
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "git": self.git,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        })
        return path
