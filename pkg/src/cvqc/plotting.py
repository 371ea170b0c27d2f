"""Figure rendering for the report path.

Figures are a convenience next to the delimited output; the CSV stays the
interchange format. All rendering uses the Agg backend and writes PNG files.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import hamiltonian

_THRESHOLD_STYLE = dict(color="0.4", lw=0.8, ls=":")


def render_sweep(points, path: str, variant: str = "P0", lam: float = 0.0,
                 title: str | None = None) -> str:
    """Energy-vs-alpha curve with the verification thresholds and the ideal."""
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    alphas = [p.alpha for p in points]
    es = [p.e_est for p in points]
    errs = [p.e_err for p in points]
    ax.errorbar(alphas, es, yerr=errs, fmt="o-", ms=3.5, lw=1.0,
                capsize=2, label=f"estimate ($\\lambda$={lam:g})")
    ideal = [(math.sin(a) ** 2 if variant == "P0" else math.cos(a) ** 2)
             for a in alphas]
    ax.plot(alphas, ideal, "r--", lw=1.0, label="ideal clock state")
    ax.axhline(hamiltonian.ENERGY_YES, **_THRESHOLD_STYLE)
    ax.axhline(hamiltonian.ENERGY_NO, **_THRESHOLD_STYLE)
    ax.text(0.02, hamiltonian.ENERGY_YES + 0.01, "yes threshold", fontsize=7,
            color="0.3")
    ax.set_xlabel(r"$\alpha$ (rad)")
    ax.set_ylabel(r"$E^{\mathrm{est}}$")
    ax.set_title(title or f"Energy estimate, variant {variant}")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path


def render_rounds(rates: dict, path: str, round_type: str, lam: float,
                  alpha: float) -> str:
    """Per-basis rejection-rate bars for a test or measurement round."""
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    names = list(rates)
    vals = [rates[n]["rate"] for n in names]
    errs = [rates[n]["err"] for n in names]
    ax.bar(range(len(names)), vals, yerr=errs, capsize=3, color="#4878b0")
    ax.set_xticks(range(len(names)), names)
    ax.set_ylabel("rejection probability")
    ax.set_title(f"{round_type} round, $\\lambda$={lam:g}, "
                 f"$\\alpha$={alpha:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path
