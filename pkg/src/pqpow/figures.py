"""Figure rendering for CLI reports.

Each report command renders a PNG next to its machine-readable output.
Figures are a human-facing convenience: the JSON/CSV artifacts remain
the canonical outputs (and the only ones under the byte-determinism
contract). Everything renders through the Agg backend so no display is
required.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "render_bounds_figure",
    "render_compare_figure",
    "render_simulate_figure",
    "render_verify_figure",
]

_DPI = 120


def _finish(fig, path: str) -> str:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_bounds_figure(rows: list[dict], path: str) -> str:
    """Success-bound curves over the query budget, one line per (k, p)."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series: dict[tuple, list[tuple[int, float]]] = {}
    for row in rows:
        series.setdefault((row["k"], row["p"]), []).append(
            (row["N"], row["log10_exact"])
        )
    for (k, p), points in sorted(series.items()):
        points.sort()
        xs = [n for n, _ in points]
        ys = [y for _, y in points]
        ax.plot(xs, ys, marker="o", markersize=3, label=f"k={k}, p={p:g}")
    ax.set_xlabel("query budget N")
    ax.set_ylabel("log10 success bound")
    ax.set_title("Quantum search success bounds")
    if len(series) <= 12:
        ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)


def render_compare_figure(table: dict, path: str) -> str:
    """Adversarial-power comparison: expected PoWs and per-k bound decay."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
    expected = table["max_expected_adversarial_pows"]
    labels = ["classical", "quantum"]
    values = [expected["classical"], expected["quantum"]]
    left.bar(labels, values, color=["#777777", "#3b6ea5"])
    left.axhline(
        table["honest_majority"]["quantum"]["threshold"],
        color="crimson",
        linestyle="--",
        linewidth=1,
        label="honest-majority Q cap",
    )
    left.set_ylabel("expected adversarial PoWs over the window")
    left.set_title("Expected adversarial PoWs")
    left.legend(fontsize=7)

    ks = [row["k"] for row in table["per_k_bounds"]]
    logs = [row["main_exact_log"] / math.log(10) for row in table["per_k_bounds"]]
    right.plot(ks, logs, marker="s", markersize=3, color="#3b6ea5")
    right.set_xlabel("chain length k")
    right.set_ylabel("log10 chained-PoW bound")
    right.set_title("Chained-success bound decay")
    right.grid(True, alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)


def render_simulate_figure(report: dict, path: str) -> str:
    """Per-trial honest success rates and aggregate property pass rates."""
    trials = report["trials"]
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
    fractions = [t["honest_round_fraction"] for t in trials]
    left.plot(range(len(fractions)), fractions, "o", markersize=3, color="#3b6ea5")
    f_exact = report.get("f_exact")
    if isinstance(f_exact, float):
        left.axhline(f_exact, color="crimson", linestyle="--", linewidth=1,
                     label="exact rate")
        left.legend(fontsize=7)
    left.set_xlabel("trial")
    left.set_ylabel("fraction of rounds with an honest PoW")
    left.set_title("Honest mining rate")

    agg = report.get("aggregate", {})
    names = sorted(k for k in agg if k.endswith("_pass_rate"))
    if names:
        rates = [agg[k] for k in names]
        right.bar([n.replace("_pass_rate", "") for n in names], rates,
                  color="#3b6ea5")
        right.set_ylim(0, 1.05)
        right.axhline(1.0, color="#999999", linewidth=0.8)
        right.set_ylabel("pass rate across trials")
        right.tick_params(axis="x", labelrotation=20, labelsize=7)
    right.set_title("Property pass rates")
    fig.tight_layout()
    return _finish(fig, path)


def render_verify_figure(report: dict, path: str) -> str:
    """Claimed-constant violations (value vs limit) and worst-case slacks."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
    violations = report.get("constant_violations", [])
    if violations:
        by_strategy: dict[str, list[tuple[float, float]]] = {}
        for v in violations:
            by_strategy.setdefault(v["strategy"], []).append((v["limit"], v["value"]))
        for name, pts in sorted(by_strategy.items()):
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            left.loglog(xs, ys, "o", markersize=4, label=name, alpha=0.75)
        lims = [v for pair in by_strategy.values() for v in pair]
        lo = min(min(x, y) for x, y in lims) * 0.5
        hi = max(max(x, y) for x, y in lims) * 2.0
        left.plot([lo, hi], [lo, hi], "-", color="#999999", linewidth=0.8)
        left.legend(fontsize=7)
    left.set_xlabel("claimed limit")
    left.set_ylabel("measured norm")
    left.set_title("Claimed-constant violations (above diagonal)")

    gaps = {
        "recurrence": report.get("max_recurrence_slack", 0.0),
        "unitarity": report.get("max_unitarity_err", 0.0),
        "query path": report.get("max_query_path_gap", 0.0),
        "primal/dual": report.get("max_primal_dual_gap", 0.0),
        "mixture": report.get("max_mixture_gap", 0.0),
    }
    names = list(gaps)
    values = [max(gaps[n], 1e-18) for n in names]
    right.barh(names, values, color="#3b6ea5")
    right.set_xscale("log")
    right.set_xlabel("worst observed gap (log scale)")
    right.set_title("Identity-check slacks")
    fig.tight_layout()
    return _finish(fig, path)
