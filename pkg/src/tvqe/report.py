"""Report emission: delimited data files plus rendered figures.

Every run writes its iteration trace as CSV and its outcome histogram as
JSON, with matching PNG figures rendered alongside.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def write_trace_csv(trace, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "energy"])
        for it, energy in trace:
            writer.writerow([it, repr(float(energy))])


def write_histogram_json(histogram, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(histogram, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_json(data, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def plot_trace(traces, path, oracle_value=None, title="Energy trace"):
    """traces: {label: [(iter, energy), ...]} rendered on one axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, trace in traces.items():
        xs = [t[0] for t in trace]
        ys = [t[1] for t in trace]
        ax.plot(xs, ys, label=label, linewidth=1.2)
    if oracle_value is not None:
        ax.axhline(oracle_value, color="k", linestyle="--", linewidth=1.0,
                   label="oracle optimum")
    ax.set_xlabel("objective evaluation")
    ax.set_ylabel("expected energy")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_histogram(histograms, path, title="Outcome histogram"):
    """histograms: {label: {bitstring: count}} as grouped bars."""
    states = sorted({s for h in histograms.values() for s in h})
    width = 0.8 / max(len(histograms), 1)
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(states)), 4))
    for k, (label, hist) in enumerate(histograms.items()):
        xs = [i + k * width for i in range(len(states))]
        ys = [hist.get(s, 0) for s in states]
        ax.bar(xs, ys, width=width, label=label)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(states))])
    ax.set_xticklabels(states, rotation=90, fontsize=7)
    ax.set_xlabel("bitstring")
    ax.set_ylabel("counts")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_gate_stats_csv(rows, path):
    """rows: list of dicts with ansatz/su2/cnot/params/cost and optional
    published reference columns."""
    fields = ["ansatz", "su2", "cnot", "params", "cost",
              "ref_su2", "ref_cnot", "ref_params", "ref_cost"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})


def write_oracle_csv(problem, result, qubo, path):
    from .statevector import display

    n = problem.num_vars
    penalized = qubo.value_table()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bits", "objective", "penalized", "feasible"])
        for idx in range(2**n):
            writer.writerow([
                display(idx, n),
                repr(float(result.values[idx])),
                repr(float(penalized[idx])),
                int(result.feasible[idx]),
            ])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
