"""Artifact writers: trace CSVs, summary JSON, figures, manifests, tables.

Figures are rendered headlessly to files next to the delimited output so a
run directory is self-contained: trace, summary, posterior plot, manifest.
"""

import hashlib
import json
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def write_trace_csv(trace, path):
    """One row per retained sample: iteration, components, acceptance flag."""
    samples = np.atleast_2d(trace.samples)
    dim = samples.shape[1]
    cols = ["iter"] + [f"theta_{k+1}" for k in range(dim)] + ["accepted"]
    sign = trace.extras.get("sign")
    if sign is not None:
        cols.append("sign")
    thin = trace.meta.get("thin", 1)
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for r in range(samples.shape[0]):
            it = trace.burn_in + (r + 1) * thin
            row = [str(it)] + [repr(v) for v in samples[r]] + [str(int(trace.accepted[it - 1]))]
            if sign is not None:
                row.append(str(int(sign[r])))
            f.write(",".join(row) + "\n")


def write_summary_json(summary, path):
    pathlib.Path(path).write_text(summary.to_json())


def posterior_figure(trace, model, path):
    """Marginal posterior histograms, one panel per component."""
    samples = np.atleast_2d(trace.samples)
    dim = samples.shape[1]
    fig, axes = plt.subplots(1, dim, figsize=(4 * dim, 3), squeeze=False)
    for k in range(dim):
        ax = axes[0, k]
        ax.hist(samples[:, k], bins=60, density=True, color="steelblue", alpha=0.8)
        ax.set_xlabel(f"theta_{k+1}")
        if k == 0:
            ax.set_ylabel("posterior density")
    fig.suptitle(trace.algorithm)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def oracle_figure(grid, weights, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    dx = grid[1] - grid[0] if len(grid) > 1 else 1.0
    ax.plot(grid, weights / dx, color="firebrick")
    ax.set_xlabel("theta")
    ax.set_ylabel("exact posterior density")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def scaling_figure(rows, slope, path):
    sizes = [r["size"] for r in rows]
    times = [r["seconds_per_iter"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(sizes, times, "o-", color="darkgreen")
    label = "slope undefined" if slope is None else f"log-log slope = {slope:.2f}"
    ax.set_title(label)
    ax.set_xlabel("data size n")
    ax.set_ylabel("seconds per iteration")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_manifest(out_dir):
    """Record a sha256 for every artifact in the directory."""
    out = pathlib.Path(out_dir)
    entries = {}
    for p in sorted(out.iterdir()):
        if p.name == "manifest.json" or p.is_dir():
            continue
        entries[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    (out / "manifest.json").write_text(json.dumps(entries, indent=2))


def render_table(summaries, title="") -> str:
    """Plain-text results table: Mean, 95%HPD, ESS, Acc, Time, ESS/Time."""
    lines = []
    if title:
        lines.append(title)
    header = f"{'':18s}{'Mean':>8s} {'95%HPD':>18s} {'ESS':>10s} {'Acc':>6s} {'Time(s)':>10s} {'ESS/Time':>10s}"
    lines.append(header)
    lines.append("-" * len(header))
    for s in summaries:
        for k in range(len(s.mean)):
            label = s.algorithm if k == 0 else ""
            comp = f"[{k+1}]" if len(s.mean) > 1 else ""
            hpd = f"({s.hpd[k][0]:.2f},{s.hpd[k][1]:.2f})"
            lines.append(
                f"{label:14s}{comp:4s}{s.mean[k]:8.3f} {hpd:>18s} {s.ess[k]:10.2f} "
                f"{s.acceptance:6.2f} {s.wall_time:10.2f} {s.ess_per_sec[k]:10.2f}"
            )
    return "\n".join(lines)
