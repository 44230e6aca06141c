"""Delimited output and companion figures.

CSV floats carry 12 significant digits so identical runs produce
identical bytes.  When an output path is given, the same data is also
rendered to a PNG next to the CSV for quick visual inspection.
"""

from __future__ import annotations

import numpy as np


def format_value(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        return "%.12g" % float(x)
    return str(x)


def csv_lines(header, rows):
    yield ",".join(header)
    for row in rows:
        yield ",".join(format_value(v) for v in row)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in csv_lines(header, rows):
            fh.write(line)
            fh.write("\n")


def figure_path(csv_path) -> str:
    s = str(csv_path)
    stem = s[: -len(".csv")] if s.endswith(".csv") else s
    return stem + ".png"


def _agg_axes():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    return plt, fig, ax


def render_haar_figure(stats: np.ndarray, summary, path):
    """Histogram of the largest basis probability with the one-bit cut."""
    plt, fig, ax = _agg_axes()
    ax.hist(stats[:, 0], bins=80, color="#4878cf", alpha=0.85)
    ax.axvline(0.5, color="#d65f5f", linestyle="--", linewidth=1.2)
    ax.set_xlabel("largest basis probability")
    ax.set_ylabel("samples")
    ax.set_title(
        "d=%d, N=%d: fraction at >= 1 bit %.4f (predicted %.4f)"
        % (
            summary.dimension,
            summary.samples,
            summary.fraction_distillable,
            summary.predicted_fraction,
        )
    )
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_rate_scan_figure(rows, reference: float, path):
    """Per-copy rate against copy count with the regularized reference."""
    plt, fig, ax = _agg_axes()
    ns = [r[0] for r in rows]
    rates = [r[1] for r in rows]
    ax.plot(ns, rates, "o-", color="#4878cf", label="per-copy rate")
    ax.axhline(reference, color="#d65f5f", linestyle="--", label="relative entropy")
    ax.set_xlabel("copies n")
    ax.set_ylabel("bits per copy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
