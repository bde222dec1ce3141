"""Emit plotting scripts next to experiment tables.

The scripts are written as text and never executed here; they need pandas and
matplotlib on whatever machine renders the figures.
"""

from __future__ import annotations

import csv
from pathlib import Path

_HEADER = '''"""Plot {kind} output. Generated by lmsr-market; edit freely."""
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

HERE = __file__.rsplit("/", 1)[0] if "/" in __file__ else "."
'''

_AXES_ONLY = '''
fig, ax = plt.subplots(figsize=(8, 4))
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.set_title("{kind} (no data)")
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''

_BODIES = {
    "trajectory": ("t", "price", '''
df = pd.read_csv(f"{{HERE}}/{table}")
fig, ax = plt.subplots(figsize=(8, 4))
for col in [c for c in df.columns if c.startswith("p_")]:
    ax.plot(df["t"], df[col], label=col)
if "x_0" in df.columns:
    ax2 = ax.twinx()
    ax2.plot(df["t"], df["x_0"], color="0.6", lw=0.8, label="x_0")
    ax2.set_ylabel("information x_0")
ax.set_xlabel("t")
ax.set_ylabel("price")
ax.legend(loc="upper left")
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''),
    "lorenz_demo": ("t", "x_1 / price", '''
df = pd.read_csv(f"{{HERE}}/{table}")
fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
for i, style in ((0, "-"), (1, "--")):
    top.plot(df["t"], df[f"x_ic{{i}}"], style, lw=0.8, label=f"x_1, ic {{i}}")
    bottom.plot(df["t"], df[f"p_ic{{i}}"], style, label=f"p(t), ic {{i}}")
top.set_ylabel("Lorenz x_1")
bottom.set_ylabel("price p")
bottom.set_xlabel("t")
top.legend()
bottom.legend()
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''),
    "interval_tracking": ("t", "price", '''
df = pd.read_csv(f"{{HERE}}/{table}")
fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(df["t"], df["p_1"], label="p(t)")
ax.plot(df["t"], df["x_0"], color="0.5", lw=0.8, label="x(t)")
ax.set_xlabel("t")
ax.legend()
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''),
    "lag_sweep": ("alpha", "phase ratio", '''
df = pd.read_csv(f"{{HERE}}/{table}")
fig, ax = plt.subplots(figsize=(7, 4.5))
for nu, grp in df.groupby("nu"):
    grp = grp.sort_values("alpha")
    line = ax.errorbar(grp["alpha"], grp["mean_ratio"], yerr=grp["ci_halfwidth"], fmt="o", capsize=3,
                       label=f"nu = {{nu}}")
    head = grp.head(5)
    if len(head) >= 2:
        slope, icpt = np.polyfit(head["alpha"], head["mean_ratio"], 1)
        xs = np.linspace(grp["alpha"].min(), grp["alpha"].max(), 50)
        ax.plot(xs, slope * xs + icpt, "--", color=line[0].get_color(), lw=0.8)
ax.set_xlabel("alpha (input gain)")
ax.set_ylabel("phase ratio (price / information)")
ax.legend()
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''),
    "multi_asset_mc": ("p_0", "p_1", '''
df = pd.read_csv(f"{{HERE}}/{table}")
fig, ax = plt.subplots(figsize=(5.5, 5))
for kind, grp in df.groupby("kind"):
    ax.scatter(grp["p_end_0"], grp["p_end_1"], s=6, label=kind)
ax.plot([0, 1, 0, 0], [0, 0, 1, 0], color="k", lw=0.8)
ax.set_xlabel("final p_0")
ax.set_ylabel("final p_1")
ax.legend(markerscale=3)
fig.tight_layout()
fig.savefig(f"{{HERE}}/{stem}.png", dpi=150)
'''),
}

PLOT_KINDS = tuple(_BODIES)


def _has_rows(table: Path) -> bool:
    if not table.exists():
        return False
    with open(table, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        return next(reader, None) is not None


def emit_plot_script(table, kind: str, out_path=None) -> Path:
    """Write a matplotlib script that plots ``table``; returns the script path."""
    if kind not in _BODIES:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    table = Path(table)
    stem = f"plot_{table.stem}"
    out_path = Path(out_path) if out_path else table.with_name(f"{stem}.py")
    xlabel, ylabel, body = _BODIES[kind]
    text = _HEADER.format(kind=kind)
    if _has_rows(table):
        text += body.format(table=table.name, stem=stem)
    else:
        text += _AXES_ONLY.format(kind=kind, xlabel=xlabel, ylabel=ylabel, stem=stem)
    out_path.write_text(text)
    return out_path
