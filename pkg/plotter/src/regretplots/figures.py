"""Render the two reference figures from simulation CSVs.

Output is deterministic vector graphics: the SVG hash salt is pinned and the
creation date stripped, so golden tests can compare a normalized text form
of the files across runs.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .tables import SchemaError, TraceTable

logger = logging.getLogger(__name__)

_SVG_RC = {
    "svg.hashsalt": "regretplots",
    "svg.fonttype": "path",
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 100,
}


def _save(fig, out_file: str | Path) -> None:
    fig.savefig(out_file, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_setup_regret(csv_dir: str | Path, setup_id: int,
                      out_file: str | Path) -> None:
    """Cumulative-regret curves for one setup, one line per privacy vector.

    Lines are seed means with a shaded min-max band; vectors with no seeds
    in the setup are skipped with a warning.
    """
    table = TraceTable.load(csv_dir)
    rounds = table.rounds[table.rounds["setup_id"] == setup_id]
    if rounds.empty:
        raise SchemaError(f"no rounds for setup {setup_id}")
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots()
        for vid in table.vector_ids():
            group = rounds[rounds["privacy_vector_id"].astype(str) == vid]
            if group.empty:
                logger.warning("setup %s has no seeds for privacy vector %s; "
                               "skipped", setup_id, vid)
                continue
            curves = np.stack([
                seed_rows.sort_values("t")["cum_regret"].to_numpy()
                for _, seed_rows in group.groupby("seed")])
            t = np.sort(group["t"].unique())
            ax.fill_between(t, curves.min(axis=0), curves.max(axis=0),
                            alpha=0.2)
            ax.plot(t, curves.mean(axis=0), label=vid)
        ax.set_xlabel("round")
        ax.set_ylabel("cumulative regret")
        ax.set_title(f"Cumulative regret by privacy vector (setup {setup_id})")
        ax.legend(title="privacy vector", fontsize=8)
        _save(fig, out_file)


def plot_normalized_average(csv_dir: str | Path,
                            out_file: str | Path) -> None:
    """Normalized regret averaged over the three setups, one curve per vector.

    Each setup's curves are divided by ``t * f_star`` (scale recovered from
    the summary), then averaged pointwise across setups and seeds.
    """
    table = TraceTable.load(csv_dir)
    missing = sorted(set((1, 2, 3)) - set(table.setups()))
    if missing:
        raise SchemaError(
            f"normalized average needs all three setups; missing {missing}")
    scales = {sid: table.oracle_scale(sid) for sid in (1, 2, 3)}
    horizons = table.rounds.groupby("setup_id")["t"].max()
    T = int(horizons.iloc[0])
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots()
        for vid in table.vector_ids():
            group = table.rounds[
                table.rounds["privacy_vector_id"].astype(str) == vid]
            curves = []
            for (sid, _), run in group.groupby(["setup_id", "seed"]):
                cum = run.sort_values("t")["cum_regret"].to_numpy()
                t = np.arange(1, len(cum) + 1)
                curves.append(cum / (t * scales[sid] / T))
            ax.plot(np.arange(1, T + 1), np.mean(curves, axis=0), label=vid)
        ax.set_xlabel("round")
        ax.set_ylabel("normalized regret")
        ax.set_title("Average normalized regret across setups")
        ax.legend(title="privacy vector", fontsize=8)
        _save(fig, out_file)


def normalized_svg_text(path: str | Path) -> str:
    """Comparison form for golden tests: comments and XML prologue dropped."""
    lines = []
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("<!--") or stripped.startswith("<?xml"):
            continue
        lines.append(stripped)
    return "\n".join(lines)
