"""Schema-validated access to the simulation CSV outputs.

The harness contract is fixed: per-run round files named
``rounds_setup{S}_vec{V}_seed{K}.csv`` plus one ``summary.csv``, with exact
column names and order. Loading validates both so downstream figures fail
loudly, naming the offending column, rather than silently misreading.
"""

from __future__ import annotations

from pathlib import Path

import pandas as pd

ROUND_COLUMNS = ["setup_id", "privacy_vector_id", "seed", "t", "phase",
                 "inst_regret", "cum_regret", "term1", "term2",
                 "safety_violation", "coverage"]
SUMMARY_COLUMNS = ["setup_id", "privacy_vector_id", "seed", "final_cum_regret",
                   "normalized_final", "violations_total", "coverage_fraction",
                   "bound_value"]


class SchemaError(ValueError):
    """A CSV file does not match the harness contract."""


def _check_columns(df: pd.DataFrame, expected: list[str], path: Path) -> None:
    got = list(df.columns)
    if got != expected:
        for i, name in enumerate(expected):
            if i >= len(got) or got[i] != name:
                raise SchemaError(
                    f"{path.name}: expected column {i} to be {name!r}, "
                    f"found {got[i] if i < len(got) else 'nothing'!r}")
        raise SchemaError(f"{path.name}: unexpected trailing columns {got[len(expected):]}")


class TraceTable:
    """Round and summary tables for one output directory."""

    def __init__(self, rounds: pd.DataFrame, summary: pd.DataFrame):
        self.rounds = rounds
        self.summary = summary

    @classmethod
    def load(cls, csv_dir: str | Path) -> "TraceTable":
        csv_dir = Path(csv_dir)
        round_files = sorted(csv_dir.glob("rounds_*.csv"))
        if not round_files:
            raise SchemaError(f"no round CSV files under {csv_dir}")
        frames = []
        for path in round_files:
            df = pd.read_csv(path)
            _check_columns(df, ROUND_COLUMNS, path)
            run_t = df["t"].to_numpy()
            if len(run_t) and not (run_t[1:] > run_t[:-1]).all():
                raise SchemaError(f"{path.name}: column 't' is not strictly increasing")
            frames.append(df)
        rounds = pd.concat(frames, ignore_index=True)
        summary_path = csv_dir / "summary.csv"
        if not summary_path.exists():
            raise SchemaError(f"missing {summary_path.name} under {csv_dir}")
        summary = pd.read_csv(summary_path)
        _check_columns(summary, SUMMARY_COLUMNS, summary_path)
        return cls(rounds, summary)

    def setups(self) -> list[int]:
        return sorted(self.rounds["setup_id"].unique())

    def vector_ids(self) -> list[str]:
        # deterministic legend order: lexicographic by identifier
        return sorted(map(str, self.rounds["privacy_vector_id"].unique()))

    def oracle_scale(self, setup_id: int) -> float:
        """Per-setup normalization scale ``T * f_star``.

        Recovered from the summary contract: ``normalized_final`` is the
        final cumulative regret divided by that scale.
        """
        rows = self.summary[self.summary["setup_id"] == setup_id]
        rows = rows[rows["normalized_final"] > 0]
        if rows.empty:
            raise SchemaError(
                f"cannot derive the oracle scale for setup {setup_id}")
        scales = rows["final_cum_regret"] / rows["normalized_final"]
        return float(scales.iloc[0])
