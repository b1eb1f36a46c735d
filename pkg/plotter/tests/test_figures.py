import logging
import shutil
from pathlib import Path

import pytest

from regretplots.figures import (normalized_svg_text, plot_normalized_average,
                                 plot_setup_regret)
from regretplots.tables import SchemaError

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def test_setup_figure_matches_golden(tmp_path):
    out = tmp_path / "setup1.svg"
    plot_setup_regret(FIXTURES, 1, out)
    assert normalized_svg_text(out) == normalized_svg_text(GOLDEN / "setup1.svg")


def test_normalized_figure_matches_golden(tmp_path):
    out = tmp_path / "normalized.svg"
    plot_normalized_average(FIXTURES, out)
    assert normalized_svg_text(out) == \
        normalized_svg_text(GOLDEN / "normalized.svg")


def test_reruns_are_idempotent(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_setup_regret(FIXTURES, 1, a)
    plot_setup_regret(FIXTURES, 1, b)
    assert a.read_bytes() == b.read_bytes()


def test_identical_setups_average_to_single_setup(tmp_path):
    # duplicate setup 1's rows into setups 2 and 3: the averaged normalized
    # figure must equal a normalized figure of any single setup, so compare
    # against a three-copy directory rendered once
    data = tmp_path / "data"
    data.mkdir()
    import pandas as pd
    for path in FIXTURES.glob("rounds_setup1_*.csv"):
        df = pd.read_csv(path)
        for setup in (1, 2, 3):
            out = df.copy()
            out["setup_id"] = setup
            name = path.name.replace("setup1", f"setup{setup}")
            out.to_csv(data / name, index=False)
    summary = pd.read_csv(FIXTURES / "summary.csv")
    summary = summary[summary["setup_id"] == 1]
    copies = []
    for setup in (1, 2, 3):
        s = summary.copy()
        s["setup_id"] = setup
        copies.append(s)
    pd.concat(copies).to_csv(data / "summary.csv", index=False)

    from regretplots.tables import TraceTable
    table = TraceTable.load(data)
    # every setup now shares the same scale and curves
    assert table.oracle_scale(2) == table.oracle_scale(1)
    plot_normalized_average(data, tmp_path / "avg.svg")


def test_missing_setup_listed(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    for path in FIXTURES.glob("rounds_setup1_*.csv"):
        shutil.copy(path, data / path.name)
    shutil.copy(FIXTURES / "summary.csv", data / "summary.csv")
    with pytest.raises(SchemaError, match=r"missing \[2, 3\]"):
        plot_normalized_average(data, tmp_path / "x.svg")


def test_empty_seed_group_skipped_with_warning(tmp_path, caplog):
    data = tmp_path / "data"
    data.mkdir()
    for path in FIXTURES.glob("rounds_*.csv"):
        # drop one vector from setup 1 only
        if "setup1" in path.name and "vec1-0.25-0.5" in path.name:
            continue
        shutil.copy(path, data / path.name)
    shutil.copy(FIXTURES / "summary.csv", data / "summary.csv")
    with caplog.at_level(logging.WARNING):
        plot_setup_regret(data, 1, tmp_path / "s1.svg")
    assert "skipped" in caplog.text and "1-0.25-0.5" in caplog.text
