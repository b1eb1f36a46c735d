import shutil
from pathlib import Path

import pandas as pd
import pytest

from regretplots.tables import ROUND_COLUMNS, SchemaError, TraceTable

FIXTURES = Path(__file__).parent / "fixtures"


def test_load_fixture_tables():
    table = TraceTable.load(FIXTURES)
    assert table.setups() == [1, 2, 3]
    assert table.vector_ids() == ["0.25-0.5-1", "1-0.25-0.5"]
    assert set(ROUND_COLUMNS) == set(table.rounds.columns)


def test_oracle_scale_recovery():
    table = TraceTable.load(FIXTURES)
    # fixtures were generated with T = 25 and f* = 0.6 for setup 1
    assert table.oracle_scale(1) == pytest.approx(25 * 0.6)


def test_missing_column_is_named(tmp_path):
    shutil.copytree(FIXTURES, tmp_path / "data")
    target = next((tmp_path / "data").glob("rounds_*.csv"))
    df = pd.read_csv(target)
    df.drop(columns=["term2"]).to_csv(target, index=False)
    with pytest.raises(SchemaError, match="term2"):
        TraceTable.load(tmp_path / "data")


def test_reordered_columns_rejected(tmp_path):
    shutil.copytree(FIXTURES, tmp_path / "data")
    target = (tmp_path / "data") / "summary.csv"
    df = pd.read_csv(target)
    df[list(reversed(df.columns))].to_csv(target, index=False)
    with pytest.raises(SchemaError, match="setup_id"):
        TraceTable.load(tmp_path / "data")


def test_nonmonotone_rounds_rejected(tmp_path):
    shutil.copytree(FIXTURES, tmp_path / "data")
    target = next((tmp_path / "data").glob("rounds_*.csv"))
    df = pd.read_csv(target)
    df.loc[3, "t"] = 1
    df.to_csv(target, index=False)
    with pytest.raises(SchemaError, match="strictly increasing"):
        TraceTable.load(tmp_path / "data")


def test_empty_directory_rejected(tmp_path):
    with pytest.raises(SchemaError, match="no round CSV"):
        TraceTable.load(tmp_path)
