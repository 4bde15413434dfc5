import json

import numpy as np
import pytest

from src.export import (
    DataTable,
    ExportError,
    OutputFormat,
    format_value,
    read_table,
    to_csv_text,
    write_table,
)


@pytest.fixture
def table():
    return DataTable(
        metadata={"command": "dispersion", "v": 0.5, "times": [0.0, 0.25]},
        columns={"k": np.array([-1.0, 0.0, 1.0 / 3.0]), "admissible": np.array([True, True, False])},
    )


def test_cells_are_deterministic():
    assert format_value(True) == "1"
    assert format_value(np.bool_(False)) == "0"
    assert format_value(3) == "3"
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(1.0 / 3.0)) == 1.0 / 3.0


def test_csv_layout(table):
    lines = to_csv_text(table).splitlines()
    assert lines[:3] == ["# command=dispersion", "# v=0.5", "# times=[0.0, 0.25]"]
    assert lines[3] == "k,admissible"
    assert lines[4] == "-1,1"
    assert len(lines) == 7


def test_columns_must_match():
    with pytest.raises(ExportError):
        DataTable(columns={"a": np.zeros(2), "b": np.zeros(3)})


@pytest.mark.parametrize("fmt, name", [(OutputFormat.CSV, "table.csv"), (OutputFormat.JSON, "table.json")])
def test_write_then_read(tmp_path, table, fmt, name):
    path = write_table(table, tmp_path / "nested" / name, fmt)
    back = read_table(path)
    assert back.metadata["v"] == 0.5
    assert back.metadata["times"] == [0.0, 0.25]
    assert back.metadata["command"] == "dispersion"
    assert np.array_equal(back.columns["k"], table.columns["k"])
    assert back.rows == 3


def test_json_is_plain_json(tmp_path, table):
    payload = json.loads(write_table(table, tmp_path / "t.json", OutputFormat.JSON).read_text())
    assert payload["columns"]["admissible"] == [True, True, False]


def test_ragged_csv_is_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3\n")
    with pytest.raises(ExportError):
        read_table(path)
    path.write_text("# broken\na\n1\n")
    with pytest.raises(ExportError):
        read_table(path)
