import csv
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

logger = logging.getLogger("export")

FLOAT_FORMAT = ".17g"


class ExportError(Exception):
    """Raised when a data table cannot be written or read back"""
    pass


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


@dataclass
class DataTable:
    """Named columns of equal length plus free-form metadata"""
    metadata: Dict[str, Any] = field(default_factory=dict)
    columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {name: len(values) for name, values in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ExportError(f"columns differ in length: {lengths}")

    @property
    def rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0


def format_value(value: Any) -> str:
    """Deterministic text for one cell: bools as 0/1, floats round-trip exact"""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def _metadata_value(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_metadata_value(item) for item in value]
    return value


def _json_column(values: np.ndarray) -> List[Any]:
    return [_metadata_value(item) for item in np.asarray(values).tolist()]


def to_csv_text(table: DataTable) -> str:
    lines = [f"# {key}={format_value(_metadata_value(value))}" for key, value in table.metadata.items()]
    names = list(table.columns)
    rows = zip(*(table.columns[name] for name in names))
    buffer = [",".join(names)] + [",".join(format_value(value) for value in row) for row in rows]
    return "\n".join(lines + buffer) + "\n"


def to_json_text(table: DataTable) -> str:
    payload = {
        "metadata": {key: _metadata_value(value) for key, value in table.metadata.items()},
        "columns": {name: _json_column(values) for name, values in table.columns.items()},
    }
    return json.dumps(payload, indent=2) + "\n"


def write_table(table: DataTable, path: Union[str, Path], fmt: OutputFormat = OutputFormat.CSV) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    text = to_csv_text(table) if fmt == OutputFormat.CSV else to_json_text(table)
    path.write_text(text)
    logger.debug(f"wrote {table.rows} rows to {path}")
    return path


def _parse_metadata(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def read_csv_table(path: Union[str, Path]) -> DataTable:
    """Read a table written by write_table in CSV form; all columns come back as floats"""
    metadata: Dict[str, Any] = {}
    data_lines = []
    with Path(path).open("r", newline="") as f:
        for line in f:
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if not sep:
                    raise ExportError(f"malformed metadata line in {path}: {line.strip()}")
                metadata[key] = _parse_metadata(value)
            elif line.strip():
                data_lines.append(line)

    reader = csv.reader(data_lines)
    try:
        names = next(reader)
    except StopIteration:
        raise ExportError(f"{path} has no header row")
    values: List[List[float]] = [[] for _ in names]
    for number, row in enumerate(reader, start=2):
        if len(row) != len(names):
            raise ExportError(f"{path}: data row {number} has {len(row)} fields, expected {len(names)}")
        try:
            for column, cell in zip(values, row):
                column.append(float(cell))
        except ValueError:
            raise ExportError(f"{path}: data row {number} is not numeric")
    return DataTable(metadata=metadata, columns={name: np.asarray(column) for name, column in zip(names, values)})


def read_json_table(path: Union[str, Path]) -> DataTable:
    try:
        payload = json.loads(Path(path).read_text())
        return DataTable(
            metadata=payload["metadata"],
            columns={name: np.asarray(values) for name, values in payload["columns"].items()},
        )
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ExportError(f"{path} is not a data table: {e}")


def read_table(path: Union[str, Path]) -> DataTable:
    if Path(path).suffix.lower() == ".json":
        return read_json_table(path)
    return read_csv_table(path)
