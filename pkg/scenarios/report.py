"""CSV and JSON emission of scenario reports."""

import json
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from models.scenario_model import MetricRow, Report

CSV_COLUMNS = [
    "scenario",
    "N",
    "r",
    "phi_kind",
    "phi_norm",
    "level",
    "nodes",
    "value_dirichlet",
    "value_navier",
    "gap",
    "lambda",
    "constraint_res",
    "el_res",
    "converged",
    "verdict",
]
FLOAT_FORMAT = "%.17g"
_TEXT_COLUMNS = ("scenario", "phi_kind", "verdict")


def rows_frame(reports: Iterable[Report]) -> pd.DataFrame:
    """All rows of ``reports`` in order, restricted to the fixed CSV columns."""
    records = [
        row.model_dump(by_alias=True, exclude={"extras"})
        for report in reports
        for row in report.rows
    ]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def to_csv(reports: Iterable[Report], path: Optional[Union[str, Path]] = None) -> str:
    """Emit the CSV text; also write it to ``path`` when given."""
    text = rows_frame(reports).to_csv(
        index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n"
    )
    if path is not None:
        Path(path).write_text(text)
    return text


def to_json(reports: Iterable[Report], path: Optional[Union[str, Path]] = None) -> str:
    """Full reports (config echo, rows with extras, verdicts, diagnostics) as JSON."""
    payload = [report.model_dump(mode="json", by_alias=True) for report in reports]
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_reports(reports: List[Report], fmt: str, path: Optional[Union[str, Path]] = None) -> str:
    if fmt == "csv":
        return to_csv(reports, path)
    if fmt == "json":
        return to_json(reports, path)
    raise ValueError(f"unknown report format {fmt!r}")


def parse_csv(path: Union[str, Path]) -> List[MetricRow]:
    """Read rows written by :func:`to_csv` back into models (extras are not stored)."""
    frame = pd.read_csv(path, dtype={col: str for col in _TEXT_COLUMNS}, keep_default_na=False, na_values=["nan"])
    return [MetricRow.model_validate(record) for record in frame.to_dict(orient="records")]
