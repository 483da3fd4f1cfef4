import io
import logging
import sys
from dataclasses import asdict, dataclass
from typing import Optional

import pandas as pd

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "sweep_value",
    "p_conditional",
    "p_overall",
    "p_quantum",
    "p_detect",
    "mc_frequency",
    "mc_halfwidth",
]

ENSEMBLE_COLUMNS = [
    "label",
    "n_total",
    "n_detected",
    "n_yes",
    "yes_frequency",
    "confidence_halfwidth",
    "z",
    "component",
    "prepared",
    "detected",
    "detected_fraction",
]


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    p_conditional: float
    p_overall: float
    p_quantum: float
    p_detect: float
    mc_frequency: Optional[float] = None
    mc_halfwidth: Optional[float] = None


def rows_to_frame(rows):
    """
    Convert result rows to a DataFrame with the fixed column order

    Parameters:
    - rows: Iterable of ResultRow

    Returns:
    - DataFrame with one column per ResultRow field
    """
    frame = pd.DataFrame([asdict(row) for row in rows], columns=RESULT_COLUMNS)
    return frame.astype({column: "float64" for column in RESULT_COLUMNS})


def reports_to_frame(reports):
    """
    Flatten ensemble reports to one row per preparation component

    Parameters:
    - reports: Iterable of (label, EnsembleReport) pairs

    Returns:
    - DataFrame with ENSEMBLE_COLUMNS; report totals repeat on every row
    """
    records = []
    for label, report in reports:
        fractions = report.detected_fractions()
        for count, fraction in zip(report.per_component_detected, fractions):
            records.append({
                "label": label,
                "n_total": report.n_total,
                "n_detected": report.n_detected,
                "n_yes": report.n_yes,
                "yes_frequency": report.yes_frequency,
                "confidence_halfwidth": report.confidence_halfwidth,
                "z": report.z,
                "component": count.index,
                "prepared": count.prepared,
                "detected": count.detected,
                "detected_fraction": fraction,
            })
    return pd.DataFrame(records, columns=ENSEMBLE_COLUMNS)


def export_to_csv(df, path=None):
    """
    Write a DataFrame as CSV

    Parameters:
    - df: DataFrame to export
    - path: Output file, or None to return the text

    Returns:
    - the CSV text
    """
    text = df.to_csv(index=False, float_format="%.15g", lineterminator="\n")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    return text


def export_to_json(df, path=None):
    """JSON array of records; missing Monte Carlo values become null"""
    text = df.to_json(orient="records", double_precision=15) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    return text


def export_to_excel(df, path, sheet_name="Results"):
    """
    Write a DataFrame to an Excel workbook

    Parameters:
    - df: DataFrame to export
    - path: Output file, or a binary buffer
    - sheet_name: Worksheet title

    Returns:
    - path
    """
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        df.to_excel(writer, index=False, sheet_name=sheet_name)
    return path


def generate_report(df, fmt="csv", path=None, stream=None):
    """
    Emit a table in the requested format

    Parameters:
    - df: DataFrame (result rows or a validation report)
    - fmt: "csv", "json" or "excel"
    - path: Output file; None writes text formats to stream
    - stream: Text stream used when path is None (default: sys.stdout)
    """
    if fmt == "excel":
        if path is None:
            raise ConfigError("the excel format needs an output path", "output.path")
        export_to_excel(df, path)
    elif fmt == "csv":
        text = export_to_csv(df, path)
    elif fmt == "json":
        text = export_to_json(df, path)
    else:
        raise ConfigError(f"unknown output format {fmt!r}", "output.format")

    if path is None:
        (stream or sys.stdout).write(text)
    else:
        logger.debug("wrote %d rows to %s (%s)", len(df), path, fmt)


def excel_bytes(df, sheet_name="Results"):
    """Workbook contents as bytes"""
    buffer = io.BytesIO()
    export_to_excel(df, buffer, sheet_name)
    return buffer.getvalue()
