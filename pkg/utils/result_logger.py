import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Any, Optional

import pandas as pd
from dataclasses_json import dataclass_json

from config import CSV_COLUMNS, CSV_FLOAT_FORMAT, OUTPUT_DIR

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass
class ResultRow:
    """One (scheme, sweep value, drop) outcome"""
    scheme: str
    sweep_param: str
    sweep_value: float
    drop: int
    rate_bps: float
    spectral_efficiency_bphz: float
    energy_efficiency_bpj: float
    iterations: int
    converged: bool
    error: Optional[str] = None

    @property
    def sort_key(self):
        return (self.scheme, self.sweep_value, self.drop)


class ResultLogger:
    """Collects result rows of an experiment; summaries, CSV and JSON export"""

    def __init__(self, storage_path: str = OUTPUT_DIR):
        self.storage_path = storage_path
        self.rows: List[ResultRow] = []

    def add_row(self, row: ResultRow) -> ResultRow:
        self.rows.append(row)
        if row.error:
            logger.warning("%s %s=%s drop %d failed: %s",
                           row.scheme, row.sweep_param, row.sweep_value, row.drop, row.error)
        return row

    def extend(self, rows: List[ResultRow]):
        for row in rows:
            self.add_row(row)

    def sorted_rows(self) -> List[ResultRow]:
        """Canonical order: scheme, sweep value, drop"""
        return sorted(self.rows, key=lambda row: row.sort_key)

    def get_failed_rows(self) -> List[ResultRow]:
        return [row for row in self.rows if row.error]

    def to_frame(self) -> pd.DataFrame:
        records = [row.to_dict() for row in self.sorted_rows()]
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS + ["error"])

    def summary(self) -> pd.DataFrame:
        """Mean and median over drops per (scheme, sweep value), plus the converged fraction"""
        frame = self.to_frame()
        if frame.empty:
            return pd.DataFrame()
        metrics = ["rate_bps", "spectral_efficiency_bphz", "energy_efficiency_bpj"]
        grouped = frame.groupby(["scheme", "sweep_value"], sort=True)
        summary = grouped[metrics].agg(["mean", "median"])
        summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
        summary["converged_fraction"] = grouped["converged"].mean()
        summary["drops"] = grouped["drop"].count()
        return summary.reset_index()

    def generate_summary_report(self) -> str:
        summary = self.summary()
        if summary.empty:
            return "No results recorded."
        return summary.to_string(index=False, float_format=lambda value: f"{value:.6g}")

    def export_results(self, format_type: str = "csv") -> str:
        if format_type == "json":
            return json.dumps([row.to_dict() for row in self.sorted_rows()], indent=2)
        return self._export_to_csv()

    def _export_to_csv(self) -> str:
        frame = self.to_frame()[CSV_COLUMNS]
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    def write_csv(self, filename: str) -> str:
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, "w", newline="") as f:
            f.write(self._export_to_csv())
        return filename

    def save_results(self, filename: Optional[str] = None) -> str:
        """Save rows as JSON (errors included)"""
        if not filename:
            filename = os.path.join(self.storage_path, "results.json")
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, "w") as f:
            f.write(self.export_results("json"))
        return filename

    def load_results(self, filename: str) -> bool:
        try:
            with open(filename, "r") as f:
                data = json.load(f)
            self.rows = [ResultRow.from_dict(row_data) for row_data in data]
            return True
        except (OSError, ValueError, KeyError) as e:
            logger.error("Error loading results from %s: %s", filename, e)
            return False

    def row_count_by_scheme(self) -> Dict[str, Any]:
        counts: Dict[str, Any] = {}
        for row in self.rows:
            counts[row.scheme] = counts.get(row.scheme, 0) + 1
        return counts
