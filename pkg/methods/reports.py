#!/usr/bin/env python3
"""
Report documents

One ReportDocument per executed command: the effective config, the results
payload, tables that are also written as CSV, warnings, and a provenance block
that holds everything run-dependent (wall time, timestamp).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0.0"
REPORT_SUFFIX = ".report.json"


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass
class ReportDocument:
    """Results of one command"""
    command: str
    config: Dict[str, Any]
    results: Dict[str, Any]
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    verdict: Optional[str] = None
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 2 if self.verdict == "fails" else 0

    def payload(self) -> Dict[str, Any]:
        """Everything except provenance; identical across runs of one config."""
        return jsonable({
            "command": self.command,
            "verdict": self.verdict,
            "config": self.config,
            "results": self.results,
            "tables": self.tables,
            "warnings": self.warnings,
        })

    def to_json(self) -> Dict[str, Any]:
        data = self.payload()
        data["provenance"] = jsonable(self.provenance)
        return data

    def stamp(self, wall_time: float, tol: float, cap: int) -> None:
        self.provenance = {
            "artifact_version": ARTIFACT_VERSION,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time_s": round(wall_time, 3),
            "tolerance": tol,
            "cap": cap,
        }

    def export(self, output_dir: Path) -> List[Path]:
        """Write <command>.report.json and one <command>.<table>.csv per table."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        written = []

        report_file = output_dir / f"{self.command}{REPORT_SUFFIX}"
        with open(report_file, "w") as f:
            json.dump(self.to_json(), f, indent=2)
        written.append(report_file)

        for name, rows in self.tables.items():
            table_file = output_dir / f"{self.command}.{name}.csv"
            pd.DataFrame(jsonable(rows)).to_csv(table_file, index=False)
            written.append(table_file)

        logger.info(f"Report exported to: {output_dir} ({len(written)} files)")
        return written

    def print_summary(self) -> None:
        line = f"{self.command}: "
        headline = self.results.get("headline")
        if headline is not None:
            line += f"{headline}"
        if self.verdict is not None:
            line += f" [{self.verdict}]"
        print(line)
        for warning in self.warnings:
            print(f"  warning: {warning}")


def load_report(path: Path) -> Dict[str, Any]:
    with open(path) as f:
        return json.load(f)
