#!/usr/bin/env python3
"""
Report summary table

Collects every *.report.json under a results directory into one CSV with one
row per (config, command): verdict, headline, warning count and wall time.

Usage:
    python3 methods/tools/summarize_reports.py [results_dir] [--output summary.csv]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
from reports import REPORT_SUFFIX, load_report

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parents[2]
DEFAULT_RESULTS = ROOT / "results"


def collect_reports(results_dir: Path) -> List[Dict[str, Any]]:
    rows = []
    for path in sorted(Path(results_dir).rglob(f"*{REPORT_SUFFIX}")):
        report = load_report(path)
        provenance = report.get("provenance", {})
        rows.append({
            "config": path.parent.name,
            "command": report.get("command"),
            "verdict": report.get("verdict"),
            "headline": report.get("results", {}).get("headline"),
            "warnings": len(report.get("warnings", [])),
            "tolerance": provenance.get("tolerance"),
            "cap": provenance.get("cap"),
            "wall_time_s": provenance.get("wall_time_s"),
        })
    return rows


def summarize(results_dir: Path, output: Path) -> pd.DataFrame:
    rows = collect_reports(results_dir)
    if not rows:
        raise FileNotFoundError(f"No {REPORT_SUFFIX} files found under {results_dir}")
    frame = pd.DataFrame(rows).sort_values(["config", "command"]).reset_index(drop=True)
    output.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(output, index=False)
    logger.info(f"Summarized {len(frame)} reports into {output}")
    return frame


def main() -> int:
    parser = argparse.ArgumentParser(description="Collect nadd reports into one CSV")
    parser.add_argument("results_dir", nargs="?", default=str(DEFAULT_RESULTS))
    parser.add_argument("--output", help="CSV path (default: <results_dir>/summary.csv)")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(filename)s:%(lineno)s] %(message)s")
    results_dir = Path(args.results_dir)
    output = Path(args.output) if args.output else results_dir / "summary.csv"
    try:
        frame = summarize(results_dir, output)
    except FileNotFoundError as e:
        logger.error(str(e))
        return 1

    print(frame.to_string(index=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
